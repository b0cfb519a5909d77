import json
import math

import pytest

import iproject as ip


def two_atoms():
    return ip.DiscreteMeasure([[0.0], [1.0]])


def test_two_atom_tilt():
    q = two_atoms()
    r = ip.project(q, ip.MomentFamily.custom(q, [[-1.0, 2.0]]))
    assert r.converged
    assert r.kl == pytest.approx(0.056633, abs=1e-6)
    assert r.density == pytest.approx([4 / 3, 2 / 3], abs=1e-9)
    assert r.binding_set == [0]
    assert abs(r.kl + math.log(r.value)) <= 1e-8


def test_feasible_reference_is_unchanged():
    q = ip.DiscreteMeasure([[0.1, 0.3], [0.4, 0.4], [0.5, 0.9]])
    r = ip.project(q, ip.MomentFamily.unconditional_fsd(0.0, 1.0))
    assert r.kl == 0.0
    assert all(abs(s.value - 1.0) <= 1e-12 for s in r.stages)


def test_scheme_matches_oracle():
    q = ip.generate_instance("fsd", atoms=30, seed=4)
    fam = ip.MomentFamily.unconditional_fsd(0.2, 0.8)
    r = ip.project(q, fam)
    o = ip.bregman_dykstra(q, ip.grid_constraints(fam, q))
    assert r.converged and o.converged
    assert abs(r.kl - o.kl) <= 1e-4
    assert r.max_slack <= 1e-6


def test_partition_size_bound():
    q = ip.generate_instance("fsd", atoms=40, seed=5)
    fam = ip.MomentFamily.unconditional_fsd(0.0, 1.0)
    for eps in (0.05, 0.1, 0.25, 0.5):
        part = ip.build_partition(q, fam, eps)
        assert len(part) <= math.ceil(4 + 2 / eps)
        assert part.achieved_epsilon <= eps


def test_pava_and_closed_form():
    assert ip.pava([3.0, 1.0, 2.0], [1.0, 1.0, 1.0]) == pytest.approx([2.0, 2.0, 2.0])
    q = ip.DiscreteMeasure([[0.25], [0.75]])
    res = ip.pava_closed_form(q, ip.Cdf([(0.25, 1.0)]))
    assert res.fitted == [1.0, 1.0]


def test_marginal_strict_mass():
    q = ip.DiscreteMeasure([[k / 200] for k in range(1, 201)])
    fam = ip.MomentFamily.marginal_given_g(ip.Cdf.uniform01(), 0.8)
    assert ip.check_assumptions(q, fam).strict_mass == pytest.approx(0.2, abs=1e-14)


def test_result_json_round_trip():
    q = ip.generate_instance("fsd", atoms=20, seed=6)
    fam = ip.MomentFamily.unconditional_fsd(0.2, 0.8)
    r = ip.project(q, fam)
    doc = json.loads(ip.result_json(r, fam))
    assert abs(ip.kl_divergence(doc["density"], q) - doc["kl"]) <= 1e-10


def test_input_errors_raise():
    q = two_atoms()
    with pytest.raises(ValueError):
        ip.MomentFamily.custom(q, [[1.0]])
    with pytest.raises(ValueError):
        ip.project(q, ip.MomentFamily.unconditional_fsd(0.0, 1.0))
