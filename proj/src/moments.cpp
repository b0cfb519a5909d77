#include "iproj/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iproj/error.hpp"

namespace iproj {

Cdf::Cdf(std::vector<std::pair<double, double>> knots, Interpolation interp)
    : knots_(std::move(knots)), interp_(interp) {
  if (knots_.empty()) throw InputError("CDF needs at least one knot");
  double prev_x = -INFINITY;
  double prev_f = 0.0;
  for (const auto& [x, f] : knots_) {
    if (!std::isfinite(x) || !std::isfinite(f)) throw InputError("CDF knots must be finite");
    if (!(x > prev_x)) throw InputError("CDF knot locations must be strictly increasing");
    if (f < 0.0 || f > 1.0 + 1e-12) throw InputError("CDF values must lie in [0, 1]");
    if (f < prev_f) throw InputError("CDF values must be nondecreasing");
    prev_x = x;
    prev_f = f;
  }
}

Cdf Cdf::uniform01() { return Cdf({{0.0, 0.0}, {1.0, 1.0}}, Interpolation::Linear); }

double Cdf::operator()(double x) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                             [](double v, const auto& k) { return v < k.first; });
  if (it == knots_.begin()) return 0.0;
  const auto& left = *std::prev(it);
  if (interp_ == Interpolation::Step || it == knots_.end()) return left.second;
  const auto& right = *it;
  const double t = (x - left.first) / (right.first - left.first);
  return left.second + t * (right.second - left.second);
}

bool CubeIndex::contains(std::span<const double> z) const {
  if (z.size() != a.size()) throw InputError("cube dimension mismatch");
  const double side = 2.0 * r;
  for (std::size_t u = 0; u < a.size(); ++u) {
    const double lo = (a[u] - 1) / side;
    const double hi = a[u] / side;
    if (!(z[u] > lo && z[u] <= hi)) return false;
  }
  return true;
}

bool CubeIndex::inside(const CubeIndex& outer) const {
  if (outer.a.size() != a.size()) return false;
  const long long r1 = r;
  const long long r2 = outer.r;
  for (std::size_t u = 0; u < a.size(); ++u) {
    // ((a-1)/2r1, a/2r1] within ((b-1)/2r2, b/2r2]
    const long long ai = a[u];
    const long long bi = outer.a[u];
    if ((ai - 1) * r2 < (bi - 1) * r1) return false;
    if (ai * r2 > bi * r1) return false;
  }
  return true;
}

std::vector<CubeIndex> cubes_at_level(int r, int dim) {
  if (r < 1 || dim < 1) throw InputError("cube level and dimension must be >= 1");
  const int side = 2 * r;
  double count = std::pow(static_cast<double>(side), dim);
  if (count > 5e6) throw InputError("too many cubes at this level");
  std::vector<CubeIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  CubeIndex c{std::vector<int>(dim, 1), r};
  while (true) {
    out.push_back(c);
    int u = dim - 1;
    while (u >= 0 && c.a[u] == side) {
      c.a[u] = 1;
      --u;
    }
    if (u < 0) break;
    ++c.a[u];
  }
  return out;
}

std::optional<CubeIndex> cube_of(std::span<const double> z, int r) {
  CubeIndex c{std::vector<int>(z.size(), 1), r};
  const int side = 2 * r;
  for (std::size_t u = 0; u < z.size(); ++u) {
    if (!(z[u] > 0.0 && z[u] <= 1.0)) return std::nullopt;
    int a = static_cast<int>(std::ceil(z[u] * side));
    a = std::clamp(a, 1, side);
    while (a > 1 && z[u] <= (a - 1) / static_cast<double>(side)) --a;
    while (a < side && z[u] > a / static_cast<double>(side)) ++a;
    c.a[u] = a;
  }
  return c;
}

MomentFamily MomentFamily::unconditional_fsd(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InputError("FSD index interval needs finite gamma_min < gamma_max");
  }
  MomentFamily f;
  f.kind_ = FamilyKind::UnconditionalFSD;
  f.lo_ = lo;
  f.hi_ = hi;
  return f;
}

MomentFamily MomentFamily::conditional_fsd(double lo, double hi, int dz, int r0, int r_max) {
  MomentFamily f = unconditional_fsd(lo, hi);
  if (dz < 1) throw InputError("conditional FSD needs d_Z >= 1");
  if (r0 < 1 || r_max < r0) throw InputError("cube levels need 1 <= r0 <= r_max");
  f.kind_ = FamilyKind::ConditionalFSD;
  f.dz_ = dz;
  f.r0_ = r0;
  f.r_max_ = r_max;
  return f;
}

MomentFamily MomentFamily::marginal_given_g(Cdf g, double gamma_max) {
  if (!(gamma_max > 0.0) || !std::isfinite(gamma_max)) {
    throw InputError("marginal family needs gamma_max > 0");
  }
  MomentFamily f;
  f.kind_ = FamilyKind::MarginalGivenG;
  f.lo_ = 0.0;
  f.hi_ = gamma_max;
  f.g_ = std::move(g);
  return f;
}

MomentFamily MomentFamily::custom(const DiscreteMeasure& q, std::vector<std::vector<double>> f) {
  if (f.empty()) throw InputError("custom family needs at least one member");
  for (const auto& m : f) {
    if (m.size() != q.size()) throw InputError("custom member length must equal atom count");
    for (double x : m) {
      if (!std::isfinite(x)) throw InputError("custom member values must be finite");
    }
  }
  MomentFamily fam;
  fam.kind_ = FamilyKind::Custom;
  fam.custom_dim_ = q.dim();
  fam.custom_atoms_.reserve(q.size() * q.dim());
  for (std::size_t j = 0; j < q.size(); ++j) {
    auto a = q.atom(j);
    fam.custom_atoms_.insert(fam.custom_atoms_.end(), a.begin(), a.end());
  }
  fam.members_ = std::move(f);
  return fam;
}

MomentFamily MomentFamily::with_tail(TailConfig tail) const {
  if (!(tail.K > 0.0) || !(tail.delta > 0.0)) throw InputError("tail needs K > 0 and delta > 0");
  MomentFamily f = *this;
  f.tail_ = tail;
  return f;
}

std::size_t MomentFamily::required_dim() const {
  switch (kind_) {
    case FamilyKind::UnconditionalFSD:
      return 2;
    case FamilyKind::ConditionalFSD:
      return 2 + static_cast<std::size_t>(dz_);
    case FamilyKind::MarginalGivenG:
      return 1;
    case FamilyKind::Custom:
      return custom_dim_;
  }
  return 0;
}

void MomentFamily::check_compatible(const DiscreteMeasure& q) const {
  if (q.dim() != required_dim()) {
    std::ostringstream os;
    os << to_string(kind_) << " family needs atoms of dimension " << required_dim() << ", got "
       << q.dim();
    throw InputError(os.str());
  }
}

void MomentFamily::check_index(const MomentIndex& index) const {
  if (index.tail && !tail_) throw InputError("tail member requested but no tail configured");
  switch (kind_) {
    case FamilyKind::Custom:
      if (index.member >= members_.size()) throw InputError("custom member index out of range");
      return;
    case FamilyKind::ConditionalFSD: {
      if (!index.cube) throw InputError("conditional FSD index needs a cube");
      const auto& c = *index.cube;
      if (static_cast<int>(c.a.size()) != dz_) throw InputError("cube dimension mismatch");
      if (c.r < r0_) throw InputError("cube level below r0");
      for (int a : c.a) {
        if (a < 1 || a > 2 * c.r) throw InputError("cube coordinate out of range");
      }
      [[fallthrough]];
    }
    case FamilyKind::UnconditionalFSD:
    case FamilyKind::MarginalGivenG:
      if (!(index.gamma >= lo_ && index.gamma <= hi_)) {
        std::ostringstream os;
        os << "gamma " << index.gamma << " outside [" << lo_ << ", " << hi_ << "]";
        throw InputError(os.str());
      }
      return;
  }
}

std::size_t MomentFamily::custom_atom(std::span<const double> omega) const {
  const std::size_t n = custom_atoms_.size() / custom_dim_;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::equal(omega.begin(), omega.end(), custom_atoms_.begin() + j * custom_dim_)) return j;
  }
  throw InputError("custom family is only defined at the atoms it was built on");
}

double MomentFamily::moment(const MomentIndex& index, std::span<const double> omega) const {
  if (omega.size() != required_dim()) throw InputError("atom dimension does not match family");
  check_index(index);
  const double g = index.gamma;
  switch (kind_) {
    case FamilyKind::UnconditionalFSD:
      return (omega[1] <= g ? 1.0 : 0.0) - (omega[0] <= g ? 1.0 : 0.0);
    case FamilyKind::ConditionalFSD: {
      if (!index.cube->contains(omega.subspan(2))) return 0.0;
      return (omega[1] <= g ? 1.0 : 0.0) - (omega[0] <= g ? 1.0 : 0.0);
    }
    case FamilyKind::MarginalGivenG:
      return (omega[0] <= g ? 1.0 : 0.0) - (*g_)(g);
    case FamilyKind::Custom:
      return members_[index.member][custom_atom(omega)];
  }
  return 0.0;
}

double MomentFamily::evaluate(const MomentIndex& index, std::span<const double> omega) const {
  const double f = moment(index, omega);
  if (index.tail) return tail_->K - std::pow(std::abs(f), 1.0 + tail_->delta);
  return -f;
}

std::vector<double> MomentFamily::moments(const MomentIndex& index, const DiscreteMeasure& q) const {
  check_compatible(q);
  std::vector<double> out(q.size());
  if (kind_ == FamilyKind::Custom && custom_atoms_.size() == q.size() * q.dim()) {
    bool same = true;
    for (std::size_t j = 0; j < q.size() && same; ++j) {
      auto a = q.atom(j);
      same = std::equal(a.begin(), a.end(), custom_atoms_.begin() + j * custom_dim_);
    }
    if (same) {
      check_index(index);
      return members_[index.member];
    }
  }
  for (std::size_t j = 0; j < q.size(); ++j) out[j] = moment(index, q.atom(j));
  return out;
}

std::vector<double> MomentFamily::values(const MomentIndex& index, const DiscreteMeasure& q) const {
  std::vector<double> out = moments(index, q);
  if (index.tail) {
    for (double& x : out) x = tail_->K - std::pow(std::abs(x), 1.0 + tail_->delta);
  } else {
    for (double& x : out) x = -x;
  }
  return out;
}

double family_mean(const MomentFamily& family, const MomentIndex& index, const DiscreteMeasure& q) {
  return integrate(q, family.values(index, q));
}

std::vector<double> gamma_grid(const MomentFamily& family, const DiscreteMeasure& q,
                               std::size_t resolution) {
  if (resolution < 1) throw InputError("grid resolution must be >= 1");
  if (family.kind() == FamilyKind::Custom) return {};
  family.check_compatible(q);
  const double lo = family.gamma_min();
  const double hi = family.gamma_max();
  std::vector<double> pts;
  for (std::size_t k = 0; k <= resolution; ++k) {
    pts.push_back(k == resolution ? hi : lo + (hi - lo) * static_cast<double>(k) / resolution);
  }
  auto add = [&](double x) {
    if (x >= lo && x <= hi) pts.push_back(x);
  };
  if (family.kind() == FamilyKind::MarginalGivenG) {
    for (std::size_t j = 0; j < q.size(); ++j) add(q.coord(j, 0));
    for (const auto& k : family.cdf()->knots()) add(k.first);
  } else {
    for (std::size_t j = 0; j < q.size(); ++j) {
      add(q.coord(j, 0));
      add(q.coord(j, 1));
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::vector<MomentIndex> index_grid(const MomentFamily& family, const DiscreteMeasure& q,
                                    std::size_t resolution) {
  std::vector<MomentIndex> base;
  if (family.kind() == FamilyKind::Custom) {
    if (resolution < 1) throw InputError("grid resolution must be >= 1");
    for (std::size_t k = 0; k < family.custom_size(); ++k) base.push_back({0.0, {}, k, false});
  } else if (family.kind() == FamilyKind::ConditionalFSD) {
    const auto gammas = gamma_grid(family, q, resolution);
    std::vector<CubeIndex> cubes;
    for (int r = family.r0(); r <= family.r_max(); ++r) {
      auto level = cubes_at_level(r, family.dz());
      cubes.insert(cubes.end(), level.begin(), level.end());
    }
    base.reserve(gammas.size() * cubes.size());
    for (double g : gammas) {
      for (const auto& c : cubes) base.push_back({g, c, 0, false});
    }
  } else {
    for (double g : gamma_grid(family, q, resolution)) base.push_back({g, {}, 0, false});
  }
  if (!family.tail()) return base;
  std::vector<MomentIndex> out;
  out.reserve(2 * base.size());
  for (const auto& idx : base) {
    out.push_back(idx);
    MomentIndex t = idx;
    t.tail = true;
    out.push_back(t);
  }
  return out;
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::UnconditionalFSD:
      return "unconditional_fsd";
    case FamilyKind::ConditionalFSD:
      return "conditional_fsd";
    case FamilyKind::MarginalGivenG:
      return "marginal_given_g";
    case FamilyKind::Custom:
      return "custom";
  }
  return "unknown";
}

}  // namespace iproj
