#include "iproj/measure.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "iproj/error.hpp"

namespace iproj {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kDensityTol = 1e-10;

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": length mismatch (" << a << " vs " << b << ")";
    throw InputError(os.str());
  }
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(const std::vector<std::vector<double>>& atoms,
                                 const std::vector<double>& weights) {
  init(atoms, weights, false);
}

DiscreteMeasure DiscreteMeasure::normalized(const std::vector<std::vector<double>>& atoms,
                                            const std::vector<double>& weights) {
  DiscreteMeasure q;
  q.init(atoms, weights, true);
  return q;
}

DiscreteMeasure DiscreteMeasure::uniform(const std::vector<std::vector<double>>& atoms) {
  return normalized(atoms, std::vector<double>(atoms.size(), 1.0));
}

void DiscreteMeasure::init(const std::vector<std::vector<double>>& atoms,
                           const std::vector<double>& weights, bool renormalize) {
  if (atoms.empty()) throw InputError("measure needs at least one atom");
  require_same_length(atoms.size(), weights.size(), "atoms/weights");
  dim_ = atoms.front().size();
  if (dim_ == 0) throw InputError("atoms must have dimension >= 1");

  std::map<std::vector<double>, std::size_t> seen;
  CompensatedSum total;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const auto& a = atoms[j];
    if (a.size() != dim_) throw InputError("atoms have inconsistent dimensions");
    for (double x : a) {
      if (!std::isfinite(x)) throw InputError("atom coordinates must be finite");
    }
    const double w = weights[j];
    if (!std::isfinite(w) || w < 0.0) throw InputError("weights must be finite and nonnegative");
    total.add(w);
    auto [it, inserted] = seen.emplace(a, weights_.size());
    if (inserted) {
      coords_.insert(coords_.end(), a.begin(), a.end());
      weights_.push_back(w);
    } else {
      weights_[it->second] += w;
    }
  }
  const double mass = total.value();
  if (renormalize) {
    if (!(mass > 0.0)) throw InputError("total weight must be positive");
  } else if (std::abs(mass - 1.0) > kNormTol) {
    std::ostringstream os;
    os << std::setprecision(17) << "weights sum to " << mass << ", expected 1";
    throw InputError(os.str());
  }
  for (double& w : weights_) w /= mass;
}

std::vector<double> DiscreteMeasure::coordinates(std::size_t k) const {
  if (k >= dim_) throw InputError("coordinate index out of range");
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = coord(j, k);
  return out;
}

DiscreteMeasure DiscreteMeasure::reweighted(const std::vector<double>& weights) const {
  require_same_length(weights.size(), size(), "reweighted");
  DiscreteMeasure q;
  q.dim_ = dim_;
  q.coords_ = coords_;
  CompensatedSum total;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("weights must be finite and nonnegative");
    total.add(w);
  }
  const double mass = total.value();
  if (!(mass > 0.0)) throw InputError("total weight must be positive");
  q.weights_.resize(size());
  for (std::size_t j = 0; j < size(); ++j) q.weights_[j] = weights[j] / mass;
  return q;
}

DensityVector::DensityVector(std::vector<double> values, const DiscreteMeasure& q)
    : values_(std::move(values)) {
  require_same_length(values_.size(), q.size(), "density");
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw InputError("density values must be finite and >= 0");
  }
  const double mass = integrate(q, values_);
  if (std::abs(mass - 1.0) > kDensityTol) {
    std::ostringstream os;
    os << std::setprecision(17) << "density integrates to " << mass << ", expected 1";
    throw InputError(os.str());
  }
}

DensityVector DensityVector::ones(const DiscreteMeasure& q) {
  return DensityVector(std::vector<double>(q.size(), 1.0), q);
}

double integrate(const DiscreteMeasure& q, std::span<const double> f) {
  require_same_length(f.size(), q.size(), "integrate");
  CompensatedSum s;
  for (std::size_t j = 0; j < f.size(); ++j) s.add(f[j] * q.weight(j));
  return s.value();
}

double kl_divergence(const DensityVector& p, const DiscreteMeasure& q) {
  require_same_length(p.size(), q.size(), "kl_divergence");
  CompensatedSum s;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double pj = p[j];
    if (pj > 0.0) s.add(q.weight(j) * pj * std::log(pj));
  }
  return s.value();
}

double l1_distance(std::span<const double> f, std::span<const double> g, const DiscreteMeasure& q) {
  require_same_length(f.size(), g.size(), "l1_distance");
  require_same_length(f.size(), q.size(), "l1_distance");
  CompensatedSum s;
  for (std::size_t j = 0; j < f.size(); ++j) s.add(std::abs(f[j] - g[j]) * q.weight(j));
  return s.value();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw InputError(where + ": cannot parse number '" + s + "'");
  }
  return v;
}

}  // namespace

MeasureCsv read_measure_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_csv(line);
    break;
  }
  const std::string name = path.string();
  if (header.size() < 2 || header.front() != "w") {
    throw InputError(name + ":" + std::to_string(line_no) +
                     ": header must be 'w,x1,...,xd'");
  }
  const std::size_t d = header.size() - 1;
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (fields.size() != d + 1) {
      throw InputError(where + ": expected " + std::to_string(d + 1) + " fields, got " +
                       std::to_string(fields.size()));
    }
    weights.push_back(parse_double(fields[0], where));
    std::vector<double> a(d);
    for (std::size_t k = 0; k < d; ++k) a[k] = parse_double(fields[k + 1], where);
    atoms.push_back(std::move(a));
  }
  if (atoms.empty()) throw InputError(name + ": no atoms");
  CompensatedSum total;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!std::isfinite(weights[j]) || weights[j] < 0.0) {
      throw InputError(name + ": negative or non-finite weight in row " + std::to_string(j + 1));
    }
    total.add(weights[j]);
  }
  MeasureCsv out{DiscreteMeasure::normalized(atoms, weights), {}};
  if (std::abs(total.value() - 1.0) > 1e-6) {
    std::ostringstream os;
    os << std::setprecision(17) << name << ": weights sum to " << total.value()
       << "; renormalized to 1";
    out.warnings.push_back(os.str());
  }
  if (out.measure.size() != atoms.size()) {
    out.warnings.push_back(name + ": merged " + std::to_string(atoms.size() - out.measure.size()) +
                           " duplicate atom(s)");
  }
  return out;
}

void write_measure_csv(const std::filesystem::path& path, const DiscreteMeasure& q) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "w";
  for (std::size_t k = 0; k < q.dim(); ++k) out << ",x" << (k + 1);
  out << "\n" << std::setprecision(17);
  for (std::size_t j = 0; j < q.size(); ++j) {
    out << q.weight(j);
    for (std::size_t k = 0; k < q.dim(); ++k) out << "," << q.coord(j, k);
    out << "\n";
  }
}

}  // namespace iproj
