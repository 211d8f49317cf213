#include "arlhom/coefficients.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "arlhom/rng.hpp"

namespace arlhom {

namespace {

bool near_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) < tol * std::max(1.0, std::abs(x));
}

void check_positive_values(const CoefficientSpec& s) {
  const double lo = 1e-12;
  bool ok = true;
  switch (s.kind) {
    case CoefficientSpec::Kind::Constant: ok = s.value > lo; break;
    case CoefficientSpec::Kind::Lamellar: ok = s.eps > 0; break;
    case CoefficientSpec::Kind::PatternCheckerboard:
      ok = s.eps > 0;
      for (double v : s.pattern) ok = ok && v > lo;
      break;
    default: ok = s.eps > 0 && s.k0 > lo && s.k1 > lo;
  }
  if (!ok) throw std::invalid_argument("coefficient values must be positive (and eps > 0)");
}

}  // namespace

CoefficientSpec CoefficientSpec::constant(double c) {
  CoefficientSpec s;
  s.kind = Kind::Constant;
  s.value = c;
  return s;
}
CoefficientSpec CoefficientSpec::periodic(double eps, double k0, double k1) {
  CoefficientSpec s;
  s.kind = Kind::PeriodicCheckerboard;
  s.eps = eps;
  s.k0 = k0;
  s.k1 = k1;
  return s;
}
CoefficientSpec CoefficientSpec::random(double eps, double k0, double k1, double p) {
  CoefficientSpec s;
  s.kind = Kind::RandomCheckerboard;
  s.eps = eps;
  s.k0 = k0;
  s.k1 = k1;
  s.p = p;
  return s;
}
CoefficientSpec CoefficientSpec::lamellar(double eps) {
  CoefficientSpec s;
  s.kind = Kind::Lamellar;
  s.eps = eps;
  return s;
}
CoefficientSpec CoefficientSpec::pattern_grid(double eps, std::vector<double> values, int n) {
  CoefficientSpec s;
  s.kind = Kind::PatternCheckerboard;
  s.eps = eps;
  s.pattern = std::move(values);
  s.pattern_n = n;
  return s;
}

double lamellar_profile(double t) {
  const double st = std::sin(2.0 * M_PI * t);
  return 1.0 / (1.0 + st * st);
}

CoefficientField realize(const CoefficientSpec& spec, std::uint64_t seed,
                         const MeshPair& mp) {
  check_positive_values(spec);
  CoefficientField f;
  f.spec = spec;
  f.seed = seed;
  f.ncell = mp.fine.ncell;
  const int n = f.ncell;
  const double h = mp.h;
  const double wc = mp.layout.wc;
  f.cell_values.resize(n * n);

  if (spec.kind == CoefficientSpec::Kind::Constant) {
    f.cell_values.setConstant(spec.value);
    return f;
  }

  const double ratio = spec.eps / h;
  if (!near_integer(ratio) || std::llround(ratio) < 1) {
    throw std::invalid_argument(
        "coefficient alignment: eps must be a positive integer multiple of h");
  }
  const int r = static_cast<int>(std::llround(ratio));
  const double n_eps_d = 2.0 * wc / spec.eps;
  if (!near_integer(n_eps_d)) {
    throw std::invalid_argument(
        "coefficient alignment: the side of Dc ∪ Df must be a multiple of eps");
  }
  const int ne = static_cast<int>(std::llround(n_eps_d));
  f.neps = ne;

  if (spec.kind == CoefficientSpec::Kind::Lamellar) {
    // profile sampled at cell midpoints
    for (int cy = 0; cy < n; ++cy)
      for (int cx = 0; cx < n; ++cx) {
        const double xm = -wc + (cx + 0.5) * h;
        f.cell_values[cy * n + cx] = lamellar_profile(xm / spec.eps);
      }
    return f;
  }

  f.eps_values.resize(ne * ne);
  for (int b = 0; b < ne; ++b)
    for (int a = 0; a < ne; ++a) {
      double v;
      switch (spec.kind) {
        case CoefficientSpec::Kind::PeriodicCheckerboard:
          v = ((a + b) % 2 == 0) ? spec.k0 : spec.k1;
          break;
        case CoefficientSpec::Kind::PatternCheckerboard: {
          if (spec.pattern_n != ne ||
              static_cast<int>(spec.pattern.size()) != ne * ne) {
            throw std::invalid_argument("pattern grid does not match the eps grid of Dc ∪ Df");
          }
          // pattern rows run top-down
          v = spec.pattern[(ne - 1 - b) * ne + a];
          break;
        }
        case CoefficientSpec::Kind::RandomCheckerboard: {
          const std::uint64_t bits =
              hash_pair(seed, static_cast<std::uint64_t>(b) * ne + a);
          v = uniform01(bits) < spec.p ? spec.k1 : spec.k0;
          break;
        }
        default: throw std::logic_error("unreachable coefficient kind");
      }
      f.eps_values[b * ne + a] = v;
    }

  for (int cy = 0; cy < n; ++cy)
    for (int cx = 0; cx < n; ++cx)
      f.cell_values[cy * n + cx] = f.eps_values[(cy / r) * ne + (cx / r)];
  return f;
}

Vec CoefficientField::tri_values(const Mesh& fine) const {
  Vec v(fine.n_tris());
  for (int t = 0; t < fine.n_tris(); ++t) v[t] = cell_values[fine.tri_cell[t]];
  return v;
}

long long CoefficientField::signed_imbalance() const {
  long long d = 0;
  for (int i = 0; i < eps_values.size(); ++i) {
    if (eps_values[i] == spec.k1) ++d;
    else if (eps_values[i] == spec.k0) --d;
  }
  return d;
}

double spatial_average(const CoefficientField& field) {
  return field.cell_values.mean();
}

double ensemble_average(const CoefficientSpec& spec) {
  switch (spec.kind) {
    case CoefficientSpec::Kind::Constant: return spec.value;
    case CoefficientSpec::Kind::PeriodicCheckerboard: return 0.5 * (spec.k0 + spec.k1);
    case CoefficientSpec::Kind::RandomCheckerboard:
      return (1.0 - spec.p) * spec.k0 + spec.p * spec.k1;
    case CoefficientSpec::Kind::Lamellar: {
      // deterministic: spatial mean over one period, <1/(1+sin^2)> = 1/sqrt(2)
      return 1.0 / std::sqrt(2.0);
    }
    default:
      throw std::invalid_argument("ensemble_average: variant has no probabilistic law");
  }
}

CoefficientSpec load_pattern(const std::string& path, double eps) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open pattern file: " + path);
  std::vector<double> values;
  int ncols = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double v;
    int c = 0;
    while (ss >> v) {
      values.push_back(v);
      ++c;
    }
    if (ncols < 0) ncols = c;
    else if (c != ncols)
      throw std::invalid_argument("pattern file rows have inconsistent lengths");
  }
  if (ncols <= 0 || static_cast<int>(values.size()) != ncols * ncols) {
    throw std::invalid_argument("pattern file must be a square grid");
  }
  return CoefficientSpec::pattern_grid(eps, std::move(values), ncols);
}

}  // namespace arlhom
