#pragma once

#include <functional>
#include <vector>

namespace arlhom {

/// 1-periodic coefficient profile. Piecewise-constant profiles carry their
/// breakpoints so period averages are exact sums; smooth profiles are
/// averaged by composite Simpson.
struct Profile1D {
  std::function<double(double)> k;
  bool piecewise = false;
  std::vector<double> values;  ///< value on (breaks[i-1], breaks[i]]
  std::vector<double> breaks;  ///< increasing, last = 1

  double eval(double t) const;
  double max_value() const;

  static Profile1D constant(double c);
  static Profile1D lamellar();  ///< (1 + sin^2(2 pi t))^{-1}
  static Profile1D two_valued(double k0, double k1, double frac0);
};

/// Period average of f(k(t)).
double period_average(const Profile1D& p, const std::function<double(double)>& f,
                      int simpson_n = 10000);

/// 1/<1/k>, the one-dimensional homogenized coefficient.
double kstar_1d(const Profile1D& p);

/// Closed-form 1D overlap-coupled problem: symmetric arrangement
/// D | Dc | Df | Dc | D with total lengths len_*, data u = x at the ends.
struct OneDConfig {
  double len_D = 4, len_Dc = 2, len_Df = 2;
  double eps = 1.0 / 16;
  double kbar = 1;
  Profile1D profile = Profile1D::constant(1.0);
};

struct FluxResult {
  double m = 0;           ///< constant flux
  double ubar_prime = 0;  ///< m / kbar on D
  double kstar = 0;
};

/// The flux satisfies
///   len_total = m ( len_D/kbar + len_Df/kstar + len_Dc <2/(kbar + k_per)> ).
/// Requires len_Dc and len_Df to be multiples of eps.
FluxResult exact_flux_m(const OneDConfig& cfg);

/// Unique root of
///   len_Dc + len_Df = len_Df kopt/kstar + len_Dc kopt <2/(kopt + k_per)>,
/// found by bisection (absolute tolerance 1e-12). Strictly above kstar for
/// non-constant profiles.
double kopt_1d(const OneDConfig& cfg);

/// 1D interface coupling: homogeneous model on D, heterogeneous on Df,
/// solutions matched at the interface points. kopt(eps) = 1/<1/k_eps> with
/// the average over Df, and the gradient ratio equals kopt/k_eps - 1 cell
/// by cell. Df need not contain an integer number of periods.
struct InterfaceResult {
  double kopt = 0;
  double kstar = 0;
  std::vector<double> sample_x;
  std::vector<double> ratio;
};
InterfaceResult interface_1d(double len_D, double len_Df, double eps, const Profile1D& p,
                             int nsamples = 64);

}  // namespace arlhom
