#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arlhom/geometry.hpp"
#include "arlhom/types.hpp"

namespace arlhom {

/// Oscillatory diffusion coefficient on Dc ∪ Df, piecewise constant per fine
/// cell. Values are bounded and bounded away from zero.
struct CoefficientSpec {
  enum class Kind { Constant, PeriodicCheckerboard, PatternCheckerboard, RandomCheckerboard, Lamellar };
  Kind kind = Kind::Constant;
  double value = 1.0;  ///< Constant
  double eps = 0.0;    ///< microstructure period (unused for Constant)
  double k0 = 1.0, k1 = 2.0;  ///< checkerboard values
  double p = 0.5;             ///< P(cell = k1) for the random checkerboard
  std::vector<double> pattern;  ///< PatternCheckerboard, row-major from top-left
  int pattern_n = 0;

  double contrast() const { return k1 / k0; }

  static CoefficientSpec constant(double c);
  static CoefficientSpec periodic(double eps, double k0, double k1);
  static CoefficientSpec random(double eps, double k0, double k1, double p = 0.5);
  static CoefficientSpec lamellar(double eps);
  static CoefficientSpec pattern_grid(double eps, std::vector<double> values, int n);
};

/// A realization of the coefficient on the fine grid of Dc ∪ Df.
/// Deterministic function of (spec, seed); checkerboard cells must align
/// with fine cells (eps an integer multiple of h).
struct CoefficientField {
  CoefficientSpec spec;
  std::uint64_t seed = 0;
  int ncell = 0;        ///< fine cells per side
  Vec cell_values;      ///< per fine square cell, row-major (cy*ncell+cx)
  int neps = 0;         ///< microstructure cells per side (0 when not applicable)
  Vec eps_values;       ///< per microstructure cell (checkerboard variants)

  Vec tri_values(const Mesh& fine) const;
  /// n(k1) - n(k0) over the microstructure cells (checkerboard variants only).
  long long signed_imbalance() const;
};

CoefficientField realize(const CoefficientSpec& spec, std::uint64_t seed,
                         const MeshPair& mp);

/// Mean of k over Dc ∪ Df (fine cells have equal area, so this is exact).
double spatial_average(const CoefficientField& field);

/// Analytic ensemble mean E[k(x)]; throws for variants with no law (Pattern).
double ensemble_average(const CoefficientSpec& spec);

/// k_per(t) = (1 + sin^2(2 pi t))^{-1}; k_eps(x) = k_per(x1 / eps).
double lamellar_profile(double t);

/// Plain-text grid: rows of space-separated values, one per microstructure
/// cell, row-major from the top-left of Dc ∪ Df.
CoefficientSpec load_pattern(const std::string& path, double eps);

}  // namespace arlhom
