#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "arlhom/types.hpp"

namespace arlhom {

struct FitResult {
  Vec kopt_params;  ///< optimized free parameters (meaning fixed by the caller)
  double J_min = 0;
  int iterations = 0;
  std::vector<std::pair<Vec, double>> history;  ///< (free parameters, J)
  Vec initial_guess;                            ///< free parameters at start
  std::string ig_method;                        ///< "affine-formula" | "given"
  double kstar_ref = std::numeric_limits<double>::quiet_NaN();  ///< reporting only
  std::vector<std::uint64_t> seeds;             ///< every seed used by the run
};

/// A family of linear systems A(k) x = F0 whose matrix is affine in the
/// parameters k: A(k) = Σ_a k_a Z_a + Z_rest. Both the deterministic coupled
/// solver and the condensed random solver expose this view, which is all the
/// initial-guess formulas need.
class AffineFamily {
 public:
  virtual ~AffineFamily() = default;
  virtual int family_params() const = 0;
  virtual Vec family_solve(const Vec& kparams, const Vec& rhs) const = 0;
  virtual Vec family_apply_Z(int a, const Vec& x) const = 0;
  virtual Vec family_rhs() const = 0;
  /// Projection keeping only the coarse-solution block.
  virtual Vec family_project(const Vec& x) const = 0;
  /// Projected target: nodal interpolant of x_dir embedded in the full vector.
  virtual Vec family_target() const = 0;
};

/// Affine initial guess: with U(k0) in hand, k minimizing
/// ‖π(U(k0)) − M(k) π(U_target)‖²  where  M(k) = Id + Σ_a (k_a − k0_a) A(k0)^{-1} Z_a.
/// Components whose sensitivity A(k0)^{-1} Z_a π(U_target) vanishes keep
/// their k0 value (a degenerate full system falls back to k0 entirely).
/// Throws when every direction is degenerate.
Vec initial_guess(const AffineFamily& fam, const Vec& k0);

struct OptimOptions {
  double tol = 1e-2;        ///< stop when |ΔJ| <= tol * max(J, 1e-300)
  int max_iter = 50;        ///< Newton cap (Nelder-Mead uses nm_max_iter)
  int nm_max_iter = 200;
  double fd_rel = 1e-3;     ///< central-difference step = fd_rel * max(|k|, 1)
  int max_halvings = 5;
  double step_tol = 0.0;    ///< optional extra stop on |Δk| (0 disables)
};

using Objective = std::function<double(const Vec&)>;
using Admissible = std::function<bool(const Vec&)>;

/// Damped Newton with central finite differences (coordinates are the free
/// entries of k̄). Steps that leave the admissible set or increase J are
/// halved up to max_halvings; the iteration count is the number of accepted
/// updates.
FitResult newton_minimize(const Objective& J, const Vec& start, const OptimOptions& opt,
                          const Admissible& ok);

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) on the free entries of k̄.
FitResult nelder_mead_minimize(const Objective& J, const Vec& start,
                               const OptimOptions& opt, const Admissible& ok);

}  // namespace arlhom
