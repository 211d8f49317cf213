#pragma once

#include <memory>
#include <vector>

#include "arlhom/assembly.hpp"
#include "arlhom/coefficients.hpp"
#include "arlhom/geometry.hpp"
#include "arlhom/optimizer.hpp"
#include "arlhom/types.hpp"

namespace arlhom {

/// Auxiliary multiplier profile used to enrich the multiplier space: the
/// fine-mesh solution of  -Δψ0 + ψ0 = 0 on Dc  with the interface flux data
/// matched to the energy weights (for the continuous ramp weighting the
/// right-hand side becomes div(alpha1 e_dir) with zero Neumann data).
struct Enrichment {
  Vec psi0;  ///< fine nodal values on D̄c (zero elsewhere)
  Weighting weighting = Weighting::PiecewiseConstant;
  int direction = 1;
  double residual = 0;  ///< weak residual of the discrete solve
};

Enrichment solve_psi0(const MeshPair& mp, Weighting w, int direction);

/// Assembled blocks of the penalized coupled system. Everything here is
/// independent of the tentative coefficient: the coarse stiffness enters as
/// Z blocks so the system matrix is affine in k̄.
struct ArlequinBlocks {
  const MeshPair* mp = nullptr;
  int direction = 1;
  bool enriched = true;
  bool matrix_mode = false;
  Weighting weighting = Weighting::PiecewiseConstant;

  int nU = 0;  ///< coarse dofs
  int nE = 0;  ///< fine dofs
  int nW = 0;  ///< multiplier dofs (including the enrichment column)

  std::vector<SpMat> Z;  ///< coarse stiffness blocks: {Z} or {Z11, Z12, Z21, Z22}
  SpMat Pbar;            ///< boundary penalty matrix
  Vec Fbar;              ///< penalty load for the data x_dir
  double eta = 0;
  SpMat Cbar;  ///< nU x nW coupling
  SpMat Ceps;  ///< nE x nW coupling
  SpMat Aeps;  ///< nE x nE fine stiffness (empty when assembled coarse-only)
  Vec psi0;    ///< enrichment profile (empty when not enriched)
  Vec c0;      ///< ∫_Dc of each multiplier basis function

  int size() const { return nU + nE + nW; }
  int n_params() const { return matrix_mode ? 4 : 1; }
  bool has_fine() const { return Aeps.rows() == nE && nE > 0; }
  /// Σ k_a Z_a + penalty.
  SpMat coarse_matrix(const Vec& kparams) const;
  Vec kparams(const KBar& k) const;
};

/// Geometry-only blocks (no fine stiffness); the condensed random solver
/// assembles its per-realization fine operators separately.
ArlequinBlocks assemble_coarse_blocks(const MeshPair& mp, Weighting w, int direction,
                                      bool enriched, bool matrix_mode,
                                      double eta_scale = 1e-8);

/// Full deterministic blocks for a given coefficient realization.
ArlequinBlocks assemble_blocks(const MeshPair& mp, const CoefficientField& field,
                               Weighting w, int direction, bool enriched,
                               bool matrix_mode, double eta_scale = 1e-8);

struct SaddleSolution {
  Vec ubar, ueps, psi;  ///< with enrichment, psi's last entry is the psi0 coefficient
  double residual = 0;            ///< relative residual of the full system
  double constraint_residual = 0; ///< ‖C̄ᵀ ubar - C_εᵀ ueps‖
};

/// Direct solver for the coupled system at varying k̄.
///
/// When the coarse space is small the fine and multiplier unknowns are
/// eliminated once (their block does not depend on k̄), leaving a dense
/// coarse system per k̄; objective evaluations then cost almost nothing.
/// Otherwise a monolithic sparse LU is (re)factorized per k̄ and cached.
class ArlequinSolver {
 public:
  explicit ArlequinSolver(const ArlequinBlocks& blocks, int dense_coarse_limit = 600);

  const ArlequinBlocks& blocks() const { return *b_; }

  /// Coarse solution only (cheapest path).
  Vec ubar(const KBar& k) const;
  /// Objective ∫_{D ∪ Dc} |grad ubar - e_dir|^2.
  double J(const KBar& k) const;
  /// Full solution triple with residual checks.
  SaddleSolution solve(const KBar& k) const;

  /// A(k)^{-1} rhs on the full unknown vector (U, U_eps, Psi).
  Vec solve_full(const KBar& k, const Vec& rhs) const;
  Vec apply_Z(int a, const Vec& x) const;
  Vec rhs0() const;
  Vec project_coarse(const Vec& x) const;
  /// Embedded nodal interpolant of x_dir on the coarse block.
  Vec coarse_target() const;

  bool reduced_path() const { return reduced_; }

 private:
  void require_admissible(const KBar& k) const;
  void ensure_reduced(const Vec& kp) const;
  Vec solve_T(const Vec& rhs) const;
  void factor_full(const Vec& kp) const;
  Vec residual_blocks(const Vec& kp, const Vec& x, const Vec& rhs) const;

  const ArlequinBlocks* b_;
  bool reduced_ = false;

  // reduced path
  std::unique_ptr<Eigen::SparseLU<SpMat>> T_lu_;
  SpMat T_;
  Mat G_;                 // C̄ [0 I] T^{-1} [0; C̄ᵀ]
  std::vector<Mat> Zd_;
  Mat Pd_;

  // caches (keyed on the current k parameters)
  mutable Vec cached_k_;
  mutable Mat K_red_;
  mutable Eigen::PartialPivLU<Mat> K_red_lu_;
  mutable Vec cached_k_full_;
  mutable std::unique_ptr<Eigen::SparseLU<SpMat>> full_lu_;
  mutable SpMat full_mat_;
};

/// (k̄, J) samples over a grid of positive scalar values.
std::vector<std::pair<double, double>> scan_J(const ArlequinSolver& solver,
                                              const std::vector<double>& grid);

/// AffineFamily view of the deterministic coupled system (for the
/// initial-guess formulas).
class ArlequinFamily final : public AffineFamily {
 public:
  explicit ArlequinFamily(const ArlequinSolver& s) : s_(&s) {}
  int family_params() const override { return s_->blocks().n_params(); }
  Vec family_solve(const Vec& kp, const Vec& rhs) const override {
    return s_->solve_full(KBar::from_params(kp), rhs);
  }
  Vec family_apply_Z(int a, const Vec& x) const override { return s_->apply_Z(a, x); }
  Vec family_rhs() const override { return s_->rhs0(); }
  Vec family_project(const Vec& x) const override { return s_->project_coarse(x); }
  Vec family_target() const override { return s_->coarse_target(); }

 private:
  const ArlequinSolver* s_;
};

}  // namespace arlhom
