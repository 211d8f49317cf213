#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "arlhom/arlequin.hpp"
#include "arlhom/coefficients.hpp"
#include "arlhom/optimizer.hpp"

namespace arlhom {

/// A set of seeded random environments. With selection, the kept seeds are
/// the M smallest |score| out of a pool of `pool` trials, where the score is
/// the gap between the spatial average of the realization and the ensemble
/// average over Dc ∪ Df.
struct RealizationBatch {
  CoefficientSpec spec;
  std::vector<std::uint64_t> seeds;
  std::vector<double> scores;
  int pool = 0;
  double pool_mean_abs_score = 0;
  double selected_mean_abs_score = 0;
  int M() const { return static_cast<int>(seeds.size()); }
};

RealizationBatch draw_batch(const CoefficientSpec& spec, const MeshPair& mp, int M,
                            std::uint64_t seed);
RealizationBatch sqs_select(const CoefficientSpec& spec, const MeshPair& mp, int pool,
                            int M, std::uint64_t seed);

/// Solver for the multi-realization coupled problem with the fine unknowns
/// eliminated. Per realization, the fine operator is a pure Neumann
/// stiffness; it is made invertible by augmenting it with the mesh mean
/// functional (the extra multiplier absorbs incompatible right-hand sides).
/// The remaining unknowns are the coarse solution, the multiplier, and one
/// shared constant, plus the zero-mean constraint on the multiplier that the
/// eliminated fine equations imply; this makes the condensed system exactly
/// equivalent to the monolithic one.
class CondensedSolver final : public AffineFamily {
 public:
  /// coarse: blocks assembled with assemble_coarse_blocks (no fine stiffness).
  CondensedSolver(const ArlequinBlocks& coarse, const std::vector<CoefficientField>& fields,
                  int threads = 1, bool keep_operators = false);

  int M() const { return static_cast<int>(fields_.size()); }
  int size() const { return b_->nU + b_->nW + 1; }

  struct Sol {
    Vec ubar, psi;
    double bconst = 0;   ///< shared additive constant of the fine fields
    double residual = 0;
  };
  Sol solve(const KBar& k) const;
  double J(const KBar& k) const;

  /// Augmented Neumann solve for realization m: A_m u + lambda e = C_eps psi,
  /// mean(u) = 0. Returns (u, lambda); lambda vanishes when psi has zero mean.
  std::pair<Vec, double> neumann_apply(int m, const Vec& psi) const;
  /// Fine-field recovery u_m = beta_m + L_m psi with beta_m matching the
  /// coarse mean over Dc.
  Vec fine_field(int m, const Sol& s) const;

  const Mat& schur() const { return S_; }
  const ArlequinBlocks& blocks() const { return *b_; }
  const std::vector<CoefficientField>& fields() const { return fields_; }

  // AffineFamily interface: the condensed system is affine in k̄ too.
  int family_params() const override { return b_->n_params(); }
  Vec family_solve(const Vec& kparams, const Vec& rhs) const override;
  Vec family_apply_Z(int a, const Vec& x) const override;
  Vec family_rhs() const override;
  Vec family_project(const Vec& x) const override;
  Vec family_target() const override;

 private:
  SpMat augmented_matrix(int m) const;
  std::unique_ptr<Eigen::SparseLU<SpMat>> factor(int m) const;
  void ensure_factor(const Vec& kp) const;
  Mat dense_matrix(const Vec& kp) const;

  const ArlequinBlocks* b_;
  std::vector<CoefficientField> fields_;
  Vec alpha2_;  ///< fine triangle weights
  Vec e_;       ///< fine mean functional, 1ᵀe = 1
  Mat S_;       ///< (1/M) Σ C_εᵀ L_m C_ε (symmetric positive semidefinite)
  std::vector<Mat> Zd_;
  Mat Pd_, Cbar_d_;
  std::vector<std::unique_ptr<Eigen::SparseLU<SpMat>>> kept_ops_;
  std::vector<SpMat> kept_mats_;

  mutable Vec cached_k_;
  mutable Mat A_;
  mutable Eigen::PartialPivLU<Mat> lu_;
};

struct VarianceStudy {
  double contrast = 0;
  int I = 0, M = 0, pool = 0;
  double V_MC = 0, V_SQS = 0, ratio = 0;
  double ratio_boot_lo = 0, ratio_boot_hi = 0;  ///< bootstrap 95% interval
  std::vector<double> kopt_mc, kopt_sqs;
  std::vector<std::uint64_t> seeds_mc, seeds_sqs;  ///< per-repetition seeds
};

/// Two-arm comparison at matched solve counts: per repetition the plain arm
/// draws M environments, the selection arm draws `pool` and keeps the best M;
/// both identify a scalar k̄ and the variances of the I outputs are compared.
VarianceStudy variance_study(const ArlequinBlocks& coarse, const MeshPair& mp,
                             const CoefficientSpec& spec, int I, int M, int pool,
                             const OptimOptions& opt, double kbar0, bool use_ig,
                             std::uint64_t master_seed, int threads);

}  // namespace arlhom
