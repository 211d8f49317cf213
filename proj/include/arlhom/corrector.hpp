#pragma once

#include <functional>
#include <vector>

#include "arlhom/arlequin.hpp"
#include "arlhom/geometry.hpp"
#include "arlhom/types.hpp"

namespace arlhom {

/// Gradient-ratio reconstruction of the corrector from a coupled solution:
/// per fine triangle,
///   W1 = (∂_d u_eps - ∂_d ubar) / ∂_d ubar,
///   W2 = (∂_o u_eps - ∂_o ubar) / ∂_d ubar,
/// with d the boundary-data direction and o the other one. Triangles whose
/// denominator falls below the floor are flagged, not silently zeroed.
struct CorrectorField {
  int direction = 1;
  Region region = Region::Dc;
  bool linear_ubar = false;
  double floor_used = 0;
  std::vector<int> tris;  ///< fine triangle ids in the region
  Vec W1, W2;
  std::vector<char> valid;
  int n_flagged = 0;
};

/// use_linear_ubar replaces the coarse gradient by e_d (mandatory on Df,
/// where the coarse solution does not exist). Throws when more than half of
/// the region falls below the denominator floor.
CorrectorField reconstruct(const MeshPair& mp, const SaddleSolution& sol, Region region,
                           bool use_linear_ubar, double floor_rel = 1e-6);

/// Classical periodic cell problem on [0,L]^2 with ndiv x ndiv coefficient
/// cells: find periodic w with zero mean such that
///   ∫ k (e_d + grad w) . grad v = 0  for all periodic v.
/// Also yields the homogenized column <k (e_d + grad w)>.
struct CellCorrector {
  int ndiv = 0;
  double L = 0;
  int direction = 1;
  Vec w;        ///< nodal values (ndiv^2, wrap-around indexing)
  Vec gx, gy;   ///< per triangle (two per cell, lower then upper)
  Vec2 khom_col;  ///< <k (e_d + grad w)>

  /// Periodic lookup of grad w at a point of the plane.
  Vec2 grad_at(const Vec2& p) const;
};

CellCorrector classical_cell_corrector(const std::vector<double>& cells, int ndiv,
                                       double L, int direction);

/// L2 errors between per-triangle constant fields on the reconstruction
/// region. Samplers are evaluated at triangle centroids; flagged triangles
/// are excluded from every integral involving the reconstruction.
struct CorrectorErrors {
  double e_tilde = 0;   ///< ‖W1 - exact‖
  double e_approx = 0;  ///< ‖W1 - reference‖
  double e_ref = 0;     ///< ‖reference - exact‖
  double norm_exact = 0, norm_ref = 0;
  double rel_tilde = 0, rel_approx = 0, rel_ref = 0;
  int flagged = 0;
};

using FieldSampler = std::function<double(const Vec2&)>;

/// exact may be null when no closed form is available (then e_tilde and
/// e_ref are NaN).
CorrectorErrors corrector_errors(const MeshPair& mp, const CorrectorField& W,
                                 const FieldSampler* reference, const FieldSampler* exact);

/// dir-1 gradient of the lamellar corrector: 2/(3 k_per(x1/eps)) - 1,
/// sampled per fine cell (at the cell midpoint, like the coefficient).
FieldSampler lamellar_exact_w1prime(const MeshPair& mp, double eps);

/// Periodic sampler of a cell corrector's ∂_1 w, aligned with the fine grid
/// of Dc ∪ Df (the cell origin sits at x = y = -wc).
FieldSampler cell_reference_w1prime(const MeshPair& mp, const CellCorrector& cc);

}  // namespace arlhom
