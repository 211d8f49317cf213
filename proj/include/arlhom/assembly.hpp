#pragma once

#include <vector>

#include "arlhom/geometry.hpp"
#include "arlhom/types.hpp"

namespace arlhom {

/// Constant gradients of the three P1 hat functions on a triangle.
std::array<Vec2, 3> p1_gradients(const Mesh& mesh, int t);

/// Hat-function values of triangle t at a point inside it.
std::array<double, 3> p1_values_at(const Mesh& mesh, int t, const Vec2& p);

/// Weighted anisotropic P1 stiffness: sum_T w_T area_T (K_T grad u) . grad v.
/// Coefficients are constant per triangle, so the assembly is exact.
SpMat assemble_stiffness(const Mesh& mesh, const std::vector<Mat2>& K, const Vec& w);
SpMat assemble_stiffness(const Mesh& mesh, const Mat2& K, const Vec& w);
SpMat assemble_stiffness_scalar(const Mesh& mesh, const Vec& k, const Vec& w);

/// H1(Dc) coupling form C(u, phi) = ∫_Dc grad u . grad phi + u phi.
/// Rows: coarse nodes; columns: multiplier dofs. Assembled on coarse Dc triangles.
SpMat assemble_coupling_coarse(const MeshPair& mp);
/// Rows: fine nodes; columns: multiplier dofs. Assembled per fine Dc triangle
/// against the parent coarse hats (products of affine functions, exact 3-point rule).
SpMat assemble_coupling_fine(const MeshPair& mp);
/// Fine x fine H1(Dc) matrix (fine Dc triangles only).
SpMat assemble_h1_fine_dc(const MeshPair& mp);

struct BoundaryPenalty {
  SpMat P;  ///< (1/eta) * edge mass on Γ
  Vec F;    ///< v -> (1/eta) ∫_Γ g v
};
/// g(x, y) = g0 + gx*x + gy*y (edge integrals are exact for affine data).
BoundaryPenalty assemble_penalty(const MeshPair& mp, double eta, double g0, double gx,
                                 double gy);

/// ∫_Dc of each multiplier hat (the pairing of the coupling form with constants).
Vec integrate_w_basis_dc(const MeshPair& mp);
/// ∫ of each fine hat; dc_only restricts the integral to Dc triangles.
Vec integrate_fine_basis(const Mesh& fine, bool dc_only);

/// Nodal interpolant of x_dir on a mesh.
Vec interpolate_coordinate(const Mesh& mesh, int direction);

/// ∫_{D ∪ Dc} |grad u - e_dir|^2 over the coarse mesh (exact, P1 gradients
/// are constant per triangle).
double gradient_misfit(const Mesh& coarse, const Vec& u, int direction);

}  // namespace arlhom
