#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "arlhom/types.hpp"

namespace arlhom {

/// Subdomain a triangle belongs to. The computational domain is split into
/// three concentric square regions: an inner patch Df carrying only the fine
/// model, a coupling ring Dc where both models live, and an outer ring D
/// carrying only the effective model.
enum class Region : std::uint8_t { D = 0, Dc = 1, Df = 2 };

struct DomainLayout {
  double wf = 1.0;  ///< half-width of Df
  double wc = 2.0;  ///< half-width of Df ∪ Dc
  double wd = 4.0;  ///< half-width of the full domain
  int direction = 1;  ///< Dirichlet data x_dir on the two exterior edges orthogonal to e_dir
};

/// Validates 0 < wf < wc < wd and direction in {1,2}.
/// Throws std::invalid_argument otherwise.
DomainLayout build_layout(double wf, double wc, double wd, int direction);

/// Structured triangulation of an axis-aligned square grid with optional
/// holes. Every square cell is split along the same diagonal (lower-left to
/// upper-right), so a refined grid is an exact submesh of a coarser one.
struct Mesh {
  double step = 0;
  double half_width = 0;
  int ncell = 0;  ///< cells per side of the bounding grid

  std::vector<double> node_x, node_y;
  std::vector<std::array<int, 3>> tri;  ///< CCW node ids
  std::vector<Region> tri_region;
  std::vector<int> tri_cell;  ///< bounding-grid cell index (cy*ncell+cx)

  std::vector<int> node_grid;  ///< (ncell+1)^2 -> node id, -1 where absent
  std::vector<int> cell_tri0;  ///< cell -> lower triangle id, -1 where absent

  int n_nodes() const { return static_cast<int>(node_x.size()); }
  int n_tris() const { return static_cast<int>(tri.size()); }
  double tri_area() const { return 0.5 * step * step; }
  int node_at(int ix, int iy) const { return node_grid[iy * (ncell + 1) + ix]; }
  Vec2 node(int id) const { return Vec2(node_x[id], node_y[id]); }
  Vec2 centroid(int t) const {
    const auto& n = tri[t];
    return (node(n[0]) + node(n[1]) + node(n[2])) / 3.0;
  }
};

/// Matched coarse/fine pair: the coarse mesh covers D ∪ Dc (with a hole at
/// Df), the fine mesh covers Dc ∪ Df. On Dc the fine mesh is a submesh of
/// the coarse one.
struct MeshPair {
  DomainLayout layout;
  double H = 0, h = 0;
  int nesting_ratio = 1;
  Mesh coarse;
  Mesh fine;

  std::vector<int> w_of_coarse;  ///< coarse node -> multiplier dof, -1 outside D̄c
  std::vector<int> w_nodes;      ///< multiplier dof -> coarse node
  std::vector<int> gamma_nodes;  ///< coarse nodes on Γ
  std::vector<std::array<int, 2>> gamma_edges;  ///< boundary edges on Γ
  std::vector<int> parent_tri;   ///< fine tri -> containing coarse tri, -1 in Df

  /// Coarse nodal values (multiplier dofs) -> fine nodal values on D̄c.
  /// Rows of fine nodes interior to Df are zero.
  SpMat prolongation;

  int n_coarse() const { return coarse.n_nodes(); }
  int n_fine() const { return fine.n_nodes(); }
  int n_w() const { return static_cast<int>(w_nodes.size()); }
};

/// Builds the nested pair. Requires H/h integer and H (resp. h) to divide
/// the half-width differences of the subdomains it meshes; throws
/// std::invalid_argument naming the violated constraint otherwise.
/// A nonzero relabel_seed shuffles the node numbering of both meshes
/// (assembly and solves must not depend on dof order).
MeshPair build_meshes(const DomainLayout& layout, double H, double h,
                      std::uint64_t relabel_seed = 0);

/// Energy partition-of-unity weights.
enum class Weighting : std::uint8_t { PiecewiseConstant = 0, ContinuousRamp = 1 };

/// alpha1 at a point: 1 on D, 0 on Df; on Dc either 1/2 (piecewise constant)
/// or the linear ramp in the L-inf distance across the ring.
double alpha1(const DomainLayout& layout, Weighting w, double x, double y);

/// Per-triangle weights (ramp sampled at centroids). which = 1 for alpha1,
/// 2 for alpha2 = 1 - alpha1.
Vec alpha_tri(const Mesh& mesh, const DomainLayout& layout, Weighting w, int which);

}  // namespace arlhom
