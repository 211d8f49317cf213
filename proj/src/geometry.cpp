#include "arlhom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "arlhom/rng.hpp"

namespace arlhom {

namespace {

bool near_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) < tol * std::max(1.0, std::abs(x));
}

int as_int(double x) { return static_cast<int>(std::llround(x)); }

void require_divides(double step, double length, const char* what) {
  if (!(step > 0) || !near_integer(length / step)) {
    throw std::invalid_argument(std::string("invalid-mesh: ") + what +
                                " is not an integer multiple of the mesh size");
  }
}

std::vector<int> random_permutation(int n, std::uint64_t seed) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(hash_pair(seed, static_cast<std::uint64_t>(i)) %
                                   static_cast<std::uint64_t>(i + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

// keep_cell: whether the grid cell (center coordinates) is part of the mesh.
// region_of: region tag for a kept cell.
template <class Keep, class RegionOf>
Mesh build_grid_mesh(double half_width, double step, Keep keep_cell, RegionOf region_of,
                     std::uint64_t relabel_seed) {
  Mesh m;
  m.step = step;
  m.half_width = half_width;
  m.ncell = as_int(2.0 * half_width / step);
  const int n = m.ncell;
  const int nn = n + 1;

  m.node_grid.assign(nn * nn, -1);
  m.cell_tri0.assign(n * n, -1);

  // First pass: mark used nodes in lexicographic order.
  std::vector<char> cell_used(n * n, 0);
  for (int cy = 0; cy < n; ++cy) {
    for (int cx = 0; cx < n; ++cx) {
      const double x = -half_width + (cx + 0.5) * step;
      const double y = -half_width + (cy + 0.5) * step;
      if (keep_cell(x, y)) cell_used[cy * n + cx] = 1;
    }
  }
  for (int cy = 0; cy < n; ++cy) {
    for (int cx = 0; cx < n; ++cx) {
      if (!cell_used[cy * n + cx]) continue;
      for (int dy = 0; dy <= 1; ++dy)
        for (int dx = 0; dx <= 1; ++dx) m.node_grid[(cy + dy) * nn + (cx + dx)] = 0;
    }
  }
  int id = 0;
  for (int iy = 0; iy < nn; ++iy)
    for (int ix = 0; ix < nn; ++ix)
      if (m.node_grid[iy * nn + ix] == 0) m.node_grid[iy * nn + ix] = id++;
      else m.node_grid[iy * nn + ix] = -1;
  const int n_nodes = id;

  std::vector<int> relabel(n_nodes);
  std::iota(relabel.begin(), relabel.end(), 0);
  if (relabel_seed != 0) relabel = random_permutation(n_nodes, relabel_seed);
  for (auto& g : m.node_grid)
    if (g >= 0) g = relabel[g];

  m.node_x.assign(n_nodes, 0.0);
  m.node_y.assign(n_nodes, 0.0);
  for (int iy = 0; iy < nn; ++iy)
    for (int ix = 0; ix < nn; ++ix) {
      const int nid = m.node_grid[iy * nn + ix];
      if (nid < 0) continue;
      m.node_x[nid] = -half_width + ix * step;
      m.node_y[nid] = -half_width + iy * step;
    }

  // Triangles: each kept cell split along the (lower-left, upper-right) diagonal.
  for (int cy = 0; cy < n; ++cy) {
    for (int cx = 0; cx < n; ++cx) {
      if (!cell_used[cy * n + cx]) continue;
      const double x = -half_width + (cx + 0.5) * step;
      const double y = -half_width + (cy + 0.5) * step;
      const Region reg = region_of(x, y);
      const int n00 = m.node_grid[cy * nn + cx];
      const int n10 = m.node_grid[cy * nn + cx + 1];
      const int n11 = m.node_grid[(cy + 1) * nn + cx + 1];
      const int n01 = m.node_grid[(cy + 1) * nn + cx];
      m.cell_tri0[cy * n + cx] = m.n_tris();
      m.tri.push_back({n00, n10, n11});  // lower
      m.tri.push_back({n00, n11, n01});  // upper
      m.tri_region.push_back(reg);
      m.tri_region.push_back(reg);
      m.tri_cell.push_back(cy * n + cx);
      m.tri_cell.push_back(cy * n + cx);
    }
  }
  return m;
}

}  // namespace

DomainLayout build_layout(double wf, double wc, double wd, int direction) {
  if (!(wf > 0 && wf < wc && wc < wd)) {
    throw std::invalid_argument(
        "invalid-geometry: half-widths must satisfy 0 < wf < wc < wd");
  }
  if (direction != 1 && direction != 2) {
    throw std::invalid_argument("invalid-geometry: direction must be 1 or 2");
  }
  DomainLayout l;
  l.wf = wf;
  l.wc = wc;
  l.wd = wd;
  l.direction = direction;
  return l;
}

MeshPair build_meshes(const DomainLayout& layout, double H, double h,
                      std::uint64_t relabel_seed) {
  if (!(H > 0 && h > 0)) throw std::invalid_argument("invalid-mesh: mesh sizes must be positive");
  const double ratio = H / h;
  if (!near_integer(ratio) || as_int(ratio) < 1) {
    throw std::invalid_argument("invalid-mesh: H/h must be a positive integer");
  }
  require_divides(H, layout.wf, "wf (coarse)");
  require_divides(H, layout.wc - layout.wf, "wc - wf (coarse)");
  require_divides(H, layout.wd - layout.wc, "wd - wc (coarse)");
  require_divides(h, layout.wf, "wf (fine)");
  require_divides(h, layout.wc - layout.wf, "wc - wf (fine)");

  MeshPair mp;
  mp.layout = layout;
  mp.H = H;
  mp.h = h;
  mp.nesting_ratio = as_int(ratio);

  const double wf = layout.wf, wc = layout.wc, wd = layout.wd;

  mp.coarse = build_grid_mesh(
      wd, H,
      [&](double x, double y) { return !(std::abs(x) < wf && std::abs(y) < wf); },
      [&](double x, double y) {
        return (std::abs(x) < wc && std::abs(y) < wc) ? Region::Dc : Region::D;
      },
      relabel_seed == 0 ? 0 : hash_pair(relabel_seed, 1));

  mp.fine = build_grid_mesh(
      wc, h, [](double, double) { return true; },
      [&](double x, double y) {
        return (std::abs(x) < wf && std::abs(y) < wf) ? Region::Df : Region::Dc;
      },
      relabel_seed == 0 ? 0 : hash_pair(relabel_seed, 2));

  const double tol = 1e-9 * H;

  // Multiplier dofs: coarse nodes of D̄c.
  mp.w_of_coarse.assign(mp.coarse.n_nodes(), -1);
  for (int i = 0; i < mp.coarse.n_nodes(); ++i) {
    if (std::abs(mp.coarse.node_x[i]) <= wc + tol && std::abs(mp.coarse.node_y[i]) <= wc + tol) {
      mp.w_of_coarse[i] = 0;
    }
  }
  for (int i = 0; i < mp.coarse.n_nodes(); ++i) {
    if (mp.w_of_coarse[i] == 0) {
      mp.w_of_coarse[i] = static_cast<int>(mp.w_nodes.size());
      mp.w_nodes.push_back(i);
    }
  }

  // Γ: the two exterior edges orthogonal to e_dir.
  {
    const int n = mp.coarse.ncell;
    const int nn = n + 1;
    auto node = [&](int ix, int iy) { return mp.coarse.node_grid[iy * nn + ix]; };
    for (int side = 0; side < 2; ++side) {
      const int fixed = side == 0 ? 0 : n;
      for (int k = 0; k < nn; ++k) {
        const int nid = layout.direction == 1 ? node(fixed, k) : node(k, fixed);
        if (nid >= 0) mp.gamma_nodes.push_back(nid);
      }
      for (int k = 0; k < n; ++k) {
        const int a = layout.direction == 1 ? node(fixed, k) : node(k, fixed);
        const int b = layout.direction == 1 ? node(fixed, k + 1) : node(k + 1, fixed);
        if (a >= 0 && b >= 0) mp.gamma_edges.push_back({a, b});
      }
    }
  }

  // Parent coarse triangle of every fine triangle in Dc.
  mp.parent_tri.assign(mp.fine.n_tris(), -1);
  const int nc = mp.coarse.ncell;
  for (int t = 0; t < mp.fine.n_tris(); ++t) {
    if (mp.fine.tri_region[t] != Region::Dc) continue;
    const Vec2 c = mp.fine.centroid(t);
    int cx = std::clamp(static_cast<int>(std::floor((c.x() + wd) / H)), 0, nc - 1);
    int cy = std::clamp(static_cast<int>(std::floor((c.y() + wd) / H)), 0, nc - 1);
    const int cell = cy * nc + cx;
    const int t0 = mp.coarse.cell_tri0[cell];
    if (t0 < 0) throw std::logic_error("fine Dc triangle has no coarse parent cell");
    const double xi = (c.x() + wd) / H - cx;
    const double eta = (c.y() + wd) / H - cy;
    mp.parent_tri[t] = (eta <= xi) ? t0 : t0 + 1;
  }

  // Prolongation: coarse P1 restricted to D̄c, evaluated at fine nodes.
  {
    std::vector<Triplet> trip;
    const int nnc = nc + 1;
    for (int i = 0; i < mp.fine.n_nodes(); ++i) {
      const double x = mp.fine.node_x[i], y = mp.fine.node_y[i];
      if (std::max(std::abs(x), std::abs(y)) < wf - tol) continue;  // interior of Df
      // Containing coarse cell on the Dc side (gridline points may touch
      // cells of D or the Df hole; pick a Dc cell among the neighbours).
      const int bx = static_cast<int>(std::floor((x + wd) / H + tol));
      const int by = static_cast<int>(std::floor((y + wd) / H + tol));
      int cx = -1, cy = -1;
      for (int dy = 0; dy >= -1 && cx < 0; --dy) {
        for (int dx = 0; dx >= -1; --dx) {
          const int tx = bx + dx, ty = by + dy;
          if (tx < 0 || ty < 0 || tx >= nc || ty >= nc) continue;
          const int t0 = mp.coarse.cell_tri0[ty * nc + tx];
          if (t0 < 0 || mp.coarse.tri_region[t0] != Region::Dc) continue;
          const double X = -wd + tx * H, Y = -wd + ty * H;
          if (x < X - tol || x > X + H + tol || y < Y - tol || y > Y + H + tol) continue;
          cx = tx;
          cy = ty;
          break;
        }
      }
      if (cx < 0) throw std::logic_error("fine node in D̄c without a Dc coarse cell");
      const double xi = std::clamp((x + wd) / H - cx, 0.0, 1.0);
      const double eta = std::clamp((y + wd) / H - cy, 0.0, 1.0);
      const int n00 = mp.coarse.node_grid[cy * nnc + cx];
      const int n10 = mp.coarse.node_grid[cy * nnc + cx + 1];
      const int n11 = mp.coarse.node_grid[(cy + 1) * nnc + cx + 1];
      const int n01 = mp.coarse.node_grid[(cy + 1) * nnc + cx];
      // P1 hat weights on the two triangles of the cell.
      std::array<std::pair<int, double>, 3> w;
      if (eta <= xi) {
        w = {{{n00, 1.0 - xi}, {n10, xi - eta}, {n11, eta}}};
      } else {
        w = {{{n00, 1.0 - eta}, {n11, xi}, {n01, eta - xi}}};
      }
      for (const auto& [nid, val] : w) {
        if (std::abs(val) < 1e-15) continue;
        const int wj = mp.w_of_coarse[nid];
        if (wj < 0) throw std::logic_error("coarse parent node outside multiplier set");
        trip.emplace_back(i, wj, val);
      }
    }
    mp.prolongation.resize(mp.fine.n_nodes(), mp.n_w());
    mp.prolongation.setFromTriplets(trip.begin(), trip.end());
  }

  return mp;
}

double alpha1(const DomainLayout& layout, Weighting w, double x, double y) {
  const double r = std::max(std::abs(x), std::abs(y));
  if (r >= layout.wc) return 1.0;
  if (r <= layout.wf) return 0.0;
  if (w == Weighting::PiecewiseConstant) return 0.5;
  return (r - layout.wf) / (layout.wc - layout.wf);
}

Vec alpha_tri(const Mesh& mesh, const DomainLayout& layout, Weighting w, int which) {
  Vec a(mesh.n_tris());
  for (int t = 0; t < mesh.n_tris(); ++t) {
    double v;
    switch (mesh.tri_region[t]) {  // region tags are exact for the constant weighting
      case Region::D: v = 1.0; break;
      case Region::Df: v = 0.0; break;
      default: {
        if (w == Weighting::PiecewiseConstant) {
          v = 0.5;
        } else {
          const Vec2 c = mesh.centroid(t);
          v = alpha1(layout, w, c.x(), c.y());
        }
      }
    }
    a[t] = which == 1 ? v : 1.0 - v;
  }
  return a;
}

}  // namespace arlhom
