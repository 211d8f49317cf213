#include "arlhom/corrector.hpp"

#include <Eigen/SparseLU>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "arlhom/assembly.hpp"
#include "arlhom/coefficients.hpp"

namespace arlhom {

CorrectorField reconstruct(const MeshPair& mp, const SaddleSolution& sol, Region region,
                           bool use_linear_ubar, double floor_rel) {
  const Mesh& fine = mp.fine;
  const Mesh& coarse = mp.coarse;
  const int d = mp.layout.direction;
  const int o = d == 1 ? 2 : 1;
  CorrectorField W;
  W.direction = d;
  W.region = region;
  W.linear_ubar = use_linear_ubar || region == Region::Df;

  auto comp = [](const Vec2& g, int which) { return which == 1 ? g.x() : g.y(); };

  std::vector<double> ge_d, ge_o, gu_d, gu_o;
  for (int t = 0; t < fine.n_tris(); ++t) {
    if (fine.tri_region[t] != region) continue;
    const auto gf = p1_gradients(fine, t);
    const auto& nf = fine.tri[t];
    const Vec2 grad_eps = sol.ueps[nf[0]] * gf[0] + sol.ueps[nf[1]] * gf[1] +
                          sol.ueps[nf[2]] * gf[2];
    Vec2 grad_bar(d == 1 ? 1.0 : 0.0, d == 2 ? 1.0 : 0.0);
    if (!W.linear_ubar) {
      const int pt = mp.parent_tri[t];
      if (pt < 0) throw std::logic_error("reconstruct: Dc triangle without coarse parent");
      const auto gc = p1_gradients(coarse, pt);
      const auto& nc = coarse.tri[pt];
      grad_bar = sol.ubar[nc[0]] * gc[0] + sol.ubar[nc[1]] * gc[1] + sol.ubar[nc[2]] * gc[2];
    }
    W.tris.push_back(t);
    ge_d.push_back(comp(grad_eps, d));
    ge_o.push_back(comp(grad_eps, o));
    gu_d.push_back(comp(grad_bar, d));
    gu_o.push_back(comp(grad_bar, o));
  }
  if (W.tris.empty()) throw std::invalid_argument("reconstruct: empty region");

  double scale = 1.0;
  for (double g : gu_d) scale = std::max(scale, std::abs(g));
  W.floor_used = floor_rel * scale;

  const int n = static_cast<int>(W.tris.size());
  W.W1.resize(n);
  W.W2.resize(n);
  W.valid.assign(n, 1);
  for (int i = 0; i < n; ++i) {
    if (std::abs(gu_d[i]) < W.floor_used) {
      W.valid[i] = 0;
      W.W1[i] = W.W2[i] = 0;
      ++W.n_flagged;
      continue;
    }
    W.W1[i] = (ge_d[i] - gu_d[i]) / gu_d[i];
    W.W2[i] = (ge_o[i] - gu_o[i]) / gu_d[i];
  }
  if (2 * W.n_flagged > n)
    throw std::runtime_error("degenerate-solution: denominator below floor on most of the region");
  return W;
}

CellCorrector classical_cell_corrector(const std::vector<double>& cells, int ndiv,
                                       double L, int direction) {
  if (ndiv < 1 || static_cast<int>(cells.size()) != ndiv * ndiv)
    throw std::invalid_argument("cell corrector: coefficient grid size mismatch");
  CellCorrector cc;
  cc.ndiv = ndiv;
  cc.L = L;
  cc.direction = direction;

  const double s = L / ndiv;
  const double A = 0.5 * s * s;
  const int n = ndiv * ndiv;
  auto nid = [&](int i, int j) { return ((j % ndiv + ndiv) % ndiv) * ndiv + ((i % ndiv + ndiv) % ndiv); };

  // reference P1 gradients of the two triangles of a cell of side s
  const std::array<Vec2, 3> gl = {Vec2(-1 / s, 0), Vec2(1 / s, -1 / s), Vec2(0, 1 / s)};
  const std::array<Vec2, 3> gu = {Vec2(0, -1 / s), Vec2(1 / s, 0), Vec2(-1 / s, 1 / s)};
  const Vec2 e = direction == 1 ? Vec2(1, 0) : Vec2(0, 1);

  std::vector<Triplet> trip;
  trip.reserve(18 * n + 2 * n);
  Vec rhs = Vec::Zero(n + 1);
  for (int cy = 0; cy < ndiv; ++cy)
    for (int cx = 0; cx < ndiv; ++cx) {
      const double k = cells[cy * ndiv + cx];
      const std::array<int, 3> nl = {nid(cx, cy), nid(cx + 1, cy), nid(cx + 1, cy + 1)};
      const std::array<int, 3> nu = {nid(cx, cy), nid(cx + 1, cy + 1), nid(cx, cy + 1)};
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          trip.emplace_back(nl[i], nl[j], k * A * gl[i].dot(gl[j]));
          trip.emplace_back(nu[i], nu[j], k * A * gu[i].dot(gu[j]));
        }
        rhs[nl[i]] -= k * A * e.dot(gl[i]);
        rhs[nu[i]] -= k * A * e.dot(gu[i]);
      }
    }
  // zero-mean gauge via one extra multiplier row
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, n, 1.0 / n);
    trip.emplace_back(n, i, 1.0 / n);
  }
  SpMat K(n + 1, n + 1);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SpMat> lu(K);
  if (lu.info() != Eigen::Success) throw std::runtime_error("cell corrector solve failed");
  Vec x = lu.solve(rhs);
  x += lu.solve(rhs - K * x);
  cc.w = x.head(n);

  cc.gx.resize(2 * n);
  cc.gy.resize(2 * n);
  Vec2 flux = Vec2::Zero();
  for (int cy = 0; cy < ndiv; ++cy)
    for (int cx = 0; cx < ndiv; ++cx) {
      const int cell = cy * ndiv + cx;
      const double k = cells[cell];
      const std::array<int, 3> nl = {nid(cx, cy), nid(cx + 1, cy), nid(cx + 1, cy + 1)};
      const std::array<int, 3> nu = {nid(cx, cy), nid(cx + 1, cy + 1), nid(cx, cy + 1)};
      Vec2 g1 = Vec2::Zero(), g2 = Vec2::Zero();
      for (int i = 0; i < 3; ++i) {
        g1 += cc.w[nl[i]] * gl[i];
        g2 += cc.w[nu[i]] * gu[i];
      }
      cc.gx[2 * cell] = g1.x();
      cc.gy[2 * cell] = g1.y();
      cc.gx[2 * cell + 1] = g2.x();
      cc.gy[2 * cell + 1] = g2.y();
      flux += k * A * ((e + g1) + (e + g2));
    }
  cc.khom_col = flux / (L * L);
  return cc;
}

Vec2 CellCorrector::grad_at(const Vec2& p) const {
  const double s = L / ndiv;
  double px = std::fmod(p.x(), L);
  double py = std::fmod(p.y(), L);
  if (px < 0) px += L;
  if (py < 0) py += L;
  int cx = std::min(static_cast<int>(px / s), ndiv - 1);
  int cy = std::min(static_cast<int>(py / s), ndiv - 1);
  const double xi = px / s - cx;
  const double eta = py / s - cy;
  const int cell = cy * ndiv + cx;
  const int t = (eta <= xi) ? 2 * cell : 2 * cell + 1;
  return Vec2(gx[t], gy[t]);
}

CorrectorErrors corrector_errors(const MeshPair& mp, const CorrectorField& W,
                                 const FieldSampler* reference, const FieldSampler* exact) {
  const Mesh& fine = mp.fine;
  const double A = fine.tri_area();
  CorrectorErrors err;
  err.flagged = W.n_flagged;
  double s_te = 0, s_ta = 0, s_re = 0, n_ex = 0, n_rf = 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < W.tris.size(); ++i) {
    const Vec2 c = fine.centroid(W.tris[i]);
    const double rv = reference ? (*reference)(c) : nan;
    const double xv = exact ? (*exact)(c) : nan;
    if (exact) {
      n_ex += A * xv * xv;
      if (reference) s_re += A * (rv - xv) * (rv - xv);
    }
    if (reference) n_rf += A * rv * rv;
    if (!W.valid[i]) continue;
    if (exact) s_te += A * (W.W1[i] - xv) * (W.W1[i] - xv);
    if (reference) s_ta += A * (W.W1[i] - rv) * (W.W1[i] - rv);
  }
  err.norm_exact = std::sqrt(n_ex);
  err.norm_ref = std::sqrt(n_rf);
  err.e_tilde = exact ? std::sqrt(s_te) : nan;
  err.e_approx = reference ? std::sqrt(s_ta) : nan;
  err.e_ref = (exact && reference) ? std::sqrt(s_re) : nan;
  err.rel_tilde = exact ? err.e_tilde / err.norm_exact : nan;
  err.rel_approx = reference ? err.e_approx / err.norm_ref : nan;
  err.rel_ref = (exact && reference) ? err.e_ref / err.norm_exact : nan;
  return err;
}

FieldSampler lamellar_exact_w1prime(const MeshPair& mp, double eps) {
  const double h = mp.h;
  const double wc = mp.layout.wc;
  return [h, wc, eps](const Vec2& p) {
    // snap to the midpoint of the fine cell containing p (the coefficient is
    // tabulated there, so the exact gradient is compared per cell)
    const double xm = -wc + (std::floor((p.x() + wc) / h) + 0.5) * h;
    return 2.0 / (3.0 * lamellar_profile(xm / eps)) - 1.0;
  };
}

FieldSampler cell_reference_w1prime(const MeshPair& mp, const CellCorrector& cc) {
  const double wc = mp.layout.wc;
  return [cc, wc](const Vec2& p) { return cc.grad_at(Vec2(p.x() + wc, p.y() + wc)).x(); };
}

}  // namespace arlhom
