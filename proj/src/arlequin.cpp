#include "arlhom/arlequin.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

namespace arlhom {

namespace {

// Boundary load of the psi0 problem: edge integrals of constant data on the
// gridlines x_dir = ±level (restricted to |x_other| <= limit), assembled on
// the fine mesh. data is the value on the positive side; the negative side
// gets -data.
void add_line_load(const Mesh& fine, int direction, double level, double limit,
                   double data, Vec& rhs) {
  const int nn = fine.ncell + 1;
  const double tol = 1e-9 * fine.step;
  for (int side = 0; side < 2; ++side) {
    const double x_fixed = side == 0 ? level : -level;
    const double d = side == 0 ? data : -data;
    const int fixed_idx = static_cast<int>(std::llround((x_fixed + fine.half_width) / fine.step));
    for (int k = 0; k < fine.ncell; ++k) {
      // edge between grid positions k and k+1 along the line
      const double a_other = -fine.half_width + k * fine.step;
      const double b_other = a_other + fine.step;
      if (a_other < -limit - tol || b_other > limit + tol) continue;
      const int na = direction == 1 ? fine.node_grid[k * nn + fixed_idx]
                                    : fine.node_grid[fixed_idx * nn + k];
      const int nb = direction == 1 ? fine.node_grid[(k + 1) * nn + fixed_idx]
                                    : fine.node_grid[fixed_idx * nn + (k + 1)];
      if (na < 0 || nb < 0) throw std::logic_error("missing boundary node on data line");
      rhs[na] += d * fine.step / 2.0;
      rhs[nb] += d * fine.step / 2.0;
    }
  }
}

}  // namespace

Enrichment solve_psi0(const MeshPair& mp, Weighting w, int direction) {
  const Mesh& fine = mp.fine;
  const SpMat C = assemble_h1_fine_dc(mp);

  Vec rhs = Vec::Zero(fine.n_nodes());
  if (w == Weighting::PiecewiseConstant) {
    // flux data ±1/2 on both interface rings
    add_line_load(fine, direction, mp.layout.wc, mp.layout.wc, 0.5, rhs);
    add_line_load(fine, direction, mp.layout.wf, mp.layout.wf, 0.5, rhs);
  } else {
    // div(alpha1 e_dir) in weak form: -∫ alpha1 ∂_dir v + outer boundary term
    add_line_load(fine, direction, mp.layout.wc, mp.layout.wc, 1.0, rhs);
    for (int t = 0; t < fine.n_tris(); ++t) {
      if (fine.tri_region[t] != Region::Dc) continue;
      const Vec2 c = fine.centroid(t);
      const double a1 = alpha1(mp.layout, w, c.x(), c.y());
      const auto g = p1_gradients(fine, t);
      const double A = fine.tri_area();
      for (int i = 0; i < 3; ++i)
        rhs[fine.tri[t][i]] -= A * a1 * (direction == 1 ? g[i].x() : g[i].y());
    }
  }

  // active dofs: fine nodes carried by Dc triangles
  std::vector<int> active_of(fine.n_nodes(), -1);
  std::vector<int> active;
  for (int t = 0; t < fine.n_tris(); ++t) {
    if (fine.tri_region[t] != Region::Dc) continue;
    for (int i = 0; i < 3; ++i) active_of[fine.tri[t][i]] = 0;
  }
  for (int i = 0; i < fine.n_nodes(); ++i) {
    if (active_of[i] == 0) {
      active_of[i] = static_cast<int>(active.size());
      active.push_back(i);
    }
  }
  const int na = static_cast<int>(active.size());
  std::vector<Triplet> trip;
  for (int col = 0; col < C.outerSize(); ++col) {
    for (SpMat::InnerIterator it(C, col); it; ++it) {
      if (active_of[it.row()] >= 0 && active_of[col] >= 0)
        trip.emplace_back(active_of[it.row()], active_of[col], it.value());
    }
  }
  SpMat Ca(na, na);
  Ca.setFromTriplets(trip.begin(), trip.end());
  Vec ra(na);
  for (int i = 0; i < na; ++i) ra[i] = rhs[active[i]];

  Eigen::SimplicialLDLT<SpMat> ldlt(Ca);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("psi0 solve failed");
  Vec xa = ldlt.solve(ra);
  xa += ldlt.solve(ra - Ca * xa);  // one refinement step

  Enrichment e;
  e.weighting = w;
  e.direction = direction;
  e.psi0 = Vec::Zero(fine.n_nodes());
  for (int i = 0; i < na; ++i) e.psi0[active[i]] = xa[i];
  e.residual = (ra - Ca * xa).norm() / std::max(1.0, ra.norm());
  return e;
}

SpMat ArlequinBlocks::coarse_matrix(const Vec& kparams) const {
  SpMat K = Pbar;
  for (int a = 0; a < n_params(); ++a) K = K + kparams[a] * Z[a];
  return K;
}

Vec ArlequinBlocks::kparams(const KBar& k) const {
  if (matrix_mode) {
    const Mat2 t = k.tensor();
    Vec p(4);
    p << t(0, 0), t(0, 1), t(1, 0), t(1, 1);
    return p;
  }
  if (k.is_matrix) throw std::invalid_argument("matrix k̄ passed to scalar-mode blocks");
  Vec p(1);
  p << k.s;
  return p;
}

ArlequinBlocks assemble_coarse_blocks(const MeshPair& mp, Weighting w, int direction,
                                      bool enriched, bool matrix_mode, double eta_scale) {
  ArlequinBlocks b;
  b.mp = &mp;
  b.direction = direction;
  b.enriched = enriched;
  b.matrix_mode = matrix_mode;
  b.weighting = w;
  b.nU = mp.n_coarse();
  b.nE = mp.n_fine();
  b.nW = mp.n_w() + (enriched ? 1 : 0);

  const Vec a1 = alpha_tri(mp.coarse, mp.layout, w, 1);
  if (matrix_mode) {
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c) {
        Mat2 E = Mat2::Zero();
        E(a, c) = 1.0;
        b.Z.push_back(assemble_stiffness(mp.coarse, E, a1));
      }
  } else {
    b.Z.push_back(assemble_stiffness(mp.coarse, Mat2::Identity(), a1));
  }

  // eta scaled by the mean diagonal of the coarse stiffness so the penalty
  // strength is mesh-independent
  const double diag_sum = matrix_mode ? (b.Z[0].diagonal() + b.Z[3].diagonal()).sum()
                                      : b.Z[0].diagonal().sum();
  b.eta = eta_scale * diag_sum / b.nU;
  const auto bp = assemble_penalty(mp, b.eta, 0.0, direction == 1 ? 1.0 : 0.0,
                                   direction == 2 ? 1.0 : 0.0);
  b.Pbar = bp.P;
  b.Fbar = bp.F;

  SpMat Cbar0 = assemble_coupling_coarse(mp);
  SpMat Ceps0 = assemble_coupling_fine(mp);
  Vec c0w = integrate_w_basis_dc(mp);

  if (!enriched) {
    b.Cbar = std::move(Cbar0);
    b.Ceps = std::move(Ceps0);
    b.c0 = std::move(c0w);
    return b;
  }

  const Enrichment enr = solve_psi0(mp, w, direction);
  b.psi0 = enr.psi0;
  const SpMat Cff = assemble_h1_fine_dc(mp);
  const Vec col_fine = Cff * b.psi0;
  const Vec col_w = mp.prolongation.transpose() * col_fine;

  std::vector<Triplet> tb, te;
  for (int c = 0; c < Cbar0.outerSize(); ++c)
    for (SpMat::InnerIterator it(Cbar0, c); it; ++it) tb.emplace_back(it.row(), c, it.value());
  for (int j = 0; j < mp.n_w(); ++j)
    if (col_w[j] != 0.0) tb.emplace_back(mp.w_nodes[j], mp.n_w(), col_w[j]);
  b.Cbar.resize(b.nU, b.nW);
  b.Cbar.setFromTriplets(tb.begin(), tb.end());

  for (int c = 0; c < Ceps0.outerSize(); ++c)
    for (SpMat::InnerIterator it(Ceps0, c); it; ++it) te.emplace_back(it.row(), c, it.value());
  for (int i = 0; i < b.nE; ++i)
    if (col_fine[i] != 0.0) te.emplace_back(i, mp.n_w(), col_fine[i]);
  b.Ceps.resize(b.nE, b.nW);
  b.Ceps.setFromTriplets(te.begin(), te.end());

  b.c0.resize(b.nW);
  b.c0.head(mp.n_w()) = c0w;
  b.c0[mp.n_w()] = integrate_fine_basis(mp.fine, true).dot(b.psi0);
  return b;
}

ArlequinBlocks assemble_blocks(const MeshPair& mp, const CoefficientField& field,
                               Weighting w, int direction, bool enriched,
                               bool matrix_mode, double eta_scale) {
  ArlequinBlocks b = assemble_coarse_blocks(mp, w, direction, enriched, matrix_mode, eta_scale);
  const Vec a2 = alpha_tri(mp.fine, mp.layout, w, 2);
  b.Aeps = assemble_stiffness_scalar(mp.fine, field.tri_values(mp.fine), a2);
  return b;
}

ArlequinSolver::ArlequinSolver(const ArlequinBlocks& blocks, int dense_coarse_limit)
    : b_(&blocks) {
  if (!b_->has_fine()) throw std::invalid_argument("ArlequinSolver needs fine-side blocks");
  reduced_ = b_->nU <= dense_coarse_limit;
  if (!reduced_) return;

  const int nE = b_->nE, nW = b_->nW, nU = b_->nU;
  // T = [[Aeps, -Ceps], [-Ceps^T, 0]] is independent of k̄; factor it once.
  std::vector<Triplet> trip;
  trip.reserve(b_->Aeps.nonZeros() + 2 * b_->Ceps.nonZeros());
  for (int c = 0; c < b_->Aeps.outerSize(); ++c)
    for (SpMat::InnerIterator it(b_->Aeps, c); it; ++it)
      trip.emplace_back(it.row(), c, it.value());
  for (int c = 0; c < b_->Ceps.outerSize(); ++c)
    for (SpMat::InnerIterator it(b_->Ceps, c); it; ++it) {
      trip.emplace_back(it.row(), nE + c, -it.value());
      trip.emplace_back(nE + c, it.row(), -it.value());
    }
  T_.resize(nE + nW, nE + nW);
  T_.setFromTriplets(trip.begin(), trip.end());
  T_lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
  T_lu_->compute(T_);
  if (T_lu_->info() != Eigen::Success)
    throw std::runtime_error("factorization of the fine/multiplier block failed");

  // Coarse correction G = C̄ [0 I] T^{-1} [0; C̄ᵀ]: only coarse dofs whose hat
  // touches Dc produce a nonzero column.
  G_ = Mat::Zero(nU, nU);
  const SpMat CbarT = b_->Cbar.transpose();
  Vec rhs = Vec::Zero(nE + nW);
  for (int u = 0; u < nU; ++u) {
    bool nonzero = false;
    rhs.setZero();
    for (SpMat::InnerIterator it(CbarT, u); it; ++it) {
      rhs[nE + it.row()] = it.value();
      nonzero = true;
    }
    if (!nonzero) continue;
    const Vec y = T_lu_->solve(rhs);
    G_.col(u) = b_->Cbar * y.tail(nW);
  }

  Zd_.clear();
  for (const auto& Zs : b_->Z) Zd_.push_back(Mat(Zs));
  Pd_ = Mat(b_->Pbar);
}

void ArlequinSolver::require_admissible(const KBar& k) const {
  const Mat2 t = k.tensor();
  const Mat2 s = 0.5 * (t + t.transpose());
  if (!(s(0, 0) > 0) || !(s.determinant() > 0)) {
    throw std::runtime_error("solver error: k̄ must have positive-definite symmetric part");
  }
}

void ArlequinSolver::ensure_reduced(const Vec& kp) const {
  if (cached_k_.size() == kp.size() && cached_k_ == kp) return;
  K_red_ = Pd_ - G_;
  for (int a = 0; a < b_->n_params(); ++a) K_red_ += kp[a] * Zd_[a];
  K_red_lu_.compute(K_red_);
  cached_k_ = kp;
}

Vec ArlequinSolver::solve_T(const Vec& rhs) const {
  Vec y = T_lu_->solve(rhs);
  y += T_lu_->solve(rhs - T_ * y);
  return y;
}

void ArlequinSolver::factor_full(const Vec& kp) const {
  if (full_lu_ && cached_k_full_.size() == kp.size() && cached_k_full_ == kp) return;
  const int nU = b_->nU, nE = b_->nE, nW = b_->nW;
  const SpMat K = b_->coarse_matrix(kp);
  std::vector<Triplet> trip;
  trip.reserve(K.nonZeros() + b_->Aeps.nonZeros() + 2 * b_->Cbar.nonZeros() +
               2 * b_->Ceps.nonZeros());
  for (int c = 0; c < K.outerSize(); ++c)
    for (SpMat::InnerIterator it(K, c); it; ++it) trip.emplace_back(it.row(), c, it.value());
  for (int c = 0; c < b_->Aeps.outerSize(); ++c)
    for (SpMat::InnerIterator it(b_->Aeps, c); it; ++it)
      trip.emplace_back(nU + it.row(), nU + c, it.value());
  for (int c = 0; c < b_->Cbar.outerSize(); ++c)
    for (SpMat::InnerIterator it(b_->Cbar, c); it; ++it) {
      trip.emplace_back(it.row(), nU + nE + c, it.value());
      trip.emplace_back(nU + nE + c, it.row(), it.value());
    }
  for (int c = 0; c < b_->Ceps.outerSize(); ++c)
    for (SpMat::InnerIterator it(b_->Ceps, c); it; ++it) {
      trip.emplace_back(nU + it.row(), nU + nE + c, -it.value());
      trip.emplace_back(nU + nE + c, nU + it.row(), -it.value());
    }
  full_mat_.resize(b_->size(), b_->size());
  full_mat_.setFromTriplets(trip.begin(), trip.end());
  full_lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
  full_lu_->compute(full_mat_);
  if (full_lu_->info() != Eigen::Success)
    throw std::runtime_error("solver error: singular coupled system");
  cached_k_full_ = kp;
}

Vec ArlequinSolver::rhs0() const {
  Vec r = Vec::Zero(b_->size());
  r.head(b_->nU) = b_->Fbar;
  return r;
}

Vec ArlequinSolver::apply_Z(int a, const Vec& x) const {
  Vec y = Vec::Zero(b_->size());
  y.head(b_->nU) = b_->Z[a] * x.head(b_->nU);
  return y;
}

Vec ArlequinSolver::project_coarse(const Vec& x) const {
  Vec y = Vec::Zero(b_->size());
  y.head(b_->nU) = x.head(b_->nU);
  return y;
}

Vec ArlequinSolver::coarse_target() const {
  Vec y = Vec::Zero(b_->size());
  y.head(b_->nU) = interpolate_coordinate(b_->mp->coarse, b_->direction);
  return y;
}

Vec ArlequinSolver::residual_blocks(const Vec& kp, const Vec& x, const Vec& rhs) const {
  const int nU = b_->nU, nE = b_->nE, nW = b_->nW;
  const auto xU = x.head(nU);
  const auto xE = x.segment(nU, nE);
  const auto xW = x.tail(nW);
  Vec r(b_->size());
  Vec rU = b_->Pbar * xU;
  for (int a = 0; a < b_->n_params(); ++a) rU += kp[a] * (b_->Z[a] * xU);
  r.head(nU) = rU + b_->Cbar * xW - rhs.head(nU);
  r.segment(nU, nE) = b_->Aeps * xE - b_->Ceps * xW - rhs.segment(nU, nE);
  r.tail(nW) = b_->Cbar.transpose() * xU - b_->Ceps.transpose() * xE - rhs.tail(nW);
  return r;
}

Vec ArlequinSolver::solve_full(const KBar& k, const Vec& rhs) const {
  require_admissible(k);
  const Vec kp = b_->kparams(k);
  const int nU = b_->nU, nE = b_->nE, nW = b_->nW;
  Vec x(b_->size());
  if (reduced_) {
    ensure_reduced(kp);
    Vec psi_tilde = Vec::Zero(nW);
    const bool rhs_tail = rhs.tail(nE + nW).squaredNorm() != 0.0;
    if (rhs_tail) psi_tilde = solve_T(rhs.tail(nE + nW)).tail(nW);
    const Vec bu = rhs.head(nU) - b_->Cbar * psi_tilde;
    x.head(nU) = K_red_lu_.solve(bu);
    Vec t(nE + nW);
    t.head(nE) = rhs.segment(nU, nE);
    t.tail(nW) = rhs.tail(nW) - b_->Cbar.transpose() * x.head(nU);
    x.tail(nE + nW) = solve_T(t);
  } else {
    factor_full(kp);
    x = full_lu_->solve(rhs);
  }
  // one step of global refinement keeps the constraint rows tight even with
  // the large penalty entries in the coarse block
  const Vec r = residual_blocks(kp, x, rhs);
  if (reduced_) {
    Vec dx(b_->size());
    Vec psi_tilde = solve_T(r.tail(nE + nW)).tail(nW);
    dx.head(nU) = K_red_lu_.solve(r.head(nU) - b_->Cbar * psi_tilde);
    Vec t(nE + nW);
    t.head(nE) = r.segment(nU, nE);
    t.tail(nW) = r.tail(nW) - b_->Cbar.transpose() * dx.head(nU);
    dx.tail(nE + nW) = solve_T(t);
    x -= dx;
  } else {
    x -= full_lu_->solve(r);
  }
  return x;
}

Vec ArlequinSolver::ubar(const KBar& k) const {
  require_admissible(k);
  const Vec kp = b_->kparams(k);
  if (reduced_) {
    ensure_reduced(kp);
    Vec u = K_red_lu_.solve(b_->Fbar);
    u += K_red_lu_.solve(b_->Fbar - K_red_ * u);
    return u;
  }
  factor_full(kp);
  Vec rhs = rhs0();
  Vec x = full_lu_->solve(rhs);
  x -= full_lu_->solve(residual_blocks(kp, x, rhs));
  return x.head(b_->nU);
}

double ArlequinSolver::J(const KBar& k) const {
  const Vec u = ubar(k);
  const double j = gradient_misfit(b_->mp->coarse, u, b_->direction);
  if (!std::isfinite(j)) throw std::runtime_error("solver error: non-finite objective");
  return j;
}

SaddleSolution ArlequinSolver::solve(const KBar& k) const {
  const Vec rhs = rhs0();
  const Vec x = solve_full(k, rhs);
  const Vec kp = b_->kparams(k);
  SaddleSolution s;
  s.ubar = x.head(b_->nU);
  s.ueps = x.segment(b_->nU, b_->nE);
  s.psi = x.tail(b_->nW);
  const Vec r = residual_blocks(kp, x, rhs);
  s.residual = r.norm() / std::max(1.0, rhs.norm());
  s.constraint_residual =
      (b_->Cbar.transpose() * s.ubar - b_->Ceps.transpose() * s.ueps).norm();
  return s;
}

std::vector<std::pair<double, double>> scan_J(const ArlequinSolver& solver,
                                              const std::vector<double>& grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double k : grid) out.emplace_back(k, solver.J(KBar::scalar(k)));
  return out;
}

}  // namespace arlhom
