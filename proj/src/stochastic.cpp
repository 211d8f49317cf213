#include "arlhom/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "arlhom/rng.hpp"

namespace arlhom {

namespace {

void run_parallel(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(threads, n);
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

double sample_variance(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return 0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double s = 0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / (n - 1);
}

}  // namespace

RealizationBatch draw_batch(const CoefficientSpec& spec, const MeshPair& mp, int M,
                            std::uint64_t seed) {
  if (M < 1) throw std::invalid_argument("draw_batch: M must be >= 1");
  RealizationBatch b;
  b.spec = spec;
  b.pool = M;
  const double mean = ensemble_average(spec);
  double acc = 0;
  for (int m = 0; m < M; ++m) {
    const std::uint64_t s = derive_seed(seed, 0xD2AFull, m);
    const CoefficientField f = realize(spec, s, mp);
    const double err = spatial_average(f) - mean;
    b.seeds.push_back(s);
    b.scores.push_back(err);
    acc += std::abs(err);
  }
  b.pool_mean_abs_score = b.selected_mean_abs_score = acc / M;
  return b;
}

RealizationBatch sqs_select(const CoefficientSpec& spec, const MeshPair& mp, int pool,
                            int M, std::uint64_t seed) {
  if (pool < M) throw std::invalid_argument("sqs_select: pool must be >= M");
  RealizationBatch b;
  b.spec = spec;
  b.pool = pool;
  const double mean = ensemble_average(spec);
  std::vector<std::pair<double, int>> ranked(pool);
  std::vector<std::uint64_t> seeds(pool);
  std::vector<double> errs(pool);
  double acc = 0;
  for (int m = 0; m < pool; ++m) {
    seeds[m] = derive_seed(seed, 0xD2AFull, m);
    const CoefficientField f = realize(spec, seeds[m], mp);
    errs[m] = spatial_average(f) - mean;
    ranked[m] = {std::abs(errs[m]), m};
    acc += std::abs(errs[m]);
  }
  // ties broken by draw index so the selection is reproducible
  std::stable_sort(ranked.begin(), ranked.end());
  double kept = 0;
  for (int i = 0; i < M; ++i) {
    const int m = ranked[i].second;
    b.seeds.push_back(seeds[m]);
    b.scores.push_back(errs[m]);
    kept += std::abs(errs[m]);
  }
  b.pool_mean_abs_score = acc / pool;
  b.selected_mean_abs_score = kept / M;
  return b;
}

CondensedSolver::CondensedSolver(const ArlequinBlocks& coarse,
                                 const std::vector<CoefficientField>& fields, int threads,
                                 bool keep_operators)
    : b_(&coarse), fields_(fields) {
  if (b_->has_fine())
    throw std::invalid_argument("CondensedSolver expects coarse-only blocks");
  if (fields_.empty()) throw std::invalid_argument("CondensedSolver: empty batch");
  const MeshPair& mp = *b_->mp;
  const int nE = b_->nE, nW = b_->nW;

  alpha2_ = alpha_tri(mp.fine, mp.layout, b_->weighting, 2);
  const double area = 4.0 * mp.layout.wc * mp.layout.wc;
  e_ = integrate_fine_basis(mp.fine, false) / area;

  // Schur block, one realization at a time; factorizations are discarded
  // unless fine-field recovery is requested.
  const int M = static_cast<int>(fields_.size());
  std::vector<Mat> Sm(M);
  if (keep_operators) {
    kept_ops_.resize(M);
    kept_mats_.resize(M);
  }
  const Mat Ceps_d = Mat(b_->Ceps);
  run_parallel(M, threads, [&](int m) {
    auto lu = factor(m);
    Mat Sloc(nW, nW);
    Vec rhs = Vec::Zero(nE + 1);
    for (int j = 0; j < nW; ++j) {
      rhs.head(nE) = Ceps_d.col(j);
      const Vec y = lu->solve(rhs);
      Sloc.col(j) = b_->Ceps.transpose() * y.head(nE);
    }
    Sm[m] = std::move(Sloc);
    if (keep_operators) {
      kept_mats_[m] = augmented_matrix(m);
      kept_ops_[m] = std::move(lu);
    }
  });
  S_ = Mat::Zero(nW, nW);
  for (int m = 0; m < M; ++m) S_ += Sm[m];  // fixed order: deterministic sum
  S_ /= M;

  Zd_.clear();
  for (const auto& Z : b_->Z) Zd_.push_back(Mat(Z));
  Pd_ = Mat(b_->Pbar);
  Cbar_d_ = Mat(b_->Cbar);
}

SpMat CondensedSolver::augmented_matrix(int m) const {
  const MeshPair& mp = *b_->mp;
  const SpMat A = assemble_stiffness_scalar(mp.fine, fields_[m].tri_values(mp.fine), alpha2_);
  const int nE = b_->nE;
  std::vector<Triplet> trip;
  trip.reserve(A.nonZeros() + 2 * nE);
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) trip.emplace_back(it.row(), c, it.value());
  for (int i = 0; i < nE; ++i) {
    trip.emplace_back(i, nE, e_[i]);
    trip.emplace_back(nE, i, e_[i]);
  }
  SpMat Aug(nE + 1, nE + 1);
  Aug.setFromTriplets(trip.begin(), trip.end());
  return Aug;
}

std::unique_ptr<Eigen::SparseLU<SpMat>> CondensedSolver::factor(int m) const {
  auto lu = std::make_unique<Eigen::SparseLU<SpMat>>();
  lu->compute(augmented_matrix(m));
  if (lu->info() != Eigen::Success)
    throw std::runtime_error("factorization of an augmented Neumann operator failed");
  return lu;
}

Mat CondensedSolver::dense_matrix(const Vec& kp) const {
  const int nU = b_->nU, nW = b_->nW;
  Mat A = Mat::Zero(nU + nW + 1, nU + nW + 1);
  Mat K = Pd_;
  for (int a = 0; a < b_->n_params(); ++a) K += kp[a] * Zd_[a];
  A.topLeftCorner(nU, nU) = K;
  A.block(0, nU, nU, nW) = Cbar_d_;
  A.block(nU, 0, nW, nU) = Cbar_d_.transpose();
  A.block(nU, nU, nW, nW) = -S_;
  A.block(nU, nU + nW, nW, 1) = -b_->c0;
  A.block(nU + nW, nU, 1, nW) = -b_->c0.transpose();
  return A;
}

void CondensedSolver::ensure_factor(const Vec& kp) const {
  if (cached_k_.size() == kp.size() && cached_k_ == kp) return;
  A_ = dense_matrix(kp);
  lu_.compute(A_);
  cached_k_ = kp;
}

CondensedSolver::Sol CondensedSolver::solve(const KBar& k) const {
  const Vec kp = b_->kparams(k);
  ensure_factor(kp);
  const int nU = b_->nU, nW = b_->nW;
  Vec rhs = Vec::Zero(size());
  rhs.head(nU) = b_->Fbar;
  Vec x = lu_.solve(rhs);
  x += lu_.solve(rhs - A_ * x);
  Sol s;
  s.ubar = x.head(nU);
  s.psi = x.segment(nU, nW);
  s.bconst = x[nU + nW];
  s.residual = (rhs - A_ * x).norm() / std::max(1.0, rhs.norm());
  if (!x.allFinite()) throw std::runtime_error("condensed solve produced non-finite values");
  return s;
}

double CondensedSolver::J(const KBar& k) const {
  const Sol s = solve(k);
  return gradient_misfit(b_->mp->coarse, s.ubar, b_->direction);
}

std::pair<Vec, double> CondensedSolver::neumann_apply(int m, const Vec& psi) const {
  const int nE = b_->nE;
  Vec rhs = Vec::Zero(nE + 1);
  rhs.head(nE) = b_->Ceps * psi;
  Vec y;
  if (!kept_ops_.empty()) {
    y = kept_ops_[m]->solve(rhs);
    y += kept_ops_[m]->solve(rhs - kept_mats_[m] * y);
  } else {
    const SpMat Aug = augmented_matrix(m);
    Eigen::SparseLU<SpMat> lu(Aug);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("augmented Neumann factorization failed");
    y = lu.solve(rhs);
    y += lu.solve(rhs - Aug * y);
  }
  return {y.head(nE), y[nE]};
}

Vec CondensedSolver::fine_field(int m, const Sol& s) const {
  const MeshPair& mp = *b_->mp;
  Vec u = neumann_apply(m, s.psi).first;
  // shift each realization so its Dc mean matches the coarse one
  const Vec w_dc = integrate_fine_basis(mp.fine, true);
  const double area_dc = w_dc.sum();
  const Vec pu = mp.prolongation.transpose() * w_dc;  // ∫_Dc of coarse hats, W-indexed
  double mean_ubar = 0;
  for (int j = 0; j < mp.n_w(); ++j) mean_ubar += pu[j] * s.ubar[mp.w_nodes[j]];
  mean_ubar /= area_dc;
  const double mean_u = w_dc.dot(u) / area_dc;
  return u.array() + (mean_ubar - mean_u);
}

Vec CondensedSolver::family_solve(const Vec& kparams, const Vec& rhs) const {
  ensure_factor(kparams);
  Vec x = lu_.solve(rhs);
  x += lu_.solve(rhs - A_ * x);
  return x;
}

Vec CondensedSolver::family_apply_Z(int a, const Vec& x) const {
  Vec y = Vec::Zero(size());
  y.head(b_->nU) = b_->Z[a] * x.head(b_->nU);
  return y;
}

Vec CondensedSolver::family_rhs() const {
  Vec r = Vec::Zero(size());
  r.head(b_->nU) = b_->Fbar;
  return r;
}

Vec CondensedSolver::family_project(const Vec& x) const {
  Vec y = Vec::Zero(size());
  y.head(b_->nU) = x.head(b_->nU);
  return y;
}

Vec CondensedSolver::family_target() const {
  Vec y = Vec::Zero(size());
  y.head(b_->nU) = interpolate_coordinate(b_->mp->coarse, b_->direction);
  return y;
}

VarianceStudy variance_study(const ArlequinBlocks& coarse, const MeshPair& mp,
                             const CoefficientSpec& spec, int I, int M, int pool,
                             const OptimOptions& opt, double kbar0, bool use_ig,
                             std::uint64_t master_seed, int threads) {
  VarianceStudy vs;
  vs.contrast = spec.contrast();
  vs.I = I;
  vs.M = M;
  vs.pool = pool;
  vs.kopt_mc.resize(I);
  vs.kopt_sqs.resize(I);
  vs.seeds_mc.resize(I);
  vs.seeds_sqs.resize(I);

  auto identify_scalar = [&](const RealizationBatch& batch) {
    std::vector<CoefficientField> fields;
    fields.reserve(batch.M());
    for (auto s : batch.seeds) fields.push_back(realize(spec, s, mp));
    CondensedSolver solver(coarse, fields, 1);
    Vec k0(1);
    k0 << kbar0;
    Vec start = k0;
    if (use_ig) start = initial_guess(solver, k0);
    auto obj = [&](const Vec& p) { return solver.J(KBar::scalar(p[0])); };
    auto ok = [](const Vec& p) { return p[0] > 0; };
    const FitResult fit = newton_minimize(obj, start, opt, ok);
    return fit.kopt_params[0];
  };

  run_parallel(2 * I, threads, [&](int job) {
    const int i = job / 2;
    if (job % 2 == 0) {
      vs.seeds_mc[i] = derive_seed(master_seed, 0x4D43ull, i);  // independent per i
      vs.kopt_mc[i] = identify_scalar(draw_batch(spec, mp, M, vs.seeds_mc[i]));
    } else {
      vs.seeds_sqs[i] = derive_seed(master_seed, 0x5153ull, i);
      vs.kopt_sqs[i] = identify_scalar(sqs_select(spec, mp, pool, M, vs.seeds_sqs[i]));
    }
  });

  vs.V_MC = sample_variance(vs.kopt_mc);
  vs.V_SQS = sample_variance(vs.kopt_sqs);
  vs.ratio = vs.V_SQS > 0 ? vs.V_MC / vs.V_SQS
                          : std::numeric_limits<double>::infinity();

  // bootstrap interval for the variance ratio (arms are independent)
  const int B = 2000;
  std::vector<double> ratios;
  ratios.reserve(B);
  std::vector<double> a(I), b(I);
  for (int bi = 0; bi < B; ++bi) {
    const std::uint64_t s = derive_seed(master_seed, 0xB007ull, bi);
    for (int i = 0; i < I; ++i) {
      a[i] = vs.kopt_mc[hash_pair(s, 2 * i) % I];
      b[i] = vs.kopt_sqs[hash_pair(s, 2 * i + 1) % I];
    }
    const double va = sample_variance(a), vb = sample_variance(b);
    if (vb > 0) ratios.push_back(va / vb);
  }
  std::sort(ratios.begin(), ratios.end());
  if (!ratios.empty()) {
    vs.ratio_boot_lo = ratios[static_cast<std::size_t>(0.025 * (ratios.size() - 1))];
    vs.ratio_boot_hi = ratios[static_cast<std::size_t>(0.975 * (ratios.size() - 1))];
  }
  return vs;
}

}  // namespace arlhom
