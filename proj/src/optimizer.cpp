#include "arlhom/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace arlhom {

Vec initial_guess(const AffineFamily& fam, const Vec& k0) {
  const int np = fam.family_params();
  if (k0.size() != np) throw std::invalid_argument("initial_guess: parameter size mismatch");

  const Vec F0 = fam.family_rhs();
  const Vec Uk0 = fam.family_solve(k0, F0);
  const Vec Ut = fam.family_target();
  const Vec r = fam.family_project(Uk0 - Ut);

  std::vector<Vec> v(np);
  std::vector<int> live;
  double vmax = 0;
  for (int a = 0; a < np; ++a) {
    v[a] = fam.family_solve(k0, fam.family_apply_Z(a, Ut));
    vmax = std::max(vmax, v[a].norm());
  }
  if (!(vmax > 0)) throw std::invalid_argument("initial_guess: degenerate target");
  for (int a = 0; a < np; ++a)
    if (v[a].norm() > 1e-12 * vmax) live.push_back(a);

  // normal equations of the affine least-squares problem, restricted to the
  // directions the target actually senses
  const int nl = static_cast<int>(live.size());
  Mat Gram(nl, nl);
  Vec rhs(nl);
  for (int i = 0; i < nl; ++i) {
    for (int j = 0; j < nl; ++j) Gram(i, j) = v[live[i]].dot(v[live[j]]);
    rhs[i] = v[live[i]].dot(r);
  }
  Eigen::FullPivLU<Mat> lu(Gram);
  Vec k = k0;
  if (lu.isInvertible()) {
    const Vec dk = lu.solve(rhs);
    for (int i = 0; i < nl; ++i) k[live[i]] += dk[i];
  }
  return k;
}

namespace {

void record(FitResult& fr, const Vec& k, double J) { fr.history.emplace_back(k, J); }

}  // namespace

FitResult newton_minimize(const Objective& J, const Vec& start, const OptimOptions& opt,
                          const Admissible& ok) {
  if (!ok(start)) throw std::invalid_argument("newton_minimize: inadmissible start");
  FitResult fr;
  fr.initial_guess = start;
  const int n = static_cast<int>(start.size());

  Vec k = start;
  double Jk = J(k);
  record(fr, k, Jk);

  for (int it = 0; it < opt.max_iter; ++it) {
    // central differences for gradient and Hessian
    Vec g(n);
    Mat H(n, n);
    Vec delta(n);
    for (int a = 0; a < n; ++a) delta[a] = opt.fd_rel * std::max(std::abs(k[a]), 1.0);
    std::vector<double> Jp(n), Jm(n);
    for (int a = 0; a < n; ++a) {
      Vec kp = k, km = k;
      kp[a] += delta[a];
      km[a] -= delta[a];
      Jp[a] = J(kp);
      Jm[a] = J(km);
      g[a] = (Jp[a] - Jm[a]) / (2 * delta[a]);
      H(a, a) = (Jp[a] - 2 * Jk + Jm[a]) / (delta[a] * delta[a]);
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        Vec kpp = k, kpm = k, kmp = k, kmm = k;
        kpp[a] += delta[a]; kpp[b] += delta[b];
        kpm[a] += delta[a]; kpm[b] -= delta[b];
        kmp[a] -= delta[a]; kmp[b] += delta[b];
        kmm[a] -= delta[a]; kmm[b] -= delta[b];
        H(a, b) = H(b, a) =
            (J(kpp) - J(kpm) - J(kmp) + J(kmm)) / (4 * delta[a] * delta[b]);
      }

    Vec step;
    const Eigen::LDLT<Mat> ldlt(H);
    const bool spd = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (spd) step = -ldlt.solve(g);
    if (!spd || !step.allFinite()) {
      // fall back on a gradient step scaled to the parameter magnitude
      const double gn = g.norm();
      step = gn > 0 ? Vec(-g * (0.1 * std::max(k.norm(), 1.0) / gn)) : Vec(Vec::Zero(n));
    }

    double Jnew = std::numeric_limits<double>::infinity();
    Vec knew = k;
    bool accepted = false;
    for (int halving = 0; halving <= opt.max_halvings; ++halving) {
      const Vec cand = k + step / std::pow(2.0, halving);
      if (!ok(cand)) continue;
      const double Jc = J(cand);
      if (std::isfinite(Jc) && Jc <= Jk) {
        knew = cand;
        Jnew = Jc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {  // stuck: treat as converged at the current point
      fr.iterations = it + 1;
      break;
    }
    const double dJ = std::abs(Jk - Jnew);
    const double dk = (knew - k).norm();
    k = knew;
    Jk = Jnew;
    record(fr, k, Jk);
    fr.iterations = it + 1;
    if (dJ <= opt.tol * std::max(Jk, 1e-300)) break;
    if (opt.step_tol > 0 && dk <= opt.step_tol) break;
  }

  fr.kopt_params = k;
  fr.J_min = Jk;
  return fr;
}

FitResult nelder_mead_minimize(const Objective& J, const Vec& start,
                               const OptimOptions& opt, const Admissible& ok) {
  if (!ok(start)) throw std::invalid_argument("nelder_mead_minimize: inadmissible start");
  FitResult fr;
  fr.initial_guess = start;
  const int n = static_cast<int>(start.size());
  const double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

  // J extended by +inf outside the admissible set
  auto Jsafe = [&](const Vec& x) {
    if (!ok(x)) return std::numeric_limits<double>::infinity();
    const double v = J(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vec> simplex;
  std::vector<double> val;
  simplex.push_back(start);
  val.push_back(Jsafe(start));
  for (int a = 0; a < n; ++a) {
    Vec p = start;
    p[a] += 0.05 * std::max(std::abs(start[a]), 0.25);
    simplex.push_back(p);
    val.push_back(Jsafe(p));
  }
  record(fr, simplex[0], val[0]);

  for (int it = 0; it < opt.nm_max_iter; ++it) {
    std::vector<int> order(n + 1);
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
    {
      std::vector<Vec> s2;
      std::vector<double> v2;
      for (int i = 0; i <= n; ++i) {
        s2.push_back(simplex[order[i]]);
        v2.push_back(val[order[i]]);
      }
      simplex = std::move(s2);
      val = std::move(v2);
    }
    const double spread = std::abs(val[n] - val[0]);
    if (spread <= opt.tol * std::max(std::abs(val[0]), 1e-300) && std::isfinite(val[n])) break;
    fr.iterations = it + 1;

    Vec centroid = Vec::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= n;

    const Vec xr = centroid + reflect * (centroid - simplex[n]);
    const double fr_ = Jsafe(xr);
    if (fr_ < val[0]) {
      const Vec xe = centroid + expand * (centroid - simplex[n]);
      const double fe = Jsafe(xe);
      if (fe < fr_) {
        simplex[n] = xe;
        val[n] = fe;
      } else {
        simplex[n] = xr;
        val[n] = fr_;
      }
    } else if (fr_ < val[n - 1]) {
      simplex[n] = xr;
      val[n] = fr_;
    } else {
      const bool outside = fr_ < val[n];
      const Vec xc = outside ? Vec(centroid + contract * (xr - centroid))
                             : Vec(centroid - contract * (centroid - simplex[n]));
      const double fc = Jsafe(xc);
      if (fc < std::min(fr_, val[n])) {
        simplex[n] = xc;
        val[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0]);
          val[i] = Jsafe(simplex[i]);
        }
      }
    }
    int best = 0;
    for (int i = 1; i <= n; ++i)
      if (val[i] < val[best]) best = i;
    record(fr, simplex[best], val[best]);
  }

  int best = 0;
  for (int i = 1; i < static_cast<int>(val.size()); ++i)
    if (val[i] < val[best]) best = i;
  fr.kopt_params = simplex[best];
  fr.J_min = val[best];
  return fr;
}

}  // namespace arlhom
