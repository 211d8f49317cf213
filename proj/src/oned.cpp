#include "arlhom/oned.hpp"

#include <cmath>
#include <stdexcept>

namespace arlhom {

namespace {

bool near_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) < tol * std::max(1.0, std::abs(x));
}

// ∫_a^b f(k(t)) dt for 0 <= a <= b (t in periods), exact for piecewise
// profiles, composite Simpson otherwise.
double integrate_t(const Profile1D& p, const std::function<double(double)>& f, double a,
                   double b, int simpson_per_period = 20000) {
  if (b <= a) return 0;
  if (p.piecewise) {
    double total = 0;
    const double period_val = [&] {
      double s = 0, prev = 0;
      for (std::size_t i = 0; i < p.breaks.size(); ++i) {
        s += f(p.values[i]) * (p.breaks[i] - prev);
        prev = p.breaks[i];
      }
      return s;
    }();
    const double full_lo = std::ceil(a), full_hi = std::floor(b);
    auto partial = [&](double t0, double t1) {  // within one period
      double s = 0, prev = 0;
      const double base = std::floor(t0);
      const double u0 = t0 - base, u1 = t1 - base;
      for (std::size_t i = 0; i < p.breaks.size(); ++i) {
        const double lo = std::max(prev, u0), hi = std::min(p.breaks[i], u1);
        if (hi > lo) s += f(p.values[i]) * (hi - lo);
        prev = p.breaks[i];
      }
      return s;
    };
    if (full_hi < full_lo) return partial(a, b);
    total += partial(a, full_lo);
    total += (full_hi - full_lo) * period_val;
    total += partial(full_hi, b);
    return total;
  }
  const int n = std::max(64, static_cast<int>(std::ceil((b - a) * simpson_per_period / 2)) * 2);
  const double dt = (b - a) / n;
  double s = f(p.eval(a)) + f(p.eval(b));
  for (int i = 1; i < n; ++i) s += f(p.eval(a + i * dt)) * (i % 2 ? 4.0 : 2.0);
  return s * dt / 3.0;
}

}  // namespace

double Profile1D::eval(double t) const {
  const double u = t - std::floor(t);
  if (piecewise) {
    for (std::size_t i = 0; i < breaks.size(); ++i)
      if (u <= breaks[i] || i + 1 == breaks.size()) return values[i];
    return values.back();
  }
  return k(u);
}

double Profile1D::max_value() const {
  if (piecewise) {
    double m = values[0];
    for (double v : values) m = std::max(m, v);
    return m;
  }
  double m = 0;
  for (int i = 0; i < 4096; ++i) m = std::max(m, k(i / 4096.0));
  return m;
}

Profile1D Profile1D::constant(double c) {
  if (!(c > 0)) throw std::invalid_argument("profile values must be positive");
  Profile1D p;
  p.piecewise = true;
  p.values = {c};
  p.breaks = {1.0};
  p.k = [c](double) { return c; };
  return p;
}

Profile1D Profile1D::lamellar() {
  Profile1D p;
  p.piecewise = false;
  p.k = [](double t) {
    const double s = std::sin(2.0 * M_PI * t);
    return 1.0 / (1.0 + s * s);
  };
  return p;
}

Profile1D Profile1D::two_valued(double k0, double k1, double frac0) {
  if (!(k0 > 0 && k1 > 0) || !(frac0 > 0 && frac0 < 1))
    throw std::invalid_argument("two_valued: need positive values and 0 < frac0 < 1");
  Profile1D p;
  p.piecewise = true;
  p.values = {k0, k1};
  p.breaks = {frac0, 1.0};
  p.k = [k0, k1, frac0](double t) {
    const double u = t - std::floor(t);
    return u <= frac0 ? k0 : k1;
  };
  return p;
}

double period_average(const Profile1D& p, const std::function<double(double)>& f,
                      int simpson_n) {
  return integrate_t(p, f, 0.0, 1.0, simpson_n);
}

double kstar_1d(const Profile1D& p) {
  return 1.0 / period_average(p, [](double k) { return 1.0 / k; });
}

FluxResult exact_flux_m(const OneDConfig& cfg) {
  if (!(cfg.kbar > 0)) throw std::invalid_argument("exact_flux_m: kbar must be positive");
  if (!(cfg.eps > 0) || !near_integer(cfg.len_Dc / cfg.eps) || !near_integer(cfg.len_Df / cfg.eps))
    throw std::invalid_argument("exact_flux_m: |Dc| and |Df| must be multiples of eps");
  FluxResult r;
  r.kstar = kstar_1d(cfg.profile);
  const double avg = period_average(
      cfg.profile, [&](double k) { return 2.0 / (cfg.kbar + k); });
  const double total = cfg.len_D + cfg.len_Dc + cfg.len_Df;
  r.m = total / (cfg.len_D / cfg.kbar + cfg.len_Df / r.kstar + cfg.len_Dc * avg);
  r.ubar_prime = r.m / cfg.kbar;
  return r;
}

double kopt_1d(const OneDConfig& cfg) {
  if (!(cfg.eps > 0) || !near_integer(cfg.len_Dc / cfg.eps) || !near_integer(cfg.len_Df / cfg.eps))
    throw std::invalid_argument("kopt_1d: |Dc| and |Df| must be multiples of eps");
  const double kstar = kstar_1d(cfg.profile);
  const auto g = [&](double k) {
    const double avg = period_average(cfg.profile, [&](double kp) { return 2.0 / (k + kp); });
    return cfg.len_Df * k / kstar + cfg.len_Dc * k * avg - (cfg.len_Dc + cfg.len_Df);
  };
  double lo = 1e-14, hi = cfg.profile.max_value() * (1.0 + 1e-12);
  double glo = g(lo), ghi = g(hi);
  if (!(glo < 0) || !(ghi >= 0))
    throw std::runtime_error("kopt_1d: no sign change on (0, max k_per]");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

InterfaceResult interface_1d(double len_D, double len_Df, double eps, const Profile1D& p,
                             int nsamples) {
  if (!(len_Df > 0 && eps > 0)) throw std::invalid_argument("interface_1d: bad lengths");
  (void)len_D;  // kopt depends only on the heterogeneous region
  InterfaceResult r;
  r.kstar = kstar_1d(p);
  // average of 1/k_eps over Df = (-len/2, len/2), in period units
  const double a = -0.5 * len_Df / eps, b = 0.5 * len_Df / eps;
  const double shift = std::ceil(-a);  // integrate over nonnegative t
  const double avg_inv =
      integrate_t(p, [](double k) { return 1.0 / k; }, a + shift, b + shift) / (b - a);
  r.kopt = 1.0 / avg_inv;
  for (int i = 0; i < nsamples; ++i) {
    const double x = -0.5 * len_Df + (i + 0.5) * len_Df / nsamples;
    r.sample_x.push_back(x);
    r.ratio.push_back(r.kopt / p.eval(x / eps) - 1.0);
  }
  return r;
}

}  // namespace arlhom
