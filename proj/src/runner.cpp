#include "arlhom/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>

#include "arlhom/arlequin.hpp"
#include "arlhom/corrector.hpp"
#include "arlhom/oned.hpp"
#include "arlhom/rng.hpp"
#include "arlhom/stochastic.hpp"

namespace arlhom {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class RunLog {
 public:
  RunLog(const std::string& out_dir, bool verbose) : verbose_(verbose) {
    file_.open(out_dir + "/meta.log");
  }
  void line(const std::string& s) {
    file_ << s << "\n";
    if (verbose_) std::cout << s << "\n";
  }

 private:
  std::ofstream file_;
  bool verbose_;
};

const std::vector<std::string> kLayoutKeys = {"layout.wf", "layout.wc", "layout.wd",
                                              "layout.direction"};
const std::vector<std::string> kCoefKeys = {"coef.kind", "coef.value", "coef.eps",
                                            "coef.k0", "coef.k1", "coef.p",
                                            "coef.pattern_file"};
const std::vector<std::string> kOptKeys = {"opt.method", "opt.tol", "opt.max_iter",
                                           "opt.nm_max_iter", "opt.fd_rel", "opt.step_tol",
                                           "opt.use_ig", "opt.kbar0", "opt.mode",
                                           "opt.all_columns"};
const std::vector<std::string> kCommonKeys = {"threads", "weighting", "enrich", "eta_scale"};

/// Rejects unknown keys before any mesh or solve work happens.
void validate_keys(const KeyValueConfig& cfg,
                   const std::vector<std::vector<std::string>>& groups) {
  std::set<std::string> allowed;
  for (const auto& g : groups) allowed.insert(g.begin(), g.end());
  for (const auto& k : cfg.keys()) {
    if (!allowed.count(k))
      throw std::invalid_argument("invalid config: unknown key '" + k + "' for this command");
  }
}

DomainLayout read_layout(const KeyValueConfig& cfg) {
  return build_layout(cfg.get_num("layout.wf", 1.0), cfg.get_num("layout.wc", 2.0),
                      cfg.get_num("layout.wd", 4.0),
                      static_cast<int>(cfg.get_int("layout.direction", 1)));
}

Weighting read_weighting(const KeyValueConfig& cfg) {
  const std::string w = cfg.get_str("weighting", "piecewise");
  if (w == "piecewise") return Weighting::PiecewiseConstant;
  if (w == "ramp") return Weighting::ContinuousRamp;
  throw std::invalid_argument("invalid config: weighting must be piecewise|ramp");
}

CoefficientSpec read_coef(const KeyValueConfig& cfg) {
  const std::string kind = cfg.get_str("coef.kind", "constant");
  if (kind == "constant") return CoefficientSpec::constant(cfg.get_num("coef.value", 1.0));
  const double eps = cfg.require_num("coef.eps");
  if (kind == "periodic")
    return CoefficientSpec::periodic(eps, cfg.get_num("coef.k0", 1.0), cfg.get_num("coef.k1", 2.0));
  if (kind == "random")
    return CoefficientSpec::random(eps, cfg.get_num("coef.k0", 1.0), cfg.get_num("coef.k1", 2.0),
                                   cfg.get_num("coef.p", 0.5));
  if (kind == "lamellar") return CoefficientSpec::lamellar(eps);
  if (kind == "pattern") return load_pattern(cfg.require_str("coef.pattern_file"), eps);
  throw std::invalid_argument(
      "invalid config: coef.kind must be constant|periodic|random|lamellar|pattern");
}

OptimOptions read_opt(const KeyValueConfig& cfg) {
  OptimOptions o;
  o.tol = cfg.get_num("opt.tol", 1e-2);
  o.max_iter = static_cast<int>(cfg.get_int("opt.max_iter", 50));
  o.nm_max_iter = static_cast<int>(cfg.get_int("opt.nm_max_iter", 200));
  o.fd_rel = cfg.get_num("opt.fd_rel", 1e-3);
  o.step_tol = cfg.get_num("opt.step_tol", 0.0);
  return o;
}

double kstar_reference(const CoefficientSpec& spec, int direction) {
  switch (spec.kind) {
    case CoefficientSpec::Kind::Constant: return spec.value;
    case CoefficientSpec::Kind::PeriodicCheckerboard:
    case CoefficientSpec::Kind::RandomCheckerboard: return std::sqrt(spec.k0 * spec.k1);
    case CoefficientSpec::Kind::Lamellar:
      return direction == 1 ? 2.0 / 3.0 : 1.0 / std::sqrt(2.0);
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

double default_kbar0(const CoefficientSpec& spec, const CoefficientField& field) {
  try {
    return ensemble_average(spec);
  } catch (const std::exception&) {
    return spatial_average(field);
  }
}

std::vector<int> free_indices(bool matrix_mode, int direction) {
  if (!matrix_mode) return {0};
  // parameter order (k11, k12, k21, k22); direction d senses column d
  return direction == 1 ? std::vector<int>{0, 2} : std::vector<int>{1, 3};
}

bool admissible_tensor(const Vec& full) {
  if (full.size() == 1) return full[0] > 0;
  Mat2 t;
  t << full[0], full[1], full[2], full[3];
  const Mat2 s = 0.5 * (t + t.transpose());
  return s(0, 0) > 0 && s.determinant() > 0;
}

struct IdentifyOutcome {
  Vec kopt_full;  ///< 1 or 4 parameters
  double J_min = 0;
  int iterations = 0;
  Vec ig_full;
  std::string method;
  std::vector<std::pair<Vec, double>> history;
};

/// Optimization driver shared by the deterministic and condensed paths.
/// J_of_full evaluates the objective at a full parameter vector.
IdentifyOutcome run_identify(const std::function<double(const Vec&)>& J_of_full,
                             const AffineFamily* fam_for_ig, const Vec& k0_full,
                             bool matrix_mode, int direction, const std::string& method,
                             bool use_ig, const OptimOptions& opt, RunLog& log) {
  IdentifyOutcome out;
  Vec base = k0_full;
  if (use_ig && fam_for_ig) {
    base = initial_guess(*fam_for_ig, k0_full);
    out.method = "affine-formula";
    log.line("initial guess: " + [&] {
      std::string s;
      for (int i = 0; i < base.size(); ++i) s += (i ? "," : "") + fmt17(base[i]);
      return s;
    }());
  } else {
    out.method = "given";
  }
  out.ig_full = base;

  const std::vector<int> free = free_indices(matrix_mode, direction);
  Vec start(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) start[i] = base[free[i]];

  auto to_full = [&](const Vec& p) {
    Vec full = base;
    for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = p[i];
    return full;
  };
  Objective obj = [&](const Vec& p) {
    const double j = J_of_full(to_full(p));
    return j;
  };
  Admissible ok = [&](const Vec& p) { return admissible_tensor(to_full(p)); };

  FitResult fit;
  if (method == "newton") fit = newton_minimize(obj, start, opt, ok);
  else if (method == "nelder-mead") fit = nelder_mead_minimize(obj, start, opt, ok);
  else throw std::invalid_argument("invalid config: opt.method must be newton|nelder-mead");

  out.kopt_full = to_full(fit.kopt_params);
  out.J_min = fit.J_min;
  out.iterations = fit.iterations;
  for (const auto& [p, j] : fit.history) {
    out.history.emplace_back(to_full(p), j);
    std::string s = "iter k=(";
    const Vec full = to_full(p);
    for (int i = 0; i < full.size(); ++i) s += (i ? "," : "") + fmt17(full[i]);
    log.line(s + ") J=" + fmt17(j));
  }
  return out;
}

Json outcome_json(const IdentifyOutcome& o, double kstar_ref) {
  Json j = Json::object();
  Json kopt = Json::num_array(o.kopt_full);
  j.set("kopt", o.kopt_full.size() == 1 ? Json::num(o.kopt_full[0]) : std::move(kopt));
  j.set("J_min", Json::num(o.J_min));
  j.set("iterations", Json::integer(o.iterations));
  j.set("initial_guess", Json::num_array(o.ig_full));
  j.set("initial_guess_method", Json::str(o.method));
  if (std::isfinite(kstar_ref)) j.set("kstar_reference", Json::num(kstar_ref));
  Json hist = Json::array();
  for (const auto& [p, jv] : o.history) {
    Json row = Json::object();
    row.set("k", Json::num_array(p));
    row.set("J", Json::num(jv));
    hist.push(std::move(row));
  }
  j.set("history", std::move(hist));
  return j;
}

Json envelope(const std::string& command, const KeyValueConfig& cfg, const RunOptions& opt) {
  Json j = Json::object();
  j.set("command", Json::str(command));
  j.set("threads", Json::integer(opt.threads));
  Json echo = Json::array();
  for (const auto& l : cfg.raw_lines()) echo.push(Json::str(l));
  j.set("config_echo", std::move(echo));
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// ---------------------------------------------------------------------------

Json cmd_identify(const KeyValueConfig& cfg, const RunOptions& opt, RunLog& log) {
  validate_keys(cfg, {kLayoutKeys, kCoefKeys, kOptKeys, kCommonKeys,
                      {"mesh.H", "mesh.h", "sto.seed"}});
  const DomainLayout layout = read_layout(cfg);
  const double H = cfg.require_num("mesh.H");
  const double h = cfg.require_num("mesh.h");
  const CoefficientSpec spec = read_coef(cfg);
  const Weighting w = read_weighting(cfg);
  const bool enriched = cfg.get_bool("enrich", true);
  const bool matrix_mode = cfg.get_str("opt.mode", "scalar") == "matrix";
  const bool all_columns = cfg.get_bool("opt.all_columns", false);
  const std::string method = cfg.get_str("opt.method", "newton");
  const bool use_ig = cfg.get_bool("opt.use_ig", true);
  const OptimOptions oo = read_opt(cfg);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("sto.seed", 0));

  const MeshPair mp = build_meshes(layout, H, h);
  const CoefficientField field = realize(spec, seed, mp);
  const double kbar0 = cfg.get_num("opt.kbar0", default_kbar0(spec, field));
  log.line("mesh: coarse dofs " + std::to_string(mp.n_coarse()) + ", fine dofs " +
           std::to_string(mp.n_fine()) + ", multiplier dofs " +
           std::to_string(mp.n_w() + (enriched ? 1 : 0)));

  Json result = envelope("identify", cfg, opt);
  Json runs = Json::array();
  std::vector<int> directions = {layout.direction};
  if (matrix_mode && all_columns) directions = {1, 2};

  Vec kfull(matrix_mode ? 4 : 1);
  if (matrix_mode) kfull << kbar0, 0, 0, kbar0;
  else kfull << kbar0;
  for (int dir : directions) {
    DomainLayout l2 = layout;
    l2.direction = dir;
    const MeshPair mp2 = build_meshes(l2, H, h);
    const CoefficientField f2 = realize(spec, seed, mp2);
    const ArlequinBlocks blocks = assemble_blocks(mp2, f2, w, dir, enriched, matrix_mode,
                                                  cfg.get_num("eta_scale", 1e-8));
    log.line("direction " + std::to_string(dir) + ": eta = " + fmt17(blocks.eta));
    const ArlequinSolver solver(blocks);
    const ArlequinFamily fam(solver);
    auto Jfull = [&](const Vec& p) { return solver.J(KBar::from_params(p)); };
    const IdentifyOutcome o =
        run_identify(Jfull, use_ig ? &fam : nullptr, kfull, matrix_mode, dir, method, use_ig, oo, log);
    // identified column feeds the next direction's frozen entries
    kfull = o.kopt_full;
    Json run = outcome_json(o, kstar_reference(spec, dir));
    run.set("direction", Json::integer(dir));
    runs.push(std::move(run));
  }
  result.set("runs", std::move(runs));
  result.set("kopt_final", Json::num_array(kfull));
  Json seeds = Json::array();
  seeds.push(Json::integer(static_cast<long long>(seed)));
  result.set("seeds", std::move(seeds));
  return result;
}

Json cmd_identify_random(const KeyValueConfig& cfg, const RunOptions& opt, RunLog& log) {
  validate_keys(cfg, {kLayoutKeys, kCoefKeys, kOptKeys, kCommonKeys,
                      {"mesh.H", "mesh.h", "sto.seed", "sto.M", "sto.pool"}});
  const DomainLayout layout = read_layout(cfg);
  const double H = cfg.require_num("mesh.H");
  const double h = cfg.require_num("mesh.h");
  const CoefficientSpec spec = read_coef(cfg);
  const Weighting w = read_weighting(cfg);
  const bool enriched = cfg.get_bool("enrich", true);
  const bool matrix_mode = cfg.get_str("opt.mode", "matrix") == "matrix";
  const bool all_columns = cfg.get_bool("opt.all_columns", false);
  const std::string method = cfg.get_str("opt.method", "newton");
  const bool use_ig = cfg.get_bool("opt.use_ig", true);
  const OptimOptions oo = read_opt(cfg);
  const int M = static_cast<int>(cfg.get_int("sto.M", 16));
  const int pool = static_cast<int>(cfg.get_int("sto.pool", M));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("sto.seed", 1));

  const MeshPair mp = build_meshes(layout, H, h);
  const RealizationBatch batch = pool > M ? sqs_select(spec, mp, pool, M, seed)
                                          : draw_batch(spec, mp, M, seed);
  log.line("batch: M=" + std::to_string(batch.M()) + " pool=" + std::to_string(batch.pool) +
           " mean|score| pool=" + fmt17(batch.pool_mean_abs_score) +
           " selected=" + fmt17(batch.selected_mean_abs_score));
  std::vector<CoefficientField> fields;
  for (auto s : batch.seeds) fields.push_back(realize(spec, s, mp));
  const double kbar0 = cfg.get_num("opt.kbar0", ensemble_average(spec));

  Json result = envelope("identify-random", cfg, opt);
  Json runs = Json::array();
  std::vector<int> directions = {layout.direction};
  if (matrix_mode && all_columns) directions = {1, 2};

  Vec kfull(matrix_mode ? 4 : 1);
  if (matrix_mode) kfull << kbar0, 0, 0, kbar0;
  else kfull << kbar0;
  for (int dir : directions) {
    DomainLayout l2 = layout;
    l2.direction = dir;
    const MeshPair mp2 = build_meshes(l2, H, h);
    std::vector<CoefficientField> f2;
    for (auto s : batch.seeds) f2.push_back(realize(spec, s, mp2));
    const ArlequinBlocks coarse = assemble_coarse_blocks(mp2, w, dir, enriched, matrix_mode,
                                                         cfg.get_num("eta_scale", 1e-8));
    const CondensedSolver solver(coarse, f2, opt.threads);
    auto Jfull = [&](const Vec& p) { return solver.J(KBar::from_params(p)); };
    const IdentifyOutcome o =
        run_identify(Jfull, use_ig ? &solver : nullptr, kfull, matrix_mode, dir, method, use_ig, oo, log);
    kfull = o.kopt_full;
    Json run = outcome_json(o, kstar_reference(spec, dir));
    run.set("direction", Json::integer(dir));
    runs.push(std::move(run));
  }
  result.set("runs", std::move(runs));
  result.set("kopt_final", Json::num_array(kfull));
  result.set("seeds", Json::int_array(batch.seeds));
  Json scores = Json::num_array(batch.scores);
  result.set("sqs_scores", std::move(scores));
  return result;
}

Json cmd_scan(const KeyValueConfig& cfg, const RunOptions& opt, RunLog& log) {
  validate_keys(cfg, {kLayoutKeys, kCoefKeys, kCommonKeys,
                      {"mesh.H", "mesh.h", "sto.seed", "scan.kmin", "scan.kmax", "scan.n"}});
  const DomainLayout layout = read_layout(cfg);
  const MeshPair mp = build_meshes(layout, cfg.require_num("mesh.H"), cfg.require_num("mesh.h"));
  const CoefficientSpec spec = read_coef(cfg);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("sto.seed", 0));
  const CoefficientField field = realize(spec, seed, mp);
  const ArlequinBlocks blocks =
      assemble_blocks(mp, field, read_weighting(cfg), layout.direction,
                      cfg.get_bool("enrich", true), false, cfg.get_num("eta_scale", 1e-8));
  const ArlequinSolver solver(blocks);

  const double kmin = cfg.require_num("scan.kmin");
  const double kmax = cfg.require_num("scan.kmax");
  const int n = static_cast<int>(cfg.get_int("scan.n", 41));
  if (!(kmin > 0) || kmax < kmin || n < 1)
    throw std::invalid_argument("invalid config: scan grid needs 0 < kmin <= kmax and n >= 1");
  std::vector<double> grid;
  for (int i = 0; i < n; ++i)
    grid.push_back(n == 1 ? kmin : kmin + (kmax - kmin) * i / (n - 1.0));
  const auto curve = scan_J(solver, grid);

  std::string csv = "kbar,J\n";
  double best_k = grid[0], best_j = std::numeric_limits<double>::infinity();
  for (const auto& [k, j] : curve) {
    csv += fmt17(k) + "," + fmt17(j) + "\n";
    if (j < best_j) {
      best_j = j;
      best_k = k;
    }
  }
  write_file(opt.out_dir + "/scan.csv", csv);
  log.line("scan: " + std::to_string(n) + " points, argmin " + fmt17(best_k));

  Json result = envelope("scan", cfg, opt);
  result.set("argmin", Json::num(best_k));
  result.set("J_at_argmin", Json::num(best_j));
  result.set("points", Json::integer(n));
  Json seeds = Json::array();
  seeds.push(Json::integer(static_cast<long long>(seed)));
  result.set("seeds", std::move(seeds));
  return result;
}

Json cmd_variance(const KeyValueConfig& cfg, const RunOptions& opt, RunLog& log) {
  validate_keys(cfg, {kLayoutKeys, kCoefKeys, kOptKeys, kCommonKeys,
                      {"mesh.H", "mesh.h", "sto.seed", "sto.M", "sto.pool", "sto.I"}});
  const DomainLayout layout = read_layout(cfg);
  const MeshPair mp = build_meshes(layout, cfg.require_num("mesh.H"), cfg.require_num("mesh.h"));
  const CoefficientSpec spec = read_coef(cfg);
  if (spec.kind != CoefficientSpec::Kind::RandomCheckerboard)
    throw std::invalid_argument("invalid config: variance-study needs coef.kind = random");
  const ArlequinBlocks coarse =
      assemble_coarse_blocks(mp, read_weighting(cfg), layout.direction,
                             cfg.get_bool("enrich", true), false, cfg.get_num("eta_scale", 1e-8));
  const int I = static_cast<int>(cfg.get_int("sto.I", 20));
  const int M = static_cast<int>(cfg.get_int("sto.M", 8));
  const int pool = static_cast<int>(cfg.get_int("sto.pool", 200));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("sto.seed", 1));
  const double kbar0 = cfg.get_num("opt.kbar0", ensemble_average(spec));
  const bool use_ig = cfg.get_bool("opt.use_ig", true);

  const VarianceStudy vs = variance_study(coarse, mp, spec, I, M, pool, read_opt(cfg), kbar0,
                                          use_ig, seed, opt.threads);
  log.line("variance: V_MC=" + fmt17(vs.V_MC) + " V_SQS=" + fmt17(vs.V_SQS) +
           " ratio=" + fmt17(vs.ratio) + " boot95=[" + fmt17(vs.ratio_boot_lo) + "," +
           fmt17(vs.ratio_boot_hi) + "]");

  std::string csv = "contrast,I,M,pool,V_MC,V_SQS,ratio\n";
  csv += fmt17(vs.contrast) + "," + std::to_string(I) + "," + std::to_string(M) + "," +
         std::to_string(pool) + "," + fmt17(vs.V_MC) + "," + fmt17(vs.V_SQS) + "," +
         fmt17(vs.ratio) + "\n";
  write_file(opt.out_dir + "/variance.csv", csv);

  Json result = envelope("variance-study", cfg, opt);
  result.set("contrast", Json::num(vs.contrast));
  result.set("V_MC", Json::num(vs.V_MC));
  result.set("V_SQS", Json::num(vs.V_SQS));
  result.set("ratio", Json::num(vs.ratio));
  result.set("ratio_bootstrap_95", Json::array().push(Json::num(vs.ratio_boot_lo)).push(Json::num(vs.ratio_boot_hi)));
  Json reps = Json::array();
  for (int i = 0; i < I; ++i) {
    Json r = Json::object();
    r.set("rep", Json::integer(i));
    r.set("seed_mc", Json::integer(static_cast<long long>(vs.seeds_mc[i])));
    r.set("seed_sqs", Json::integer(static_cast<long long>(vs.seeds_sqs[i])));
    r.set("kopt_mc", Json::num(vs.kopt_mc[i]));
    r.set("kopt_sqs", Json::num(vs.kopt_sqs[i]));
    reps.push(std::move(r));
  }
  result.set("repetitions", std::move(reps));
  return result;
}

Json cmd_corrector(const KeyValueConfig& cfg, const RunOptions& opt, RunLog& log) {
  validate_keys(cfg, {kLayoutKeys, kCoefKeys, kOptKeys, kCommonKeys,
                      {"mesh.h", "sto.seed", "corr.H_coarse", "corr.H_fine", "corr.region",
                       "corr.linear_ubar", "corr.cell_div", "corr.floor_rel", "corr.kopt"}});
  const DomainLayout layout = read_layout(cfg);
  const double h = cfg.require_num("mesh.h");
  const CoefficientSpec spec = read_coef(cfg);
  const Weighting w = read_weighting(cfg);
  const bool enriched = cfg.get_bool("enrich", true);
  const OptimOptions oo = read_opt(cfg);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("sto.seed", 0));
  const double H_coarse = cfg.get_num("corr.H_coarse", 1.0);
  const std::vector<double> H_fine = cfg.get_num_list("corr.H_fine", {0.125});
  const std::string region_s = cfg.get_str("corr.region", "dc");
  const Region region = region_s == "df" ? Region::Df : Region::Dc;
  const bool linear_ubar = cfg.get_bool("corr.linear_ubar", false);
  const bool use_ig = cfg.get_bool("opt.use_ig", true);
  const std::string method = cfg.get_str("opt.method", "newton");

  // stage 1: identify the effective coefficient on the cheap coarse mesh
  double kopt = cfg.get_num("corr.kopt", 0.0);
  Json result = envelope("corrector", cfg, opt);
  if (!(kopt > 0)) {
    const MeshPair mp1 = build_meshes(layout, H_coarse, h);
    const CoefficientField f1 = realize(spec, seed, mp1);
    const ArlequinBlocks b1 = assemble_blocks(mp1, f1, w, layout.direction, enriched, false,
                                              cfg.get_num("eta_scale", 1e-8));
    const ArlequinSolver s1(b1);
    const ArlequinFamily fam(s1);
    Vec k0(1);
    k0 << cfg.get_num("opt.kbar0", default_kbar0(spec, f1));
    auto Jfull = [&](const Vec& p) { return s1.J(KBar::scalar(p[0])); };
    const IdentifyOutcome o = run_identify(Jfull, use_ig ? &fam : nullptr, k0, false,
                                           layout.direction, method, use_ig, oo, log);
    kopt = o.kopt_full[0];
    result.set("identify", outcome_json(o, kstar_reference(spec, layout.direction)));
  }
  log.line("corrector: using kopt = " + fmt17(kopt));
  result.set("kopt", Json::num(kopt));

  // reference corrector: analytic profile for the lamellar medium, a periodic
  // cell (or supercell) solve for the others
  Json rows = Json::array();
  std::string field_csv = "x,y,W1,W2,valid\n";
  for (std::size_t hi = 0; hi < H_fine.size(); ++hi) {
    const double Hf = H_fine[hi];
    const MeshPair mp = build_meshes(layout, Hf, h);
    const CoefficientField field = realize(spec, seed, mp);
    const ArlequinBlocks blocks =
        assemble_blocks(mp, field, w, layout.direction, enriched, false,
                        cfg.get_num("eta_scale", 1e-8));
    const ArlequinSolver solver(blocks);
    const SaddleSolution sol = solver.solve(KBar::scalar(kopt));
    const CorrectorField W = reconstruct(mp, sol, region, linear_ubar,
                                         cfg.get_num("corr.floor_rel", 1e-6));

    FieldSampler ref, exact;
    bool have_exact = false;
    CellCorrector cell;
    if (spec.kind == CoefficientSpec::Kind::Lamellar) {
      const int default_div = static_cast<int>(std::llround(spec.eps / h));
      const int ndiv = static_cast<int>(cfg.get_int("corr.cell_div", default_div));
      std::vector<double> cells(ndiv * ndiv);
      for (int cy = 0; cy < ndiv; ++cy)
        for (int cx = 0; cx < ndiv; ++cx)
          cells[cy * ndiv + cx] = lamellar_profile((cx + 0.5) / ndiv);
      cell = classical_cell_corrector(cells, ndiv, spec.eps, layout.direction);
      exact = lamellar_exact_w1prime(mp, spec.eps);
      have_exact = true;
    } else {
      // supercell of the realization itself, periodic boundary conditions
      std::vector<double> cells(field.cell_values.data(),
                                field.cell_values.data() + field.cell_values.size());
      cell = classical_cell_corrector(cells, field.ncell, 2 * layout.wc, layout.direction);
    }
    ref = cell_reference_w1prime(mp, cell);
    const CorrectorErrors err =
        corrector_errors(mp, W, &ref, have_exact ? &exact : nullptr);

    Json row = Json::object();
    row.set("H", Json::num(Hf));
    row.set("e_tilde", Json::num(err.e_tilde));
    row.set("e_approx", Json::num(err.e_approx));
    row.set("e_ref", Json::num(err.e_ref));
    row.set("rel_tilde", Json::num(err.rel_tilde));
    row.set("rel_approx", Json::num(err.rel_approx));
    row.set("rel_ref", Json::num(err.rel_ref));
    row.set("norm_exact", Json::num(err.norm_exact));
    row.set("norm_ref", Json::num(err.norm_ref));
    row.set("flagged", Json::integer(err.flagged));
    row.set("khom_col", Json::array()
                            .push(Json::num(cell.khom_col.x()))
                            .push(Json::num(cell.khom_col.y())));
    rows.push(std::move(row));
    log.line("H=" + fmt17(Hf) + " e_tilde=" + fmt17(err.e_tilde) +
             " e_approx=" + fmt17(err.e_approx) + " e_ref=" + fmt17(err.e_ref));

    if (hi + 1 == H_fine.size()) {
      for (std::size_t i = 0; i < W.tris.size(); ++i) {
        const Vec2 c = mp.fine.centroid(W.tris[i]);
        field_csv += fmt17(c.x()) + "," + fmt17(c.y()) + "," + fmt17(W.W1[i]) + "," +
                     fmt17(W.W2[i]) + "," + std::to_string(static_cast<int>(W.valid[i])) + "\n";
      }
    }
  }
  write_file(opt.out_dir + "/corrector_field.csv", field_csv);
  result.set("rows", std::move(rows));
  Json seeds = Json::array();
  seeds.push(Json::integer(static_cast<long long>(seed)));
  result.set("seeds", std::move(seeds));
  return result;
}

Json cmd_oned(const KeyValueConfig& cfg, const RunOptions& opt, RunLog& log) {
  validate_keys(cfg, {kCommonKeys,
                      {"oned.profile", "oned.value", "oned.k0", "oned.k1", "oned.frac0",
                       "oned.len_D", "oned.len_Dc", "oned.len_Df", "oned.eps", "oned.kbar",
                       "oned.eps_list", "oned.interface_len_Df"}});
  const std::string ps = cfg.get_str("oned.profile", "lamellar");
  Profile1D profile;
  if (ps == "lamellar") profile = Profile1D::lamellar();
  else if (ps == "constant") profile = Profile1D::constant(cfg.get_num("oned.value", 1.0));
  else if (ps == "two-valued")
    profile = Profile1D::two_valued(cfg.get_num("oned.k0", 1.0), cfg.get_num("oned.k1", 2.0),
                                    cfg.get_num("oned.frac0", 0.5));
  else throw std::invalid_argument("invalid config: oned.profile must be lamellar|constant|two-valued");

  OneDConfig oc;
  oc.len_D = cfg.get_num("oned.len_D", 4.0);
  oc.len_Dc = cfg.get_num("oned.len_Dc", 2.0);
  oc.len_Df = cfg.get_num("oned.len_Df", 2.0);
  oc.eps = cfg.get_num("oned.eps", 1.0 / 16);
  oc.kbar = cfg.get_num("oned.kbar", 1.0);
  oc.profile = profile;

  const FluxResult fr = exact_flux_m(oc);
  const double kopt = kopt_1d(oc);
  log.line("oned: kstar=" + fmt17(fr.kstar) + " m=" + fmt17(fr.m) + " kopt=" + fmt17(kopt));

  const double len_Df_int = cfg.get_num("oned.interface_len_Df", 7.0 / 3.0);
  const std::vector<double> eps_list =
      cfg.get_num_list("oned.eps_list", {0.25, 0.125, 0.0625, 0.03125});
  std::string csv = "epsilon,kopt,kstar,error\n";
  Json sweep = Json::array();
  for (double e : eps_list) {
    const InterfaceResult ir = interface_1d(oc.len_D, len_Df_int, e, profile, 64);
    csv += fmt17(e) + "," + fmt17(ir.kopt) + "," + fmt17(ir.kstar) + "," +
           fmt17(std::abs(ir.kopt - ir.kstar)) + "\n";
    Json row = Json::object();
    row.set("epsilon", Json::num(e));
    row.set("kopt", Json::num(ir.kopt));
    row.set("error", Json::num(std::abs(ir.kopt - ir.kstar)));
    sweep.push(std::move(row));
  }
  write_file(opt.out_dir + "/oned.csv", csv);

  Json result = envelope("oned", cfg, opt);
  result.set("kstar", Json::num(fr.kstar));
  result.set("flux_m", Json::num(fr.m));
  result.set("ubar_prime", Json::num(fr.ubar_prime));
  result.set("kopt_overlap", Json::num(kopt));
  result.set("interface_sweep", std::move(sweep));
  return result;
}

}  // namespace

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds = {"identify", "identify-random", "scan",
                                                "variance-study", "corrector", "oned"};
  return cmds;
}

Json run_command(const std::string& command, const KeyValueConfig& cfg,
                 const RunOptions& opt_in) {
  RunOptions opt = opt_in;
  if (opt.threads <= 0) opt.threads = static_cast<int>(cfg.get_int("threads", 0));
  if (opt.threads <= 0) opt.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::filesystem::create_directories(opt.out_dir);
  RunLog log(opt.out_dir, opt.verbose);
  log.line("command: " + command);
  for (const auto& l : cfg.raw_lines()) log.line("config: " + l);

  Json result;
  if (command == "identify") result = cmd_identify(cfg, opt, log);
  else if (command == "identify-random") result = cmd_identify_random(cfg, opt, log);
  else if (command == "scan") result = cmd_scan(cfg, opt, log);
  else if (command == "variance-study") result = cmd_variance(cfg, opt, log);
  else if (command == "corrector") result = cmd_corrector(cfg, opt, log);
  else if (command == "oned") result = cmd_oned(cfg, opt, log);
  else throw std::invalid_argument("unknown command: " + command);

  write_file(opt.out_dir + "/result.json", result.dump());
  log.line("wrote " + opt.out_dir + "/result.json");
  return result;
}

}  // namespace arlhom
