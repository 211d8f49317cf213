#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "arlhom/arlequin.hpp"
#include "arlhom/config.hpp"
#include "arlhom/corrector.hpp"
#include "arlhom/oned.hpp"
#include "arlhom/runner.hpp"
#include "arlhom/stochastic.hpp"

namespace py = pybind11;
using namespace arlhom;

namespace {

Profile1D make_profile(const std::string& kind, double k0, double k1, double frac0) {
  if (kind == "lamellar") return Profile1D::lamellar();
  if (kind == "constant") return Profile1D::constant(k0);
  if (kind == "two-valued") return Profile1D::two_valued(k0, k1, frac0);
  throw std::invalid_argument("profile kind must be lamellar|constant|two-valued");
}

CoefficientSpec make_spec(const std::string& kind, double value, double eps, double k0,
                          double k1, double p) {
  if (kind == "constant") return CoefficientSpec::constant(value);
  if (kind == "periodic") return CoefficientSpec::periodic(eps, k0, k1);
  if (kind == "random") return CoefficientSpec::random(eps, k0, k1, p);
  if (kind == "lamellar") return CoefficientSpec::lamellar(eps);
  throw std::invalid_argument("spec kind must be constant|periodic|random|lamellar");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Effective-coefficient identification by overlap coupling";

  m.def(
      "run",
      [](const std::string& command, const std::string& config_text,
         const std::string& out_dir, int threads, bool verbose) {
        const auto cfg = KeyValueConfig::from_text(config_text);
        RunOptions opt;
        opt.out_dir = out_dir;
        opt.threads = threads;
        opt.verbose = verbose;
        return run_command(command, cfg, opt).dump();
      },
      py::arg("command"), py::arg("config_text"), py::arg("out_dir"),
      py::arg("threads") = 0, py::arg("verbose") = false,
      "Run one batch command; returns the result document as a JSON string "
      "and writes result.json / meta.log / CSVs into out_dir.");

  m.def(
      "mesh_info",
      [](double wf, double wc, double wd, int direction, double H, double h) {
        const MeshPair mp = build_meshes(build_layout(wf, wc, wd, direction), H, h);
        py::dict d;
        d["coarse_nodes"] = mp.n_coarse();
        d["fine_nodes"] = mp.n_fine();
        d["multiplier_dofs"] = mp.n_w();
        d["nesting_ratio"] = mp.nesting_ratio;
        d["coarse_triangles"] = mp.coarse.n_tris();
        d["fine_triangles"] = mp.fine.n_tris();
        return d;
      },
      py::arg("wf") = 1.0, py::arg("wc") = 2.0, py::arg("wd") = 4.0,
      py::arg("direction") = 1, py::arg("H") = 1.0, py::arg("h") = 0.25);

  m.def(
      "realize_cells",
      [](const std::string& kind, double value, double eps, double k0, double k1, double p,
         std::uint64_t seed, double wf, double wc, double wd, double H, double h) {
        const MeshPair mp = build_meshes(build_layout(wf, wc, wd, 1), H, h);
        const CoefficientField f = realize(make_spec(kind, value, eps, k0, k1, p), seed, mp);
        py::dict d;
        d["ncell"] = f.ncell;
        d["cell_values"] = Vec(f.cell_values);
        d["spatial_average"] = spatial_average(f);
        return d;
      },
      py::arg("kind"), py::arg("value") = 1.0, py::arg("eps") = 0.0625,
      py::arg("k0") = 1.0, py::arg("k1") = 2.0, py::arg("p") = 0.5, py::arg("seed") = 0,
      py::arg("wf") = 1.0, py::arg("wc") = 2.0, py::arg("wd") = 4.0, py::arg("H") = 1.0,
      py::arg("h") = 0.0625);

  m.def("ensemble_average", [](const std::string& kind, double value, double eps, double k0,
                               double k1, double p) {
    return ensemble_average(make_spec(kind, value, eps, k0, k1, p));
  });

  m.def(
      "scan",
      [](const std::string& kind, double value, double eps, double k0, double k1,
         std::uint64_t seed, double H, double h, bool enriched,
         const std::vector<double>& grid) {
        const MeshPair mp = build_meshes(build_layout(1, 2, 4, 1), H, h);
        const CoefficientField f = realize(make_spec(kind, value, eps, k0, k1, 0.5), seed, mp);
        const ArlequinBlocks b =
            assemble_blocks(mp, f, Weighting::PiecewiseConstant, 1, enriched, false);
        const ArlequinSolver s(b);
        return scan_J(s, grid);
      },
      py::arg("kind"), py::arg("value"), py::arg("eps"), py::arg("k0"), py::arg("k1"),
      py::arg("seed"), py::arg("H"), py::arg("h"), py::arg("enriched"), py::arg("grid"),
      "J(kbar) over a grid on the default layout, boundary data x1.");

  m.def(
      "kstar_1d",
      [](const std::string& kind, double k0, double k1, double frac0) {
        return kstar_1d(make_profile(kind, k0, k1, frac0));
      },
      py::arg("kind"), py::arg("k0") = 1.0, py::arg("k1") = 2.0, py::arg("frac0") = 0.5);

  m.def(
      "kopt_1d",
      [](const std::string& kind, double k0, double k1, double frac0, double len_D,
         double len_Dc, double len_Df, double eps) {
        OneDConfig c;
        c.profile = make_profile(kind, k0, k1, frac0);
        c.len_D = len_D;
        c.len_Dc = len_Dc;
        c.len_Df = len_Df;
        c.eps = eps;
        return kopt_1d(c);
      },
      py::arg("kind"), py::arg("k0") = 1.0, py::arg("k1") = 2.0, py::arg("frac0") = 0.5,
      py::arg("len_D") = 4.0, py::arg("len_Dc") = 2.0, py::arg("len_Df") = 2.0,
      py::arg("eps") = 0.0625);

  m.def(
      "interface_1d",
      [](const std::string& kind, double k0, double k1, double frac0, double len_D,
         double len_Df, double eps) {
        const auto r = interface_1d(len_D, len_Df, eps, make_profile(kind, k0, k1, frac0));
        py::dict d;
        d["kopt"] = r.kopt;
        d["kstar"] = r.kstar;
        d["error"] = std::abs(r.kopt - r.kstar);
        return d;
      },
      py::arg("kind"), py::arg("k0") = 1.0, py::arg("k1") = 2.0, py::arg("frac0") = 0.5,
      py::arg("len_D") = 4.0, py::arg("len_Df") = 7.0 / 3.0, py::arg("eps") = 0.0625);

  m.def(
      "cell_corrector",
      [](const Vec& cells, int ndiv, double L, int direction) {
        std::vector<double> c(cells.data(), cells.data() + cells.size());
        const CellCorrector cc = classical_cell_corrector(c, ndiv, L, direction);
        py::dict d;
        d["khom_col"] = std::vector<double>{cc.khom_col.x(), cc.khom_col.y()};
        d["gx"] = Vec(cc.gx);
        d["gy"] = Vec(cc.gy);
        d["w"] = Vec(cc.w);
        return d;
      },
      py::arg("cells"), py::arg("ndiv"), py::arg("L") = 1.0, py::arg("direction") = 1,
      "Periodic cell corrector; cells is an ndiv*ndiv row-major coefficient grid.");

  m.def(
      "sqs_scores",
      [](double eps, double k0, double k1, int pool, int M, std::uint64_t seed, double wf,
         double wc, double wd, double h) {
        const MeshPair mp = build_meshes(build_layout(wf, wc, wd, 1), h, h);
        const auto b = sqs_select(CoefficientSpec::random(eps, k0, k1), mp, pool, M, seed);
        py::dict d;
        d["scores"] = b.scores;
        d["pool_mean_abs"] = b.pool_mean_abs_score;
        d["selected_mean_abs"] = b.selected_mean_abs_score;
        return d;
      },
      py::arg("eps"), py::arg("k0"), py::arg("k1"), py::arg("pool"), py::arg("M"),
      py::arg("seed") = 1, py::arg("wf") = 1.0, py::arg("wc") = 2.0, py::arg("wd") = 4.0,
      py::arg("h") = 0.0625);
}
