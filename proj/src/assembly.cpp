#include "arlhom/assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace arlhom {

namespace {

double tri_area(const Mesh& m, int t) {
  const auto& n = m.tri[t];
  const Vec2 a = m.node(n[0]), b = m.node(n[1]), c = m.node(n[2]);
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

// Consistent P1 mass on a triangle: area/12 * (2 on diagonal, 1 off).
void add_mass(std::vector<Triplet>& trip, const std::array<int, 3>& n, double area) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      trip.emplace_back(n[i], n[j], area / 12.0 * (i == j ? 2.0 : 1.0));
}

}  // namespace

std::array<Vec2, 3> p1_gradients(const Mesh& mesh, int t) {
  const auto& n = mesh.tri[t];
  const Vec2 a = mesh.node(n[0]), b = mesh.node(n[1]), c = mesh.node(n[2]);
  const double inv2A = 1.0 / (2.0 * tri_area(mesh, t));
  return {Vec2(b.y() - c.y(), c.x() - b.x()) * inv2A,
          Vec2(c.y() - a.y(), a.x() - c.x()) * inv2A,
          Vec2(a.y() - b.y(), b.x() - a.x()) * inv2A};
}

std::array<double, 3> p1_values_at(const Mesh& mesh, int t, const Vec2& p) {
  const auto& n = mesh.tri[t];
  const Vec2 a = mesh.node(n[0]), b = mesh.node(n[1]), c = mesh.node(n[2]);
  const double A = tri_area(mesh, t);
  const auto sub = [](const Vec2& u, const Vec2& v, const Vec2& w) {
    return 0.5 * ((v.x() - u.x()) * (w.y() - u.y()) - (w.x() - u.x()) * (v.y() - u.y()));
  };
  return {sub(p, b, c) / A, sub(a, p, c) / A, sub(a, b, p) / A};
}

SpMat assemble_stiffness(const Mesh& mesh, const std::vector<Mat2>& K, const Vec& w) {
  if (static_cast<int>(K.size()) != mesh.n_tris() || w.size() != mesh.n_tris()) {
    throw std::invalid_argument("assemble_stiffness: cell array size mismatch");
  }
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.n_tris());
  for (int t = 0; t < mesh.n_tris(); ++t) {
    if (w[t] == 0.0) continue;
    const auto g = p1_gradients(mesh, t);
    const double s = w[t] * tri_area(mesh, t);
    const auto& n = mesh.tri[t];
    for (int i = 0; i < 3; ++i) {
      const Vec2 Kg_i = K[t].transpose() * g[i];  // row test index: (K grad u) . grad v
      for (int j = 0; j < 3; ++j) trip.emplace_back(n[i], n[j], s * Kg_i.dot(g[j]));
    }
  }
  SpMat A(mesh.n_nodes(), mesh.n_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SpMat assemble_stiffness(const Mesh& mesh, const Mat2& K, const Vec& w) {
  return assemble_stiffness(mesh, std::vector<Mat2>(mesh.n_tris(), K), w);
}

SpMat assemble_stiffness_scalar(const Mesh& mesh, const Vec& k, const Vec& w) {
  if (k.size() != mesh.n_tris()) {
    throw std::invalid_argument("assemble_stiffness_scalar: cell array size mismatch");
  }
  std::vector<Mat2> K(mesh.n_tris());
  for (int t = 0; t < mesh.n_tris(); ++t) K[t] = k[t] * Mat2::Identity();
  return assemble_stiffness(mesh, K, w);
}

SpMat assemble_coupling_coarse(const MeshPair& mp) {
  const Mesh& m = mp.coarse;
  std::vector<Triplet> trip;
  for (int t = 0; t < m.n_tris(); ++t) {
    if (m.tri_region[t] != Region::Dc) continue;
    const auto g = p1_gradients(m, t);
    const double A = tri_area(m, t);
    const auto& n = m.tri[t];
    for (int i = 0; i < 3; ++i) {
      const int wj0 = mp.w_of_coarse[n[i]];
      if (wj0 < 0) throw std::logic_error("Dc coarse node outside multiplier set");
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double v = A * g[i].dot(g[j]) + A / 12.0 * (i == j ? 2.0 : 1.0);
        trip.emplace_back(n[i], mp.w_of_coarse[n[j]], v);
      }
  }
  SpMat C(mp.n_coarse(), mp.n_w());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

SpMat assemble_coupling_fine(const MeshPair& mp) {
  const Mesh& mf = mp.fine;
  const Mesh& mc = mp.coarse;
  std::vector<Triplet> trip;
  for (int t = 0; t < mf.n_tris(); ++t) {
    if (mf.tri_region[t] != Region::Dc) continue;
    const int pt = mp.parent_tri[t];
    const auto gf = p1_gradients(mf, t);
    const auto gc = p1_gradients(mc, pt);
    const double A = tri_area(mf, t);
    const auto& nf = mf.tri[t];
    const auto& ncn = mc.tri[pt];
    // values at edge midpoints: exact for products of two affine functions
    std::array<Vec2, 3> mid;
    for (int e = 0; e < 3; ++e) mid[e] = 0.5 * (mf.node(nf[e]) + mf.node(nf[(e + 1) % 3]));
    std::array<std::array<double, 3>, 3> fm{}, cm{};
    for (int e = 0; e < 3; ++e) {
      const auto fv = p1_values_at(mf, t, mid[e]);
      const auto cv = p1_values_at(mc, pt, mid[e]);
      for (int i = 0; i < 3; ++i) {
        fm[e][i] = fv[i];
        cm[e][i] = cv[i];
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double mass = 0;
        for (int e = 0; e < 3; ++e) mass += fm[e][i] * cm[e][j];
        const double v = A * gf[i].dot(gc[j]) + A / 3.0 * mass;
        trip.emplace_back(nf[i], mp.w_of_coarse[ncn[j]], v);
      }
  }
  SpMat C(mp.n_fine(), mp.n_w());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

SpMat assemble_h1_fine_dc(const MeshPair& mp) {
  const Mesh& m = mp.fine;
  std::vector<Triplet> trip;
  for (int t = 0; t < m.n_tris(); ++t) {
    if (m.tri_region[t] != Region::Dc) continue;
    const auto g = p1_gradients(m, t);
    const double A = tri_area(m, t);
    const auto& n = m.tri[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(n[i], n[j], A * g[i].dot(g[j]));
    add_mass(trip, n, A);
  }
  SpMat C(m.n_nodes(), m.n_nodes());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

BoundaryPenalty assemble_penalty(const MeshPair& mp, double eta, double g0, double gx,
                                 double gy) {
  if (!(eta > 0)) throw std::invalid_argument("assemble_penalty: eta must be positive");
  const Mesh& m = mp.coarse;
  const double inv_eta = 1.0 / eta;
  std::vector<Triplet> trip;
  Vec F = Vec::Zero(m.n_nodes());
  for (const auto& e : mp.gamma_edges) {
    const Vec2 a = m.node(e[0]), b = m.node(e[1]);
    const double L = (b - a).norm();
    trip.emplace_back(e[0], e[0], inv_eta * L / 3.0);
    trip.emplace_back(e[1], e[1], inv_eta * L / 3.0);
    trip.emplace_back(e[0], e[1], inv_eta * L / 6.0);
    trip.emplace_back(e[1], e[0], inv_eta * L / 6.0);
    const double ga = g0 + gx * a.x() + gy * a.y();
    const double gb = g0 + gx * b.x() + gy * b.y();
    F[e[0]] += inv_eta * L * (ga / 3.0 + gb / 6.0);
    F[e[1]] += inv_eta * L * (ga / 6.0 + gb / 3.0);
  }
  BoundaryPenalty bp;
  bp.P.resize(m.n_nodes(), m.n_nodes());
  bp.P.setFromTriplets(trip.begin(), trip.end());
  bp.F = std::move(F);
  return bp;
}

Vec integrate_w_basis_dc(const MeshPair& mp) {
  const Mesh& m = mp.coarse;
  Vec c0 = Vec::Zero(mp.n_w());
  for (int t = 0; t < m.n_tris(); ++t) {
    if (m.tri_region[t] != Region::Dc) continue;
    const double A = tri_area(m, t);
    for (int i = 0; i < 3; ++i) c0[mp.w_of_coarse[m.tri[t][i]]] += A / 3.0;
  }
  return c0;
}

Vec integrate_fine_basis(const Mesh& fine, bool dc_only) {
  Vec v = Vec::Zero(fine.n_nodes());
  for (int t = 0; t < fine.n_tris(); ++t) {
    if (dc_only && fine.tri_region[t] != Region::Dc) continue;
    const double A = tri_area(fine, t);
    for (int i = 0; i < 3; ++i) v[fine.tri[t][i]] += A / 3.0;
  }
  return v;
}

Vec interpolate_coordinate(const Mesh& mesh, int direction) {
  Vec v(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i)
    v[i] = direction == 1 ? mesh.node_x[i] : mesh.node_y[i];
  return v;
}

double gradient_misfit(const Mesh& coarse, const Vec& u, int direction) {
  const Vec2 e = direction == 1 ? Vec2(1, 0) : Vec2(0, 1);
  double J = 0;
  for (int t = 0; t < coarse.n_tris(); ++t) {
    const auto g = p1_gradients(coarse, t);
    const auto& n = coarse.tri[t];
    Vec2 grad = u[n[0]] * g[0] + u[n[1]] * g[1] + u[n[2]] * g[2];
    J += tri_area(coarse, t) * (grad - e).squaredNorm();
  }
  return J;
}

}  // namespace arlhom
