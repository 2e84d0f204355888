#include "spectra/core/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spectra/core/errors.hpp"
#include "spectra/core/io.hpp"
#include "spectra/core/rng.hpp"

namespace spectra {

namespace {

constexpr struct {
  Family f;
  const char* name;
} kFamilies[] = {
    {Family::Elliptope, "elliptope"},
    {Family::VontopePre, "vontope-pre"},
    {Family::VontopePost, "vontope-post"},
    {Family::RandomSlater, "random-slater"},
    {Family::PlantedNoSlater, "planted-noslater"},
    {Family::DualUnattained, "dual-unattained"},
    {Family::PaperSd2, "paper-sd2"},
    {Family::PaperDualFail, "paper-dual-fail"},
};

Matrix sym_unit(Index n, Index p, Index q) {
  Matrix e = Matrix::Zero(n, n);
  if (p == q) {
    e(p, p) = 1.0;
  } else {
    e(p, q) = 0.5;
    e(q, p) = 0.5;
  }
  return e;
}

// Completes the unit vector u to an orthonormal basis and returns the complement.
Matrix complement_of(const Vector& u) {
  const Index n = u.size();
  Eigen::HouseholderQR<Matrix> qr(u);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - 1);
}

struct ForcedW {
  SymMatrix W;
  KktTriple optimal;
};

// W = vertex + scale (A^* y0 - Z0) with Z0 PD on the complement of the vertex,
// so that the projection of W is exactly the vertex with y = -scale y0.
ForcedW rank1_forcing(const LinearMap& map, const Vector& v, RandomStream& rs, double scale = 1e-3) {
  const Index n = v.size();
  const SymMatrix vertex = SymMatrix::outer(v);
  const Matrix vbar = complement_of(v / v.norm());
  const Matrix g = rs.normal_matrix(n - 1, n - 1);
  const Matrix s = g * g.transpose() / static_cast<double>(n) + Matrix::Identity(n - 1, n - 1);
  const SymMatrix z0 = SymMatrix::symmetrize(vbar * s * vbar.transpose());
  const Vector y0 = rs.normal_vector(map.m());
  ForcedW out;
  out.W = vertex + scale * (map.adjoint(y0) - z0);
  out.optimal = KktTriple{vertex, -scale * y0, scale * z0};
  return out;
}

void record_optimal(BapInstance& inst, const KktTriple& t) {
  inst.meta.optimal = t;
  const SymMatrix d = t.X - inst.W;
  inst.meta.optimal_value = 0.5 * d.inner(d);
}

std::vector<Index> random_permutation(Index n, RandomStream& rs) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(rs.integer(0, static_cast<int>(i)))]);
  return p;
}

}  // namespace

const char* to_string(Family f) noexcept {
  for (const auto& e : kFamilies)
    if (e.f == f) return e.name;
  return "unknown";
}

const char* to_string(WMode w) noexcept {
  switch (w) {
    case WMode::Random: return "random";
    case WMode::Rank1: return "rank1";
    case WMode::Feasible: return "feasible";
  }
  return "unknown";
}

Family parse_family(const std::string& s) {
  for (const auto& e : kFamilies)
    if (s == e.name) return e.f;
  fail(ErrorCode::InvalidArgument, "unknown generator family '" + s + "'");
}

WMode parse_wmode(const std::string& s) {
  if (s == "random") return WMode::Random;
  if (s == "rank1" || s == "rank1-forcing") return WMode::Rank1;
  if (s == "feasible") return WMode::Feasible;
  fail(ErrorCode::InvalidArgument, "unknown W mode '" + s + "'");
}

nlohmann::ordered_json GeneratorSpec::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = to_string(family);
  j["n"] = n;
  if (m)
    j["m"] = *m;
  else
    j["m"] = nullptr;
  j["seed"] = seed;
  j["sd"] = sd;
  j["iips"] = iips;
  j["support"] = support;
  j["w_mode"] = to_string(w_mode);
  return j;
}

BapInstance generate(const GeneratorSpec& s) {
  switch (s.family) {
    case Family::Elliptope: return gen_elliptope(s.n, s.w_mode, s.seed);
    case Family::VontopePre: return gen_vontope(s.n, false, s.w_mode, s.seed);
    case Family::VontopePost: return gen_vontope(s.n, true, s.w_mode, s.seed);
    case Family::RandomSlater: return gen_random_slater(s.n, s.m.value_or(s.n), s.seed);
    case Family::PlantedNoSlater:
      return gen_planted_noslater(s.n, s.m.value_or(s.n), s.sd, s.iips, s.support, s.seed);
    case Family::DualUnattained: return gen_dual_unattained(s.n, s.seed);
    case Family::PaperSd2: return fixture_paper_sd2();
    case Family::PaperDualFail: return fixture_paper_dual_fail();
  }
  fail(ErrorCode::InvalidArgument, "generate: unknown family");
}

BapInstance gen_elliptope(Index n, WMode w_mode, std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "elliptope: n must be at least 2");
  Matrix rows = Matrix::Zero(n, tri(n));
  for (Index i = 0; i < n; ++i) rows.row(i) = svec(sym_unit(n, i, i)).transpose();
  BapInstance inst{LinearMap(n, std::move(rows)), Vector::Ones(n), SymMatrix::zero(n), {}};
  RandomStream rs(seed, "elliptope", static_cast<std::uint64_t>(n));
  inst.meta.family = to_string(Family::Elliptope);
  inst.meta.seed = seed;
  inst.meta.params = {{"n", n}, {"w_mode", to_string(w_mode)}};
  inst.meta.feasible_point = SymMatrix::identity(n);
  switch (w_mode) {
    case WMode::Random: inst.W = SymMatrix::symmetrize(rs.symmetric(n)); break;
    case WMode::Feasible:
      inst.W = SymMatrix::identity(n);
      record_optimal(inst, {SymMatrix::identity(n), Vector::Zero(n), SymMatrix::zero(n)});
      break;
    case WMode::Rank1: {
      Vector x(n);
      for (Index i = 0; i < n; ++i) x(i) = rs.uniform() < 0.5 ? -1.0 : 1.0;
      auto f = rank1_forcing(inst.map, x, rs);
      inst.W = f.W;
      record_optimal(inst, f.optimal);
      break;
    }
  }
  return inst;
}

namespace vontope {

std::vector<std::pair<Index, Index>> gangster_set(Index n) {
  std::vector<std::pair<Index, Index>> j{{0, 0}};
  for (Index i = 0; i < n; ++i)
    for (Index a = 0; a < n; ++a)
      for (Index b = a + 1; b < n; ++b) j.emplace_back(var(n, a, i), var(n, b, i));
  for (Index i = 0; i < n; ++i)
    for (Index k = i + 1; k < n; ++k)
      for (Index a = 0; a < n; ++a) j.emplace_back(var(n, a, i), var(n, a, k));
  return j;
}

std::vector<std::pair<Index, Index>> dependent_after_fr(Index n) {
  std::vector<std::pair<Index, Index>> d;
  // Diagonals of the blocks in the last block column, then block (n-3, n-2).
  for (Index i = 0; i + 1 < n; ++i)
    for (Index a = 0; a < n; ++a) d.emplace_back(var(n, a, i), var(n, a, n - 1));
  for (Index a = 0; a < n; ++a) d.emplace_back(var(n, a, n - 3), var(n, a, n - 2));
  return d;
}

// Row and column sums of X minus the homogenizing coordinate; every lifted
// vertex lies in the kernel.
Matrix sum_rows(Index n) {
  const Index N = n * n + 1;
  Matrix k = Matrix::Zero(2 * n, N);
  k.col(0).setConstant(-1.0);
  for (Index i = 0; i < n; ++i)
    for (Index a = 0; a < n; ++a) {
      k(a, var(n, a, i)) = 1.0;
      k(n + i, var(n, a, i)) = 1.0;
    }
  return k;
}

Matrix face_basis(Index n) {
  const Index N = n * n + 1;
  const Matrix k = sum_rows(n);
  Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeFullV);
  const Index r = (n - 1) * (n - 1) + 1;
  Matrix v = svd.matrixV().rightCols(r);
  // Deterministic orientation: rotate to the orthonormal basis whose leading
  // rows are triangular (QR of the transpose).
  Eigen::HouseholderQR<Matrix> qr(v.transpose());
  Matrix q = qr.householderQ() * Matrix::Identity(r, r);
  Matrix out = v * q;
  for (Index c = 0; c < r; ++c) {
    for (Index i = 0; i < N; ++i) {
      if (std::abs(out(i, c)) > 1e-12) {
        if (out(i, c) < 0) out.col(c) *= -1.0;
        break;
      }
    }
  }
  return out;
}

Matrix lifted_vertex(const std::vector<Index>& perm) {
  const Index n = static_cast<Index>(perm.size());
  Vector x = Vector::Zero(n * n + 1);
  x(0) = 1.0;
  for (Index i = 0; i < n; ++i) x(var(n, perm[static_cast<std::size_t>(i)], i)) = 1.0;
  return x * x.transpose();
}

Matrix barycenter(Index n) {
  const Index N = n * n + 1;
  Matrix y = Matrix::Zero(N, N);
  y(0, 0) = 1.0;
  const double dn = static_cast<double>(n);
  for (Index i = 0; i < n; ++i)
    for (Index a = 0; a < n; ++a) {
      const Index p = var(n, a, i);
      y(0, p) = y(p, 0) = 1.0 / dn;
      for (Index k = 0; k < n; ++k)
        for (Index b = 0; b < n; ++b) {
          const Index q = var(n, b, k);
          if (a == b && i == k)
            y(p, q) = 1.0 / dn;
          else if (a != b && i != k)
            y(p, q) = 1.0 / (dn * (dn - 1.0));
        }
    }
  return y;
}

}  // namespace vontope

BapInstance gen_vontope(Index n, bool post_fr, WMode w_mode, std::uint64_t seed) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "vontope: n must be at least 3");
  using namespace vontope;
  const Index N = n * n + 1;
  std::vector<Matrix> mats;
  std::vector<double> rhs;
  Matrix vhat;
  Index order = N;
  if (!post_fr) {
    for (auto [p, q] : gangster_set(n)) {
      mats.push_back(sym_unit(N, p, q));
      rhs.push_back(p == 0 && q == 0 ? 1.0 : 0.0);
    }
    for (Index a = 0; a < n; ++a)
      for (Index b = a; b < n; ++b) {
        Matrix m = Matrix::Zero(N, N);
        for (Index i = 0; i < n; ++i) m += sym_unit(N, var(n, a, i), var(n, b, i));
        mats.push_back(m);
        rhs.push_back(a == b ? 1.0 : 0.0);
      }
    for (Index i = 0; i < n; ++i)
      for (Index k = i; k < n; ++k) {
        Matrix m = Matrix::Zero(N, N);
        for (Index a = 0; a < n; ++a) m += sym_unit(N, var(n, a, i), var(n, a, k));
        mats.push_back(m);
        rhs.push_back(i == k ? 1.0 : 0.0);
      }
    for (Index j = 1; j < N; ++j) {
      mats.push_back(sym_unit(N, 0, j) - sym_unit(N, j, j));
      rhs.push_back(0.0);
    }
  } else {
    vhat = face_basis(n);
    order = vhat.cols();
    auto dep = dependent_after_fr(n);
    std::sort(dep.begin(), dep.end());
    for (auto [p, q] : gangster_set(n)) {
      if (std::binary_search(dep.begin(), dep.end(), std::make_pair(p, q))) continue;
      const Matrix m = vhat.transpose() * sym_unit(N, p, q) * vhat;
      mats.push_back(0.5 * (m + m.transpose()));
      rhs.push_back(p == 0 && q == 0 ? 1.0 : 0.0);
    }
  }
  BapInstance inst{LinearMap::from_matrices(order, mats),
                   Eigen::Map<const Vector>(rhs.data(), static_cast<Index>(rhs.size())), SymMatrix::zero(order), {}};
  const Family fam = post_fr ? Family::VontopePost : Family::VontopePre;
  inst.meta.family = to_string(fam);
  inst.meta.seed = seed;
  inst.meta.params = {{"n", n}, {"post_fr", post_fr}, {"w_mode", to_string(w_mode)}};
  if (post_fr) {
    inst.meta.face_basis = vhat;
  } else {
    // A^* lam = K^T K exposes the face; solve for lam in the span of the rows.
    const Matrix k = sum_rows(n);
    const Vector target = svec(Matrix(k.transpose() * k));
    const Matrix at = inst.map.rows().transpose();
    const Vector lam = at.completeOrthogonalDecomposition().solve(target);
    inst.meta.certificates = {lam.normalized()};
  }

  auto to_model = [&](const Matrix& y) {
    return post_fr ? SymMatrix::symmetrize(vhat.transpose() * y * vhat) : SymMatrix::symmetrize(y);
  };
  const SymMatrix feasible = to_model(barycenter(n));
  inst.meta.feasible_point = feasible;

  RandomStream rs(seed, inst.meta.family, static_cast<std::uint64_t>(n));
  switch (w_mode) {
    case WMode::Random: inst.W = SymMatrix::symmetrize(rs.symmetric(order)); break;
    case WMode::Feasible:
      inst.W = feasible;
      record_optimal(inst, {feasible, Vector::Zero(inst.m()), SymMatrix::zero(order)});
      break;
    case WMode::Rank1: {
      const auto perm = random_permutation(n, rs);
      Vector x = Vector::Zero(N);
      x(0) = 1.0;
      for (Index i = 0; i < n; ++i) x(var(n, perm[static_cast<std::size_t>(i)], i)) = 1.0;
      const Vector v = post_fr ? Vector(vhat.transpose() * x) : x;
      auto f = rank1_forcing(inst.map, v, rs);
      inst.W = f.W;
      record_optimal(inst, f.optimal);
      inst.meta.notes["vertex_permutation"] = perm;
      break;
    }
  }
  return inst;
}

BapInstance gen_random_slater(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1 || m > tri(n)) fail(ErrorCode::InvalidArgument, "random slater: need 1 <= m <= t(n)");
  RandomStream rs(seed, "random-slater", static_cast<std::uint64_t>(n * 100003 + m));
  std::vector<Matrix> mats;
  for (Index i = 0; i < m; ++i) mats.push_back(rs.symmetric(n));
  const Matrix g = rs.normal_matrix(n, n);
  const SymMatrix xhat = SymMatrix::symmetrize(g * g.transpose() + Matrix::Identity(n, n));
  LinearMap map = LinearMap::from_matrices(n, mats);
  Vector b = map.apply(xhat);
  BapInstance inst{std::move(map), std::move(b), SymMatrix::symmetrize(rs.symmetric(n)), {}};
  inst.meta.family = to_string(Family::RandomSlater);
  inst.meta.seed = seed;
  inst.meta.params = {{"n", n}, {"m", m}};
  inst.meta.feasible_point = xhat;
  return make_surjective(inst);
}

BapInstance gen_planted_noslater(Index n, Index m, int sd, int iips, int support, std::uint64_t seed) {
  std::ostringstream why;
  if (sd < 1) why << "sd_target must be at least 1; ";
  if (support < 1) why << "support_size must be at least 1; ";
  if (iips < sd) why << "iips_target must be at least sd_target (each step removes one row); ";
  const Index p = std::max<Index>(1, n / (4 * std::max(sd, 1)));
  const Index r = n - sd * p;
  const Index extras = iips - sd;
  if (r < 1) why << "n too small for " << sd << " reduction steps; ";
  if (static_cast<Index>(sd) * support + extras > m) why << "sd*support + (iips - sd) exceeds m; ";
  if (extras > 0 && m - extras < 1) why << "no rows left to combine into redundant rows; ";
  if (r >= 1 && m - iips > tri(r)) why << "m - iips exceeds t(r) so the reduced map cannot be surjective; ";
  if (std::string w = why.str(); !w.empty())
    fail(ErrorCode::InvalidArgument, "planted no-slater: " + w.substr(0, w.size() - 2));

  RandomStream rs(seed, "planted-noslater", static_cast<std::uint64_t>(n * 1000003 + m * 1009 + sd * 101 + iips * 11 + support));
  const Matrix q = rs.orthonormal(n, n);
  std::vector<Matrix> blocks;
  for (int j = 0; j < sd; ++j) blocks.push_back(q.middleCols(j * p, p));
  const Matrix v0 = q.rightCols(r);

  std::vector<Matrix> mats(static_cast<std::size_t>(m));
  std::vector<bool> set(static_cast<std::size_t>(m), false);
  std::vector<Vector> certs;
  for (int j = 0; j < sd; ++j) {
    const Matrix dg = rs.normal_matrix(p, p);
    const Matrix d = dg * dg.transpose() + Matrix::Identity(p, p);
    Matrix zj = blocks[j] * d * blocks[j].transpose();
    if (j > 0) {
      const Matrix c = rs.normal_matrix(r, p);
      zj += v0 * c * blocks[j - 1].transpose() + blocks[j - 1] * c.transpose() * v0.transpose();
    }
    Vector lam = Vector::Zero(m);
    const Index first = static_cast<Index>(j) * support;
    for (Index k = 0; k < support; ++k) {
      double v = rs.normal();
      while (std::abs(v) < 0.1) v = rs.normal();
      lam(first + k) = v;
    }
    Matrix rest = Matrix::Zero(n, n);
    for (Index k = 1; k < support; ++k) {
      mats[first + k] = rs.symmetric(n);
      set[first + k] = true;
      rest += lam(first + k) * mats[first + k];
    }
    mats[first] = (zj - rest) / lam(first);
    set[first] = true;
    certs.push_back(lam / lam.norm());
  }
  const Index base = m - extras;
  for (Index i = 0; i < base; ++i)
    if (!set[i]) mats[i] = rs.symmetric(n);
  for (Index e = 0; e < extras; ++e) {
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < base; ++i) a += rs.normal() * mats[i];
    const Matrix g = rs.normal_matrix(r, p);
    a += v0 * g * blocks.back().transpose() + blocks.back() * g.transpose() * v0.transpose();
    mats[base + e] = a;
  }
  for (auto& a : mats) a = 0.5 * (a + a.transpose());

  const Matrix gr = rs.normal_matrix(r, r);
  const SymMatrix xhat = SymMatrix::symmetrize(v0 * (gr * gr.transpose() + Matrix::Identity(r, r)) * v0.transpose());
  LinearMap map = LinearMap::from_matrices(n, mats);
  Vector b = map.apply(xhat);
  BapInstance inst{std::move(map), std::move(b), SymMatrix::symmetrize(rs.symmetric(n)), {}};
  inst.meta.family = to_string(Family::PlantedNoSlater);
  inst.meta.seed = seed;
  inst.meta.params = {{"n", n}, {"m", m}, {"sd", sd}, {"iips", iips}, {"support", support}, {"block", p}};
  inst.meta.feasible_point = xhat;
  inst.meta.certificates = certs;
  inst.meta.face_basis = v0;
  return inst;
}

BapInstance gen_dual_unattained(Index n, std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "dual unattained: n must be at least 2");
  if (n == 2) {
    BapInstance inst = fixture_paper_dual_fail();
    inst.meta.family = to_string(Family::DualUnattained);
    inst.meta.seed = seed;
    inst.meta.params = {{"n", n}, {"canonical", true}};
    return inst;
  }
  RandomStream rs(seed, "dual-unattained", static_cast<std::uint64_t>(n));
  const Index k = std::max<Index>(1, n / 3);
  const Matrix q = rs.orthonormal(n, n);
  const Matrix P = q.leftCols(k);
  const Matrix Pb = q.rightCols(n - k);
  const Index nb = n - k;
  const Index r1 = std::max<Index>(1, nb / 2);
  const Index r2 = nb - r1;

  std::vector<Matrix> mats;
  for (Index a = 0; a < k; ++a)
    for (Index b = a; b < k; ++b) {
      Matrix e = sym_unit(k, a, b);
      if (a != b) e *= 2.0;
      mats.push_back(P * e * P.transpose());
    }
  // R on the first r1 directions of Pb, N on the rest (singular when r2 > 0).
  Matrix R = Matrix::Zero(nb, nb);
  const Matrix g1 = rs.normal_matrix(r1, r1);
  R.topLeftCorner(r1, r1) = g1 * g1.transpose() + Matrix::Identity(r1, r1);
  Matrix N = Matrix::Zero(nb, nb);
  if (r2 > 1) {
    const Matrix g2 = rs.normal_matrix(r2, r2 - 1);
    N.bottomRightCorner(r2, r2) = g2 * g2.transpose();
  }
  const Matrix C = rs.normal_matrix(k, nb);
  const Matrix s0 = rs.symmetric(k);
  const SymMatrix xbar = SymMatrix::symmetrize(Pb * R * Pb.transpose());
  const Matrix cross = P * C * Pb.transpose();
  const Matrix w = xbar.dense() - (cross + cross.transpose() + Pb * N * Pb.transpose()) + P * s0 * P.transpose();

  LinearMap map = LinearMap::from_matrices(n, mats);
  // A(xbar) vanishes exactly in exact arithmetic.
  Vector b = Vector::Zero(map.m());
  BapInstance inst{std::move(map), std::move(b), SymMatrix::symmetrize(w), {}};
  inst.meta.family = to_string(Family::DualUnattained);
  inst.meta.seed = seed;
  inst.meta.params = {{"n", n}, {"face_dim", k}};
  inst.meta.feasible_point = xbar;
  inst.meta.face_basis = Pb;
  const SymMatrix d = xbar - inst.W;
  inst.meta.optimal_value = 0.5 * d.inner(d);
  inst.meta.notes["dual_unattained_expected"] = true;
  inst.meta.notes["primal_optimum"] = vector_json(xbar.svec());
  return inst;
}

BapInstance fixture_paper_sd2() {
  Matrix a1 = Matrix::Zero(3, 3), a2 = Matrix::Zero(3, 3), a3 = Matrix::Zero(3, 3);
  a1(0, 0) = 1.0;
  a2(0, 2) = a2(2, 0) = 1.0;
  a2(1, 1) = 1.0;
  a3(2, 2) = 1.0;
  const std::vector<Matrix> mats{a1, a2, a3};
  Matrix w(3, 3);
  w << 0, 0, 0, 0, -1, -1, 0, -1, 0;
  BapInstance inst{LinearMap::from_matrices(3, mats), Vector::Unit(3, 0), SymMatrix::from_dense(w), {}};
  inst.meta.family = to_string(Family::PaperSd2);
  inst.meta.params = {{"sd", 2}};
  const SymMatrix xbar = SymMatrix::outer(Vector::Unit(3, 0));
  Matrix z(3, 3);
  z << 0, 0, 0, 0, 1, 1, 0, 1, 2;
  Vector y(3);
  y << 1, 0, -2;
  inst.meta.feasible_point = xbar;
  record_optimal(inst, {xbar, y, SymMatrix::from_dense(z)});
  inst.meta.certificates = {Vector::Unit(3, 2), Vector::Unit(3, 1)};
  inst.meta.face_basis = Matrix(Vector::Unit(3, 0));
  return inst;
}

BapInstance fixture_paper_dual_fail() {
  Matrix a1 = Matrix::Zero(2, 2);
  a1(0, 0) = 1.0;
  const std::vector<Matrix> mats{a1};
  Matrix w(2, 2);
  w << 0, -1, -1, 0;
  BapInstance inst{LinearMap::from_matrices(2, mats), Vector::Zero(1), SymMatrix::from_dense(w), {}};
  inst.meta.family = to_string(Family::PaperDualFail);
  inst.meta.feasible_point = SymMatrix::zero(2);
  inst.meta.optimal_value = 1.0;
  inst.meta.certificates = {Vector::Unit(1, 0)};
  inst.meta.face_basis = Matrix(Vector::Unit(2, 1));
  inst.meta.notes["dual_unattained_expected"] = true;
  inst.meta.notes["primal_optimum"] = std::vector<double>(3, 0.0);
  return inst;
}

}  // namespace spectra
