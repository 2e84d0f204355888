#include "spectra/core/facialred.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spectra/core/errors.hpp"
#include "spectra/core/rng.hpp"

namespace spectra {

bool AuxCertificate::valid(const Vector& b) const {
  return cone_violation <= 1e-9 && b_residual <= 1e-9 * (1.0 + b.norm()) && z_norm >= 1e-8;
}

StallCandidate certificate_from_stall(const NewtonTrace& trace, const BapInstance& inst) {
  if (trace.status == NewtonStatus::Solved)
    fail(ErrorCode::NoStall, "no stall to analyze: the solve terminated as Solved");
  const Matrix& J = trace.terminal_jacobian;
  if (J.rows() != inst.m() || J.rows() == 0)
    fail(ErrorCode::DimensionMismatch, "certificate_from_stall: trace does not match the instance");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (J + J.transpose()));
  StallCandidate out;
  out.lam = solver.eigenvectors().col(0);
  out.eigenvalue = solver.eigenvalues()(0);
  Index lead = 0;
  out.lam.cwiseAbs().maxCoeff(&lead);
  if (out.lam(lead) < 0) out.lam = -out.lam;
  const double cut = 1e-3 * out.lam.cwiseAbs().maxCoeff();
  for (Index i = 0; i < out.lam.size(); ++i)
    if (std::abs(out.lam(i)) > cut) out.suspect.push_back(i);
  return out;
}

namespace {

struct AuxEval {
  Vector r;
  SymMatrix Z;
  SpectralDecomp eig;
};

// Map restricted to a subset of rows, with the matching slice of b.
struct AuxProblem {
  LinearMap map;
  Vector b;
  std::vector<Index> support;  // positions in the full instance
};

AuxEval aux_residual(const AuxProblem& p, const Vector& lam, double zero_tol) {
  AuxEval ev;
  ev.Z = p.map.adjoint(lam);
  ev.eig = eig_sym(ev.Z, zero_tol);
  const SymMatrix neg = ev.Z - project_psd(ev.Z, ev.eig).X;
  const Index t = tri(p.map.n());
  ev.r.resize(t + 1);
  ev.r.head(t) = neg.svec();
  ev.r(t) = p.b.dot(lam);
  return ev;
}

// Jacobian of r with respect to lam, from the cached decomposition of Z.
Matrix aux_jacobian(const AuxProblem& p, const AuxEval& ev) {
  const Index m = p.map.m();
  const Index t = tri(p.map.n());
  const Matrix w = Matrix::Ones(ev.eig.order(), ev.eig.order()) - jacobian_weights(ev.eig);
  Matrix jac(t + 1, m);
  for (Index j = 0; j < m; ++j) {
    const Matrix tj = ev.eig.U.transpose() * p.map.constraint(j) * ev.eig.U;
    const Matrix d = ev.eig.U * w.cwiseProduct(tj) * ev.eig.U.transpose();
    jac.col(j).head(t) = svec(0.5 * (d + d.transpose()));
    jac(t, j) = p.b(j);
  }
  return jac;
}

struct GnOutcome {
  Vector lam;  // in the support coordinates, normalized <a, lam> = 1
  double residual = 0.0;
};

GnOutcome gauss_newton(const AuxProblem& p, const Vector& a, Vector lam, const AuxOptions& opts) {
  const Index m = p.map.m();
  // Basis of the null space of a^T.
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix full_q = qr.householderQ() * Matrix::Identity(m, m);
  const Matrix nb = full_q.rightCols(m - 1);

  AuxEval ev = aux_residual(p, lam, opts.zero_tol);
  double f = ev.r.squaredNorm();
  for (int it = 0; it < opts.max_iter && f > 1e-30; ++it) {
    const Matrix jn = aux_jacobian(p, ev) * nb;
    const double mu = 1e-12 * std::max(1.0, jn.squaredNorm() / std::max<Index>(1, jn.cols()));
    Matrix h = jn.transpose() * jn;
    h.diagonal().array() += mu;
    const Vector g = jn.transpose() * ev.r;
    Eigen::LDLT<Matrix> ldlt(h);
    Vector dc = -ldlt.solve(g);
    if (!dc.allFinite()) break;
    const Vector dl = nb * dc;
    double step = 1.0;
    bool moved = false;
    while (step > 1e-10) {
      const Vector trial = lam + step * dl;
      AuxEval tv = aux_residual(p, trial, opts.zero_tol);
      const double ft = tv.r.squaredNorm();
      if (ft < f) {
        const double rel = (f - ft) / f;
        lam = trial;
        ev = std::move(tv);
        f = ft;
        moved = rel > 1e-12;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {lam, std::sqrt(f)};
}

// sqrt of the squared spectrum of A^* lam below its dominant group plus
// <b, lam>^2; zero exactly for a certificate exposing a face of rank n - p.
double tail_residual(const BapInstance& inst, const Vector& lam, Index* p_out) {
  const auto eig = eig_sym(inst.map.adjoint(lam));
  const double top = eig.lam(0);
  Index p = 0;
  while (p < eig.order() && eig.lam(p) > 1e-6 * top) ++p;
  if (p_out) *p_out = p;
  const double bl = inst.b.dot(lam);
  return std::sqrt(eig.lam.tail(eig.order() - p).squaredNorm() + bl * bl) / lam.norm();
}

// The GN residual is quadratic in the distance to the cone, so lam is only
// accurate to about sqrt(residual). Sharpen it by asking A^* lam to vanish
// outside the range of its dominant eigenvectors, which is linear in lam.
Vector refine_certificate(const BapInstance& inst, Vector lam, double zero_tol) {
  const Index n = inst.n();
  const Index m = inst.m();
  Index p = 0;
  double res = tail_residual(inst, lam, &p);
  for (int it = 0; it < 200 && res > 1e-15; ++it) {
    const auto eig = eig_sym(inst.map.adjoint(lam), zero_tol);
    if (!(eig.lam(0) > 0) || p == 0 || p == n) break;
    const Index r = n - p;
    const Matrix up = eig.U.leftCols(p);
    const Matrix q = eig.U.rightCols(r);
    Matrix k(tri(r) + r * p + 1, m);
    for (Index i = 0; i < m; ++i) {
      const Matrix ai = inst.map.constraint(i);
      const Matrix qq = q.transpose() * ai * q;
      const Matrix qu = q.transpose() * ai * up;
      k.col(i).head(tri(r)) = svec(0.5 * (qq + qq.transpose()));
      k.col(i).segment(tri(r), r * p) = std::sqrt(2.0) * Eigen::Map<const Vector>(qu.data(), r * p);
      k(tri(r) + r * p, i) = inst.b(i);
    }
    Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double kl = (k * lam).norm() / lam.norm();
    const double cut = std::max(10.0 * kl, 1e-13 * (sv.size() ? sv(0) : 1.0));
    Index keep = m - sv.size();
    for (Index i = 0; i < sv.size(); ++i)
      if (sv(i) <= cut) ++keep;
    if (keep == 0 || keep == m) break;
    const Matrix nb = svd.matrixV().rightCols(keep);
    Vector trial = nb * (nb.transpose() * lam);
    if (!(trial.norm() > 0)) break;
    trial /= trial.norm();
    Index pt = 0;
    const double tr = tail_residual(inst, trial, &pt);
    if (!(tr < 0.95 * res)) break;
    lam = trial;
    res = tr;
    p = pt;
  }
  return lam;
}

std::optional<AuxCertificate> finalize(const BapInstance& inst, const AuxProblem& p, const Vector& lam_s,
                                       int start, const AuxOptions& opts) {
  Vector lam = Vector::Zero(inst.m());
  for (std::size_t k = 0; k < p.support.size(); ++k) lam(p.support[k]) = lam_s(static_cast<Index>(k));
  const double nl = lam.norm();
  if (!(nl > 0) || !lam.allFinite()) return std::nullopt;
  lam /= nl;
  lam = refine_certificate(inst, lam, opts.zero_tol);
  AuxCertificate c;
  c.lam = lam;
  c.Z = inst.map.adjoint(lam);
  const auto eig = eig_sym(c.Z, opts.zero_tol);
  const SymMatrix neg = c.Z - project_psd(c.Z, eig).X;
  c.b_residual = std::abs(inst.b.dot(lam));
  c.residual = std::sqrt(neg.inner(neg) + c.b_residual * c.b_residual);
  c.cone_violation = std::max(0.0, -eig.lam(eig.order() - 1));
  c.z_norm = c.Z.norm();
  c.start_index = start;
  if (c.residual <= opts.tol && c.z_norm >= opts.z_floor) return c;
  return std::nullopt;
}

AuxProblem restrict_problem(const BapInstance& inst, std::vector<Index> support) {
  Vector b(static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) b(static_cast<Index>(k)) = inst.b(support[k]);
  return {inst.map.select(support), b, std::move(support)};
}

// Moves lam onto the slice <a, lam> = 1.
Vector onto_slice(const Vector& a, const Vector& lam) {
  return lam - (a.dot(lam) - 1.0) / a.squaredNorm() * a;
}

}  // namespace

std::optional<AuxCertificate> solve_aux_gauss_newton(const BapInstance& inst,
                                                     const std::optional<StallCandidate>& start,
                                                     const AuxOptions& opts) {
  inst.validate();
  const Index m = inst.m();
  const Index n = inst.n();
  if (m == 0 || n == 0) return std::nullopt;

  std::vector<Index> all(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
  const AuxProblem full = restrict_problem(inst, all);
  const Vector a_full = full.map.apply(SymMatrix::identity(n));
  const double a_scale = full.map.rows().norm();
  if (a_full.norm() <= 1e-12 * std::max(1.0, a_scale)) return std::nullopt;

  std::optional<AuxCertificate> best;
  auto consider = [&](const AuxProblem& p, const Vector& a, const Vector& init, int idx) -> bool {
    if (p.map.m() == 0 || a.norm() <= 1e-12 * std::max(1.0, a_scale)) return false;
    Vector lam0 = p.map.m() == 1 ? Vector(a / a.squaredNorm()) : onto_slice(a, init);
    GnOutcome out = p.map.m() == 1 ? GnOutcome{lam0, 0.0} : gauss_newton(p, a, lam0, opts);
    auto c = finalize(inst, p, out.lam, idx, opts);
    if (c && (!best || c->residual < best->residual)) best = c;
    return c.has_value();
  };

  int idx = 0;
  if (start) {
    const Vector& l0 = start->lam;
    if (l0.size() != m) fail(ErrorCode::DimensionMismatch, "aux: start vector length differs from m");
    if (!start->suspect.empty() && static_cast<Index>(start->suspect.size()) < m) {
      const AuxProblem sub = restrict_problem(inst, start->suspect);
      const Vector a_sub = sub.map.apply(SymMatrix::identity(n));
      Vector init(static_cast<Index>(start->suspect.size()));
      for (std::size_t k = 0; k < start->suspect.size(); ++k) init(static_cast<Index>(k)) = l0(start->suspect[k]);
      for (double sign : {1.0, -1.0})
        if (consider(sub, a_sub, sign * init, idx++)) return best;
    }
    for (double sign : {1.0, -1.0})
      if (consider(full, a_full, sign * l0, idx++)) return best;
  }
  for (int s = 0; s < opts.restarts; ++s) {
    RandomStream rs(opts.seed, "aux-start", static_cast<std::uint64_t>(s));
    if (consider(full, a_full, rs.normal_vector(m), idx++)) return best;
  }
  return best;
}

FrStep fr_step(const BapInstance& inst, const AuxCertificate& cert, double zero_tol) {
  inst.validate();
  if (cert.lam.size() != inst.m()) fail(ErrorCode::DimensionMismatch, "fr_step: certificate length differs from m");
  const SymMatrix Z = inst.map.adjoint(cert.lam);
  const auto eig = eig_sym(Z, zero_tol);
  const Index n = inst.n();
  const Index p = eig.positive_count();
  if (p == n) fail(ErrorCode::FaceIsZero, "face is {0}: the exposing vector is positive definite");
  if (p == 0) fail(ErrorCode::InvalidArgument, "fr_step: certificate has no positive part");
  FaceRange Q(eig.U.rightCols(n - p));

  const Index m = inst.m();
  const Index r = n - p;
  Matrix rows(m, tri(r));
  for (Index i = 0; i < m; ++i) {
    const Matrix qa = Q.V().transpose() * inst.map.constraint(i) * Q.V();
    rows.row(i) = svec(0.5 * (qa + qa.transpose())).transpose();
  }
  auto red = preprocess_surjective(LinearMap(r, std::move(rows)), inst.b);

  FrStep out;
  out.Q = Q;
  out.cert = cert;
  out.rows_removed = static_cast<Index>(red.removed.size());
  out.kept = red.kept;
  out.reduced.map = std::move(red.map);
  out.reduced.b = std::move(red.b);
  out.reduced.W = inst.W.congruence(Q.V());
  InstanceMeta& meta = out.reduced.meta;
  meta.family = inst.meta.family;
  meta.seed = inst.meta.seed;
  meta.params = inst.meta.params;
  if (inst.meta.feasible_point) meta.feasible_point = inst.meta.feasible_point->congruence(Q.V());
  meta.notes["reduced_from_order"] = n;
  return out;
}

Index FaceChain::iips_hat() const {
  Index s = 0;
  for (const auto& st : steps) s += st.rows_removed;
  return s;
}

nlohmann::ordered_json FaceChain::report() const {
  nlohmann::ordered_json j;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& st : steps) {
    nlohmann::ordered_json s;
    s["lam"] = std::vector<double>(st.lam_orig.data(), st.lam_orig.data() + st.lam_orig.size());
    s["rows_removed"] = st.rows_removed;
    s["r_after"] = st.r_after;
    j["steps"].push_back(std::move(s));
  }
  j["sd_hat"] = sd_hat();
  j["iips_hat"] = iips_hat();
  j["slater_after"] = slater_after;
  nlohmann::ordered_json v = nlohmann::ordered_json::array();
  for (Index i = 0; i < V.ambient(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(V.dim()));
    for (Index c = 0; c < V.dim(); ++c) row[static_cast<std::size_t>(c)] = V.V()(i, c);
    v.push_back(row);
  }
  j["V"] = std::move(v);
  return j;
}

FaceChain initial_chain(Index n, Index m) {
  FaceChain c;
  c.V = FaceRange::full(n);
  c.original_m = m;
  c.kept.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) c.kept[static_cast<std::size_t>(i)] = i;
  return c;
}

void extend_chain(FaceChain& chain, const FrStep& step) {
  FaceChainStep s;
  s.lam = step.cert.lam;
  s.lam_orig = Vector::Zero(chain.original_m);
  for (Index i = 0; i < s.lam.size(); ++i) s.lam_orig(chain.kept[static_cast<std::size_t>(i)]) = s.lam(i);
  s.rows_removed = step.rows_removed;
  s.r_after = step.Q.dim();
  chain.steps.push_back(std::move(s));
  chain.V = chain.V.compose(step.Q);
  std::vector<Index> kept;
  kept.reserve(step.kept.size());
  for (Index k : step.kept) kept.push_back(chain.kept[static_cast<std::size_t>(k)]);
  chain.kept = std::move(kept);
}

FrLoopResult fr_loop(const BapInstance& inst, const AuxOptions& opts) {
  inst.validate();
  FrLoopResult out{initial_chain(inst.n(), inst.m()), inst};
  for (Index step = 0; step <= inst.n(); ++step) {
    AuxOptions o = opts;
    o.seed = mix64(opts.seed ^ mix64(inst.meta.seed) ^ static_cast<std::uint64_t>(step));
    auto cert = solve_aux_gauss_newton(out.reduced, std::nullopt, o);
    if (!cert) {
      out.chain.slater_after = true;
      return out;
    }
    FrStep st = fr_step(out.reduced, *cert, opts.zero_tol);
    extend_chain(out.chain, st);
    out.reduced = std::move(st.reduced);
  }
  out.chain.slater_after = false;
  return out;
}

bool check_independence(const FaceChain& chain, double rel_tol) {
  if (chain.steps.empty()) fail(ErrorCode::InvalidArgument, "check_independence: empty chain");
  Matrix L(chain.original_m, static_cast<Index>(chain.steps.size()));
  for (std::size_t k = 0; k < chain.steps.size(); ++k) L.col(static_cast<Index>(k)) = chain.steps[k].lam_orig;
  Eigen::JacobiSVD<Matrix> svd(L);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return false;
  return s(s.size() - 1) > rel_tol * s(0);
}

bool verify_chain_roots(const FaceChain& chain, const BapInstance& inst, const Vector& ybar, double tol) {
  if (chain.steps.empty()) fail(ErrorCode::InvalidArgument, "verify_chain_roots: empty chain");
  if (residual_F_face(inst, ybar, chain.V).norm() > tol) return false;
  for (const auto& st : chain.steps)
    if (residual_F_face(inst, ybar + st.lam_orig, chain.V).norm() > tol) return false;
  return true;
}

}  // namespace spectra
