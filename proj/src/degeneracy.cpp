#include "spectra/core/degeneracy.hpp"

#include <cmath>
#include <sstream>

#include "spectra/core/errors.hpp"

namespace spectra {

const char* to_string(Verdict v) noexcept {
  return v == Verdict::Nondegenerate ? "Nondegenerate" : "Degenerate";
}

const char* to_string(CrossCheck c) noexcept {
  switch (c) {
    case CrossCheck::Agree: return "Agree";
    case CrossCheck::Disagree: return "Disagree";
    case CrossCheck::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

Index rank_above(const Vector& lam, double rel_tol) {
  if (lam.size() == 0) return 0;
  const double thr = rel_tol * std::max(1.0, lam.cwiseAbs().maxCoeff());
  return static_cast<Index>((lam.array() > thr).count());
}

}  // namespace

LMatrix build_L(const BapInstance& inst, const SymMatrix& X, double feas_tol, double rank_tol) {
  inst.validate();
  if (X.order() != inst.n()) fail(ErrorCode::DimensionMismatch, "build_L: X has the wrong order");
  const auto eig = eig_sym(X);
  const double lmin = eig.order() ? eig.lam(eig.order() - 1) : 0.0;
  if (lmin < -1e-9 * std::max(1.0, X.norm())) {
    std::ostringstream os;
    os << "build_L: X is not PSD (lambda_min = " << lmin << ")";
    fail(ErrorCode::InfeasiblePoint, os.str());
  }
  LMatrix out;
  out.primal_residual = (inst.map.apply(X) - inst.b).norm() / (1.0 + inst.b.norm());
  if (out.primal_residual > feas_tol) {
    std::ostringstream os;
    os << "build_L: X violates A X = b (relative residual " << out.primal_residual << ")";
    fail(ErrorCode::InfeasiblePoint, os.str());
  }
  const Index n = inst.n();
  const Index r = rank_above(eig.lam, rank_tol);
  out.V = eig.U.leftCols(r);
  out.Vbar = eig.U.rightCols(n - r);
  const Index m = inst.m();
  out.L.resize(tri(r) + r * (n - r), m);
  for (Index i = 0; i < m; ++i) {
    const Matrix a = inst.map.constraint(i);
    const Matrix top = out.V.transpose() * a * out.V;
    out.L.col(i).head(tri(r)) = svec(0.5 * (top + top.transpose()));
    const Matrix cross = kSqrt2 * (out.V.transpose() * a * out.Vbar);
    out.L.col(i).tail(r * (n - r)) = Eigen::Map<const Vector>(cross.data(), r * (n - r));
  }
  return out;
}

DegeneracyReport is_nondegenerate(const BapInstance& inst, const SymMatrix& X, const std::optional<SymMatrix>& Z,
                                  double feas_tol, double rank_tol) {
  const LMatrix lm = build_L(inst, X, feas_tol, rank_tol);
  DegeneracyReport rep;
  rep.m = inst.m();
  rep.primal_residual = lm.primal_residual;
  rep.rank_X = lm.V.cols();
  if (lm.L.size() > 0) {
    Eigen::JacobiSVD<Matrix> svd(lm.L);
    rep.sigma_L = svd.singularValues();
  } else {
    rep.sigma_L = Vector(0);
  }
  const double s1 = rep.sigma_L.size() ? rep.sigma_L(0) : 0.0;
  for (Index i = 0; i < rep.sigma_L.size(); ++i)
    if (rep.sigma_L(i) > rank_tol * s1) ++rep.rank_L;
  rep.verdict = rep.rank_L == rep.m ? Verdict::Nondegenerate : Verdict::Degenerate;
  if (rep.m > 0 && rep.sigma_L.size() >= rep.m && s1 > 0) rep.margin = rep.sigma_L(rep.m - 1) / s1;
  if (Z) {
    if (Z->order() != inst.n()) fail(ErrorCode::DimensionMismatch, "is_nondegenerate: Z has the wrong order");
    Eigen::SelfAdjointEigenSolver<Matrix> zs(Z->dense(), Eigen::EigenvaluesOnly);
    rep.rank_Z = rank_above(zs.eigenvalues(), rank_tol);
    rep.strict_complementarity = rep.rank_X + *rep.rank_Z == inst.n();
  }
  return rep;
}

CrossCheckResult jacobian_degeneracy_crosscheck(const BapInstance& inst, const NewtonTrace& trace, double feas_tol,
                                                double rank_tol) {
  CrossCheckResult out;
  const Matrix& J = trace.terminal_jacobian;
  if (J.rows() > 0) {
    Eigen::JacobiSVD<Matrix> svd(J);
    const Vector& s = svd.singularValues();
    out.jacobian_ratio = s(0) > 0 ? s(s.size() - 1) / s(0) : 0.0;
  } else {
    out.jacobian_ratio = 1.0;
  }
  out.jacobian_invertible = out.jacobian_ratio > rank_tol;
  try {
    out.report = is_nondegenerate(inst, trace.terminal.X, trace.terminal.Z, feas_tol, rank_tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasiblePoint) throw;
    out.outcome = CrossCheck::Inconclusive;
    out.reason = e.what();
    return out;
  }
  if (!trace.records.empty()) out.report->cond_J = trace.cond();
  if (!out.report->strict_complementarity.value_or(false)) {
    out.outcome = CrossCheck::Inconclusive;
    out.reason = "strict complementarity fails at the terminal pair";
    return out;
  }
  const bool nondeg = out.report->verdict == Verdict::Nondegenerate;
  out.outcome = nondeg == out.jacobian_invertible ? CrossCheck::Agree : CrossCheck::Disagree;
  return out;
}

nlohmann::ordered_json DegeneracyReport::to_json() const {
  nlohmann::ordered_json j;
  j["rank_L"] = rank_L;
  j["m"] = m;
  j["verdict"] = to_string(verdict);
  if (strict_complementarity)
    j["sc"] = *strict_complementarity;
  else
    j["sc"] = nullptr;
  j["sigma_L"] = std::vector<double>(sigma_L.data(), sigma_L.data() + sigma_L.size());
  if (cond_J && std::isfinite(*cond_J))
    j["cond_J"] = *cond_J;
  else
    j["cond_J"] = nullptr;
  j["rank_X"] = rank_X;
  if (rank_Z)
    j["rank_Z"] = *rank_Z;
  else
    j["rank_Z"] = nullptr;
  j["margin"] = margin;
  j["primal_residual"] = primal_residual;
  j["note"] = "zero lower-right block of L omitted; rank is unaffected";
  return j;
}

nlohmann::ordered_json CrossCheckResult::to_json() const {
  nlohmann::ordered_json j;
  j["outcome"] = to_string(outcome);
  j["jacobian_invertible"] = jacobian_invertible;
  j["jacobian_ratio"] = jacobian_ratio;
  if (report) j["degeneracy"] = report->to_json();
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

}  // namespace spectra
