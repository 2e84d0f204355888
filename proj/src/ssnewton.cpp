#include "spectra/core/ssnewton.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "spectra/core/errors.hpp"

namespace spectra {

Matrix omega_block(const SpectralDecomp& eig) {
  const auto& a = eig.alpha;
  std::vector<Index> neg = eig.beta;
  neg.insert(neg.end(), eig.gamma.begin(), eig.gamma.end());
  Matrix om(static_cast<Index>(a.size()), static_cast<Index>(neg.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double li = eig.lam(a[i]);
    for (std::size_t j = 0; j < neg.size(); ++j) {
      const double lj = std::min(eig.lam(neg[j]), 0.0);
      om(static_cast<Index>(i), static_cast<Index>(j)) = li / (li - lj);
    }
  }
  return om;
}

Matrix b_matrix(const Vector& x) {
  const Index n = x.size();
  for (Index i = 0; i < n; ++i) {
    if (x(i) == 0.0) fail(ErrorCode::InvalidArgument, "b_matrix: zero entry");
    if (i > 0 && x(i) > x(i - 1)) fail(ErrorCode::InvalidArgument, "b_matrix: entries not nonincreasing");
  }
  Matrix b(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const bool pi = x(i) > 0, pj = x(j) > 0;
      if (pi && pj)
        b(i, j) = 1.0;
      else if (!pi && !pj)
        b(i, j) = 0.0;
      else if (pi)
        b(i, j) = x(i) / (x(i) - x(j));
      else
        b(i, j) = x(j) / (x(j) - x(i));
    }
  }
  return b;
}

SymMatrix dir_deriv_proj(const SymMatrix& s, const SymMatrix& h, double zero_tol) {
  if (s.order() != h.order()) fail(ErrorCode::DimensionMismatch, "dir_deriv_proj: order mismatch");
  const auto eig = eig_sym(s, zero_tol);
  const Index n = s.order();
  const Matrix ht = eig.U.transpose() * h.dense() * eig.U;
  Matrix d = Matrix::Zero(n, n);
  for (Index i : eig.alpha) {
    for (Index j : eig.alpha) d(i, j) = ht(i, j);
    for (Index j : eig.beta) {
      d(i, j) = ht(i, j);
      d(j, i) = ht(j, i);
    }
    for (Index j : eig.gamma) {
      const double w = eig.lam(i) / (eig.lam(i) - eig.lam(j));
      d(i, j) = w * ht(i, j);
      d(j, i) = w * ht(j, i);
    }
  }
  if (!eig.beta.empty()) {
    const Index nb = static_cast<Index>(eig.beta.size());
    Matrix hbb(nb, nb);
    for (Index p = 0; p < nb; ++p)
      for (Index q = 0; q < nb; ++q) hbb(p, q) = ht(eig.beta[p], eig.beta[q]);
    const Matrix pb = project_psd(SymMatrix::symmetrize(hbb)).X.dense();
    for (Index p = 0; p < nb; ++p)
      for (Index q = 0; q < nb; ++q) d(eig.beta[p], eig.beta[q]) = pb(p, q);
  }
  return SymMatrix::symmetrize(eig.U * d * eig.U.transpose());
}

Matrix jacobian_weights(const SpectralDecomp& eig) {
  const Index n = eig.order();
  Matrix w = Matrix::Zero(n, n);
  const Index p = eig.positive_count();
  w.topLeftCorner(p, p).setOnes();
  if (p > 0 && p < n) {
    const Matrix om = omega_block(eig);
    w.topRightCorner(p, n - p) = om;
    w.bottomLeftCorner(n - p, p) = om.transpose();
  }
  return w;
}

Vector jacobian_column(const LinearMap& map, const SpectralDecomp& eig, Index j) {
  const Matrix t = eig.U.transpose() * map.constraint(j) * eig.U;
  const Matrix r = eig.U * jacobian_weights(eig).cwiseProduct(t) * eig.U.transpose();
  return map.apply(SymMatrix::symmetrize(r));
}

Matrix jacobian(const LinearMap& map, const SpectralDecomp& eig) {
  const Index m = map.m();
  const Index n = map.n();
  if (m == 0) return Matrix(0, 0);
  const Matrix w = jacobian_weights(eig);
  // Row a of g holds vec(U^T A_a U); J = g diag(vec w) g^T.
  Matrix g(m, n * n);
  for (Index a = 0; a < m; ++a) {
    const Matrix t = eig.U.transpose() * map.constraint(a) * eig.U;
    g.row(a) = Eigen::Map<const Eigen::RowVectorXd>(t.data(), n * n);
  }
  const Eigen::Map<const Vector> wv(w.data(), n * n);
  const Matrix gw = g * wv.asDiagonal();
  Matrix j = gw * g.transpose();
  return 0.5 * (j + j.transpose());
}

Matrix jacobian(const BapInstance& inst, const Vector& y, double zero_tol) {
  const SymMatrix Y = inst.W + inst.map.adjoint(y);
  return jacobian(inst.map, eig_sym(Y, zero_tol));
}

JacobianSpectrum jacobian_spectrum(const Matrix& j) {
  JacobianSpectrum out;
  if (j.rows() == 0) {
    out.eigenvalues = Vector(0);
    out.cond = 1.0;
    return out;
  }
  const Matrix s = 0.5 * (j + j.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  out.eigenvalues = solver.eigenvalues().reverse();
  const double lmax = out.eigenvalues(0);
  const double lmin = out.eigenvalues(out.eigenvalues.size() - 1);
  out.cond = lmax > 0 ? lmax / std::max(lmin, 1e-300) : std::numeric_limits<double>::infinity();
  return out;
}

const char* to_string(NewtonStatus s) noexcept {
  switch (s) {
    case NewtonStatus::Solved: return "Solved";
    case NewtonStatus::SuspectedDegenerate: return "SuspectedDegenerate";
    case NewtonStatus::IterLimit: return "IterLimit";
  }
  return "unknown";
}

void NewtonOptions::validate() const {
  if (!(eps_final >= 0) || cond_budget <= 0 || max_iter < 0 || !(reg_kappa > 0) || !(zero_tol > 0) ||
      !(max_step > 0))
    fail(ErrorCode::InvalidArgument, "newton options: tolerances and limits must be positive");
}

std::string NewtonTrace::to_csv() const {
  std::ostringstream os;
  const Index m = records.empty() ? 0 : records.front().eigJ.size();
  os << "iter,relres,cond";
  for (Index i = 1; i <= m; ++i) os << ",eigJ_" << i;
  os << '\n';
  char buf[64];
  for (const auto& r : records) {
    os << r.k;
    std::snprintf(buf, sizeof buf, ",%.16e", r.relres);
    os << buf;
    std::snprintf(buf, sizeof buf, ",%.16e", r.cond);
    os << buf;
    for (Index i = 0; i < r.eigJ.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.16e", r.eigJ(i));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

double relative_residual(const Vector& F, const Vector& b) {
  return std::min(1.0, F.norm() / (1.0 + b.norm()));
}

namespace {

// s_k + t_k with eps = a 10^-t, cond = c 10^s.
int digits_lost(double relres, double cond) {
  if (!std::isfinite(cond)) return std::numeric_limits<int>::max() / 2;
  const int t = relres > 0 ? -static_cast<int>(std::floor(std::log10(relres))) : 400;
  const int s = static_cast<int>(std::floor(std::log10(std::max(cond, 1.0))));
  return s + t;
}

}  // namespace

NewtonTrace newton_solve(const BapInstance& inst, const NewtonOptions& opts) {
  opts.validate();
  inst.validate();
  const Index m = inst.m();
  NewtonTrace trace;
  trace.options = opts;
  Vector y = opts.y0 ? *opts.y0 : Vector::Zero(m);
  if (y.size() != m) fail(ErrorCode::DimensionMismatch, "newton: y0 length differs from m");

  const auto start = std::chrono::steady_clock::now();
  for (int k = 0;; ++k) {
    RootEval ev = residual_F(inst, y, opts.zero_tol);
    Matrix J = jacobian(inst.map, ev.eig);
    const auto spec = jacobian_spectrum(J);

    NewtonRecord rec;
    rec.k = k;
    rec.y = y;
    rec.relres = relative_residual(ev.F, inst.b);
    rec.cond = spec.cond;
    rec.eigJ = spec.eigenvalues;
    rec.lambda_min_Y = ev.eig.order() ? ev.eig.lam(ev.eig.order() - 1) : 0.0;
    rec.z_norm = ev.Z.norm();
    rec.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    auto finish = [&](NewtonStatus st) {
      trace.records.push_back(std::move(rec));
      trace.status = st;
      trace.terminal = KktTriple{std::move(ev.X), y, std::move(ev.Z)};
      trace.terminal_jacobian = std::move(J);
    };
    if (m == 0 || rec.relres <= opts.eps_final) {
      finish(NewtonStatus::Solved);
      break;
    }
    if (opts.stop_on_cond && digits_lost(rec.relres, rec.cond) > opts.cond_budget) {
      finish(NewtonStatus::SuspectedDegenerate);
      break;
    }
    if (k >= opts.max_iter) {
      finish(NewtonStatus::IterLimit);
      break;
    }

    double reg = std::max(opts.reg_kappa * ev.F.norm(), 1e-14);
    Vector d;
    bool ok = false;
    for (int attempt = 0; attempt < 12 && !ok; ++attempt, reg *= 10.0) {
      Eigen::LLT<Matrix> llt(J + reg * Matrix::Identity(m, m));
      if (llt.info() == Eigen::Success) {
        d = llt.solve(-ev.F);
        ok = d.allFinite();
      }
      if (ok) rec.reg = reg;
    }
    if (!ok) {
      d = Eigen::CompleteOrthogonalDecomposition<Matrix>(J).solve(-ev.F);
      ok = d.allFinite();
    }
    if (!ok) {
      finish(NewtonStatus::IterLimit);
      std::ostringstream os;
      os << "newton: linear solve failed at iteration " << k << " (|F| = " << ev.F.norm() << ")";
      throw SolverFailure(os.str(), std::move(trace));
    }
    const double dn = d.norm();
    if (dn > opts.max_step) d *= opts.max_step / dn;
    trace.records.push_back(std::move(rec));
    y += d;
  }
  return trace;
}

}  // namespace spectra
