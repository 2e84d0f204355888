#include "spectra/core/symcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spectra/core/errors.hpp"

namespace spectra {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NotSymmetric: return "not symmetric";
    case ErrorCode::NotOrthonormal: return "not orthonormal";
    case ErrorCode::LinearAlgebra: return "linear algebra failure";
    case ErrorCode::InfeasibleManifold: return "infeasible linear manifold";
    case ErrorCode::FaceIsZero: return "face is {0}";
    case ErrorCode::NoStall: return "no stall to analyze";
    case ErrorCode::InfeasiblePoint: return "infeasible point";
    case ErrorCode::IndefiniteDual: return "indefinite dual slack";
    case ErrorCode::SolverFailure: return "solver failure";
    case ErrorCode::Inconclusive: return "inconclusive";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
  }
  return "unknown";
}

Index order_from_svec_length(Index len) noexcept {
  if (len < 0) return -1;
  auto n = static_cast<Index>(std::llround((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0));
  return tri(n) == len ? n : -1;
}

Vector svec(const Matrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "svec: matrix is " << m.rows() << "x" << m.cols() << ", expected square";
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-12 * std::max(1.0, m.norm())) {
    std::ostringstream os;
    os << "svec: asymmetry " << asym << " exceeds tolerance";
    fail(ErrorCode::NotSymmetric, os.str());
  }
  const Index n = m.rows();
  Vector v(tri(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    v(k++) = m(i, i);
    for (Index j = i + 1; j < n; ++j) v(k++) = kSqrt2 * 0.5 * (m(i, j) + m(j, i));
  }
  return v;
}

Matrix smat(const Vector& v) {
  const Index n = order_from_svec_length(v.size());
  if (n < 0) {
    std::ostringstream os;
    os << "smat: length " << v.size() << " is not a triangular number";
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  Matrix m(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    m(i, i) = v(k++);
    for (Index j = i + 1; j < n; ++j) {
      const double x = v(k++) / kSqrt2;
      m(i, j) = x;
      m(j, i) = x;
    }
  }
  return m;
}

SymMatrix SymMatrix::from_dense(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "matrix is " << m.rows() << "x" << m.cols() << ", expected square";
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  const double asym = (m - m.transpose()).norm();
  if (asym > tol * std::max(1.0, m.norm())) {
    std::ostringstream os;
    os << "asymmetry " << asym << " exceeds tolerance " << tol;
    fail(ErrorCode::NotSymmetric, os.str());
  }
  return symmetrize(m);
}

SymMatrix SymMatrix::symmetrize(const Matrix& m) {
  return SymMatrix(Matrix(0.5 * (m + m.transpose())), Trusted{});
}

Vector SymMatrix::svec() const { return spectra::svec(m_); }

double SymMatrix::inner(const SymMatrix& other) const {
  if (other.order() != order()) fail(ErrorCode::DimensionMismatch, "inner: order mismatch");
  return m_.cwiseProduct(other.m_).sum();
}

SymMatrix SymMatrix::congruence(const Matrix& v) const {
  if (v.rows() != order()) fail(ErrorCode::DimensionMismatch, "congruence: row count mismatch");
  return symmetrize(v.transpose() * m_ * v);
}

SymMatrix SymMatrix::lift(const Matrix& v) const {
  if (v.cols() != order()) fail(ErrorCode::DimensionMismatch, "lift: column count mismatch");
  return symmetrize(v * m_ * v.transpose());
}

SpectralDecomp eig_sym(const SymMatrix& s, double zero_tol) {
  const Index n = s.order();
  if (!s.all_finite()) {
    std::ostringstream os;
    os << "eig_sym: non-finite input of order " << n;
    fail(ErrorCode::LinearAlgebra, os.str());
  }
  SpectralDecomp out;
  if (n == 0) {
    out.U = Matrix(0, 0);
    out.lam = Vector(0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.dense());
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_sym: decomposition failed (|S|_F = " << s.norm() << ")";
    fail(ErrorCode::LinearAlgebra, os.str());
  }
  // Eigen returns ascending order; reverse to nonincreasing.
  out.lam = solver.eigenvalues().reverse();
  out.U = solver.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (std::abs(out.U(i, j)) > 1e-12) {
        if (out.U(i, j) < 0) out.U.col(j) *= -1.0;
        break;
      }
    }
  }
  const double scale = std::max({1.0, std::abs(out.lam(0)), std::abs(out.lam(n - 1))});
  out.threshold = zero_tol * scale;
  for (Index i = 0; i < n; ++i) {
    const double l = out.lam(i);
    if (l > out.threshold)
      out.alpha.push_back(i);
    else if (l < -out.threshold)
      out.gamma.push_back(i);
    else
      out.beta.push_back(i);
  }
  return out;
}

MoreauSplit project_psd(const SymMatrix& s) { return project_psd(s, eig_sym(s)); }

MoreauSplit project_psd(const SymMatrix& s, const SpectralDecomp& eig) {
  const Index n = s.order();
  Index p = 0;
  while (p < n && eig.lam(p) > 0.0) ++p;
  Matrix x = Matrix::Zero(n, n);
  if (p > 0) {
    const auto up = eig.U.leftCols(p);
    x = up * eig.lam.head(p).asDiagonal() * up.transpose();
  }
  SymMatrix X = SymMatrix::symmetrize(x);
  SymMatrix Z = X - s;
  return {std::move(X), std::move(Z)};
}

FaceRange::FaceRange(Matrix v, double tol) : v_(std::move(v)) {
  const double err = (v_.transpose() * v_ - Matrix::Identity(v_.cols(), v_.cols())).norm();
  if (!(err <= tol)) {
    std::ostringstream os;
    os << "face range: ||V^T V - I|| = " << err << " exceeds " << tol;
    fail(ErrorCode::NotOrthonormal, os.str());
  }
}

FaceRange FaceRange::compose(const FaceRange& inner) const {
  if (inner.ambient() != dim()) fail(ErrorCode::DimensionMismatch, "face compose: dimension mismatch");
  return FaceRange(v_ * inner.v_, 1e-10);
}

SymMatrix project_face(const SymMatrix& u, const FaceRange& face) {
  if (u.order() != face.ambient()) fail(ErrorCode::DimensionMismatch, "project_face: order mismatch");
  if (face.dim() == 0) return SymMatrix::zero(u.order());
  const SymMatrix reduced = u.congruence(face.V());
  return project_psd(reduced).X.lift(face.V());
}

double moreau_envelope(const SymMatrix& s) {
  if (s.order() == 0) return 0.0;
  const auto eig = eig_sym(s);
  double acc = 0.0;
  for (Index i = 0; i < eig.lam.size(); ++i) {
    const double l = std::max(0.0, eig.lam(i));
    acc += l * l;
  }
  return 0.5 * acc;
}

double lambda_min(const SymMatrix& s) {
  if (s.order() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.dense(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

Index numerical_rank(const SymMatrix& s, double rel_tol) {
  if (s.order() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.dense(), Eigen::EigenvaluesOnly);
  const Vector& l = solver.eigenvalues();
  const double thr = rel_tol * std::max(1.0, l.cwiseAbs().maxCoeff());
  return static_cast<Index>((l.array() > thr).count());
}

}  // namespace spectra
