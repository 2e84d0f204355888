#pragma once

// Symmetric-matrix algebra: isometric vectorization, spectral decomposition,
// projections onto the PSD cone and its faces, and the Moreau envelope.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "spectra/core/errors.hpp"

namespace spectra {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Triangular number t(n) = n(n+1)/2, the length of svec on S^n.
constexpr Index tri(Index n) noexcept { return n * (n + 1) / 2; }

/// Inverse of tri(); returns -1 when len is not triangular.
Index order_from_svec_length(Index len) noexcept;

/// Upper triangle, row-major, off-diagonals scaled by sqrt(2), so that
/// svec(A).dot(svec(B)) == trace(A*B). Rejects non-square or asymmetric input
/// (relative tolerance 1e-12).
Vector svec(const Matrix& m);

/// Inverse of svec.
Matrix smat(const Vector& v);

/// Dense real symmetric matrix. Construction enforces symmetry; the stored
/// dense form is exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Index n) : m_(Matrix::Zero(n, n)) {}

  /// Validates symmetry to `tol` relative to max(1, |m|_F) and symmetrizes.
  static SymMatrix from_dense(const Matrix& m, double tol = 1e-12);
  /// Symmetrizes without validation; for values symmetric by construction.
  static SymMatrix symmetrize(const Matrix& m);
  static SymMatrix from_svec(const Vector& v) { return SymMatrix(smat(v), Trusted{}); }
  static SymMatrix identity(Index n) { return SymMatrix(Matrix::Identity(n, n), Trusted{}); }
  static SymMatrix zero(Index n) { return SymMatrix(n); }
  /// v v^T
  static SymMatrix outer(const Vector& v) { return SymMatrix(v * v.transpose(), Trusted{}); }

  Index order() const noexcept { return m_.rows(); }
  const Matrix& dense() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  Vector svec() const;
  double inner(const SymMatrix& other) const;
  double norm() const { return m_.norm(); }
  bool all_finite() const { return m_.allFinite(); }

  SymMatrix& operator+=(const SymMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    m_ -= o.m_;
    return *this;
  }
  SymMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }

  /// V^T S V for a tall V.
  SymMatrix congruence(const Matrix& v) const;
  /// V S V^T, lifting from the smaller space.
  SymMatrix lift(const Matrix& v) const;

 private:
  struct Trusted {};
  SymMatrix(Matrix m, Trusted) : m_(std::move(m)) {}
  Matrix m_;
};

/// Eigenvalues sorted nonincreasing with the alpha/beta/gamma split under
/// a relative zero threshold.
struct SpectralDecomp {
  Matrix U;
  Vector lam;
  std::vector<Index> alpha;  // lam_i > thr
  std::vector<Index> beta;   // |lam_i| <= thr
  std::vector<Index> gamma;  // lam_i < -thr
  double threshold = 0.0;

  Index order() const noexcept { return lam.size(); }
  /// Eigenvalues strictly above the threshold (leading block of U).
  Index positive_count() const noexcept { return static_cast<Index>(alpha.size()); }
  Matrix reconstruct() const { return U * lam.asDiagonal() * U.transpose(); }
};

inline constexpr double kDefaultZeroTol = 1e-10;

/// Symmetric eigendecomposition. Index i is in beta iff
/// |lam_i| <= zero_tol * max(1, |lam_1|, |lam_n|). Eigenvectors are sign
/// normalized (first component with magnitude > 1e-12 is positive).
SpectralDecomp eig_sym(const SymMatrix& s, double zero_tol = kDefaultZeroTol);

/// Moreau split S = X - Zneg with X = P_{S+}(S), Zneg = X - S.
struct MoreauSplit {
  SymMatrix X;
  SymMatrix Zneg;
};

MoreauSplit project_psd(const SymMatrix& s);
MoreauSplit project_psd(const SymMatrix& s, const SpectralDecomp& eig);

/// Orthonormal-column matrix describing the face V S_+^r V^T.
class FaceRange {
 public:
  FaceRange() = default;
  /// Rejects when ||V^T V - I|| > tol (reports the measured value).
  explicit FaceRange(Matrix v, double tol = 1e-12);
  static FaceRange full(Index n) { return FaceRange(Matrix::Identity(n, n)); }

  const Matrix& V() const noexcept { return v_; }
  Index ambient() const noexcept { return v_.rows(); }
  Index dim() const noexcept { return v_.cols(); }
  /// Face composition: range of this * inner.
  FaceRange compose(const FaceRange& inner) const;
  /// Orthogonal projector V V^T.
  Matrix projector() const { return v_ * v_.transpose(); }

 private:
  Matrix v_;
};

/// V P_{S+^r}(V^T u V) V^T
SymMatrix project_face(const SymMatrix& u, const FaceRange& face);

/// 1/2 sum max(0, lam_i)^2 = 1/2 ||P_{S+}(S)||^2. Its gradient is P_{S+}(S).
double moreau_envelope(const SymMatrix& s);

/// Smallest eigenvalue; 0 for an empty matrix.
double lambda_min(const SymMatrix& s);

/// Number of eigenvalues above rel_tol * max(1, |lam|_max).
Index numerical_rank(const SymMatrix& s, double rel_tol);

}  // namespace spectra
