#include "spectra/core/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "spectra/core/errors.hpp"

namespace spectra {

LinearMap::LinearMap(Index n, Matrix rows) : n_(n), rows_(std::move(rows)) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "linear map: negative order");
  if (rows_.cols() != tri(n)) {
    std::ostringstream os;
    os << "linear map: rows have " << rows_.cols() << " columns, expected t(" << n << ") = " << tri(n);
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

LinearMap LinearMap::from_matrices(Index n, std::span<const Matrix> mats) {
  Matrix rows(static_cast<Index>(mats.size()), tri(n));
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (mats[i].rows() != n || mats[i].cols() != n)
      fail(ErrorCode::DimensionMismatch, "linear map: constraint matrix has wrong order");
    rows.row(static_cast<Index>(i)) = svec(mats[i]).transpose();
  }
  return LinearMap(n, std::move(rows));
}

Vector LinearMap::apply(const SymMatrix& x) const {
  if (x.order() != n_) fail(ErrorCode::DimensionMismatch, "apply: order mismatch");
  return rows_ * x.svec();
}

SymMatrix LinearMap::adjoint(const Vector& y) const {
  if (y.size() != m()) fail(ErrorCode::DimensionMismatch, "adjoint: length mismatch");
  if (m() == 0) return SymMatrix::zero(n_);
  return SymMatrix::from_svec(rows_.transpose() * y);
}

Matrix LinearMap::constraint(Index i) const {
  if (i < 0 || i >= m()) fail(ErrorCode::InvalidArgument, "constraint: index out of range");
  return smat(rows_.row(i).transpose());
}

LinearMap LinearMap::select(std::span<const Index> keep) const {
  Matrix r(static_cast<Index>(keep.size()), rows_.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= m()) fail(ErrorCode::InvalidArgument, "select: index out of range");
    r.row(static_cast<Index>(k)) = rows_.row(keep[k]);
  }
  return LinearMap(n_, std::move(r));
}

void BapInstance::validate() const {
  if (b.size() != map.m()) fail(ErrorCode::DimensionMismatch, "instance: b length differs from m");
  if (W.order() != map.n()) fail(ErrorCode::DimensionMismatch, "instance: W order differs from n");
  if (!b.allFinite() || !W.all_finite() || !map.rows().allFinite())
    fail(ErrorCode::InvalidArgument, "instance: non-finite data");
}

namespace {

// Selects a maximal independent set of rows, preferring lower indices.
std::vector<Index> greedy_independent_rows(const Matrix& rows, Index target_rank, double abs_tol) {
  std::vector<Index> kept;
  Matrix basis(rows.cols(), 0);
  for (Index i = 0; i < rows.rows() && static_cast<Index>(kept.size()) < target_rank; ++i) {
    Vector r = rows.row(i).transpose();
    // Two passes of classical Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass)
      if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
    const double nr = r.norm();
    if (nr > abs_tol) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = r / nr;
      kept.push_back(i);
    }
  }
  return kept;
}

}  // namespace

SurjectiveReduction preprocess_surjective(const LinearMap& map, const Vector& b, double rank_tol,
                                          double consistency_tol) {
  if (b.size() != map.m()) fail(ErrorCode::DimensionMismatch, "preprocess: b length differs from m");
  SurjectiveReduction out;
  const Index m = map.m();
  if (m == 0) {
    out.map = map;
    out.b = b;
    return out;
  }
  const Matrix& rows = map.rows();
  Eigen::JacobiSVD<Matrix> svd(rows);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_tol * smax) ++rank;

  std::vector<Index> kept = greedy_independent_rows(rows, rank, rank_tol * smax);
  if (static_cast<Index>(kept.size()) != rank) {
    // Fall back to pivoted QR on rows^T; first `rank` pivots are independent.
    Eigen::ColPivHouseholderQR<Matrix> qr(rows.transpose());
    kept.clear();
    for (Index k = 0; k < rank; ++k) kept.push_back(qr.colsPermutation().indices()(k));
    std::sort(kept.begin(), kept.end());
  }
  std::vector<bool> is_kept(static_cast<std::size_t>(m), false);
  for (Index k : kept) is_kept[static_cast<std::size_t>(k)] = true;
  for (Index i = 0; i < m; ++i)
    if (!is_kept[static_cast<std::size_t>(i)]) out.removed.push_back(i);

  out.map = map.select(kept);
  out.b.resize(static_cast<Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) out.b(static_cast<Index>(k)) = b(kept[k]);
  out.kept = kept;

  if (!out.removed.empty()) {
    const double bnorm = b.norm();
    std::optional<Eigen::CompleteOrthogonalDecomposition<Matrix>> cod;
    if (!kept.empty()) cod.emplace(out.map.rows().transpose());
    for (Index r : out.removed) {
      const double fit = cod ? cod->solve(rows.row(r).transpose()).dot(out.b) : 0.0;
      const double mismatch = std::abs(b(r) - fit) / (1.0 + bnorm);
      out.max_inconsistency = std::max(out.max_inconsistency, mismatch);
      if (mismatch > consistency_tol) {
        std::ostringstream os;
        os << "infeasible linear manifold: dependent row " << r << " has inconsistent right-hand side (relative mismatch "
           << mismatch << ")";
        fail(ErrorCode::InfeasibleManifold, os.str());
      }
    }
  }
  return out;
}

BapInstance make_surjective(const BapInstance& inst, double rank_tol, double consistency_tol) {
  inst.validate();
  auto red = preprocess_surjective(inst.map, inst.b, rank_tol, consistency_tol);
  BapInstance out{std::move(red.map), std::move(red.b), inst.W, inst.meta};
  if (!red.removed.empty()) {
    out.meta.notes["kept_rows"] = red.kept;
    out.meta.notes["removed_rows"] = red.removed;
  }
  return out;
}

RootEval residual_F(const BapInstance& inst, const Vector& y, double zero_tol) {
  const SymMatrix Y = inst.W + inst.map.adjoint(y);
  auto eig = eig_sym(Y, zero_tol);
  auto split = project_psd(Y, eig);
  Vector F = inst.map.apply(split.X) - inst.b;
  return {std::move(F), std::move(split.X), std::move(split.Zneg), std::move(eig)};
}

Vector residual_F_face(const BapInstance& inst, const Vector& y, const FaceRange& face) {
  const SymMatrix Y = inst.W + inst.map.adjoint(y);
  return inst.map.apply(project_face(Y, face)) - inst.b;
}

double KktResiduals::max() const { return std::max({pf, df_lin, df_cone_X, df_cone_Z, cs}); }

KktResiduals kkt_residuals(const BapInstance& inst, const KktTriple& t) {
  KktResiduals r;
  r.pf = (inst.map.apply(t.X) - inst.b).norm() / (1.0 + inst.b.norm());
  const SymMatrix lin = t.X - inst.W - inst.map.adjoint(t.y) - t.Z;
  r.df_lin = lin.norm() / (1.0 + inst.W.norm());
  r.df_cone_X = std::max(0.0, -lambda_min(t.X));
  r.df_cone_Z = std::max(0.0, -lambda_min(t.Z));
  r.cs = std::abs(t.Z.inner(t.X)) / (1.0 + t.X.norm() * t.Z.norm());
  return r;
}

double dual_objective(const BapInstance& inst, const Vector& y, const SymMatrix& Z, double psd_tol) {
  const double lmin = lambda_min(Z);
  if (lmin < -psd_tol * std::max(1.0, Z.norm())) {
    std::ostringstream os;
    os << "dual objective: Z is indefinite (lambda_min = " << lmin << ")";
    fail(ErrorCode::IndefiniteDual, os.str());
  }
  const SymMatrix s = Z + inst.map.adjoint(y);
  const double quad = s.inner(s);
  return -0.5 * quad + y.dot(inst.b - inst.map.apply(inst.W)) - Z.inner(inst.W);
}

double primal_objective(const BapInstance& inst, const SymMatrix& X) {
  const SymMatrix d = X - inst.W;
  return 0.5 * d.inner(d);
}

}  // namespace spectra
