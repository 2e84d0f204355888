#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "spectra/core/symcore.hpp"

namespace spectra {

/// The constraint map A: S^n -> R^m. Row i of `rows()` is svec(A_i), so
/// A X = rows * svec(X) and A^* y = smat(rows^T y).
class LinearMap {
 public:
  LinearMap() = default;
  LinearMap(Index n, Matrix rows);
  static LinearMap from_matrices(Index n, std::span<const Matrix> mats);

  Index n() const noexcept { return n_; }
  Index m() const noexcept { return rows_.rows(); }
  const Matrix& rows() const noexcept { return rows_; }

  Vector apply(const SymMatrix& x) const;
  SymMatrix adjoint(const Vector& y) const;
  /// Dense A_i.
  Matrix constraint(Index i) const;
  /// Keeps the listed rows, in the given order.
  LinearMap select(std::span<const Index> keep) const;

 private:
  Index n_ = 0;
  Matrix rows_;
};

/// Primal-dual triple (X, y, Z).
struct KktTriple {
  SymMatrix X;
  Vector y;
  SymMatrix Z;
};

/// Provenance and planted truths carried by generated instances.
struct InstanceMeta {
  std::string family;
  std::uint64_t seed = 0;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::optional<SymMatrix> feasible_point;
  /// Certificate chain in original row coordinates (one vector per FR step).
  std::vector<Vector> certificates;
  std::optional<Matrix> face_basis;
  std::optional<KktTriple> optimal;
  std::optional<double> optimal_value;
  nlohmann::ordered_json notes = nlohmann::ordered_json::object();
};

struct BapInstance {
  LinearMap map;
  Vector b;
  SymMatrix W;
  InstanceMeta meta;

  Index n() const noexcept { return map.n(); }
  Index m() const noexcept { return map.m(); }
  /// Throws DimensionMismatch when b or W disagree with the map.
  void validate() const;
};

inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kDefaultConsistencyTol = 1e-9;

struct SurjectiveReduction {
  LinearMap map;
  Vector b;
  std::vector<Index> kept;
  std::vector<Index> removed;
  /// Largest |b_r - c^T b_kept| / (1 + |b|) over removed rows.
  double max_inconsistency = 0.0;
};

/// Removes linearly dependent rows (rank from singular values, rows kept in
/// index order). Throws InfeasibleManifold when a removed row is inconsistent
/// with the kept ones.
SurjectiveReduction preprocess_surjective(const LinearMap& map, const Vector& b,
                                          double rank_tol = kDefaultRankTol,
                                          double consistency_tol = kDefaultConsistencyTol);

/// Instance-level convenience; meta is carried over and the kept rows are
/// recorded under notes["kept_rows"] when anything was removed.
BapInstance make_surjective(const BapInstance& inst, double rank_tol = kDefaultRankTol,
                            double consistency_tol = kDefaultConsistencyTol);

struct RootEval {
  Vector F;
  SymMatrix X;
  SymMatrix Z;  // X - (W + A^* y), PSD by construction
  SpectralDecomp eig;  // of W + A^* y
};

/// F(y) = A P_{S+}(W + A^* y) - b, evaluated from a fresh decomposition.
RootEval residual_F(const BapInstance& inst, const Vector& y, double zero_tol = kDefaultZeroTol);

/// F_f(y) = A P_f(W + A^* y) - b.
Vector residual_F_face(const BapInstance& inst, const Vector& y, const FaceRange& face);

struct KktResiduals {
  double pf = 0.0;
  double df_lin = 0.0;
  double df_cone_X = 0.0;
  double df_cone_Z = 0.0;
  double cs = 0.0;

  double max() const;
};

KktResiduals kkt_residuals(const BapInstance& inst, const KktTriple& t);

/// phi(y,Z) = -1/2 |Z + A^* y|^2 + <y, b - A W> - <Z, W>. Rejects Z with
/// lambda_min(Z) < -psd_tol * max(1, |Z|).
double dual_objective(const BapInstance& inst, const Vector& y, const SymMatrix& Z, double psd_tol = 1e-9);

/// 1/2 |X - W|^2
double primal_objective(const BapInstance& inst, const SymMatrix& X);

}  // namespace spectra
