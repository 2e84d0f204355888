#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spectra/core/errors.hpp"
#include "spectra/core/model.hpp"

namespace spectra {

/// Omega_ij = lam_i / (lam_i - lam_j) on the alpha x gamma block.
Matrix omega_block(const SpectralDecomp& eig);

/// B(x) for a nonincreasing vector without zeros: 1 on (+,+), 0 on (-,-),
/// x_i / (x_i - x_j) on mixed pairs with x_i > 0.
Matrix b_matrix(const Vector& x);

/// Directional derivative P'_{S+}(S; H), including the P_{S+}(H_bb) term
/// when S has zero eigenvalues.
SymMatrix dir_deriv_proj(const SymMatrix& s, const SymMatrix& h, double zero_tol = kDefaultZeroTol);

/// Per-entry weights in the eigenbasis of Y: 1 on alpha x alpha, Omega on
/// alpha x gamma, 0 elsewhere. Zero eigenvalues are treated as negative.
Matrix jacobian_weights(const SpectralDecomp& eig);

/// Column j of J(y): A(R_Y(T_j)) with T_j = U^T A_j U.
Vector jacobian_column(const LinearMap& map, const SpectralDecomp& eig, Index j);

/// Full m x m Jacobian assembled from one cached decomposition of Y.
Matrix jacobian(const LinearMap& map, const SpectralDecomp& eig);
Matrix jacobian(const BapInstance& inst, const Vector& y, double zero_tol = kDefaultZeroTol);

struct JacobianSpectrum {
  Vector eigenvalues;  // nonincreasing
  double cond = 1.0;
};

/// Eigenvalues of (J + J^T)/2 and lam_max / max(lam_min, 1e-300). A zero
/// (or negative semidefinite) J reports cond = +inf.
JacobianSpectrum jacobian_spectrum(const Matrix& j);

enum class NewtonStatus { Solved, SuspectedDegenerate, IterLimit };
const char* to_string(NewtonStatus s) noexcept;

struct NewtonOptions {
  double eps_final = 1e-13;
  int cond_budget = 16;
  int max_iter = 2000;
  double reg_kappa = 1e-2;
  double zero_tol = kDefaultZeroTol;
  /// When false the s+t budget is ignored and only eps/max_iter stop the run.
  bool stop_on_cond = true;
  double max_step = 1e8;
  std::optional<Vector> y0;

  void validate() const;
};

struct NewtonRecord {
  int k = 0;
  Vector y;
  double relres = 0.0;
  double cond = 1.0;
  Vector eigJ;
  double lambda_min_Y = 0.0;
  double z_norm = 0.0;
  double reg = 0.0;
  double wallclock = 0.0;  // seconds since start
};

struct NewtonTrace {
  std::vector<NewtonRecord> records;
  NewtonStatus status = NewtonStatus::IterLimit;
  KktTriple terminal;
  Matrix terminal_jacobian;
  NewtonOptions options;

  int iterations() const { return records.empty() ? 0 : records.back().k; }
  double relres() const { return records.empty() ? 0.0 : records.back().relres; }
  double cond() const { return records.empty() ? 1.0 : records.back().cond; }
  /// "iter,relres,cond,eigJ_1..eigJ_m", one row per iteration.
  std::string to_csv() const;
};

/// Raised when the regularized linear solve fails beyond recovery; carries
/// the trace up to the failing iteration.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, NewtonTrace trace)
      : Error(ErrorCode::SolverFailure, what), trace_(std::move(trace)) {}
  const NewtonTrace& trace() const noexcept { return trace_; }

 private:
  NewtonTrace trace_;
};

/// Relative residual min(1, |F| / (1 + |b|)).
double relative_residual(const Vector& F, const Vector& b);

NewtonTrace newton_solve(const BapInstance& inst, const NewtonOptions& opts = {});

}  // namespace spectra
