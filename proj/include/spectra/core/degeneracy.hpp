#pragma once

#include <optional>

#include "spectra/core/ssnewton.hpp"

namespace spectra {

inline constexpr double kDegeneracyRankTol = 1e-8;

enum class Verdict { Nondegenerate, Degenerate };
const char* to_string(Verdict v) noexcept;

struct DegeneracyReport {
  Index rank_L = 0;
  Index m = 0;
  Verdict verdict = Verdict::Degenerate;
  Vector sigma_L;  // nonincreasing
  Index rank_X = 0;
  std::optional<Index> rank_Z;
  std::optional<bool> strict_complementarity;
  double margin = 0.0;  // sigma_m / sigma_1 (0 when fewer than m singular values)
  double primal_residual = 0.0;
  std::optional<double> cond_J;

  nlohmann::ordered_json to_json() const;
};

struct LMatrix {
  Matrix L;  // (t(r) + r(n-r)) x m; the zero block is omitted
  Matrix V;
  Matrix Vbar;
  double primal_residual = 0.0;
};

/// Columns [svec(V^T A_i V); sqrt(2) vec(V^T A_i Vbar)] with (V, Vbar) from the
/// spectral split of X. Rejects X with lambda_min < -1e-9 max(1,|X|) or
/// |A X - b| / (1 + |b|) > feas_tol.
LMatrix build_L(const BapInstance& inst, const SymMatrix& X, double feas_tol = 1e-8,
                double rank_tol = kDegeneracyRankTol);

DegeneracyReport is_nondegenerate(const BapInstance& inst, const SymMatrix& X,
                                  const std::optional<SymMatrix>& Z = std::nullopt, double feas_tol = 1e-8,
                                  double rank_tol = kDegeneracyRankTol);

enum class CrossCheck { Agree, Disagree, Inconclusive };
const char* to_string(CrossCheck c) noexcept;

struct CrossCheckResult {
  CrossCheck outcome = CrossCheck::Inconclusive;
  std::optional<DegeneracyReport> report;
  bool jacobian_invertible = false;
  double jacobian_ratio = 0.0;  // sigma_min / sigma_max
  std::string reason;

  nlohmann::ordered_json to_json() const;
};

/// Compares the L-rank verdict at the terminal X with invertibility of the
/// terminal Jacobian. Inconclusive when X is not feasible to `feas_tol` or
/// strict complementarity fails.
CrossCheckResult jacobian_degeneracy_crosscheck(const BapInstance& inst, const NewtonTrace& trace,
                                                double feas_tol = 1e-6, double rank_tol = kDegeneracyRankTol);

}  // namespace spectra
