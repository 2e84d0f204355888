#pragma once

#include <optional>
#include <vector>

#include "spectra/core/ssnewton.hpp"

namespace spectra {

/// Solution of the auxiliary system 0 != Z = A^* lam >= 0, <b, lam> = 0.
struct AuxCertificate {
  Vector lam;  // unit norm
  SymMatrix Z;
  double cone_violation = 0.0;  // max(0, -lambda_min(Z))
  double b_residual = 0.0;      // |<b, lam>|
  double z_norm = 0.0;
  double residual = 0.0;        // |r(lam)| at the unit lam
  int start_index = -1;

  /// Checks the certificate invariants against the instance it came from.
  bool valid(const Vector& b) const;
};

struct StallCandidate {
  Vector lam;                 // unit eigenvector of sym(J) at its smallest eigenvalue
  double eigenvalue = 0.0;
  std::vector<Index> suspect;  // |lam_i| > 1e-3 |lam|_inf
};

/// Throws NoStall when the trace ended Solved.
StallCandidate certificate_from_stall(const NewtonTrace& trace, const BapInstance& inst);

struct AuxOptions {
  int restarts = 20;
  int max_iter = 200;
  double tol = 1e-9;
  double z_floor = 1e-8;
  std::uint64_t seed = 0;
  double zero_tol = kDefaultZeroTol;
};

/// Gauss-Newton on r(lam) = [svec(A^* lam - P_{S+}(A^* lam)); <b, lam>] over the
/// affine slice <A(I), lam> = 1, from `lam0` (if given) and seeded restarts.
/// Returns nullopt when no start reaches the tolerance.
std::optional<AuxCertificate> solve_aux_gauss_newton(const BapInstance& inst,
                                                     const std::optional<StallCandidate>& start = std::nullopt,
                                                     const AuxOptions& opts = {});

struct FrStep {
  BapInstance reduced;
  FaceRange Q;
  AuxCertificate cert;
  Index rows_removed = 0;
  /// For each row of `reduced`, its row index in the instance passed to fr_step.
  std::vector<Index> kept;
};

/// One facial reduction step. Throws FaceIsZero when P_{S+}(Z) has full rank.
FrStep fr_step(const BapInstance& inst, const AuxCertificate& cert, double zero_tol = kDefaultZeroTol);

struct FaceChainStep {
  Vector lam;       // certificate in the coordinates of the step's input instance
  Vector lam_orig;  // zero-padded into the original constraint coordinates
  Index rows_removed = 0;
  Index r_after = 0;
};

struct FaceChain {
  FaceRange V;
  std::vector<FaceChainStep> steps;
  /// Original row index of each row of the final reduced instance.
  std::vector<Index> kept;
  Index original_m = 0;
  bool slater_after = true;

  int sd_hat() const { return static_cast<int>(steps.size()); }
  Index iips_hat() const;
  nlohmann::ordered_json report() const;
};

struct FrLoopResult {
  FaceChain chain;
  BapInstance reduced;
};

/// Alternates auxiliary solves and FR steps until no certificate is found.
FrLoopResult fr_loop(const BapInstance& inst, const AuxOptions& opts = {});

/// Empty chain is rejected.
bool check_independence(const FaceChain& chain, double rel_tol = 1e-8);

/// For a known root ybar of F_f (face = chain.V), checks that every ybar + lam^i
/// is again a root to `tol`.
bool verify_chain_roots(const FaceChain& chain, const BapInstance& inst, const Vector& ybar, double tol = 1e-9);

/// Seeds the chain bookkeeping for an instance with m rows and order n.
FaceChain initial_chain(Index n, Index m);
/// Appends a completed step to the chain.
void extend_chain(FaceChain& chain, const FrStep& step);

}  // namespace spectra
