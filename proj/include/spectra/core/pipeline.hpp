#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spectra/core/degeneracy.hpp"
#include "spectra/core/facialred.hpp"
#include "spectra/core/io.hpp"

namespace spectra {

struct PipelineOptions {
  NewtonOptions newton;
  AuxOptions aux;
  /// Run the auxiliary-system loop before the first solve instead of waiting
  /// for a stall.
  bool fr_first = false;

  Json to_json() const;
};

struct PipelineRound {
  NewtonTrace trace;
  Index order = 0;  // ambient order of the instance solved in this round
  Index m = 0;
  std::optional<StallCandidate> stall;
  std::optional<AuxCertificate> cert;
  /// Continuation of the previous round without the conditioning stop.
  bool resumed = false;
};

struct PipelineResult {
  std::vector<PipelineRound> rounds;
  FaceChain chain;
  BapInstance reduced;
  Index preprocess_removed = 0;
  NewtonStatus final_status = NewtonStatus::IterLimit;
  /// Solution in original coordinates: X = V R V^T, y zero-padded,
  /// Z = X - W - A^* y.
  KktTriple lifted;
  double primal_value = 0.0;
  KktResiduals kkt_original;
  KktResiduals kkt_reduced;
  std::optional<CrossCheckResult> crosscheck;

  Json report(const BapInstance& original, const PipelineOptions& opts) const;
};

/// Newton first; on a stall, derives a certificate from the stalled Jacobian,
/// polishes it with Gauss-Newton, reduces, and solves again. Stops when a
/// round ends Solved or no certificate is found. FaceIsZero propagates.
PipelineResult run_pipeline(const BapInstance& inst, const PipelineOptions& opts = {});

/// Lifts a reduced-space triple back to the original coordinates.
KktTriple lift_solution(const BapInstance& original, const FaceChain& chain, const std::vector<Index>& kept_rows,
                        const KktTriple& reduced);

struct DiagnoseResult {
  NewtonTrace trace;
  std::optional<DegeneracyReport> degeneracy;
  JacobianSpectrum spectrum;
  std::optional<CrossCheckResult> crosscheck;
  KktResiduals kkt;
  std::string message;
  /// "terminal", "given point", or "recorded optimum" when the terminal
  /// point is infeasible and the generator recorded the solution.
  std::string degeneracy_point = "terminal";

  Json to_json() const;
};

/// Diagnoses X when given, else the terminal point of a Newton solve.
DiagnoseResult diagnose(const BapInstance& inst, const std::optional<SymMatrix>& X = std::nullopt,
                        const NewtonOptions& opts = {});

enum class Suite { SlaterTable, NoSlaterTable, SingularityDemo, EllipVontopeTable };
const char* to_string(Suite s) noexcept;
Suite parse_suite(const std::string& s);

struct ExperimentOptions {
  Suite suite = Suite::SlaterTable;
  std::vector<Index> sizes;  // empty: suite default
  int count = 20;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  NewtonOptions newton;
  Index vontope_n = 4;
  /// Wall-clock columns; off by default so tables are byte-reproducible.
  bool timing = false;

  Json to_json() const;
};

struct ExperimentRow {
  std::string label;
  Index n = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  std::string status;
  int iterations = 0;
  double relres = 0.0;
  double pf = 0.0;
  double df = 0.0;
  double cs = 0.0;
  double cond = 0.0;
  double time = 0.0;
  /// First iteration reaching relres <= 1e-8 (-1 if never).
  int first_1e8 = -1;
  int first_1e13 = -1;
  std::string extra;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::string markdown;
  std::string csv;
  Json summary;
  /// Named trace CSVs (eigenvalue trajectories), for suites that produce them.
  std::vector<std::pair<std::string, std::string>> traces;
};

ExperimentResult run_experiment(const ExperimentOptions& opts);

/// Runs fn(i) for i in [0, count) on a bounded worker pool.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn);

}  // namespace spectra

#include "spectra/core/parallel.inl"
