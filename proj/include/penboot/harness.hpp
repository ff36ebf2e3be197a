#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "penboot/bootstrap.hpp"
#include "penboot/dgp.hpp"
#include "penboot/diagnostics.hpp"
#include "penboot/intervals.hpp"

namespace penboot {

// Penalty strength as a function of n. SqrtNLogN suits the folded penalties
// and weighted l1 variants; NPower06 is the growing-lambda regime where the
// lasso keeps selection consistency but loses the oracle limit.
enum class LambdaSchedule { Fixed, SqrtNLogN, NPower06 };

double schedule_lambda(LambdaSchedule schedule, double c, int n);

// Copy of the penalty with its strength (selector strength for the
// post-selection estimator) replaced.
PenaltySpec with_lambda(const PenaltySpec& spec, double lambda);

struct ExperimentConfig {
  DGPSpec dgp;
  PenaltySpec penalty = LassoPenalty{1.0};
  VectorXd contrast;  // single row of D; empty means the first coordinate
  BootstrapMethod method = ResidualMethod{};
  int B = 200;
  int M = 200;
  double level = 0.90;
  IntervalKind interval_kind = IntervalKind::SymmetricResidual;
  std::uint64_t master_seed = 0;
  SolverConfig solver;
  int threads = 1;       // Monte Carlo repetitions in parallel
  int boot_threads = 1;  // bootstrap replicates within one repetition
};

void validate(const ExperimentConfig& config);

struct EstimatorArm {
  std::string label;
  PenaltySpec penalty = LassoPenalty{1.0};
  LambdaSchedule schedule = LambdaSchedule::SqrtNLogN;
  double c = 1.0;
};

struct DeltaStudyConfig {
  DGPSpec dgp;
  VectorXd contrast;
  std::vector<EstimatorArm> arms;
  std::vector<int> n_grid;
  int M = 400;
  std::uint64_t master_seed = 0;
  SolverConfig solver;
  int threads = 1;
};

struct DeltaPoint {
  std::string label;
  EstimatorClass cls = EstimatorClass::I;
  int n = 0;
  double lambda = 0.0;
  double delta = 0.0;
  double oracle_sd = 0.0;
  int failures = 0;
};

struct SummaryReport {
  // coverage experiment
  int used = 0;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double mean_width = 0.0;
  double selection_rate = 0.0;
  double selection_se = 0.0;
  double strong_oracle_rate = 0.0;
  double strong_oracle_se = 0.0;
  int fit_failures = 0;
  int bootstrap_failures = 0;
  // rate study
  std::vector<DeltaPoint> deltas;
  std::optional<double> class1_slope;  // log-log slope of delta against n
  // bookkeeping
  bool valid = true;
  bool irrepresentable_ok = true;
  std::vector<std::string> notes;
  double wall_seconds = 0.0;
};

// M independent repetitions over a fixed design: fit, bootstrap with B
// replicates, invert the interval, and record coverage of the true contrast
// value along with selection and strong-oracle frequencies. Deterministic in
// (config, master_seed) regardless of the thread split.
SummaryReport run_coverage(const ExperimentConfig& config);

// Delta estimates for every (arm, n) pair on the grid, with the penalty
// strength set by each arm's schedule. Reports the log-log slope across n
// for the first class-I arm.
SummaryReport run_delta_study(const DeltaStudyConfig& config);

} // namespace penboot
