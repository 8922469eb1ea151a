#pragma once

#include "bdbc/estimators.hpp"
#include "bdbc/mixture.hpp"
#include "bdbc/simgen.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdbc {

enum class ScenarioName { sigmaA, sigmaB, mape_pos, mape_neg, grid_cell, scenario1, scenario2 };

std::string_view scenario_name(ScenarioName s);
ScenarioName parse_scenario(std::string_view name);

/// One simulation design. `p` and `k` are fixed by the named design except
/// for grid_cell, where both are required and k must divide p.
struct ScenarioSpec {
  ScenarioName name = ScenarioName::sigmaA;
  int n_per_component = 100;
  std::uint64_t seed = 1;
  int p = 0;
  int k = 0;
  double noise_weight = 0.5;

  bool is_mixture() const {
    return name == ScenarioName::scenario1 || name == ScenarioName::scenario2;
  }
};

/// Fills the design's fixed p and k, then checks consistency. Throws
/// InputError on a mismatch.
ScenarioSpec resolved(ScenarioSpec spec);

/// Data of one replicate together with its generating truth.
struct ScenarioData {
  DataMatrix data;
  Labels row_labels;                   // generating component (mixture designs)
  Matrix cov;                          // true covariance (estimator designs)
  std::vector<ColumnGrouping> groupings; // one per generating component
  std::uint64_t seed = 0;
};

/// Replicate r of `spec`, drawn from derive_seed(spec.seed, {r}).
ScenarioData generate_scenario_data(const ScenarioSpec& spec, int replicate);

struct ExperimentOptions {
  std::vector<Method> methods{Method::hierarchical};
  int replicates = 100;
  int threads = 1;
  EstimatorOptions estimator;
  /// Estimator experiments: choose K by silhouette instead of the true K.
  bool k_auto = false;
  std::optional<std::pair<int, int>> k_range; // default_k_range(p) when empty
  /// Mixture experiments.
  std::vector<int> g_range{1, 2, 3, 4, 5};
  int model_k = 3;
  int starts = 1;
  int em_max_iter = 500;
  double em_tol = 1e-4;
  int kmeans_restarts = 10;
};

/// Throws InputError on any out-of-range option.
void validate(const ExperimentOptions& opts);

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t seed = 0;
  Method method = Method::hierarchical;
  bool success = false;
  bool failed = false;
  std::string error;
  double wall_time = 0.0;
  int k_used = 0;
  std::vector<int> assignment; // estimated column grouping (estimator runs)
  double mape = 0.0;           // projected estimate vs truth
  double mape_mle = 0.0;       // raw S vs truth
  int selected_g = 0;          // mixture runs
  double ari = 0.0;            // mixture runs, rows vs generating labels
};

struct MethodSummary {
  Method method = Method::hierarchical;
  int replicates = 0;
  int successes = 0;
  int failures = 0;
  double accuracy = 0.0; // successes / replicates
  double mean_time = 0.0;
  double sd_time = 0.0;
  double median_time = 0.0;
  double mean_mape = 0.0;
  double mean_mape_mle = 0.0;
  double mean_selected_g = 0.0;
  double sd_selected_g = 0.0;
  double mean_ari = 0.0;
};

struct ExperimentResult {
  ScenarioSpec spec;
  std::vector<ReplicateRecord> records; // replicate-major, then method order
  std::vector<MethodSummary> summaries;
};

/// Runs `replicates` independent replicates of `spec` for every method. All
/// methods see the data of generate_scenario_data(spec, r). Failures are
/// recorded per replicate.
ExperimentResult run_replicates(const ScenarioSpec& spec, const ExperimentOptions& opts);

std::vector<MethodSummary> summarize(const std::vector<ReplicateRecord>& records,
                                     const std::vector<Method>& methods);

} // namespace bdbc
