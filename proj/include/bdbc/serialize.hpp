#pragma once

#include "bdbc/blockstruct.hpp"
#include "bdbc/estimators.hpp"
#include "bdbc/experiment.hpp"
#include "bdbc/ingest.hpp"
#include "bdbc/mixture.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace bdbc {

/// Keys keep insertion order so output is stable.
using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const ColumnGrouping& g);
ColumnGrouping grouping_from_json(const Json& j);
Json to_json(const Matrix& m); // array of rows
Matrix matrix_from_json(const Json& j);

/// Wall-clock fields go under "metadata"; everything else is a pure function
/// of the inputs.
Json to_json(const EstimatorReport& report, const BlockCovariance& projected,
             const std::vector<std::string>& col_names);
Json to_json(const FitReport& report, const std::vector<std::string>& col_names);
Json to_json(const GSelection& selection, const std::vector<std::string>& col_names);
Json to_json(const ExperimentResult& result, const ExperimentOptions& opts);
Json to_json(const HeatmapTable& table);

/// One row per (replicate, method).
void write_records_csv(std::ostream& out, const ExperimentResult& result);
void write_heatmap_csv(std::ostream& out, const HeatmapTable& table);
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header);

struct ExperimentConfig {
  ScenarioSpec spec;
  ExperimentOptions options;
};

/// Reads a simulate config object. Unknown keys and wrongly typed values
/// throw InputError.
ExperimentConfig experiment_config_from_json(const Json& j);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

} // namespace bdbc
