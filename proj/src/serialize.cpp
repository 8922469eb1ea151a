#include "bdbc/serialize.hpp"

#include "bdbc/csv.hpp"
#include "bdbc/error.hpp"

#include <set>

namespace bdbc {

namespace {

Json string_list(const std::vector<std::string>& v) {
  Json a = Json::array();
  for (const auto& s : v) {
    a.push_back(s);
  }
  return a;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

Json block_covariance_json(const BlockCovariance& cov) {
  Json blocks = Json::array();
  for (const auto& b : cov.blocks) {
    blocks.push_back(to_json(b));
  }
  Json j;
  j["grouping"] = to_json(cov.grouping);
  j["blocks"] = std::move(blocks);
  return j;
}

Json members_json(const ColumnGrouping& g, const std::vector<std::string>& names) {
  Json groups = Json::array();
  for (const auto& m : g.members()) {
    Json names_of = Json::array();
    for (int c : m) {
      names_of.push_back(names.empty() ? std::to_string(c) : names[static_cast<std::size_t>(c)]);
    }
    groups.push_back(std::move(names_of));
  }
  return groups;
}

template <class T>
T get_as(const Json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("config key '" + key + "' has the wrong type");
  }
}

} // namespace

Json to_json(const ColumnGrouping& g) {
  Json j;
  j["k"] = g.k();
  j["assignment"] = g.assignment();
  return j;
}

ColumnGrouping grouping_from_json(const Json& j) {
  try {
    return ColumnGrouping(j.at("assignment").get<std::vector<int>>(), j.at("k").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed grouping: ") + e.what());
  }
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    rows.push_back(vector_json(m.row(i).transpose()));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) {
    throw InputError("matrix must be a non-empty array of rows");
  }
  const auto cols = j.front().size();
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw InputError("matrix rows have unequal lengths");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) {
        throw InputError("matrix entries must be numbers");
      }
      m(static_cast<Index>(i), static_cast<Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

Json to_json(const EstimatorReport& report, const BlockCovariance& projected,
             const std::vector<std::string>& col_names) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["method"] = std::string(method_name(report.method));
  j["grouping"] = to_json(report.grouping);
  j["groups"] = members_json(report.grouping, col_names);
  j["objective"] = report.objective;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["empty_groups"] = report.empty_groups;
  j["columns"] = string_list(col_names);
  j["covariance"] = to_json(projected.expanded());
  j["metadata"] = {{"wall_time", report.wall_time}};
  return j;
}

Json to_json(const FitReport& report, const std::vector<std::string>& col_names) {
  Json comps = Json::array();
  for (int c = 0; c < report.model.g(); ++c) {
    Json comp;
    comp["weight"] = report.model.weights[static_cast<std::size_t>(c)];
    comp["mean"] = vector_json(report.model.means.row(c).transpose());
    const auto& cov = report.model.covariances[static_cast<std::size_t>(c)];
    comp["grouping"] = to_json(cov.grouping);
    comp["groups"] = members_json(cov.grouping, col_names);
    comp["blocks"] = block_covariance_json(cov)["blocks"];
    comps.push_back(std::move(comp));
  }
  Json j;
  j["schema"] = kSchemaVersion;
  j["g"] = report.model.g();
  j["k"] = report.k;
  j["method"] = std::string(method_name(report.method));
  j["seed"] = report.seed;
  j["loglik"] = report.loglik();
  j["bic"] = report.bic;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["free_parameters"] = free_parameters(report.model);
  j["columns"] = string_list(col_names);
  j["components"] = std::move(comps);
  j["row_assignment"] = report.row_assignment;
  j["loglik_trace"] = report.loglik_trace;
  j["metadata"] = {{"wall_time", report.wall_time}};
  return j;
}

Json to_json(const GSelection& selection, const std::vector<std::string>& col_names) {
  Json j = to_json(selection.best, col_names);
  Json table = Json::array();
  for (const auto& [g, b] : selection.table) {
    table.push_back({{"g", g}, {"bic", b}});
  }
  Json failures = Json::array();
  for (const auto& [g, msg] : selection.failures) {
    failures.push_back({{"g", g}, {"error", msg}});
  }
  Json meta = j["metadata"];
  j.erase("metadata");
  j["bic_table"] = std::move(table);
  j["failures"] = std::move(failures);
  j["metadata"] = std::move(meta);
  return j;
}

Json to_json(const ExperimentResult& result, const ExperimentOptions& opts) {
  const auto& s = result.spec;
  Json spec;
  spec["scenario"] = std::string(scenario_name(s.name));
  spec["n"] = s.n_per_component;
  spec["seed"] = s.seed;
  spec["p"] = s.p;
  spec["k"] = s.k;
  if (s.name == ScenarioName::grid_cell) {
    spec["noise_weight"] = s.noise_weight;
  }
  Json methods = Json::array();
  Json timing = Json::array();
  for (const auto& m : result.summaries) {
    Json row;
    row["method"] = std::string(method_name(m.method));
    row["replicates"] = m.replicates;
    row["successes"] = m.successes;
    row["failures"] = m.failures;
    row["accuracy"] = m.accuracy;
    if (s.is_mixture()) {
      row["mean_selected_g"] = m.mean_selected_g;
      row["sd_selected_g"] = m.sd_selected_g;
      row["mean_ari"] = m.mean_ari;
    } else {
      row["mean_mape"] = m.mean_mape;
      row["mean_mape_mle"] = m.mean_mape_mle;
    }
    methods.push_back(std::move(row));
    timing.push_back({{"method", std::string(method_name(m.method))},
                      {"mean_time", m.mean_time},
                      {"sd_time", m.sd_time},
                      {"median_time", m.median_time}});
  }
  Json errors = Json::array();
  for (const auto& r : result.records) {
    if (r.failed) {
      errors.push_back({{"replicate", r.replicate},
                        {"method", std::string(method_name(r.method))},
                        {"error", r.error}});
    }
  }
  Json j;
  j["schema"] = kSchemaVersion;
  j["spec"] = std::move(spec);
  j["replicates"] = opts.replicates;
  j["k_auto"] = opts.k_auto;
  if (s.is_mixture()) {
    j["g_range"] = opts.g_range;
    j["model_k"] = opts.model_k;
  }
  j["summaries"] = std::move(methods);
  j["errors"] = std::move(errors);
  j["metadata"] = {{"timing", std::move(timing)}};
  return j;
}

Json to_json(const HeatmapTable& table) {
  Json cells = Json::array();
  for (const auto& c : table.cells) {
    cells.push_back({{"row_cluster", c.row_cluster},
                     {"group", c.group},
                     {"percent", c.percent},
                     {"terms", string_list(c.terms)}});
  }
  Json j;
  j["cells"] = std::move(cells);
  j["notes"] = string_list(table.notes);
  return j;
}

void write_records_csv(std::ostream& out, const ExperimentResult& result) {
  const bool mixture = result.spec.is_mixture();
  CsvRow header{"replicate", "seed", "method", "success", "failed", "wall_time", "k"};
  if (mixture) {
    header.insert(header.end(), {"selected_g", "ari"});
  } else {
    header.insert(header.end(), {"mape", "mape_mle", "assignment"});
  }
  header.push_back("error");
  write_csv_row(out, header);
  for (const auto& r : result.records) {
    CsvRow row{std::to_string(r.replicate), std::to_string(r.seed),
               std::string(method_name(r.method)), r.success ? "1" : "0", r.failed ? "1" : "0",
               format_double(r.wall_time), std::to_string(r.k_used)};
    if (mixture) {
      row.push_back(std::to_string(r.selected_g));
      row.push_back(format_double(r.ari));
    } else {
      row.push_back(format_double(r.mape));
      row.push_back(format_double(r.mape_mle));
      std::string a;
      for (std::size_t j = 0; j < r.assignment.size(); ++j) {
        a += (j > 0 ? " " : "") + std::to_string(r.assignment[j]);
      }
      row.push_back(a);
    }
    row.push_back(r.error);
    write_csv_row(out, row);
  }
}

void write_heatmap_csv(std::ostream& out, const HeatmapTable& table) {
  write_csv_row(out, {"row_cluster", "group", "percent", "terms"});
  for (const auto& c : table.cells) {
    std::string terms;
    for (std::size_t i = 0; i < c.terms.size(); ++i) {
      terms += (i > 0 ? " " : "") + c.terms[i];
    }
    write_csv_row(out, {std::to_string(c.row_cluster), std::to_string(c.group),
                        format_double(c.percent), terms});
  }
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  if (!header.empty()) {
    write_csv_row(out, header);
  }
  for (Index i = 0; i < m.rows(); ++i) {
    CsvRow row;
    for (Index c = 0; c < m.cols(); ++c) {
      row.push_back(format_double(m(i, c)));
    }
    write_csv_row(out, row);
  }
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  if (!j.is_object()) {
    throw InputError("config must be a JSON object");
  }
  static const std::set<std::string> known{
      "scenario", "n",       "seed",        "p",      "k",           "noise_weight",
      "replicates", "methods", "threads",   "k_auto", "k_min",       "k_max",
      "g_range",  "model_k", "starts",      "em_max_iter", "em_tol", "kmeans_restarts",
      "gamma",    "lambda",  "omega",       "max_iter", "tol",       "greedy_sweeps"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw InputError("unknown config key '" + key + "'");
    }
  }
  if (!j.contains("scenario")) {
    throw InputError("config needs a 'scenario'");
  }
  ExperimentConfig cfg;
  auto& s = cfg.spec;
  auto& o = cfg.options;
  s.name = parse_scenario(get_as<std::string>(j, "scenario"));
  if (j.contains("n")) s.n_per_component = get_as<int>(j, "n");
  if (j.contains("seed")) s.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("p")) s.p = get_as<int>(j, "p");
  if (j.contains("k")) s.k = get_as<int>(j, "k");
  if (j.contains("noise_weight")) s.noise_weight = get_as<double>(j, "noise_weight");
  if (j.contains("replicates")) o.replicates = get_as<int>(j, "replicates");
  if (j.contains("methods")) {
    o.methods.clear();
    for (const auto& m : get_as<std::vector<std::string>>(j, "methods")) {
      o.methods.push_back(parse_method(m));
    }
  }
  if (j.contains("threads")) o.threads = get_as<int>(j, "threads");
  if (j.contains("k_auto")) o.k_auto = get_as<bool>(j, "k_auto");
  if (j.contains("k_min") != j.contains("k_max")) {
    throw InputError("k_min and k_max go together");
  }
  if (j.contains("k_min")) {
    o.k_range = std::pair{get_as<int>(j, "k_min"), get_as<int>(j, "k_max")};
  }
  if (j.contains("g_range")) o.g_range = get_as<std::vector<int>>(j, "g_range");
  if (j.contains("model_k")) o.model_k = get_as<int>(j, "model_k");
  if (j.contains("starts")) o.starts = get_as<int>(j, "starts");
  if (j.contains("em_max_iter")) o.em_max_iter = get_as<int>(j, "em_max_iter");
  if (j.contains("em_tol")) o.em_tol = get_as<double>(j, "em_tol");
  if (j.contains("kmeans_restarts")) o.kmeans_restarts = get_as<int>(j, "kmeans_restarts");
  if (j.contains("gamma")) o.estimator.convex.gamma = get_as<double>(j, "gamma");
  if (j.contains("lambda")) o.estimator.convex.lambda = get_as<double>(j, "lambda");
  if (j.contains("omega")) o.estimator.convex.omega = get_as<double>(j, "omega");
  if (j.contains("max_iter")) o.estimator.convex.max_iter = get_as<int>(j, "max_iter");
  if (j.contains("tol")) o.estimator.convex.tol = get_as<double>(j, "tol");
  if (j.contains("greedy_sweeps")) o.estimator.greedy_sweeps = get_as<int>(j, "greedy_sweeps");
  return cfg;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

} // namespace bdbc
