#include "bdbc/cli.hpp"

#include "bdbc/core_stats.hpp"
#include "bdbc/csv.hpp"
#include "bdbc/error.hpp"
#include "bdbc/estimators.hpp"
#include "bdbc/eval.hpp"
#include "bdbc/experiment.hpp"
#include "bdbc/ingest.hpp"
#include "bdbc/mixture.hpp"
#include "bdbc/parallel.hpp"
#include "bdbc/serialize.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace bdbc {

namespace {

const std::vector<std::string> kMethodNames{"greedy", "convex", "hier", "hierarchical"};

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw InputError(what);
  }
}

int parse_int(std::string_view s, const std::string& what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty(),
          what + ": '" + std::string(s) + "' is not an integer");
  return v;
}

/// "3", "1:5" or "1,2,4".
std::vector<int> parse_int_range(const std::string& text, const std::string& what) {
  std::vector<int> out;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const int lo = parse_int(std::string_view(text).substr(0, colon), what);
    const int hi = parse_int(std::string_view(text).substr(colon + 1), what);
    require(lo <= hi, what + ": empty range '" + text + "'");
    for (int v = lo; v <= hi; ++v) {
      out.push_back(v);
    }
    return out;
  }
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(parse_int(rest.substr(0, comma), what));
    if (comma == std::string_view::npos) {
      break;
    }
    rest.remove_prefix(comma + 1);
  }
  return out;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), "cannot write '" + path + "'");
  f << text;
}

template <class Writer>
void emit_with(const std::string& path, std::ostream& out, Writer&& write) {
  std::ostringstream s;
  write(s);
  emit(path, s.str(), out);
}

/// Flags shared by every command that runs a column estimator.
struct EstimatorFlags {
  std::string method = "hier";
  int k = 0;
  bool k_auto = false;
  int k_min = 0;
  int k_max = 0;
  EstimatorOptions opts;

  void add(CLI::App* app, bool convex_iter_flags_are_primary) {
    app->add_option("--method", method, "Column estimator")
        ->check(CLI::IsMember(kMethodNames))
        ->capture_default_str();
    auto* k_opt = app->add_option("--k", k, "Number of column groups");
    auto* auto_opt = app->add_flag("--k-auto", k_auto, "Choose K by silhouette");
    k_opt->excludes(auto_opt);
    app->add_option("--k-min", k_min, "Smallest K tried by --k-auto")->needs(auto_opt);
    app->add_option("--k-max", k_max, "Largest K tried by --k-auto")->needs(auto_opt);
    app->add_option("--gamma", opts.convex.gamma, "Convex relaxation binarization weight")
        ->capture_default_str();
    app->add_option("--lambda", opts.convex.lambda, "Convex relaxation barrier weight")
        ->capture_default_str();
    app->add_option("--omega", opts.convex.omega, "Convex relaxation step size")
        ->capture_default_str();
    const std::string prefix = convex_iter_flags_are_primary ? "--" : "--convex-";
    app->add_option(prefix + "max-iter", opts.convex.max_iter, "Convex relaxation cycles")
        ->capture_default_str();
    app->add_option(prefix + "tol", opts.convex.tol, "Convex relaxation tolerance")
        ->capture_default_str();
    app->add_option("--greedy-sweeps", opts.greedy_sweeps, "Greedy sweep limit")
        ->capture_default_str();
  }

  void validate() const {
    require(k_auto || k >= 1, "give --k (>= 1) or --k-auto");
    if (k_auto && (k_min != 0 || k_max != 0)) {
      require(k_min >= 1 && k_min <= k_max, "--k-min and --k-max must satisfy 1 <= min <= max");
    }
    ExperimentOptions probe;
    probe.estimator = opts;
    ::bdbc::validate(probe);
  }

  std::pair<int, int> k_range(int p) const {
    return k_min > 0 ? std::pair{k_min, std::min(k_max, p)} : default_k_range(p);
  }
};

/// Flags of the mixture fit shared by `fit` and `topics`.
struct MixtureFlags {
  std::optional<int> g;
  std::string g_range;
  std::uint64_t seed = 1;
  int starts = 1;
  int restarts = 10;
  int max_iter = 500;
  double tol = 1e-4;
  int threads = 0;

  void add(CLI::App* app) {
    auto* g_opt = app->add_option("--g", g, "Number of row clusters");
    app->add_option("--g-range", g_range, "Row cluster counts searched by BIC, e.g. 1:5")
        ->excludes(g_opt);
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--starts", starts, "EM starts per G")->capture_default_str();
    app->add_option("--restarts", restarts, "k-means restarts per start")->capture_default_str();
    app->add_option("--max-iter", max_iter, "EM iteration limit")->capture_default_str();
    app->add_option("--tol", tol, "Aitken stopping tolerance")->capture_default_str();
    app->add_option("--threads", threads, "Worker threads (default: BDBC_THREADS or CPUs)");
  }

  std::vector<int> gs() const {
    if (g) {
      return {*g};
    }
    return parse_int_range(g_range.empty() ? "1:5" : g_range, "--g-range");
  }

  void validate() const {
    for (int v : gs()) {
      require(v >= 1, "row cluster counts must be >= 1");
    }
    require(starts >= 1 && restarts >= 1, "--starts and --restarts must be >= 1");
    require(max_iter >= 1 && tol > 0.0, "--max-iter must be >= 1 and --tol > 0");
    require(threads >= 0, "--threads must be >= 0");
  }

  EmOptions em(const EstimatorFlags& est) const {
    EmOptions o;
    o.seed = seed;
    o.max_iter = max_iter;
    o.tol = tol;
    o.kmeans_restarts = restarts;
    o.mstep.method = parse_method(est.method);
    o.mstep.k = est.k_auto ? 1 : est.k;
    o.mstep.k_auto = est.k_auto;
    o.mstep.estimator = est.opts;
    return o;
  }

  int worker_count() const { return threads > 0 ? threads : default_thread_count(); }
};

struct InputFlags {
  std::string path;
  bool no_header = false;
  std::string label_column;
  bool standardize = false;

  void add(CLI::App* app) {
    app->add_option("--input", path, "Numeric CSV")->required();
    app->add_flag("--no-header", no_header, "First row is data");
    app->add_option("--label-column", label_column,
                    "Class column (header name, or 1-based index without header)");
    app->add_flag("--standardize", standardize, "Scale columns to unit variance");
  }

  LoadedCsv load() const {
    LoadedCsv in = load_csv(path, !no_header,
                            label_column.empty() ? std::nullopt
                                                 : std::optional<std::string>(label_column));
    in.data.validate();
    return in;
  }
};

std::vector<std::string> column_names(const DataMatrix& d) {
  if (!d.col_names.empty()) {
    return d.col_names;
  }
  std::vector<std::string> names;
  for (Index j = 0; j < d.cols(); ++j) {
    names.push_back("x" + std::to_string(j + 1));
  }
  return names;
}

// estimate-cov ---------------------------------------------------------------

struct EstimateCommand {
  InputFlags input;
  EstimatorFlags est;
  std::string output;
  std::string cov_output;

  void add(CLI::App* app) {
    input.add(app);
    est.add(app, true);
    app->add_option("--output", output, "Report JSON (default: stdout)");
    app->add_option("--cov-output", cov_output, "Projected covariance CSV");
  }

  void run(std::ostream& out) const {
    est.validate();
    LoadedCsv in = input.load();
    DataMatrix data = input.standardize ? standardize(in.data) : in.data;
    const Matrix S = compute_stats(data).cov;
    const int p = static_cast<int>(S.rows());
    int k = est.k;
    std::optional<SilhouetteSelection> sel;
    if (est.k_auto) {
      const auto [lo, hi] = est.k_range(p);
      require(lo <= hi, "no K range available for p = " + std::to_string(p));
      sel = select_k_silhouette(S, lo, hi);
      k = sel->k;
    }
    const EstimatorReport rep = estimate_grouping(parse_method(est.method), S, k, est.opts);
    const BlockCovariance proj = project_block_diagonal(S, rep.grouping);
    const auto names = column_names(data);
    Json j = to_json(rep, proj, names);
    if (sel) {
      Json scores = Json::array();
      for (const auto& [kk, s] : sel->scores) {
        scores.push_back({{"k", kk}, {"silhouette", s}});
      }
      Json meta = j["metadata"];
      j.erase("metadata");
      j["silhouette"] = std::move(scores);
      j["metadata"] = std::move(meta);
    }
    if (!cov_output.empty()) {
      emit_with(cov_output, out, [&](std::ostream& s) { write_matrix_csv(s, proj.expanded(), names); });
    }
    emit(output, dump(j), out);
  }
};

// fit -------------------------------------------------------------------------

struct FitCommand {
  InputFlags input;
  EstimatorFlags est;
  MixtureFlags mix;
  std::optional<int> select_k;
  std::string output;
  std::string assignments;
  std::string responsibilities;

  void add(CLI::App* app) {
    input.add(app);
    est.add(app, false);
    mix.add(app);
    app->add_option("--select-k", select_k, "Keep this many columns by ANOVA F (needs labels)");
    app->add_option("--output", output, "FitReport JSON (default: stdout)");
    app->add_option("--assignments", assignments, "Row cluster CSV");
    app->add_option("--responsibilities", responsibilities, "N x G responsibility CSV");
  }

  void run(std::ostream& out) const {
    est.validate();
    mix.validate();
    require(!select_k || *select_k >= 1, "--select-k must be >= 1");
    require(!select_k || !input.label_column.empty(), "--select-k needs --label-column");
    LoadedCsv in = input.load();
    DataMatrix data = in.data;
    std::optional<Labels> labels;
    if (in.labels) {
      labels = encode_labels(*in.labels);
    }
    if (select_k) {
      data = anova_select_k(data, *labels, *select_k);
    }
    if (input.standardize) {
      data = standardize(data);
    }
    const GSelection sel =
        select_g(data.values, mix.gs(), mix.em(est), mix.starts, mix.worker_count());
    Json j = to_json(sel, column_names(data));
    if (est.k_auto) {
      j["k"] = "auto";
    }
    if (labels) {
      Json meta = j["metadata"];
      j.erase("metadata");
      j["evaluation"] = {{"ari", ari(*labels, sel.best.row_assignment)},
                         {"accuracy", matched_accuracy(*labels, sel.best.row_assignment)}};
      j["metadata"] = std::move(meta);
    }
    if (!assignments.empty()) {
      emit_with(assignments, out, [&](std::ostream& s) {
        write_csv_row(s, {"row", "cluster"});
        for (std::size_t i = 0; i < sel.best.row_assignment.size(); ++i) {
          write_csv_row(s, {std::to_string(i + 1), std::to_string(sel.best.row_assignment[i])});
        }
      });
    }
    if (!responsibilities.empty()) {
      std::vector<std::string> header;
      for (int g = 0; g < sel.best.model.g(); ++g) {
        header.push_back("g" + std::to_string(g));
      }
      emit_with(responsibilities, out, [&](std::ostream& s) {
        write_matrix_csv(s, sel.best.responsibilities, header);
      });
    }
    emit(output, dump(j), out);
  }
};

// simulate --------------------------------------------------------------------

struct SimulateCommand {
  std::string scenario;
  std::string config;
  std::optional<int> n;
  std::optional<int> reps;
  std::vector<std::string> methods;
  std::uint64_t seed = 1;
  int p = 0;
  int k = 0;
  std::optional<double> noise_weight;
  bool k_auto = false;
  std::string g_range;
  int model_k = 3;
  int threads = 0;
  std::string output;
  std::string records;
  std::string dataset;

  void add(CLI::App* app) {
    auto* sc = app->add_option("--scenario", scenario, "Named design")
                   ->check(CLI::IsMember({"sigmaA", "sigmaB", "mape_pos", "mape_neg",
                                          "grid_cell", "scenario1", "scenario2"}));
    auto* cfg = app->add_option("--config", config, "Experiment config JSON");
    sc->excludes(cfg);
    const std::vector<CLI::Option*> spec_opts{
        app->add_option("--n", n, "Rows (per component for mixture designs)"),
        app->add_option("--method", methods, "Estimator(s), repeat or comma-separate")
            ->delimiter(',')
            ->check(CLI::IsMember(kMethodNames)),
        app->add_option("--seed", seed, "Base seed"),
        app->add_option("--p", p, "grid_cell: number of variables"),
        app->add_option("--k", k, "grid_cell: number of blocks"),
        app->add_option("--noise-weight", noise_weight, "grid_cell: weight of the noise term"),
        app->add_flag("--k-auto", k_auto, "Choose K by silhouette"),
        app->add_option("--g-range", g_range, "Mixture designs: G searched by BIC"),
        app->add_option("--model-k", model_k, "Mixture designs: K per component"),
    };
    auto* reps_opt = app->add_option("--reps", reps, "Replicates (default 100)");
    auto* ds = app->add_option("--dataset", dataset, "Write replicate 0 as CSV instead");
    ds->excludes(reps_opt);
    for (auto* o : spec_opts) {
      o->excludes(cfg);
    }
    reps_opt->excludes(cfg);
    app->add_option("--threads", threads, "Worker threads (default: BDBC_THREADS or CPUs)");
    app->add_option("--output", output, "Aggregate JSON (default: stdout)");
    app->add_option("--records", records, "Per-replicate CSV")->excludes(ds);
  }

  ExperimentConfig build() const {
    ExperimentConfig c;
    if (!config.empty()) {
      std::ifstream f(config);
      require(static_cast<bool>(f), "cannot open '" + config + "'");
      Json j;
      try {
        j = Json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw InputError("config '" + config + "': " + e.what());
      }
      c = experiment_config_from_json(j);
    } else {
      require(!scenario.empty(), "give --scenario or --config");
      c.spec.name = parse_scenario(scenario);
      c.spec.seed = seed;
      c.spec.p = p;
      c.spec.k = k;
      c.spec.n_per_component = n ? *n : (c.spec.name == ScenarioName::grid_cell ? 50 : 100);
      if (noise_weight) {
        c.spec.noise_weight = *noise_weight;
      }
      if (reps) {
        c.options.replicates = *reps;
      }
      if (!methods.empty()) {
        c.options.methods.clear();
        for (const auto& m : methods) {
          c.options.methods.push_back(parse_method(m));
        }
      }
      c.options.k_auto = k_auto;
      if (!g_range.empty()) {
        c.options.g_range = parse_int_range(g_range, "--g-range");
      }
      c.options.model_k = model_k;
    }
    if (threads > 0) {
      c.options.threads = threads;
    } else if (config.empty() || c.options.threads <= 1) {
      c.options.threads = default_thread_count();
    }
    c.spec = resolved(c.spec);
    validate(c.options);
    return c;
  }

  void run(std::ostream& out) const {
    require(threads >= 0, "--threads must be >= 0");
    const ExperimentConfig c = build();
    if (!dataset.empty()) {
      const ScenarioData sd = generate_scenario_data(c.spec, 0);
      std::vector<std::string> header = column_names(sd.data);
      const bool mixture = c.spec.is_mixture();
      emit_with(dataset, out, [&](std::ostream& s) {
        if (mixture) {
          header.push_back("label");
        }
        write_csv_row(s, header);
        for (Index i = 0; i < sd.data.rows(); ++i) {
          CsvRow row;
          for (Index j = 0; j < sd.data.cols(); ++j) {
            row.push_back(format_double(sd.data.values(i, j)));
          }
          if (mixture) {
            row.push_back(std::to_string(sd.row_labels[static_cast<std::size_t>(i)]));
          }
          write_csv_row(s, row);
        }
      });
      Json truth = Json::array();
      for (const auto& g : sd.groupings) {
        truth.push_back(to_json(g));
      }
      Json j;
      j["schema"] = kSchemaVersion;
      j["scenario"] = std::string(scenario_name(c.spec.name));
      j["seed"] = sd.seed;
      j["rows"] = sd.data.rows();
      j["columns"] = sd.data.cols();
      j["groupings"] = std::move(truth);
      if (!mixture) {
        j["covariance"] = to_json(sd.cov);
      }
      emit(output, dump(j), out);
      return;
    }
    const ExperimentResult result = run_replicates(c.spec, c.options);
    if (!records.empty()) {
      emit_with(records, out, [&](std::ostream& s) { write_records_csv(s, result); });
    }
    emit(output, dump(to_json(result, c.options)), out);
  }
};

// evaluate --------------------------------------------------------------------

struct EvaluateCommand {
  std::string truth_labels;
  std::string pred_labels;
  std::string truth_column;
  std::string pred_column;
  std::string truth_cov;
  std::string est_cov;
  std::string truth_grouping;
  std::string pred_grouping;
  bool no_header = false;
  std::string output;

  void add(CLI::App* app) {
    auto* tl = app->add_option("--truth-labels", truth_labels, "CSV with true labels");
    auto* pl = app->add_option("--pred-labels", pred_labels, "CSV with predicted labels");
    tl->needs(pl);
    pl->needs(tl);
    app->add_option("--truth-column", truth_column, "Label column (default: last)")->needs(tl);
    app->add_option("--pred-column", pred_column, "Label column (default: last)")->needs(pl);
    auto* tc = app->add_option("--truth-cov", truth_cov, "CSV with the true covariance");
    auto* ec = app->add_option("--est-cov", est_cov, "CSV with the estimated covariance");
    tc->needs(ec);
    ec->needs(tc);
    auto* tg = app->add_option("--truth-grouping", truth_grouping, "JSON with a grouping");
    auto* pg = app->add_option("--pred-grouping", pred_grouping, "JSON with a grouping");
    tg->needs(pg);
    pg->needs(tg);
    app->add_flag("--no-header", no_header, "CSV inputs have no header row");
    app->add_option("--output", output, "Metrics JSON (default: stdout)");
  }

  std::vector<std::string> labels(const std::string& path, const std::string& column) const {
    const auto rows = read_csv_file(path);
    const std::size_t first = no_header ? 0 : 1;
    require(rows.size() > first, "'" + path + "' has no data rows");
    std::size_t c = rows.front().size() - 1;
    if (!column.empty()) {
      if (no_header) {
        c = static_cast<std::size_t>(parse_int(column, "label column") - 1);
      } else {
        const auto it = std::find(rows.front().begin(), rows.front().end(), column);
        require(it != rows.front().end(), "column '" + column + "' not found in '" + path + "'");
        c = static_cast<std::size_t>(it - rows.front().begin());
      }
    }
    std::vector<std::string> out;
    for (std::size_t r = first; r < rows.size(); ++r) {
      require(c < rows[r].size(), "'" + path + "': row " + std::to_string(r + 1 - first) +
                                      " has no column " + std::to_string(c + 1));
      out.push_back(rows[r][c]);
    }
    return out;
  }

  static ColumnGrouping grouping(const std::string& path) {
    std::ifstream f(path);
    require(static_cast<bool>(f), "cannot open '" + path + "'");
    Json j;
    try {
      j = Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("'" + path + "': " + e.what());
    }
    return grouping_from_json(j.contains("grouping") ? j["grouping"] : j);
  }

  void run(std::ostream& out) const {
    require(!truth_labels.empty() || !truth_cov.empty() || !truth_grouping.empty(),
            "give label files, covariance files or grouping files to compare");
    Json j;
    j["schema"] = kSchemaVersion;
    if (!truth_labels.empty()) {
      const Labels t = encode_labels(labels(truth_labels, truth_column));
      const Labels p = encode_labels(labels(pred_labels, pred_column));
      require(t.size() == p.size(), "label files have different lengths");
      j["n"] = t.size();
      j["ari"] = ari(t, p);
      j["accuracy"] = matched_accuracy(t, p);
    }
    if (!truth_cov.empty()) {
      const Matrix t = load_csv(truth_cov, !no_header).data.values;
      const Matrix e = load_csv(est_cov, !no_header).data.values;
      require(t.rows() == t.cols() && t.rows() == e.rows() && t.cols() == e.cols(),
              "covariance files must be square with equal shapes");
      j["mape"] = mape(t, e);
    }
    if (!truth_grouping.empty()) {
      j["partition_match"] = partition_match(grouping(truth_grouping), grouping(pred_grouping));
    }
    emit(output, dump(j), out);
  }
};

// topics ----------------------------------------------------------------------

struct TopicsCommand {
  std::string input;
  std::string text_column = "text";
  std::string rating_column = "rating";
  int top_tf = 1000;
  int select_k = 0;
  EstimatorFlags est;
  MixtureFlags mix;
  std::string output;
  std::string heatmap_csv;
  std::string tfidf_csv;

  void add(CLI::App* app) {
    app->add_option("--input", input, "CSV with a header, one document per row")->required();
    app->add_option("--text-column", text_column, "Text column")->capture_default_str();
    app->add_option("--rating-column", rating_column, "Numeric rating column")
        ->capture_default_str();
    app->add_option("--top-tf", top_tf, "Terms kept by mean term frequency")
        ->capture_default_str();
    app->add_option("--select-k", select_k, "Terms kept by ANOVA F against ratings")->required();
    est.add(app, false);
    mix.add(app);
    app->add_option("--output", output, "Report JSON (default: stdout)");
    app->add_option("--heatmap-csv", heatmap_csv, "Heatmap table CSV");
    app->add_option("--tfidf-csv", tfidf_csv, "tf-idf matrix CSV");
  }

  void run(std::ostream& out) const {
    est.validate();
    mix.validate();
    require(top_tf >= 1 && select_k >= 1, "--top-tf and --select-k must be >= 1");
    const auto rows = read_csv_file(input);
    require(rows.size() >= 2, "'" + input + "' has no documents");
    const auto& header = rows.front();
    auto find = [&](const std::string& name) {
      const auto it = std::find(header.begin(), header.end(), name);
      require(it != header.end(), "column '" + name + "' not found in '" + input + "'");
      return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t tc = find(text_column);
    const std::size_t rc = find(rating_column);
    std::vector<std::string> texts;
    std::vector<double> ratings;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      require(rows[r].size() == header.size(),
              "ragged CSV: data row " + std::to_string(r) + " has " +
                  std::to_string(rows[r].size()) + " fields");
      texts.push_back(rows[r][tc]);
      const auto parsed = parse_numeric_csv({{rows[r][rc]}}, false, std::nullopt);
      ratings.push_back(parsed.data.values(0, 0));
    }
    const Corpus corpus = build_corpus(texts, ratings);
    const DataMatrix tfidf = tfidf_matrix(corpus, top_tf, select_k);
    const GSelection sel =
        select_g(tfidf.values, mix.gs(), mix.em(est), mix.starts, mix.worker_count());
    std::vector<ColumnGrouping> groupings;
    for (int c = 0; c < sel.best.model.g(); ++c) {
      groupings.push_back(sel.best.model.grouping(c));
    }
    const HeatmapTable heat = heatmap_stat(tfidf, sel.best.row_assignment, groupings);

    Json fit = to_json(sel, tfidf.col_names);
    Json meta = fit["metadata"];
    fit.erase("metadata");
    fit.erase("schema");
    Json j;
    j["schema"] = kSchemaVersion;
    j["documents"] = corpus.documents.size();
    j["dropped_documents"] = texts.size() - corpus.documents.size();
    j["vocabulary_size"] = corpus.vocabulary.size();
    j["fit"] = std::move(fit);
    j["heatmap"] = to_json(heat);
    j["metadata"] = std::move(meta);
    if (!tfidf_csv.empty()) {
      emit_with(tfidf_csv, out,
                [&](std::ostream& s) { write_matrix_csv(s, tfidf.values, tfidf.col_names); });
    }
    if (!heatmap_csv.empty()) {
      emit_with(heatmap_csv, out, [&](std::ostream& s) { write_heatmap_csv(s, heat); });
    }
    emit(output, dump(j), out);
  }
};

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block-diagonal covariance estimation and model-based bi-clustering", "bdbc"};
  app.require_subcommand(1);
  EstimateCommand estimate;
  FitCommand fit;
  SimulateCommand simulate;
  EvaluateCommand evaluate;
  TopicsCommand topics;
  auto* c_est = app.add_subcommand("estimate-cov", "Column grouping and projected covariance");
  auto* c_fit = app.add_subcommand("fit", "Mixture fit with block-diagonal covariances");
  auto* c_sim = app.add_subcommand("simulate", "Replicated simulation experiments");
  auto* c_eval = app.add_subcommand("evaluate", "ARI, matched accuracy, MAPE");
  auto* c_top = app.add_subcommand("topics", "tf-idf topic bi-clustering of a text corpus");
  estimate.add(c_est);
  fit.add(c_fit);
  simulate.add(c_sim);
  evaluate.add(c_eval);
  topics.add(c_top);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }
  try {
    if (c_est->parsed()) {
      estimate.run(out);
    } else if (c_fit->parsed()) {
      fit.run(out);
    } else if (c_sim->parsed()) {
      simulate.run(out);
    } else if (c_eval->parsed()) {
      evaluate.run(out);
    } else {
      topics.run(out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr);
}

} // namespace bdbc
