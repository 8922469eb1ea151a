#include "bdbc/experiment.hpp"

#include "bdbc/core_stats.hpp"
#include "bdbc/error.hpp"
#include "bdbc/eval.hpp"
#include "bdbc/parallel.hpp"
#include "bdbc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace bdbc {

namespace {

constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kFitStream = 3;

BlockDesign fixed_design(const ScenarioSpec& spec, std::uint64_t replicate_seed) {
  switch (spec.name) {
  case ScenarioName::sigmaA:
    return make_sigma_A();
  case ScenarioName::sigmaB:
    return make_sigma_B();
  case ScenarioName::mape_pos:
    return make_mape_design(true);
  case ScenarioName::mape_neg:
    return make_mape_design(false);
  case ScenarioName::grid_cell:
    return make_random_block_cov(spec.p, spec.k, derive_seed(replicate_seed, {kDesignStream}),
                                 spec.noise_weight);
  default:
    throw InputError("not an estimator scenario");
  }
}

void run_estimator_replicate(const ScenarioData& sd, const ExperimentOptions& opts,
                             std::vector<ReplicateRecord>& out) {
  const Matrix S = compute_stats(sd.data).cov;
  const ColumnGrouping& truth = sd.groupings.front();
  const double mape_mle = mape(sd.cov, S);
  for (auto& rec : out) {
    rec.mape_mle = mape_mle;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      int k = truth.k();
      if (opts.k_auto) {
        const auto [lo, hi] = opts.k_range.value_or(default_k_range(truth.p()));
        k = select_k_silhouette(S, lo, hi).k;
      }
      const EstimatorReport rep = estimate_grouping(rec.method, S, k, opts.estimator);
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rec.k_used = k;
      rec.assignment = rep.grouping.assignment();
      rec.success = partition_match(rep.grouping, truth);
      rec.mape = mape(sd.cov, project_block_diagonal(S, rep.grouping).expanded());
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  }
}

void run_mixture_replicate(const ScenarioData& sd, const ExperimentOptions& opts,
                           std::vector<ReplicateRecord>& out) {
  const auto true_g = static_cast<int>(sd.groupings.size());
  for (auto& rec : out) {
    try {
      EmOptions em;
      em.mstep.k = opts.model_k;
      em.mstep.method = rec.method;
      em.mstep.estimator = opts.estimator;
      em.seed = derive_seed(sd.seed, {kFitStream});
      em.max_iter = opts.em_max_iter;
      em.tol = opts.em_tol;
      em.kmeans_restarts = opts.kmeans_restarts;
      const auto t0 = std::chrono::steady_clock::now();
      const GSelection sel = select_g(sd.data.values, opts.g_range, em, opts.starts, 1);
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rec.selected_g = sel.best.model.g();
      rec.k_used = opts.model_k;
      rec.success = rec.selected_g == true_g;
      rec.ari = ari(sd.row_labels, sel.best.row_assignment);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) {
    return 0.0;
  }
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) {
    s += (x - m) * (x - m);
  }
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) {
    return 0.0;
  }
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

} // namespace

std::string_view scenario_name(ScenarioName s) {
  switch (s) {
  case ScenarioName::sigmaA:
    return "sigmaA";
  case ScenarioName::sigmaB:
    return "sigmaB";
  case ScenarioName::mape_pos:
    return "mape_pos";
  case ScenarioName::mape_neg:
    return "mape_neg";
  case ScenarioName::grid_cell:
    return "grid_cell";
  case ScenarioName::scenario1:
    return "scenario1";
  case ScenarioName::scenario2:
    return "scenario2";
  }
  return "?";
}

ScenarioName parse_scenario(std::string_view name) {
  for (auto s : {ScenarioName::sigmaA, ScenarioName::sigmaB, ScenarioName::mape_pos,
                 ScenarioName::mape_neg, ScenarioName::grid_cell, ScenarioName::scenario1,
                 ScenarioName::scenario2}) {
    if (scenario_name(s) == name) {
      return s;
    }
  }
  throw InputError("unknown scenario '" + std::string(name) +
                   "' (expected sigmaA, sigmaB, mape_pos, mape_neg, grid_cell, scenario1 "
                   "or scenario2)");
}

ScenarioSpec resolved(ScenarioSpec spec) {
  auto force = [&](int p, int k) {
    if ((spec.p != 0 && spec.p != p) || (spec.k != 0 && spec.k != k)) {
      throw InputError("scenario " + std::string(scenario_name(spec.name)) + " has p = " +
                       std::to_string(p) + ", k = " + std::to_string(k));
    }
    spec.p = p;
    spec.k = k;
  };
  switch (spec.name) {
  case ScenarioName::sigmaA:
  case ScenarioName::sigmaB:
    force(8, 3);
    break;
  case ScenarioName::mape_pos:
  case ScenarioName::mape_neg:
    force(12, 3);
    break;
  case ScenarioName::scenario1:
  case ScenarioName::scenario2:
    if (spec.p != 0 && spec.p != 8) {
      throw InputError("mixture scenarios have p = 8");
    }
    spec.p = 8;
    break;
  case ScenarioName::grid_cell:
    if (spec.p < 2 || spec.k < 1 || spec.p % spec.k != 0) {
      throw InputError("grid_cell needs p >= 2 and k dividing p, got p = " +
                       std::to_string(spec.p) + ", k = " + std::to_string(spec.k));
    }
    break;
  }
  if (spec.n_per_component < 2) {
    throw InputError("scenario needs n >= 2");
  }
  if (!(spec.noise_weight >= 0.0)) {
    throw InputError("noise_weight must be non-negative");
  }
  return spec;
}

void validate(const ExperimentOptions& o) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) {
      throw InputError(what);
    }
  };
  require(o.replicates >= 0, "replicates must be >= 0");
  require(!o.methods.empty(), "at least one method is required");
  require(o.threads >= 1, "threads must be >= 1");
  require(o.estimator.greedy_sweeps >= 1, "greedy sweeps must be >= 1");
  require(o.estimator.convex.omega > 0.0, "omega must be positive");
  require(o.estimator.convex.gamma >= 0.0 && o.estimator.convex.lambda >= 0.0,
          "gamma and lambda must be non-negative");
  require(o.estimator.convex.max_iter >= 1, "max_iter must be >= 1");
  require(o.estimator.convex.tol > 0.0, "tol must be positive");
  if (o.k_range) {
    require(o.k_range->first >= 1 && o.k_range->first <= o.k_range->second,
            "k range must satisfy 1 <= k_min <= k_max");
  }
  require(!o.g_range.empty(), "g range is empty");
  for (int g : o.g_range) {
    require(g >= 1, "g values must be >= 1");
  }
  require(o.model_k >= 1, "model k must be >= 1");
  require(o.starts >= 1, "starts must be >= 1");
  require(o.em_max_iter >= 1, "EM max_iter must be >= 1");
  require(o.em_tol > 0.0, "EM tol must be positive");
  require(o.kmeans_restarts >= 1, "k-means restarts must be >= 1");
}

std::vector<MethodSummary> summarize(const std::vector<ReplicateRecord>& records,
                                     const std::vector<Method>& methods) {
  std::vector<MethodSummary> out;
  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    std::vector<double> times;
    std::vector<double> mapes;
    std::vector<double> mapes_mle;
    std::vector<double> gs;
    std::vector<double> aris;
    for (const auto& r : records) {
      if (r.method != m) {
        continue;
      }
      ++s.replicates;
      s.successes += r.success ? 1 : 0;
      if (r.failed) {
        ++s.failures;
        continue;
      }
      times.push_back(r.wall_time);
      mapes.push_back(r.mape);
      mapes_mle.push_back(r.mape_mle);
      gs.push_back(r.selected_g);
      aris.push_back(r.ari);
    }
    s.accuracy = s.replicates > 0 ? static_cast<double>(s.successes) / s.replicates : 0.0;
    s.mean_time = mean_of(times);
    s.sd_time = sd_of(times);
    s.median_time = median_of(times);
    s.mean_mape = mean_of(mapes);
    s.mean_mape_mle = mean_of(mapes_mle);
    s.mean_selected_g = mean_of(gs);
    s.sd_selected_g = sd_of(gs);
    s.mean_ari = mean_of(aris);
    out.push_back(s);
  }
  return out;
}

ScenarioData generate_scenario_data(const ScenarioSpec& raw_spec, int replicate) {
  const ScenarioSpec spec = resolved(raw_spec);
  if (replicate < 0) {
    throw InputError("replicate index must be >= 0");
  }
  ScenarioData sd;
  sd.seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(replicate)});
  if (spec.is_mixture()) {
    const auto comps = spec.name == ScenarioName::scenario1
                           ? make_scenario1()
                           : make_scenario2(derive_seed(sd.seed, {kDesignStream}));
    MixtureSample sample =
        sample_mixture(comps, spec.n_per_component, derive_seed(sd.seed, {kDataStream}));
    sd.data = std::move(sample.data);
    sd.row_labels = std::move(sample.labels);
    for (const auto& c : comps) {
      sd.groupings.push_back(c.grouping);
    }
    return sd;
  }
  BlockDesign design = fixed_design(spec, sd.seed);
  sd.data = sample_mvn(design.mean, design.cov, spec.n_per_component,
                       derive_seed(sd.seed, {kDataStream}));
  sd.cov = std::move(design.cov);
  sd.groupings.push_back(std::move(design.grouping));
  return sd;
}

ExperimentResult run_replicates(const ScenarioSpec& raw_spec, const ExperimentOptions& opts) {
  const ScenarioSpec spec = resolved(raw_spec);
  validate(opts);
  ExperimentResult result;
  result.spec = spec;
  const std::size_t nm = opts.methods.size();
  result.records.resize(static_cast<std::size_t>(opts.replicates) * nm);
  parallel_for(static_cast<std::size_t>(opts.replicates), opts.threads, [&](std::size_t r) {
    std::vector<ReplicateRecord> recs(nm);
    for (std::size_t m = 0; m < nm; ++m) {
      recs[m].replicate = static_cast<int>(r);
      recs[m].seed = derive_seed(spec.seed, {r});
      recs[m].method = opts.methods[m];
    }
    try {
      const ScenarioData sd = generate_scenario_data(spec, static_cast<int>(r));
      if (spec.is_mixture()) {
        run_mixture_replicate(sd, opts, recs);
      } else {
        run_estimator_replicate(sd, opts, recs);
      }
    } catch (const std::exception& e) {
      for (auto& rec : recs) {
        rec.failed = true;
        rec.success = false;
        rec.error = e.what();
      }
    }
    std::move(recs.begin(), recs.end(), result.records.begin() + static_cast<long>(r * nm));
  });
  result.summaries = summarize(result.records, opts.methods);
  return result;
}

} // namespace bdbc
