// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/cli.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>

#include <CLI11.hpp>

#include <latlapmed/dataset.hpp>
#include <latlapmed/eval.hpp>
#include <latlapmed/latlapmed.hpp>
#include <latlapmed/simgen.hpp>

namespace latlapmed::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ValidationError("config section '" + section + "' must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ValidationError("unknown config field: " + section + "." + key);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config field ") + key +
                          " has the wrong type");
  }
}

SimConfig parse_sim(const json& cfg, uint64_t seed) {
  json s = cfg.value("sim", json::object());
  check_keys(s, "sim",
             {"n", "p", "df", "phi_true", "top_utility_frac", "label_frac",
              "n_components", "comp_size_min", "comp_size_max"});
  SimConfig c;
  c.n = get_or<Index>(s, "n", c.n);
  c.p = get_or<Index>(s, "p", c.p);
  c.df = get_or<double>(s, "df", c.df);
  c.phi_true = get_or<double>(s, "phi_true", c.phi_true);
  c.top_utility_frac = get_or<double>(s, "top_utility_frac", c.top_utility_frac);
  c.label_frac = get_or<double>(s, "label_frac", c.label_frac);
  c.n_components = get_or<int>(s, "n_components", c.n_components);
  c.comp_size_min = get_or<Index>(s, "comp_size_min", c.comp_size_min);
  c.comp_size_max = get_or<Index>(s, "comp_size_max", c.comp_size_max);
  c.seed = seed;
  return c;
}

FitConfig parse_fit(const json& cfg) {
  json f = cfg.value("fit", json::object());
  check_keys(f, "fit",
             {"phi", "rho", "k_gem", "C", "beta_rule", "beta_fixed", "kernel",
              "sigma", "k_lap", "tau", "metric", "max_em_iters", "em_tol",
              "candidate_width", "solver_tol", "solver_max_iter"});
  FitConfig c;
  c.phi = get_or<double>(f, "phi", c.phi);
  c.rho = get_or<double>(f, "rho", c.rho);
  c.k_gem = get_or<int>(f, "k_gem", c.k_gem);
  c.C = get_or<double>(f, "C", c.C);
  std::string rule = get_or<std::string>(f, "beta_rule", "scaled");
  if (rule == "scaled") {
    c.beta_rule = BetaRule::Scaled;
  } else if (rule == "fixed") {
    c.beta_rule = BetaRule::Fixed;
  } else {
    throw ValidationError("fit.beta_rule must be 'scaled' or 'fixed'");
  }
  c.beta_fixed = get_or<double>(f, "beta_fixed", c.beta_fixed);
  c.kernel.kind = kernel_from_string(get_or<std::string>(f, "kernel", "rbf"));
  c.kernel.sigma = get_or<double>(f, "sigma", c.kernel.sigma);
  c.k_lap = get_or<int>(f, "k_lap", c.k_lap);
  c.tau = get_or<double>(f, "tau", c.tau);
  c.metric = metric_from_string(get_or<std::string>(f, "metric", "euclidean"));
  c.max_em_iters = get_or<int>(f, "max_em_iters", c.max_em_iters);
  c.em_tol = get_or<double>(f, "em_tol", c.em_tol);
  c.candidate_width = get_or<int>(f, "candidate_width", c.candidate_width);
  c.solver_tol = get_or<double>(f, "solver_tol", c.solver_tol);
  c.solver_max_iter = get_or<long>(f, "solver_max_iter", c.solver_max_iter);
  return c;
}

struct DataSpec {
  fs::path path;
  CsvColumns columns;
};

DataSpec parse_data(const json& cfg, const fs::path& base_dir) {
  json d = cfg.value("data", json::object());
  check_keys(d, "data",
             {"path", "label_column", "truth_anomaly_column", "truth_utility_column"});
  DataSpec spec;
  std::string path = get_or<std::string>(d, "path", "dataset.csv");
  spec.path = fs::path(path);
  if (spec.path.is_relative()) spec.path = base_dir / spec.path;
  spec.columns.label = get_or<std::string>(d, "label_column", "label");
  spec.columns.truth_anomaly =
      get_or<std::string>(d, "truth_anomaly_column", "truth_anomaly");
  spec.columns.truth_utility =
      get_or<std::string>(d, "truth_utility_column", "truth_utility");
  return spec;
}

json fit_config_echo(const FitConfig& c) {
  json f;
  f["phi"] = c.phi;
  f["rho"] = c.rho;
  f["k_gem"] = c.k_gem;
  f["C"] = c.C;
  f["beta_rule"] = c.beta_rule == BetaRule::Scaled ? "scaled" : "fixed";
  f["beta_fixed"] = c.beta_fixed;
  f["kernel"] = to_string(c.kernel.kind);
  f["sigma"] = c.kernel.sigma;
  f["k_lap"] = c.k_lap;
  f["tau"] = c.tau;
  f["metric"] = to_string(c.metric);
  f["max_em_iters"] = c.max_em_iters;
  f["em_tol"] = c.em_tol;
  f["candidate_width"] = c.candidate_width;
  f["solver_tol"] = c.solver_tol;
  f["solver_max_iter"] = c.solver_max_iter;
  return f;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out.good()) throw ValidationError("write failed for " + path.string());
}

void write_manifest(const RunSpec& spec, const std::string& command,
                    const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["seed"] = spec.seed;
  m["method"] = spec.method;
  m["workers"] = spec.workers;
  m["config"] = spec.config;
  m["outputs"] = outputs;
  write_json(spec.out_dir / "manifest.json", m);
}

json metrics_json(const MetricRecord& m) {
  json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["fpr"] = m.fpr;
  j["fnr"] = m.fnr;
  j["recall"] = m.recall;
  j["precision"] = m.precision;
  return j;
}

Eigen::VectorXi truth_signs(const Dataset& d) {
  if (!d.truth_utility) {
    throw ValidationError("dataset has no truth utility column");
  }
  Eigen::VectorXi t(d.n());
  for (Index i = 0; i < d.n(); ++i) {
    t[i] = (*d.truth_utility)[static_cast<size_t>(i)];
  }
  return t;
}

// Shared per-trial state so every method and phi reuses the same candidate
// edge lists.
struct PreparedTrial {
  Dataset data;
  GemState gem;
  Eigen::VectorXi truth;
};

class TrialCache {
 public:
  TrialCache(const SimConfig& sim, const FitConfig& fit)
      : sim_(sim), fit_(fit) {}

  std::shared_ptr<const PreparedTrial> get(uint64_t seed) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(seed);
    if (it != cache_.end()) return it->second;
    auto prepared = std::make_shared<PreparedTrial>();
    SimConfig sc = sim_;
    sc.seed = seed;
    prepared->data = generate(sc);
    GemConfig gc;
    gc.phi = fit_.phi;
    gc.k_gem = fit_.k_gem;
    gc.rho = fit_.rho;
    gc.metric = fit_.metric;
    gc.candidate_width = fit_.candidate_width;
    prepared->gem = init_gem(prepared->data.features, gc);
    prepared->truth = truth_signs(prepared->data);
    cache_.emplace(seed, prepared);
    return prepared;
  }

 private:
  SimConfig sim_;
  FitConfig fit_;
  std::mutex mu_;
  std::map<uint64_t, std::shared_ptr<const PreparedTrial>> cache_;
};

MetricRecord run_method(const std::string& method, const PreparedTrial& trial,
                        const FitConfig& cfg) {
  if (method == "latlapmed") {
    FitResult r = fit_latlapmed(trial.data, cfg, &trial.gem);
    return confusion(predict(r), trial.truth);
  }
  if (method == "two_stage") {
    FitResult r = fit_two_stage(trial.data, cfg, &trial.gem);
    return confusion(predict(r), trial.truth);
  }
  if (method == "lapmed_oracle") {
    if (!trial.data.truth_anomaly) {
      throw ValidationError("lapmed_oracle requires a truth anomaly column");
    }
    LapmedResult r = fit_lapmed(trial.data, trial.data.truth_anomaly, cfg);
    return confusion(predict_lapmed(r, trial.data.n()), trial.truth);
  }
  throw ValidationError("unknown method: " + method);
}

std::string format_cell(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

void cmd_simulate(const RunSpec& spec) {
  SimConfig sc = parse_sim(spec.config, spec.seed);
  Dataset d = generate(sc);
  fs::create_directories(spec.out_dir);
  save_csv(d, spec.out_dir / "dataset.csv");
  write_manifest(spec, "simulate", {"dataset.csv"});
}

void cmd_fit(const RunSpec& spec) {
  DataSpec ds = parse_data(spec.config, spec.base_dir);
  Dataset d = load_csv(ds.path, ds.columns);
  FitConfig cfg = parse_fit(spec.config);
  fs::create_directories(spec.out_dir);

  json model;
  json result;
  Eigen::VectorXi pred;

  if (spec.method == "latlapmed" || spec.method == "two_stage") {
    FitResult r = spec.method == "two_stage" ? fit_two_stage(d, cfg)
                                             : fit_latlapmed(d, cfg);
    pred = predict(r);
    model["mask"] = json::array();
    for (uint8_t b : r.anomaly_mask) model["mask"].push_back(int(b));
    model["alphas"] = std::vector<double>(
        r.dual.alphas.data(), r.dual.alphas.data() + r.dual.alphas.size());
    model["bias"] = r.dual.bias;
    model["config"] = fit_config_echo(cfg);
    // recomputed from the returned subset: a cycle exit returns the best
    // iterate, whose beta need not be the last trace row's
    Index a = static_cast<Index>(r.subset.size());
    model["beta_used"] = cfg.beta_rule == BetaRule::Fixed
                             ? cfg.beta_fixed
                             : 10.0 * cfg.C * double(d.labeled_count()) /
                                   (double(a) * double(a));
    model["k_lap_used"] = std::min<int>(cfg.k_lap, static_cast<int>(a) - 1);
    result["iterations"] = r.iterations;
    result["converged"] = r.converged;
    json trace = json::array();
    for (const IterationRecord& t : r.trace) {
      json e;
      e["iter"] = t.iter;
      e["objective"] = t.objective;
      e["anomaly_count"] = t.anomaly_count;
      e["changed"] = t.changed;
      e["beta"] = t.beta;
      e["k_lap_used"] = t.k_lap_used;
      e["k_lap_clamped"] = t.k_lap_clamped;
      if (t.fp >= 0) {
        e["fp"] = t.fp;
        e["fn"] = t.fn;
      }
      trace.push_back(e);
    }
    result["trace"] = trace;
  } else if (spec.method == "lapmed_oracle") {
    if (!d.truth_anomaly) {
      throw ValidationError("lapmed_oracle requires a truth anomaly column");
    }
    LapmedResult r = fit_lapmed(d, d.truth_anomaly, cfg);
    pred = predict_lapmed(r, d.n());
    model["mask"] = json::array();
    for (uint8_t b : *d.truth_anomaly) model["mask"].push_back(int(b));
    model["alphas"] = std::vector<double>(
        r.dual.alphas.data(), r.dual.alphas.data() + r.dual.alphas.size());
    model["bias"] = r.dual.bias;
    model["config"] = fit_config_echo(cfg);
    Index a = static_cast<Index>(r.subset.size());
    model["beta_used"] = cfg.beta_rule == BetaRule::Fixed
                             ? cfg.beta_fixed
                             : 10.0 * cfg.C * double(d.labeled_count()) /
                                   (double(a) * double(a));
    model["k_lap_used"] = std::min<int>(cfg.k_lap, static_cast<int>(a) - 1);
    result["iterations"] = 1;
    result["converged"] = true;
    result["trace"] = json::array();
  } else {
    throw ValidationError("unknown method: " + spec.method);
  }

  if (d.truth_utility) {
    result["metrics"] = metrics_json(confusion(pred, truth_signs(d)));
  }
  result["method"] = spec.method;

  write_json(spec.out_dir / "model.json", model);
  write_json(spec.out_dir / "fit_result.json", result);
  write_manifest(spec, "fit", {"model.json", "fit_result.json"});
}

void cmd_predict(const RunSpec& spec) {
  DataSpec ds = parse_data(spec.config, spec.base_dir);
  Dataset d = load_csv(ds.path, ds.columns);

  json pj = spec.config.value("predict", json::object());
  check_keys(pj, "predict", {"model"});
  std::string model_rel = get_or<std::string>(pj, "model", "model.json");
  fs::path model_path = fs::path(model_rel);
  if (model_path.is_relative()) model_path = spec.base_dir / model_path;
  std::ifstream in(model_path);
  if (!in) throw ValidationError("cannot open " + model_path.string());
  json model = json::parse(in);

  if (!model.contains("mask") || !model.contains("alphas") ||
      !model.contains("bias") || !model.contains("config")) {
    throw ValidationError("model file missing mask/alphas/bias/config");
  }
  std::vector<uint8_t> mask;
  for (const auto& b : model["mask"]) mask.push_back(b.get<int>() != 0);
  if (static_cast<Index>(mask.size()) != d.n()) {
    throw ValidationError("model mask length does not match dataset");
  }
  std::vector<double> alphas = model["alphas"].get<std::vector<double>>();
  double bias = model["bias"].get<double>();

  json cfg_echo;
  cfg_echo["fit"] = model["config"];
  FitConfig cfg = parse_fit(cfg_echo);

  std::vector<Index> subset;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) subset.push_back(static_cast<Index>(i));
  }
  LabelView lv = label_view(d);
  SubsetLabels sl;
  {
    size_t t = 0;
    for (size_t s = 0; s < subset.size() && t < lv.indices.size(); ++s) {
      if (subset[s] == lv.indices[t]) {
        sl.rows.push_back(static_cast<Index>(s));
        sl.signs.push_back(lv.signs[t]);
        ++t;
      }
    }
    if (sl.rows.size() != lv.indices.size()) {
      throw ValidationError("a labeled point lies outside the model's anomalous set");
    }
  }
  if (alphas.size() != sl.rows.size()) {
    throw ValidationError("model alphas do not match the labeled count");
  }

  Matrix Xs = gather_rows(d.features, subset);
  KernelMatrix K = gram(Xs, cfg.kernel);
  int k_eff = model.contains("k_lap_used")
                  ? model["k_lap_used"].get<int>()
                  : std::min<int>(cfg.k_lap, static_cast<int>(subset.size()) - 1);
  LaplacianMatrix L = normalized_laplacian(Xs, k_eff, cfg.tau, cfg.metric);
  double beta = model.contains("beta_used")
                    ? model["beta_used"].get<double>()
                    : cfg.beta_fixed;
  DualModel dm = build_dual(K.values, L.values, sl, cfg.C, beta);
  DualSolution sol;
  sol.alphas = Eigen::Map<const Vector>(alphas.data(),
                                        static_cast<Index>(alphas.size()));
  sol.bias = bias;
  Vector f_sub = decision_values(K.values, dm, sol);

  fs::create_directories(spec.out_dir);
  std::ofstream out(spec.out_dir / "predictions.csv", std::ios::trunc);
  if (!out) throw ValidationError("cannot write predictions.csv");
  out << "index,prediction,decision_value\n";
  std::vector<double> dense(static_cast<size_t>(d.n()), 0.0);
  for (size_t s = 0; s < subset.size(); ++s) {
    dense[static_cast<size_t>(subset[s])] = f_sub[static_cast<Index>(s)];
  }
  for (Index i = 0; i < d.n(); ++i) {
    int p = mask[static_cast<size_t>(i)] && dense[static_cast<size_t>(i)] > 0.0
                ? 1
                : -1;
    out << i << ',' << p << ',' << format_cell(dense[static_cast<size_t>(i)])
        << '\n';
  }
  if (!out.good()) throw ValidationError("write failed for predictions.csv");
  write_manifest(spec, "predict", {"predictions.csv"});
}

void cmd_sweep(const RunSpec& spec) {
  json sw = spec.config.value("sweep", json::object());
  check_keys(sw, "sweep", {"phis", "trials", "methods"});
  std::vector<double> phis = get_or<std::vector<double>>(sw, "phis", {});
  Index trials = get_or<Index>(sw, "trials", 10);
  std::vector<std::string> methods = get_or<std::vector<std::string>>(
      sw, "methods", {"latlapmed", "two_stage"});
  if (phis.empty()) throw ValidationError("sweep.phis must be a non-empty array");
  if (trials < 1) throw ValidationError("sweep.trials must be >= 1");
  if (methods.empty()) throw ValidationError("sweep.methods must be non-empty");

  SimConfig sim = parse_sim(spec.config, spec.seed);
  FitConfig fit = parse_fit(spec.config);

  // trial seeds split from the root seed by addition
  std::vector<uint64_t> seeds(static_cast<size_t>(trials));
  for (Index t = 0; t < trials; ++t) {
    seeds[static_cast<size_t>(t)] = spec.seed + static_cast<uint64_t>(t);
  }

  TrialCache cache(sim, fit);
  fs::create_directories(spec.out_dir);

  json auc_table;
  std::vector<std::string> outputs;
  for (const std::string& method : methods) {
    SweepResult res = pr_sweep_detailed(
        [&](double phi, uint64_t seed) {
          auto trial = cache.get(seed);
          FitConfig cfg = fit;
          cfg.phi = phi;
          return run_method(method, *trial, cfg);
        },
        phis, seeds, spec.workers);

    std::string csv_name = "pr_" + method + ".csv";
    std::ofstream csv(spec.out_dir / csv_name, std::ios::trunc);
    if (!csv) throw ValidationError("cannot write " + csv_name);
    csv << "phi,trial,tp,fp,tn,fn,recall,precision\n";
    for (const SweepCell& c : res.cells) {
      csv << format_cell(c.phi) << ',' << c.trial << ',' << c.record.tp << ','
          << c.record.fp << ',' << c.record.tn << ',' << c.record.fn << ','
          << format_cell(c.record.recall) << ','
          << format_cell(c.record.precision) << '\n';
    }
    for (const PRPoint& pt : res.curve.points) {
      csv << format_cell(pt.phi) << ",mean,,,,," << format_cell(pt.recall)
          << ',' << format_cell(pt.precision) << '\n';
    }
    if (!csv.good()) throw ValidationError("write failed for " + csv_name);

    json summary;
    summary["method"] = method;
    summary["auc"] = res.curve.auc;
    summary["points"] = json::array();
    for (const PRPoint& pt : res.curve.points) {
      json e;
      e["phi"] = pt.phi;
      e["recall"] = pt.recall;
      e["precision"] = pt.precision;
      summary["points"].push_back(e);
    }
    std::string json_name = "pr_" + method + ".json";
    write_json(spec.out_dir / json_name, summary);
    auc_table[method] = res.curve.auc;
    outputs.push_back(csv_name);
    outputs.push_back(json_name);
  }
  write_json(spec.out_dir / "auc_table.json", auc_table);
  outputs.push_back("auc_table.json");
  write_manifest(spec, "sweep", outputs);
}

void cmd_bench(const RunSpec& spec) {
  json b = spec.config.value("bench", json::object());
  check_keys(b, "bench", {"sizes", "p", "anomaly_count"});
  std::vector<Index> sizes = get_or<std::vector<Index>>(b, "sizes", {1000, 2000});
  Index p = get_or<Index>(b, "p", 3);
  Index a_target = get_or<Index>(b, "anomaly_count", 200);
  if (sizes.empty()) throw ValidationError("bench.sizes must be non-empty");

  FitConfig fit = parse_fit(spec.config);
  SimConfig sim = parse_sim(spec.config, spec.seed);
  sim.p = p;

  using clock = std::chrono::steady_clock;
  auto secs = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  json results = json::array();
  for (size_t si = 0; si < sizes.size(); ++si) {
    Index n = sizes[si];
    if (a_target >= n) {
      throw ValidationError("bench.anomaly_count must be smaller than every size");
    }
    SimConfig sc = sim;
    sc.n = n;
    sc.seed = spec.seed + si;
    Dataset d = generate(sc);
    LabelView lv = label_view(d);
    double phi = static_cast<double>(a_target) / static_cast<double>(n);

    GemConfig gc;
    gc.phi = phi;
    gc.k_gem = fit.k_gem;
    gc.rho = fit.rho;
    gc.metric = fit.metric;
    gc.candidate_width = fit.candidate_width;

    auto t0 = clock::now();
    GemState gem = init_gem(d.features, gc, spec.workers);
    auto t1 = clock::now();
    Vector d_hat = Vector::Zero(n);
    auto edges = penalized_edges(gem, d_hat, lv, fit.rho);
    auto t2 = clock::now();
    auto mask = entropy_set(gem, edges, phi, lv.indices);
    auto t3 = clock::now();

    std::vector<Index> subset;
    for (size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) subset.push_back(static_cast<Index>(i));
    }
    SubsetLabels sl;
    {
      size_t t = 0;
      for (size_t s = 0; s < subset.size() && t < lv.indices.size(); ++s) {
        if (subset[s] == lv.indices[t]) {
          sl.rows.push_back(static_cast<Index>(s));
          sl.signs.push_back(lv.signs[t]);
          ++t;
        }
      }
    }
    auto t4 = clock::now();
    Matrix Xs = gather_rows(d.features, subset);
    KernelMatrix K = gram(Xs, fit.kernel);
    int k_eff = std::min<int>(fit.k_lap, static_cast<int>(subset.size()) - 1);
    LaplacianMatrix L = normalized_laplacian(Xs, k_eff, fit.tau, fit.metric);
    double beta = 10.0 * fit.C * static_cast<double>(lv.size()) /
                  (static_cast<double>(subset.size()) * static_cast<double>(subset.size()));
    DualModel dm = build_dual(K.values, L.values, sl, fit.C, beta);
    DualSolution sol = solve_dual(dm.problem, fit.solver_tol, fit.solver_max_iter);
    auto t5 = clock::now();

    json r;
    r["n"] = n;
    r["p"] = p;
    r["anomaly_count"] = static_cast<Index>(subset.size());
    r["labeled"] = lv.size();
    r["init_seconds"] = secs(t0, t1);
    r["estep_penalize_seconds"] = secs(t1, t2);
    r["estep_rank_seconds"] = secs(t2, t3);
    r["mstep_seconds"] = secs(t4, t5);
    r["solver_iterations"] = sol.iterations;
    results.push_back(r);
  }
  fs::create_directories(spec.out_dir);
  json doc;
  doc["results"] = results;
  write_json(spec.out_dir / "bench.json", doc);
  write_manifest(spec, "bench", {"bench.json"});
}

RunSpec make_run_spec(const std::string& config_path, uint64_t seed,
                      const std::string& out_dir, const std::string& method,
                      int workers, const std::vector<std::string>& overrides) {
  RunSpec spec;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ValidationError("cannot open config " + config_path);
    try {
      spec.config = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError("config " + config_path + ": " + e.what());
    }
    spec.base_dir = fs::path(config_path).parent_path();
    if (spec.base_dir.empty()) spec.base_dir = ".";
  } else {
    spec.config = json::object();
  }
  if (!spec.config.is_object()) {
    throw ValidationError("config must be a JSON object");
  }
  for (const std::string& kv : overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("override must look like section.key=value: " + kv);
    }
    std::string path = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;  // bare strings stay strings
    }
    json* node = &spec.config;
    size_t start = 0;
    for (;;) {
      size_t dot = path.find('.', start);
      std::string key = path.substr(start, dot - start);
      if (key.empty()) {
        throw ValidationError("override has an empty key segment: " + kv);
      }
      if (dot == std::string::npos) {
        (*node)[key] = parsed;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
  spec.seed = seed;
  spec.out_dir = out_dir;
  spec.method = method;
  spec.workers = workers;
  return spec;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"latent anomaly detection with utility classification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string method = "latlapmed";
  uint64_t seed = 0;
  int workers = 1;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "root seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads");
    sub->add_option("--set", overrides,
                    "override a config key, e.g. --set fit.phi=0.06");
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(sim);
  CLI::App* fit = app.add_subcommand("fit", "fit one model");
  add_common(fit);
  fit->add_option("--method", method, "latlapmed | two_stage | lapmed_oracle");
  CLI::App* pred = app.add_subcommand("predict", "score a dataset with a model");
  add_common(pred);
  CLI::App* sweep = app.add_subcommand("sweep", "phi sweep across trials");
  add_common(sweep);
  CLI::App* bench = app.add_subcommand("bench", "time pipeline stages");
  add_common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunSpec spec =
        make_run_spec(config_path, seed, out_dir, method, workers, overrides);
    if (sim->parsed()) {
      cmd_simulate(spec);
    } else if (fit->parsed()) {
      cmd_fit(spec);
    } else if (pred->parsed()) {
      cmd_predict(spec);
    } else if (sweep->parsed()) {
      cmd_sweep(spec);
    } else if (bench->parsed()) {
      cmd_bench(spec);
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace latlapmed::cli
