// quqcd: build pre-change-only PVMs, induce classical streams from quantum
// change-point scenarios, run windowed-CUSUM detection, and verify estimator
// conditions and delay/false-alarm tradeoffs by Monte Carlo.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quqcd/audit.hpp"
#include "quqcd/density.hpp"
#include "quqcd/detectors.hpp"
#include "quqcd/entropy.hpp"
#include "quqcd/schur.hpp"
#include "quqcd/sim.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string full_precision(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return json(v);
  return json();
}

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw quqcd::Error(quqcd::ErrorKind::BadInput,
                         "cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw quqcd::Error(quqcd::ErrorKind::BadInput, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       "malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

std::vector<double> parse_double_list(const std::string& s, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw quqcd::Error(quqcd::ErrorKind::BadInput,
                         std::string(flag) + ": cannot parse \"" + item + "\"");
    }
  }
  if (out.empty())
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       std::string(flag) + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* flag) {
  std::vector<int> out;
  for (double v : parse_double_list(s, flag)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw quqcd::Error(quqcd::ErrorKind::BadInput,
                         std::string(flag) + ": expected integers");
    out.push_back(i);
  }
  return out;
}

quqcd::DetectorKind parse_detector(const std::string& s) {
  if (s == "nwla") return quqcd::DetectorKind::Nwla;
  if (s == "cusum") return quqcd::DetectorKind::KnownQ;
  throw quqcd::Error(quqcd::ErrorKind::BadInput,
                     "detector must be \"nwla\" or \"cusum\"");
}

/// Resolved scenario fields, echoed into every output so the run can be
/// replayed bitwise from its own metadata.
json scenario_echo(const quqcd::ScenarioConfig& sc,
                   const quqcd::CompiledScenario& cs) {
  json j;
  j["rho"] = quqcd::density_to_json(sc.rho);
  j["sigma"] = quqcd::density_to_json(sc.sigma);
  if (cs.nu) j["nu"] = *cs.nu; else j["nu"] = "none";
  j["ell"] = cs.ell;
  j["w"] = cs.w;
  if (cs.threshold) j["h"] = *cs.threshold;
  if (cs.target_tfa) j["target_tfa"] = *cs.target_tfa;
  if (cs.detector) j["detector"] = quqcd::to_string(*cs.detector);
  j["trials"] = cs.trials;
  j["max_steps"] = cs.max_steps;
  j["seed"] = cs.seed;
  return j;
}

struct ScenarioArgs {
  std::string scenario_path;
  std::string from_config;
  std::string detector_flag;
  std::int64_t trials_flag = 0;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;
};

/// Loads a scenario either from --scenario or from the "config" object of a
/// previously written summary (--from-config). Flags override file fields.
std::pair<quqcd::ScenarioConfig, json> load_scenario(const ScenarioArgs& args,
                                                     const char* subcommand) {
  json src;
  if (!args.from_config.empty()) {
    json recorded = read_json_file(args.from_config);
    src = recorded.contains("config") ? recorded["config"] : recorded;
  } else if (!args.scenario_path.empty()) {
    src = read_json_file(args.scenario_path);
  } else {
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       std::string(subcommand) +
                           " needs --scenario or --from-config");
  }
  quqcd::ScenarioConfig config = quqcd::scenario_from_json(src);
  if (!args.detector_flag.empty())
    config.detector = parse_detector(args.detector_flag);
  if (args.trials_flag > 0) config.trials = args.trials_flag;
  if (args.seed_given) {
    config.seed = args.seed_flag;
  } else if (!src.contains("seed")) {
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       std::string(subcommand) +
                           " is stochastic: pass --seed or put \"seed\" in the "
                           "scenario file");
  }
  return {std::move(config), std::move(src)};
}

json probs_json(const quqcd::ProbabilityVector& p) {
  json j = json::array();
  for (double v : p.probs) j.push_back(v);
  return j;
}

json labels_json(const quqcd::ProbabilityVector& p) {
  json j = json::array();
  for (const auto& l : p.labels) j.push_back(l);
  return j;
}

// ---------------------------------------------------------------- pvm-build

int cmd_pvm_build(const std::string& rho_path, int ell, bool type_only,
                  const std::string& out_path) {
  const quqcd::DensityOperator rho = quqcd::load_density(rho_path);
  const quqcd::Pvm pvm = type_only ? quqcd::type_pvm(rho, ell)
                                   : quqcd::schur_pvm(rho, ell);
  json report;
  report["command"] = "pvm-build";
  report["config"] = {{"rho", quqcd::density_to_json(rho)},
                      {"ell", ell},
                      {"type_only", type_only}};
  report["ell"] = pvm.ell;
  report["b"] = pvm.b;
  report["outcome_count"] = pvm.size();
  report["bound"] = pvm.count_bound();
  json labels = json::array(), ranks = json::array(), classes = json::array();
  for (const auto& l : pvm.labels) labels.push_back(l.str());
  for (auto r : pvm.ranks) ranks.push_back(r);
  for (const auto& c : pvm.classes) {
    json types = json::array();
    for (const auto& t : c.member_types) types.push_back(t);
    classes.push_back({{"value", c.value},
                       {"degeneracy", c.degeneracy},
                       {"member_types", types}});
  }
  report["labels"] = labels;
  report["ranks"] = ranks;
  report["classes"] = classes;
  report["completeness_residual"] = pvm.completeness_residual();

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    atomic_write(out_path, text);
    std::cout << "pvm-build: " << pvm.size() << " outcomes (bound "
              << pvm.count_bound() << ") -> " << out_path << "\n";
  }
  return 0;
}

// --------------------------------------------------------------- entropy-gap

int cmd_entropy_gap(const std::string& rho_path, const std::string& sigma_path,
                    int ell_max, const std::string& out_path) {
  const quqcd::DensityOperator rho = quqcd::load_density(rho_path);
  const quqcd::DensityOperator sigma = quqcd::load_density(sigma_path);
  const auto rows = quqcd::entropy_gap_sweep(rho, sigma, ell_max);

  json config = {{"rho", quqcd::density_to_json(rho)},
                 {"sigma", quqcd::density_to_json(sigma)},
                 {"ell_max", ell_max}};
  std::string csv = "# config: " + config.dump() + "\n";
  csv += "ell,normalized_divergence,quantum_relative_entropy,gap\n";
  for (const auto& row : rows) {
    csv += std::to_string(row.ell) + "," +
           full_precision(row.normalized_divergence) + "," +
           full_precision(row.quantum_re) + "," +
           full_precision(row.quantum_re - row.normalized_divergence) + "\n";
  }
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    atomic_write(out_path, csv);
    std::cout << "entropy-gap: " << rows.size() << " rows -> " << out_path
              << "\n";
  }
  return 0;
}

// -------------------------------------------------------------------- induce

int cmd_induce(const std::string& rho_path, const std::string& sigma_path,
               int ell, bool type_only, const std::string& out_path) {
  const quqcd::DensityOperator rho = quqcd::load_density(rho_path);
  const quqcd::DensityOperator sigma = quqcd::load_density(sigma_path);
  auto pvm = std::make_shared<const quqcd::Pvm>(
      type_only ? quqcd::type_pvm(rho, ell) : quqcd::schur_pvm(rho, ell));
  const quqcd::InducedModel model = quqcd::induce(pvm, rho, sigma);

  json report;
  report["command"] = "induce";
  report["config"] = {{"rho", quqcd::density_to_json(rho)},
                      {"sigma", quqcd::density_to_json(sigma)},
                      {"ell", ell},
                      {"type_only", type_only}};
  report["ell"] = ell;
  report["labels"] = labels_json(model.pre);
  report["p"] = probs_json(model.pre);
  report["q"] = probs_json(model.post);
  json hybrids = json::array();
  for (const auto& h : model.hybrids) hybrids.push_back(probs_json(h));
  report["hybrids"] = hybrids;
  report["gamma_min"] = model.gamma_min;
  report["block_divergence"] =
      finite_or_null(quqcd::classical_relative_entropy(model.post, model.pre));
  report["quantum_relative_entropy"] =
      finite_or_null(quqcd::quantum_relative_entropy(sigma, rho));

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    atomic_write(out_path, text);
    std::cout << "induce: " << model.pre.size() << " outcomes -> " << out_path
              << "\n";
  }
  return 0;
}

// -------------------------------------------------------------------- detect

std::vector<std::string> read_stream_file(const fs::path& path,
                                          const std::string& csv_column) {
  std::ifstream in(path);
  if (!in)
    throw quqcd::Error(quqcd::ErrorKind::BadInput, "cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (csv_column.empty()) {
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      if (!line.empty()) out.push_back(line);
    }
    return out;
  }
  if (!std::getline(in, line))
    throw quqcd::Error(quqcd::ErrorKind::BadInput, "stream CSV is empty");
  while (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == csv_column) col = i;
  if (col == header.size())
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       "stream CSV has no column \"" + csv_column + "\"");
  while (std::getline(in, line)) {
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (col >= cells.size())
      throw quqcd::Error(quqcd::ErrorKind::BadInput,
                         "stream CSV row is missing column \"" + csv_column +
                             "\"");
    out.push_back(cells[col]);
  }
  return out;
}

int cmd_detect(const std::string& model_path, const std::string& stream_path,
               const std::string& csv_column, double h_flag, bool h_given,
               int w_flag, const std::string& detector_flag,
               std::int64_t max_steps_flag, const std::string& trace_path,
               const std::string& out_path) {
  const json m = read_json_file(model_path);
  if (!m.contains("labels") || !m.contains("p"))
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       "model needs \"labels\" and \"p\"");
  quqcd::ProbabilityVector pre;
  pre.labels = m["labels"].get<std::vector<std::string>>();
  pre.probs = m["p"].get<std::vector<double>>();
  pre.validate();

  std::optional<quqcd::ProbabilityVector> post;
  if (m.contains("q") && !m["q"].is_null()) {
    quqcd::ProbabilityVector q;
    q.labels = pre.labels;
    q.probs = m["q"].get<std::vector<double>>();
    q.validate();
    post = std::move(q);
  }

  std::string kind_name;
  if (!detector_flag.empty()) kind_name = detector_flag;
  else if (m.contains("detector")) kind_name = m["detector"].get<std::string>();
  else kind_name = post ? "cusum" : "nwla";
  const quqcd::DetectorKind kind = parse_detector(kind_name);
  if (kind == quqcd::DetectorKind::KnownQ && !post)
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       "cusum detector needs \"q\" in the model");

  int w = w_flag;
  if (w <= 0 && m.contains("w")) w = m["w"].get<int>();
  if (kind == quqcd::DetectorKind::Nwla && w <= 0)
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       "nwla detector needs --w or \"w\" in the model");

  double h = h_flag;
  if (!h_given) {
    if (!m.contains("h"))
      throw quqcd::Error(quqcd::ErrorKind::BadInput,
                         "pass --h or put \"h\" in the model");
    h = m["h"].get<double>();
  }

  const auto stream = read_stream_file(stream_path, csv_column);
  if (stream.empty())
    throw quqcd::Error(quqcd::ErrorKind::BadInput, "stream is empty");
  std::int64_t max_steps = max_steps_flag > 0
                               ? std::min<std::int64_t>(max_steps_flag,
                                                        stream.size())
                               : static_cast<std::int64_t>(stream.size());

  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < pre.labels.size(); ++i)
    index[pre.labels[i]] = static_cast<int>(i);
  std::size_t cursor = 0;
  auto gen = [&]() {
    const std::string& label = stream[cursor++];
    auto it = index.find(label);
    if (it == index.end())
      throw quqcd::Error(quqcd::ErrorKind::UnknownOutcome,
                         "stream label \"" + label + "\" is not an outcome");
    return it->second;
  };

  quqcd::StoppingReport rep;
  const bool want_trace = !trace_path.empty();
  if (kind == quqcd::DetectorKind::KnownQ) {
    quqcd::CusumDetector det(pre, *post, h);
    rep = quqcd::run_to_stop(det, gen, max_steps, want_trace);
  } else {
    quqcd::NwlaDetector det(pre, w, h);
    rep = quqcd::run_to_stop(det, gen, max_steps, want_trace);
  }

  if (want_trace) {
    std::string csv = "step,statistic\n";
    for (std::size_t i = 0; i < rep.statistic_trace->size(); ++i)
      csv += std::to_string(i + 1) + "," +
             full_precision((*rep.statistic_trace)[i]) + "\n";
    atomic_write(trace_path, csv);
  }

  json report;
  report["command"] = "detect";
  report["config"] = {{"model", model_path},
                      {"stream", stream_path},
                      {"detector", kind_name},
                      {"h", h},
                      {"max_steps", max_steps}};
  if (kind == quqcd::DetectorKind::Nwla) report["config"]["w"] = w;
  report["stopped"] = rep.stopped;
  report["stopping_step"] = rep.stopping_step;
  report["censored"] = rep.censored;
  report["steps_run"] = rep.steps_run;
  report["final_statistic"] = rep.final_statistic;
  report["threshold"] = rep.threshold;

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    atomic_write(out_path, text);
    std::cout << "detect: " << (rep.stopped ? "stopped at step " +
                                                  std::to_string(rep.stopping_step)
                                            : "no stop") << " -> " << out_path
              << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------- calibrate

int cmd_calibrate(const ScenarioArgs& args, double target_flag,
                  unsigned threads, const std::string& out_path) {
  auto [config, src] = load_scenario(args, "calibrate");
  if (target_flag > 0.0) config.target_tfa = target_flag;
  if (!config.target_tfa)
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       "calibrate needs --target or scenario target_tfa");
  const quqcd::CompiledScenario cs = quqcd::compile_scenario(config);
  const quqcd::DetectorKind kind =
      cs.detector.value_or(quqcd::DetectorKind::Nwla);

  const quqcd::CalibrationResult result = quqcd::calibrate_threshold(
      cs, *cs.target_tfa, cs.trials, kind, threads);

  json report;
  report["command"] = "calibrate";
  report["config"] = scenario_echo(config, cs);
  report["config"]["detector"] = quqcd::to_string(kind);
  report["threshold"] = result.threshold;
  report["achieved_tfa"] = result.achieved_tfa;
  report["achieved_se"] = result.achieved_se;
  report["iterations"] = result.iterations;
  report["converged"] = result.converged;

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    atomic_write(out_path, text);
    std::cout << "calibrate: h=" << full_precision(result.threshold)
              << " tfa=" << full_precision(result.achieved_tfa) << " -> "
              << out_path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- conditions

int cmd_conditions(const std::string& family, const std::string& w_list,
                   int trials, std::uint64_t seed, double multiplier,
                   double floor_coeff, unsigned threads,
                   const std::string& from_config, const std::string& csv_path,
                   const std::string& json_path) {
  quqcd::AuditConfig config;
  if (!from_config.empty()) {
    json recorded = read_json_file(from_config);
    const json& c = recorded.contains("config") ? recorded["config"] : recorded;
    config.windows = c["windows"].get<std::vector<int>>();
    config.family = c["family"] == "random-floor" ? quqcd::AuditFamily::RandomFloor
                                                  : quqcd::AuditFamily::Uniform;
    config.trials = c["trials"].get<int>();
    config.seed = c["seed"].get<std::uint64_t>();
    config.support_multiplier = c["support_multiplier"].get<double>();
    config.floor_coefficient = c["floor_coefficient"].get<double>();
  } else {
    config.windows = parse_int_list(w_list, "--w-list");
    if (family == "uniform") config.family = quqcd::AuditFamily::Uniform;
    else if (family == "random-floor") config.family = quqcd::AuditFamily::RandomFloor;
    else
      throw quqcd::Error(quqcd::ErrorKind::BadInput,
                         "--family must be uniform or random-floor");
    config.trials = trials;
    config.seed = seed;
    config.support_multiplier = multiplier;
    config.floor_coefficient = floor_coeff;
  }
  config.threads = threads;

  const quqcd::AuditReport report = quqcd::run_audit(config);

  std::string csv = "w,d,kl_mean,kl_se,m2_mean,m2_se\n";
  for (const auto& row : report.rows) {
    csv += std::to_string(row.w) + "," + std::to_string(row.d) + "," +
           full_precision(row.kl_mean) + "," + full_precision(row.kl_se) + "," +
           full_precision(row.m2_mean) + "," + full_precision(row.m2_se) + "\n";
  }
  atomic_write(csv_path, csv);

  json summary;
  summary["command"] = "conditions";
  summary["config"] = {
      {"family", config.family == quqcd::AuditFamily::Uniform ? "uniform"
                                                              : "random-floor"},
      {"windows", config.windows},
      {"trials", config.trials},
      {"seed", config.seed},
      {"support_multiplier", config.support_multiplier},
      {"floor_coefficient", config.floor_coefficient}};
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"w", row.w},
                    {"d", row.d},
                    {"kl_mean", row.kl_mean},
                    {"kl_se", row.kl_se},
                    {"m2_mean", row.m2_mean},
                    {"m2_se", row.m2_se},
                    {"kl_bound", row.kl_bound},
                    {"m2_bound", row.m2_bound},
                    {"p_min", row.p_min},
                    {"floor_ok", row.floor_ok}});
  }
  summary["rows"] = rows;
  summary["fit_performed"] = report.fit_performed;
  if (report.fit_performed) {
    summary["beta1"] = report.beta1;
    summary["beta1_se"] = report.beta1_se;
    summary["beta2"] = report.beta2;
    summary["beta2_se"] = report.beta2_se;
  }
  atomic_write(json_path, summary.dump(2) + "\n");

  std::cout << "conditions: " << report.rows.size() << " rows -> " << csv_path
            << ", " << json_path;
  if (report.fit_performed)
    std::cout << " (beta1=" << full_precision(report.beta1)
              << ", beta2=" << full_precision(report.beta2) << ")";
  std::cout << "\n";
  return 0;
}

// --------------------------------------------------------------------- sweep

int cmd_sweep(const ScenarioArgs& args, const std::string& tfa_list,
              const std::string& h_list, unsigned threads,
              const std::string& curve_path, const std::string& summary_path) {
  auto [config, src] = load_scenario(args, "sweep");

  std::vector<double> grid;
  bool calibrated = true;
  if (!args.from_config.empty()) {
    const json& c = src;
    if (!c.contains("grid") || !c.contains("grid_type"))
      throw quqcd::Error(quqcd::ErrorKind::BadInput,
                         "recorded config lacks grid/grid_type");
    grid = c["grid"].get<std::vector<double>>();
    calibrated = c["grid_type"] == "tfa";
  } else if (!tfa_list.empty() && h_list.empty()) {
    grid = parse_double_list(tfa_list, "--tfa");
    calibrated = true;
  } else if (tfa_list.empty() && !h_list.empty()) {
    grid = parse_double_list(h_list, "--h");
    calibrated = false;
  } else {
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       "sweep needs exactly one of --tfa or --h");
  }

  const quqcd::CompiledScenario cs = quqcd::compile_scenario(config);
  const quqcd::DetectorKind kind =
      cs.detector.value_or(quqcd::DetectorKind::Nwla);
  const quqcd::TradeoffCurve curve =
      calibrated ? quqcd::tradeoff_targets(cs, grid, cs.trials, kind, threads)
                 : quqcd::tradeoff_thresholds(cs, grid, cs.trials, kind, threads);

  std::string csv = "h,tfa_mean,tfa_se,delay_mean,delay_se,censor_frac\n";
  for (const auto& row : curve.rows) {
    csv += full_precision(row.threshold) + "," + full_precision(row.tfa_mean) +
           "," + full_precision(row.tfa_se) + "," +
           full_precision(row.delay_mean) + "," + full_precision(row.delay_se) +
           "," + full_precision(row.censor_fraction) + "\n";
  }
  atomic_write(curve_path, csv);

  json summary;
  summary["command"] = "sweep";
  summary["config"] = scenario_echo(config, cs);
  summary["config"]["detector"] = quqcd::to_string(kind);
  summary["config"]["grid"] = grid;
  summary["config"]["grid_type"] = calibrated ? "tfa" : "h";
  summary["ell"] = cs.ell;
  summary["w"] = cs.w;
  summary["d"] = cs.d;
  summary["block_divergence"] = cs.block_divergence;
  summary["quantum_relative_entropy"] = finite_or_null(cs.quantum_re);
  summary["entropy_gap"] =
      finite_or_null(cs.quantum_re -
                     cs.block_divergence / static_cast<double>(cs.ell));
  summary["units"] = {{"tfa", "blocks"}, {"delay", "copies"}};
  json rows = json::array();
  for (const auto& row : curve.rows) {
    json r = {{"h", row.threshold},
              {"tfa_mean", row.tfa_mean},
              {"tfa_se", row.tfa_se},
              {"delay_mean", finite_or_null(row.delay_mean)},
              {"delay_se", finite_or_null(row.delay_se)},
              {"detected", row.detected},
              {"false_alarms", row.false_alarms},
              {"censored", row.censored},
              {"censor_fraction", row.censor_fraction},
              {"unreliable", row.unreliable}};
    if (calibrated) r["target_tfa"] = row.target_tfa;
    rows.push_back(r);
  }
  summary["rows"] = rows;
  summary["fitted_slope"] = curve.slope;
  summary["fitted_slope_se"] = curve.slope_se;
  summary["fitted_intercept"] = curve.intercept;
  summary["achievable_slope"] = curve.achievable_slope;
  summary["converse_slope"] = finite_or_null(curve.converse_slope);
  atomic_write(summary_path, summary.dump(2) + "\n");

  std::cout << "sweep: " << curve.rows.size() << " rows, slope="
            << full_precision(curve.slope) << " -> " << curve_path << ", "
            << summary_path << "\n";
  return 0;
}

// -------------------------------------------------------------------- report

int cmd_report(const std::string& summary_path) {
  const json s = read_json_file(summary_path);
  if (!s.contains("command") || s["command"] != "sweep")
    throw quqcd::Error(quqcd::ErrorKind::BadInput,
                       "report reads a sweep summary.json");
  std::ostringstream out;
  const json& c = s["config"];
  out << "sweep report: detector=" << c.value("detector", "?")
      << " ell=" << s["ell"] << " w=" << s["w"] << " d=" << s["d"] << "\n";
  out << "  fitted slope " << s["fitted_slope"].get<double>() << " +- "
      << s["fitted_slope_se"].get<double>() << " copies/nat"
      << " (achievable " << s["achievable_slope"].get<double>();
  if (!s["converse_slope"].is_null())
    out << ", converse " << s["converse_slope"].get<double>();
  out << ")\n";
  int warned = 0;
  for (const auto& row : s["rows"]) {
    out << "  h=" << row["h"].get<double>()
        << " tfa=" << row["tfa_mean"].get<double>() << "+-"
        << row["tfa_se"].get<double>();
    if (!row["delay_mean"].is_null())
      out << " delay=" << row["delay_mean"].get<double>() << "+-"
          << row["delay_se"].get<double>();
    else
      out << " delay=n/a";
    out << " censor=" << row["censor_fraction"].get<double>() << "\n";
    if (row.value("unreliable", false)) ++warned;
  }
  if (warned > 0)
    out << "  warning: " << warned
        << " row(s) exceed 1% censoring; raise max_steps or trials\n";
  std::cout << out.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quqcd: quantum universal quickest change detection toolkit"};
  app.require_subcommand(1);

  // pvm-build
  std::string pb_rho, pb_out;
  int pb_ell = 1;
  bool pb_type_only = false;
  auto* pb = app.add_subcommand("pvm-build",
                                "Build the pre-change-only block PVM");
  pb->add_option("--rho", pb_rho, "pre-change density JSON")->required();
  pb->add_option("--ell", pb_ell, "block length")->required();
  pb->add_flag("--type-only", pb_type_only,
               "eigenvalue classes only (ablation baseline)");
  pb->add_option("--out", pb_out, "output JSON path (default: stdout)");

  // entropy-gap
  std::string eg_rho, eg_sigma, eg_out;
  int eg_ell_max = 1;
  auto* eg = app.add_subcommand(
      "entropy-gap", "Normalized induced divergence vs block length");
  eg->add_option("--rho", eg_rho, "pre-change density JSON")->required();
  eg->add_option("--sigma", eg_sigma, "post-change density JSON")->required();
  eg->add_option("--ell-max", eg_ell_max, "largest block length")->required();
  eg->add_option("--out", eg_out, "output CSV path (default: stdout)");

  // induce
  std::string in_rho, in_sigma, in_out;
  int in_ell = 1;
  bool in_type_only = false;
  auto* in = app.add_subcommand("induce",
                                "Induced block distributions P, Q, hybrids");
  in->add_option("--rho", in_rho, "pre-change density JSON")->required();
  in->add_option("--sigma", in_sigma, "post-change density JSON")->required();
  in->add_option("--ell", in_ell, "block length")->required();
  in->add_flag("--type-only", in_type_only, "eigenvalue classes only");
  in->add_option("--out", in_out, "output JSON path (default: stdout)");

  // detect
  std::string dt_model, dt_stream, dt_column, dt_detector, dt_trace, dt_out;
  double dt_h = 0.0;
  int dt_w = 0;
  std::int64_t dt_max_steps = 0;
  auto* dt = app.add_subcommand("detect", "Run a detector over a recorded stream");
  dt->set_help_flag("--help", "print help");
  dt->add_option("--model", dt_model, "model JSON (labels, p, optional q/w/h)")
      ->required();
  dt->add_option("--stream", dt_stream, "outcome stream file")->required();
  dt->add_option("--csv-column", dt_column, "read labels from this CSV column");
  auto* dt_h_opt = dt->add_option("--h", dt_h, "threshold (overrides model)");
  dt->add_option("--w", dt_w, "window in blocks (overrides model)");
  dt->add_option("--detector", dt_detector, "nwla or cusum");
  dt->add_option("--max-steps", dt_max_steps, "cap on consumed observations");
  dt->add_option("--trace", dt_trace, "write per-step statistic CSV here");
  dt->add_option("--out", dt_out, "output JSON path (default: stdout)");

  // calibrate
  ScenarioArgs cal_args;
  double cal_target = 0.0;
  unsigned cal_threads = 1;
  std::string cal_out;
  auto* cal = app.add_subcommand("calibrate",
                                 "Bisect the threshold to a target mean time "
                                 "to false alarm");
  cal->add_option("--scenario", cal_args.scenario_path, "scenario JSON");
  cal->add_option("--from-config", cal_args.from_config,
                  "replay a recorded resolved configuration");
  cal->add_option("--target", cal_target, "target tfa in blocks");
  cal->add_option("--detector", cal_args.detector_flag, "nwla or cusum");
  cal->add_option("--trials", cal_args.trials_flag, "Monte Carlo trials");
  auto* cal_seed =
      cal->add_option("--seed", cal_args.seed_flag, "stream seed");
  cal->add_option("--threads", cal_threads, "worker threads");
  cal->add_option("--out", cal_out, "output JSON path (default: stdout)");

  // conditions
  std::string cond_family = "uniform", cond_wlist, cond_from;
  std::string cond_csv = "conditions.csv", cond_json = "conditions.json";
  int cond_trials = 10000;
  std::uint64_t cond_seed = 0;
  double cond_mult = 1.0, cond_floor = 0.5;
  unsigned cond_threads = 1;
  auto* cond = app.add_subcommand(
      "conditions", "Monte Carlo audit of the kernel estimator conditions");
  cond->add_option("--family", cond_family, "uniform or random-floor");
  cond->add_option("--w-list", cond_wlist, "comma-separated windows");
  cond->add_option("--trials", cond_trials, "trials per window (>= 100)");
  auto* cond_seed_opt = cond->add_option("--seed", cond_seed, "stream seed");
  cond->add_option("--multiplier", cond_mult, "d = ceil(multiplier*sqrt(w))");
  cond->add_option("--floor-coeff", cond_floor,
                   "random-floor family: p_min >= coeff/sqrt(w)");
  cond->add_option("--threads", cond_threads, "worker threads");
  cond->add_option("--from-config", cond_from,
                   "replay a recorded resolved configuration");
  cond->add_option("--out-csv", cond_csv, "rows CSV path");
  cond->add_option("--out-json", cond_json, "summary JSON path");

  // sweep
  ScenarioArgs sw_args;
  std::string sw_tfa, sw_h;
  unsigned sw_threads = 1;
  std::string sw_curve = "curve.csv", sw_summary = "summary.json";
  auto* sw = app.add_subcommand(
      "sweep", "Delay vs false-alarm tradeoff over a threshold/target grid");
  sw->set_help_flag("--help", "print help");
  sw->add_option("--scenario", sw_args.scenario_path, "scenario JSON");
  sw->add_option("--from-config", sw_args.from_config,
                 "replay a recorded resolved configuration");
  sw->add_option("--tfa", sw_tfa, "comma-separated tfa targets (blocks)");
  sw->add_option("--h", sw_h, "comma-separated thresholds");
  sw->add_option("--detector", sw_args.detector_flag, "nwla or cusum");
  sw->add_option("--trials", sw_args.trials_flag, "Monte Carlo trials");
  auto* sw_seed = sw->add_option("--seed", sw_args.seed_flag, "stream seed");
  sw->add_option("--threads", sw_threads, "worker threads");
  sw->add_option("--curve", sw_curve, "curve CSV path");
  sw->add_option("--summary", sw_summary, "summary JSON path");

  // report
  std::string rp_summary;
  auto* rp = app.add_subcommand("report", "Render a sweep summary as text");
  rp->add_option("--summary", rp_summary, "summary JSON from sweep")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (pb->parsed())
      return cmd_pvm_build(pb_rho, pb_ell, pb_type_only, pb_out);
    if (eg->parsed())
      return cmd_entropy_gap(eg_rho, eg_sigma, eg_ell_max, eg_out);
    if (in->parsed())
      return cmd_induce(in_rho, in_sigma, in_ell, in_type_only, in_out);
    if (dt->parsed())
      return cmd_detect(dt_model, dt_stream, dt_column, dt_h,
                        dt_h_opt->count() > 0, dt_w, dt_detector, dt_max_steps,
                        dt_trace, dt_out);
    if (cal->parsed()) {
      cal_args.seed_given = cal_seed->count() > 0;
      return cmd_calibrate(cal_args, cal_target, cal_threads, cal_out);
    }
    if (cond->parsed()) {
      if (cond_from.empty() && cond_seed_opt->count() == 0)
        throw quqcd::Error(quqcd::ErrorKind::BadInput,
                           "conditions is stochastic: --seed is required");
      return cmd_conditions(cond_family, cond_wlist, cond_trials, cond_seed,
                            cond_mult, cond_floor, cond_threads, cond_from,
                            cond_csv, cond_json);
    }
    if (sw->parsed()) {
      sw_args.seed_given = sw_seed->count() > 0;
      return cmd_sweep(sw_args, sw_tfa, sw_h, sw_threads, sw_curve, sw_summary);
    }
    if (rp->parsed()) return cmd_report(rp_summary);
    throw quqcd::Error(quqcd::ErrorKind::BadInput, "unknown subcommand");
  } catch (const quqcd::Error& e) {
    nlohmann::json err = {
        {"error",
         {{"kind", quqcd::to_string(e.kind())}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return quqcd::is_validation_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    nlohmann::json err = {
        {"error", {{"kind", "Internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
}
