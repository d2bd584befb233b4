// qroute: value-learning swap router for grid-coupled qubit architectures.
//
// Subcommands: gen-circuit, train, eval, bench, count-matchings.
// Global flags: --seed, --grid RxC | --graph PATH, --out DIR, --threads,
// --config PATH. Set QROUTE_LOG=quiet|info|debug (0|1|2) for verbosity.
// Exit codes: 0 success, 2 usage error, 1 runtime failure.

#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qroute/circuit.hpp"
#include "qroute/env.hpp"
#include "qroute/graph.hpp"
#include "qroute/manifest.hpp"
#include "qroute/policy.hpp"
#include "qroute/qnet.hpp"
#include "qroute/rng.hpp"
#include "qroute/trainer.hpp"

namespace {

using namespace qroute;
namespace fs = std::filesystem;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("QROUTE_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "0" || v == "quiet") return 0;
    if (v == "2" || v == "debug") return 2;
    return 1;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[qroute] " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[qroute] " << msg << '\n';
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

std::string join_out(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// ---------------------------------------------------------------- globals

struct GlobalArgs {
  uint64_t seed = 0;
  std::string grid;
  std::string graph_path;
  std::string out_dir = ".";
  int threads = 1;
  std::string config_path;
};

std::pair<int, int> parse_grid(const std::string& s) {
  const size_t x = s.find('x');
  if (x == std::string::npos || x == 0 || x + 1 == s.size())
    throw std::invalid_argument("--grid expects RxC, e.g. 4x4 (got '" + s + "')");
  try {
    size_t used = 0;
    const int rows = std::stoi(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(s);
    const int cols = std::stoi(s.substr(x + 1), &used);
    if (used != s.size() - x - 1) throw std::invalid_argument(s);
    return {rows, cols};
  } catch (const std::exception&) {
    throw std::invalid_argument("--grid expects RxC, e.g. 4x4 (got '" + s + "')");
  }
}

// Graph from --graph PATH or --grid RxC (default 4x4), plus a short
// description for manifests.
InteractionGraph resolve_graph(const GlobalArgs& g, std::string& description) {
  if (!g.graph_path.empty() && !g.grid.empty())
    throw std::invalid_argument("--grid and --graph are mutually exclusive");
  if (!g.graph_path.empty()) {
    description = g.graph_path;
    return InteractionGraph::load(g.graph_path);
  }
  const std::string spec = g.grid.empty() ? std::string("4x4") : g.grid;
  auto [rows, cols] = parse_grid(spec);
  description = "grid:" + std::to_string(rows) + "x" + std::to_string(cols);
  return InteractionGraph::grid(rows, cols);
}

LayeringMode layering_from_string(const std::string& s) {
  if (s == "sequential") return LayeringMode::kSequential;
  if (s == "backfill") return LayeringMode::kBackFill;
  throw std::invalid_argument("unknown layering mode: " + s);
}

// ------------------------------------------------------- config plumbing

nlohmann::json anneal_to_json(const AnnealSchedule& a) {
  return {{"initial_temperature", a.initial_temperature},
          {"cooling_factor", a.cooling_factor},
          {"iterations", a.iterations},
          {"restarts", a.restarts}};
}

AnnealSchedule anneal_from_json(const nlohmann::json& j, AnnealSchedule base) {
  base.initial_temperature = j.value("initial_temperature", base.initial_temperature);
  base.cooling_factor = j.value("cooling_factor", base.cooling_factor);
  base.iterations = j.value("iterations", base.iterations);
  base.restarts = j.value("restarts", base.restarts);
  return base;
}

nlohmann::json trainer_to_json(const TrainerConfig& c) {
  nlohmann::json j;
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["episodes"] = c.episodes;
  j["epsilon_start"] = c.epsilon_start;
  j["epsilon_end"] = c.epsilon_end;
  j["epsilon_decay"] = c.epsilon_decay;
  j["replay_capacity"] = c.replay_capacity;
  j["batch_size"] = c.batch_size;
  j["target_sync_period"] = c.target_sync_period;
  j["seed"] = c.seed;
  j["forced_swaps"] = c.forced_swaps;
  j["step_cap"] = c.step_cap;
  j["hidden_dims"] = c.hidden_dims;
  j["act_anneal"] = anneal_to_json(c.act_anneal);
  j["target_anneal"] = anneal_to_json(c.target_anneal);
  j["optimizer"] = {
      {"kind", c.optimizer.kind == OptimizerKind::kAdam ? "adam" : "momentum"},
      {"learning_rate", c.optimizer.learning_rate},
      {"beta1", c.optimizer.beta1},
      {"beta2", c.optimizer.beta2},
      {"epsilon", c.optimizer.epsilon},
      {"momentum", c.optimizer.momentum}};
  j["env"] = {{"reward_per_gate", c.env.reward_per_gate},
              {"cascade_firing", c.env.cascade_firing},
              {"normalization", to_string(c.env.normalization)}};
  return j;
}

TrainerConfig trainer_from_json(const nlohmann::json& j, TrainerConfig base) {
  base.alpha = j.value("alpha", base.alpha);
  base.gamma = j.value("gamma", base.gamma);
  base.episodes = j.value("episodes", base.episodes);
  base.epsilon_start = j.value("epsilon_start", base.epsilon_start);
  base.epsilon_end = j.value("epsilon_end", base.epsilon_end);
  base.epsilon_decay = j.value("epsilon_decay", base.epsilon_decay);
  base.replay_capacity = j.value("replay_capacity", base.replay_capacity);
  base.batch_size = j.value("batch_size", base.batch_size);
  base.target_sync_period = j.value("target_sync_period", base.target_sync_period);
  base.seed = j.value("seed", base.seed);
  base.forced_swaps = j.value("forced_swaps", base.forced_swaps);
  base.step_cap = j.value("step_cap", base.step_cap);
  base.hidden_dims = j.value("hidden_dims", base.hidden_dims);
  if (j.contains("act_anneal"))
    base.act_anneal = anneal_from_json(j["act_anneal"], base.act_anneal);
  if (j.contains("target_anneal"))
    base.target_anneal = anneal_from_json(j["target_anneal"], base.target_anneal);
  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    const std::string kind =
        o.value("kind", std::string(base.optimizer.kind == OptimizerKind::kAdam
                                        ? "adam"
                                        : "momentum"));
    if (kind == "adam")
      base.optimizer.kind = OptimizerKind::kAdam;
    else if (kind == "momentum")
      base.optimizer.kind = OptimizerKind::kMomentum;
    else
      throw std::invalid_argument("unknown optimizer kind: " + kind);
    base.optimizer.learning_rate = o.value("learning_rate", base.optimizer.learning_rate);
    base.optimizer.beta1 = o.value("beta1", base.optimizer.beta1);
    base.optimizer.beta2 = o.value("beta2", base.optimizer.beta2);
    base.optimizer.epsilon = o.value("epsilon", base.optimizer.epsilon);
    base.optimizer.momentum = o.value("momentum", base.optimizer.momentum);
  }
  if (j.contains("env")) {
    const auto& e = j["env"];
    base.env.reward_per_gate = e.value("reward_per_gate", base.env.reward_per_gate);
    base.env.cascade_firing = e.value("cascade_firing", base.env.cascade_firing);
    base.env.normalization = state_norm_from_string(
        e.value("normalization", to_string(base.env.normalization)));
  }
  return base;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("invalid config file " + path + ": " + e.what());
  }
}

// --------------------------------------------------------------- outputs

void write_curve_csv(const std::string& path, const std::string& manifest_name,
                     const std::vector<CurvePoint>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve file: " + path);
  out << csv_preamble(manifest_name, "episode,layers,loss,epsilon");
  for (const CurvePoint& p : curve)
    out << p.episode << ',' << p.layers << ',' << fmt(p.loss) << ','
        << fmt(p.epsilon) << '\n';
}

void write_smoothed_csv(const std::string& path,
                        const std::string& manifest_name,
                        const std::vector<CurvePoint>& curve, int window) {
  const std::vector<double> smooth = moving_average(curve, window);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve file: " + path);
  out << csv_preamble(manifest_name,
                      "episode,layers_ma" + std::to_string(window));
  for (size_t i = 0; i < curve.size(); ++i)
    out << curve[i].episode << ',' << fmt(smooth[i]) << '\n';
}

void print_report(const EvalReport& r) {
  std::cout << "policy=" << r.policy << " family=" << r.family
            << " episodes=" << r.episodes << " mean=" << fmt(r.mean)
            << " stddev=" << fmt(r.stddev) << " min=" << r.min_layers
            << " max=" << r.max_layers << " unfinished=" << r.unfinished
            << '\n';
}

// ----------------------------------------------------------- subcommands

struct GenArgs {
  std::string kind = "random";
  int qubits = 16;
  int interactions = 16;
  std::string out = "circuit.txt";
};

void cmd_gen_circuit(const GlobalArgs& g, const GenArgs& a) {
  const Circuit c = a.kind == "single-layer"
                        ? full_single_layer(a.qubits, g.seed)
                        : random_circuit(a.qubits, a.interactions, g.seed);
  c.save(a.out);
  RunManifest m;
  m.subcommand = "gen-circuit";
  m.seed = g.seed;
  m.config_json = nlohmann::json{{"kind", a.kind},
                                 {"qubits", a.qubits},
                                 {"interactions", c.interaction_count()}}
                      .dump();
  m.outputs = {a.out};
  m.save(a.out + ".manifest.json");
  log_info("wrote " + a.out + " (" + std::to_string(c.interaction_count()) +
           " interactions over " + std::to_string(c.qubit_count) + " qubits)");
}

struct TrainArgs {
  std::string family = "single-layer";
  int interactions = 16;
  TrainerConfig cli;  // receives CLI-passed values
  std::string forced = "on";
  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  double anneal_temp = 1.0, anneal_cool = 0.95;
  int anneal_iters = 150, anneal_restarts = 0;
  // option handles, to apply only what the user actually passed
  CLI::Option* o_episodes = nullptr;
  CLI::Option* o_gamma = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_eps_start = nullptr;
  CLI::Option* o_eps_end = nullptr;
  CLI::Option* o_eps_decay = nullptr;
  CLI::Option* o_replay = nullptr;
  CLI::Option* o_batch = nullptr;
  CLI::Option* o_sync = nullptr;
  CLI::Option* o_cap = nullptr;
  CLI::Option* o_hidden = nullptr;
  CLI::Option* o_forced = nullptr;
  CLI::Option* o_optimizer = nullptr;
  CLI::Option* o_lr = nullptr;
  CLI::Option* o_temp = nullptr;
  CLI::Option* o_cool = nullptr;
  CLI::Option* o_iters = nullptr;
  CLI::Option* o_restarts = nullptr;
};

TrainerConfig resolve_trainer_config(const GlobalArgs& g, const TrainArgs& a) {
  TrainerConfig cfg;
  if (!g.config_path.empty())
    cfg = trainer_from_json(load_config_file(g.config_path), cfg);
  if (a.o_episodes->count()) cfg.episodes = a.cli.episodes;
  if (a.o_gamma->count()) cfg.gamma = a.cli.gamma;
  if (a.o_alpha->count()) cfg.alpha = a.cli.alpha;
  if (a.o_eps_start->count()) cfg.epsilon_start = a.cli.epsilon_start;
  if (a.o_eps_end->count()) cfg.epsilon_end = a.cli.epsilon_end;
  if (a.o_eps_decay->count()) cfg.epsilon_decay = a.cli.epsilon_decay;
  if (a.o_replay->count()) cfg.replay_capacity = a.cli.replay_capacity;
  if (a.o_batch->count()) cfg.batch_size = a.cli.batch_size;
  if (a.o_sync->count()) cfg.target_sync_period = a.cli.target_sync_period;
  if (a.o_cap->count()) cfg.step_cap = a.cli.step_cap;
  if (a.o_hidden->count()) cfg.hidden_dims = a.cli.hidden_dims;
  if (a.o_forced->count()) cfg.forced_swaps = a.forced == "on";
  if (a.o_optimizer->count())
    cfg.optimizer.kind = a.optimizer == "adam" ? OptimizerKind::kAdam
                                               : OptimizerKind::kMomentum;
  if (a.o_lr->count()) cfg.optimizer.learning_rate = a.learning_rate;
  if (a.o_temp->count()) cfg.act_anneal.initial_temperature = a.anneal_temp;
  if (a.o_cool->count()) cfg.act_anneal.cooling_factor = a.anneal_cool;
  if (a.o_iters->count()) cfg.act_anneal.iterations = a.anneal_iters;
  if (a.o_restarts->count()) cfg.act_anneal.restarts = a.anneal_restarts;
  cfg.seed = g.seed;
  cfg.validate();
  return cfg;
}

void cmd_train(const GlobalArgs& g, const TrainArgs& a) {
  std::string graph_desc;
  const InteractionGraph graph = resolve_graph(g, graph_desc);
  const TrainerConfig cfg = resolve_trainer_config(g, a);
  const FamilySpec family = family_from_string(a.family, a.interactions);

  fs::create_directories(g.out_dir);
  const std::string manifest_name = "train.manifest.json";
  const std::string model_path = join_out(g.out_dir, "model.json");
  const std::string curve_path = join_out(g.out_dir, "curve.csv");
  const std::string smooth_path = join_out(g.out_dir, "curve_smoothed.csv");

  nlohmann::json rc;
  rc["graph"] = graph_desc;
  rc["family"] = family.name();
  rc["trainer"] = trainer_to_json(cfg);
  const std::string config_json = rc.dump();

  RunManifest m;
  m.subcommand = "train";
  m.seed = cfg.seed;
  m.config_json = config_json;
  if (!g.graph_path.empty())
    m.input_hashes.emplace_back(g.graph_path, hash_hex(hash_file(g.graph_path)));
  if (!g.config_path.empty())
    m.input_hashes.emplace_back(g.config_path,
                                hash_hex(hash_file(g.config_path)));
  m.outputs = {"model.json", "curve.csv", "curve_smoothed.csv"};
  m.save(join_out(g.out_dir, manifest_name));

  log_info("training " + family.name() + " on " + graph_desc + " for " +
           std::to_string(cfg.episodes) + " episodes (seed " +
           std::to_string(cfg.seed) + ")");

  std::vector<CurvePoint> partial;
  std::deque<int> window;
  double window_sum = 0.0;
  const auto on_episode = [&](const CurvePoint& p) {
    partial.push_back(p);
    window.push_back(p.layers);
    window_sum += p.layers;
    if (window.size() > 100) {
      window_sum -= window.front();
      window.pop_front();
    }
    std::ostringstream line;
    line << "episode " << (p.episode + 1) << '/' << cfg.episodes
         << " layers=" << p.layers
         << " ma100=" << fmt(window_sum / static_cast<double>(window.size()))
         << " loss=" << fmt(p.loss) << " epsilon=" << fmt(p.epsilon);
    if (log_level() >= 2)
      log_debug(line.str());
    else if ((p.episode + 1) % 500 == 0)
      log_info(line.str());
  };

  TrainResult result;
  try {
    result = train(graph, family, cfg, on_episode);
  } catch (const std::exception&) {
    // Keep whatever curve exists so the failure can be inspected.
    if (!partial.empty()) write_curve_csv(curve_path, manifest_name, partial);
    throw;
  }

  const ModelFile model{std::move(result.net),
                        to_string(cfg.env.normalization),
                        hash_hex(fnv1a(config_json)), config_json};
  save_model(model, model_path);
  write_curve_csv(curve_path, manifest_name, result.curve);
  write_smoothed_csv(smooth_path, manifest_name, result.curve, 100);

  if (!result.curve.empty()) {
    const size_t tenth = std::max<size_t>(1, result.curve.size() / 10);
    double early = 0.0, late = 0.0;
    for (size_t i = 0; i < tenth; ++i) {
      early += result.curve[i].layers;
      late += result.curve[result.curve.size() - 1 - i].layers;
    }
    log_info("mean layers, first 10% of episodes: " +
             fmt(early / static_cast<double>(tenth)) + ", final 10%: " +
             fmt(late / static_cast<double>(tenth)));
  }
  log_info("wrote " + model_path);
}

struct EvalArgs {
  std::string policy;
  std::string model_path;
  std::string family = "single-layer";
  int interactions = 16;
  int episodes = 100;
  std::string forced = "on";
  std::string variant = "grid";
  std::string layering = "sequential";
  AnnealSchedule anneal{1.0, 0.95, 500, 2};
  std::string trace;
  int step_cap = 0;
  std::string csv_name = "eval.csv";
};

std::unique_ptr<Policy> build_policy(const EvalArgs& a,
                                     const InteractionGraph& graph,
                                     EnvConfig& env_cfg, RunManifest& m) {
  if (a.policy == "rl") {
    if (a.model_path.empty())
      throw std::invalid_argument("--model is required when --policy rl");
    ModelFile model = load_model(a.model_path);
    if (model.net.input_dim() != graph.vertex_count())
      throw std::invalid_argument(
          "model input dimension " + std::to_string(model.net.input_dim()) +
          " does not match graph qubit count " +
          std::to_string(graph.vertex_count()));
    env_cfg.normalization = state_norm_from_string(model.normalization);
    m.input_hashes.emplace_back(a.model_path,
                                hash_hex(hash_file(a.model_path)));
    return std::make_unique<RlPolicy>(std::move(model.net), a.anneal,
                                      a.forced == "on");
  }
  if (a.policy == "random") return std::make_unique<RandomPolicy>();
  return std::make_unique<SortingNetworkPolicy>(
      sortnet_variant_from_string(a.variant),
      layering_from_string(a.layering));
}

void cmd_eval(const GlobalArgs& g, const EvalArgs& a) {
  std::string graph_desc;
  const InteractionGraph graph = resolve_graph(g, graph_desc);
  const FamilySpec family = family_from_string(a.family, a.interactions);

  fs::create_directories(g.out_dir);
  const std::string stem = fs::path(a.csv_name).stem().string();
  const std::string manifest_name = stem + ".manifest.json";
  const std::string csv_path = join_out(g.out_dir, a.csv_name);

  RunManifest m;
  m.subcommand = "eval";
  m.seed = g.seed;
  if (!g.graph_path.empty())
    m.input_hashes.emplace_back(g.graph_path, hash_hex(hash_file(g.graph_path)));

  EvalOptions options;
  options.threads = g.threads;
  options.step_cap = a.step_cap;
  options.trace_path = a.trace;
  const std::unique_ptr<Policy> policy =
      build_policy(a, graph, options.env, m);

  nlohmann::json rc;
  rc["graph"] = graph_desc;
  rc["family"] = family.name();
  rc["policy"] = policy->name();
  rc["episodes"] = a.episodes;
  rc["forced_swaps"] = a.forced == "on";
  rc["anneal"] = anneal_to_json(a.anneal);
  rc["layering"] = a.layering;
  rc["step_cap"] = a.step_cap;
  rc["threads"] = g.threads;
  m.config_json = rc.dump();
  m.outputs = {a.csv_name};
  if (!a.trace.empty()) m.outputs.push_back(a.trace);
  m.save(join_out(g.out_dir, manifest_name));

  const EvalReport report =
      evaluate(graph, *policy, family, a.episodes, g.seed, options);

  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write report file: " + csv_path);
  out << csv_preamble(manifest_name, "episode,layers,unfinished");
  for (size_t i = 0; i < report.layer_counts.size(); ++i)
    out << i << ',' << report.layer_counts[i] << ','
        << (report.finished_flags[i] ? 0 : 1) << '\n';
  print_report(report);
}

struct BenchArgs {
  std::string model_path;
  int episodes = 100;
  int interactions = 16;
  std::string forced = "on";
  std::string variant = "grid";
  std::string layering = "sequential";
  AnnealSchedule anneal{1.0, 0.95, 500, 2};
};

void cmd_bench(const GlobalArgs& g, const BenchArgs& a) {
  std::string graph_desc;
  const InteractionGraph graph = resolve_graph(g, graph_desc);

  std::vector<std::unique_ptr<Policy>> policies;
  RunManifest m;
  m.subcommand = "bench";
  m.seed = g.seed;
  EnvConfig rl_env;
  if (!a.model_path.empty()) {
    ModelFile model = load_model(a.model_path);
    if (model.net.input_dim() != graph.vertex_count())
      throw std::invalid_argument(
          "model input dimension " + std::to_string(model.net.input_dim()) +
          " does not match graph qubit count " +
          std::to_string(graph.vertex_count()));
    rl_env.normalization = state_norm_from_string(model.normalization);
    m.input_hashes.emplace_back(a.model_path,
                                hash_hex(hash_file(a.model_path)));
    policies.push_back(std::make_unique<RlPolicy>(
        std::move(model.net), a.anneal, a.forced == "on"));
  }
  policies.push_back(std::make_unique<RandomPolicy>());
  policies.push_back(std::make_unique<SortingNetworkPolicy>(
      sortnet_variant_from_string(a.variant),
      layering_from_string(a.layering)));

  const std::vector<FamilySpec> families = {
      family_from_string("single-layer", a.interactions),
      family_from_string("random", a.interactions)};

  fs::create_directories(g.out_dir);
  const std::string manifest_name = "bench.manifest.json";
  nlohmann::json rc;
  rc["graph"] = graph_desc;
  rc["episodes"] = a.episodes;
  rc["forced_swaps"] = a.forced == "on";
  rc["anneal"] = anneal_to_json(a.anneal);
  rc["interactions"] = a.interactions;
  rc["layering"] = a.layering;
  rc["threads"] = g.threads;
  m.config_json = rc.dump();
  m.outputs = {"bench.csv"};
  m.save(join_out(g.out_dir, manifest_name));

  std::ofstream out(join_out(g.out_dir, "bench.csv"));
  if (!out) throw std::runtime_error("cannot write bench.csv");
  out << csv_preamble(manifest_name,
                      "policy,family,episodes,mean,stddev,min,max,unfinished");
  EvalOptions options;
  options.threads = g.threads;
  for (const FamilySpec& family : families) {
    for (const auto& policy : policies) {
      options.env = dynamic_cast<RlPolicy*>(policy.get()) ? rl_env : EnvConfig{};
      // Same seed per cell: every policy sees identical circuits and
      // placements within a family.
      const EvalReport r =
          evaluate(graph, *policy, family, a.episodes, g.seed, options);
      out << r.policy << ',' << r.family << ',' << r.episodes << ','
          << fmt(r.mean) << ',' << fmt(r.stddev) << ',' << r.min_layers << ','
          << r.max_layers << ',' << r.unfinished << '\n';
      print_report(r);
    }
  }
  log_info("wrote " + join_out(g.out_dir, "bench.csv"));
}

void cmd_count_matchings(const GlobalArgs& g) {
  std::string graph_desc;
  const InteractionGraph graph = resolve_graph(g, graph_desc);
  std::cout << "with-empty: " << count_matchings(graph, true) << '\n'
            << "without-empty: " << count_matchings(graph, false) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-learning swap router for grid-coupled qubit architectures"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--seed", g.seed, "Master seed for all randomness");
  app.add_option("--grid", g.grid, "Grid graph as RxC (default 4x4)");
  app.add_option("--graph", g.graph_path, "Graph file (overrides --grid)");
  app.add_option("--out", g.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for evaluation")
      ->capture_default_str();
  app.add_option("--config", g.config_path, "Training config file (JSON)");

  const auto on_off = CLI::IsMember({"on", "off"});

  GenArgs gen;
  auto* gen_cmd =
      app.add_subcommand("gen-circuit", "Generate a circuit file");
  gen_cmd->fallthrough();
  gen_cmd->add_option("--kind", gen.kind, "Circuit kind")
      ->check(CLI::IsMember({"random", "single-layer"}))
      ->capture_default_str();
  gen_cmd->add_option("--qubits", gen.qubits, "Qubit count")
      ->capture_default_str();
  gen_cmd
      ->add_option("--interactions", gen.interactions,
                   "Interaction count (random kind)")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Circuit file path")
      ->capture_default_str();

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a routing policy");
  train_cmd->fallthrough();
  train_cmd->add_option("--family", ta.family, "Circuit family")
      ->check(CLI::IsMember({"single-layer", "random"}))
      ->capture_default_str();
  train_cmd
      ->add_option("--interactions", ta.interactions,
                   "Interactions per circuit (random family)")
      ->capture_default_str();
  ta.o_episodes = train_cmd->add_option("--episodes", ta.cli.episodes,
                                        "Training episodes");
  ta.o_gamma = train_cmd->add_option("--gamma", ta.cli.gamma, "Discount");
  ta.o_alpha =
      train_cmd->add_option("--alpha", ta.cli.alpha, "Soft-target mixing");
  ta.o_eps_start = train_cmd->add_option("--epsilon-start",
                                         ta.cli.epsilon_start, "Initial epsilon");
  ta.o_eps_end =
      train_cmd->add_option("--epsilon-end", ta.cli.epsilon_end, "Final epsilon");
  ta.o_eps_decay = train_cmd->add_option(
      "--epsilon-decay", ta.cli.epsilon_decay, "Per-episode epsilon factor");
  ta.o_replay = train_cmd->add_option("--replay-capacity",
                                      ta.cli.replay_capacity, "Replay size");
  ta.o_batch =
      train_cmd->add_option("--batch-size", ta.cli.batch_size, "Batch size");
  ta.o_sync = train_cmd->add_option("--target-sync", ta.cli.target_sync_period,
                                    "Updates between target syncs");
  ta.o_cap = train_cmd->add_option("--step-cap", ta.cli.step_cap,
                                   "Episode step cap (0: derive)");
  ta.o_hidden = train_cmd
                    ->add_option("--hidden", ta.cli.hidden_dims,
                                 "Hidden layer sizes, comma separated")
                    ->delimiter(',');
  ta.o_forced = train_cmd->add_option("--forced-swaps", ta.forced,
                                      "Freeze forced swaps into actions")
                    ->check(on_off);
  ta.o_optimizer = train_cmd->add_option("--optimizer", ta.optimizer,
                                         "Parameter update rule")
                       ->check(CLI::IsMember({"adam", "momentum"}));
  ta.o_lr = train_cmd->add_option("--lr", ta.learning_rate, "Learning rate");
  ta.o_temp = train_cmd->add_option("--anneal-temp", ta.anneal_temp,
                                    "Acting search initial temperature");
  ta.o_cool = train_cmd->add_option("--anneal-cool", ta.anneal_cool,
                                    "Acting search cooling factor");
  ta.o_iters = train_cmd->add_option("--anneal-iters", ta.anneal_iters,
                                     "Acting search iterations");
  ta.o_restarts = train_cmd->add_option("--anneal-restarts", ta.anneal_restarts,
                                        "Acting search restarts");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--policy", ea.policy, "Policy to run")
      ->check(CLI::IsMember({"rl", "random", "sortnet"}))
      ->required();
  eval_cmd->add_option("--model", ea.model_path, "Model file (rl policy)");
  eval_cmd->add_option("--family", ea.family, "Circuit family")
      ->check(CLI::IsMember({"single-layer", "random"}))
      ->capture_default_str();
  eval_cmd
      ->add_option("--interactions", ea.interactions,
                   "Interactions per circuit (random family)")
      ->capture_default_str();
  eval_cmd->add_option("-n,--episodes", ea.episodes, "Evaluation episodes")
      ->capture_default_str();
  eval_cmd->add_option("--forced-swaps", ea.forced, "Forced-swap constraint")
      ->check(on_off)
      ->capture_default_str();
  eval_cmd->add_option("--sortnet-variant", ea.variant, "Baseline network")
      ->check(CLI::IsMember({"grid", "chain"}))
      ->capture_default_str();
  eval_cmd->add_option("--layering", ea.layering, "Greedy layering mode")
      ->check(CLI::IsMember({"sequential", "backfill"}))
      ->capture_default_str();
  eval_cmd->add_option("--anneal-temp", ea.anneal.initial_temperature,
                       "Search initial temperature")
      ->capture_default_str();
  eval_cmd->add_option("--anneal-cool", ea.anneal.cooling_factor,
                       "Search cooling factor")
      ->capture_default_str();
  eval_cmd->add_option("--anneal-iters", ea.anneal.iterations,
                       "Search iterations")
      ->capture_default_str();
  eval_cmd->add_option("--anneal-restarts", ea.anneal.restarts,
                       "Search restarts")
      ->capture_default_str();
  eval_cmd->add_option("--trace", ea.trace,
                       "Per-step trace file (one record per line)");
  eval_cmd->add_option("--step-cap", ea.step_cap, "Episode step cap (0: derive)");
  eval_cmd->add_option("--csv", ea.csv_name, "Report file name")
      ->capture_default_str();

  BenchArgs ba;
  auto* bench_cmd =
      app.add_subcommand("bench", "Compare policies across circuit families");
  bench_cmd->fallthrough();
  bench_cmd->add_option("--model", ba.model_path,
                        "Model file (adds the rl policy)");
  bench_cmd->add_option("-n,--episodes", ba.episodes, "Episodes per cell")
      ->capture_default_str();
  bench_cmd
      ->add_option("--interactions", ba.interactions,
                   "Interactions per random circuit")
      ->capture_default_str();
  bench_cmd->add_option("--forced-swaps", ba.forced, "Forced-swap constraint")
      ->check(on_off)
      ->capture_default_str();
  bench_cmd->add_option("--sortnet-variant", ba.variant, "Baseline network")
      ->check(CLI::IsMember({"grid", "chain"}))
      ->capture_default_str();
  bench_cmd->add_option("--layering", ba.layering, "Greedy layering mode")
      ->check(CLI::IsMember({"sequential", "backfill"}))
      ->capture_default_str();
  bench_cmd->add_option("--anneal-temp", ba.anneal.initial_temperature,
                        "Search initial temperature")
      ->capture_default_str();
  bench_cmd->add_option("--anneal-cool", ba.anneal.cooling_factor,
                        "Search cooling factor")
      ->capture_default_str();
  bench_cmd->add_option("--anneal-iters", ba.anneal.iterations,
                        "Search iterations")
      ->capture_default_str();
  bench_cmd->add_option("--anneal-restarts", ba.anneal.restarts,
                        "Search restarts")
      ->capture_default_str();

  auto* count_cmd = app.add_subcommand(
      "count-matchings", "Count the valid swap layers of a graph");
  count_cmd->fallthrough();

  try {
    app.parse(argc, argv);
    if (gen_cmd->parsed()) cmd_gen_circuit(g, gen);
    if (train_cmd->parsed()) cmd_train(g, ta);
    if (eval_cmd->parsed()) cmd_eval(g, ea);
    if (bench_cmd->parsed()) cmd_bench(g, ba);
    if (count_cmd->parsed()) cmd_count_matchings(g);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
