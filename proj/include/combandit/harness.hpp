#pragma once

// Experiment orchestration: config parsing, seeded repetition fan-out across
// worker threads, checkpointed regret traces, and CSV/JSON emission.
//
// Repetition r runs with seed = base seed + r. Aggregation is a fold in
// repetition order, so results are independent of thread scheduling, and
// identical configs reproduce byte-identical outputs.

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "combandit/action_set.hpp"
#include "combandit/bandit_state.hpp"
#include "combandit/combexp.hpp"
#include "combandit/environments.hpp"
#include "combandit/kl.hpp"
#include "combandit/lower_bounds.hpp"
#include "combandit/policies.hpp"
#include "combandit/rng.hpp"

namespace combandit {

struct StructureSpec {
  std::string kind;  // m_sets | matchings | spanning_trees | disjoint_paths
  int d = 0;
  int m = 0;
  int vertices = 0;
};

struct AdversarySpec {
  std::string kind;  // constant | bernoulli
  std::vector<double> x;
  std::vector<double> means;
};

struct ExperimentConfig {
  StructureSpec structure;
  std::vector<std::string> policies;
  std::int64_t horizon = 0;
  int repetitions = 1;
  std::uint64_t seed = 0;
  std::vector<double> theta_values;  // explicit theta; empty when the pattern is used
  bool theta_pattern = false;
  double theta_a = -1.0;  // pattern: a on the canonical first arm, b elsewhere
  double theta_b = -1.0;
  RateMode rate_mode = RateMode::Practical;
  std::string mode = "stochastic";  // stochastic | adversarial
  AdversarySpec adversary;
  int checkpoints = 50;
  double index_tolerance = 1e-9;
  EpochIndex epoch_index = EpochIndex::IndexC;
  std::string traces_path;
  std::string summary_path;
  std::string epoch_counts_path;
};

struct TracePoint {
  std::int64_t round;
  double cum_regret;
};

struct EpochPoint {
  std::int64_t round;
  std::int64_t epochs;
};

struct RepTrace {
  std::string policy;
  int rep = 0;
  std::uint64_t seed = 0;
  std::vector<TracePoint> points;
  std::vector<EpochPoint> epochs;  // filled for epoch-escb only
  bool failed = false;
  std::string error;
};

struct SummaryRow {
  std::string policy;
  std::int64_t round;
  double mean;
  double half_width;  // 1.96 * sample stdev / sqrt(repetitions)
  int repetitions;
};

struct ExperimentResult {
  std::vector<std::int64_t> checkpoints;
  std::vector<RepTrace> traces;  // policy-major, repetitions ascending
  std::vector<SummaryRow> summary;
};

inline const std::vector<std::string>& known_policies() {
  static const std::vector<std::string> ids{"escb1", "escb2", "epoch-escb",
                                            "cucb",  "llr",   "combexp"};
  return ids;
}

inline ActionSet make_action_set(const StructureSpec& spec) {
  if (spec.kind == "m_sets") return ActionSet::m_sets(spec.d, spec.m);
  if (spec.kind == "matchings") return ActionSet::bipartite_matchings(spec.m);
  if (spec.kind == "spanning_trees") return ActionSet::spanning_trees(spec.vertices);
  if (spec.kind == "disjoint_paths") return ActionSet::disjoint_paths(spec.d, spec.m);
  throw std::invalid_argument("config.structure.kind: unknown kind '" + spec.kind + "'");
}

// The (a, b) pattern places a on the support of the canonical first arm and b
// everywhere else, making that arm the unique best one.
inline std::vector<double> resolve_theta(const ExperimentConfig& cfg, const ActionSet& set) {
  if (cfg.theta_pattern) {
    std::vector<double> theta(static_cast<std::size_t>(set.dimension()), cfg.theta_b);
    for (int i : set.arms().front().indices) theta[static_cast<std::size_t>(i)] = cfg.theta_a;
    return theta;
  }
  if (static_cast<int>(cfg.theta_values.size()) != set.dimension())
    throw std::invalid_argument("config.theta.values: length must match the dimension");
  for (double t : cfg.theta_values)
    if (!(t >= 0.0 && t <= 1.0))
      throw std::invalid_argument("config.theta.values: entries must lie in [0,1]");
  return cfg.theta_values;
}

// Geometrically spaced reporting rounds; always ends at the horizon.
inline std::vector<std::int64_t> geometric_checkpoints(std::int64_t horizon, int count) {
  if (horizon < 1) throw std::invalid_argument("checkpoints: horizon must be >= 1");
  if (count < 1) throw std::invalid_argument("checkpoints: count must be >= 1");
  std::vector<std::int64_t> out;
  for (int i = 1; i <= count; ++i) {
    const double exponent = static_cast<double>(i) / static_cast<double>(count);
    auto v = static_cast<std::int64_t>(
        std::llround(std::pow(static_cast<double>(horizon), exponent)));
    v = std::clamp<std::int64_t>(v, 1, horizon);
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  if (out.back() != horizon) out.push_back(horizon);
  return out;
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                            const std::string& path) {
  if (!j.contains(key))
    throw std::invalid_argument("config." + path + ": missing required field");
  return j.at(key);
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key) {
  return require_field(j, key, key);
}

template <typename T>
T field_as(const nlohmann::json& j, const std::string& name) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("config." + name + ": wrong type");
  }
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;

  const auto& structure = detail::require_field(j, "structure");
  cfg.structure.kind = detail::field_as<std::string>(
      detail::require_field(structure, "kind", "structure.kind"), "structure.kind");
  auto structure_int = [&](const char* name) {
    const std::string path = std::string("structure.") + name;
    return detail::field_as<int>(detail::require_field(structure, name, path), path);
  };
  if (cfg.structure.kind == "m_sets" || cfg.structure.kind == "disjoint_paths") {
    cfg.structure.d = structure_int("d");
    cfg.structure.m = structure_int("m");
  } else if (cfg.structure.kind == "matchings") {
    cfg.structure.m = structure_int("m");
  } else if (cfg.structure.kind == "spanning_trees") {
    cfg.structure.vertices = structure_int("vertices");
  } else {
    throw std::invalid_argument("config.structure.kind: unknown kind '" +
                                cfg.structure.kind + "'");
  }

  cfg.policies = detail::field_as<std::vector<std::string>>(
      detail::require_field(j, "policies"), "policies");
  if (cfg.policies.empty())
    throw std::invalid_argument("config.policies: must list at least one policy");
  for (const auto& id : cfg.policies) {
    const auto& known = known_policies();
    if (std::find(known.begin(), known.end(), id) == known.end())
      throw std::invalid_argument("config.policies: unknown policy id '" + id + "'");
  }

  cfg.horizon = detail::field_as<std::int64_t>(detail::require_field(j, "horizon"), "horizon");
  if (cfg.horizon < 1) throw std::invalid_argument("config.horizon: must be >= 1");
  cfg.repetitions =
      detail::field_as<int>(detail::require_field(j, "repetitions"), "repetitions");
  if (cfg.repetitions < 1) throw std::invalid_argument("config.repetitions: must be >= 1");
  cfg.seed = detail::field_as<std::uint64_t>(detail::require_field(j, "seed"), "seed");

  if (j.contains("mode")) {
    cfg.mode = detail::field_as<std::string>(j.at("mode"), "mode");
    if (cfg.mode != "stochastic" && cfg.mode != "adversarial")
      throw std::invalid_argument("config.mode: must be 'stochastic' or 'adversarial'");
  }

  if (cfg.mode == "stochastic") {
    const auto& theta = detail::require_field(j, "theta");
    if (theta.contains("values")) {
      cfg.theta_values = detail::field_as<std::vector<double>>(theta.at("values"),
                                                               "theta.values");
    } else if (theta.contains("a") && theta.contains("b")) {
      cfg.theta_pattern = true;
      cfg.theta_a = detail::field_as<double>(theta.at("a"), "theta.a");
      cfg.theta_b = detail::field_as<double>(theta.at("b"), "theta.b");
      if (!(cfg.theta_a > 0.0 && cfg.theta_a < 1.0 && cfg.theta_b > 0.0 &&
            cfg.theta_b < 1.0))
        throw std::invalid_argument("config.theta: a and b must lie in (0,1)");
      if (!(cfg.theta_a > cfg.theta_b))
        throw std::invalid_argument("config.theta: pattern requires a > b");
    } else {
      throw std::invalid_argument("config.theta: provide either 'values' or 'a'/'b'");
    }
  } else {
    const auto& adversary = detail::require_field(j, "adversary");
    cfg.adversary.kind = detail::field_as<std::string>(
        detail::require_field(adversary, "kind", "adversary.kind"), "adversary.kind");
    if (cfg.adversary.kind == "constant") {
      cfg.adversary.x = detail::field_as<std::vector<double>>(
          detail::require_field(adversary, "x", "adversary.x"), "adversary.x");
    } else if (cfg.adversary.kind == "bernoulli") {
      cfg.adversary.means = detail::field_as<std::vector<double>>(
          detail::require_field(adversary, "means", "adversary.means"), "adversary.means");
    } else {
      throw std::invalid_argument("config.adversary.kind: must be 'constant' or 'bernoulli'");
    }
    for (const auto& id : cfg.policies)
      if (id != "combexp")
        throw std::invalid_argument(
            "config.policies: adversarial mode supports only 'combexp' (policy '" + id +
            "' needs per-coordinate feedback)");
  }

  if (j.contains("rate_mode")) {
    const auto mode = detail::field_as<std::string>(j.at("rate_mode"), "rate_mode");
    if (mode == "practical")
      cfg.rate_mode = RateMode::Practical;
    else if (mode == "theoretical")
      cfg.rate_mode = RateMode::Theoretical;
    else
      throw std::invalid_argument("config.rate_mode: must be 'practical' or 'theoretical'");
  }
  if (j.contains("checkpoints")) {
    cfg.checkpoints = detail::field_as<int>(j.at("checkpoints"), "checkpoints");
    if (cfg.checkpoints < 1) throw std::invalid_argument("config.checkpoints: must be >= 1");
  }
  if (j.contains("index_tolerance")) {
    cfg.index_tolerance = detail::field_as<double>(j.at("index_tolerance"), "index_tolerance");
    if (!(cfg.index_tolerance > 0.0))
      throw std::invalid_argument("config.index_tolerance: must be > 0");
  }
  if (j.contains("epoch_index")) {
    const auto which = detail::field_as<std::string>(j.at("epoch_index"), "epoch_index");
    if (which == "b")
      cfg.epoch_index = EpochIndex::IndexB;
    else if (which == "c")
      cfg.epoch_index = EpochIndex::IndexC;
    else
      throw std::invalid_argument("config.epoch_index: must be 'b' or 'c'");
  }
  if (j.contains("outputs")) {
    const auto& outputs = j.at("outputs");
    if (outputs.contains("traces"))
      cfg.traces_path = detail::field_as<std::string>(outputs.at("traces"), "outputs.traces");
    if (outputs.contains("summary"))
      cfg.summary_path =
          detail::field_as<std::string>(outputs.at("summary"), "outputs.summary");
    if (outputs.contains("epoch_counts"))
      cfg.epoch_counts_path = detail::field_as<std::string>(outputs.at("epoch_counts"),
                                                            "outputs.epoch_counts");
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: invalid JSON in '" + path + "': " + e.what());
  }
  return parse_experiment_config(j);
}

// Worker count: repetition tasks fan out over hardware threads, capped by the
// COMBANDIT_THREADS environment variable when set.
inline int worker_count(std::size_t tasks) {
  if (tasks <= 1) return 1;
  unsigned long limit = std::thread::hardware_concurrency();
  if (limit == 0) limit = 1;
  if (const char* cap = std::getenv("COMBANDIT_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(cap, &end, 10);
    if (end != cap && value >= 1) limit = static_cast<unsigned long>(value);
  }
  return static_cast<int>(std::min<unsigned long>(limit, tasks));
}

namespace detail {

inline RepTrace run_one_stochastic(const ExperimentConfig& cfg, const ActionSet& set,
                                   const std::vector<double>& theta,
                                   const std::string& policy_id, int rep,
                                   const std::vector<std::int64_t>& marks) {
  RepTrace trace;
  trace.policy = policy_id;
  trace.rep = rep;
  trace.seed = cfg.seed + static_cast<std::uint64_t>(rep);
  StochasticEnv env(set, theta, trace.seed);
  double cum = 0.0;
  std::size_t mark = 0;
  if (policy_id == "combexp") {
    const auto params = make_combexp_params(set, cfg.horizon);
    CombExp policy(set, params, trace.seed);
    for (std::int64_t n = 1; n <= cfg.horizon; ++n) {
      const Arm arm = policy.begin_round();
      const auto fb = env.step(arm);
      double reward = 0.0;
      for (double x : fb.rewards) reward += x;
      policy.feed(reward);
      cum += fb.regret_increment;
      if (n == marks[mark]) {
        trace.points.push_back({n, cum});
        ++mark;
      }
    }
    return trace;
  }
  auto policy = make_stochastic_policy(policy_id, set, cfg.rate_mode, cfg.index_tolerance,
                                       cfg.epoch_index);
  auto* epoch = dynamic_cast<EpochEscb*>(policy.get());
  BanditState state(set.dimension());
  for (std::int64_t n = 1; n <= cfg.horizon; ++n) {
    const Arm arm = policy->select(state, set, n);
    const auto fb = env.step(arm);
    state.update(arm, fb.rewards);
    cum += fb.regret_increment;
    if (n == marks[mark]) {
      trace.points.push_back({n, cum});
      if (epoch) trace.epochs.push_back({n, epoch->boundary_count()});
      ++mark;
    }
  }
  return trace;
}

// Adversarial accounting: realized regret against the best fixed arm on each
// reported prefix, computable once the prefix sums are known.
inline RepTrace run_one_adversarial(const ExperimentConfig& cfg, const ActionSet& set,
                                    const std::string& policy_id, int rep,
                                    const std::vector<std::int64_t>& marks) {
  RepTrace trace;
  trace.policy = policy_id;
  trace.rep = rep;
  trace.seed = cfg.seed + static_cast<std::uint64_t>(rep);
  AdversarialEnv env =
      cfg.adversary.kind == "constant"
          ? AdversarialEnv::from_table(std::vector<std::vector<double>>(
                static_cast<std::size_t>(cfg.horizon), cfg.adversary.x))
          : AdversarialEnv::bernoulli_rows(cfg.adversary.means,
                                           static_cast<int>(cfg.horizon), trace.seed);
  const auto params = make_combexp_params(set, cfg.horizon);
  CombExp policy(set, params, trace.seed);
  double cum_reward = 0.0;
  std::vector<double> prefix(static_cast<std::size_t>(set.dimension()), 0.0);
  std::size_t mark = 0;
  for (std::int64_t n = 1; n <= cfg.horizon; ++n) {
    const Arm arm = policy.begin_round();
    const double reward = env.step(arm, static_cast<int>(n));
    policy.feed(reward);
    cum_reward += reward;
    const auto& row = env.row(static_cast<int>(n));
    for (std::size_t i = 0; i < prefix.size(); ++i) prefix[i] += row[i];
    if (n == marks[mark]) {
      const Arm best = set.argmax_linear(prefix);
      trace.points.push_back({n, best.dot(prefix) - cum_reward});
      ++mark;
    }
  }
  return trace;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ActionSet set = make_action_set(cfg.structure);
  std::vector<double> theta;
  if (cfg.mode == "stochastic") {
    theta = resolve_theta(cfg, set);
  } else {
    const auto& values =
        cfg.adversary.kind == "constant" ? cfg.adversary.x : cfg.adversary.means;
    const char* field = cfg.adversary.kind == "constant" ? "x" : "means";
    if (static_cast<int>(values.size()) != set.dimension())
      throw std::invalid_argument(std::string("config.adversary.") + field +
                                  ": length must match the dimension");
    for (double v : values)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string("config.adversary.") + field +
                                    ": entries must lie in [0,1]");
  }

  const auto marks = geometric_checkpoints(cfg.horizon, cfg.checkpoints);
  struct Task {
    std::size_t slot;
    const std::string* policy;
    int rep;
  };
  std::vector<Task> tasks;
  tasks.reserve(cfg.policies.size() * static_cast<std::size_t>(cfg.repetitions));
  for (const auto& policy : cfg.policies)
    for (int r = 0; r < cfg.repetitions; ++r)
      tasks.push_back({tasks.size(), &policy, r});

  ExperimentResult result;
  result.checkpoints = marks;
  result.traces.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& task = tasks[k];
      RepTrace& out = result.traces[task.slot];
      try {
        out = cfg.mode == "stochastic"
                  ? detail::run_one_stochastic(cfg, set, theta, *task.policy, task.rep,
                                               marks)
                  : detail::run_one_adversarial(cfg, set, *task.policy, task.rep, marks);
      } catch (const std::exception& e) {
        out.policy = *task.policy;
        out.rep = task.rep;
        out.seed = cfg.seed + static_cast<std::uint64_t>(task.rep);
        out.failed = true;
        out.error = e.what();
      }
    }
  };

  const int workers = worker_count(tasks.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
    const std::size_t base = p * static_cast<std::size_t>(cfg.repetitions);
    for (std::size_t ci = 0; ci < marks.size(); ++ci) {
      double sum = 0.0;
      int used = 0;
      for (int r = 0; r < cfg.repetitions; ++r) {
        const RepTrace& tr = result.traces[base + static_cast<std::size_t>(r)];
        if (tr.failed) continue;
        sum += tr.points[ci].cum_regret;
        ++used;
      }
      if (used == 0) continue;
      const double mean = sum / used;
      double sq = 0.0;
      for (int r = 0; r < cfg.repetitions; ++r) {
        const RepTrace& tr = result.traces[base + static_cast<std::size_t>(r)];
        if (tr.failed) continue;
        const double dev = tr.points[ci].cum_regret - mean;
        sq += dev * dev;
      }
      const double sd = used > 1 ? std::sqrt(sq / (used - 1)) : 0.0;
      result.summary.push_back({cfg.policies[p], marks[ci], mean,
                                1.96 * sd / std::sqrt(static_cast<double>(used)), used});
    }
  }
  return result;
}

inline void write_traces_csv(const ExperimentResult& result, std::ostream& os) {
  os << "policy,rep,seed,round,cum_regret\n";
  char buf[40];
  for (const auto& trace : result.traces) {
    for (const auto& point : trace.points) {
      std::snprintf(buf, sizeof buf, "%.17g", point.cum_regret);
      os << trace.policy << ',' << trace.rep << ',' << trace.seed << ',' << point.round
         << ',' << buf << '\n';
    }
  }
}

inline std::string traces_csv_string(const ExperimentResult& result) {
  std::ostringstream os;
  write_traces_csv(result, os);
  return os.str();
}

inline nlohmann::json summary_json(const ExperimentResult& result) {
  auto rows = nlohmann::json::array();
  for (const auto& row : result.summary)
    rows.push_back({{"policy", row.policy},
                    {"round", row.round},
                    {"mean_cum_regret", row.mean},
                    {"ci95_half_width", row.half_width},
                    {"repetitions", row.repetitions}});
  return rows;
}

// Cumulative epoch-boundary counts per checkpoint, for epoch-escb traces.
inline nlohmann::json epoch_count_report(const ExperimentResult& result) {
  auto rows = nlohmann::json::array();
  for (const auto& trace : result.traces)
    for (const auto& point : trace.epochs)
      rows.push_back({{"policy", trace.policy},
                      {"rep", trace.rep},
                      {"round", point.round},
                      {"cumulative_epochs", point.epochs}});
  return rows;
}

// Reference curve constant c(theta) and its per-checkpoint values c(theta)*log(n).
inline nlohmann::json lower_bound_reference(const ExperimentConfig& cfg) {
  if (cfg.mode != "stochastic")
    throw std::invalid_argument("config.mode: the lower bound needs a stochastic config");
  const ActionSet set = make_action_set(cfg.structure);
  const auto theta = resolve_theta(cfg, set);
  double constant;
  if (set.kind() == StructureKind::Matchings && cfg.theta_pattern)
    constant = matchings_ab_bound(set.arm_size(), cfg.theta_a, cfg.theta_b);
  else
    constant = simplified_bound(set, theta);
  const auto family = maximal_pset(set, theta);
  auto reference = nlohmann::json::array();
  for (std::int64_t n : geometric_checkpoints(cfg.horizon, cfg.checkpoints))
    reference.push_back(
        {{"round", n}, {"value", constant * std::log(static_cast<double>(n))}});
  return {{"constant", constant},
          {"family_size", family.size()},
          {"reference", reference}};
}

}  // namespace combandit
