// Copyright 2026 The Coinvest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COINVEST_COMMANDS_HPP
#define COINVEST_COMMANDS_HPP

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coinvest/allocation.hpp"
#include "coinvest/game.hpp"
#include "coinvest/montecarlo.hpp"
#include "coinvest/output.hpp"
#include "coinvest/parallel.hpp"
#include "coinvest/scenario.hpp"

namespace coinvest {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,   ///< invalid config, flag or file
  kExitNumeric = 2,  ///< solver or invariant failure
  kExitModel = 3,    ///< command does not apply to the scenario's load model
};

/// The scenario's load model cannot serve the requested command or flag.
class ModelMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::vector<std::string> providers;  ///< keep only these SPs; empty keeps all
  std::optional<double> sigma;         ///< bounded-model override
  std::optional<double> alpha;         ///< fBm-model override
  unsigned threads = 0;                ///< 0: hardware concurrency
  std::optional<std::filesystem::path> dump_config;
};

struct PlanOptions : CommonOptions {
  bool all_coalitions = false;
};

struct StabilityOptions : CommonOptions {
  std::vector<double> sigmas;  ///< sweep; empty uses the scenario's sigma
};

struct SimulateOptions : CommonOptions {
  std::size_t realizations = 1000;
  std::uint64_t seed = 1;
  PaymentMode payment_mode = PaymentMode::kExPost;
};

struct PaybackOptions : CommonOptions {
  std::vector<double> periods;  ///< investment years; empty uses the scenario's
  std::size_t realizations = 1000;
  std::uint64_t seed = 1;
};

namespace detail {

/// Loads the config and applies provider restriction and model overrides.
/// Overrides go through the JSON form so they get the same validation.
inline ScenarioConfig prepare_scenario(const std::filesystem::path& config, const CommonOptions& opts) {
  ScenarioConfig c = load_scenario(config);
  if (!opts.providers.empty()) c = restrict_providers(c, opts.providers);
  nlohmann::ordered_json j = to_json(c);
  if (opts.sigma) {
    if (c.model != UncertaintyKind::kBounded) {
      throw ModelMismatchError("--sigma applies to the bounded load model; this scenario uses fbm");
    }
    j["uncertainty"]["sigma"] = *opts.sigma;
  }
  if (opts.alpha) {
    if (c.model != UncertaintyKind::kFbm) {
      throw ModelMismatchError("--alpha applies to the fbm load model; this scenario uses bounded");
    }
    j["uncertainty"]["alpha"] = *opts.alpha;
  }
  c = parse_scenario(j);
  if (opts.dump_config) write_atomic(*opts.dump_config, to_json(c).dump(2) + "\n");
  return c;
}

inline ScenarioConfig with_years(const ScenarioConfig& c, double years) {
  nlohmann::ordered_json j = to_json(c);
  j["horizon"]["investment_years"] = years;
  return parse_scenario(j);
}

inline std::string coalition_label(PlayerSet s, const std::vector<std::string>& names) {
  std::string out = "{";
  bool first = true;
  for (int i : s.members()) {
    if (!first) out += ',';
    out += names[static_cast<std::size_t>(i)];
    first = false;
  }
  return out + "}";
}

inline std::filesystem::path sidecar(const std::filesystem::path& out) {
  auto p = sibling(out, "", ".json");
  if (p == out) p = sibling(out, ".summary", ".json");
  return p;
}

inline nlohmann::ordered_json quantiles_json(const QuantileSummary& q) {
  if (q.count == 0) return nullptr;
  return {{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75},
          {"max", q.max}, {"mean", q.mean}, {"count", q.count}};
}

inline nlohmann::ordered_json per_player(const std::vector<std::string>& names, const std::vector<double>& v) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = v[i];
  return out;
}

/// The scenario with its expected loads, sampler and nominal value table.
struct Prepared {
  ScenarioConfig config;
  EconomicParams params;
  LoadSampler sampler;
  ValueTable table;
  std::vector<std::string> names;
};

inline Prepared prepare(ScenarioConfig c, unsigned threads) {
  EconomicParams p = c.economics();
  LoadSampler sampler(c.load_models(), p.horizon);
  ValueTable table = build_value_table(c.players(), sampler.expected(), p, threads);
  std::vector<std::string> names = c.player_names();
  return {std::move(c), std::move(p), std::move(sampler), std::move(table), std::move(names)};
}

}  // namespace detail

/// Runs `body` and maps exceptions onto exit codes, printing one line to `log`.
inline int run_guarded(const std::function<void()>& body, std::ostream& log) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OutputError& e) {
    log << "output error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ModelMismatchError& e) {
    log << "model mismatch: " << e.what() << "\n";
    return kExitModel;
  } catch (const UnboundedModelError& e) {
    log << "model mismatch: " << e.what() << "\n";
    return kExitModel;
  } catch (const SolverError& e) {
    log << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const InvariantViolation& e) {
    log << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    log << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

/// Optimal plan of the grand coalition (or of every coalition) as CSV, plus
/// a JSON sidecar with each coalition's capacity, cost and value.
inline int cmd_plan(const std::filesystem::path& config, const std::filesystem::path& out,
                    const PlanOptions& opts, std::ostream& log) {
  return run_guarded(
      [&] {
        const unsigned threads = resolve_threads(opts.threads);
        const auto pr = detail::prepare(detail::prepare_scenario(config, opts), threads);
        const int n = pr.config.players();
        const std::size_t horizon = pr.params.horizon;

        CsvBuilder csv({"coalition", "capacity_vcores", "player", "slot", "share_vcores"});
        nlohmann::ordered_json coalitions = nlohmann::ordered_json::array();
        const std::size_t count = coalition_count(n);
        for (std::size_t m = 0; m < count; ++m) {
          const AllocationPlan& plan = pr.table.plans[m];
          const std::string label = detail::coalition_label(plan.coalition, pr.names);
          const std::string cap = format_double(plan.capacity);
          nlohmann::ordered_json members = nlohmann::ordered_json::array();
          for (int i : plan.coalition.members()) members.push_back(pr.names[static_cast<std::size_t>(i)]);
          coalitions.push_back({{"coalition", label},
                                {"members", members},
                                {"capacity_vcores", plan.capacity},
                                {"cost", cost(pr.params, plan.capacity)},
                                {"objective", plan.objective}});
          if (!opts.all_coalitions && m + 1 != count) continue;
          csv.row({label, cap, "", "", ""});
          for (std::size_t r = 0; r < plan.members.size(); ++r) {
            const std::string& who = pr.names[static_cast<std::size_t>(plan.members[r])];
            for (std::size_t t = 0; t < horizon; ++t) {
              csv.row({label, cap, who, std::to_string(t), format_double(plan.shares(r, t))});
            }
          }
        }
        const AllocationPlan& grand = pr.table.grand_plan();
        nlohmann::ordered_json summary = {
            {"schema_version", kSchemaVersion},
            {"command", "plan"},
            {"scenario", to_json(pr.config)},
            {"players", pr.names},
            {"horizon_slots", horizon},
            {"unit_cost", pr.params.unit_cost()},
            {"grand",
             {{"coalition", detail::coalition_label(grand.coalition, pr.names)},
              {"capacity_vcores", grand.capacity},
              {"cost", cost(pr.params, grand.capacity)},
              {"objective", grand.objective}}},
            {"shapley_expected", detail::per_player(pr.names, shapley(pr.table.nominal))},
            {"coalitions", coalitions}};
        write_atomic(out, csv.str());
        write_atomic(detail::sidecar(out), summary.dump(2) + "\n");
        log << "wrote " << out.string() << " and " << detail::sidecar(out).string() << "\n";
      },
      log);
}

/// Hoeffding stability bounds over a sweep of sigma values. Writes
/// `sigma,player,p_lb` to `out`, `sigma,nu_lb` to `<stem>_nu.csv`, and a JSON
/// sidecar with the threshold.
inline int cmd_stability(const std::filesystem::path& config, const std::filesystem::path& out,
                         const StabilityOptions& opts, std::ostream& log) {
  return run_guarded(
      [&] {
        ScenarioConfig c = detail::prepare_scenario(config, opts);
        if (c.model != UncertaintyKind::kBounded) {
          throw ModelMismatchError(
              "stability bounds need the bounded load model; fbm loads have unbounded support, so "
              "Hoeffding's inequality does not apply (use `simulate` for empirical frequencies)");
        }
        std::vector<double> sigmas = opts.sigmas;
        if (sigmas.empty()) sigmas.push_back(c.sigma);
        for (double s : sigmas) {
          if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("--sigma", "every sigma must lie in [0, 1]");
        }
        const unsigned threads = resolve_threads(opts.threads);
        // Expected loads, and so the nominal game, do not depend on sigma.
        const auto pr = detail::prepare(c, threads);
        const std::vector<double> x = shapley(pr.table.nominal);
        const double sigma_hat = stability_value_hat(pr.table.nominal, x);
        const Threshold th = delta_threshold(pr.table.nominal, sigma_hat);

        CsvBuilder players({"sigma", "player", "p_lb"});
        CsvBuilder nu({"sigma", "nu_lb"});
        nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
        for (double s : sigmas) {
          ScenarioConfig cs = pr.config;
          cs.sigma = s;
          const std::vector<LoadModel> models = cs.load_models();
          const SlotMatrix ranges = utility_ranges(pr.table.grand_plan(), models, pr.params);
          const StabilityBound bound = stability_lower_bound(th.value, ranges);
          for (std::size_t i = 0; i < pr.names.size(); ++i) {
            players.row({format_double(s), pr.names[i], format_double(bound.per_player[i])});
          }
          nu.row({format_double(s), format_double(bound.nu)});
          sweep.push_back({{"sigma", s}, {"nu_lb", bound.nu}, {"p_lb", detail::per_player(pr.names, bound.per_player)}});
        }
        nlohmann::ordered_json summary = {{"schema_version", kSchemaVersion},
                                  {"command", "stability"},
                                  {"scenario", to_json(pr.config)},
                                  {"players", pr.names},
                                  {"grand_value", pr.table.nominal.grand_value()},
                                  {"shapley_expected", detail::per_player(pr.names, x)},
                                  {"sigma_hat", sigma_hat},
                                  {"delta_hat", th.value},
                                  {"degenerate", th.degenerate},
                                  {"sweep", sweep}};
        const auto nu_path = sibling(out, "_nu", out.extension().string());
        write_atomic(out, players.str());
        write_atomic(nu_path, nu.str());
        write_atomic(detail::sidecar(out), summary.dump(2) + "\n");
        log << "wrote " << out.string() << ", " << nu_path.string() << " and "
            << detail::sidecar(out).string() << "\n";
      },
      log);
}

/// Monte Carlo run: per-realization CSV plus a JSON summary.
inline int cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& out,
                        const SimulateOptions& opts, std::ostream& log) {
  return run_guarded(
      [&] {
        if (opts.realizations < 1) throw ConfigError("--realizations", "must be at least 1");
        const unsigned threads = resolve_threads(opts.threads);
        const auto pr = detail::prepare(detail::prepare_scenario(config, opts), threads);
        const Simulator sim(pr.sampler, pr.params, pr.table);
        const auto outcomes = sim.simulate(opts.realizations, opts.seed, {opts.payment_mode, threads, false});

        const std::vector<double>& x = sim.nominal_shapley();
        const double sigma_hat = stability_value_hat(pr.table.nominal, x);
        const Threshold th = delta_threshold(pr.table.nominal, sigma_hat);
        const SimulationSummary s = summarize(outcomes, th.value);

        CsvBuilder csv({"omega", "player", "collected", "payment", "reward", "shapley_payoff", "deviation"});
        for (const auto& o : outcomes) {
          const std::string omega = std::to_string(o.omega);
          for (std::size_t i = 0; i < pr.names.size(); ++i) {
            csv.row({omega, pr.names[i], format_double(o.collected[i]), format_double(o.payments[i]),
                     format_double(o.rewards[i]), format_double(o.shapley[i]), format_double(o.deviations[i])});
          }
        }

        nlohmann::ordered_json nu = nullptr;
        if (pr.config.model == UncertaintyKind::kBounded) {
          nu = analyze_stability(pr.table, pr.sampler.models(), pr.params).nu_lower_bound;
        }
        auto per_player_q = [&](const std::vector<QuantileSummary>& q) {
          nlohmann::ordered_json j = nlohmann::ordered_json::object();
          for (std::size_t i = 0; i < pr.names.size(); ++i) j[pr.names[i]] = detail::quantiles_json(q[i]);
          return j;
        };
        QuantileSummary years = s.payback_slots;
        const double to_years = pr.params.slot_hours / kHoursPerYear;
        for (double* v : {&years.min, &years.q25, &years.median, &years.q75, &years.max, &years.mean}) *v *= to_years;
        nlohmann::ordered_json summary = {
            {"schema_version", kSchemaVersion},
            {"command", "simulate"},
            {"scenario", to_json(pr.config)},
            {"players", pr.names},
            {"realizations", opts.realizations},
            {"seed", opts.seed},
            {"payment_mode", opts.payment_mode == PaymentMode::kExAnte ? "ex-ante" : "ex-post"},
            {"grand_value", pr.table.nominal.grand_value()},
            {"grand_cost", sim.grand_cost()},
            {"shapley_expected", detail::per_player(pr.names, x)},
            {"delta_hat", th.value},
            {"degenerate", th.degenerate},
            {"nu_lower_bound", nu},
            {"per_player_profit_prob", detail::per_player(pr.names, s.per_player_profit_prob)},
            {"joint_profit_prob", s.joint_profit_prob},
            {"empirical_stability_freq", s.empirical_stability_freq},
            {"containment_failures", s.containment_failures},
            {"payback",
             {{"slots", detail::quantiles_json(s.payback_slots)},
              {"years", detail::quantiles_json(years)},
              {"censored", s.payback_censored}}},
            {"shapley_payoff", per_player_q(s.payoff)},
            {"payment", per_player_q(s.payment)},
            {"reward", per_player_q(s.reward)},
            {"collected", per_player_q(s.collected)}};
        write_atomic(out, csv.str());
        write_atomic(detail::sidecar(out), summary.dump(2) + "\n");
        log << "wrote " << out.string() << " and " << detail::sidecar(out).string() << "\n";
      },
      log);
}

/// Payback slot per realization for one or more investment periods.
inline int cmd_payback(const std::filesystem::path& config, const std::filesystem::path& out,
                       const PaybackOptions& opts, std::ostream& log) {
  return run_guarded(
      [&] {
        if (opts.realizations < 1) throw ConfigError("--realizations", "must be at least 1");
        const unsigned threads = resolve_threads(opts.threads);
        const ScenarioConfig base = detail::prepare_scenario(config, opts);
        std::vector<double> periods = opts.periods;
        if (periods.empty()) periods.push_back(base.investment_years);

        CsvBuilder csv({"investment_years", "omega", "payback_slot", "payback_years", "censored"});
        nlohmann::ordered_json runs = nlohmann::ordered_json::array();
        for (double years : periods) {
          if (!(years > 0.0)) throw ConfigError("--periods", "every period must be > 0 years");
          const auto pr = detail::prepare(detail::with_years(base, years), threads);
          const Simulator sim(pr.sampler, pr.params, pr.table);
          const auto outcomes = sim.simulate(opts.realizations, opts.seed, {PaymentMode::kExPost, threads, false});
          const double to_years = pr.params.slot_hours / kHoursPerYear;
          std::vector<double> paid, relative;
          std::size_t censored = 0;
          const std::string y = format_double(years);
          for (const auto& o : outcomes) {
            if (o.payback_slot) {
              const double py = static_cast<double>(*o.payback_slot) * to_years;
              paid.push_back(py);
              relative.push_back(py / years);
              csv.row({y, std::to_string(o.omega), std::to_string(*o.payback_slot), format_double(py), "0"});
            } else {
              ++censored;
              csv.row({y, std::to_string(o.omega), "", "", "1"});
            }
          }
          runs.push_back({{"investment_years", years},
                          {"horizon_slots", pr.params.horizon},
                          {"grand_cost", sim.grand_cost()},
                          {"grand_value", pr.table.nominal.grand_value()},
                          {"censored", censored},
                          {"payback_years", detail::quantiles_json(summarize_values(paid))},
                          {"relative_payback", detail::quantiles_json(summarize_values(relative))}});
        }
        nlohmann::ordered_json summary = {{"schema_version", kSchemaVersion},
                                  {"command", "payback"},
                                  {"scenario", to_json(base)},
                                  {"realizations", opts.realizations},
                                  {"seed", opts.seed},
                                  {"periods", runs}};
        write_atomic(out, csv.str());
        write_atomic(detail::sidecar(out), summary.dump(2) + "\n");
        log << "wrote " << out.string() << " and " << detail::sidecar(out).string() << "\n";
      },
      log);
}

}  // namespace coinvest

#endif  // COINVEST_COMMANDS_HPP
