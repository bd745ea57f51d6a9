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

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "coinvest/commands.hpp"

namespace {

void add_common(CLI::App* cmd, coinvest::CommonOptions& opts) {
  cmd->add_option("--sps", opts.providers, "Keep only these service providers (by name)")->delimiter(',');
  cmd->add_option("--threads", opts.threads, "Worker threads; 0 uses all cores (capped by COINVEST_THREADS)");
  cmd->add_option("--dump-config", opts.dump_config, "Also write the effective scenario as JSON to this path");
}

void add_overrides(CLI::App* cmd, coinvest::CommonOptions& opts) {
  cmd->add_option("--sigma", opts.sigma, "Override sigma of the bounded load model");
  cmd->add_option("--alpha", opts.alpha, "Override alpha of the fbm load model");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-investment planning and risk analysis for edge computing coalitions"};
  app.require_subcommand(1);
  std::string config;
  std::string out;

  coinvest::PlanOptions plan;
  auto* plan_cmd = app.add_subcommand("plan", "Optimal capacity and per-slot shares");
  plan_cmd->add_option("config", config, "Scenario JSON")->required();
  plan_cmd->add_option("--out", out, "Output CSV")->required();
  plan_cmd->add_flag("--all-coalitions", plan.all_coalitions, "Write shares for every coalition");
  add_common(plan_cmd, plan);
  add_overrides(plan_cmd, plan);

  coinvest::StabilityOptions stability;
  auto* stab_cmd = app.add_subcommand("stability", "Lower bound on the probability that the grand coalition is stable");
  stab_cmd->add_option("config", config, "Scenario JSON")->required();
  stab_cmd->add_option("--out", out, "Output CSV (sigma,player,p_lb)")->required();
  stab_cmd->add_option("--sigma", stability.sigmas, "Sigma values to sweep")->delimiter(',');
  add_common(stab_cmd, stability);

  const std::map<std::string, coinvest::PaymentMode> modes{{"ex-ante", coinvest::PaymentMode::kExAnte},
                                                           {"ex-post", coinvest::PaymentMode::kExPost}};
  coinvest::SimulateOptions simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo payoffs, payments and profitability");
  sim_cmd->add_option("config", config, "Scenario JSON")->required();
  sim_cmd->add_option("--out", out, "Output CSV")->required();
  sim_cmd->add_option("--realizations,-n", simulate.realizations, "Number of load realizations")
      ->capture_default_str();
  sim_cmd->add_option("--seed", simulate.seed, "Master seed")->capture_default_str();
  sim_cmd->add_option("--payment-mode", simulate.payment_mode, "ex-ante or ex-post")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
      ->default_str("ex-post");
  add_common(sim_cmd, simulate);
  add_overrides(sim_cmd, simulate);

  coinvest::PaybackOptions payback;
  auto* pay_cmd = app.add_subcommand("payback", "Payback time distribution per investment period");
  pay_cmd->add_option("config", config, "Scenario JSON")->required();
  pay_cmd->add_option("--out", out, "Output CSV")->required();
  pay_cmd->add_option("--periods", payback.periods, "Investment periods in years")->delimiter(',');
  pay_cmd->add_option("--realizations,-n", payback.realizations, "Number of load realizations")
      ->capture_default_str();
  pay_cmd->add_option("--seed", payback.seed, "Master seed")->capture_default_str();
  add_common(pay_cmd, payback);
  add_overrides(pay_cmd, payback);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return coinvest::kExitConfig;
  }

  if (plan_cmd->parsed()) return coinvest::cmd_plan(config, out, plan, std::cerr);
  if (stab_cmd->parsed()) return coinvest::cmd_stability(config, out, stability, std::cerr);
  if (sim_cmd->parsed()) return coinvest::cmd_simulate(config, out, simulate, std::cerr);
  return coinvest::cmd_payback(config, out, payback, std::cerr);
}
