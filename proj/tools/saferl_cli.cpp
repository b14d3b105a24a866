#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "saferl/config.hpp"
#include "saferl/epo.hpp"
#include "saferl/harness.hpp"

namespace {

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_verify_penalty() {
  std::mt19937_64 rng(7);
  int failures = 0;
  for (int i = 0; i < 20; ++i) {
    const saferl::ConvexQp qp = saferl::ConvexQp::random(2 + i % 4, rng);
    const std::vector<saferl::SmoothFn> g = {qp.constraint()};
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(qp.b.size());

    const auto exact =
        saferl::verify_exact_penalty(qp.objective(), g, 2.0 * qp.lambda_star,
                                     x0);
    const double err = (exact.x_min - qp.x_star).norm();
    const auto weak = saferl::verify_exact_penalty(
        qp.objective(), g, 0.5 * qp.lambda_star, x0);
    const double violation = g[0].value(weak.x_min);

    const bool ok = err <= 1e-3 && exact.feasible && violation > 1e-2;
    std::cout << "problem " << i << ": |x - x*| = " << err
              << ", small-kappa violation = " << violation
              << (ok ? "  [ok]" : "  [FAILED]") << "\n";
    if (!ok) ++failures;
  }
  if (failures == 0)
    std::cout << "exact-penalty verification passed on all 20 problems\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-policy safe RL benchmark toolkit"};
  app.require_subcommand(1);

  std::string config_path, algo_name, out_dir = ".", sweep_key, sweep_values;
  long seed = -1;

  auto* train = app.add_subcommand("train", "Run one training experiment");
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--algo", algo_name,
                    "td3|safety_layer|recovery|lagrangian|fac|epo");
  train->add_option("--seed", seed, "random seed (overrides config)");
  train->add_option("--out", out_dir, "output directory");

  auto* sw = app.add_subcommand("sweep", "Run one experiment per value");
  sw->add_option("--config", config_path, "key = value config file");
  sw->add_option("--algo", algo_name, "algorithm name");
  sw->add_option("--key", sweep_key, "config field to sweep")->required();
  sw->add_option("--values", sweep_values, "comma-separated values")
      ->required();
  sw->add_option("--out", out_dir, "output directory");

  auto* verify = app.add_subcommand(
      "verify-penalty", "Run the analytic exact-penalty suite");
  (void)verify;

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(verify)) return run_verify_penalty();

    saferl::HyperConfig cfg;
    if (!algo_name.empty())
      cfg = saferl::defaults(saferl::algo_from_string(algo_name));
    if (!config_path.empty()) {
      const saferl::HyperConfig file_cfg = saferl::load_config(config_path);
      const auto algo = algo_name.empty()
                            ? file_cfg.algorithm
                            : saferl::algo_from_string(algo_name);
      cfg = file_cfg;
      cfg.algorithm = algo;
      if (algo == saferl::Algo::safety_layer && algo_name.empty() == false &&
          cfg.cost_limit == 0.1)
        cfg.cost_limit = saferl::defaults(algo).cost_limit;
    }
    if (seed >= 0) cfg.seed = seed;
    saferl::validate(cfg);

    if (app.got_subcommand(train)) {
      std::filesystem::create_directories(out_dir);
      const std::string csv = out_dir + "/" +
                              saferl::to_string(cfg.algorithm) + "_seed" +
                              std::to_string(cfg.seed) + ".csv";
      const auto records = saferl::run_experiment(cfg, csv);
      std::cout << "wrote " << csv << " (" << records.size() << " records)\n"
                << "final cost rate: " << records.back().train_cost_rate
                << ", final eval reward: " << records.back().eval_ep_reward
                << "\n";
      return 0;
    }
    if (app.got_subcommand(sw)) {
      const auto paths = saferl::sweep(cfg, sweep_key,
                                       split_csv_list(sweep_values), out_dir);
      for (const auto& p : paths) std::cout << "wrote " << p << "\n";
      std::cout << "wrote " << out_dir << "/summary.txt\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
