#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sal/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Successive affine learning: train, compare and evaluate"};
  app.require_subcommand(1);

  sal::CommandOptions opts;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool model_required) {
    cmd->add_option("--config,-c", opts.config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out,-o", opts.out_dir, "Output directory (overrides output.dir)");
    auto* m = cmd->add_option("--model,-m", opts.model_path,
                              model_required ? "Model file to evaluate" : "Where to write the trained model");
    if (model_required) m->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Override every seed in the config");
  };

  auto* train_sal = app.add_subcommand("train-sal", "Train a SAL model grade by grade");
  add_common(train_sal, false);
  auto* train_ssg = app.add_subcommand("train-ssg", "Train the single-grade baseline network");
  add_common(train_ssg, false);
  auto* compare = app.add_subcommand("compare", "Run both methods on the same data and compare time to rse thresholds");
  add_common(compare, false);
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on the configured data");
  add_common(eval, true);

  std::string coeff_path;
  std::uint64_t coeff_seed = 1;
  auto* coeffs = app.add_subcommand("coeffs", "Write a coefficient file for the oscillatory target");
  coeffs->add_option("--out,-o", coeff_path, "Output file")->required();
  coeffs->add_option("--seed", coeff_seed, "Generator seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  for (auto* cmd : {train_sal, train_ssg, compare, eval})
    if (cmd->parsed() && cmd->count("--seed") > 0) opts.seed = seed;

  if (train_sal->parsed()) return sal::cmd_train_sal(opts, std::cout);
  if (train_ssg->parsed()) return sal::cmd_train_ssg(opts, std::cout);
  if (compare->parsed()) return sal::cmd_compare(opts, std::cout);
  if (eval->parsed()) return sal::cmd_eval(opts, std::cout);
  if (coeffs->parsed()) return sal::cmd_coeffs(coeff_seed, coeff_path, std::cout);
  return 2;
}
