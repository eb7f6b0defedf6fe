#include <iostream>

#include "CLI11.hpp"

#include "fluidnet/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fluidnet: fluid network stability analysis"};
  fluidnet::RunConfig cfg;
  std::string input;
  std::string out = ".";
  double step = 0.0, horizon = 0.0;
  std::size_t samples = 0;
  int depth = 0, multistarts = 0;
  std::string selector;

  app.add_option("--command,command", cfg.command, "Analysis to run")
      ->required()
      ->check(CLI::IsMember(fluidnet::cli_commands()));
  app.add_option("--input,-i", input, "Spec file (JSON)")->required();
  app.add_option("--out,-o", out, "Output directory");
  app.add_option("--seed", cfg.seed, "Top-level seed")->capture_default_str();
  auto* o_step = app.add_option("--step", step, "Decision step h");
  auto* o_horizon = app.add_option("--horizon", horizon, "Time horizon");
  auto* o_samples = app.add_option("--samples", samples, "Sample count");
  auto* o_depth = app.add_option("--depth", depth, "Lookahead depth of the search");
  auto* o_multi = app.add_option("--multistarts", multistarts, "Random restarts of the search");
  auto* o_sel = app.add_option("--selector", selector, "first | max_drain | min_drain | random:<seed> | sequence:<i,j,..>");
  CLI11_PARSE(app, argc, argv);

  cfg.input = input;
  cfg.out = out;
  if (*o_step) cfg.step = step;
  if (*o_horizon) cfg.horizon = horizon;
  if (*o_samples) cfg.samples = samples;
  if (*o_depth) cfg.depth = depth;
  if (*o_multi) cfg.multistarts = multistarts;
  if (*o_sel) cfg.selector = selector;
  return fluidnet::run(cfg, std::clog, std::cerr);
}
