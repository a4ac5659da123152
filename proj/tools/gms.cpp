// gms: run model-market auction experiments from the command line.
//
//   gms sweep [--config PATH] [--seed N] [--output DIR] [--mechanism NAME]
//             [--replications N] [--owners N] [--size N] [--threads N]
//   gms round [--config PATH] [--seed N] [--output DIR] [--mechanism NAME]
//             [--owners N] [--size N] [--feedback] [--history PATH]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include "gms/gms.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kExitOk          = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntime     = 3;

struct Flags
{
  std::string                  config_path;
  std::optional<std::uint64_t> seed;
  std::string                  output_dir;
  std::optional<std::string>   mechanism;
  std::optional<std::uint32_t> replications;
  std::optional<std::uint32_t> owners;
  std::optional<std::uint32_t> size;
  unsigned                     threads  = 0;
  bool                         feedback = false;
  std::string                  history_path;
};

void add_common(CLI::App *cmd, Flags &f)
{
  cmd->add_option("--config", f.config_path, "JSON experiment config");
  cmd->add_option("--seed", f.seed, "master seed (overrides config)");
  cmd->add_option("--output", f.output_dir, "output directory (default $GMS_OUTPUT_DIR or .)");
  cmd->add_option("--mechanism", f.mechanism, "second_score or second_price");
  cmd->add_option("--owners", f.owners, "number of model owners");
  cmd->add_option("--size", f.size, "model size in billions");
}

gms::ExperimentConfig resolve(Flags const &f)
{
  gms::ExperimentConfig cfg =
      f.config_path.empty() ? gms::config_from_json(nlohmann::json::object())
                            : gms::load_config(f.config_path);

  if (f.seed)
    cfg.master_seed = *f.seed;
  if (f.replications)
    cfg.replications = *f.replications;
  if (f.owners)
    cfg.population.n_owners = *f.owners;
  if (f.size)
    cfg.sizes = {*f.size};
  if (f.mechanism)
  {
    auto m = gms::parse_mechanism(*f.mechanism);
    if (!m)
      throw gms::ConfigError(gms::ConfigErrorKind::invariant,
                             "unknown mechanism '" + *f.mechanism + "'");
    cfg.mechanisms = {*m};
  }
  if (f.feedback)
    cfg.feedback_enabled = true;

  if (auto v = cfg.violation(); !v.empty())
    throw gms::ConfigError(gms::ConfigErrorKind::invariant, v);
  return cfg;
}

std::filesystem::path output_dir(Flags const &f)
{
  if (!f.output_dir.empty())
    return f.output_dir;
  if (char const *env = std::getenv("GMS_OUTPUT_DIR"); env && *env)
    return env;
  return ".";
}

int cmd_sweep(Flags const &f)
{
  auto const cfg = resolve(f);
  auto const dir = output_dir(f);
  std::filesystem::create_directories(dir);

  auto const curve    = gms::sweep_sizes(cfg, f.threads);
  auto const csv_path = dir / "revenue_curve.csv";
  auto const man_path = dir / "manifest.json";
  gms::write_file_atomic(csv_path, gms::revenue_curve_csv(curve));
  gms::write_file_atomic(man_path,
                         gms::manifest_json(cfg, {csv_path, man_path}, "sweep").dump(2) + "\n");

  std::cerr << "wrote " << curve.records.size() << " rows to " << csv_path.string() << "\n";
  return kExitOk;
}

int cmd_round(Flags const &f)
{
  auto const cfg  = resolve(f);
  auto const dir  = output_dir(f);
  auto const size = cfg.sizes.front();
  std::filesystem::create_directories(dir);

  gms::ScoringSystem scoring = cfg.scoring;
  if (!f.history_path.empty() && std::filesystem::exists(f.history_path))
    scoring = gms::load_history(f.history_path);

  auto       stream = gms::derive_stream(cfg.master_seed, size, 0, 0);
  auto const result = gms::run_round(cfg, size, stream, scoring, scoring.history.size());
  auto const trace  = gms::round_trace_json(cfg, size, scoring, result).dump(2) + "\n";

  auto const trace_path = dir / "round_trace.json";
  auto const man_path   = dir / "manifest.json";
  gms::write_file_atomic(trace_path, trace);
  std::vector<std::filesystem::path> outputs{trace_path, man_path};
  if (!f.history_path.empty() && cfg.feedback_enabled)
  {
    gms::persist_history(result.scoring_after, f.history_path);
    outputs.emplace_back(f.history_path);
  }
  gms::write_file_atomic(man_path, gms::manifest_json(cfg, outputs, "round").dump(2) + "\n");

  std::cout << trace;
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Auction-based edge resource allocation for generative AI models"};
  app.require_subcommand(1);

  Flags f;
  auto *sweep = app.add_subcommand("sweep", "revenue and welfare versus model size");
  add_common(sweep, f);
  sweep->add_option("--replications", f.replications, "Monte Carlo replications per size");
  sweep->add_option("--threads", f.threads, "worker threads (0 = all cores)");

  auto *round = app.add_subcommand("round", "trace one auction round step by step");
  add_common(round, f);
  round->add_flag("--feedback", f.feedback, "apply user feedback after the round");
  round->add_option("--history", f.history_path, "scoring history file to load and update");

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::CallForHelp const &e)
  {
    return app.exit(e);
  }
  catch (CLI::ParseError const &e)
  {
    app.exit(e);
    return kExitConfigError;
  }

  try
  {
    return sweep->parsed() ? cmd_sweep(f) : cmd_round(f);
  }
  catch (gms::ConfigError const &e)
  {
    std::cerr << "gms: config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  catch (gms::HistoryError const &e)
  {
    std::cerr << "gms: history error: " << e.what() << "\n";
    return kExitConfigError;
  }
  catch (std::exception const &e)
  {
    std::cerr << "gms: " << e.what() << "\n";
    return kExitRuntime;
  }
}
