#include "gms/config.hpp"
#include "gms/report.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace gms;

namespace {

ConfigErrorKind error_kind(std::string const &text)
{
  try
  {
    parse_config(text);
  }
  catch (ConfigError const &e)
  {
    return e.kind();
  }
  throw std::logic_error("expected a ConfigError for: " + text);
}

}  // namespace

TEST(load_config, empty_object_is_full_default_preset)
{
  auto cfg = parse_config("{}");
  EXPECT_EQ(cfg.population.n_owners, 10u);
  EXPECT_EQ(cfg.sizes, (std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(cfg.replications, 1000u);
  EXPECT_EQ(cfg.rounds_per_replication, 1u);
  EXPECT_EQ(cfg.mechanisms,
            (std::vector<Mechanism>{Mechanism::second_score, Mechanism::second_price}));
  EXPECT_FALSE(cfg.feedback_enabled);
  EXPECT_EQ(cfg.population.universe_size, 100u);
  EXPECT_EQ(cfg, ExperimentConfig{});
}

TEST(load_config, subset_schema)
{
  auto cfg = parse_config(R"({"sizes":[5],"mechanisms":["second_score"]})");
  EXPECT_EQ(cfg.sizes, std::vector<std::uint32_t>{5});
  EXPECT_EQ(cfg.mechanisms, std::vector<Mechanism>{Mechanism::second_score});
  EXPECT_EQ(cfg.population.universe_size, 25u);
}

TEST(load_config, nested_sections)
{
  auto cfg = parse_config(R"({
    "master_seed": 7,
    "population": {"n_owners": 4, "gamma_range": [0.6, 0.9], "universe_size": 144,
                   "capacity": {"memory": 2, "compute": 3, "bandwidth": 4},
                   "execution_value_mode": "global_per_task",
                   "catalog": [{"name":"m","family":"GAN","latency":"low","cost":"high"}]},
    "scoring": {"price_weight": 0.25, "normalize_by_request_count": true, "ema_alpha": 0.5}
  })");
  EXPECT_EQ(cfg.master_seed, 7u);
  EXPECT_EQ(cfg.population.n_owners, 4u);
  EXPECT_EQ(cfg.population.gamma_range, (ValueRange{0.6, 0.9}));
  EXPECT_EQ(cfg.population.universe_size, 144u);
  EXPECT_EQ(cfg.population.capacity, (ResourceVector{2, 3, 4}));
  EXPECT_EQ(cfg.population.execution_value_mode, ExecutionValueMode::global_per_task);
  ASSERT_EQ(cfg.population.catalog.size(), 1u);
  EXPECT_EQ(cfg.scoring.price_weight, 0.25);
  EXPECT_TRUE(cfg.scoring.normalize_by_request_count);
  EXPECT_EQ(cfg.scoring.ema_alpha, 0.5);
}

TEST(load_config, error_kinds_are_distinct)
{
  EXPECT_EQ(error_kind(R"({"replications": 0})"), ConfigErrorKind::invariant);
  EXPECT_EQ(error_kind(R"({"replications": -3})"), ConfigErrorKind::invariant);
  EXPECT_EQ(error_kind(R"({"replicas": 10})"), ConfigErrorKind::unknown_field);
  EXPECT_EQ(error_kind(R"({"population": {"owners": 3}})"), ConfigErrorKind::unknown_field);
  EXPECT_EQ(error_kind(R"({"scoring": {"weight": 3}})"), ConfigErrorKind::unknown_field);
  EXPECT_EQ(error_kind(R"({"replications": "many"})"), ConfigErrorKind::type_mismatch);
  EXPECT_EQ(error_kind(R"({"replications": 2.5})"), ConfigErrorKind::type_mismatch);
  EXPECT_EQ(error_kind(R"({"sizes": [11], "population": {"universe_size": 100}})"),
            ConfigErrorKind::invariant);
  EXPECT_EQ(error_kind(R"({"sizes": [3, 3]})"), ConfigErrorKind::invariant);
  EXPECT_EQ(error_kind(R"({"sizes": []})"), ConfigErrorKind::invariant);
  EXPECT_EQ(error_kind(R"({"mechanisms": ["first_price"]})"), ConfigErrorKind::invariant);
  EXPECT_EQ(error_kind(R"({"scoring": {"feedback_floor": 0}})"), ConfigErrorKind::invariant);
  EXPECT_EQ(error_kind(R"({"population": {"request_fraction": 1.5}})"),
            ConfigErrorKind::invariant);
  EXPECT_EQ(error_kind(R"({"population": {"gamma_range": [1]}})"),
            ConfigErrorKind::type_mismatch);
  EXPECT_EQ(error_kind(R"([1, 2])"), ConfigErrorKind::type_mismatch);
  EXPECT_EQ(error_kind("{\n  \"sizes\": [1,\n}"), ConfigErrorKind::syntax);
}

TEST(load_config, syntax_error_reports_line_and_column)
{
  try
  {
    parse_config("{\n  \"sizes\": [1, 2\n  \"replications\": 3\n}");
    FAIL() << "expected syntax error";
  }
  catch (ConfigError const &e)
  {
    EXPECT_EQ(e.kind(), ConfigErrorKind::syntax);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
  }
}

TEST(load_config, missing_file)
{
  try
  {
    load_config("/nonexistent/gms.json");
    FAIL();
  }
  catch (ConfigError const &e)
  {
    EXPECT_EQ(e.kind(), ConfigErrorKind::missing_file);
  }
}

TEST(load_config, shipped_presets_load)
{
  auto dir   = std::filesystem::path(GMS_SOURCE_DIR) / "configs";
  auto paper = load_config(dir / "paper_preset.json");
  EXPECT_EQ(paper, ExperimentConfig{});
  auto constrained = load_config(dir / "constrained_catalog.json");
  EXPECT_FALSE(constrained.population.catalog.empty());
  EXPECT_LT(constrained.population.capacity.memory, kDefaultCapacity);
}

TEST(load_config, catalog_path_relative_to_config)
{
  auto dir = std::filesystem::temp_directory_path() / "gms_config_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "cat.json")
      << R"([{"name":"x","family":"VAE","latency":"low","cost":"low"}])";
  std::ofstream(dir / "cfg.json") << R"({"population": {"catalog": "cat.json"}})";
  auto cfg = load_config(dir / "cfg.json");
  ASSERT_EQ(cfg.population.catalog.size(), 1u);
  EXPECT_EQ(cfg.population.catalog[0].name, "x");

  std::ofstream(dir / "bad.json") << R"({"population": {"catalog": "missing.json"}})";
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}

TEST(config_json, round_trips_through_canonical_form)
{
  auto cfg = parse_config(R"({"sizes":[2,7],"master_seed":99,
                              "population":{"n_owners":3,
                                "catalog":[{"name":"m","family":"GAN","latency":"low","cost":"high"}]},
                              "scoring":{"price_weight":0.5}})");
  EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);
}

TEST(config_digest, stable_under_reordering_and_sensitive_to_values)
{
  auto a = parse_config(R"({"replications": 10, "master_seed": 3, "sizes": [1, 2]})");
  auto b = parse_config(R"({"sizes": [1, 2], "master_seed": 3, "replications": 10})");
  EXPECT_EQ(config_digest(a), config_digest(b));
  EXPECT_EQ(config_digest(a).size(), 16u);

  // Spelling out a default is not a semantic change.
  auto c = parse_config(
      R"({"sizes": [1, 2], "master_seed": 3, "replications": 10, "population": {"n_owners": 10}})");
  EXPECT_EQ(config_digest(a), config_digest(c));

  auto d = parse_config(R"({"sizes": [1, 2], "master_seed": 4, "replications": 10})");
  auto e = parse_config(R"({"sizes": [1, 2], "master_seed": 3, "replications": 11})");
  auto f = parse_config(
      R"({"sizes": [1, 2], "master_seed": 3, "replications": 10, "scoring": {"ema_alpha": 0.3}})");
  EXPECT_NE(config_digest(a), config_digest(d));
  EXPECT_NE(config_digest(a), config_digest(e));
  EXPECT_NE(config_digest(a), config_digest(f));
}

TEST(report, csv_layout)
{
  RevenueCurve curve;
  curve.records.push_back({1, Mechanism::second_price, 2.5, 0.125, 7.0, 10});
  curve.records.push_back({1, Mechanism::second_score, 3.0, 0.0, 8.25, 10});
  EXPECT_EQ(revenue_curve_csv(curve),
            "size_billions,mechanism,mean_revenue,revenue_stderr,mean_welfare,replications\n"
            "1,second_price,2.5,0.125,7,10\n"
            "1,second_score,3,0,8.25,10\n");
}

TEST(report, format_double_round_trips)
{
  for (double v : {0.1, 1.0 / 3.0, 12345.678901234567, 1e-300})
    EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(report, atomic_write_replaces_file)
{
  auto path = std::filesystem::temp_directory_path() / "gms_atomic_test.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::string   text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "second");
  EXPECT_THROW(write_file_atomic("/nonexistent/dir/out.txt", "x"), std::runtime_error);
}
