#include "gms/population.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace gms;

namespace {

PopulationConfig config_for(std::uint32_t size)
{
  PopulationConfig cfg;
  cfg.size_billions = size;
  return cfg;
}

}  // namespace

TEST(generate_profile, capability_count_is_size_squared)
{
  RngStream rng(1);
  for (std::uint32_t size : {1u, 3u, 10u})
  {
    auto p = generate_profile(0, size, config_for(size), rng);
    EXPECT_EQ(p.capabilities.size(), static_cast<std::size_t>(size) * size);
    EXPECT_TRUE(validate_profile(p, 100).ok()) << validate_profile(p, 100).detail;
  }
}

TEST(generate_profile, size_ten_covers_whole_default_universe)
{
  RngStream rng(2);
  auto      p = generate_profile(0, 10, config_for(10), rng);
  ASSERT_EQ(p.capabilities.size(), 100u);
  EXPECT_EQ(p.capabilities.begin()->first, 0u);
  EXPECT_EQ(p.capabilities.rbegin()->first, 99u);
}

TEST(generate_profile, rejects_size_beyond_universe)
{
  RngStream rng(3);
  auto      cfg     = config_for(11);
  EXPECT_THROW(generate_profile(0, 11, cfg, rng), InvalidArgument);
  cfg.universe_size = 121;
  EXPECT_NO_THROW(generate_profile(0, 11, cfg, rng));
}

TEST(generate_profile, default_tier_without_catalog)
{
  RngStream rng(4);
  auto      p = generate_profile(0, 5, config_for(5), rng);
  EXPECT_EQ(p.latency_tier, Tier::medium);
  EXPECT_EQ(p.resource_cost, (ResourceVector{1.0, 1.0, 1.0}));  // 2.0 * 5 / 10
  EXPECT_TRUE(p.model_name.empty());
}

TEST(generate_profile, catalog_assigns_round_robin)
{
  auto cfg    = config_for(10);
  cfg.catalog = {{"a", ModelFamily::VAE, Tier::low, Tier::low},
                 {"b", ModelFamily::diffusion, Tier::high, Tier::high}};
  RngStream rng(5);
  auto      p0 = generate_profile(0, 10, cfg, rng);
  auto      p1 = generate_profile(1, 10, cfg, rng);
  auto      p2 = generate_profile(2, 10, cfg, rng);
  EXPECT_EQ(p0.model_name, "a");
  EXPECT_EQ(p0.resource_cost, (ResourceVector{1.0, 1.0, 1.0}));
  EXPECT_EQ(p1.model_name, "b");
  EXPECT_EQ(p1.latency_tier, Tier::high);
  EXPECT_EQ(p1.resource_cost, (ResourceVector{3.0, 3.0, 3.0}));
  EXPECT_EQ(p2.model_name, "a");
}

TEST(tier_to_cost, fixed_mapping)
{
  EXPECT_EQ(tier_to_cost(Tier::low), 1.0);
  EXPECT_EQ(tier_to_cost(Tier::medium), 2.0);
  EXPECT_EQ(tier_to_cost(Tier::high), 3.0);
}

TEST(price_from_value, fraction_of_total_value)
{
  ModelProfile p;
  p.basic_value = 10.0;
  for (TaskId t = 0; t < 10; ++t)
    p.capabilities[t] = 1.0;  // total value 20
  EXPECT_DOUBLE_EQ(price_from_value(p, 0.5), 10.0);
  EXPECT_DOUBLE_EQ(price_from_value(p, 1.0), 20.0);

  ModelProfile empty;
  EXPECT_EQ(price_from_value(empty, 0.75), 0.0);
}

TEST(sample_market, default_population_at_size_five)
{
  RngStream rng(6);
  auto      m = sample_market(config_for(5), rng);
  ASSERT_EQ(m.bids.size(), 10u);
  for (std::size_t i = 0; i < m.bids.size(); ++i)
  {
    EXPECT_EQ(m.bids[i].owner(), i);
    EXPECT_EQ(m.bids[i].profile.capabilities.size(), 25u);
  }
  EXPECT_EQ(m.requests.requested.size(), 50u);
  for (TaskId t : m.requests.requested)
    EXPECT_LT(t, 100u);
}

TEST(sample_market, single_owner)
{
  auto cfg     = config_for(2);
  cfg.n_owners = 1;
  RngStream rng(7);
  EXPECT_EQ(sample_market(cfg, rng).bids.size(), 1u);
}

TEST(sample_market, same_seed_same_market)
{
  RngStream a(42), b(42), c(43);
  auto      ma = sample_market(config_for(4), a);
  auto      mb = sample_market(config_for(4), b);
  auto      mc = sample_market(config_for(4), c);
  EXPECT_EQ(ma.bids, mb.bids);
  EXPECT_EQ(ma.requests, mb.requests);
  EXPECT_NE(ma.bids, mc.bids);
}

TEST(sample_market, rejects_invalid_config)
{
  auto cfg             = config_for(2);
  cfg.request_fraction = 0.0;
  RngStream rng(1);
  EXPECT_THROW(sample_market(cfg, rng), InvalidArgument);
  cfg                   = config_for(2);
  cfg.gamma_range       = {1.0, 0.5};
  EXPECT_THROW(sample_market(cfg, rng), InvalidArgument);
  cfg                   = config_for(2);
  cfg.basic_value_range = {0.0, 11.0};
  EXPECT_THROW(sample_market(cfg, rng), InvalidArgument);
}

TEST(sample_market, global_per_task_values_are_shared)
{
  auto cfg                 = config_for(6);
  cfg.execution_value_mode = ExecutionValueMode::global_per_task;
  RngStream rng(8);
  auto      m = sample_market(cfg, rng);
  std::map<TaskId, double> seen;
  std::size_t              shared = 0;
  for (auto const &b : m.bids)
  {
    for (auto const &[t, v] : b.profile.capabilities)
    {
      auto [it, inserted] = seen.emplace(t, v);
      if (!inserted)
      {
        EXPECT_EQ(it->second, v);
        ++shared;
      }
    }
  }
  EXPECT_GT(shared, 0u);
}

TEST(population_properties, profiles_valid_and_prices_bounded)
{
  RngStream rng(9);
  for (std::uint32_t size = 1; size <= 10; ++size)
  {
    for (int rep = 0; rep < 30; ++rep)
    {
      auto m = sample_market(config_for(size), rng);
      for (auto const &b : m.bids)
      {
        EXPECT_TRUE(validate_profile(b.profile, 100).ok());
        EXPECT_EQ(b.profile.capabilities.size(), static_cast<std::size_t>(size) * size);
        EXPECT_GE(b.price, 0.0);
        EXPECT_LE(b.price, b.profile.basic_value + size * size);
        // gamma >= 0.5
        EXPECT_GE(b.price, 0.5 * price_from_value(b.profile, 1.0) - 1e-12);
      }
    }
  }
}

TEST(population_properties, uniform_means)
{
  RngStream        rng(10);
  PopulationConfig cfg = config_for(1);
  double           basic = 0.0, exec = 0.0;
  int const        n     = 100000;
  for (int i = 0; i < n; ++i)
  {
    auto p = generate_profile(0, 1, cfg, rng);
    basic += p.basic_value;
    exec += p.capabilities.begin()->second;
  }
  EXPECT_NEAR(basic / n, 5.0, 0.05);
  EXPECT_NEAR(exec / n, 0.5, 0.01);
}

TEST(catalog, parses_records_and_rejects_bad_ones)
{
  auto doc = nlohmann::json::parse(
      R"([{"name":"UMT","family":"transformer","latency":"low","cost":"high"}])");
  auto entries = parse_catalog(doc);
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].name, "UMT");
  EXPECT_EQ(entries[0].family, ModelFamily::transformer);
  EXPECT_EQ(entries[0].latency_tier, Tier::low);
  EXPECT_EQ(entries[0].cost_tier, Tier::high);
  EXPECT_EQ(parse_catalog(catalog_to_json(entries)), entries);

  EXPECT_THROW(parse_catalog(nlohmann::json::object()), CatalogError);
  EXPECT_THROW(parse_catalog(nlohmann::json::parse(
                   R"([{"name":"x","family":"GAN","latency":"fast","cost":"low"}])")),
               CatalogError);
  EXPECT_THROW(parse_catalog(nlohmann::json::parse(
                   R"([{"name":"x","family":"RNN","latency":"low","cost":"low"}])")),
               CatalogError);
  EXPECT_THROW(parse_catalog(nlohmann::json::parse(R"([{"name":"x","family":"GAN"}])")),
               CatalogError);
  EXPECT_THROW(
      parse_catalog(nlohmann::json::parse(
          R"([{"name":"x","family":"GAN","latency":"low","cost":"low","extra":1}])")),
      CatalogError);
}

TEST(catalog, shipped_sample_loads)
{
  auto entries = load_catalog(std::filesystem::path(GMS_SOURCE_DIR) / "catalog" / "gai_models.json");
  ASSERT_GE(entries.size(), 3u);
  EXPECT_EQ(entries[0].name, "VideoMAE V2");
  EXPECT_THROW(load_catalog("/nonexistent/catalog.json"), CatalogError);
}
