#pragma once

// Random market generation. A model of s billion parameters covers s^2
// downstream tasks drawn from a fixed universe {0, ..., U-1}; basic values and
// execution values are uniform over their ranges, and bid prices are a random
// fraction of the model's total value.

#include "gms/market_model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace gms {

using RngStream = std::mt19937_64;

enum class ModelFamily
{
  GAN,
  VAE,
  diffusion,
  transformer
};

inline std::string_view to_string(ModelFamily f)
{
  switch (f)
  {
  case ModelFamily::GAN:
    return "GAN";
  case ModelFamily::VAE:
    return "VAE";
  case ModelFamily::diffusion:
    return "diffusion";
  case ModelFamily::transformer:
    return "transformer";
  }
  return "transformer";
}

inline std::optional<ModelFamily> parse_family(std::string_view s)
{
  if (s == "GAN")
    return ModelFamily::GAN;
  if (s == "VAE")
    return ModelFamily::VAE;
  if (s == "diffusion")
    return ModelFamily::diffusion;
  if (s == "transformer")
    return ModelFamily::transformer;
  return std::nullopt;
}

struct CatalogEntry
{
  std::string name;
  ModelFamily family       = ModelFamily::transformer;
  Tier        latency_tier = Tier::medium;
  Tier        cost_tier    = Tier::medium;

  bool operator==(CatalogEntry const &) const = default;
};

struct ValueRange
{
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(ValueRange const &) const = default;

  bool well_ordered() const
  {
    return std::isfinite(lo) && std::isfinite(hi) && lo <= hi;
  }
};

enum class ExecutionValueMode
{
  per_model,        // one draw per (model, task) pair
  global_per_task,  // one draw per task, shared by every model covering it
};

inline std::string_view to_string(ExecutionValueMode m)
{
  return m == ExecutionValueMode::per_model ? "per_model" : "global_per_task";
}

inline std::optional<ExecutionValueMode> parse_execution_value_mode(std::string_view s)
{
  if (s == "per_model")
    return ExecutionValueMode::per_model;
  if (s == "global_per_task")
    return ExecutionValueMode::global_per_task;
  return std::nullopt;
}

inline constexpr double kDefaultCapacity = 1000.0;

struct PopulationConfig
{
  std::uint32_t      n_owners              = 10;
  std::uint32_t      size_billions         = 1;
  std::uint32_t      universe_size         = 100;
  ValueRange         basic_value_range     = {kBasicValueMin, kBasicValueMax};
  ValueRange         execution_value_range = {kExecutionValueMin, kExecutionValueMax};
  ValueRange         gamma_range           = {0.5, 1.0};
  double             request_fraction      = 0.5;
  ExecutionValueMode execution_value_mode  = ExecutionValueMode::per_model;
  EdgeServerCapacity capacity = {kDefaultCapacity, kDefaultCapacity, kDefaultCapacity};
  std::vector<CatalogEntry> catalog;

  bool operator==(PopulationConfig const &) const = default;

  std::string violation() const
  {
    if (n_owners < 1)
      return "n_owners must be >= 1";
    if (size_billions < 1)
      return "size_billions must be >= 1";
    if (universe_size < 1)
      return "universe_size must be >= 1";
    if (!basic_value_range.well_ordered() || basic_value_range.lo < kBasicValueMin ||
        basic_value_range.hi > kBasicValueMax)
      return "basic_value_range must be an ordered sub-range of [0,10]";
    if (!execution_value_range.well_ordered() || execution_value_range.lo < kExecutionValueMin ||
        execution_value_range.hi > kExecutionValueMax)
      return "execution_value_range must be an ordered sub-range of [0,1]";
    if (!gamma_range.well_ordered() || gamma_range.lo < 0.0)
      return "gamma_range must be ordered and non-negative";
    if (!(request_fraction > 0.0 && request_fraction <= 1.0))
      return "request_fraction must lie in (0,1]";
    if (!capacity.non_negative())
      return "capacity components must be >= 0";
    return {};
  }
};

/// Cost units for a tier, before scaling by model size.
inline double tier_to_cost(Tier tier)
{
  switch (tier)
  {
  case Tier::low:
    return 1.0;
  case Tier::medium:
    return 2.0;
  case Tier::high:
    return 3.0;
  }
  return 2.0;
}

/// Resource cost of a model: the tier cost on every component, scaled by
/// size_billions / 10.
inline ResourceVector resource_cost_for(Tier cost_tier, std::uint32_t size_billions)
{
  double const c = tier_to_cost(cost_tier) * static_cast<double>(size_billions) / 10.0;
  return {c, c, c};
}

namespace detail {

inline double uniform(RngStream &rng, ValueRange r)
{
  if (r.lo == r.hi)
    return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

// Partial Fisher-Yates: the first `k` entries become a uniform sample of
// {0..n-1} without replacement.
inline std::vector<TaskId> sample_tasks(RngStream &rng, std::uint32_t n, std::size_t k)
{
  std::vector<TaskId> pool(n);
  std::iota(pool.begin(), pool.end(), TaskId{0});
  for (std::size_t i = 0; i < k; ++i)
  {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace detail

/// Draws one model profile. `global_values`, when non-empty, supplies the
/// per-task execution values instead of fresh per-model draws.
inline ModelProfile generate_profile(OwnerId owner_id, std::uint32_t size_billions,
                                     PopulationConfig const &cfg, RngStream &rng,
                                     std::span<double const> global_values = {})
{
  if (size_billions == 0)
    throw InvalidArgument("size_billions must be positive");
  std::size_t const count = static_cast<std::size_t>(size_billions) * size_billions;
  if (count > cfg.universe_size)
  {
    throw InvalidArgument("model size " + std::to_string(size_billions) + " needs " +
                          std::to_string(count) + " tasks but the universe has " +
                          std::to_string(cfg.universe_size));
  }
  if (!global_values.empty() && global_values.size() != cfg.universe_size)
    throw InvalidArgument("global execution value table does not match universe size");

  ModelProfile p;
  p.owner_id      = owner_id;
  p.size_billions = size_billions;
  p.basic_value   = detail::uniform(rng, cfg.basic_value_range);

  for (TaskId task : detail::sample_tasks(rng, cfg.universe_size, count))
  {
    double const v = global_values.empty() ? detail::uniform(rng, cfg.execution_value_range)
                                           : global_values[task];
    p.capabilities.emplace(task, v);
  }

  Tier cost_tier = Tier::medium;
  if (!cfg.catalog.empty())
  {
    auto const &entry = cfg.catalog[owner_id % cfg.catalog.size()];
    p.latency_tier    = entry.latency_tier;
    p.model_name      = entry.name;
    cost_tier         = entry.cost_tier;
  }
  p.resource_cost = resource_cost_for(cost_tier, size_billions);
  return p;
}

/// Bid price as a fraction `gamma` of the model's total value.
inline double price_from_value(ModelProfile const &profile, double gamma)
{
  return gamma * (profile.basic_value + profile.total_execution_value());
}

struct Market
{
  std::vector<ModelBid> bids;
  TaskRequestSet        requests;
};

inline std::size_t request_count(PopulationConfig const &cfg)
{
  return static_cast<std::size_t>(
      std::llround(cfg.request_fraction * static_cast<double>(cfg.universe_size)));
}

/// Samples a full market: one bid per owner (ids 0..n-1) and the user
/// request set for the round.
inline Market sample_market(PopulationConfig const &cfg, RngStream &rng)
{
  if (auto v = cfg.violation(); !v.empty())
    throw InvalidArgument(v);

  std::vector<double> global_values;
  if (cfg.execution_value_mode == ExecutionValueMode::global_per_task)
  {
    global_values.resize(cfg.universe_size);
    for (auto &v : global_values)
      v = detail::uniform(rng, cfg.execution_value_range);
  }

  Market m;
  m.bids.reserve(cfg.n_owners);
  for (OwnerId owner = 0; owner < cfg.n_owners; ++owner)
  {
    ModelBid bid;
    bid.profile      = generate_profile(owner, cfg.size_billions, cfg, rng, global_values);
    double const gam = detail::uniform(rng, cfg.gamma_range);
    bid.price        = price_from_value(bid.profile, gam);
    m.bids.push_back(std::move(bid));
  }

  for (TaskId t : detail::sample_tasks(rng, cfg.universe_size, request_count(cfg)))
    m.requests.requested.insert(t);
  return m;
}

// ---------------------------------------------------------------------------
// Catalog files: a JSON array of {"name", "family", "latency", "cost"}.

class CatalogError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline std::vector<CatalogEntry> parse_catalog(nlohmann::json const &doc)
{
  if (!doc.is_array())
    throw CatalogError("catalog must be a JSON array");

  std::vector<CatalogEntry> out;
  for (std::size_t i = 0; i < doc.size(); ++i)
  {
    auto const &rec   = doc[i];
    auto        where = "catalog entry " + std::to_string(i) + ": ";
    if (!rec.is_object())
      throw CatalogError(where + "expected an object");
    for (auto it = rec.begin(); it != rec.end(); ++it)
    {
      if (it.key() != "name" && it.key() != "family" && it.key() != "latency" &&
          it.key() != "cost")
        throw CatalogError(where + "unknown field '" + it.key() + "'");
    }
    auto text = [&](char const *key) {
      if (!rec.contains(key) || !rec[key].is_string())
        throw CatalogError(where + "missing string field '" + key + "'");
      return rec[key].get<std::string>();
    };

    CatalogEntry e;
    e.name      = text("name");
    auto family = parse_family(text("family"));
    auto lat    = parse_tier(text("latency"));
    auto cost   = parse_tier(text("cost"));
    if (!family)
      throw CatalogError(where + "unknown family '" + text("family") + "'");
    if (!lat)
      throw CatalogError(where + "invalid latency tier '" + text("latency") + "'");
    if (!cost)
      throw CatalogError(where + "invalid cost tier '" + text("cost") + "'");
    e.family       = *family;
    e.latency_tier = *lat;
    e.cost_tier    = *cost;
    out.push_back(std::move(e));
  }
  return out;
}

inline nlohmann::json catalog_to_json(std::span<CatalogEntry const> entries)
{
  auto arr = nlohmann::json::array();
  for (auto const &e : entries)
  {
    arr.push_back({{"name", e.name},
                   {"family", std::string(to_string(e.family))},
                   {"latency", std::string(to_string(e.latency_tier))},
                   {"cost", std::string(to_string(e.cost_tier))}});
  }
  return arr;
}

inline std::vector<CatalogEntry> load_catalog(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
    throw CatalogError("cannot open catalog file " + path.string());
  try
  {
    return parse_catalog(nlohmann::json::parse(in));
  }
  catch (nlohmann::json::parse_error const &e)
  {
    throw CatalogError(path.string() + ": " + e.what());
  }
}

}  // namespace gms
