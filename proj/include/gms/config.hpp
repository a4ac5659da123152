#pragma once

// JSON experiment configuration.
//
// Every field is optional; missing ones take the defaults of
// ExperimentConfig, which reproduce the 10-owner, 1..10 billion sweep.
// Unknown keys are rejected at every nesting level.

#include "gms/sim_engine.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>

namespace gms {

enum class ConfigErrorKind
{
  missing_file,
  syntax,
  unknown_field,
  type_mismatch,
  invariant,
};

inline std::string_view to_string(ConfigErrorKind k)
{
  switch (k)
  {
  case ConfigErrorKind::missing_file:
    return "missing file";
  case ConfigErrorKind::syntax:
    return "syntax error";
  case ConfigErrorKind::unknown_field:
    return "unknown field";
  case ConfigErrorKind::type_mismatch:
    return "type mismatch";
  case ConfigErrorKind::invariant:
    return "invariant violation";
  }
  return "config error";
}

class ConfigError : public std::runtime_error
{
public:
  ConfigError(ConfigErrorKind kind, std::string const &what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what)
    , kind_(kind)
  {}

  ConfigErrorKind kind() const
  {
    return kind_;
  }

private:
  ConfigErrorKind kind_;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(json const &obj, std::string const &where,
                           std::initializer_list<char const *> allowed)
{
  for (auto it = obj.begin(); it != obj.end(); ++it)
  {
    bool known = false;
    for (char const *k : allowed)
      known = known || it.key() == k;
    if (!known)
      throw ConfigError(ConfigErrorKind::unknown_field, where + it.key());
  }
}

inline void require_object(json const &j, std::string const &where)
{
  if (!j.is_object())
    throw ConfigError(ConfigErrorKind::type_mismatch, where + " must be an object");
}

template <typename T>
void read_field(json const &obj, char const *key, std::string const &where, T &out)
{
  if (!obj.contains(key))
    return;
  json const &v = obj.at(key);
  try
  {
    if constexpr (std::is_same_v<T, bool>)
    {
      if (!v.is_boolean())
        throw ConfigError(ConfigErrorKind::type_mismatch, where + key + " must be a boolean");
      out = v.get<bool>();
    }
    else if constexpr (std::is_integral_v<T>)
    {
      if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        throw ConfigError(ConfigErrorKind::invariant, where + key + " must be >= 0");
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(ConfigErrorKind::type_mismatch,
                          where + key + " must be a non-negative integer");
      auto const raw = v.get<std::uint64_t>();
      if (raw > std::numeric_limits<T>::max())
        throw ConfigError(ConfigErrorKind::invariant, where + key + " is too large");
      out = static_cast<T>(raw);
    }
    else
    {
      if (!v.is_number())
        throw ConfigError(ConfigErrorKind::type_mismatch, where + key + " must be a number");
      out = v.get<double>();
    }
  }
  catch (json::exception const &e)
  {
    throw ConfigError(ConfigErrorKind::type_mismatch, where + key + ": " + e.what());
  }
}

inline void read_range(json const &obj, char const *key, std::string const &where,
                       ValueRange &out)
{
  if (!obj.contains(key))
    return;
  json const &v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(ConfigErrorKind::type_mismatch, where + key + " must be [lo, hi]");
  out = {v[0].get<double>(), v[1].get<double>()};
}

inline std::pair<std::size_t, std::size_t> line_column(std::string const &text,
                                                       std::size_t byte_offset)
{
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte_offset && i < text.size(); ++i)
  {
    if (text[i] == '\n')
    {
      ++line;
      col = 1;
    }
    else
    {
      ++col;
    }
  }
  return {line, col};
}

inline void apply_population(json const &j, std::filesystem::path const &base_dir,
                             PopulationConfig &pop, bool &universe_given)
{
  std::string const where = "population.";
  require_object(j, "population");
  reject_unknown(j, where,
                 {"n_owners", "universe_size", "basic_value_range", "execution_value_range",
                  "gamma_range", "request_fraction", "execution_value_mode", "capacity",
                  "catalog"});
  read_field(j, "n_owners", where, pop.n_owners);
  if (j.contains("universe_size"))
  {
    read_field(j, "universe_size", where, pop.universe_size);
    universe_given = true;
  }
  read_range(j, "basic_value_range", where, pop.basic_value_range);
  read_range(j, "execution_value_range", where, pop.execution_value_range);
  read_range(j, "gamma_range", where, pop.gamma_range);
  read_field(j, "request_fraction", where, pop.request_fraction);

  if (j.contains("execution_value_mode"))
  {
    auto const &v    = j.at("execution_value_mode");
    auto        mode = v.is_string() ? parse_execution_value_mode(v.get<std::string>())
                                     : std::nullopt;
    if (!mode)
      throw ConfigError(ConfigErrorKind::invariant,
                        where + "execution_value_mode must be \"per_model\" or \"global_per_task\"");
    pop.execution_value_mode = *mode;
  }

  if (j.contains("capacity"))
  {
    auto const &c = j.at("capacity");
    require_object(c, where + "capacity");
    reject_unknown(c, where + "capacity.", {"memory", "compute", "bandwidth"});
    read_field(c, "memory", where + "capacity.", pop.capacity.memory);
    read_field(c, "compute", where + "capacity.", pop.capacity.compute);
    read_field(c, "bandwidth", where + "capacity.", pop.capacity.bandwidth);
  }

  if (j.contains("catalog"))
  {
    auto const &c = j.at("catalog");
    try
    {
      if (c.is_string())
      {
        std::filesystem::path p = c.get<std::string>();
        if (p.is_relative())
          p = base_dir / p;
        pop.catalog = load_catalog(p);
      }
      else
      {
        pop.catalog = parse_catalog(c);
      }
    }
    catch (CatalogError const &e)
    {
      throw ConfigError(ConfigErrorKind::invariant, where + "catalog: " + e.what());
    }
  }
}

inline void apply_scoring(json const &j, ScoringSystem &s)
{
  std::string const where = "scoring.";
  require_object(j, "scoring");
  reject_unknown(j, where,
                 {"basic_weight", "execution_weight", "price_weight",
                  "normalize_by_request_count", "feedback_floor", "feedback_ceiling", "ema_alpha",
                  "acceptance_weight"});
  read_field(j, "basic_weight", where, s.basic_weight);
  read_field(j, "execution_weight", where, s.execution_weight);
  read_field(j, "price_weight", where, s.price_weight);
  read_field(j, "normalize_by_request_count", where, s.normalize_by_request_count);
  read_field(j, "feedback_floor", where, s.feedback_floor);
  read_field(j, "feedback_ceiling", where, s.feedback_ceiling);
  read_field(j, "ema_alpha", where, s.ema_alpha);
  read_field(j, "acceptance_weight", where, s.acceptance_weight);
}

}  // namespace detail

/// Builds a config from already-parsed JSON. Relative catalog paths resolve
/// against `base_dir`.
inline ExperimentConfig config_from_json(nlohmann::json const &doc,
                                         std::filesystem::path const &base_dir = ".")
{
  using detail::read_field;
  detail::require_object(doc, "config");
  detail::reject_unknown(doc, "",
                         {"sizes", "replications", "rounds_per_replication", "mechanisms",
                          "master_seed", "feedback_enabled", "population", "scoring"});

  ExperimentConfig cfg;
  bool             universe_given = false;

  if (doc.contains("sizes"))
  {
    auto const &v = doc.at("sizes");
    if (!v.is_array())
      throw ConfigError(ConfigErrorKind::type_mismatch, "sizes must be an array of integers");
    cfg.sizes.clear();
    for (auto const &s : v)
    {
      if (!s.is_number_integer())
        throw ConfigError(ConfigErrorKind::type_mismatch, "sizes must be an array of integers");
      if (s.get<std::int64_t>() < 1 || s.get<std::int64_t>() > 65535)
        throw ConfigError(ConfigErrorKind::invariant, "sizes must lie in [1, 65535]");
      cfg.sizes.push_back(s.get<std::uint32_t>());
    }
  }
  read_field(doc, "replications", "", cfg.replications);
  read_field(doc, "rounds_per_replication", "", cfg.rounds_per_replication);
  read_field(doc, "master_seed", "", cfg.master_seed);
  read_field(doc, "feedback_enabled", "", cfg.feedback_enabled);

  if (doc.contains("mechanisms"))
  {
    auto const &v = doc.at("mechanisms");
    if (!v.is_array())
      throw ConfigError(ConfigErrorKind::type_mismatch, "mechanisms must be an array of names");
    cfg.mechanisms.clear();
    for (auto const &m : v)
    {
      auto mech = m.is_string() ? parse_mechanism(m.get<std::string>()) : std::nullopt;
      if (!mech)
        throw ConfigError(ConfigErrorKind::invariant,
                          "unknown mechanism " + m.dump() +
                              " (expected \"second_score\" or \"second_price\")");
      cfg.mechanisms.push_back(*mech);
    }
  }

  if (doc.contains("population"))
    detail::apply_population(doc.at("population"), base_dir, cfg.population, universe_given);
  if (doc.contains("scoring"))
    detail::apply_scoring(doc.at("scoring"), cfg.scoring);

  if (!universe_given && !cfg.sizes.empty())
  {
    auto const max_size       = *std::max_element(cfg.sizes.begin(), cfg.sizes.end());
    cfg.population.universe_size = max_size * max_size;
  }

  if (auto v = cfg.violation(); !v.empty())
    throw ConfigError(ConfigErrorKind::invariant, v);
  return cfg;
}

inline ExperimentConfig parse_config(std::string const &text,
                                     std::filesystem::path const &base_dir = ".")
{
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse(text);
  }
  catch (nlohmann::json::parse_error const &e)
  {
    auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(ConfigErrorKind::syntax,
                      "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                          e.what());
  }
  return config_from_json(doc, base_dir);
}

inline ExperimentConfig load_config(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError(ConfigErrorKind::missing_file, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, path.parent_path().empty() ? "." : path.parent_path());
}

/// Fully resolved config as canonical JSON (object keys sorted).
inline nlohmann::json config_to_json(ExperimentConfig const &cfg)
{
  using nlohmann::json;
  auto const &p = cfg.population;
  auto const &s = cfg.scoring;

  auto mechs = json::array();
  for (auto m : cfg.mechanisms)
    mechs.push_back(std::string(to_string(m)));

  json pop = {
      {"n_owners", p.n_owners},
      {"universe_size", p.universe_size},
      {"basic_value_range", {p.basic_value_range.lo, p.basic_value_range.hi}},
      {"execution_value_range", {p.execution_value_range.lo, p.execution_value_range.hi}},
      {"gamma_range", {p.gamma_range.lo, p.gamma_range.hi}},
      {"request_fraction", p.request_fraction},
      {"execution_value_mode", std::string(to_string(p.execution_value_mode))},
      {"capacity",
       {{"memory", p.capacity.memory},
        {"compute", p.capacity.compute},
        {"bandwidth", p.capacity.bandwidth}}},
      {"catalog", catalog_to_json(p.catalog)},
  };
  json scoring = {
      {"basic_weight", s.basic_weight},
      {"execution_weight", s.execution_weight},
      {"price_weight", s.price_weight},
      {"normalize_by_request_count", s.normalize_by_request_count},
      {"feedback_floor", s.feedback_floor},
      {"feedback_ceiling", s.feedback_ceiling},
      {"ema_alpha", s.ema_alpha},
      {"acceptance_weight", s.acceptance_weight},
  };
  return {
      {"sizes", cfg.sizes},
      {"replications", cfg.replications},
      {"rounds_per_replication", cfg.rounds_per_replication},
      {"mechanisms", mechs},
      {"master_seed", cfg.master_seed},
      {"feedback_enabled", cfg.feedback_enabled},
      {"population", pop},
      {"scoring", scoring},
  };
}

/// FNV-1a over the canonical JSON of the resolved config, as 16 hex digits.
inline std::string config_digest(ExperimentConfig const &cfg)
{
  std::string const   text = config_to_json(cfg).dump();
  std::uint64_t       h    = 0xcbf29ce484222325ULL;
  for (unsigned char c : text)
  {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gms
