#pragma once

// Domain types shared by every part of the model market: profiles, bids,
// server capacity, the scoring system, feedback reports and auction outcomes.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gms {

using OwnerId = std::uint32_t;
using TaskId  = std::uint32_t;

inline constexpr double kBasicValueMin     = 0.0;
inline constexpr double kBasicValueMax     = 10.0;
inline constexpr double kExecutionValueMin = 0.0;
inline constexpr double kExecutionValueMax = 1.0;

enum class Tier
{
  low,
  medium,
  high
};

inline std::string_view to_string(Tier t)
{
  switch (t)
  {
  case Tier::low:
    return "low";
  case Tier::medium:
    return "medium";
  case Tier::high:
    return "high";
  }
  return "medium";
}

inline std::optional<Tier> parse_tier(std::string_view s)
{
  if (s == "low")
    return Tier::low;
  if (s == "medium")
    return Tier::medium;
  if (s == "high")
    return Tier::high;
  return std::nullopt;
}

/// Memory, compute and bandwidth in abstract units. Used both for what a
/// model consumes and for what an edge server offers.
struct ResourceVector
{
  double memory    = 0.0;
  double compute   = 0.0;
  double bandwidth = 0.0;

  bool operator==(ResourceVector const &) const = default;

  bool non_negative() const
  {
    return memory >= 0.0 && compute >= 0.0 && bandwidth >= 0.0;
  }

  /// Component-wise `*this <= other`, inclusive at equality.
  bool fits_within(ResourceVector const &other) const
  {
    return memory <= other.memory && compute <= other.compute && bandwidth <= other.bandwidth;
  }
};

using EdgeServerCapacity = ResourceVector;

struct ModelProfile
{
  OwnerId                  owner_id      = 0;
  std::uint32_t            size_billions = 1;
  double                   basic_value   = 0.0;
  std::map<TaskId, double> capabilities;  // task -> execution value
  Tier                     latency_tier = Tier::medium;
  ResourceVector           resource_cost;
  std::string              model_name;  // informational, from a catalog entry

  bool operator==(ModelProfile const &) const = default;

  std::size_t expected_capability_count() const
  {
    return static_cast<std::size_t>(size_billions) * size_billions;
  }

  double total_execution_value() const
  {
    double sum = 0.0;
    for (auto const &[task, value] : capabilities)
      sum += value;
    return sum;
  }
};

struct ModelBid
{
  ModelProfile profile;
  double       price = 0.0;

  OwnerId owner() const
  {
    return profile.owner_id;
  }

  bool operator==(ModelBid const &) const = default;
};

struct TaskRequestSet
{
  std::set<TaskId> requested;

  bool operator==(TaskRequestSet const &) const = default;
};

struct FeedbackReport
{
  OwnerId       owner_id        = 0;
  std::uint64_t round_index     = 0;
  double        user_acceptance = 0.0;  // subjective, [0,1]
  double        content_quality = 0.0;  // objective, [0,1]

  bool operator==(FeedbackReport const &) const = default;

  bool in_range() const
  {
    return user_acceptance >= 0.0 && user_acceptance <= 1.0 && content_quality >= 0.0 &&
           content_quality <= 1.0;
  }
};

class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// The auctioneer's scoring rule plus the feedback state accumulated from past
/// rounds. Treated as a value: updates produce a new ScoringSystem.
struct ScoringSystem
{
  double basic_weight               = 1.0;
  double execution_weight           = 1.0;
  double price_weight               = 0.0;
  bool   normalize_by_request_count = false;

  std::map<OwnerId, double> feedback_multiplier;
  double                    feedback_floor   = 0.5;
  double                    feedback_ceiling = 1.5;
  double                    ema_alpha        = 0.2;
  // Share of the feedback target driven by user acceptance; the remainder
  // comes from content quality.
  double acceptance_weight = 0.5;

  std::vector<FeedbackReport> history;

  bool operator==(ScoringSystem const &) const = default;

  double multiplier_for(OwnerId owner) const
  {
    auto it = feedback_multiplier.find(owner);
    return it == feedback_multiplier.end() ? 1.0 : it->second;
  }

  /// Returns an empty string when valid, otherwise the first violated rule.
  std::string violation() const
  {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(basic_weight) || !finite_nonneg(execution_weight) ||
        !finite_nonneg(price_weight))
      return "scoring weights must be finite and non-negative";
    if (!(basic_weight + execution_weight > 0.0))
      return "basic_weight + execution_weight must be positive";
    if (!(feedback_floor > 0.0 && feedback_floor <= 1.0 && feedback_ceiling >= 1.0 &&
          std::isfinite(feedback_ceiling)))
      return "feedback bounds must satisfy 0 < floor <= 1 <= ceiling";
    if (!(ema_alpha >= 0.0 && ema_alpha <= 1.0))
      return "ema_alpha must lie in [0,1]";
    if (!(acceptance_weight >= 0.0 && acceptance_weight <= 1.0))
      return "acceptance_weight must lie in [0,1]";
    for (auto const &[owner, m] : feedback_multiplier)
    {
      if (!(m >= feedback_floor && m <= feedback_ceiling))
        return "feedback multiplier for owner " + std::to_string(owner) + " out of bounds";
    }
    return {};
  }

  bool valid() const
  {
    return violation().empty();
  }

  /// Same system with every scoring weight multiplied by `c`.
  ScoringSystem scaled(double c) const
  {
    ScoringSystem out = *this;
    out.basic_weight *= c;
    out.execution_weight *= c;
    out.price_weight *= c;
    return out;
  }
};

enum class Mechanism
{
  second_score,
  second_price
};

inline std::string_view to_string(Mechanism m)
{
  return m == Mechanism::second_score ? "second_score" : "second_price";
}

inline std::optional<Mechanism> parse_mechanism(std::string_view s)
{
  if (s == "second_score")
    return Mechanism::second_score;
  if (s == "second_price")
    return Mechanism::second_price;
  return std::nullopt;
}

struct LedgerEntry
{
  OwnerId owner_id = 0;
  // Absent for mechanisms that rank on price alone.
  std::optional<double> score;
  double                price = 0.0;

  bool operator==(LedgerEntry const &) const = default;
};

struct AuctionOutcome
{
  Mechanism                mechanism = Mechanism::second_score;
  std::optional<OwnerId>   winner;
  double                   payment = 0.0;
  std::vector<LedgerEntry> ranked_ledger;  // feasible bids, best first
  std::size_t              feasible_count = 0;

  bool operator==(AuctionOutcome const &) const = default;
};

inline constexpr double kReservePrice = 0.0;

// ---------------------------------------------------------------------------
// Profile validation

enum class ProfileViolation
{
  capability_count_mismatch,
  basic_value_out_of_range,
  execution_value_out_of_range,
  task_id_overflow,
  non_positive_size,
  negative_resource_cost,
};

inline std::string_view to_string(ProfileViolation v)
{
  switch (v)
  {
  case ProfileViolation::capability_count_mismatch:
    return "capability_count_mismatch";
  case ProfileViolation::basic_value_out_of_range:
    return "basic_value_out_of_range";
  case ProfileViolation::execution_value_out_of_range:
    return "execution_value_out_of_range";
  case ProfileViolation::task_id_overflow:
    return "task_id_overflow";
  case ProfileViolation::non_positive_size:
    return "non_positive_size";
  case ProfileViolation::negative_resource_cost:
    return "negative_resource_cost";
  }
  return "unknown";
}

struct ValidationResult
{
  std::optional<ProfileViolation> violation;
  std::string                     detail;

  bool ok() const
  {
    return !violation.has_value();
  }
  explicit operator bool() const
  {
    return ok();
  }
};

/// Checks a profile against its invariants; reports the first one violated.
inline ValidationResult validate_profile(ModelProfile const &profile, std::size_t universe_size)
{
  if (profile.size_billions == 0)
    return {ProfileViolation::non_positive_size, "size_billions must be positive"};

  auto const expected = profile.expected_capability_count();
  if (profile.capabilities.size() != expected)
  {
    return {ProfileViolation::capability_count_mismatch,
            "expected " + std::to_string(expected) + " capabilities, found " +
                std::to_string(profile.capabilities.size())};
  }

  if (!(profile.basic_value >= kBasicValueMin && profile.basic_value <= kBasicValueMax))
  {
    return {ProfileViolation::basic_value_out_of_range,
            "basic value " + std::to_string(profile.basic_value) + " outside [0,10]"};
  }

  for (auto const &[task, value] : profile.capabilities)
  {
    if (!(value >= kExecutionValueMin && value <= kExecutionValueMax))
    {
      return {ProfileViolation::execution_value_out_of_range,
              "execution value for task " + std::to_string(task) + " outside [0,1]"};
    }
  }

  for (auto const &[task, value] : profile.capabilities)
  {
    if (task >= universe_size)
    {
      return {ProfileViolation::task_id_overflow,
              "task " + std::to_string(task) + " >= universe size " +
                  std::to_string(universe_size)};
    }
  }

  if (!profile.resource_cost.non_negative())
    return {ProfileViolation::negative_resource_cost, "resource cost components must be >= 0"};

  return {};
}

/// Price must be finite and non-negative.
inline bool valid_price(double price)
{
  return std::isfinite(price) && price >= 0.0;
}

}  // namespace gms
