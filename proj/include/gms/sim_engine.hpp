#pragma once

// Monte Carlo driver: rounds, replications and the revenue-versus-size sweep.
//
// Every round draws from its own stream, derived from (master seed, size,
// replication, round). Work units never share a stream and results are
// reduced in a fixed order, so a sweep is bit-identical for any worker count.

#include "gms/feedback.hpp"
#include "gms/mechanisms.hpp"
#include "gms/population.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gms {

inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Chains splitmix64 over the four coordinates. Each step is a bijection of
/// the running state, so two coordinate tuples sharing a prefix never map to
/// the same seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t size,
                                           std::uint64_t replication, std::uint64_t round)
{
  std::uint64_t h = splitmix64(master_seed);
  h               = splitmix64(h ^ size);
  h               = splitmix64(h ^ replication);
  h               = splitmix64(h ^ round);
  return h;
}

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t size,
                               std::uint64_t replication, std::uint64_t round)
{
  return RngStream(derive_seed(master_seed, size, replication, round));
}

struct ExperimentConfig
{
  PopulationConfig           population;
  ScoringSystem              scoring;
  std::vector<std::uint32_t> sizes = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint32_t              replications           = 1000;
  std::uint32_t              rounds_per_replication = 1;
  std::vector<Mechanism>     mechanisms = {Mechanism::second_score, Mechanism::second_price};
  std::uint64_t              master_seed      = 20240601;
  bool                       feedback_enabled = false;

  bool operator==(ExperimentConfig const &) const = default;

  std::string violation() const
  {
    if (sizes.empty())
      return "sizes must be non-empty";
    for (auto s : sizes)
    {
      if (s < 1)
        return "sizes must be positive";
      if (static_cast<std::uint64_t>(s) * s > population.universe_size)
        return "size " + std::to_string(s) + " needs more tasks than universe_size " +
               std::to_string(population.universe_size);
    }
    if (std::vector<std::uint32_t> u = sizes;
        std::sort(u.begin(), u.end()), std::adjacent_find(u.begin(), u.end()) != u.end())
      return "sizes must not repeat";
    if (replications < 1)
      return "replications must be >= 1";
    if (rounds_per_replication < 1)
      return "rounds_per_replication must be >= 1";
    if (mechanisms.empty())
      return "mechanisms must be non-empty";
    if (std::vector<Mechanism> m = mechanisms;
        std::sort(m.begin(), m.end()), std::adjacent_find(m.begin(), m.end()) != m.end())
      return "mechanisms must not repeat";
    if (auto v = population.violation(); !v.empty())
      return v;
    return scoring.violation();
  }
};

struct MechanismResult
{
  AuctionOutcome outcome;
  double         welfare = 0.0;
};

struct RoundResult
{
  Market                        market;
  std::vector<MechanismResult>  results;  // same order as cfg.mechanisms
  std::optional<FeedbackReport> feedback;
  ScoringSystem                 scoring_after;
};

/// One time window: sample a market, run every configured mechanism on that
/// same bid set, and optionally feed back on the winning model.
inline RoundResult run_round(ExperimentConfig const &cfg, std::uint32_t size, RngStream &stream,
                             ScoringSystem const &scoring, std::uint64_t round_index = 0)
{
  PopulationConfig pop = cfg.population;
  pop.size_billions    = size;

  RoundResult r;
  r.market = sample_market(pop, stream);
  r.results.reserve(cfg.mechanisms.size());
  for (Mechanism mech : cfg.mechanisms)
  {
    MechanismResult mr;
    mr.outcome = run_mechanism(mech, r.market.bids, r.market.requests, pop.capacity, scoring);
    mr.welfare = welfare(mr.outcome, r.market.bids, r.market.requests, scoring);
    r.results.push_back(std::move(mr));
  }

  r.scoring_after = scoring;
  if (cfg.feedback_enabled)
  {
    // Second-score winner when available, otherwise the first mechanism's.
    auto it = std::find_if(r.results.begin(), r.results.end(), [](MechanismResult const &m) {
      return m.outcome.mechanism == Mechanism::second_score;
    });
    auto const &outcome = (it != r.results.end() ? *it : r.results.front()).outcome;
    if (outcome.winner)
    {
      auto const &bid = *std::find_if(r.market.bids.begin(), r.market.bids.end(),
                                      [&](ModelBid const &b) { return b.owner() == *outcome.winner; });
      r.feedback =
          synthesize_feedback(outcome, bid.profile, r.market.requests, round_index, stream);
      r.scoring_after = update_scoring(scoring, *r.feedback);
    }
  }
  return r;
}

struct CurveRecord
{
  std::uint32_t size_billions  = 0;
  Mechanism     mechanism      = Mechanism::second_score;
  double        mean_revenue   = 0.0;
  double        revenue_stderr = 0.0;
  double        mean_welfare   = 0.0;
  std::uint32_t replications   = 0;

  bool operator==(CurveRecord const &) const = default;
};

struct RevenueCurve
{
  std::vector<CurveRecord> records;  // sorted by (size, mechanism name)

  bool operator==(RevenueCurve const &) const = default;

  CurveRecord const *find(std::uint32_t size, Mechanism m) const
  {
    for (auto const &r : records)
    {
      if (r.size_billions == size && r.mechanism == m)
        return &r;
    }
    return nullptr;
  }
};

namespace detail {

// Per-replication samples, one row per mechanism, one column per round.
struct ReplicationSamples
{
  std::vector<std::vector<double>> revenue;
  std::vector<std::vector<double>> welfare;
};

inline ReplicationSamples run_replication(ExperimentConfig const &cfg, std::uint32_t size,
                                          std::uint32_t replication)
{
  std::size_t const  n_mech = cfg.mechanisms.size();
  ReplicationSamples out{std::vector<std::vector<double>>(n_mech),
                         std::vector<std::vector<double>>(n_mech)};
  ScoringSystem      scoring = cfg.scoring;
  for (std::uint32_t round = 0; round < cfg.rounds_per_replication; ++round)
  {
    RngStream stream = derive_stream(cfg.master_seed, size, replication, round);
    RoundResult rr   = run_round(cfg, size, stream, scoring, round);
    for (std::size_t m = 0; m < n_mech; ++m)
    {
      out.revenue[m].push_back(rr.results[m].outcome.payment);
      out.welfare[m].push_back(rr.results[m].welfare);
    }
    if (cfg.feedback_enabled)
      scoring = std::move(rr.scoring_after);
  }
  return out;
}

}  // namespace detail

/// Revenue and welfare per (size, mechanism), averaged over replications x
/// rounds. `workers == 0` uses the hardware concurrency.
inline RevenueCurve sweep_sizes(ExperimentConfig const &cfg, unsigned workers = 0)
{
  if (auto v = cfg.violation(); !v.empty())
    throw InvalidArgument(v);

  std::size_t const n_sizes = cfg.sizes.size();
  std::size_t const n_units = n_sizes * cfg.replications;
  std::vector<detail::ReplicationSamples> units(n_units);

  if (workers == 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_units));

  std::atomic<std::size_t> next{0};
  std::exception_ptr       failure;
  std::mutex               failure_mutex;
  auto                     work = [&] {
    for (std::size_t i = next++; i < n_units; i = next++)
    {
      try
      {
        units[i] = detail::run_replication(cfg, cfg.sizes[i / cfg.replications],
                                           static_cast<std::uint32_t>(i % cfg.replications));
      }
      catch (...)
      {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next = n_units;
      }
    }
  };

  if (workers <= 1)
  {
    work();
  }
  else
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(work);
  }
  if (failure)
    std::rethrow_exception(failure);

  RevenueCurve curve;
  for (std::size_t s = 0; s < n_sizes; ++s)
  {
    for (std::size_t m = 0; m < cfg.mechanisms.size(); ++m)
    {
      // Sequential reduction in replication order keeps the sums bit-stable.
      double      sum = 0.0, welfare_sum = 0.0;
      std::size_t n = 0;
      for (std::uint32_t rep = 0; rep < cfg.replications; ++rep)
      {
        auto const &u = units[s * cfg.replications + rep];
        for (double v : u.revenue[m])
          sum += v;
        for (double v : u.welfare[m])
          welfare_sum += v;
        n += u.revenue[m].size();
      }
      double const mean = sum / static_cast<double>(n);
      double       ss   = 0.0;
      for (std::uint32_t rep = 0; rep < cfg.replications; ++rep)
      {
        for (double v : units[s * cfg.replications + rep].revenue[m])
          ss += (v - mean) * (v - mean);
      }
      double const stderr_ =
          n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n))
                : 0.0;

      curve.records.push_back({cfg.sizes[s], cfg.mechanisms[m], mean, stderr_,
                               welfare_sum / static_cast<double>(n), cfg.replications});
    }
  }

  std::sort(curve.records.begin(), curve.records.end(),
            [](CurveRecord const &a, CurveRecord const &b) {
              if (a.size_billions != b.size_billions)
                return a.size_billions < b.size_billions;
              return to_string(a.mechanism) < to_string(b.mechanism);
            });
  return curve;
}

}  // namespace gms
