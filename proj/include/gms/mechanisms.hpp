#pragma once

// Allocation and payment rules for a single-winner round on one edge server.
//
// Both mechanisms drop bids that do not fit the server, rank the remainder
// with a strict total order (ties broken by ascending owner id), award the
// round to rank 1 and charge the price submitted by rank 2. A lone feasible
// bidder clears at the reserve price.

#include "gms/market_model.hpp"

#include <algorithm>
#include <span>
#include <unordered_set>
#include <vector>

namespace gms {

/// Sum of the execution values a bid covers over the requested tasks,
/// optionally divided by the request count.
inline double covered_execution_value(ModelProfile const &profile, TaskRequestSet const &requests,
                                      bool normalize)
{
  double sum = 0.0;
  // Walk the smaller of the two ordered sets.
  if (requests.requested.size() <= profile.capabilities.size())
  {
    for (TaskId t : requests.requested)
    {
      auto it = profile.capabilities.find(t);
      if (it != profile.capabilities.end())
        sum += it->second;
    }
  }
  else
  {
    for (auto const &[t, v] : profile.capabilities)
    {
      if (requests.requested.count(t) != 0)
        sum += v;
    }
  }
  if (normalize && !requests.requested.empty())
    sum /= static_cast<double>(requests.requested.size());
  return sum;
}

inline double compute_score(ModelBid const &bid, TaskRequestSet const &requests,
                            ScoringSystem const &scoring)
{
  double const exec =
      covered_execution_value(bid.profile, requests, scoring.normalize_by_request_count);
  double const raw = scoring.basic_weight * bid.profile.basic_value +
                     scoring.execution_weight * exec + scoring.price_weight * bid.price;
  return scoring.multiplier_for(bid.owner()) * raw;
}

inline bool feasible(ModelBid const &bid, EdgeServerCapacity const &capacity)
{
  return bid.profile.resource_cost.fits_within(capacity);
}

/// Higher primary value ranks first; equal values go to the lower owner id.
struct RankingKey
{
  double  primary  = 0.0;
  OwnerId tiebreak = 0;

  friend bool ranks_before(RankingKey const &a, RankingKey const &b)
  {
    if (a.primary != b.primary)
      return a.primary > b.primary;
    return a.tiebreak < b.tiebreak;
  }
};

namespace detail {

// Owner ids must be unique and prices finite and non-negative.
inline void validate_bids(std::span<ModelBid const> bids)
{
  std::unordered_set<OwnerId> seen;
  seen.reserve(bids.size());
  for (auto const &bid : bids)
  {
    if (!seen.insert(bid.owner()).second)
      throw InvalidArgument("duplicate owner_id " + std::to_string(bid.owner()) + " in bid set");
    if (!valid_price(bid.price))
      throw InvalidArgument("owner " + std::to_string(bid.owner()) + " bid an invalid price");
  }
}

struct Ranked
{
  RankingKey  key;
  std::size_t index;  // into the bid span
  LedgerEntry entry;
};

inline AuctionOutcome settle(Mechanism mechanism, std::vector<Ranked> ranked,
                             std::span<ModelBid const> bids)
{
  std::sort(ranked.begin(), ranked.end(),
            [](Ranked const &a, Ranked const &b) { return ranks_before(a.key, b.key); });

  AuctionOutcome out;
  out.mechanism      = mechanism;
  out.feasible_count = ranked.size();
  out.ranked_ledger.reserve(ranked.size());
  for (auto const &r : ranked)
    out.ranked_ledger.push_back(r.entry);

  if (!ranked.empty())
  {
    out.winner  = bids[ranked[0].index].owner();
    out.payment = ranked.size() >= 2 ? bids[ranked[1].index].price : kReservePrice;
  }
  return out;
}

}  // namespace detail

/// Second-score auction: rank by score, the winner pays the price bid by the
/// second-highest-score bidder.
inline AuctionOutcome run_second_score(std::span<ModelBid const> bids, TaskRequestSet const &requests,
                                       EdgeServerCapacity const &capacity,
                                       ScoringSystem const &scoring)
{
  detail::validate_bids(bids);

  std::vector<detail::Ranked> ranked;
  ranked.reserve(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    if (!feasible(bids[i], capacity))
      continue;
    double const score = compute_score(bids[i], requests, scoring);
    ranked.push_back({{score, bids[i].owner()}, i, {bids[i].owner(), score, bids[i].price}});
  }
  return detail::settle(Mechanism::second_score, std::move(ranked), bids);
}

/// Sealed-bid second-price (Vickrey) auction on price alone.
inline AuctionOutcome run_second_price(std::span<ModelBid const> bids,
                                       EdgeServerCapacity const &capacity)
{
  detail::validate_bids(bids);

  std::vector<detail::Ranked> ranked;
  ranked.reserve(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    if (!feasible(bids[i], capacity))
      continue;
    ranked.push_back(
        {{bids[i].price, bids[i].owner()}, i, {bids[i].owner(), std::nullopt, bids[i].price}});
  }
  return detail::settle(Mechanism::second_price, std::move(ranked), bids);
}

inline AuctionOutcome run_mechanism(Mechanism mechanism, std::span<ModelBid const> bids,
                                    TaskRequestSet const &requests,
                                    EdgeServerCapacity const &capacity,
                                    ScoringSystem const &scoring)
{
  return mechanism == Mechanism::second_score ? run_second_score(bids, requests, capacity, scoring)
                                              : run_second_price(bids, capacity);
}

/// Realized allocative score: the score of the winning bid, 0 with no winner.
inline double welfare(AuctionOutcome const &outcome, std::span<ModelBid const> bids,
                      TaskRequestSet const &requests, ScoringSystem const &scoring)
{
  if (!outcome.winner)
    return 0.0;
  auto it = std::find_if(bids.begin(), bids.end(),
                         [&](ModelBid const &b) { return b.owner() == *outcome.winner; });
  if (it == bids.end())
    throw InvalidArgument("winner " + std::to_string(*outcome.winner) + " not among bids");
  return compute_score(*it, requests, scoring);
}

}  // namespace gms
