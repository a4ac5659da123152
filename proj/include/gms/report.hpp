#pragma once

// Output artifacts: the revenue-curve CSV, the single-round trace and the run
// manifest. Files are written to a sibling temp file and renamed into place.

#include "gms/config.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <system_error>
#include <unistd.h>

namespace gms {

inline constexpr char const *kToolVersion = "1.0.0";
inline constexpr char const *kCsvHeader =
    "size_billions,mechanism,mean_revenue,revenue_stderr,mean_welfare,replications";

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v)
{
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{})
    return "nan";
  return std::string(buf, end);
}

inline std::string revenue_curve_csv(RevenueCurve const &curve)
{
  std::string out = kCsvHeader;
  out += '\n';
  for (auto const &r : curve.records)
  {
    out += std::to_string(r.size_billions);
    out += ',';
    out += to_string(r.mechanism);
    out += ',';
    out += format_double(r.mean_revenue);
    out += ',';
    out += format_double(r.revenue_stderr);
    out += ',';
    out += format_double(r.mean_welfare);
    out += ',';
    out += std::to_string(r.replications);
    out += '\n';
  }
  return out;
}

inline void write_file_atomic(std::filesystem::path const &path, std::string const &content)
{
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out)
    {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
  {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

inline std::string utc_timestamp()
{
  auto const  now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm     tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json manifest_json(ExperimentConfig const                  &cfg,
                                    std::vector<std::filesystem::path> const &outputs,
                                    std::string const                        &command)
{
  auto paths = nlohmann::json::array();
  for (auto const &p : outputs)
    paths.push_back(p.string());
  return {{"tool", "gms"},
          {"tool_version", kToolVersion},
          {"command", command},
          {"config_digest", config_digest(cfg)},
          {"timestamp", utc_timestamp()},
          {"outputs", paths},
          {"config", config_to_json(cfg)}};
}

namespace detail {

inline nlohmann::json outcome_json(AuctionOutcome const &o)
{
  auto ledger = nlohmann::json::array();
  std::size_t rank = 1;
  for (auto const &e : o.ranked_ledger)
  {
    nlohmann::json row = {{"rank", rank++}, {"owner_id", e.owner_id}, {"price", e.price}};
    row["score"]       = e.score ? nlohmann::json(*e.score) : nlohmann::json(nullptr);
    ledger.push_back(row);
  }
  return {{"mechanism", std::string(to_string(o.mechanism))},
          {"feasible_count", o.feasible_count},
          {"ranked_ledger", ledger},
          {"winner", o.winner ? nlohmann::json(*o.winner) : nlohmann::json(nullptr)},
          {"payment", o.payment},
          {"cleared_at_reserve", o.winner.has_value() && o.feasible_count == 1}};
}

}  // namespace detail

/// Step-by-step account of one round: bids, scores, per-mechanism ranking
/// and payment, deployment, and feedback.
inline nlohmann::json round_trace_json(ExperimentConfig const &cfg, std::uint32_t size,
                                       ScoringSystem const &scoring_before, RoundResult const &r)
{
  using nlohmann::json;
  auto const &capacity = cfg.population.capacity;

  auto bids = json::array();
  for (auto const &b : r.market.bids)
  {
    auto const &p = b.profile;
    bids.push_back({{"owner_id", p.owner_id},
                    {"model_name", p.model_name},
                    {"size_billions", p.size_billions},
                    {"basic_value", p.basic_value},
                    {"capability_count", p.capabilities.size()},
                    {"latency_tier", std::string(to_string(p.latency_tier))},
                    {"resource_cost",
                     {{"memory", p.resource_cost.memory},
                      {"compute", p.resource_cost.compute},
                      {"bandwidth", p.resource_cost.bandwidth}}},
                    {"price", b.price},
                    {"score", compute_score(b, r.market.requests, scoring_before)},
                    {"feasible", feasible(b, capacity)}});
  }

  auto outcomes   = json::array();
  auto deployment = json::array();
  for (auto const &mr : r.results)
  {
    auto o       = detail::outcome_json(mr.outcome);
    o["welfare"] = mr.welfare;
    outcomes.push_back(o);
    deployment.push_back(
        {{"mechanism", std::string(to_string(mr.outcome.mechanism))},
         {"deployed_owner",
          mr.outcome.winner ? json(*mr.outcome.winner) : json(nullptr)},
         {"payment_to_server", mr.outcome.payment}});
  }

  json feedback = nullptr;
  if (r.feedback)
  {
    auto const owner = r.feedback->owner_id;
    feedback         = {{"report", report_to_json(*r.feedback)},
                        {"multiplier_before", scoring_before.multiplier_for(owner)},
                        {"multiplier_after", r.scoring_after.multiplier_for(owner)},
                        {"history_length", r.scoring_after.history.size()}};
  }

  return {{"master_seed", cfg.master_seed},
          {"size_billions", size},
          {"capacity",
           {{"memory", capacity.memory},
            {"compute", capacity.compute},
            {"bandwidth", capacity.bandwidth}}},
          {"requested_tasks", r.market.requests.requested},
          {"step1_bids", bids},
          {"step2_scoring",
           {{"basic_weight", scoring_before.basic_weight},
            {"execution_weight", scoring_before.execution_weight},
            {"price_weight", scoring_before.price_weight},
            {"normalize_by_request_count", scoring_before.normalize_by_request_count}}},
          {"step3_outcomes", outcomes},
          {"step4_deployment", deployment},
          {"step5_feedback", feedback}};
}

}  // namespace gms
