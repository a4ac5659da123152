#pragma once

// Feedback loop: user reports about a deployed model adjust that owner's
// score multiplier through a bounded exponential moving average, and every
// report is kept in the scoring system's history ledger.
//
// History files are newline-delimited JSON. Line 1 is a header object with
// the weights, bounds and multipliers; each following line is one report.

#include "gms/market_model.hpp"
#include "gms/population.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

namespace gms {

inline constexpr double kAcceptanceNoise = 0.1;

/// Mean execution value the winner delivers per requested task.
inline double content_quality(ModelProfile const &profile, TaskRequestSet const &requests)
{
  if (requests.requested.empty())
    return 0.0;
  double sum = 0.0;
  for (TaskId t : requests.requested)
  {
    auto it = profile.capabilities.find(t);
    if (it != profile.capabilities.end())
      sum += it->second;
  }
  return std::clamp(sum / static_cast<double>(requests.requested.size()), 0.0, 1.0);
}

/// Builds a report from an acceptance noise draw already taken; separated
/// out so the clamp behaviour is testable without an RNG.
inline FeedbackReport make_report(OwnerId owner, std::uint64_t round_index, double quality,
                                  double acceptance_noise)
{
  FeedbackReport r;
  r.owner_id        = owner;
  r.round_index     = round_index;
  r.content_quality = std::clamp(quality, 0.0, 1.0);
  r.user_acceptance = std::clamp(r.content_quality + acceptance_noise, 0.0, 1.0);
  return r;
}

/// Returns no report when the round had no winner.
inline std::optional<FeedbackReport> synthesize_feedback(AuctionOutcome const  &outcome,
                                                         ModelProfile const    &winner_profile,
                                                         TaskRequestSet const  &requests,
                                                         std::uint64_t          round_index,
                                                         RngStream             &rng)
{
  if (!outcome.winner)
    return std::nullopt;
  if (winner_profile.owner_id != *outcome.winner)
    throw InvalidArgument("winner profile does not belong to the round winner");

  double const noise =
      std::uniform_real_distribution<double>(-kAcceptanceNoise, kAcceptanceNoise)(rng);
  return make_report(*outcome.winner, round_index, content_quality(winner_profile, requests),
                     noise);
}

inline double feedback_target(ScoringSystem const &scoring, FeedbackReport const &report)
{
  double const blend = scoring.acceptance_weight * report.user_acceptance +
                       (1.0 - scoring.acceptance_weight) * report.content_quality;
  return scoring.feedback_floor + (scoring.feedback_ceiling - scoring.feedback_floor) * blend;
}

inline ScoringSystem update_scoring(ScoringSystem const &scoring, FeedbackReport const &report)
{
  if (!report.in_range())
    throw InvalidArgument("feedback report scores must lie in [0,1]");

  ScoringSystem next = scoring;
  double const  old  = scoring.multiplier_for(report.owner_id);
  double const  a    = scoring.ema_alpha;
  double const  m    = (1.0 - a) * old + a * feedback_target(scoring, report);
  next.feedback_multiplier[report.owner_id] =
      std::clamp(m, scoring.feedback_floor, scoring.feedback_ceiling);
  next.history.push_back(report);
  return next;
}

// ---------------------------------------------------------------------------
// Persistence

class HistoryError : public std::runtime_error
{
public:
  HistoryError(std::string const &what, std::size_t line)
    : std::runtime_error(what + " (line " + std::to_string(line) + ")")
    , line_(line)
  {}

  std::size_t line() const
  {
    return line_;
  }

private:
  std::size_t line_;
};

inline constexpr char const *kHistoryFormat = "gms-scoring-history";

inline nlohmann::json history_header(ScoringSystem const &s)
{
  auto mult = nlohmann::json::object();
  for (auto const &[owner, m] : s.feedback_multiplier)
    mult[std::to_string(owner)] = m;
  return {{"format", kHistoryFormat},
          {"version", 1},
          {"basic_weight", s.basic_weight},
          {"execution_weight", s.execution_weight},
          {"price_weight", s.price_weight},
          {"normalize_by_request_count", s.normalize_by_request_count},
          {"feedback_floor", s.feedback_floor},
          {"feedback_ceiling", s.feedback_ceiling},
          {"ema_alpha", s.ema_alpha},
          {"acceptance_weight", s.acceptance_weight},
          {"feedback_multiplier", mult},
          {"history_length", s.history.size()}};
}

inline nlohmann::json report_to_json(FeedbackReport const &r)
{
  return {{"owner_id", r.owner_id},
          {"round_index", r.round_index},
          {"user_acceptance", r.user_acceptance},
          {"content_quality", r.content_quality}};
}

inline void write_history(std::ostream &out, ScoringSystem const &s)
{
  out << history_header(s).dump() << '\n';
  for (auto const &r : s.history)
    out << report_to_json(r).dump() << '\n';
}

inline ScoringSystem read_history(std::istream &in)
{
  using nlohmann::json;
  std::string line;
  std::size_t lineno = 0;

  auto parse_line = [&](std::string const &text) {
    try
    {
      return json::parse(text);
    }
    catch (json::parse_error const &e)
    {
      throw HistoryError(std::string("malformed JSON: ") + e.what(), lineno);
    }
  };

  if (!std::getline(in, line))
    throw HistoryError("empty history file", 1);
  ++lineno;
  json const head = parse_line(line);

  ScoringSystem s;
  std::size_t   expected = 0;
  try
  {
    if (!head.is_object() || head.value("format", "") != kHistoryFormat)
      throw HistoryError("missing history header", lineno);
    if (head.at("version").get<int>() != 1)
      throw HistoryError("unsupported history version", lineno);
    s.basic_weight               = head.at("basic_weight").get<double>();
    s.execution_weight           = head.at("execution_weight").get<double>();
    s.price_weight               = head.at("price_weight").get<double>();
    s.normalize_by_request_count = head.at("normalize_by_request_count").get<bool>();
    s.feedback_floor             = head.at("feedback_floor").get<double>();
    s.feedback_ceiling           = head.at("feedback_ceiling").get<double>();
    s.ema_alpha                  = head.at("ema_alpha").get<double>();
    s.acceptance_weight          = head.at("acceptance_weight").get<double>();
    for (auto const &[key, value] : head.at("feedback_multiplier").items())
      s.feedback_multiplier[static_cast<OwnerId>(std::stoul(key))] = value.get<double>();
    expected = head.at("history_length").get<std::size_t>();
  }
  catch (json::exception const &e)
  {
    throw HistoryError(std::string("bad header: ") + e.what(), lineno);
  }
  catch (std::logic_error const &e)  // stoul
  {
    throw HistoryError(std::string("bad owner key in header: ") + e.what(), lineno);
  }

  s.history.reserve(expected);
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty())
      continue;
    json const rec = parse_line(line);
    FeedbackReport r;
    try
    {
      r.owner_id        = rec.at("owner_id").get<OwnerId>();
      r.round_index     = rec.at("round_index").get<std::uint64_t>();
      r.user_acceptance = rec.at("user_acceptance").get<double>();
      r.content_quality = rec.at("content_quality").get<double>();
    }
    catch (json::exception const &e)
    {
      throw HistoryError(std::string("bad report: ") + e.what(), lineno);
    }
    if (!r.in_range())
      throw HistoryError("report scores out of [0,1]", lineno);
    s.history.push_back(r);
  }

  if (s.history.size() != expected)
  {
    throw HistoryError("history truncated: header declares " + std::to_string(expected) +
                           " reports, found " + std::to_string(s.history.size()),
                       lineno);
  }
  if (auto v = s.violation(); !v.empty())
    throw HistoryError("invalid scoring system: " + v, 1);
  return s;
}

inline void persist_history(ScoringSystem const &s, std::filesystem::path const &path)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + tmp.string());
    write_history(out, s);
    out.flush();
    if (!out)
      throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline ScoringSystem load_history(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
    throw HistoryError("cannot open " + path.string(), 0);
  return read_history(in);
}

}  // namespace gms
