#include "contourlab/xp_session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "contourlab/error.hpp"
#include "contourlab/rng.hpp"
#include "contourlab/variant.hpp"

namespace contourlab {

using nlohmann::json;

std::vector<std::string> timing_overrides(const Timing& t) {
  const Timing d;
  std::vector<std::string> out;
  auto note = [&](const char* name, int v, int def) {
    if (v != def) out.push_back(std::string(name) + "=" + std::to_string(v) + " (default " + std::to_string(def) + ")");
  };
  note("stim_ms", t.stim_ms, d.stim_ms);
  note("isi_ms", t.isi_ms, d.isi_ms);
  note("response_window_ms", t.response_window_ms, d.response_window_ms);
  note("iti_ms", t.iti_ms, d.iti_ms);
  return out;
}

void check_condition(const std::string& condition, const Manifest& manifest) {
  if (condition == manifest.header.variant_id) return;
  const VariantConfig* v = nullptr;
  try {
    v = &find_variant(manifest.header.variant_id);
  } catch (const Error&) {
  }
  if (v && condition == to_string(v->line_color)) return;
  throw UsageError("condition '" + condition + "' is not covered by the manifest of variant " +
                   manifest.header.variant_id);
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
}

}  // namespace

Session create_session(const std::string& session_id, const std::string& observer_code,
                       const std::string& condition, const Manifest& manifest, const SessionConfig& cfg,
                       bool include_practice, std::uint64_t seed, const std::string& created_at) {
  if (cfg.blocks < 1 || cfg.trials_per_block < 1 || cfg.practice_trials < 0)
    throw UsageError("session needs at least one block of one trial");
  check_condition(condition, manifest);

  std::map<std::uint64_t, std::pair<const ManifestEntry*, const ManifestEntry*>> pairs;
  for (const auto& e : manifest.entries) {
    if (e.split != cfg.split) continue;
    auto& slot = pairs[e.pair_id];
    (e.member == Member::Open ? slot.first : slot.second) = &e;
  }
  std::vector<std::uint64_t> ids;
  for (const auto& [id, slot] : pairs)
    if (slot.first && slot.second) ids.push_back(id);

  const int practice = include_practice ? cfg.practice_trials : 0;
  const std::size_t trials = static_cast<std::size_t>(practice + cfg.blocks * cfg.trials_per_block);
  if (ids.size() < 2 * trials)
    throw ConstraintError("manifest has " + std::to_string(ids.size()) + " complete pairs in split " +
                          std::string(to_string(cfg.split)) + "; the session needs " + std::to_string(2 * trials));

  Rng rng(seed);
  shuffle(ids, rng);

  Session s;
  s.session_id = session_id;
  s.observer_code = observer_code;
  s.condition = condition;
  s.variant_id = manifest.header.variant_id;
  s.created_at = created_at;
  s.seed = seed;
  s.config = cfg;
  s.overrides = timing_overrides(cfg.timing);

  auto ref = [](const ManifestEntry* e) { return StimulusRef{e->image_path, e->pair_id, e->member}; };
  std::vector<int> block_sizes;
  if (practice > 0) block_sizes.push_back(practice);
  for (int b = 0; b < cfg.blocks; ++b) block_sizes.push_back(cfg.trials_per_block);

  std::size_t t = 0;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    const int n = block_sizes[b];
    std::vector<int> intervals(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) intervals[i] = i < n / 2 ? 1 : 2;
    if (n % 2 == 1) intervals.back() = rng.coin() ? 1 : 2;
    shuffle(intervals, rng);
    const int block = practice > 0 ? static_cast<int>(b) - 1 : static_cast<int>(b);
    for (int i = 0; i < n; ++i, ++t) {
      TrialPlan p;
      p.trial_id = static_cast<int>(t);
      p.block = block;
      p.correct_interval = intervals[i];
      p.timing = cfg.timing;
      const StimulusRef closed = ref(pairs[ids[t]].second);
      const StimulusRef open = ref(pairs[ids[trials + t]].first);
      p.first = p.correct_interval == 1 ? closed : open;
      p.second = p.correct_interval == 1 ? open : closed;
      s.plan.push_back(p);
    }
  }
  return s;
}

bool timing_deviates(const ClientTiming& t, const Timing& plan, int frame_tolerance) {
  const double hz = t.refresh_hz > 0 ? t.refresh_hz : 60.0;
  const double tol = frame_tolerance * 1000.0 / hz;
  for (double d : t.stimulus_ms)
    if (std::abs(d - plan.stim_ms) > tol) return true;
  return std::abs(t.isi_ms - plan.isi_ms) > tol;
}

TrialRecord make_record(const Session& s, int trial_id, int response, double rt_ms, const ClientTiming& timing,
                        const std::string& logged_at) {
  if (s.complete()) throw SubmitError(SubmitError::Kind::Complete, "session is complete");
  const TrialPlan& cur = *s.current();
  if (trial_id < cur.trial_id) throw SubmitError(SubmitError::Kind::Duplicate, "trial already answered");
  if (trial_id != cur.trial_id)
    throw SubmitError(SubmitError::Kind::OutOfOrder,
                      "trial " + std::to_string(trial_id) + " is not current (" + std::to_string(cur.trial_id) + ")");
  if (response < 0 || response > 2) throw SubmitError(SubmitError::Kind::Invalid, "response must be 1, 2 or timeout");
  if (!std::isfinite(rt_ms) || rt_ms < 0) throw SubmitError(SubmitError::Kind::Invalid, "bad rt_ms");
  if (timing.stimulus_ms.size() != 2) throw SubmitError(SubmitError::Kind::Invalid, "client_timing needs two intervals");

  TrialRecord r;
  r.trial_id = trial_id;
  r.block = cur.block;
  r.rt_ms = rt_ms;
  r.client_timing = timing;
  r.logged_at = logged_at;
  if (response == 0 || rt_ms > cur.timing.response_window_ms) {
    r.response = "timeout";
    r.correct = false;
  } else {
    r.response = std::to_string(response);
    r.correct = response == cur.correct_interval;
  }
  r.timing_flagged = timing_deviates(timing, cur.timing, s.config.frame_tolerance);
  return r;
}

namespace {

json timing_json(const Timing& t) {
  return json{{"stim_ms", t.stim_ms},
              {"isi_ms", t.isi_ms},
              {"response_window_ms", t.response_window_ms},
              {"iti_ms", t.iti_ms}};
}

Timing timing_from_json(const json& j) {
  return Timing{j.at("stim_ms").get<int>(), j.at("isi_ms").get<int>(), j.at("response_window_ms").get<int>(),
                j.at("iti_ms").get<int>()};
}

json ref_json(const StimulusRef& r) {
  return json{{"image_path", r.image_path}, {"pair_id", r.pair_id}, {"member", std::string(to_string(r.member))}};
}

StimulusRef ref_from_json(const json& j) {
  return {j.at("image_path").get<std::string>(), j.at("pair_id").get<std::uint64_t>(),
          parse_member(j.at("member").get<std::string>())};
}

}  // namespace

json to_json(const TrialPlan& p, bool include_answer) {
  json j{{"trial_id", p.trial_id}, {"block", p.block}, {"practice", p.practice()}, {"timing", timing_json(p.timing)}};
  if (include_answer) {
    j["first"] = ref_json(p.first);
    j["second"] = ref_json(p.second);
    j["correct_interval"] = p.correct_interval;
  }
  return j;
}

json to_json(const TrialRecord& r) {
  return json{{"trial_id", r.trial_id},
              {"block", r.block},
              {"response", r.response},
              {"correct", r.correct},
              {"rt_ms", r.rt_ms},
              {"client_timing",
               {{"stimulus_ms", r.client_timing.stimulus_ms},
                {"isi_ms", r.client_timing.isi_ms},
                {"refresh_hz", r.client_timing.refresh_hz}}},
              {"timing_flagged", r.timing_flagged},
              {"logged_at", r.logged_at}};
}

TrialRecord record_from_json(const json& j) {
  TrialRecord r;
  r.trial_id = j.at("trial_id").get<int>();
  r.block = j.at("block").get<int>();
  r.response = j.at("response").get<std::string>();
  r.correct = j.at("correct").get<bool>();
  r.rt_ms = j.at("rt_ms").get<double>();
  const json& t = j.at("client_timing");
  r.client_timing.stimulus_ms = t.at("stimulus_ms").get<std::vector<double>>();
  r.client_timing.isi_ms = t.at("isi_ms").get<double>();
  r.client_timing.refresh_hz = t.at("refresh_hz").get<double>();
  r.timing_flagged = j.at("timing_flagged").get<bool>();
  r.logged_at = j.at("logged_at").get<std::string>();
  return r;
}

json session_header(const Session& s) {
  json plan = json::array();
  for (const auto& p : s.plan) plan.push_back(to_json(p, true));
  return json{{"session",
               {{"session_id", s.session_id},
                {"observer_code", s.observer_code},
                {"condition", s.condition},
                {"variant_id", s.variant_id},
                {"created_at", s.created_at},
                {"seed", s.seed},
                {"practice_trials", s.config.practice_trials},
                {"blocks", s.config.blocks},
                {"trials_per_block", s.config.trials_per_block},
                {"frame_tolerance", s.config.frame_tolerance},
                {"split", std::string(to_string(s.config.split))},
                {"timing", timing_json(s.config.timing)},
                {"timing_overrides", s.overrides},
                {"plan", plan}}}};
}

Session session_from_header(const json& j) {
  const json& h = j.at("session");
  Session s;
  s.session_id = h.at("session_id").get<std::string>();
  s.observer_code = h.at("observer_code").get<std::string>();
  s.condition = h.at("condition").get<std::string>();
  s.variant_id = h.at("variant_id").get<std::string>();
  s.created_at = h.at("created_at").get<std::string>();
  s.seed = h.at("seed").get<std::uint64_t>();
  s.config.practice_trials = h.at("practice_trials").get<int>();
  s.config.blocks = h.at("blocks").get<int>();
  s.config.trials_per_block = h.at("trials_per_block").get<int>();
  s.config.frame_tolerance = h.at("frame_tolerance").get<int>();
  s.config.split = parse_split(h.at("split").get<std::string>());
  s.config.timing = timing_from_json(h.at("timing"));
  s.overrides = h.at("timing_overrides").get<std::vector<std::string>>();
  for (const auto& p : h.at("plan")) {
    TrialPlan t;
    t.trial_id = p.at("trial_id").get<int>();
    t.block = p.at("block").get<int>();
    t.timing = timing_from_json(p.at("timing"));
    t.first = ref_from_json(p.at("first"));
    t.second = ref_from_json(p.at("second"));
    t.correct_interval = p.at("correct_interval").get<int>();
    s.plan.push_back(t);
  }
  return s;
}

Session replay_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open session log " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConstraintError("empty session log " + path);
  try {
    Session s = session_from_header(json::parse(line));
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      TrialRecord r = record_from_json(json::parse(line));
      if (s.complete() || r.trial_id != s.current()->trial_id)
        throw ConstraintError("session log " + path + " has an out-of-order record");
      s.records.push_back(std::move(r));
    }
    return s;
  } catch (const json::exception& e) {
    throw ConstraintError("malformed session log " + path + ": " + e.what());
  }
}

Summary summarize(const std::vector<Session>& sessions) {
  std::map<std::pair<std::string, std::string>, ObserverAccuracy> per_observer;
  bool any = false;
  for (const auto& s : sessions) {
    if (!s.complete()) continue;
    any = true;
    auto& acc = per_observer[{s.condition, s.observer_code}];
    acc.observer_code = s.observer_code;
    acc.condition = s.condition;
    for (const auto& r : s.records) {
      if (r.block < 0) continue;
      ++acc.trials;
      if (r.correct) ++acc.correct;
    }
  }
  if (!any) throw ConstraintError("no completed sessions to summarize");
  Summary out;
  std::map<std::string, std::vector<double>> by_condition;
  for (auto& [key, acc] : per_observer) {
    acc.accuracy = acc.trials ? static_cast<double>(acc.correct) / acc.trials : 0.0;
    out.observers.push_back(acc);
    by_condition[acc.condition].push_back(acc.accuracy);
  }
  for (const auto& [condition, accs] : by_condition) {
    ConditionSummary c;
    c.condition = condition;
    c.observers = accs.size();
    double sum = 0.0;
    for (double a : accs) sum += a;
    c.mean_accuracy = sum / accs.size();
    if (accs.size() > 1) {
      double ss = 0.0;
      for (double a : accs) ss += (a - c.mean_accuracy) * (a - c.mean_accuracy);
      c.sem = std::sqrt(ss / (accs.size() - 1)) / std::sqrt(static_cast<double>(accs.size()));
    }
    out.conditions.push_back(c);
  }
  return out;
}

json to_json(const Summary& s) {
  json observers = json::array(), conditions = json::array();
  for (const auto& o : s.observers)
    observers.push_back({{"observer_code", o.observer_code},
                         {"condition", o.condition},
                         {"trials", o.trials},
                         {"correct", o.correct},
                         {"accuracy", o.accuracy}});
  for (const auto& c : s.conditions)
    conditions.push_back({{"condition", c.condition},
                          {"observers", c.observers},
                          {"mean_accuracy", c.mean_accuracy},
                          {"sem", c.sem ? json(*c.sem) : json(nullptr)}});
  return json{{"observers", observers}, {"conditions", conditions}};
}

}  // namespace contourlab
