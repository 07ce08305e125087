#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "contourlab/dataset.hpp"
#include "contourlab/error.hpp"

namespace contourlab {

struct Timing {
  int stim_ms = 100;
  int isi_ms = 300;
  int response_window_ms = 1200;
  int iti_ms = 1000;
  friend bool operator==(const Timing&, const Timing&) = default;
};

struct SessionConfig {
  int practice_trials = 48;
  int blocks = 5;
  int trials_per_block = 100;
  Timing timing;
  /// Client timing deviating by more than this many frames is flagged.
  int frame_tolerance = 2;
  Split split = Split::Test;
};

/// Human-readable list of timing fields that differ from the defaults.
std::vector<std::string> timing_overrides(const Timing& t);

struct StimulusRef {
  std::string image_path;
  std::uint64_t pair_id = 0;
  Member member = Member::Closed;
};

struct TrialPlan {
  int trial_id = 0;
  /// -1 for practice, else the 0-based main block.
  int block = -1;
  StimulusRef first;
  StimulusRef second;
  /// Interval (1 or 2) holding the closed contour.
  int correct_interval = 1;
  Timing timing;

  bool practice() const { return block < 0; }
};

struct ClientTiming {
  /// Measured on-screen duration of each interval.
  std::vector<double> stimulus_ms;
  double isi_ms = 0.0;
  double refresh_hz = 60.0;
};

struct TrialRecord {
  int trial_id = 0;
  int block = -1;
  /// "1", "2" or "timeout".
  std::string response;
  bool correct = false;
  double rt_ms = 0.0;
  ClientTiming client_timing;
  bool timing_flagged = false;
  std::string logged_at;
};

struct Session {
  std::string session_id;
  std::string observer_code;
  std::string condition;
  std::string variant_id;
  std::string created_at;
  std::uint64_t seed = 0;
  SessionConfig config;
  std::vector<std::string> overrides;
  std::vector<TrialPlan> plan;
  std::vector<TrialRecord> records;

  bool complete() const { return records.size() == plan.size(); }
  /// nullptr when complete.
  const TrialPlan* current() const { return complete() ? nullptr : &plan[records.size()]; }
};

/// Builds the trial plan. Closed images come from the first N shuffled pairs
/// and open images from the next N, so no trial shows both members of a pair.
/// Throws ConstraintError when the manifest has too few pairs.
Session create_session(const std::string& session_id, const std::string& observer_code,
                       const std::string& condition, const Manifest& manifest, const SessionConfig& cfg,
                       bool include_practice, std::uint64_t seed, const std::string& created_at);

/// Checks that the condition (a variant id or a line color) matches the manifest.
void check_condition(const std::string& condition, const Manifest& manifest);

class SubmitError : public Error {
 public:
  enum class Kind { OutOfOrder, Duplicate, Invalid, Complete };
  SubmitError(Kind k, const std::string& what) : Error(what), kind(k) {}
  Kind kind;
};

/// `response` is 1, 2 or 0 for timeout. Responses later than the window count
/// as timeouts and are incorrect.
TrialRecord make_record(const Session& s, int trial_id, int response, double rt_ms, const ClientTiming& timing,
                        const std::string& logged_at);
bool timing_deviates(const ClientTiming& t, const Timing& plan, int frame_tolerance);

nlohmann::json to_json(const TrialPlan& p, bool include_answer);
nlohmann::json to_json(const TrialRecord& r);
TrialRecord record_from_json(const nlohmann::json& j);
nlohmann::json session_header(const Session& s);
Session session_from_header(const nlohmann::json& j);

/// Reads a session log (header line then one record per line).
Session replay_log(const std::string& path);

struct ObserverAccuracy {
  std::string observer_code;
  std::string condition;
  std::size_t trials = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct ConditionSummary {
  std::string condition;
  std::size_t observers = 0;
  double mean_accuracy = 0.0;
  /// Sample sd over observers / sqrt(n); absent with one observer.
  std::optional<double> sem;
};

struct Summary {
  std::vector<ObserverAccuracy> observers;
  std::vector<ConditionSummary> conditions;
};

/// Main-block trials of completed sessions only. Throws ConstraintError if no
/// session is complete.
Summary summarize(const std::vector<Session>& sessions);
nlohmann::json to_json(const Summary& s);

}  // namespace contourlab
