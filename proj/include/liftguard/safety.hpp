#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liftguard/depth_cluster.hpp"
#include "liftguard/detection.hpp"
#include "liftguard/geometry.hpp"

namespace liftguard {

struct WorldObject {
  ClassLabel label = ClassLabel::Human;
  WorldPoint position;
  double depth_used = 0.0;  // Z_c the position was built from
  BBox source_bbox;
  ClusterMethod method = ClusterMethod::KMeans;
  bool occluded = false;
};

// Vertical cylinder of radius `radius` around the MiC, unbounded in height.
struct DangerZone {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 3.0;
};

// Strictly inside: horizontal distance < radius. z is ignored.
bool in_danger_zone(const WorldPoint& p, const DangerZone& zone);
double horizontal_distance(const WorldPoint& a, const WorldPoint& b);

enum class VerdictStatus { Ok, NoTarget };
std::string_view to_string(VerdictStatus s);

// Per-frame view of the three lifting rules. Only clearance is decidable from
// a single frame; the lift rules come from the serial track monitor.
struct FrameCompliance {
  bool clearance_ok = true;       // nobody within the clearance distance
  bool lift_sequence_ok = true;   // no premature ascent observed so far
};

struct SafetyVerdict {
  double timestamp = 0.0;
  VerdictStatus status = VerdictStatus::NoTarget;
  std::optional<WorldObject> mic;
  std::vector<WorldObject> humans;
  std::vector<std::size_t> intruders;  // indices into humans
  std::optional<DangerZone> zone;      // present iff mic present
  FrameCompliance compliance;
};

// ---------------------------------------------------------------------------
// Alarm state machine

enum class AlarmMode { Idle, Warning, Alarm };
enum class AlarmCommand { AudibleOn, AudibleOff, VisualOn, VisualOff, WarningOn, WarningOff };

std::string_view to_string(AlarmMode m);
std::string_view to_string(AlarmCommand c);

struct AlarmConfig {
  int n_on = 3;    // consecutive intruder frames to raise the alarm
  int n_off = 10;  // consecutive clear frames to release it
};

struct AlarmState {
  AlarmMode mode = AlarmMode::Idle;
  int consecutive_danger_frames = 0;
  int consecutive_clear_frames = 0;
  double last_transition_ts = 0.0;
  double last_frame_ts = 0.0;
};

// Idle/Warning -> Alarm after n_on consecutive intruder frames (AudibleOn,
// VisualOn). Alarm -> Idle after n_off consecutive clear frames (AudibleOff,
// VisualOff). Outside Alarm, a frame with a compliance breach and no
// intruder enters Warning (WarningOn); a fully compliant frame leaves it
// (WarningOff). Throws InvalidArgument if ts precedes the previous frame.
std::pair<AlarmState, std::vector<AlarmCommand>> alarm_update(const AlarmState& state,
                                                               const SafetyVerdict& verdict,
                                                               double ts,
                                                               const AlarmConfig& config = {});

// ---------------------------------------------------------------------------
// 3-3-3 lifting procedure

struct ComplianceParams {
  double clearance = 3.0;         // m, horizontal
  double lift_height = 0.3;       // m above the initial ground position
  double height_tolerance = 0.05; // m
  double hold_seconds = 3.0;
};

struct TrackSample {
  double timestamp = 0.0;
  WorldPoint mic;
};

// MiC positions over time; timestamps strictly increasing.
class LiftTrack {
 public:
  // Throws InvalidArgument unless ts is later than the last sample.
  void add(double ts, const WorldPoint& mic);

  const std::vector<TrackSample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  // Height above the first sample's z.
  double height_at(std::size_t i) const;

 private:
  std::vector<TrackSample> samples_;
};

struct ClearanceViolation {
  double timestamp = 0.0;
  double distance = 0.0;
};

struct ComplianceReport {
  bool clearance_pass = true;
  std::vector<ClearanceViolation> clearance_violations;

  bool lift_height_pass = false;  // a hold phase inside the height band exists
  std::optional<double> hold_start;
  std::optional<double> hold_end;

  bool hold_pass = false;         // that hold lasted long enough before ascending
  double hold_duration = 0.0;

  bool all_pass() const { return clearance_pass && lift_height_pass && hold_pass; }
};

// Rule A scans every verdict for humans within `clearance` of the MiC. The
// hold phase is the first run of consecutive samples whose height lies in
// lift_height +/- height_tolerance; rule B passes if it exists and rule C if
// it spans at least hold_seconds and the load was not above the band before
// it. Throws EmptyTrack.
ComplianceReport check_333(const LiftTrack& track, std::span<const SafetyVerdict> verdicts,
                           const ComplianceParams& params = {});

// Online companion to check_333 used during replay: flags a premature ascent
// (height above the band before a complete hold) as soon as it happens.
class LiftMonitor {
 public:
  explicit LiftMonitor(ComplianceParams params = {}) : params_(params) {}

  // Returns false once a premature ascent has been seen.
  bool observe(double ts, const WorldPoint& mic);
  bool ok() const { return !violated_; }

 private:
  ComplianceParams params_;
  std::optional<double> ground_z_;
  std::optional<double> hold_start_;
  bool hold_done_ = false;
  bool violated_ = false;
};

// ---------------------------------------------------------------------------
// Localization error

double distance_error(const WorldPoint& detected, const WorldPoint& truth);

struct LocalizationPair {
  ClassLabel label = ClassLabel::Human;
  WorldPoint detected;
  WorldPoint truth;
  std::string frame;  // free-form frame tag for reports
};

struct ClassLocalization {
  std::vector<double> errors;  // in input order
  double mean = 0.0;
  double max = 0.0;
};

// Throws InvalidArgument on an empty run.
std::map<ClassLabel, ClassLocalization> evaluate_localization(std::span<const LocalizationPair> run);

}  // namespace liftguard
