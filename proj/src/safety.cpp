#include "liftguard/safety.hpp"

#include <algorithm>
#include <cmath>

#include "liftguard/error.hpp"

namespace liftguard {

double horizontal_distance(const WorldPoint& a, const WorldPoint& b) {
  return std::hypot(a.x() - b.x(), a.y() - b.y());
}

bool in_danger_zone(const WorldPoint& p, const DangerZone& zone) {
  return std::hypot(p.x() - zone.center_x, p.y() - zone.center_y) < zone.radius;
}

std::string_view to_string(VerdictStatus s) {
  return s == VerdictStatus::Ok ? "ok" : "no_target";
}

std::string_view to_string(AlarmMode m) {
  switch (m) {
    case AlarmMode::Idle: return "idle";
    case AlarmMode::Warning: return "warning";
    case AlarmMode::Alarm: return "alarm";
  }
  return "unknown";
}

std::string_view to_string(AlarmCommand c) {
  switch (c) {
    case AlarmCommand::AudibleOn: return "audible_on";
    case AlarmCommand::AudibleOff: return "audible_off";
    case AlarmCommand::VisualOn: return "visual_on";
    case AlarmCommand::VisualOff: return "visual_off";
    case AlarmCommand::WarningOn: return "warning_on";
    case AlarmCommand::WarningOff: return "warning_off";
  }
  return "unknown";
}

std::pair<AlarmState, std::vector<AlarmCommand>> alarm_update(const AlarmState& state,
                                                               const SafetyVerdict& verdict,
                                                               double ts, const AlarmConfig& config) {
  if (ts < state.last_frame_ts) {
    throw Error(ErrorCode::InvalidArgument, "alarm_update called out of timestamp order");
  }
  AlarmState next = state;
  next.last_frame_ts = ts;
  std::vector<AlarmCommand> commands;

  const bool intrusion = !verdict.intruders.empty();
  const bool breach = !verdict.compliance.clearance_ok || !verdict.compliance.lift_sequence_ok;
  if (intrusion) {
    ++next.consecutive_danger_frames;
    next.consecutive_clear_frames = 0;
  } else {
    ++next.consecutive_clear_frames;
    next.consecutive_danger_frames = 0;
  }

  auto transition = [&](AlarmMode mode) {
    next.mode = mode;
    next.last_transition_ts = ts;
  };

  switch (state.mode) {
    case AlarmMode::Idle:
    case AlarmMode::Warning:
      if (next.consecutive_danger_frames >= config.n_on) {
        if (state.mode == AlarmMode::Warning) commands.push_back(AlarmCommand::WarningOff);
        commands.push_back(AlarmCommand::AudibleOn);
        commands.push_back(AlarmCommand::VisualOn);
        transition(AlarmMode::Alarm);
      } else if (state.mode == AlarmMode::Idle && breach && !intrusion) {
        commands.push_back(AlarmCommand::WarningOn);
        transition(AlarmMode::Warning);
      } else if (state.mode == AlarmMode::Warning && !breach && !intrusion) {
        commands.push_back(AlarmCommand::WarningOff);
        transition(AlarmMode::Idle);
      }
      break;
    case AlarmMode::Alarm:
      if (next.consecutive_clear_frames >= config.n_off) {
        commands.push_back(AlarmCommand::AudibleOff);
        commands.push_back(AlarmCommand::VisualOff);
        transition(AlarmMode::Idle);
      }
      break;
  }
  return {next, commands};
}

void LiftTrack::add(double ts, const WorldPoint& mic) {
  if (!samples_.empty() && !(ts > samples_.back().timestamp)) {
    throw Error(ErrorCode::InvalidArgument, "lift track timestamps must strictly increase");
  }
  samples_.push_back({ts, mic});
}

double LiftTrack::height_at(std::size_t i) const {
  return samples_.at(i).mic.z() - samples_.front().mic.z();
}

ComplianceReport check_333(const LiftTrack& track, std::span<const SafetyVerdict> verdicts,
                           const ComplianceParams& params) {
  if (track.empty()) throw Error(ErrorCode::EmptyTrack, "3-3-3 check on an empty track");
  ComplianceReport report;

  for (const SafetyVerdict& v : verdicts) {
    if (!v.mic) continue;
    double nearest = -1.0;
    for (const WorldObject& h : v.humans) {
      const double d = horizontal_distance(h.position, v.mic->position);
      if (d < params.clearance && (nearest < 0.0 || d < nearest)) nearest = d;
    }
    if (nearest >= 0.0) report.clearance_violations.push_back({v.timestamp, nearest});
  }
  report.clearance_pass = report.clearance_violations.empty();

  const auto& samples = track.samples();
  const double lo = params.lift_height - params.height_tolerance;
  const double hi = params.lift_height + params.height_tolerance;
  bool above_before_hold = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double h = track.height_at(i);
    if (h >= lo && h <= hi) {
      std::size_t j = i;
      while (j + 1 < samples.size() && track.height_at(j + 1) >= lo && track.height_at(j + 1) <= hi) ++j;
      report.hold_start = samples[i].timestamp;
      report.hold_end = samples[j].timestamp;
      report.hold_duration = samples[j].timestamp - samples[i].timestamp;
      break;
    }
    if (h > hi) above_before_hold = true;
  }
  report.lift_height_pass = report.hold_start.has_value();
  report.hold_pass = report.lift_height_pass && !above_before_hold &&
                     report.hold_duration >= params.hold_seconds;
  return report;
}

bool LiftMonitor::observe(double ts, const WorldPoint& mic) {
  if (!ground_z_) ground_z_ = mic.z();
  const double h = mic.z() - *ground_z_;
  const double lo = params_.lift_height - params_.height_tolerance;
  const double hi = params_.lift_height + params_.height_tolerance;
  if (!hold_done_) {
    if (h > hi) {
      violated_ = true;
    } else if (h >= lo) {
      if (!hold_start_) hold_start_ = ts;
      if (ts - *hold_start_ >= params_.hold_seconds) hold_done_ = true;
    } else {
      hold_start_.reset();
    }
  }
  return !violated_;
}

double distance_error(const WorldPoint& detected, const WorldPoint& truth) {
  return (detected.xyz - truth.xyz).norm();
}

std::map<ClassLabel, ClassLocalization> evaluate_localization(std::span<const LocalizationPair> run) {
  if (run.empty()) throw Error(ErrorCode::InvalidArgument, "localization run is empty");
  std::map<ClassLabel, ClassLocalization> out;
  for (const LocalizationPair& p : run) out[p.label].errors.push_back(distance_error(p.detected, p.truth));
  for (auto& [label, c] : out) {
    double sum = 0.0;
    for (double e : c.errors) sum += e;
    c.mean = sum / static_cast<double>(c.errors.size());
    c.max = *std::max_element(c.errors.begin(), c.errors.end());
  }
  return out;
}

}  // namespace liftguard
