#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "liftguard/geometry.hpp"
#include "liftguard/pipeline.hpp"
#include "liftguard/safety.hpp"

namespace liftguard {

// Manifest document (JSON), paths relative to the manifest's directory:
//   { "frames": [{"timestamp", "detections", "ground_truth"?}],
//     "clouds": [{"timestamp", "cloud"}],
//     "calibration"?: "calib.json", "truth"?: "truth.json" }
struct ManifestFrame {
  double timestamp = 0.0;
  std::filesystem::path detections;
  std::optional<std::filesystem::path> ground_truth;
};

struct ManifestCloud {
  double timestamp = 0.0;
  std::filesystem::path cloud;
};

struct ReplayManifest {
  std::vector<ManifestFrame> frames;
  std::vector<ManifestCloud> clouds;
  std::optional<std::filesystem::path> calibration;
  std::optional<std::filesystem::path> truth;
};

// Resolves relative paths against base_dir. Throws ParseError, or
// UnorderedStream when either list goes back in time.
ReplayManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
ReplayManifest load_manifest(const std::filesystem::path& path);

// World-frame object centers per image frame:
//   { "frames": [{"timestamp", "mic": [x, y, z] | null, "humans": [[x, y, z], ...]}] }
struct TruthFrame {
  double timestamp = 0.0;
  std::optional<WorldPoint> mic;
  std::vector<WorldPoint> humans;
};

std::vector<TruthFrame> parse_truth(const std::string& text);
std::vector<TruthFrame> load_truth(const std::filesystem::path& path);

// Truth frame within 1 us of ts, or null. truth must be sorted by time.
const TruthFrame* find_truth(const std::vector<TruthFrame>& truth, double ts);

// MiC against the true MiC; humans paired greedily by distance, unpaired
// ones on either side are skipped.
void associate_truth(const SafetyVerdict& verdict, const TruthFrame& truth, std::vector<LocalizationPair>& out);

struct FrameRecord {
  SafetyVerdict verdict;
  double cloud_ts = 0.0;
  double skew = 0.0;
  AlarmMode mode = AlarmMode::Idle;   // after this frame
  std::vector<AlarmCommand> commands;
};

struct RunSummary {
  std::size_t frames_processed = 0;
  std::size_t pairs_dropped = 0;
  std::size_t intruder_frames = 0;
  std::size_t alarms_raised = 0;     // entries into Alarm
  std::size_t warnings_raised = 0;   // entries into Warning
  std::map<ClassLabel, ClassLocalization> localization;  // empty without truth
  double wall_time = 0.0;            // s; not part of the event log
};

struct ReplayResult {
  std::vector<FrameRecord> frames;
  RunSummary summary;
  std::optional<ComplianceReport> compliance;  // over the MiC track, if any
  std::string event_log;                       // newline-delimited JSON
};

// Frame sync, per-frame perception (parallel), then the lift monitor and
// alarm machine serially in frame order. Truth, when given, is matched to
// frames by timestamp and humans are paired greedily by distance.
ReplayResult run_replay(const ReplayManifest& manifest, const CalibrationBundle& calib,
                        const PipelineConfig& config, const std::vector<TruthFrame>* truth = nullptr);

// Single event-log records.
std::string frame_event(const FrameRecord& record);
std::string command_event(double ts, AlarmCommand command);

}  // namespace liftguard
