#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace liftguard::cli {

enum class Format { Table, Records };

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlarm = 2;

struct ReplayOptions {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> calib;   // defaults to the manifest's calibration
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;     // directory for events.ndjson and summary.json
  Format format = Format::Table;
};

// Without --out the event log goes to `out` and the summary to `err`.
int cmd_replay(const ReplayOptions& opt, std::ostream& out, std::ostream& err);

struct EvalDetectOptions {
  std::filesystem::path detections_dir;
  std::filesystem::path ground_truth_dir;
  std::vector<double> iou_thresholds;  // empty means 0.50:0.05:0.95
  Format format = Format::Table;
};

// Frames are paired by file name; differing file sets are a schema mismatch.
int cmd_eval_detect(const EvalDetectOptions& opt, std::ostream& out, std::ostream& err);

struct EvalLocalizeOptions {
  // Either a CSV of coordinate pairs
  //   frame,class,gt_x,gt_y,gt_z,det_x,det_y,det_z[,reported_error]
  // or a replay event log together with a truth file.
  std::filesystem::path input;
  std::optional<std::filesystem::path> truth;
  Format format = Format::Table;
};

int cmd_eval_localize(const EvalLocalizeOptions& opt, std::ostream& out, std::ostream& err);

struct SynthOptions {
  std::filesystem::path spec;
  std::filesystem::path out;
  std::optional<unsigned long long> seed;  // overrides the spec's seed
};

int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err);

struct DepthImageOptions {
  std::filesystem::path cloud;
  std::filesystem::path calib;
  std::filesystem::path out;  // 16-bit PGM, millimetres
  std::optional<std::filesystem::path> config;  // preprocess the cloud first when given
};

int cmd_depth_image(const DepthImageOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace liftguard::cli
