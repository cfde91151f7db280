#include "liftguard/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "liftguard/error.hpp"
#include "liftguard/io.hpp"
#include "liftguard/metrics.hpp"
#include "liftguard/pipeline.hpp"
#include "liftguard/replay.hpp"
#include "liftguard/synthetic.hpp"

namespace liftguard::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int report_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << "\n";
  return kExitError;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string triple(const WorldPoint& p) {
  return "[" + fixed(p.x()) + ", " + fixed(p.y()) + ", " + fixed(p.z()) + "]";
}

json localization_json(const std::map<ClassLabel, ClassLocalization>& loc) {
  json j = json::object();
  for (const auto& [label, c] : loc) {
    j[std::string(to_string(label))] = {{"count", c.errors.size()}, {"mean", c.mean}, {"max", c.max}};
  }
  return j;
}

json summary_json(const RunSummary& s, const std::optional<ComplianceReport>& c) {
  json j = {{"frames_processed", s.frames_processed},
            {"pairs_dropped", s.pairs_dropped},
            {"intruder_frames", s.intruder_frames},
            {"alarms_raised", s.alarms_raised},
            {"warnings_raised", s.warnings_raised},
            {"localization", localization_json(s.localization)},
            {"wall_time", s.wall_time}};
  if (c) {
    j["compliance"] = {{"clearance_pass", c->clearance_pass},
                       {"clearance_violations", c->clearance_violations.size()},
                       {"lift_height_pass", c->lift_height_pass},
                       {"hold_pass", c->hold_pass},
                       {"hold_duration", c->hold_duration}};
  }
  return j;
}

void summary_table(const RunSummary& s, const std::optional<ComplianceReport>& c, std::ostream& os) {
  os << "frames processed  " << s.frames_processed << "\n"
     << "pairs dropped     " << s.pairs_dropped << "\n"
     << "intruder frames   " << s.intruder_frames << "\n"
     << "alarms raised     " << s.alarms_raised << "\n"
     << "warnings raised   " << s.warnings_raised << "\n";
  for (const auto& [label, l] : s.localization) {
    os << "error " << std::left << std::setw(11) << to_string(label) << " mean " << fixed(l.mean) << " m, max "
       << fixed(l.max) << " m over " << l.errors.size() << "\n";
  }
  if (c) {
    os << "3-3-3             clearance " << (c->clearance_pass ? "pass" : "FAIL") << ", lift height "
       << (c->lift_height_pass ? "pass" : "FAIL") << ", hold " << (c->hold_pass ? "pass" : "FAIL") << " ("
       << fixed(c->hold_duration, 2) << " s)\n";
  }
  os << "wall time         " << fixed(s.wall_time, 3) << " s\n";
}

}  // namespace

int cmd_replay(const ReplayOptions& opt, std::ostream& out, std::ostream& err) {
  ReplayResult result;
  try {
    const ReplayManifest manifest = load_manifest(opt.manifest);
    std::optional<fs::path> calib_path = opt.calib ? opt.calib : manifest.calibration;
    if (!calib_path) throw Error(ErrorCode::InvalidArgument, "no calibration given and none in the manifest");
    const CalibrationBundle calib = load_calibration(*calib_path);
    const PipelineConfig config = opt.config ? load_config(*opt.config) : PipelineConfig{};
    std::vector<TruthFrame> truth;
    if (manifest.truth) truth = load_truth(*manifest.truth);
    result = run_replay(manifest, calib, config, manifest.truth ? &truth : nullptr);
  } catch (const std::exception& e) {
    return report_error(err, e);
  }

  const RunSummary& s = result.summary;
  if (opt.out) {
    try {
      write_text_file(*opt.out / "events.ndjson", result.event_log);
      write_text_file(*opt.out / "summary.json", summary_json(s, result.compliance).dump(2) + "\n");
    } catch (const std::exception& e) {
      return report_error(err, e);
    }
    if (opt.format == Format::Records) {
      out << summary_json(s, result.compliance).dump() << "\n";
    } else {
      summary_table(s, result.compliance, out);
    }
  } else {
    out << result.event_log;
    if (opt.format == Format::Records) {
      err << summary_json(s, result.compliance).dump() << "\n";
    } else {
      summary_table(s, result.compliance, err);
    }
  }
  return s.alarms_raised > 0 ? kExitAlarm : kExitOk;
}

int cmd_eval_detect(const EvalDetectOptions& opt, std::ostream& out, std::ostream& err) {
  EvaluationReport report;
  try {
    auto list = [](const fs::path& dir) {
      if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
      std::set<std::string> names;
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") names.insert(entry.path().filename());
      }
      return names;
    };
    const auto det_names = list(opt.detections_dir);
    const auto gt_names = list(opt.ground_truth_dir);
    if (det_names != gt_names) {
      std::vector<std::string> diff;
      std::set_symmetric_difference(det_names.begin(), det_names.end(), gt_names.begin(), gt_names.end(),
                                    std::back_inserter(diff));
      throw Error(ErrorCode::ParseError, "detection and ground-truth frame sets differ (e.g. " + diff.front() + ")");
    }
    if (gt_names.empty()) throw Error(ErrorCode::ParseError, "no frames found in " + opt.ground_truth_dir.string());

    std::vector<FrameDetections> frames;
    for (const std::string& name : gt_names) {
      frames.push_back({load_detections(opt.detections_dir / name), load_detections(opt.ground_truth_dir / name)});
    }
    const std::vector<double> thresholds = opt.iou_thresholds.empty() ? coco_iou_thresholds() : opt.iou_thresholds;
    report = evaluate_detections(frames, thresholds);
  } catch (const std::exception& e) {
    return report_error(err, e);
  }

  if (opt.format == Format::Records) {
    json j;
    j["iou_thresholds"] = report.iou_thresholds;
    j["classes"] = json::object();
    auto row = [](const ClassReport& r) {
      return json{{"precision", r.precision}, {"recall", r.recall}, {"ap50", r.ap50}, {"ap_range", r.ap_range}};
    };
    for (const auto& [label, r] : report.per_class) j["classes"][std::string(to_string(label))] = row(r);
    j["all"] = row(report.mean);
    out << j.dump() << "\n";
    return kExitOk;
  }

  out << std::left << std::setw(10) << "class" << std::right << std::setw(10) << "P" << std::setw(10) << "R"
      << std::setw(10) << "AP50" << std::setw(10) << "AP-range" << "\n";
  auto print = [&](std::string_view name, const ClassReport& r) {
    out << std::left << std::setw(10) << name << std::right << std::setw(10) << fixed(r.precision) << std::setw(10)
        << fixed(r.recall) << std::setw(10) << fixed(r.ap50) << std::setw(10) << fixed(r.ap_range) << "\n";
  };
  for (const auto& [label, r] : report.per_class) print(to_string(label), r);
  print("all", report.mean);
  return kExitOk;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::vector<LocalizationPair> pairs_from_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<LocalizationPair> pairs;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("frame,", 0) == 0) continue;
    const auto c = split_csv(line);
    if (c.size() != 8 && c.size() != 9) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 8 or 9 columns");
    }
    LocalizationPair p;
    p.frame = c[0];
    p.label = parse_label(c[1]);
    p.truth = WorldPoint(number(c[2], lineno), number(c[3], lineno), number(c[4], lineno));
    p.detected = WorldPoint(number(c[5], lineno), number(c[6], lineno), number(c[7], lineno));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

SafetyVerdict verdict_from_event(const json& j) {
  auto point = [](const json& a) { return WorldPoint(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()); };
  SafetyVerdict v;
  v.timestamp = j.at("ts").get<double>();
  if (!j.at("mic").is_null()) {
    WorldObject m;
    m.label = parse_label(j.at("mic").at("label").get<std::string>());
    m.position = point(j.at("mic").at("position"));
    v.mic = m;
  }
  for (const json& h : j.at("humans")) {
    WorldObject o;
    o.position = point(h.at("position"));
    v.humans.push_back(o);
  }
  return v;
}

std::vector<LocalizationPair> pairs_from_events(const fs::path& events, const fs::path& truth_path) {
  const std::vector<TruthFrame> truth = load_truth(truth_path);
  std::istringstream in(read_text_file(events));
  std::string line;
  std::vector<LocalizationPair> pairs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      if (j.at("type") != "frame") continue;
      const SafetyVerdict v = verdict_from_event(j);
      const TruthFrame* t = find_truth(truth, v.timestamp);
      if (!t) {
        throw Error(ErrorCode::MissingFrame, "no truth frame for event at t=" + std::to_string(v.timestamp));
      }
      associate_truth(v, *t, pairs);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("event log: ") + e.what());
    }
  }
  return pairs;
}

}  // namespace

int cmd_eval_localize(const EvalLocalizeOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<LocalizationPair> pairs;
  std::map<ClassLabel, ClassLocalization> stats;
  try {
    if (opt.input.extension() == ".csv") {
      pairs = pairs_from_csv(opt.input);
    } else {
      if (!opt.truth) throw Error(ErrorCode::InvalidArgument, "an event log needs --truth");
      pairs = pairs_from_events(opt.input, *opt.truth);
    }
    stats = evaluate_localization(pairs);
  } catch (const std::exception& e) {
    return report_error(err, e);
  }

  if (opt.format == Format::Records) {
    json rows = json::array();
    for (const LocalizationPair& p : pairs) {
      rows.push_back({{"frame", p.frame},
                      {"class", to_string(p.label)},
                      {"truth", {p.truth.x(), p.truth.y(), p.truth.z()}},
                      {"detected", {p.detected.x(), p.detected.y(), p.detected.z()}},
                      {"error", distance_error(p.detected, p.truth)}});
    }
    out << json{{"rows", rows}, {"classes", localization_json(stats)}}.dump() << "\n";
    return kExitOk;
  }

  out << std::left << std::setw(10) << "frame" << std::setw(8) << "class" << std::setw(30) << "ground truth (m)"
      << std::setw(30) << "detection (m)" << "error (m)\n";
  for (const LocalizationPair& p : pairs) {
    out << std::left << std::setw(10) << p.frame << std::setw(8) << to_string(p.label) << std::setw(30)
        << triple(p.truth) << std::setw(30) << triple(p.detected) << fixed(distance_error(p.detected, p.truth))
        << "\n";
  }
  for (const auto& [label, c] : stats) {
    out << "mean " << to_string(label) << " " << fixed(c.mean) << " m over " << c.errors.size() << " rows\n";
  }
  return kExitOk;
}

int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    LiftSpec spec = load_lift_spec(opt.spec);
    if (opt.seed) spec.scene.seed = *opt.seed;
    const LiftBundleInfo info = generate_lift(spec, opt.out);
    out << "wrote " << info.frames << " frames and " << info.clouds << " clouds to " << opt.out.string() << "\n";
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
  return kExitOk;
}

int cmd_depth_image(const DepthImageOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const CalibrationBundle calib = load_calibration(opt.calib);
    PointCloud cloud = load_cloud(opt.cloud);
    if (opt.config) cloud = preprocess_cloud(cloud, load_config(*opt.config));
    const DepthImage image = render_depth_image(cloud, calib);
    write_depth_pgm(image, opt.out);
    out << "populated " << image.populated_count() << " of " << image.width() * image.height() << " pixels\n";
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
  return kExitOk;
}

}  // namespace liftguard::cli
