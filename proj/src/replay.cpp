#include "liftguard/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "liftguard/error.hpp"
#include "liftguard/frame_sync.hpp"
#include "liftguard/io.hpp"

namespace liftguard {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

WorldPoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "truth: positions need 3 numbers");
  return WorldPoint(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json point_json(const WorldPoint& p) { return json::array({p.x(), p.y(), p.z()}); }

}  // namespace

ReplayManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  const json j = parse_json(text, "manifest");
  ReplayManifest m;
  try {
    for (const json& f : j.at("frames")) {
      ManifestFrame frame;
      frame.timestamp = f.at("timestamp").get<double>();
      frame.detections = resolve(base_dir, f.at("detections").get<std::string>());
      if (f.contains("ground_truth")) frame.ground_truth = resolve(base_dir, f.at("ground_truth").get<std::string>());
      m.frames.push_back(std::move(frame));
    }
    for (const json& c : j.at("clouds")) {
      m.clouds.push_back({c.at("timestamp").get<double>(), resolve(base_dir, c.at("cloud").get<std::string>())});
    }
    if (j.contains("calibration")) m.calibration = resolve(base_dir, j.at("calibration").get<std::string>());
    if (j.contains("truth")) m.truth = resolve(base_dir, j.at("truth").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  for (std::size_t i = 1; i < m.frames.size(); ++i) {
    if (!(m.frames[i].timestamp > m.frames[i - 1].timestamp)) {
      throw Error(ErrorCode::UnorderedStream, "manifest frames are not in time order");
    }
  }
  for (std::size_t i = 1; i < m.clouds.size(); ++i) {
    if (!(m.clouds[i].timestamp > m.clouds[i - 1].timestamp)) {
      throw Error(ErrorCode::UnorderedStream, "manifest clouds are not in time order");
    }
  }
  return m;
}

ReplayManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

std::vector<TruthFrame> parse_truth(const std::string& text) {
  const json j = parse_json(text, "truth");
  std::vector<TruthFrame> out;
  try {
    for (const json& f : j.at("frames")) {
      TruthFrame t;
      t.timestamp = f.at("timestamp").get<double>();
      if (f.contains("mic") && !f.at("mic").is_null()) t.mic = point_from(f.at("mic"));
      if (f.contains("humans")) {
        for (const json& h : f.at("humans")) t.humans.push_back(point_from(h));
      }
      out.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("truth: ") + e.what());
  }
  return out;
}

std::vector<TruthFrame> load_truth(const std::filesystem::path& path) { return parse_truth(read_text_file(path)); }

std::string frame_event(const FrameRecord& r) {
  const SafetyVerdict& v = r.verdict;
  json j;
  j["type"] = "frame";
  j["ts"] = v.timestamp;
  j["cloud_ts"] = r.cloud_ts;
  j["skew"] = r.skew;
  j["status"] = to_string(v.status);
  if (v.mic) {
    j["mic"] = {{"label", to_string(v.mic->label)},
                {"position", point_json(v.mic->position)},
                {"depth", v.mic->depth_used},
                {"occluded", v.mic->occluded}};
  } else {
    j["mic"] = nullptr;
  }
  j["humans"] = json::array();
  for (const WorldObject& h : v.humans) {
    j["humans"].push_back({{"position", point_json(h.position)}, {"depth", h.depth_used}, {"occluded", h.occluded}});
  }
  j["intruders"] = v.intruders;
  j["zone_radius"] = v.zone ? json(v.zone->radius) : json(nullptr);
  j["clearance_ok"] = v.compliance.clearance_ok;
  j["lift_sequence_ok"] = v.compliance.lift_sequence_ok;
  j["alarm_mode"] = to_string(r.mode);
  return j.dump();
}

std::string command_event(double ts, AlarmCommand command) {
  return json{{"type", "command"}, {"ts", ts}, {"command", to_string(command)}}.dump();
}

void associate_truth(const SafetyVerdict& verdict, const TruthFrame& truth, std::vector<LocalizationPair>& out) {
  const std::string tag = std::to_string(verdict.timestamp);
  if (verdict.mic && truth.mic) out.push_back({ClassLabel::MiC, verdict.mic->position, *truth.mic, tag});

  struct Cand {
    double d;
    std::size_t i, j;
  };
  const auto& detected = verdict.humans;
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < detected.size(); ++i) {
    for (std::size_t j = 0; j < truth.humans.size(); ++j) {
      cands.push_back({distance_error(detected[i].position, truth.humans[j]), i, j});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.d < b.d; });
  std::vector<bool> used_i(detected.size()), used_j(truth.humans.size());
  for (const Cand& c : cands) {
    if (used_i[c.i] || used_j[c.j]) continue;
    used_i[c.i] = used_j[c.j] = true;
    out.push_back({ClassLabel::Human, detected[c.i].position, truth.humans[c.j], tag});
  }
}

const TruthFrame* find_truth(const std::vector<TruthFrame>& truth, double ts) {
  const auto it = std::lower_bound(truth.begin(), truth.end(), ts - 1e-6,
                                   [](const TruthFrame& t, double v) { return t.timestamp < v; });
  if (it == truth.end() || std::abs(it->timestamp - ts) > 1e-6) return nullptr;
  return &*it;
}

ReplayResult run_replay(const ReplayManifest& manifest, const CalibrationBundle& calib,
                        const PipelineConfig& config, const std::vector<TruthFrame>* truth) {
  const auto start = std::chrono::steady_clock::now();

  std::vector<double> image_ts, cloud_ts;
  FileDetector detector;
  for (const ManifestFrame& f : manifest.frames) {
    image_ts.push_back(f.timestamp);
    detector.add_frame(f.timestamp, f.detections);
  }
  for (const ManifestCloud& c : manifest.clouds) cloud_ts.push_back(c.timestamp);
  const SyncResult sync = match_timestamps(image_ts, cloud_ts, config.sync_tolerance);
  spdlog::info("replay: {} frames, {} clouds, {} pairs, {} dropped", image_ts.size(), cloud_ts.size(),
               sync.matches.size(), sync.dropped);

  ReplayResult result;
  result.frames.resize(sync.matches.size());
  std::vector<std::exception_ptr> errors(sync.matches.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(sync.matches.size()); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const SyncMatch& m = sync.matches[k];
    try {
      FramePair pair;
      pair.image_ts = image_ts[m.image_index];
      pair.cloud_ts = cloud_ts[m.cloud_index];
      pair.skew = m.skew;
      pair.detections = detector.detect(manifest.frames[m.image_index].detections.string(), pair.image_ts);
      pair.cloud = load_cloud(manifest.clouds[m.cloud_index].cloud);
      pair.cloud.timestamp = pair.cloud_ts;
      FrameRecord& rec = result.frames[k];
      rec.verdict = process_frame(pair, calib, config);
      rec.cloud_ts = pair.cloud_ts;
      rec.skew = pair.skew;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunSummary& s = result.summary;
  s.frames_processed = result.frames.size();
  s.pairs_dropped = sync.dropped;

  LiftMonitor monitor(config.compliance);
  LiftTrack track;
  std::vector<SafetyVerdict> verdicts;
  std::vector<LocalizationPair> loc;
  AlarmState state;
  if (!result.frames.empty()) state.last_frame_ts = result.frames.front().verdict.timestamp;

  for (FrameRecord& rec : result.frames) {
    SafetyVerdict& v = rec.verdict;
    if (v.mic) {
      v.compliance.lift_sequence_ok = monitor.observe(v.timestamp, v.mic->position);
      track.add(v.timestamp, v.mic->position);
    } else {
      v.compliance.lift_sequence_ok = monitor.ok();
    }
    const AlarmMode before = state.mode;
    auto [next, commands] = alarm_update(state, v, v.timestamp, config.alarm);
    state = next;
    rec.mode = state.mode;
    rec.commands = std::move(commands);
    if (!v.intruders.empty()) ++s.intruder_frames;
    if (before != AlarmMode::Alarm && state.mode == AlarmMode::Alarm) ++s.alarms_raised;
    if (before != AlarmMode::Warning && state.mode == AlarmMode::Warning) ++s.warnings_raised;

    result.event_log += frame_event(rec);
    result.event_log += '\n';
    for (AlarmCommand c : rec.commands) {
      result.event_log += command_event(v.timestamp, c);
      result.event_log += '\n';
    }

    if (truth) {
      if (const TruthFrame* t = find_truth(*truth, v.timestamp)) associate_truth(v, *t, loc);
    }
    verdicts.push_back(v);
  }

  if (!track.empty()) result.compliance = check_333(track, verdicts, config.compliance);
  if (!loc.empty()) s.localization = evaluate_localization(loc);
  if (state.mode == AlarmMode::Alarm) spdlog::warn("replay ended with the alarm still active");
  s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  spdlog::info("replay: {} intruder frames, {} alarms", s.intruder_frames, s.alarms_raised);
  return result;
}

}  // namespace liftguard
