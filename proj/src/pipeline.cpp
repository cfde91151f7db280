#include "liftguard/pipeline.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "liftguard/error.hpp"
#include "liftguard/io.hpp"

namespace liftguard {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw Error(ErrorCode::ParseError, "unknown config key '" + where + key + "'");
    }
  }
}

template <class T>
void read_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, "config: " + what);
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  PipelineConfig c;
  try {
    reject_unknown(j, {"clustering", "occlusion", "danger_radius", "alarm", "compliance", "denoise",
                       "voxel_size", "sync_tolerance", "mic_frame_z_offset", "hook_z_offset",
                       "surface_offset"},
                   "");
    if (j.contains("clustering")) {
      const json& cl = j.at("clustering");
      reject_unknown(cl, {"method", "kmeans_max_iter", "kmeans_tol", "mean_shift_bandwidth"}, "clustering.");
      if (cl.contains("method")) c.depth.method = parse_cluster_method(cl.at("method").get<std::string>());
      read_if(cl, "kmeans_max_iter", c.depth.kmeans.max_iter);
      read_if(cl, "kmeans_tol", c.depth.kmeans.tol);
      read_if(cl, "mean_shift_bandwidth", c.depth.mean_shift_bandwidth);
    }
    if (j.contains("occlusion")) {
      const json& o = j.at("occlusion");
      reject_unknown(o, {"min_overlap", "min_depth_gap"}, "occlusion.");
      read_if(o, "min_overlap", c.occlusion.min_overlap);
      read_if(o, "min_depth_gap", c.occlusion.min_depth_gap);
    }
    read_if(j, "danger_radius", c.danger_radius);
    if (j.contains("alarm")) {
      const json& a = j.at("alarm");
      reject_unknown(a, {"n_on", "n_off"}, "alarm.");
      read_if(a, "n_on", c.alarm.n_on);
      read_if(a, "n_off", c.alarm.n_off);
    }
    if (j.contains("compliance")) {
      const json& cp = j.at("compliance");
      reject_unknown(cp, {"clearance", "lift_height", "height_tolerance", "hold_seconds"}, "compliance.");
      read_if(cp, "clearance", c.compliance.clearance);
      read_if(cp, "lift_height", c.compliance.lift_height);
      read_if(cp, "height_tolerance", c.compliance.height_tolerance);
      read_if(cp, "hold_seconds", c.compliance.hold_seconds);
    }
    if (j.contains("denoise")) {
      const json& d = j.at("denoise");
      reject_unknown(d, {"enabled", "k_neighbors", "std_ratio"}, "denoise.");
      read_if(d, "enabled", c.denoise_enabled);
      read_if(d, "k_neighbors", c.denoise.k_neighbors);
      read_if(d, "std_ratio", c.denoise.std_ratio);
    }
    read_if(j, "voxel_size", c.voxel_size);
    read_if(j, "sync_tolerance", c.sync_tolerance);
    read_if(j, "mic_frame_z_offset", c.mic_frame_z_offset);
    read_if(j, "hook_z_offset", c.hook_z_offset);
    if (j.contains("surface_offset")) {
      const json& s = j.at("surface_offset");
      reject_unknown(s, {"mic", "human"}, "surface_offset.");
      read_if(s, "mic", c.mic_surface_offset);
      read_if(s, "human", c.human_surface_offset);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }

  require(c.danger_radius > 0.0, "danger_radius must be > 0");
  require(c.alarm.n_on >= 1 && c.alarm.n_off >= 1, "alarm counts must be >= 1");
  require(c.occlusion.min_overlap >= 0.0 && c.occlusion.min_overlap <= 1.0, "occlusion.min_overlap in [0, 1]");
  require(c.occlusion.min_depth_gap >= 0.0, "occlusion.min_depth_gap must be >= 0");
  require(c.depth.kmeans.max_iter >= 1 && c.depth.kmeans.tol > 0.0, "kmeans settings must be positive");
  require(c.depth.mean_shift_bandwidth > 0.0, "mean_shift_bandwidth must be > 0");
  require(c.denoise.k_neighbors >= 1 && c.denoise.std_ratio > 0.0, "denoise settings must be positive");
  require(c.voxel_size >= 0.0, "voxel_size must be >= 0");
  require(c.sync_tolerance > 0.0, "sync_tolerance must be > 0");
  require(c.compliance.clearance > 0.0 && c.compliance.hold_seconds >= 0.0 &&
              c.compliance.height_tolerance >= 0.0,
          "compliance settings out of range");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::IoError, "config file not found: " + path.string());
  return parse_config(read_text_file(path));
}

std::string dump_config(const PipelineConfig& c) {
  json j;
  j["clustering"] = {{"method", to_string(c.depth.method)},
                     {"kmeans_max_iter", c.depth.kmeans.max_iter},
                     {"kmeans_tol", c.depth.kmeans.tol},
                     {"mean_shift_bandwidth", c.depth.mean_shift_bandwidth}};
  j["occlusion"] = {{"min_overlap", c.occlusion.min_overlap}, {"min_depth_gap", c.occlusion.min_depth_gap}};
  j["danger_radius"] = c.danger_radius;
  j["alarm"] = {{"n_on", c.alarm.n_on}, {"n_off", c.alarm.n_off}};
  j["compliance"] = {{"clearance", c.compliance.clearance},
                     {"lift_height", c.compliance.lift_height},
                     {"height_tolerance", c.compliance.height_tolerance},
                     {"hold_seconds", c.compliance.hold_seconds}};
  j["denoise"] = {{"enabled", c.denoise_enabled},
                  {"k_neighbors", c.denoise.k_neighbors},
                  {"std_ratio", c.denoise.std_ratio}};
  j["voxel_size"] = c.voxel_size;
  j["sync_tolerance"] = c.sync_tolerance;
  j["mic_frame_z_offset"] = c.mic_frame_z_offset;
  j["hook_z_offset"] = c.hook_z_offset;
  j["surface_offset"] = {{"mic", c.mic_surface_offset}, {"human", c.human_surface_offset}};
  return j.dump(2) + "\n";
}

PointCloud preprocess_cloud(const PointCloud& cloud, const PipelineConfig& config) {
  if (cloud.empty()) return cloud;
  PointCloud out = config.denoise_enabled ? denoise(cloud, config.denoise) : cloud;
  if (config.voxel_size > 0.0 && !out.empty()) out = voxel_downsample(out, config.voxel_size);
  return out;
}

namespace {

std::optional<WorldObject> localize(const Detection& det, const std::vector<Detection>& all,
                                    const DepthImage& depth, const CalibrationBundle& calib,
                                    const PipelineConfig& config) {
  const DepthSamples samples = remove_depth_outliers(extract_bbox_depths(depth, det.bbox));
  if (samples.empty()) return std::nullopt;

  const bool occluded = occlusion_check(det, all, depth, config.occlusion);
  const double z = estimate_target_depth(samples, occluded, config.depth);

  CameraPoint pc = pixel_to_camera(PixelPoint{det.bbox.center_u(), det.bbox.center_v(), z}, calib.intrinsics());
  const double offset = det.label == ClassLabel::Human ? config.human_surface_offset : config.mic_surface_offset;
  if (offset != 0.0) {
    const double range = pc.xyz.norm();
    pc.xyz *= (range + offset) / range;
  }

  WorldObject obj;
  obj.label = det.label;
  obj.position = calib.to_world(calib.to_lidar(pc));
  obj.depth_used = z;
  obj.source_bbox = det.bbox;
  obj.method = config.depth.method;
  obj.occluded = occluded;
  return obj;
}

// Highest-confidence localized object with the given label; first wins ties.
std::optional<WorldObject> best_of(ClassLabel label, const std::vector<Detection>& dets,
                                   const std::vector<std::optional<WorldObject>>& objs) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].label != label || !objs[i]) continue;
    if (!best || dets[i].confidence > dets[*best].confidence) best = i;
  }
  if (!best) return std::nullopt;
  return objs[*best];
}

}  // namespace

SafetyVerdict evaluate_frame(const std::vector<Detection>& detections, const DepthImage& depth,
                             const CalibrationBundle& calib, const PipelineConfig& config,
                             double timestamp) {
  std::vector<Detection> dets;
  dets.reserve(detections.size());
  for (const Detection& d : detections) {
    Detection c = d;
    c.bbox = clamp_to_image(d.bbox, calib.image_width(), calib.image_height());
    if (c.bbox.valid()) dets.push_back(c);
  }

  std::vector<std::optional<WorldObject>> objs(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) objs[i] = localize(dets[i], dets, depth, calib, config);

  SafetyVerdict v;
  v.timestamp = timestamp;
  v.mic = best_of(ClassLabel::MiC, dets, objs);
  if (!v.mic) {
    if ((v.mic = best_of(ClassLabel::MiCFrame, dets, objs))) {
      v.mic->position.xyz.z() -= config.mic_frame_z_offset;
    } else if ((v.mic = best_of(ClassLabel::Hook, dets, objs))) {
      v.mic->position.xyz.z() -= config.hook_z_offset;
    }
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].label == ClassLabel::Human && objs[i]) v.humans.push_back(*objs[i]);
  }

  if (v.mic) {
    v.status = VerdictStatus::Ok;
    v.zone = DangerZone{v.mic->position.x(), v.mic->position.y(), config.danger_radius};
    for (std::size_t i = 0; i < v.humans.size(); ++i) {
      if (in_danger_zone(v.humans[i].position, *v.zone)) v.intruders.push_back(i);
      if (horizontal_distance(v.humans[i].position, v.mic->position) < config.compliance.clearance) {
        v.compliance.clearance_ok = false;
      }
    }
  } else {
    v.status = VerdictStatus::NoTarget;
  }
  return v;
}

SafetyVerdict process_frame(const FramePair& pair, const CalibrationBundle& calib, const PipelineConfig& config) {
  if (pair.cloud.empty()) throw Error(ErrorCode::EmptyCloud, "no LiDAR returns in the cloud at t=" + std::to_string(pair.cloud_ts));
  const PointCloud cloud = preprocess_cloud(pair.cloud, config);
  const DepthImage depth = render_depth_image(cloud, calib);
  return evaluate_frame(pair.detections, depth, calib, config, pair.image_ts);
}

}  // namespace liftguard
