#include "liftguard/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>

#include <json.hpp>

#include "liftguard/error.hpp"
#include "liftguard/io.hpp"

namespace liftguard {

using nlohmann::json;

CalibrationBundle default_synthetic_calibration() {
  Eigen::Matrix3d r;
  r << -0.0008910281668238779, -0.999972163506604, -0.007407987630116591,  //
      0.3328466004994993, 0.006689026233439883, -0.9429572617377602,        //
      0.9429805653377661, -0.0033059249795460706, 0.3328313751065202;
  const RigidTransform lidar_to_camera(r, Eigen::Vector3d(0.0036, -0.1063, -0.0610));
  const RigidTransform world_to_lidar(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.0, 0.0, -1.5));
  return CalibrationBundle(Intrinsics(631.1799, 633.3630, 641.5884, 362.5603), lidar_to_camera,
                           world_to_lidar, 1280, 800);
}

void validate(const SceneSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); };
  if (!(spec.density > 0.0) || !std::isfinite(spec.density)) fail("density must be > 0");
  if (!(spec.noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (!(spec.ground_density >= 0.0)) fail("ground_density must be >= 0");
  if (!(spec.box_jitter_px >= 0.0)) fail("box_jitter_px must be >= 0");
  if (!(spec.dropout_rate >= 0.0 && spec.dropout_rate <= 1.0)) fail("dropout_rate must lie in [0, 1]");
  if (!(spec.detection_confidence >= 0.0 && spec.detection_confidence <= 1.0)) fail("confidence must lie in [0, 1]");
  for (const SceneObject& o : spec.objects) {
    if (!(o.dims.minCoeff() > 0.0)) fail("object dimensions must be positive");
    if (!o.center.xyz.allFinite()) fail("object center must be finite");
  }
}

double camera_depth(const WorldPoint& p, const CalibrationBundle& calib) {
  return calib.to_camera(calib.to_lidar(p)).z();
}

std::optional<BBox> project_box(const SceneObject& obj, const CalibrationBundle& calib) {
  const Eigen::Vector3d half = 0.5 * obj.dims;
  double u_min = 1e300, v_min = 1e300, u_max = -1e300, v_max = -1e300;
  for (int corner = 0; corner < 8; ++corner) {
    const Eigen::Vector3d offset((corner & 1) ? half.x() : -half.x(), (corner & 2) ? half.y() : -half.y(),
                                 (corner & 4) ? half.z() : -half.z());
    const CameraPoint pc = calib.to_camera(calib.to_lidar(WorldPoint(obj.center.xyz + offset)));
    if (!(pc.z() > 0.0)) return std::nullopt;
    const PixelPoint px = camera_to_pixel(pc, calib.intrinsics());
    u_min = std::min(u_min, px.u);
    v_min = std::min(v_min, px.v);
    u_max = std::max(u_max, px.u);
    v_max = std::max(v_max, px.v);
  }
  const BBox box = clamp_to_image(BBox{u_min, v_min, u_max, v_max}, calib.image_width(), calib.image_height());
  if (!box.valid()) return std::nullopt;
  return box;
}

namespace {

struct Aabb {
  Eigen::Vector3d lo, hi;
};

Aabb bounds(const SceneObject& o) {
  return {o.center.xyz - 0.5 * o.dims, o.center.xyz + 0.5 * o.dims};
}

// True when the segment origin -> target enters the box before reaching the target.
bool segment_blocked(const Eigen::Vector3d& origin, const Eigen::Vector3d& target, const Aabb& box) {
  const Eigen::Vector3d dir = target - origin;
  double t_enter = -1e300, t_exit = 1e300;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) return false;
      continue;
    }
    double t0 = (box.lo[a] - origin[a]) / dir[a];
    double t1 = (box.hi[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  return t_enter <= t_exit && t_exit > 0.0 && t_enter < 1.0 - 1e-9;
}

std::vector<Detection> observe(const std::vector<Detection>& truth, const SceneSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Detection> out;
  for (const Detection& t : truth) {
    const double keep = unit(rng);
    std::array<double, 4> e{};
    for (double& v : e) v = jitter(rng) * spec.box_jitter_px;
    if (keep < spec.dropout_rate) continue;
    Detection d = t;
    d.confidence = spec.detection_confidence;
    d.bbox = clamp_to_image(BBox{t.bbox.u_min + e[0], t.bbox.v_min + e[1], t.bbox.u_max + e[2], t.bbox.v_max + e[3]},
                            spec.calib.image_width(), spec.calib.image_height());
    if (d.bbox.valid()) out.push_back(d);
  }
  return out;
}

void project_all(const SceneSpec& spec, SyntheticScene& scene) {
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    if (const auto box = project_box(spec.objects[i], spec.calib)) {
      scene.ground_truth.push_back(Detection{*box, spec.objects[i].label, 1.0});
      scene.gt_object.emplace_back(i);
    }
  }
}

constexpr std::uint64_t kDetectionStream = 0x9e3779b97f4a7c15ULL;

}  // namespace

SyntheticScene generate_scene(const SceneSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  const Eigen::Vector3d origin = spec.calib.lidar_to_world().translation();
  std::vector<Aabb> boxes;
  for (const SceneObject& o : spec.objects) boxes.push_back(bounds(o));

  SyntheticScene scene;
  scene.cloud.points.reserve(4096);
  scene.points_per_object.assign(spec.objects.size(), 0);

  auto emit = [&](const Eigen::Vector3d& surface, std::optional<std::size_t> owner) {
    const double n = noise(rng) * spec.noise_sigma;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (owner && *owner == b) continue;
      if (segment_blocked(origin, surface, boxes[b])) return;
    }
    const Eigen::Vector3d ray = surface - origin;
    const double range = ray.norm();
    if (!(range > 0.0)) return;
    const Eigen::Vector3d noisy = origin + ray * ((range + n) / range);
    scene.cloud.points.push_back(spec.calib.to_lidar(WorldPoint(noisy)));
    if (owner) ++scene.points_per_object[*owner];
  };

  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const SceneObject& o = spec.objects[i];
    const Eigen::Vector3d half = 0.5 * o.dims;
    for (int axis = 0; axis < 3; ++axis) {
      for (int sign : {-1, 1}) {
        Eigen::Vector3d normal = Eigen::Vector3d::Zero();
        normal[axis] = sign;
        const Eigen::Vector3d face_center = o.center.xyz + normal * half[axis];
        if (normal.dot(origin - face_center) <= 0.0) continue;  // faces away from the sensor
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        const double area = 4.0 * half[a1] * half[a2];
        const auto count = static_cast<long>(std::llround(area * spec.density));
        for (long p = 0; p < count; ++p) {
          Eigen::Vector3d s = face_center;
          s[a1] += sym(rng) * half[a1];
          s[a2] += sym(rng) * half[a2];
          emit(s, i);
        }
      }
    }
  }

  if (spec.ground_density > 0.0 && origin.z() > 0.0) {
    constexpr double x0 = 0.5, x1 = 40.0, y0 = -20.0, y1 = 20.0;
    const auto count = static_cast<long>(std::llround((x1 - x0) * (y1 - y0) * spec.ground_density));
    std::uniform_real_distribution<double> gx(x0, x1), gy(y0, y1);
    for (long p = 0; p < count; ++p) {
      const double x = gx(rng);
      const double y = gy(rng);
      emit(Eigen::Vector3d(x, y, 0.0), std::nullopt);
    }
  }

  project_all(spec, scene);
  std::mt19937_64 det_rng(spec.seed ^ kDetectionStream);
  scene.detections = observe(scene.ground_truth, spec, det_rng);
  return scene;
}

// ---------------------------------------------------------------------------

namespace {

double interpolate(const std::vector<Keyframe>& keys, double t, double Keyframe::*field) {
  if (keys.empty()) return 0.0;
  if (t <= keys.front().t) return keys.front().*field;
  if (t >= keys.back().t) return keys.back().*field;
  const auto hi = std::upper_bound(keys.begin(), keys.end(), t, [](double v, const Keyframe& k) { return v < k.t; });
  const auto lo = hi - 1;
  const double span = hi->t - lo->t;
  const double w = span > 0.0 ? (t - lo->t) / span : 1.0;
  return (*lo).*field + w * ((*hi).*field - (*lo).*field);
}

void check_keys(const std::vector<Keyframe>& keys, const char* what) {
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (keys[i].t < keys[i - 1].t) throw Error(ErrorCode::InvalidSpec, std::string(what) + " keyframes go back in time");
  }
}

std::size_t sample_count(double duration, double rate) {
  if (duration <= 0.0) return 1;
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
}

std::string numbered(const char* dir, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/%06zu%s", dir, i, ext);
  return buf;
}

json point_json(const WorldPoint& p) { return json::array({p.x(), p.y(), p.z()}); }

}  // namespace

void validate(const LiftSpec& spec) {
  validate(spec.scene);
  if (!(spec.mic_dims.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidSpec, "MiC dimensions must be positive");
  if (!(spec.duration >= 0.0)) throw Error(ErrorCode::InvalidSpec, "duration must be >= 0");
  if (!(spec.camera_fps > 0.0) || !(spec.lidar_hz > 0.0)) throw Error(ErrorCode::InvalidSpec, "rates must be > 0");
  check_keys(spec.trajectory, "trajectory");
  for (const HumanPath& h : spec.humans) {
    if (!(h.dims.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidSpec, "human dimensions must be positive");
    if (h.path.empty()) throw Error(ErrorCode::InvalidSpec, "human path needs at least one keyframe");
    check_keys(h.path, "human path");
  }
}

std::vector<SceneObject> lift_objects_at(const LiftSpec& spec, double t) {
  std::vector<SceneObject> objs;
  const double height = interpolate(spec.trajectory, t, &Keyframe::a);
  objs.push_back({ClassLabel::MiC,
                  WorldPoint(spec.mic_x, spec.mic_y, spec.mic_base_z + height + 0.5 * spec.mic_dims.z()),
                  spec.mic_dims});
  for (const HumanPath& h : spec.humans) {
    objs.push_back({ClassLabel::Human,
                    WorldPoint(interpolate(h.path, t, &Keyframe::a), interpolate(h.path, t, &Keyframe::b),
                               0.5 * h.dims.z()),
                    h.dims});
  }
  return objs;
}

LiftBundleInfo generate_lift(const LiftSpec& spec, const std::filesystem::path& out_dir) {
  validate(spec);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "clouds");
  fs::create_directories(out_dir / "detections");
  fs::create_directories(out_dir / "ground_truth");

  LiftBundleInfo info;
  info.frames = sample_count(spec.duration, spec.camera_fps);
  info.clouds = sample_count(spec.duration, spec.lidar_hz);

  std::vector<std::exception_ptr> errors(info.frames + info.clouds);
  std::vector<json> truth_frames(info.frames);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(info.clouds); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    try {
      SceneSpec s = spec.scene;
      const double t = static_cast<double>(j) / spec.lidar_hz;
      s.objects = lift_objects_at(spec, t);
      s.seed = spec.scene.seed ^ j;
      save_ply_binary(generate_scene(s).cloud, out_dir / numbered("clouds", j, ".ply"));
    } catch (...) {
      errors[info.frames + j] = std::current_exception();
    }
  }

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(info.frames); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      SceneSpec s = spec.scene;
      const double t = static_cast<double>(i) / spec.camera_fps;
      s.objects = lift_objects_at(spec, t);
      SyntheticScene scene;
      project_all(s, scene);
      std::mt19937_64 rng((spec.scene.seed ^ i) ^ kDetectionStream);
      save_detections(observe(scene.ground_truth, s, rng), out_dir / numbered("detections", i, ".json"));
      save_detections(scene.ground_truth, out_dir / numbered("ground_truth", i, ".json"));

      json humans = json::array();
      for (std::size_t o = 1; o < s.objects.size(); ++o) humans.push_back(point_json(s.objects[o].center));
      truth_frames[i] = {{"timestamp", t}, {"mic", point_json(s.objects[0].center)}, {"humans", humans}};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  json manifest;
  manifest["calibration"] = "calib.json";
  manifest["truth"] = "truth.json";
  manifest["frames"] = json::array();
  manifest["clouds"] = json::array();
  for (std::size_t i = 0; i < info.frames; ++i) {
    manifest["frames"].push_back({{"timestamp", static_cast<double>(i) / spec.camera_fps},
                                  {"detections", numbered("detections", i, ".json")},
                                  {"ground_truth", numbered("ground_truth", i, ".json")}});
  }
  for (std::size_t j = 0; j < info.clouds; ++j) {
    manifest["clouds"].push_back(
        {{"timestamp", static_cast<double>(j) / spec.lidar_hz}, {"cloud", numbered("clouds", j, ".ply")}});
  }
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  write_text_file(out_dir / "truth.json", json{{"frames", truth_frames}}.dump(2) + "\n");
  save_calibration(spec.scene.calib, out_dir / "calib.json");
  return info;
}

namespace {

Eigen::Vector3d vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, std::string(what) + " needs 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<Keyframe> keyframes(const json& j, std::size_t width, const char* what) {
  std::vector<Keyframe> out;
  for (const json& row : j) {
    if (!row.is_array() || row.size() != width) {
      throw Error(ErrorCode::ParseError, std::string(what) + " rows need " + std::to_string(width) + " numbers");
    }
    Keyframe k;
    k.t = row[0].get<double>();
    k.a = row[1].get<double>();
    if (width == 3) k.b = row[2].get<double>();
    out.push_back(k);
  }
  return out;
}

}  // namespace

LiftSpec parse_lift_spec(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scene spec: ") + e.what());
  }
  LiftSpec spec;
  try {
    if (j.contains("calibration")) {
      const json& c = j.at("calibration");
      spec.scene.calib = c.is_string() ? load_calibration(base_dir / c.get<std::string>()) : parse_calibration(c.dump());
    }
    SceneSpec& s = spec.scene;
    s.seed = j.value("seed", s.seed);
    s.density = j.value("density", s.density);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.ground_density = j.value("ground_density", s.ground_density);
    s.box_jitter_px = j.value("box_jitter_px", s.box_jitter_px);
    s.dropout_rate = j.value("dropout_rate", s.dropout_rate);
    s.detection_confidence = j.value("detection_confidence", s.detection_confidence);
    spec.duration = j.value("duration", spec.duration);
    spec.camera_fps = j.value("camera_fps", spec.camera_fps);
    spec.lidar_hz = j.value("lidar_hz", spec.lidar_hz);
    if (j.contains("mic")) {
      const json& m = j.at("mic");
      if (m.contains("position")) {
        const json& p = m.at("position");
        if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::ParseError, "mic.position needs [x, y]");
        spec.mic_x = p[0].get<double>();
        spec.mic_y = p[1].get<double>();
      }
      spec.mic_base_z = m.value("base_z", spec.mic_base_z);
      if (m.contains("dims")) spec.mic_dims = vec3(m.at("dims"), "mic.dims");
      if (m.contains("trajectory")) spec.trajectory = keyframes(m.at("trajectory"), 2, "mic.trajectory");
    }
    if (j.contains("humans")) {
      for (const json& h : j.at("humans")) {
        HumanPath path;
        if (h.contains("dims")) path.dims = vec3(h.at("dims"), "human.dims");
        path.path = keyframes(h.at("path"), 3, "human.path");
        spec.humans.push_back(path);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scene spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

LiftSpec load_lift_spec(const std::filesystem::path& path) {
  return parse_lift_spec(read_text_file(path), path.parent_path());
}

}  // namespace liftguard
