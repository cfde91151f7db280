#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "liftguard/cli.hpp"
#include "liftguard/error.hpp"
#include "liftguard/io.hpp"
#include "liftguard/replay.hpp"
#include "liftguard/synthetic.hpp"
#include "oracles.hpp"

using namespace liftguard;
using namespace liftguard::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Short lift script: the human steps next to the MiC between t_in and t_out,
// or stays away when t_in is past the end.
std::string short_script(double t_in, double t_out, int seed = 3) {
  json j;
  j["seed"] = seed;
  j["density"] = 250;
  j["duration"] = 2.5;
  j["mic"] = {{"position", {18.0, 0.0}}, {"trajectory", json::array({{0.0, 0.0}, {2.5, 0.0}})}};
  json path = json::array({{0.0, 16.0, 8.0}});
  if (t_out < 2.5) {
    path.push_back({t_in - 0.05, 16.0, 8.0});
    path.push_back({t_in, 16.0, 2.0});
    path.push_back({t_out, 16.0, 2.0});
    path.push_back({t_out + 0.05, 16.0, 8.0});
  }
  path.push_back({2.5, 16.0, 8.0});
  j["humans"] = json::array({{{"path", path}}});
  return j.dump(2);
}

fs::path synth_bundle(const std::string& name, const std::string& script) {
  const fs::path dir = oracle::scratch(name);
  write_text_file(dir / "script.json", script);
  std::ostringstream out, err;
  REQUIRE(cmd_synth(SynthOptions{dir / "script.json", dir / "bundle", std::nullopt}, out, err) == kExitOk);
  return dir / "bundle";
}

struct Recount {
  std::size_t frames = 0, intruder_frames = 0, audible_on = 0, audible_off = 0, warnings = 0;
};

Recount recount(const std::string& log) {
  Recount r;
  std::istringstream in(log);
  for (std::string line; std::getline(in, line);) {
    const json j = json::parse(line);
    if (j.at("type") == "frame") {
      ++r.frames;
      if (!j.at("intruders").empty()) ++r.intruder_frames;
    } else if (j.at("command") == "audible_on") {
      ++r.audible_on;
    } else if (j.at("command") == "audible_off") {
      ++r.audible_off;
    } else if (j.at("command") == "warning_on") {
      ++r.warnings;
    }
  }
  return r;
}

}  // namespace

TEST_SUITE("replay_cli") {
  TEST_CASE("quiet replay exits 0 and its summary matches the event log") {
    const fs::path bundle = synth_bundle("quiet", short_script(5.0, 5.1));
    const fs::path out_dir = oracle::scratch("quiet_out");
    std::ostringstream out, err;
    const int code = cmd_replay(ReplayOptions{bundle / "manifest.json", std::nullopt, std::nullopt, out_dir,
                                              Format::Records},
                                out, err);
    CHECK(code == kExitOk);
    const json summary = json::parse(read_text_file(out_dir / "summary.json"));
    const Recount r = recount(read_text_file(out_dir / "events.ndjson"));
    CHECK(summary.at("frames_processed").get<std::size_t>() == r.frames);
    CHECK(summary.at("intruder_frames").get<std::size_t>() == 0);
    CHECK(summary.at("alarms_raised").get<std::size_t>() == 0);
    CHECK(r.frames == 26);
    CHECK(summary.at("pairs_dropped").get<std::size_t>() == 76 - 26);
  }

  TEST_CASE("intrusion replay exits 2 with one alarm and its summary matches the event log") {
    const fs::path bundle = synth_bundle("intrude", short_script(0.5, 0.9));
    std::ostringstream out, err;
    const int code = cmd_replay(ReplayOptions{bundle / "manifest.json"}, out, err);
    CHECK(code == kExitAlarm);
    const Recount r = recount(out.str());
    CHECK(r.audible_on == 1);
    CHECK(r.audible_off == 1);
    CHECK(r.intruder_frames >= 3);

    const ReplayManifest m = load_manifest(bundle / "manifest.json");
    const auto truth = load_truth(*m.truth);
    const ReplayResult res = run_replay(m, load_calibration(*m.calibration), PipelineConfig{}, &truth);
    CHECK(res.summary.alarms_raised == r.audible_on);
    CHECK(res.summary.intruder_frames == r.intruder_frames);
    CHECK(res.summary.frames_processed == r.frames);
    CHECK(res.summary.warnings_raised == r.warnings);
    CHECK(res.event_log == out.str());
    CHECK(res.event_log.find("wall_time") == std::string::npos);
  }

  TEST_CASE("replay reports missing inputs with exit 1") {
    const fs::path bundle = synth_bundle("missing", short_script(5.0, 5.1));
    std::ostringstream out, err;
    CHECK(cmd_replay(ReplayOptions{bundle / "manifest.json", fs::path("/nonexistent/calib.json")}, out, err) ==
          kExitError);
    CHECK(err.str().find("/nonexistent/calib.json") != std::string::npos);

    std::ostringstream out2, err2;
    write_text_file(bundle / "bad_config.json", R"({"radius": 3})");
    CHECK(cmd_replay(ReplayOptions{bundle / "manifest.json", std::nullopt, bundle / "bad_config.json"}, out2, err2) ==
          kExitError);
    CHECK(cmd_replay(ReplayOptions{"/nonexistent/manifest.json"}, out2, err2) == kExitError);
  }

  TEST_CASE("manifest parsing") {
    const auto dir = oracle::scratch("manifest");
    const std::string ok = R"({"frames": [{"timestamp": 0.0, "detections": "d/0.json"},
                                          {"timestamp": 0.1, "detections": "d/1.json"}],
                               "clouds": [{"timestamp": 0.05, "cloud": "c/0.ply"}]})";
    const ReplayManifest m = parse_manifest(ok, dir);
    REQUIRE(m.frames.size() == 2);
    CHECK(m.frames[1].detections == dir / "d/1.json");
    CHECK(m.clouds[0].cloud == dir / "c/0.ply");
    CHECK_FALSE(m.calibration.has_value());

    const std::string unordered = R"({"frames": [{"timestamp": 0.2, "detections": "a"},
                                                 {"timestamp": 0.1, "detections": "b"}], "clouds": []})";
    try {
      parse_manifest(unordered, dir);
      FAIL("expected UnorderedStream");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnorderedStream);
    }
    CHECK_THROWS_AS(parse_manifest("{}", dir), Error);
  }

  TEST_CASE("eval-detect on the hand-built fixture") {
    std::ostringstream out, err;
    EvalDetectOptions o{oracle::fixture("detect/dets"), oracle::fixture("detect/gt"), {}, Format::Records};
    REQUIRE(cmd_eval_detect(o, out, err) == kExitOk);
    const json j = json::parse(out.str());
    CHECK(j.at("classes").at("mic").at("ap_range").get<double>() == doctest::Approx(0.775));
    CHECK(j.at("classes").at("human").at("precision").get<double>() == 0.5);
    CHECK(j.at("all").at("recall").get<double>() == doctest::Approx(5.0 / 9.0));

    std::ostringstream self, e2;
    REQUIRE(cmd_eval_detect({oracle::fixture("detect/gt"), oracle::fixture("detect/gt"), {0.5}, Format::Records}, self,
                            e2) == kExitOk);
    const json s = json::parse(self.str());
    for (const auto& [name, row] : s.at("classes").items()) {
      CHECK(row.at("precision").get<double>() == 1.0);
      CHECK(row.at("recall").get<double>() == 1.0);
      CHECK(row.at("ap50").get<double>() == 1.0);
    }

    std::ostringstream table, e3;
    REQUIRE(cmd_eval_detect({oracle::fixture("detect/dets"), oracle::fixture("detect/gt"), {}, Format::Table}, table,
                            e3) == kExitOk);
    CHECK(table.str().find("all") != std::string::npos);
  }

  TEST_CASE("eval-detect with empty detections and mismatched frame sets") {
    const auto dir = oracle::scratch("eval_detect");
    fs::create_directories(dir / "dets");
    for (const char* n : {"frame_001.json", "frame_002.json", "frame_003.json"}) save_detections({}, dir / "dets" / n);
    std::ostringstream out, err;
    REQUIRE(cmd_eval_detect({dir / "dets", oracle::fixture("detect/gt"), {}, Format::Records}, out, err) == kExitOk);
    const json j = json::parse(out.str());
    CHECK(j.at("all").at("precision").get<double>() == 0.0);
    CHECK(j.at("all").at("recall").get<double>() == 0.0);

    fs::remove(dir / "dets" / "frame_003.json");
    std::ostringstream o2, e2;
    CHECK(cmd_eval_detect({dir / "dets", oracle::fixture("detect/gt"), {}, Format::Records}, o2, e2) == kExitError);
    CHECK(e2.str().find("frame_003.json") != std::string::npos);
  }

  TEST_CASE("eval-localize reads the table fixtures") {
    std::ostringstream out, err;
    REQUIRE(cmd_eval_localize({oracle::fixture("localization/table5_mic.csv")}, out, err) == kExitOk);
    CHECK(out.str().find("mean mic 1.5640 m over 10 rows") != std::string::npos);

    std::ostringstream rec, e2;
    REQUIRE(cmd_eval_localize({oracle::fixture("localization/table6_human.csv"), std::nullopt, Format::Records}, rec,
                              e2) == kExitOk);
    const json j = json::parse(rec.str());
    CHECK(j.at("rows").size() == 18);

    const auto dir = oracle::scratch("localize");
    write_text_file(dir / "perfect.csv", "frame,class,gt_x,gt_y,gt_z,det_x,det_y,det_z\nf1,human,1,2,3,1,2,3\n");
    std::ostringstream p, e3;
    REQUIRE(cmd_eval_localize({dir / "perfect.csv"}, p, e3) == kExitOk);
    CHECK(p.str().find("mean human 0.0000 m") != std::string::npos);

    write_text_file(dir / "bad.csv", "f1,human,1,2\n");
    std::ostringstream b, e4;
    CHECK(cmd_eval_localize({dir / "bad.csv"}, b, e4) == kExitError);
  }

  TEST_CASE("eval-localize over a replay event log") {
    const fs::path bundle = synth_bundle("localize_log", short_script(5.0, 5.1));
    const fs::path out_dir = oracle::scratch("localize_log_out");
    std::ostringstream o, e;
    REQUIRE(cmd_replay({bundle / "manifest.json", std::nullopt, std::nullopt, out_dir}, o, e) == kExitOk);
    std::ostringstream out, err;
    REQUIRE(cmd_eval_localize({out_dir / "events.ndjson", bundle / "truth.json", Format::Records}, out, err) ==
            kExitOk);
    const json j = json::parse(out.str());
    CHECK(j.at("classes").at("human").at("mean").get<double>() < 0.5);
    CHECK(j.at("classes").contains("mic"));

    std::ostringstream o2, e2;
    CHECK(cmd_eval_localize({out_dir / "events.ndjson"}, o2, e2) == kExitError);
    write_text_file(out_dir / "empty_truth.json", R"({"frames": []})");
    CHECK(cmd_eval_localize({out_dir / "events.ndjson", out_dir / "empty_truth.json"}, o2, e2) == kExitError);
  }

  TEST_CASE("synth is idempotent per seed and validates its spec") {
    const fs::path a = synth_bundle("synth_a", short_script(1.0, 1.2, 7));
    const fs::path b = synth_bundle("synth_b", short_script(1.0, 1.2, 7));
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (entry.is_regular_file()) CHECK(read_text_file(entry.path()) == read_text_file(b / fs::relative(entry.path(), a)));
    }

    json two = json::parse(short_script(1.0, 1.2));
    two["humans"].push_back({{"path", json::array({{0.0, 12.0, -4.0}, {2.5, 12.0, -3.0}})}});
    const fs::path c = synth_bundle("synth_two", two.dump());
    const auto dets = load_detections(c / "ground_truth" / "000000.json");
    CHECK(std::count_if(dets.begin(), dets.end(), [](const Detection& d) { return d.label == ClassLabel::Human; }) == 2);

    const auto dir = oracle::scratch("synth_bad");
    json bad = json::parse(short_script(1.0, 1.2));
    bad["density"] = 0;
    write_text_file(dir / "bad.json", bad.dump());
    std::ostringstream out, err;
    CHECK(cmd_synth({dir / "bad.json", dir / "out"}, out, err) == kExitError);
    CHECK(err.str().find("InvalidSpec") != std::string::npos);
  }

  TEST_CASE("depth-image exports") {
    const auto dir = oracle::scratch("depth_image");
    const CalibrationBundle calib = default_synthetic_calibration();
    save_calibration(calib, dir / "calib.json");

    PointCloud one;
    one.points.emplace_back(10, 0.5, 1.0);
    save_csv_cloud(one, dir / "one.csv");
    std::ostringstream out, err;
    REQUIRE(cmd_depth_image({dir / "one.csv", dir / "calib.json", dir / "one.pgm"}, out, err) == kExitOk);
    CHECK(out.str().find("populated 1 of 1024000 pixels") != std::string::npos);

    // Wall 12 m ahead, compared against the project-then-min oracle.
    PointCloud wall;
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 120; ++i)
      for (int k = 0; k < 60; ++k) pts.emplace_back(12.0, -6.0 + 0.1 * i, -1.0 + 0.1 * k);
    for (const auto& p : pts) wall.points.emplace_back(p);
    save_ply_binary(wall, dir / "wall.ply");
    const auto want = oracle::project_min(pts, calib.lidar_to_camera().homogeneous(), calib.intrinsics().fx(),
                                          calib.intrinsics().fy(), calib.intrinsics().cx(), calib.intrinsics().cy(),
                                          calib.image_width(), calib.image_height());
    std::ostringstream wout, werr;
    REQUIRE(cmd_depth_image({dir / "wall.ply", dir / "calib.json", dir / "wall.pgm"}, wout, werr) == kExitOk);
    CHECK(wout.str().find("populated " + std::to_string(want.size()) + " of") != std::string::npos);

    save_csv_cloud(PointCloud{}, dir / "empty.csv");
    std::ostringstream eout, eerr;
    REQUIRE(cmd_depth_image({dir / "empty.csv", dir / "calib.json", dir / "empty.pgm"}, eout, eerr) == kExitOk);
    CHECK(eout.str().find("populated 0 of") != std::string::npos);
    CHECK(fs::file_size(dir / "empty.pgm") == std::string("P5\n1280 800\n65535\n").size() + 2u * 1280 * 800);

    write_text_file(dir / "broken.csv", "1,2,x\n3,4,5\n6,7\n");
    std::ostringstream bout, berr;
    CHECK(cmd_depth_image({dir / "broken.csv", dir / "calib.json", dir / "b.pgm"}, bout, berr) == kExitError);
  }
}
