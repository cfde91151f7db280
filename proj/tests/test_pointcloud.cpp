#include <doctest.h>

#include <random>

#include "liftguard/error.hpp"
#include "liftguard/io.hpp"
#include "liftguard/pointcloud.hpp"
#include "liftguard/synthetic.hpp"
#include "oracles.hpp"

using namespace liftguard;

namespace {

PointCloud cloud_of(const std::vector<Eigen::Vector3d>& pts) {
  PointCloud c;
  for (const auto& p : pts) c.points.emplace_back(p);
  return c;
}

std::vector<Eigen::Vector3d> grid(int n, double step) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) pts.emplace_back(i * step, j * step, k * step);
  return pts;
}

std::vector<Eigen::Vector3d> random_points(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Eigen::Vector3d> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

CalibrationBundle identity_calib(int w = 64, int h = 48) {
  return CalibrationBundle(Intrinsics(50, 50, 32, 24), RigidTransform(), RigidTransform(), w, h);
}

}  // namespace

TEST_SUITE("pointcloud") {
  TEST_CASE("denoise removes a far outlier from a tight cluster") {
    auto pts = random_points(100, 1, -0.05, 0.05);
    pts.emplace_back(50, 0, 0);
    const PointCloud out = denoise(cloud_of(pts), DenoiseParams{10, 2.0});
    CHECK(out.size() == 100);
    for (const auto& p : out.points) CHECK(p.xyz.norm() < 1.0);
  }

  TEST_CASE("denoise keeps a uniform grid whose statistic stays inside the fence") {
    const auto pts = grid(5, 0.1);
    const PointCloud out = denoise(cloud_of(pts), DenoiseParams{16, 3.0});
    CHECK(out.size() == pts.size());
    CHECK(oracle::sor_keep(pts, 16, 3.0).size() == pts.size());
    // Grid corners sit beyond mean + 2 sd at the default ratio.
    CHECK(denoise(cloud_of(pts)).size() == pts.size() - 8);
  }

  TEST_CASE("denoise passes a single point through and rejects empty clouds") {
    const PointCloud one = cloud_of({Eigen::Vector3d(1, 2, 3)});
    CHECK(denoise(one, DenoiseParams{1, 2.0}).size() == 1);
    CHECK_THROWS_AS(denoise(PointCloud{}), Error);
    CHECK_THROWS_AS(denoise(one, DenoiseParams{0, 2.0}), Error);
  }

  TEST_CASE("denoise agrees with the brute-force kNN oracle") {
    auto pts = random_points(400, 5, 0, 2);
    auto far = random_points(10, 6, 10, 12);
    pts.insert(pts.end(), far.begin(), far.end());
    for (std::size_t k : {1u, 4u, 16u}) {
      const auto keep = oracle::sor_keep(pts, k, 1.5);
      const PointCloud got = denoise(cloud_of(pts), DenoiseParams{static_cast<int>(k), 1.5});
      REQUIRE(got.size() == keep.size());
      for (std::size_t i = 0; i < keep.size(); ++i) CHECK(got.points[i].xyz == pts[keep[i]]);
    }
  }

  TEST_CASE("voxel_downsample examples") {
    std::vector<Eigen::Vector3d> cube;
    for (int i = 0; i < 8; ++i) cube.emplace_back(0.2 + 0.1 * (i & 1), 0.2 + 0.1 * ((i >> 1) & 1), 0.2 + 0.1 * ((i >> 2) & 1));
    const PointCloud one = voxel_downsample(cloud_of(cube), 1.0);
    REQUIRE(one.size() == 1);
    CHECK((one.points[0].xyz - Eigen::Vector3d(0.25, 0.25, 0.25)).norm() < 1e-12);

    const auto sparse = grid(4, 1.0);
    CHECK(voxel_downsample(cloud_of(sparse), 0.5).size() == sparse.size());

    CHECK_THROWS_AS(voxel_downsample(PointCloud{}, 0.1), Error);
    CHECK_THROWS_AS(voxel_downsample(cloud_of(cube), 0.0), Error);
  }

  TEST_CASE("voxel_downsample equals the hash-grid oracle") {
    const auto pts = random_points(1000, 9, -3, 3);
    const auto want = oracle::voxel_centroids(pts, 0.2);
    const PointCloud got = voxel_downsample(cloud_of(pts), 0.2);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK((got.points[i].xyz - want[i]).norm() < 1e-12);
  }

  TEST_CASE("render_depth_image examples") {
    const CalibrationBundle c = identity_calib();
    const DepthImage img = render_depth_image(cloud_of({Eigen::Vector3d(0, 0, 3)}), c);
    CHECK(img.populated_count() == 1);
    REQUIRE(img.at(32, 24).has_value());
    CHECK(*img.at(32, 24) == 3.0);

    const DepthImage z = render_depth_image(cloud_of({Eigen::Vector3d(0.1, 0.1, 5), Eigen::Vector3d(0.04, 0.04, 2)}), c);
    CHECK(z.populated_count() == 1);
    CHECK(*z.at(33, 25) == 2.0);

    const DepthImage behind = render_depth_image(cloud_of({Eigen::Vector3d(0, 0, -3)}), c);
    CHECK(behind.populated_count() == 0);

    const DepthImage empty = render_depth_image(PointCloud{}, c);
    CHECK(empty.populated_count() == 0);
    CHECK(empty.width() == 64);
  }

  TEST_CASE("render_depth_image equals the project-all-then-min oracle") {
    const CalibrationBundle calib = default_synthetic_calibration();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> x(2, 30), y(-8, 8), z(-2, 8);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 500; ++i) pts.emplace_back(x(rng), y(rng), z(rng));
    // Force collisions: repeat some points farther along the same ray.
    for (int i = 0; i < 50; ++i) pts.push_back(pts[i] * 1.5);

    const auto want = oracle::project_min(pts, calib.lidar_to_camera().homogeneous(), calib.intrinsics().fx(),
                                          calib.intrinsics().fy(), calib.intrinsics().cx(), calib.intrinsics().cy(),
                                          calib.image_width(), calib.image_height());
    const DepthImage got = render_depth_image(cloud_of(pts), calib);
    CHECK(got.populated_count() == want.size());
    for (const auto& [px, d] : want) {
      REQUIRE(got.at(px.first, px.second).has_value());
      CHECK(*got.at(px.first, px.second) == doctest::Approx(d).epsilon(1e-12));
    }
  }

  TEST_CASE("parallel kernels match the serial reference bit for bit") {
    auto pts = random_points(3000, 21, 0, 4);
    auto far = random_points(30, 22, 20, 25);
    pts.insert(pts.end(), far.begin(), far.end());
    const PointCloud cloud = cloud_of(pts);

    const PointCloud d1 = denoise(cloud), d2 = reference::denoise(cloud);
    REQUIRE(d1.size() == d2.size());
    for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1.points[i] == d2.points[i]);

    const PointCloud v1 = voxel_downsample(cloud, 0.1), v2 = reference::voxel_downsample(cloud, 0.1);
    REQUIRE(v1.size() == v2.size());
    for (std::size_t i = 0; i < v1.size(); ++i) CHECK(v1.points[i] == v2.points[i]);

    const CalibrationBundle calib = default_synthetic_calibration();
    CHECK(render_depth_image(cloud, calib) == reference::render_depth_image(cloud, calib));
  }

  TEST_CASE("cloud files round trip through PLY and CSV") {
    const auto dir = oracle::scratch("clouds");
    PointCloud c = cloud_of(random_points(50, 4, -10, 10));
    save_csv_cloud(c, dir / "c.csv");
    const PointCloud csv = load_cloud(dir / "c.csv");
    REQUIRE(csv.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) CHECK((csv.points[i].xyz - c.points[i].xyz).norm() < 1e-9);

    save_ply_binary(c, dir / "c.ply");
    const PointCloud ply = load_cloud(dir / "c.ply");
    REQUIRE(ply.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) CHECK((ply.points[i].xyz - c.points[i].xyz).norm() < 1e-5);

    const PointCloud ascii = parse_ply_cloud(
        "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\n"
        "end_header\n1 2 3\n4 5 6\n");
    REQUIRE(ascii.size() == 2);
    CHECK(ascii.points[1] == LidarPoint(4, 5, 6));

    CHECK_THROWS_AS(parse_csv_cloud("1,2,3\n4,5\n"), Error);
    CHECK_THROWS_AS(load_cloud(dir / "missing.ply"), Error);
  }

  TEST_CASE("depth images export as 16-bit millimetre PGM") {
    const auto dir = oracle::scratch("pgm");
    DepthImage img(3, 2);
    img.offer(1, 0, 2.5);
    img.offer(2, 1, 70.0);  // beyond 65.535 m clamps to the maximum
    write_depth_pgm(img, dir / "d.pgm");
    const std::string bytes = read_text_file(dir / "d.pgm");
    const std::string header = "P5\n3 2\n65535\n";
    REQUIRE(bytes.size() == header.size() + 12);
    CHECK(bytes.substr(0, header.size()) == header);
    auto px = [&](int i) {
      return (static_cast<unsigned char>(bytes[header.size() + 2 * i]) << 8) |
             static_cast<unsigned char>(bytes[header.size() + 2 * i + 1]);
    };
    CHECK(px(0) == 0);
    CHECK(px(1) == 2500);
    CHECK(px(5) == 65535);
  }
}
