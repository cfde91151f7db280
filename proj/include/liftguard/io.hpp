#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "liftguard/detection.hpp"
#include "liftguard/geometry.hpp"
#include "liftguard/pointcloud.hpp"

namespace liftguard {

// Calibration document (JSON):
//   { "intrinsics": {"fx", "fy", "cx", "cy"},
//     "lidar_to_camera": [[4], [4], [4], [4]],   row-major homogeneous
//     "world_to_lidar":  [[4], [4], [4], [4]],
//     "image_size": {"width", "height"} }
// IoError for a missing file, ParseError for malformed content and
// NonOrthonormalRotation for bad extrinsics.
CalibrationBundle load_calibration(const std::filesystem::path& path);
CalibrationBundle parse_calibration(const std::string& text);
std::string dump_calibration(const CalibrationBundle& calib);
void save_calibration(const CalibrationBundle& calib, const std::filesystem::path& path);

// PLY (ascii or binary_little_endian, x/y/z float or double vertex
// properties) chosen by the ".ply" extension; anything else is read as CSV
// with one "x,y,z" row per point. Timestamp is left at 0.
PointCloud load_cloud(const std::filesystem::path& path);
PointCloud parse_csv_cloud(const std::string& text);
PointCloud parse_ply_cloud(const std::string& bytes);
void save_ply_binary(const PointCloud& cloud, const std::filesystem::path& path);
void save_csv_cloud(const PointCloud& cloud, const std::filesystem::path& path);

// 16-bit binary PGM, depth in millimetres (rounded, clamped to 65535),
// 0 for empty pixels. Lossy; for inspection only.
void write_depth_pgm(const DepthImage& image, const std::filesystem::path& path);

// Detection file: JSON array of
//   {"class": "hook|mic|mic_frame|human", "bbox": [u_min, v_min, u_max, v_max],
//    "confidence": c}
// Ground-truth files share the schema; a missing confidence reads as 1.0.
std::vector<Detection> load_detections(const std::filesystem::path& path);
std::vector<Detection> parse_detections(const std::string& text);
std::string dump_detections(const std::vector<Detection>& dets);
void save_detections(const std::vector<Detection>& dets, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace liftguard
