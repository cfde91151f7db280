#include "liftguard/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "liftguard/error.hpp"

namespace liftguard {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

Eigen::Matrix4d matrix4_from_json(const json& j, const std::string& key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, "calibration lacks '" + key + "'");
  const json& m = j.at(key);
  Eigen::Matrix4d out;
  if (m.is_array() && m.size() == 4 && m[0].is_array()) {
    for (int r = 0; r < 4; ++r) {
      if (!m[r].is_array() || m[r].size() != 4) {
        throw Error(ErrorCode::ParseError, key + " must be 4x4");
      }
      for (int c = 0; c < 4; ++c) out(r, c) = m[r][c].get<double>();
    }
  } else if (m.is_array() && m.size() == 16) {
    for (int i = 0; i < 16; ++i) out(i / 4, i % 4) = m[i].get<double>();
  } else {
    throw Error(ErrorCode::ParseError, key + " must be a 4x4 row-major matrix");
  }
  return out;
}

json matrix4_to_json(const Eigen::Matrix4d& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

CalibrationBundle parse_calibration(const std::string& text) {
  const json j = parse_json(text, "calibration");
  try {
    const json& k = j.at("intrinsics");
    Intrinsics intr(k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                    k.at("cy").get<double>());
    const json& size = j.at("image_size");
    int width = 0, height = 0;
    if (size.is_array() && size.size() == 2) {
      width = size[0].get<int>();
      height = size[1].get<int>();
    } else {
      width = size.at("width").get<int>();
      height = size.at("height").get<int>();
    }
    return CalibrationBundle(intr, RigidTransform::from_homogeneous(matrix4_from_json(j, "lidar_to_camera")),
                             RigidTransform::from_homogeneous(matrix4_from_json(j, "world_to_lidar")),
                             width, height);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("calibration: ") + e.what());
  }
}

CalibrationBundle load_calibration(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::IoError, "calibration file not found: " + path.string());
  }
  return parse_calibration(read_text_file(path));
}

std::string dump_calibration(const CalibrationBundle& calib) {
  const Intrinsics& k = calib.intrinsics();
  json j;
  j["intrinsics"] = {{"fx", k.fx()}, {"fy", k.fy()}, {"cx", k.cx()}, {"cy", k.cy()}};
  j["lidar_to_camera"] = matrix4_to_json(calib.lidar_to_camera().homogeneous());
  j["world_to_lidar"] = matrix4_to_json(calib.world_to_lidar().homogeneous());
  j["image_size"] = {{"width", calib.image_width()}, {"height", calib.image_height()}};
  return j.dump(2) + "\n";
}

void save_calibration(const CalibrationBundle& calib, const std::filesystem::path& path) {
  write_text_file(path, dump_calibration(calib));
}

// ---------------------------------------------------------------------------
// Point clouds

namespace {

LidarPoint checked_point(double x, double y, double z) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
    throw Error(ErrorCode::ParseError, "non-finite point coordinate");
  }
  return LidarPoint(x, y, z);
}

std::size_t ply_type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  throw Error(ErrorCode::ParseError, "unsupported PLY property type '" + type + "'");
}

double read_le_scalar(const char* p, const std::string& type) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  if (type == "float" || type == "float32") {
    float f;
    std::memcpy(&f, p, 4);
    return f;
  }
  if (type == "double" || type == "float64") {
    double d;
    std::memcpy(&d, p, 8);
    return d;
  }
  if (type == "char" || type == "int8") return static_cast<std::int8_t>(*p);
  if (type == "uchar" || type == "uint8") return static_cast<std::uint8_t>(*p);
  if (type == "short" || type == "int16") {
    std::int16_t v;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (type == "ushort" || type == "uint16") {
    std::uint16_t v;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (type == "int" || type == "int32") {
    std::int32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

struct PlyProperty {
  std::string type;
  std::string name;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

}  // namespace

PointCloud parse_ply_cloud(const std::string& bytes) {
  const std::size_t header_end = bytes.find("end_header");
  if (bytes.rfind("ply", 0) != 0 || header_end == std::string::npos) {
    throw Error(ErrorCode::ParseError, "not a PLY file");
  }
  std::size_t body = bytes.find('\n', header_end);
  if (body == std::string::npos) throw Error(ErrorCode::ParseError, "truncated PLY header");
  ++body;

  std::istringstream header(bytes.substr(0, header_end));
  std::string line, format;
  std::vector<PlyElement> elements;
  while (std::getline(header, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      ls >> format;
    } else if (word == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw Error(ErrorCode::ParseError, "PLY property before element");
      PlyProperty p;
      ls >> p.type;
      if (p.type == "list") {
        if (elements.back().name == "vertex") {
          throw Error(ErrorCode::ParseError, "list properties on vertices are not supported");
        }
        std::string count_type, item_type;
        ls >> count_type >> item_type;
        p.type = "list";
      }
      ls >> p.name;
      elements.back().props.push_back(p);
    }
  }
  if (format != "ascii" && format != "binary_little_endian") {
    throw Error(ErrorCode::ParseError, "unsupported PLY format '" + format + "'");
  }
  const bool ascii = format == "ascii";

  PointCloud cloud;
  std::size_t offset = body;
  std::istringstream text(ascii ? bytes.substr(body) : std::string());
  for (const PlyElement& e : elements) {
    const bool is_vertex = e.name == "vertex";
    int ix = -1, iy = -1, iz = -1;
    std::size_t stride = 0;
    std::vector<std::size_t> offsets;
    for (std::size_t i = 0; i < e.props.size(); ++i) {
      const PlyProperty& p = e.props[i];
      if (p.name == "x") ix = static_cast<int>(i);
      if (p.name == "y") iy = static_cast<int>(i);
      if (p.name == "z") iz = static_cast<int>(i);
      offsets.push_back(stride);
      if (!ascii) {
        if (p.type == "list") {
          throw Error(ErrorCode::ParseError, "binary PLY list element before vertices");
        }
        stride += ply_type_size(p.type);
      }
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) {
      throw Error(ErrorCode::ParseError, "PLY vertices lack x/y/z");
    }
    if (!is_vertex && !cloud.points.empty()) break;  // trailing elements are ignored

    if (is_vertex) cloud.points.reserve(e.count);
    for (std::size_t r = 0; r < e.count; ++r) {
      if (ascii) {
        if (!std::getline(text, line)) throw Error(ErrorCode::ParseError, "truncated PLY body");
        if (!is_vertex) continue;
        std::istringstream ls(line);
        std::vector<double> values(e.props.size());
        for (double& v : values) {
          if (!(ls >> v)) throw Error(ErrorCode::ParseError, "bad PLY vertex row");
        }
        cloud.points.push_back(checked_point(values[ix], values[iy], values[iz]));
      } else {
        if (offset + stride > bytes.size()) throw Error(ErrorCode::ParseError, "truncated PLY body");
        if (is_vertex) {
          const char* row = bytes.data() + offset;
          cloud.points.push_back(checked_point(read_le_scalar(row + offsets[ix], e.props[ix].type),
                                               read_le_scalar(row + offsets[iy], e.props[iy].type),
                                               read_le_scalar(row + offsets[iz], e.props[iz].type)));
        }
        offset += stride;
      }
    }
    if (is_vertex) break;
  }
  return cloud;
}

PointCloud parse_csv_cloud(const std::string& text) {
  PointCloud cloud;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) {
      // a header row such as "x,y,z" is tolerated on the first line only
      if (cloud.points.empty() && line_no == 1) continue;
      throw Error(ErrorCode::ParseError, "bad CSV row " + std::to_string(line_no));
    }
    cloud.points.push_back(checked_point(x, y, z));
  }
  return cloud;
}

PointCloud load_cloud(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" ? parse_ply_cloud(bytes) : parse_csv_cloud(bytes);
}

void save_ply_binary(const PointCloud& cloud, const std::filesystem::path& path) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                    std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  const std::size_t header = out.size();
  out.resize(header + cloud.size() * 12);
  char* dst = out.data() + header;
  for (const auto& p : cloud.points) {
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z())};
    std::memcpy(dst, xyz, sizeof xyz);
    dst += sizeof xyz;
  }
  write_text_file(path, out);
}

void save_csv_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& p : cloud.points) out << p.x() << ',' << p.y() << ',' << p.z() << '\n';
  write_text_file(path, out.str());
}

void write_depth_pgm(const DepthImage& image, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) +
                    "\n65535\n";
  const std::size_t header = out.size();
  out.resize(header + image.raw().size() * 2);
  char* dst = out.data() + header;
  for (double d : image.raw()) {
    const double mm = std::clamp(std::round(d * 1000.0), 0.0, 65535.0);
    const auto q = static_cast<std::uint16_t>(mm);
    *dst++ = static_cast<char>(q >> 8);  // PGM samples are big-endian
    *dst++ = static_cast<char>(q & 0xff);
  }
  write_text_file(path, out);
}

// ---------------------------------------------------------------------------
// Detections

std::vector<Detection> parse_detections(const std::string& text) {
  const json j = parse_json(text, "detections");
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "detections file must be a JSON array");
  std::vector<Detection> out;
  out.reserve(j.size());
  try {
    for (const json& rec : j) {
      Detection d;
      d.label = parse_label(rec.at("class").get<std::string>());
      const json& b = rec.at("bbox");
      if (!b.is_array() || b.size() != 4) throw Error(ErrorCode::ParseError, "bbox needs 4 numbers");
      d.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      d.confidence = rec.value("confidence", 1.0);
      validate(d);
      out.push_back(d);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("detections: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, e.what());
  }
  return out;
}

std::vector<Detection> load_detections(const std::filesystem::path& path) {
  return parse_detections(read_text_file(path));
}

std::string dump_detections(const std::vector<Detection>& dets) {
  json j = json::array();
  for (const Detection& d : dets) {
    j.push_back({{"class", to_string(d.label)},
                 {"bbox", {d.bbox.u_min, d.bbox.v_min, d.bbox.u_max, d.bbox.v_max}},
                 {"confidence", d.confidence}});
  }
  return j.dump(2) + "\n";
}

void save_detections(const std::vector<Detection>& dets, const std::filesystem::path& path) {
  write_text_file(path, dump_detections(dets));
}

}  // namespace liftguard
