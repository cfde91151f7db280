#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace liftguard {

enum class ClassLabel { Hook, MiC, MiCFrame, Human };

inline constexpr std::array<ClassLabel, 4> kAllLabels = {ClassLabel::Hook, ClassLabel::MiC,
                                                         ClassLabel::MiCFrame, ClassLabel::Human};

// File spelling: hook | mic | mic_frame | human.
std::string_view to_string(ClassLabel label);
ClassLabel parse_label(std::string_view text);  // throws ParseError

// Axis-aligned pixel box, min corner inclusive.
struct BBox {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;

  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  double area() const { return width() * height(); }
  double center_u() const { return 0.5 * (u_min + u_max); }
  double center_v() const { return 0.5 * (v_min + v_max); }
  bool valid() const { return u_min < u_max && v_min < v_max; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);

// Clips to [0, width] x [0, height]; the result may be degenerate.
BBox clamp_to_image(const BBox& box, int width, int height);

struct Detection {
  BBox bbox;
  ClassLabel label = ClassLabel::Human;
  double confidence = 1.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Throws InvalidArgument on an inverted box or confidence outside [0, 1].
void validate(const Detection& d);

// Detector boundary. Real inference lives outside this project; replays plug
// in recorded detections instead.
class DetectionSource {
 public:
  virtual ~DetectionSource() = default;
  virtual std::vector<Detection> detect(const std::string& image_ref, double frame_ts) const = 0;
};

// Serves detections recorded to per-frame files, keyed by frame timestamp.
class FileDetector final : public DetectionSource {
 public:
  void add_frame(double frame_ts, std::filesystem::path detections_file);

  // Throws MissingFrame when no file is registered for frame_ts.
  std::vector<Detection> detect(const std::string& image_ref, double frame_ts) const override;

 private:
  std::map<double, std::filesystem::path> frames_;
};

}  // namespace liftguard
