#include <doctest.h>

#include <map>

#include "liftguard/detection.hpp"
#include "liftguard/error.hpp"
#include "liftguard/io.hpp"
#include "liftguard/metrics.hpp"
#include "oracles.hpp"

using namespace liftguard;

namespace {

Detection det(ClassLabel l, BBox b, double conf = 1.0) { return Detection{b, l, conf}; }

std::vector<FrameDetections> load_fixture() {
  std::vector<FrameDetections> frames;
  for (const char* name : {"frame_001.json", "frame_002.json", "frame_003.json"}) {
    frames.push_back({load_detections(oracle::fixture(std::string("detect/dets/") + name)),
                      load_detections(oracle::fixture(std::string("detect/gt/") + name))});
  }
  return frames;
}

}  // namespace

TEST_SUITE("detection") {
  TEST_CASE("iou examples") {
    const BBox a{0, 0, 2, 2};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, BBox{5, 5, 6, 6}) == 0.0);
    CHECK(iou(a, BBox{1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    CHECK(iou(a, BBox{2, 0, 4, 2}) == 0.0);  // touching edges
    CHECK(intersection_area(a, BBox{1, 1, 3, 3}) == 1.0);
  }

  TEST_CASE("labels and detections validate") {
    for (ClassLabel l : kAllLabels) CHECK(parse_label(to_string(l)) == l);
    CHECK_THROWS_AS(parse_label("crane"), Error);
    CHECK_THROWS_AS(validate(det(ClassLabel::Human, {5, 5, 1, 1})), Error);
    CHECK_THROWS_AS(validate(det(ClassLabel::Human, {0, 0, 1, 1}, 1.5)), Error);
    CHECK_NOTHROW(validate(det(ClassLabel::Human, {0, 0, 1, 1}, 0.5)));
    const BBox c = clamp_to_image(BBox{-10, 5, 700, 500}, 640, 480);
    CHECK(c == BBox{0, 5, 640, 480});
  }

  TEST_CASE("match_detections examples") {
    const std::vector<Detection> gt{det(ClassLabel::Human, {0, 0, 10, 10})};

    const MatchResult one = match_detections(gt, gt, 0.5);
    const ClassMatches& h = one.per_class.at(ClassLabel::Human);
    CHECK(h.tp() == 1);
    CHECK(h.fp() == 0);
    CHECK(h.fn() == 0);

    const std::vector<Detection> two{det(ClassLabel::Human, {0, 0, 10, 10}, 0.8),
                                     det(ClassLabel::Human, {0, 0, 10, 10}, 0.9)};
    const MatchResult both = match_detections(two, gt, 0.5);
    const ClassMatches& m2 = both.per_class.at(ClassLabel::Human);
    REQUIRE(m2.flags.size() == 2);
    CHECK(m2.flags[0].confidence == 0.9);
    CHECK(m2.flags[0].true_positive);
    CHECK_FALSE(m2.flags[1].true_positive);

    const std::vector<Detection> wrong{det(ClassLabel::Human, {0, 0, 10, 10})};
    const std::vector<Detection> mic{det(ClassLabel::MiC, {0, 0, 10, 10})};
    const MatchResult cross = match_detections(wrong, mic, 0.5);
    CHECK(cross.per_class.at(ClassLabel::Human).fp() == 1);
    CHECK(cross.per_class.at(ClassLabel::MiC).fn() == 1);
  }

  TEST_CASE("precision_recall examples") {
    ClassMatches m;
    m.flags = {{0.9, true}, {0.8, true}, {0.7, false}, {0.6, true}};
    m.gt_count = 4;
    const PrecisionRecall pr = precision_recall(m);
    CHECK(pr.precision == 0.75);
    CHECK(pr.recall == 0.75);

    const PrecisionRecall empty = precision_recall(ClassMatches{});
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);

    ClassMatches perfect;
    perfect.flags = {{0.9, true}, {0.8, true}};
    perfect.gt_count = 2;
    CHECK(precision_recall(perfect).precision == 1.0);
    CHECK(precision_recall(perfect).recall == 1.0);
  }

  TEST_CASE("average_precision examples") {
    const bool tp[] = {true};
    CHECK(average_precision(tp, 1) == 1.0);
    const bool tp_fp[] = {true, false};
    CHECK(average_precision(tp_fp, 1) == 1.0);
    const bool fp_tp[] = {false, true};
    CHECK(average_precision(fp_tp, 1) == 0.5);
    // Envelope: recall 1/2 at precision 1, recall 1 at precision 2/3.
    const bool mixed[] = {true, false, true};
    CHECK(average_precision(mixed, 2) == doctest::Approx(0.5 + 0.5 * 2.0 / 3.0));
    CHECK(average_precision(std::span<const bool>{}, 3) == 0.0);
    CHECK_THROWS_AS(average_precision(tp, 0), Error);
  }

  TEST_CASE("mean_ap examples") {
    const std::map<ClassLabel, double> table{{ClassLabel::Hook, 0.97},
                                             {ClassLabel::MiC, 0.70},
                                             {ClassLabel::MiCFrame, 0.93},
                                             {ClassLabel::Human, 0.81}};
    CHECK(mean_ap(table) == doctest::Approx(0.8525).epsilon(1e-12));
    CHECK(mean_ap({{ClassLabel::MiC, 0.6}}) == doctest::Approx(0.6));
    CHECK(mean_ap({{ClassLabel::Hook, 0.5}, {ClassLabel::MiC, 0.5}, {ClassLabel::MiCFrame, 0.5},
                   {ClassLabel::Human, 0.5}}) == 0.5);
    CHECK_THROWS_AS(mean_ap({}), Error);

    const auto t = coco_iou_thresholds();
    REQUIRE(t.size() == 10);
    CHECK(t.front() == 0.5);
    CHECK(t.back() == 0.95);
  }

  TEST_CASE("three-frame fixture matches the hand-computed table") {
    const auto frames = load_fixture();
    const auto thresholds = coco_iou_thresholds();
    const EvaluationReport r = evaluate_detections(frames, thresholds);
    REQUIRE(r.per_class.size() == 3);  // no mic_frame ground truth

    const ClassReport& human = r.per_class.at(ClassLabel::Human);
    CHECK(human.precision == 0.5);
    CHECK(human.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(human.ap50 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(human.ap_range == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const ClassReport& mic = r.per_class.at(ClassLabel::MiC);
    CHECK(mic.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(mic.recall == 1.0);
    CHECK(mic.ap50 == 1.0);
    CHECK(mic.ap_range == doctest::Approx(0.775).epsilon(1e-15));

    const ClassReport& hook = r.per_class.at(ClassLabel::Hook);
    CHECK(hook.precision == 0.0);
    CHECK(hook.recall == 0.0);
    CHECK(hook.ap50 == 0.0);

    CHECK(r.mean.precision == doctest::Approx(7.0 / 18.0).epsilon(1e-15));
    CHECK(r.mean.recall == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
    CHECK(r.mean.ap50 == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
    CHECK(r.mean.ap_range == doctest::Approx((2.0 / 3.0 + 0.775) / 3.0).epsilon(1e-15));
  }

  TEST_CASE("ground truth against itself scores 1 everywhere") {
    auto frames = load_fixture();
    for (auto& f : frames) f.detections = f.ground_truth;
    const auto thresholds = coco_iou_thresholds();
    const EvaluationReport r = evaluate_detections(frames, thresholds);
    for (const auto& [label, c] : r.per_class) {
      CHECK(c.precision == 1.0);
      CHECK(c.recall == 1.0);
      CHECK(c.ap50 == 1.0);
      CHECK(c.ap_range == 1.0);
    }
  }

  TEST_CASE("no detections against ground truth gives zeros") {
    auto frames = load_fixture();
    for (auto& f : frames) f.detections.clear();
    const double t[] = {0.5};
    const EvaluationReport r = evaluate_detections(frames, t);
    CHECK(r.mean.precision == 0.0);
    CHECK(r.mean.recall == 0.0);
    CHECK(r.mean.ap50 == 0.0);
  }

  TEST_CASE("file detector serves recorded frames") {
    FileDetector d;
    d.add_frame(0.5, oracle::fixture("detect/dets/frame_001.json"));
    const auto dir = oracle::scratch("detector");
    save_detections({}, dir / "empty.json");
    d.add_frame(0.6, dir / "empty.json");

    const auto got = d.detect("img", 0.5);
    REQUIRE(got.size() == 3);
    CHECK(got[2].label == ClassLabel::MiC);
    CHECK(got[2].confidence == 0.8);
    CHECK(d.detect("img", 0.6).empty());
    try {
      d.detect("img", 0.7);
      FAIL("expected MissingFrame");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingFrame);
    }
  }

  TEST_CASE("detection files round trip") {
    const std::vector<Detection> ds{det(ClassLabel::MiCFrame, {1.5, 2.5, 30.25, 40}, 0.33),
                                    det(ClassLabel::Hook, {0, 0, 1, 1}, 1.0)};
    CHECK(parse_detections(dump_detections(ds)) == ds);
    CHECK_THROWS_AS(parse_detections("{\"class\": \"human\"}"), Error);
    CHECK_THROWS_AS(parse_detections("[{\"class\": \"human\", \"bbox\": [1, 2, 3]}]"), Error);
  }
}
