#pragma once

#include <array>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "glsp/geometry.hpp"
#include "glsp/junction.hpp"
#include "glsp/synthgen.hpp"

namespace glsp {

struct ScoredSegment {
  Segment segment;
  SegmentClass cls = SegmentClass::wall;
  double score = 0.0;
};

struct PredictionSet {
  std::vector<ScoredSegment> segments;
  std::vector<DetectedJunction> junctions;
};

/// Scored detections after matching: one entry per prediction plus the
/// number of ground-truth instances. Several images can be merged before the
/// AP is taken.
struct RankedMatches {
  std::vector<double> scores;
  std::vector<bool> true_positive;
  std::size_t num_gt = 0;

  void merge(const RankedMatches& other);
};

struct PrPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;
};

/// Greedy one-to-one matching in descending score order (stable for ties):
/// each prediction takes the nearest unmatched ground truth with squared
/// distance <= theta.
RankedMatches match_junctions(std::span<const DetectedJunction> pred, std::span<const Point> gt,
                              double theta);

/// Same greedy rule with structural_distance <= theta. With a class, only
/// predictions and ground truth of that class take part; without one, all
/// meaningful segments are matched regardless of class.
RankedMatches match_lines(std::span<const ScoredSegment> pred, std::span<const AnnotatedLine> gt,
                          double theta, std::optional<SegmentClass> cls);

/// Sum over recall increments of the interpolated precision (the maximum
/// precision at any equal or higher recall).
double average_precision(const RankedMatches& matches);

/// Staircase of (threshold, recall, precision) after every ranked prediction.
PrCurve pr_curve(const RankedMatches& matches);

double sap_junctions(std::span<const DetectedJunction> pred, std::span<const Point> gt, double theta);
double sap_lines(const PredictionSet& pred, std::span<const AnnotatedLine> gt, double theta,
                 std::optional<SegmentClass> cls);
/// Mean over the classes present in the ground truth; 0 when none are.
double msap(const PredictionSet& pred, std::span<const AnnotatedLine> gt, double theta);

struct RoomCount {
  std::size_t enclosed = 0;    // N_r
  std::size_t with_door = 0;   // N_R

  friend bool operator==(const RoomCount&, const RoomCount&) = default;
};

/// Bounded faces of the planar subdivision formed by the meaningful segments,
/// and how many of them have a door on their boundary.
RoomCount count_rooms(std::span<const ScoredSegment> segments, double snap = 0.5);
RoomCount count_rooms(const FloorPlanAnnotation& plan, double snap = 0.5);

/// Dataset-level metrics, predictions pooled across images.
struct EvalReport {
  std::vector<double> junction_thresholds = {2, 4, 8};
  std::vector<double> line_thresholds = {8, 16, 32};
  std::vector<double> sap_j;                        // per junction threshold
  std::vector<std::array<double, 3>> sap_class;     // per line threshold: wall, door, window
  std::vector<double> msap;                         // per line threshold
  std::vector<double> sap_n;                        // per line threshold
  double mean_rooms = 0.0;
  double mean_rooms_with_door = 0.0;
  std::size_t images = 0;
};

class Evaluator {
 public:
  Evaluator(std::vector<double> junction_thresholds = {2, 4, 8},
            std::vector<double> line_thresholds = {8, 16, 32});

  void add(const PredictionSet& pred, const FloorPlanAnnotation& gt);
  EvalReport report() const;
  /// Pooled PR staircase for one class (or all) at one line threshold.
  PrCurve curve(double theta, std::optional<SegmentClass> cls) const;

 private:
  std::vector<double> jt_;
  std::vector<double> lt_;
  std::vector<RankedMatches> junctions_;
  // [threshold][0 = class-agnostic, 1..3 = wall, door, window]
  std::vector<std::array<RankedMatches, 4>> lines_;
  double rooms_ = 0.0;
  double rooms_with_door_ = 0.0;
  std::size_t images_ = 0;
};

/// Plain-text table: metric, threshold, value.
std::string format_report(const EvalReport& report);

}  // namespace glsp
