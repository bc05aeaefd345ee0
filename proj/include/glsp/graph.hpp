#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "glsp/geometry.hpp"
#include "glsp/junction.hpp"

namespace glsp {

/// A candidate line segment between detected junctions i < j.
struct CandidateSegment {
  Segment segment;
  std::size_t i = 0;
  std::size_t j = 0;
  bool potential = false;

  bool shares_junction(const CandidateSegment& other) const {
    return i == other.i || i == other.j || j == other.i || j == other.j;
  }
};

struct DualEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  Point shared;
  std::size_t junction = 0;

  friend bool operator==(const DualEdge&, const DualEdge&) = default;
};

/// The intermediate graph: nodes are candidate segments, edges connect
/// candidates that meet at a junction.
struct CandidateGraph {
  std::vector<CandidateSegment> nodes;
  std::vector<DualEdge> edges;
  std::optional<std::vector<SegmentClass>> node_labels;
  std::optional<std::vector<std::array<double, kNumClasses>>> node_scores;

  std::vector<SegmentClass> predicted_classes() const;
};

enum class Suppression { nss, nds };

inline constexpr double kPotentialShortLength = 20.0;

/// Short segments, or segments within 200/l + 2 degrees of an axis.
bool is_potential(const Segment& seg);

/// Angle threshold in degrees applied when `seg` is the longer segment.
double nss_threshold(const Segment& seg);

/// All junction pairs. Fewer than two junctions gives an empty list.
std::vector<CandidateSegment> enumerate_candidates(std::span<const DetectedJunction> junctions);

/// Non-shortest suppression: shortest-first greedy pass; a candidate is
/// dropped when an already kept candidate meets it at a junction under the
/// candidate's angle threshold. Output keeps input order.
std::vector<CandidateSegment> nss_filter(std::span<const CandidateSegment> cands);

/// Non-diagonal suppression: potential candidates plus candidates joining two
/// adjacent vertices of the junctions' convex hull.
std::vector<CandidateSegment> nds_filter(std::span<const CandidateSegment> cands,
                                         std::span<const DetectedJunction> junctions);

std::vector<CandidateSegment> suppress(Suppression mode, std::span<const CandidateSegment> cands,
                                       std::span<const DetectedJunction> junctions);

CandidateGraph build_dual_graph(std::span<const CandidateSegment> kept);

}  // namespace glsp
