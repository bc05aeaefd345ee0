#include "glsp/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace glsp {

std::vector<SegmentClass> CandidateGraph::predicted_classes() const {
  std::vector<SegmentClass> out;
  if (!node_scores) return std::vector<SegmentClass>(nodes.size(), SegmentClass::null);
  out.reserve(node_scores->size());
  for (const auto& s : *node_scores) {
    // First maximum wins, so ties resolve toward null.
    const auto best = std::max_element(s.begin(), s.end()) - s.begin();
    out.push_back(static_cast<SegmentClass>(best));
  }
  return out;
}

bool is_potential(const Segment& seg) {
  const double l = seg.length();
  if (l < kPotentialShortLength) return true;
  return axis_angle(seg) < 200.0 / l + 2.0;
}

double nss_threshold(const Segment& seg) { return is_potential(seg) ? 2.0 : 22.5; }

std::vector<CandidateSegment> enumerate_candidates(std::span<const DetectedJunction> junctions) {
  std::vector<CandidateSegment> out;
  if (junctions.size() < 2) return out;
  out.reserve(junctions.size() * (junctions.size() - 1) / 2);
  for (std::size_t i = 0; i < junctions.size(); ++i) {
    for (std::size_t j = i + 1; j < junctions.size(); ++j) {
      Segment seg(junctions[i].position, junctions[j].position);
      const bool potential = is_potential(seg);
      out.push_back({seg, i, j, potential});
    }
  }
  return out;
}

std::vector<CandidateSegment> nss_filter(std::span<const CandidateSegment> cands) {
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> length(cands.size());
  for (std::size_t k = 0; k < cands.size(); ++k) length[k] = cands[k].segment.length();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return length[a] < length[b]; });

  std::size_t max_junction = 0;
  for (const auto& c : cands) max_junction = std::max({max_junction, c.i, c.j});
  std::vector<std::vector<std::size_t>> kept_at(cands.empty() ? 0 : max_junction + 1);
  std::vector<bool> keep(cands.size(), false);

  for (std::size_t idx : order) {
    const CandidateSegment& c = cands[idx];
    const double threshold = nss_threshold(c.segment);
    bool suppressed = false;
    for (std::size_t junction : {c.i, c.j}) {
      const Point shared = junction == c.i ? c.segment.a() : c.segment.b();
      for (std::size_t other : kept_at[junction]) {
        if (junction_angle(c.segment, cands[other].segment, shared) < threshold) {
          suppressed = true;
          break;
        }
      }
      if (suppressed) break;
    }
    if (suppressed) continue;
    keep[idx] = true;
    kept_at[c.i].push_back(idx);
    kept_at[c.j].push_back(idx);
  }

  std::vector<CandidateSegment> out;
  for (std::size_t k = 0; k < cands.size(); ++k) {
    if (keep[k]) out.push_back(cands[k]);
  }
  return out;
}

std::vector<CandidateSegment> nds_filter(std::span<const CandidateSegment> cands,
                                         std::span<const DetectedJunction> junctions) {
  std::vector<Point> positions;
  positions.reserve(junctions.size());
  for (const auto& j : junctions) positions.push_back(j.position);
  const std::vector<Point> hull = convex_hull(positions);

  // Junction index of each hull vertex; positions are unique so lookup by
  // coordinates is exact.
  std::vector<std::size_t> hull_ids;
  for (const Point& h : hull) {
    for (std::size_t k = 0; k < junctions.size(); ++k) {
      if (junctions[k].position == h) {
        hull_ids.push_back(k);
        break;
      }
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> hull_edges;
  if (hull_ids.size() >= 2) {
    for (std::size_t k = 0; k < hull_ids.size(); ++k) {
      const std::size_t a = hull_ids[k];
      const std::size_t b = hull_ids[(k + 1) % hull_ids.size()];
      if (a != b) hull_edges.insert(std::minmax(a, b));
    }
  }

  std::vector<CandidateSegment> out;
  for (const auto& c : cands) {
    if (c.potential || hull_edges.count(std::minmax(c.i, c.j))) out.push_back(c);
  }
  return out;
}

std::vector<CandidateSegment> suppress(Suppression mode, std::span<const CandidateSegment> cands,
                                       std::span<const DetectedJunction> junctions) {
  return mode == Suppression::nss ? nss_filter(cands) : nds_filter(cands, junctions);
}

CandidateGraph build_dual_graph(std::span<const CandidateSegment> kept) {
  CandidateGraph graph;
  graph.nodes.assign(kept.begin(), kept.end());

  std::size_t max_junction = 0;
  for (const auto& c : kept) max_junction = std::max({max_junction, c.i, c.j});
  std::vector<std::vector<std::size_t>> at(kept.empty() ? 0 : max_junction + 1);
  for (std::size_t n = 0; n < kept.size(); ++n) {
    at[kept[n].i].push_back(n);
    at[kept[n].j].push_back(n);
  }
  for (std::size_t junction = 0; junction < at.size(); ++junction) {
    const auto& members = at[junction];
    for (std::size_t p = 0; p < members.size(); ++p) {
      for (std::size_t q = p + 1; q < members.size(); ++q) {
        const std::size_t u = members[p];
        const std::size_t v = members[q];
        const auto& node = kept[u];
        const Point shared = node.i == junction ? node.segment.a() : node.segment.b();
        graph.edges.push_back({std::min(u, v), std::max(u, v), shared, junction});
      }
    }
  }
  std::sort(graph.edges.begin(), graph.edges.end(), [](const DualEdge& a, const DualEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  return graph;
}

}  // namespace glsp
