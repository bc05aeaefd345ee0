#include "glsp/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace glsp {

namespace {

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Shared greedy matcher: `cost(p, g)` is the distance of prediction p to
// ground truth g.
template <typename Cost>
RankedMatches greedy_match(std::span<const double> scores, std::size_t num_gt, double theta, Cost&& cost) {
  RankedMatches out;
  out.num_gt = num_gt;
  std::vector<bool> taken(num_gt, false);
  for (std::size_t p : rank_by_score(scores)) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_g = num_gt;
    for (std::size_t g = 0; g < num_gt; ++g) {
      if (taken[g]) continue;
      const double d = cost(p, g);
      if (d <= theta && d < best) {
        best = d;
        best_g = g;
      }
    }
    if (best_g < num_gt) taken[best_g] = true;
    out.scores.push_back(scores[p]);
    out.true_positive.push_back(best_g < num_gt);
  }
  return out;
}

}  // namespace

void RankedMatches::merge(const RankedMatches& other) {
  std::vector<double> s = scores;
  s.insert(s.end(), other.scores.begin(), other.scores.end());
  std::vector<bool> tp = true_positive;
  tp.insert(tp.end(), other.true_positive.begin(), other.true_positive.end());
  const auto order = rank_by_score(s);
  scores.clear();
  true_positive.clear();
  for (std::size_t k : order) {
    scores.push_back(s[k]);
    true_positive.push_back(tp[k]);
  }
  num_gt += other.num_gt;
}

RankedMatches match_junctions(std::span<const DetectedJunction> pred, std::span<const Point> gt, double theta) {
  std::vector<double> scores;
  for (const auto& j : pred) scores.push_back(j.score);
  return greedy_match(scores, gt.size(), theta,
                      [&](std::size_t p, std::size_t g) { return squared_distance(pred[p].position, gt[g]); });
}

RankedMatches match_lines(std::span<const ScoredSegment> pred, std::span<const AnnotatedLine> gt, double theta,
                          std::optional<SegmentClass> cls) {
  std::vector<const ScoredSegment*> p;
  std::vector<const AnnotatedLine*> g;
  for (const auto& s : pred) {
    if (is_meaningful(s.cls) && (!cls || s.cls == *cls)) p.push_back(&s);
  }
  for (const auto& l : gt) {
    if (!cls || l.cls == *cls) g.push_back(&l);
  }
  std::vector<double> scores;
  for (const auto* s : p) scores.push_back(s->score);
  return greedy_match(scores, g.size(), theta, [&](std::size_t a, std::size_t b) {
    return structural_distance(p[a]->segment, g[b]->segment);
  });
}

double average_precision(const RankedMatches& m) {
  if (m.num_gt == 0 || m.scores.empty()) return 0.0;
  const std::size_t n = m.scores.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += m.true_positive[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(m.num_gt);
  }
  for (std::size_t k = n - 1; k-- > 0;) precision[k] = std::max(precision[k], precision[k + 1]);
  double ap = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ap += (recall[k] - prev) * precision[k];
    prev = recall[k];
  }
  return ap;
}

PrCurve pr_curve(const RankedMatches& m) {
  PrCurve curve;
  if (m.num_gt == 0) return curve;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < m.scores.size(); ++k) {
    tp += m.true_positive[k] ? 1 : 0;
    // One point per distinct threshold: tied scores enter together.
    if (k + 1 < m.scores.size() && m.scores[k + 1] == m.scores[k]) continue;
    curve.points.push_back({m.scores[k], static_cast<double>(tp) / static_cast<double>(m.num_gt),
                            static_cast<double>(tp) / static_cast<double>(k + 1)});
  }
  return curve;
}

double sap_junctions(std::span<const DetectedJunction> pred, std::span<const Point> gt, double theta) {
  return average_precision(match_junctions(pred, gt, theta));
}

double sap_lines(const PredictionSet& pred, std::span<const AnnotatedLine> gt, double theta,
                 std::optional<SegmentClass> cls) {
  return average_precision(match_lines(pred.segments, gt, theta, cls));
}

double msap(const PredictionSet& pred, std::span<const AnnotatedLine> gt, double theta) {
  double sum = 0.0;
  int present = 0;
  for (SegmentClass c : kMeaningfulClasses) {
    const RankedMatches m = match_lines(pred.segments, gt, theta, c);
    if (m.num_gt == 0) continue;
    sum += average_precision(m);
    ++present;
  }
  return present == 0 ? 0.0 : sum / present;
}

Evaluator::Evaluator(std::vector<double> junction_thresholds, std::vector<double> line_thresholds)
    : jt_(std::move(junction_thresholds)),
      lt_(std::move(line_thresholds)),
      junctions_(jt_.size()),
      lines_(lt_.size()) {}

void Evaluator::add(const PredictionSet& pred, const FloorPlanAnnotation& gt) {
  const std::vector<Point> gt_junctions = ground_truth_junctions(gt);
  for (std::size_t t = 0; t < jt_.size(); ++t) {
    junctions_[t].merge(match_junctions(pred.junctions, gt_junctions, jt_[t]));
  }
  for (std::size_t t = 0; t < lt_.size(); ++t) {
    lines_[t][0].merge(match_lines(pred.segments, gt.lines, lt_[t], std::nullopt));
    for (std::size_t c = 0; c < kMeaningfulClasses.size(); ++c) {
      lines_[t][c + 1].merge(match_lines(pred.segments, gt.lines, lt_[t], kMeaningfulClasses[c]));
    }
  }
  const RoomCount rooms = count_rooms(pred.segments);
  rooms_ += static_cast<double>(rooms.enclosed);
  rooms_with_door_ += static_cast<double>(rooms.with_door);
  ++images_;
}

EvalReport Evaluator::report() const {
  EvalReport r;
  r.junction_thresholds = jt_;
  r.line_thresholds = lt_;
  r.images = images_;
  for (const auto& m : junctions_) r.sap_j.push_back(average_precision(m));
  for (const auto& per_class : lines_) {
    r.sap_n.push_back(average_precision(per_class[0]));
    std::array<double, 3> aps{};
    double sum = 0.0;
    int present = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      aps[c] = average_precision(per_class[c + 1]);
      if (per_class[c + 1].num_gt > 0) {
        sum += aps[c];
        ++present;
      }
    }
    r.sap_class.push_back(aps);
    r.msap.push_back(present == 0 ? 0.0 : sum / present);
  }
  if (images_ > 0) {
    r.mean_rooms = rooms_ / static_cast<double>(images_);
    r.mean_rooms_with_door = rooms_with_door_ / static_cast<double>(images_);
  }
  return r;
}

PrCurve Evaluator::curve(double theta, std::optional<SegmentClass> cls) const {
  const auto it = std::find(lt_.begin(), lt_.end(), theta);
  if (it == lt_.end()) throw std::invalid_argument("no line threshold " + std::to_string(theta) + " in this evaluator");
  const auto& per_class = lines_[static_cast<std::size_t>(it - lt_.begin())];
  return pr_curve(per_class[cls ? static_cast<std::size_t>(class_index(*cls)) : 0]);
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "metric\tthreshold\tvalue\n";
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  for (std::size_t t = 0; t < r.junction_thresholds.size(); ++t) {
    out << "sAP_J\t" << num(r.junction_thresholds[t]) << '\t' << r.sap_j[t] << '\n';
  }
  for (std::size_t t = 0; t < r.line_thresholds.size(); ++t) {
    const std::string th = num(r.line_thresholds[t]);
    for (std::size_t c = 0; c < 3; ++c) {
      out << "sAP_" << to_string(kMeaningfulClasses[c]) << '\t' << th << '\t' << r.sap_class[t][c] << '\n';
    }
    out << "msAP\t" << th << '\t' << r.msap[t] << '\n';
    out << "sAP_N\t" << th << '\t' << r.sap_n[t] << '\n';
  }
  out << "N_r\t-\t" << r.mean_rooms << '\n';
  out << "N_R\t-\t" << r.mean_rooms_with_door << '\n';
  return out.str();
}

}  // namespace glsp
