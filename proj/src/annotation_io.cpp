#include <fstream>
#include <sstream>

#include "glsp/synthgen.hpp"
#include "json.hpp"

namespace glsp {

namespace {

using nlohmann::json;
using Kind = AnnotationError::Kind;

json point_json(Point p) { return json::array({p.x, p.y}); }

Point parse_point(const json& j, const Canvas& canvas, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw AnnotationError(Kind::malformed, std::string(what) + ": expected [x, y]");
  }
  const Point p{j[0].get<double>(), j[1].get<double>()};
  if (!canvas.contains(p)) {
    std::ostringstream msg;
    msg << what << ": coordinate (" << p.x << ", " << p.y << ") outside canvas " << canvas.width
        << "x" << canvas.height;
    throw AnnotationError(Kind::out_of_canvas, msg.str());
  }
  return p;
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw AnnotationError(Kind::malformed, std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw AnnotationError(Kind::malformed, std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

}  // namespace

std::string annotation_to_string(const FloorPlanAnnotation& plan) {
  json doc;
  doc["scale"] = plan.scale;
  doc["canvas"] = json::array({plan.canvas.width, plan.canvas.height});
  doc["lines"] = json::array();
  for (const AnnotatedLine& line : plan.lines) {
    doc["lines"].push_back({{"a", point_json(line.segment.a())},
                            {"b", point_json(line.segment.b())},
                            {"thickness", line.thickness},
                            {"class", std::string(to_string(line.cls))}});
  }
  doc["rooms"] = json::array();
  for (const Room& room : plan.rooms) {
    json contour = json::array();
    for (const Point& p : room.contour) contour.push_back(point_json(p));
    doc["rooms"].push_back({{"category", room.category}, {"contour", contour}});
  }
  return doc.dump(1) + "\n";
}

FloorPlanAnnotation annotation_from_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw AnnotationError(Kind::malformed, std::string("malformed annotation: ") + e.what());
  }
  FloorPlanAnnotation plan;
  plan.scale = number(doc, "scale");
  if (!(plan.scale > 0.0)) throw AnnotationError(Kind::malformed, "scale must be positive");

  const json& canvas = field(doc, "canvas");
  if (!canvas.is_array() || canvas.size() != 2 || !canvas[0].is_number_integer() ||
      !canvas[1].is_number_integer()) {
    throw AnnotationError(Kind::malformed, "canvas: expected [width, height]");
  }
  plan.canvas = {canvas[0].get<int>(), canvas[1].get<int>()};
  if (plan.canvas.width <= 0 || plan.canvas.height <= 0) {
    throw AnnotationError(Kind::malformed, "canvas must be positive");
  }

  const json& lines = field(doc, "lines");
  if (!lines.is_array()) throw AnnotationError(Kind::malformed, "lines: expected an array");
  for (const json& l : lines) {
    const json& cls = field(l, "class");
    if (!cls.is_string()) throw AnnotationError(Kind::malformed, "class: expected a string");
    const auto token = cls.get<std::string>();
    const auto parsed = parse_segment_class(token);
    if (!parsed || *parsed == SegmentClass::null) {
      throw AnnotationError(Kind::unknown_class, "unknown line class \"" + token + "\"");
    }
    const Point a = parse_point(field(l, "a"), plan.canvas, "line endpoint a");
    const Point b = parse_point(field(l, "b"), plan.canvas, "line endpoint b");
    if (a == b) throw AnnotationError(Kind::malformed, "zero-length line");
    const double thickness = number(l, "thickness");
    if (!(thickness > 0.0)) throw AnnotationError(Kind::malformed, "thickness must be positive");
    plan.lines.push_back({Segment(a, b), thickness, *parsed});
  }

  const json& rooms = field(doc, "rooms");
  if (!rooms.is_array()) throw AnnotationError(Kind::malformed, "rooms: expected an array");
  for (const json& r : rooms) {
    const json& cat = field(r, "category");
    if (!cat.is_string()) throw AnnotationError(Kind::malformed, "category: expected a string");
    Room room{cat.get<std::string>(), {}};
    const json& contour = field(r, "contour");
    if (!contour.is_array()) throw AnnotationError(Kind::malformed, "contour: expected an array");
    for (const json& p : contour) room.contour.push_back(parse_point(p, plan.canvas, "room contour"));
    plan.rooms.push_back(std::move(room));
  }
  return plan;
}

void save_annotation(const std::filesystem::path& path, const FloorPlanAnnotation& plan) {
  std::ofstream out(path);
  if (!out) throw AnnotationError(Kind::io, "cannot open " + path.string() + " for writing");
  out << annotation_to_string(plan);
  if (!out) throw AnnotationError(Kind::io, "failed writing " + path.string());
}

FloorPlanAnnotation load_annotation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AnnotationError(Kind::io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return annotation_from_string(buf.str());
}

}  // namespace glsp
