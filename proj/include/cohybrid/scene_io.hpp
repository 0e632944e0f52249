#pragma once

// Scene files: UTF-8 JSON with COCO-like field names.
//
// {
//   "num_classes": 80,                       // optional
//   "images": [{
//     "id": 1, "width": 640, "height": 480,
//     "objects": [{"label": 3, "bbox": [x1, y1, x2, y2]}],
//     "proposals": [[x1, y1, x2, y2], ...],                    // optional
//     "predictions": [{"scores": [...], "bbox": [cx, cy, w, h]}], // optional, normalized
//     "feature_norms": [{"level": 1, "height": 60, "width": 80, "values": [...]}]  // optional
//   }]
// }

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cohybrid/assigners.hpp"
#include "cohybrid/error.hpp"
#include "cohybrid/geometry.hpp"
#include "cohybrid/matcher.hpp"
#include "cohybrid/priors.hpp"

namespace cohybrid {

using json = nlohmann::json;

struct SceneImage {
  json id;
  int width = 0;
  int height = 0;
  std::vector<GtObject> objects;
  std::optional<std::vector<Box>> proposals;
  std::optional<std::vector<QueryPrediction>> predictions;
  std::vector<ScalarMap> feature_norms;

  [[nodiscard]] std::string id_text() const { return id.is_string() ? id.get<std::string>() : id.dump(); }

  [[nodiscard]] GroundTruth ground_truth(int num_classes) const {
    return {objects, width, height, num_classes};
  }
};

struct SceneFile {
  int num_classes = 1;
  std::vector<SceneImage> images;
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& image, const std::string& field,
                                      const std::string& what) {
  throw ValidationError("image " + image + ": field '" + field + "' " + what);
}

inline const json& require(const json& obj, const char* key, const std::string& image) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(image, key, "is missing");
  return obj.at(key);
}

inline double number(const json& v, const std::string& image, const std::string& field) {
  if (!v.is_number()) schema_error(image, field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(image, field, "must be finite");
  return x;
}

inline int integer(const json& v, const std::string& image, const std::string& field) {
  if (!v.is_number_integer()) schema_error(image, field, "must be an integer");
  return v.get<int>();
}

inline std::array<double, 4> quad(const json& v, const std::string& image,
                                  const std::string& field) {
  if (!v.is_array() || v.size() != 4) schema_error(image, field, "must be an array of 4 numbers");
  return {number(v[0], image, field), number(v[1], image, field), number(v[2], image, field),
          number(v[3], image, field)};
}

inline Box corner_box(const json& v, const std::string& image, const std::string& field) {
  const auto q = quad(v, image, field);
  const Box b{q[0], q[1], q[2], q[3]};
  if (!is_valid(b)) throw ValidationError("image " + image + ": invalid box " + to_string(b) + " in '" + field + "'");
  return b;
}

}  // namespace detail

[[nodiscard]] inline SceneFile parse_scene(const json& doc) {
  using detail::schema_error;
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array())
    throw ValidationError("scene file: top-level 'images' array is missing");

  SceneFile scene;
  std::optional<int> declared_classes;
  if (doc.contains("num_classes")) {
    declared_classes = detail::integer(doc["num_classes"], "<file>", "num_classes");
    if (*declared_classes < 1) schema_error("<file>", "num_classes", "must be >= 1");
  }

  int max_label = -1;
  std::optional<std::size_t> score_len;
  for (std::size_t idx = 0; idx < doc["images"].size(); ++idx) {
    const json& im = doc["images"][idx];
    SceneImage s;
    s.id = im.is_object() && im.contains("id") ? im["id"] : json(idx);
    const std::string name = s.id_text();
    if (!im.is_object()) schema_error(name, "images[" + std::to_string(idx) + "]", "must be an object");
    s.width = detail::integer(detail::require(im, "width", name), name, "width");
    s.height = detail::integer(detail::require(im, "height", name), name, "height");
    if (s.width <= 0) schema_error(name, "width", "must be positive");
    if (s.height <= 0) schema_error(name, "height", "must be positive");

    const json& objs = detail::require(im, "objects", name);
    if (!objs.is_array()) schema_error(name, "objects", "must be an array");
    for (std::size_t k = 0; k < objs.size(); ++k) {
      const std::string f = "objects[" + std::to_string(k) + "]";
      GtObject o;
      o.label = detail::integer(detail::require(objs[k], "label", name), name, f + ".label");
      if (o.label < 0) schema_error(name, f + ".label", "must be nonnegative");
      o.box = detail::corner_box(detail::require(objs[k], "bbox", name), name, f + ".bbox");
      max_label = std::max(max_label, o.label);
      s.objects.push_back(o);
    }

    if (im.contains("proposals")) {
      const json& props = im["proposals"];
      if (!props.is_array()) schema_error(name, "proposals", "must be an array");
      std::vector<Box> boxes;
      for (std::size_t k = 0; k < props.size(); ++k)
        boxes.push_back(detail::corner_box(props[k], name, "proposals[" + std::to_string(k) + "]"));
      s.proposals = std::move(boxes);
    }

    if (im.contains("predictions")) {
      const json& preds = im["predictions"];
      if (!preds.is_array()) schema_error(name, "predictions", "must be an array");
      std::vector<QueryPrediction> out;
      for (std::size_t k = 0; k < preds.size(); ++k) {
        const std::string f = "predictions[" + std::to_string(k) + "]";
        QueryPrediction q;
        const json& sc = detail::require(preds[k], "scores", name);
        if (!sc.is_array() || sc.empty()) schema_error(name, f + ".scores", "must be a nonempty array");
        for (const auto& v : sc) {
          const double p = detail::number(v, name, f + ".scores");
          if (p < 0.0 || p > 1.0) schema_error(name, f + ".scores", "must lie in [0, 1]");
          q.class_scores.push_back(p);
        }
        if (score_len && *score_len != q.class_scores.size())
          schema_error(name, f + ".scores", "length differs from other predictions");
        score_len = q.class_scores.size();
        const auto b = detail::quad(detail::require(preds[k], "bbox", name), name, f + ".bbox");
        q.box = {b[0], b[1], b[2], b[3]};
        if (q.box.w < 0.0 || q.box.h < 0.0) schema_error(name, f + ".bbox", "has negative size");
        out.push_back(std::move(q));
      }
      s.predictions = std::move(out);
    }

    if (im.contains("feature_norms")) {
      const json& fns = im["feature_norms"];
      if (!fns.is_array()) schema_error(name, "feature_norms", "must be an array");
      for (std::size_t k = 0; k < fns.size(); ++k) {
        const std::string f = "feature_norms[" + std::to_string(k) + "]";
        const int level = detail::integer(detail::require(fns[k], "level", name), name, f + ".level");
        const int h = detail::integer(detail::require(fns[k], "height", name), name, f + ".height");
        const int w = detail::integer(detail::require(fns[k], "width", name), name, f + ".width");
        if (level < 1 || level > kMaxPyramidLevels) schema_error(name, f + ".level", "out of range");
        const int stride = level_stride(level);
        if (h != (s.height + stride - 1) / stride || w != (s.width + stride - 1) / stride)
          schema_error(name, f, "grid " + std::to_string(h) + "x" + std::to_string(w) +
                                    " does not match level " + std::to_string(level) +
                                    " of the image pyramid");
        const json& vals = detail::require(fns[k], "values", name);
        if (!vals.is_array()) schema_error(name, f + ".values", "must be an array");
        std::vector<double> v;
        v.reserve(vals.size());
        for (const auto& x : vals) {
          const double d = detail::number(x, name, f + ".values");
          if (d < 0.0) schema_error(name, f + ".values", "must be nonnegative");
          v.push_back(d);
        }
        if (v.size() != static_cast<std::size_t>(h) * static_cast<std::size_t>(w))
          schema_error(name, f + ".values", "has " + std::to_string(v.size()) + " entries, expected " +
                                                std::to_string(h * w));
        s.feature_norms.emplace_back(level, h, w, std::move(v));
      }
    }
    scene.images.push_back(std::move(s));
  }

  if (declared_classes) {
    scene.num_classes = *declared_classes;
  } else if (score_len) {
    scene.num_classes = static_cast<int>(*score_len);
  } else {
    scene.num_classes = std::max(1, max_label + 1);
  }
  if (score_len && *score_len != static_cast<std::size_t>(scene.num_classes))
    throw ValidationError("scene file: prediction score length " + std::to_string(*score_len) +
                          " differs from num_classes " + std::to_string(scene.num_classes));
  for (const auto& im : scene.images)
    for (std::size_t k = 0; k < im.objects.size(); ++k)
      if (im.objects[k].label >= scene.num_classes)
        detail::schema_error(im.id_text(), "objects[" + std::to_string(k) + "].label",
                             "exceeds num_classes");
  return scene;
}

[[nodiscard]] inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

[[nodiscard]] inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + ": malformed JSON: " + e.what());
  }
}

[[nodiscard]] inline SceneFile load_scene(const std::filesystem::path& path) {
  return parse_scene(parse_json_text(read_text_file(path), path.string()));
}

// Inverse of parse_scene, used for round-trip checks and synthetic corpora.
[[nodiscard]] inline json scene_to_json(const SceneFile& scene) {
  json doc;
  doc["num_classes"] = scene.num_classes;
  doc["images"] = json::array();
  for (const auto& im : scene.images) {
    json j;
    j["id"] = im.id;
    j["width"] = im.width;
    j["height"] = im.height;
    j["objects"] = json::array();
    for (const auto& o : im.objects)
      j["objects"].push_back({{"label", o.label}, {"bbox", {o.box.x1, o.box.y1, o.box.x2, o.box.y2}}});
    if (im.proposals) {
      j["proposals"] = json::array();
      for (const auto& b : *im.proposals) j["proposals"].push_back({b.x1, b.y1, b.x2, b.y2});
    }
    if (im.predictions) {
      j["predictions"] = json::array();
      for (const auto& q : *im.predictions)
        j["predictions"].push_back(
            {{"scores", q.class_scores}, {"bbox", {q.box.cx, q.box.cy, q.box.w, q.box.h}}});
    }
    if (!im.feature_norms.empty()) {
      j["feature_norms"] = json::array();
      for (const auto& f : im.feature_norms)
        j["feature_norms"].push_back(
            {{"level", f.level}, {"height", f.height}, {"width", f.width}, {"values", f.values}});
    }
    doc["images"].push_back(std::move(j));
  }
  return doc;
}

}  // namespace cohybrid
