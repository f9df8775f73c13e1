#include "fprf/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fprf/error.hpp"
#include "fprf/image_io.hpp"
#include "json.hpp"

namespace fprf {

namespace fs = std::filesystem;
using nlohmann::json;

std::string view_name(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return buf;
}

bool is_holdout_view(size_t index) { return index % 8 == 7; }

bool SceneDataset::has_labels() const {
  for (const View& v : views)
    if (!v.labels) return false;
  return !views.empty();
}

bool SceneDataset::has_depth() const {
  for (const View& v : views)
    if (!v.depth) return false;
  return !views.empty();
}

void SceneDataset::validate() const {
  require(views.size() >= 2, ErrorKind::Data, "dataset needs at least 2 views, found " + std::to_string(views.size()));
  require((aabb.max.array() > aabb.min.array()).all(), ErrorKind::Data, "scene box is empty");
  const size_t h = height(), w = width();
  for (size_t i = 0; i < views.size(); ++i) {
    const View& v = views[i];
    const std::string tag = "view " + view_name(i) + ": ";
    require(v.image.rank() == 3 && v.image.dim(2) == 3, ErrorKind::Data, tag + "image must be RGB");
    require(v.image.dim(0) == h && v.image.dim(1) == w, ErrorKind::Data, tag + "image size differs from view 0000");
    require(v.camera.height == h && v.camera.width == w, ErrorKind::Data, tag + "camera size differs from the image");
    try {
      v.camera.validate();
    } catch (const Error& e) {
      fail(ErrorKind::Data, tag + e.what());
    }
    if (v.labels) require(v.labels->height == h && v.labels->width == w, ErrorKind::Data, tag + "label map size");
    if (v.depth) require(v.depth->shape() == std::vector<size_t>{h, w}, ErrorKind::Data, tag + "depth map size");
  }
}

namespace {

json camera_json(const CameraModel& c) {
  std::vector<double> m(16);
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) m[r * 4 + k] = c.camera_to_world(r, k);
  return {{"c2w", m},        {"fx", c.fx},         {"fy", c.fy},          {"cx", c.cx},     {"cy", c.cy},
          {"width", c.width}, {"height", c.height}, {"near", c.near}, {"far", c.far}};
}

CameraModel camera_from_json(const json& j) {
  CameraModel c;
  const std::vector<double> m = j.at("c2w").get<std::vector<double>>();
  require(m.size() == 16, ErrorKind::Data, "c2w must hold 16 numbers");
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) c.camera_to_world(r, k) = m[r * 4 + k];
  c.fx = j.at("fx");
  c.fy = j.at("fy");
  c.cx = j.at("cx");
  c.cy = j.at("cy");
  c.width = j.at("width");
  c.height = j.at("height");
  c.near = j.at("near");
  c.far = j.at("far");
  return c;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  require(in.good(), ErrorKind::Data, "cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::Data, p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  require(out.good(), ErrorKind::Data, "cannot write " + p.string());
}

}  // namespace

void save_dataset(const SceneDataset& dataset, const std::string& dir) {
  dataset.validate();
  const fs::path root(dir);
  fs::create_directories(root / "images");
  json frames = json::array();
  for (size_t i = 0; i < dataset.views.size(); ++i) {
    const View& v = dataset.views[i];
    const std::string name = view_name(i);
    write_png((root / "images" / (name + ".png")).string(), v.image);
    json f = camera_json(v.camera);
    f["file"] = "images/" + name + ".png";
    frames.push_back(f);
    if (v.depth) {
      fs::create_directories(root / "depth");
      save_fpt((root / "depth" / (name + ".fpt")).string(), *v.depth);
    }
    if (v.labels) {
      fs::create_directories(root / "semantic");
      std::vector<uint8_t> rgb(v.labels->ids.size() * 3, 0);
      for (size_t p = 0; p < v.labels->ids.size(); ++p) rgb[p * 3] = v.labels->ids[p];
      write_png_u8((root / "semantic" / (name + ".png")).string(), rgb, v.labels->height, v.labels->width);
    }
  }
  write_text(root / "poses.json", json{{"frames", frames}}.dump(2) + "\n");
  const json meta = {{"aabb",
                      {{"min", {dataset.aabb.min[0], dataset.aabb.min[1], dataset.aabb.min[2]}},
                       {"max", {dataset.aabb.max[0], dataset.aabb.max[1], dataset.aabb.max[2]}}}},
                     {"views", dataset.views.size()}};
  write_text(root / "meta.json", meta.dump(2) + "\n");
}

SceneDataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  require(fs::is_directory(root), ErrorKind::Data, "dataset directory not found: " + dir);
  SceneDataset ds;
  try {
    const json meta = read_json(root / "meta.json");
    const auto lo = meta.at("aabb").at("min").get<std::vector<double>>();
    const auto hi = meta.at("aabb").at("max").get<std::vector<double>>();
    require(lo.size() == 3 && hi.size() == 3, ErrorKind::Data, "meta.json aabb corners need 3 numbers");
    ds.aabb.min = Vec3(lo[0], lo[1], lo[2]);
    ds.aabb.max = Vec3(hi[0], hi[1], hi[2]);
    const json poses = read_json(root / "poses.json");
    const json& frames = poses.at("frames");
    for (size_t i = 0; i < frames.size(); ++i) {
      View v;
      v.camera = camera_from_json(frames[i]);
      const std::string name = view_name(i);
      const std::string file = frames[i].value("file", "images/" + name + ".png");
      v.image = read_png_rgb((root / file).string());
      const fs::path depth = root / "depth" / (name + ".fpt");
      if (fs::exists(depth)) v.depth = load_fpt(depth.string());
      const fs::path sem = root / "semantic" / (name + ".png");
      if (fs::exists(sem)) {
        LabelMap l;
        l.ids = read_png_channel(sem.string(), 0, l.height, l.width);
        v.labels = std::move(l);
      }
      ds.views.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Data, "malformed dataset metadata in " + dir + ": " + e.what());
  }
  ds.validate();
  return ds;
}

std::vector<std::string> validate_dataset_dir(const std::string& dir) {
  std::vector<std::string> problems;
  try {
    const SceneDataset ds = load_dataset(dir);
    for (size_t i = 0; i < ds.views.size(); ++i) {
      const View& v = ds.views[i];
      if (v.depth) {
        for (Real d : v.depth->vec()) {
          if (!(d >= 0.0) || !std::isfinite(d)) {
            problems.push_back("view " + view_name(i) + ": depth has negative or non-finite values");
            break;
          }
        }
      }
      for (Real x : v.image.vec()) {
        if (!(x >= 0.0 && x <= 1.0)) {
          problems.push_back("view " + view_name(i) + ": image values outside [0, 1]");
          break;
        }
      }
    }
  } catch (const Error& e) {
    problems.push_back(e.what());
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }
  return problems;
}

}  // namespace fprf
