#include "superf/burst_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "superf/config.hpp"
#include "superf/png_io.hpp"

namespace fs = std::filesystem;

namespace superf {
namespace {

std::string indexed_name(const char* stem, int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d.png", stem, t);
  return buf;
}

Image mask_to_image(const Mask& m) {
  Image img(m.rows, m.cols, 1);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) img.at(i, j, 0) = m.at(i, j);
  }
  return img;
}

Mask image_to_mask(const Image& img) {
  Mask m(img.height(), img.width());
  for (int i = 0; i < img.height(); ++i) {
    for (int j = 0; j < img.width(); ++j) {
      m.values[static_cast<std::size_t>(i) * m.cols + j] = img.at(i, j, 0) > 0.5 ? 1 : 0;
    }
  }
  return m;
}

}  // namespace

void save_burst(const Burst& burst, const BurstSpec& spec, const fs::path& dir,
                const nlohmann::json& extra) {
  burst.validate();
  fs::create_directories(dir);
  nlohmann::json frames = nlohmann::json::array();
  for (int t = 0; t < burst.num_frames(); ++t) {
    const std::string name = indexed_name("frame", t);
    save_png(burst.frames[t], dir / name);
    nlohmann::json f{{"file", name}, {"transform", burst.truths[t]}};
    if (t < static_cast<int>(burst.records.size())) {
      const FrameRecord& r = burst.records[t];
      f["spectral_scale"] = r.spectral_scale;
      f["spectral_shift"] = r.spectral_shift;
      if (r.occlusion) {
        f["occlusion"] = {{"top", r.occlusion->top},
                          {"left", r.occlusion->left},
                          {"height", r.occlusion->height},
                          {"width", r.occlusion->width}};
      }
    }
    if (burst.masks) {
      const std::string mname = indexed_name("mask", t);
      save_png(mask_to_image((*burst.masks)[t]), dir / mname, BitDepth::k8);
      f["mask_file"] = mname;
    }
    frames.push_back(std::move(f));
  }
  nlohmann::json j{{"format", "superf-burst-v1"},
                   {"spec", spec},
                   {"scale", burst.scale},
                   {"num_frames", burst.num_frames()},
                   {"lr_height", burst.lr_height()},
                   {"lr_width", burst.lr_width()},
                   {"channels", burst.channels()},
                   {"transform_units", "dx, dy in LR pixels; alpha_deg in degrees"},
                   {"frames", std::move(frames)}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  std::ofstream out(dir / "burst.json");
  if (!out) throw IoError("cannot write " + (dir / "burst.json").string());
  out << j.dump(2) << '\n';
}

LoadedBurst load_burst(const fs::path& dir, int fallback_scale) {
  if (!fs::is_directory(dir)) throw IoError("burst directory not found: " + dir.string());
  LoadedBurst out;
  const fs::path sidecar = dir / "burst.json";
  if (!fs::exists(sidecar)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string n = e.path().filename().string();
      if (n.rfind("frame_", 0) == 0 && e.path().extension() == ".png") files.push_back(e.path());
    }
    if (files.empty()) throw IoError("no frame_*.png files in " + dir.string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.burst.frames.push_back(load_png(f));
    out.burst.truths.assign(files.size(), FrameTransform{});
    out.burst.scale = fallback_scale;
    out.burst.validate();
    return out;
  }

  std::ifstream in(sidecar);
  try {
    out.sidecar = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("malformed " + sidecar.string() + ": " + e.what());
  }
  const nlohmann::json& j = out.sidecar;
  try {
    if (j.contains("spec")) out.spec = j.at("spec").get<BurstSpec>();
    out.burst.scale = j.at("scale").get<int>();
    bool any_mask = false;
    std::vector<Mask> masks;
    for (const auto& f : j.at("frames")) {
      out.burst.frames.push_back(load_png(dir / f.at("file").get<std::string>()));
      out.burst.truths.push_back(f.value("transform", FrameTransform{}));
      FrameRecord r;
      r.spectral_scale = f.value("spectral_scale", std::vector<double>{});
      r.spectral_shift = f.value("spectral_shift", std::vector<double>{});
      if (f.contains("occlusion")) {
        const auto& o = f.at("occlusion");
        r.occlusion = Rect{o.at("top").get<int>(), o.at("left").get<int>(),
                           o.at("height").get<int>(), o.at("width").get<int>()};
      }
      out.burst.records.push_back(std::move(r));
      if (f.contains("mask_file")) {
        any_mask = true;
        masks.push_back(image_to_mask(load_png(dir / f.at("mask_file").get<std::string>())));
      } else {
        const Image& fr = out.burst.frames.back();
        masks.emplace_back(fr.height(), fr.width());
      }
    }
    if (any_mask) out.burst.masks = std::move(masks);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid " + sidecar.string() + ": " + e.what());
  }
  out.burst.validate();
  return out;
}

}  // namespace superf
