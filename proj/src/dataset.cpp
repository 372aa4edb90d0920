#include "medgan/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace medgan {

namespace fs = std::filesystem;
using nlohmann::json;

void write_pgm16(const fs::path& path, const ImageD& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  const int h = int(img.rows()), w = int(img.cols());
  out << "P5\n" << w << " " << h << "\n65535\n";
  std::vector<unsigned char> row(size_t(w) * 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = img(y, x);
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      const auto q = std::uint16_t(std::lround(v * 65535.0));
      row[size_t(x) * 2] = (unsigned char)(q >> 8);
      row[size_t(x) * 2 + 1] = (unsigned char)(q & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
  }
  if (!out) {
    throw IoError("short write to '" + path.string() + "'");
  }
}

namespace {

int next_pgm_token(std::istream& in, const std::string& file) {
  // whitespace-separated decimal token, '#' comments allowed
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    }
    c = in.get();
  }
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) {
    throw IoError("malformed PGM header in '" + file + "'");
  }
  return value;
}

}  // namespace

ImageD read_pgm16(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  char m0 = 0, m1 = 0;
  in.get(m0).get(m1);
  if (m0 != 'P' || m1 != '5') {
    throw IoError("'" + path.string() + "' is not a binary PGM");
  }
  const int w = next_pgm_token(in, path.string());
  const int h = next_pgm_token(in, path.string());
  const int maxval = next_pgm_token(in, path.string());
  if (maxval != 65535) {
    throw IoError("'" + path.string() + "' must have maxval 65535");
  }
  // next_pgm_token consumed the single whitespace after maxval
  ImageD img(h, w);
  std::vector<unsigned char> row(size_t(w) * 2);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size()));
    if (!in) {
      throw IoError("truncated pixel data in '" + path.string() + "'");
    }
    for (int x = 0; x < w; ++x) {
      const int q = (int(row[size_t(x) * 2]) << 8) | int(row[size_t(x) * 2 + 1]);
      img(y, x) = double(q) / 65535.0;
    }
  }
  return img;
}

void SynthConfig::apply_total(int train_total, int val_total) {
  counts.clear();
  const int r = int(regions.size());
  if (r == 0) {
    throw IoError("SynthConfig: no regions selected");
  }
  for (int i = 0; i < r; ++i) {
    RegionCounts rc;
    rc.train = train_total / r + (i < train_total % r ? 1 : 0);
    rc.val = val_total / r + (i < val_total % r ? 1 : 0);
    counts[regions[size_t(i)]] = rc;
  }
}

std::string corruption_for(PhantomClass cls) {
  return cls == PhantomClass::kAbdomenLike ? "nonrigid" : "rigid";
}

ImageD corrupt_image(const ImageD& clean, const std::string& type,
                     const MotionParams& params) {
  if (type == "rigid") return corrupt_rigid(clean, params);
  if (type == "nonrigid") return corrupt_nonrigid(clean, params);
  throw IoError("unknown corruption type '" + type + "'");
}

namespace {

json motion_to_json(const MotionParams& m) {
  return json{{"rigid",
               {{"segments", m.rigid.segments},
                {"max_translation", m.rigid.max_translation},
                {"max_rotation", m.rigid.max_rotation}}},
              {"nonrigid",
               {{"amplitude", m.nonrigid.amplitude},
                {"period", m.nonrigid.period},
                {"envelope_width", m.nonrigid.envelope_width}}}};
}

MotionParams motion_from_json(const json& j, const MotionParams& base) {
  MotionParams m = base;
  if (j.contains("rigid")) {
    const auto& r = j.at("rigid");
    m.rigid.segments = r.value("segments", m.rigid.segments);
    m.rigid.max_translation = r.value("max_translation", m.rigid.max_translation);
    m.rigid.max_rotation = r.value("max_rotation", m.rigid.max_rotation);
  }
  if (j.contains("nonrigid")) {
    const auto& n = j.at("nonrigid");
    m.nonrigid.amplitude = n.value("amplitude", m.nonrigid.amplitude);
    m.nonrigid.period = n.value("period", m.nonrigid.period);
    m.nonrigid.envelope_width = n.value("envelope_width", m.nonrigid.envelope_width);
  }
  return m;
}

std::string id_name(const char* prefix, int id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06d.pgm", prefix, id);
  return buf;
}

}  // namespace

DatasetManifest build_dataset(const SynthConfig& config, const fs::path& dir) {
  SynthConfig cfg = config;
  if (cfg.regions.empty()) {
    throw IoError("build_dataset: no regions selected");
  }
  if (cfg.counts.empty()) {
    cfg.apply_total(200, 40);
  }
  fs::create_directories(dir);

  DatasetManifest man;
  man.image_size = cfg.image_size;
  man.seed = cfg.seed;
  man.classes = cfg.regions;
  man.motion = cfg.motion;

  int id = 0;
  for (const char* split : {"train", "val"}) {
    for (const std::string& region : cfg.regions) {
      auto it = cfg.counts.find(region);
      if (it == cfg.counts.end()) {
        throw IoError("build_dataset: no counts for region '" + region + "'");
      }
      const int count = std::string(split) == "train" ? it->second.train : it->second.val;
      const PhantomClass cls = phantom_class_from(region);
      const std::string corruption = corruption_for(cls);
      for (int i = 0; i < count; ++i, ++id) {
        const ImageD clean =
            gen_phantom(cls, cfg.image_size, derive_seed(cfg.seed, std::uint64_t(2 * id)));
        MotionParams mp = cfg.motion;
        mp.seed = derive_seed(cfg.seed, std::uint64_t(2 * id + 1));
        const ImageD corrupt = corrupt_image(clean, corruption, mp);

        SampleRecord rec;
        rec.id = id;
        rec.region = region;
        rec.split = split;
        rec.corruption = corruption;
        rec.clean_file = id_name("clean", id);
        rec.corrupt_file = id_name("corrupt", id);
        write_pgm16(dir / rec.clean_file, clean);
        write_pgm16(dir / rec.corrupt_file, corrupt);
        man.files.push_back(std::move(rec));

        if (std::string(split) == "train") {
          ++man.train_count;
          (corruption == "rigid" ? man.rigid_train : man.nonrigid_train) += 1;
        } else {
          ++man.val_count;
          (corruption == "rigid" ? man.rigid_val : man.nonrigid_val) += 1;
        }
      }
    }
  }

  json j;
  j["format"] = "medgan-dataset";
  j["version"] = 1;
  j["image_size"] = man.image_size;
  j["seed"] = man.seed;
  j["counts"] = {{"train", man.train_count}, {"val", man.val_count}};
  j["type_counts"] = {{"rigid", {{"train", man.rigid_train}, {"val", man.rigid_val}}},
                      {"nonrigid",
                       {{"train", man.nonrigid_train}, {"val", man.nonrigid_val}}}};
  j["classes"] = man.classes;
  j["motion"] = motion_to_json(man.motion);
  j["files"] = json::array();
  for (const auto& r : man.files) {
    j["files"].push_back({{"id", r.id},
                          {"region", r.region},
                          {"split", r.split},
                          {"corruption", r.corruption},
                          {"clean", r.clean_file},
                          {"corrupt", r.corrupt_file}});
  }
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
  if (!out) {
    throw IoError("cannot write manifest to '" + (dir / "manifest.json").string() + "'");
  }
  return man;
}

DatasetManifest load_manifest(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  if (!in) {
    throw IoError("cannot open '" + mpath.string() + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest '" + mpath.string() + "': " + e.what());
  }
  if (j.value("format", "") != "medgan-dataset") {
    throw IoError("'" + mpath.string() + "' is not a dataset manifest");
  }

  DatasetManifest man;
  man.image_size = j.at("image_size").get<int>();
  man.seed = j.at("seed").get<std::uint64_t>();
  man.train_count = j.at("counts").at("train").get<int>();
  man.val_count = j.at("counts").at("val").get<int>();
  if (j.contains("type_counts")) {
    man.rigid_train = j["type_counts"]["rigid"].value("train", 0);
    man.rigid_val = j["type_counts"]["rigid"].value("val", 0);
    man.nonrigid_train = j["type_counts"]["nonrigid"].value("train", 0);
    man.nonrigid_val = j["type_counts"]["nonrigid"].value("val", 0);
  }
  man.classes = j.at("classes").get<std::vector<std::string>>();
  man.motion = motion_from_json(j.value("motion", json::object()), MotionParams{});
  for (const auto& f : j.at("files")) {
    SampleRecord r;
    r.id = f.at("id").get<int>();
    r.region = f.at("region").get<std::string>();
    r.split = f.at("split").get<std::string>();
    r.corruption = f.at("corruption").get<std::string>();
    r.clean_file = f.at("clean").get<std::string>();
    r.corrupt_file = f.at("corrupt").get<std::string>();
    man.files.push_back(std::move(r));
  }
  const int listed = int(man.files.size());
  if (listed != man.train_count + man.val_count) {
    throw IoError("manifest counts (" + std::to_string(man.train_count) + "+" +
                  std::to_string(man.val_count) + ") do not match file list length " +
                  std::to_string(listed));
  }
  return man;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  ds.manifest = load_manifest(dir);
  for (const auto& rec : ds.manifest.files) {
    PairedSample s;
    s.id = rec.id;
    s.region = phantom_class_from(rec.region);
    const ImageD clean = read_pgm16(dir / rec.clean_file);
    const ImageD corrupt = read_pgm16(dir / rec.corrupt_file);
    if (clean.rows() != ds.manifest.image_size || corrupt.rows() != ds.manifest.image_size ||
        clean.cols() != ds.manifest.image_size || corrupt.cols() != ds.manifest.image_size) {
      throw IoError("image size mismatch for sample id " + std::to_string(rec.id));
    }
    s.clean = clean.cast<float>();
    s.corrupt = corrupt.cast<float>();
    (rec.split == "train" ? ds.train : ds.val).push_back(std::move(s));
  }
  return ds;
}

}  // namespace medgan
