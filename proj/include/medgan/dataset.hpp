#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "medgan/fft.hpp"
#include "medgan/motion.hpp"
#include "medgan/phantom.hpp"

// On-disk paired dataset: 16-bit binary PGM images plus a manifest.json.
// Head-like and pelvis-like samples get rigid corruption, abdomen-like ones
// non-rigid, mirroring how the two artifact families split across body
// regions. Per-sample seeds derive from the dataset seed, so the directory
// contents are a pure function of (config, seed).

namespace medgan {

// Binary PGM "P5", maxval 65535, big-endian samples; values quantized from [0,1].
void write_pgm16(const std::filesystem::path& path, const ImageD& img);
ImageD read_pgm16(const std::filesystem::path& path);

struct RegionCounts {
  int train = 0;
  int val = 0;
};

struct SynthConfig {
  int image_size = 64;
  std::uint64_t seed = 1;
  std::vector<std::string> regions{"head-like", "abdomen-like", "pelvis-like"};
  std::map<std::string, RegionCounts> counts;  // empty: filled via apply_total
  MotionParams motion;

  // Distributes train/val totals across the selected regions, earlier regions
  // taking the remainder. The desk default is 200/40 over three regions.
  void apply_total(int train_total, int val_total);
};

struct SampleRecord {
  int id = 0;
  std::string region;
  std::string split;       // "train" | "val"
  std::string corruption;  // "rigid" | "nonrigid"
  std::string clean_file;
  std::string corrupt_file;
};

struct DatasetManifest {
  int image_size = 64;
  std::uint64_t seed = 1;
  int train_count = 0;
  int val_count = 0;
  int rigid_train = 0;
  int rigid_val = 0;
  int nonrigid_train = 0;
  int nonrigid_val = 0;
  std::vector<std::string> classes;
  MotionParams motion;
  std::vector<SampleRecord> files;
};

std::string corruption_for(PhantomClass cls);

DatasetManifest build_dataset(const SynthConfig& config,
                              const std::filesystem::path& dir);

DatasetManifest load_manifest(const std::filesystem::path& dir);

struct PairedSample {
  int id = 0;
  PhantomClass region = PhantomClass::kHeadLike;
  ImageF clean;
  ImageF corrupt;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<PairedSample> train;
  std::vector<PairedSample> val;
};

// Reads every file listed in the manifest; a missing or unparseable file
// fails with the file named in the error.
Dataset load_dataset(const std::filesystem::path& dir);

ImageD corrupt_image(const ImageD& clean, const std::string& type,
                     const MotionParams& params);

}  // namespace medgan
