#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hol/data.hpp"

namespace hol {

// How the labelled pool is divided into a training and a test set.
//
// train_precise >= 0 draws that many precise samples into training and sends
// every interval sample there too (the test set then holds the remaining
// precise samples). Otherwise train_size samples are drawn uniformly and
// test_size (or the rest, when negative) form the test set.
struct SplitSpec {
  int train_size = -1;
  int test_size = -1;
  int train_precise = -1;
};

struct DatasetManifest {
  std::string name;
  std::filesystem::path source;  // resolved against the manifest's directory
  std::vector<std::string> feature_columns;
  std::vector<std::string> categorical_columns;  // one-hot encoded, categories sorted
  std::string target_column;
  std::vector<std::string> target_levels;  // maps a string target to 1..levels.size()
  BinningSpec binning;
  int num_classes = 0;
  bool drop_incomplete_rows = false;
  SplitSpec split;
  bool simulate = false;
  SimulationParams simulation;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest manifest_from_json_text(const std::string& text, const std::filesystem::path& base_dir);

// Finds <dir>/<name>.json; throws ValidationError listing the available names.
std::filesystem::path find_manifest(const std::string& name, const std::filesystem::path& dir);
std::vector<std::string> available_manifests(const std::filesystem::path& dir);

// Directory holding the manifests shipped with the project.
std::filesystem::path default_manifest_dir();

// Reads the source file, encodes features and bins the target. Samples that
// bin to no class are dropped.
OrdinalDataset load_manifest_dataset(const DatasetManifest& manifest);

struct TrainTestSplit {
  OrdinalDataset train;
  OrdinalDataset test;
};

// Seeded split, followed by interval simulation on the training part when the
// manifest asks for it. Only precise samples are kept in the test set.
TrainTestSplit make_split(const OrdinalDataset& pool, const DatasetManifest& manifest, std::uint64_t seed);

}  // namespace hol
