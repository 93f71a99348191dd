#include "hol/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hol/error.hpp"
#include "hol/rng.hpp"

#ifndef HOL_MANIFEST_DIR
#define HOL_MANIFEST_DIR "manifests"
#endif

namespace hol {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& item : object.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; }))
      throw ValidationError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& object, const char* key, T fallback) {
  const auto it = object.find(key);
  return it == object.end() ? fallback : it->get<T>();
}

LabelInterval interval_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("interval must be a [lo, hi] pair");
  return {j[0].get<int>(), j[1].get<int>()};
}

bool is_missing(const std::string& cell) {
  std::string t;
  for (char c : cell)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  return t.empty() || t == "?" || t == "NA" || t == "NaN" || t == "nan";
}

double to_number(const std::string& cell, const std::string& column, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (used == cell.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("non-numeric value '" + cell + "' in column '" + column + "' at row " + std::to_string(row));
}

}  // namespace

DatasetManifest manifest_from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("manifest must be a JSON object");
  reject_unknown_keys(doc,
                      {"name", "source", "features", "categorical", "target", "target_levels", "binning",
                       "num_classes", "drop_incomplete_rows", "split", "simulate", "simulation", "notes"},
                      "manifest");
  DatasetManifest m;
  try {
    m.name = doc.at("name").get<std::string>();
    m.source = base_dir / doc.at("source").get<std::string>();
    m.feature_columns = doc.at("features").get<std::vector<std::string>>();
    m.categorical_columns = get_or(doc, "categorical", std::vector<std::string>{});
    m.target_column = doc.at("target").get<std::string>();
    m.target_levels = get_or(doc, "target_levels", std::vector<std::string>{});
    m.num_classes = doc.at("num_classes").get<int>();
    m.drop_incomplete_rows = get_or(doc, "drop_incomplete_rows", false);
    m.simulate = get_or(doc, "simulate", false);

    if (const auto it = doc.find("binning"); it != doc.end()) {
      reject_unknown_keys(*it, {"classes", "ambiguous"}, "binning");
      for (const auto& c : it->at("classes")) {
        reject_unknown_keys(c, {"range", "class"}, "binning class");
        m.binning.class_ranges.push_back({NumericRange::parse(c.at("range").get<std::string>()), c.at("class").get<int>()});
      }
      for (const auto& a : get_or(*it, "ambiguous", json::array())) {
        reject_unknown_keys(a, {"range", "interval"}, "binning ambiguous range");
        m.binning.ambiguous_ranges.push_back(
            {NumericRange::parse(a.at("range").get<std::string>()), interval_from_json(a.at("interval"))});
      }
    }
    if (const auto it = doc.find("split"); it != doc.end()) {
      reject_unknown_keys(*it, {"train_size", "test_size", "train_precise"}, "split");
      m.split.train_size = get_or(*it, "train_size", -1);
      m.split.test_size = get_or(*it, "test_size", -1);
      m.split.train_precise = get_or(*it, "train_precise", -1);
    }
    if (const auto it = doc.find("simulation"); it != doc.end()) {
      reject_unknown_keys(*it, {"sigma", "window_offset"}, "simulation");
      m.simulation.sigma = get_or(*it, "sigma", 1.0);
      m.simulation.window_offset = get_or(*it, "window_offset", 0.0);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad manifest field: ") + e.what());
  }

  if (m.num_classes < 2) throw ValidationError("manifest num_classes must be at least 2");
  if (m.target_levels.empty() == m.binning.class_ranges.empty())
    throw ValidationError("manifest needs exactly one of binning or target_levels");
  if (!m.target_levels.empty() && static_cast<int>(m.target_levels.size()) != m.num_classes)
    throw ValidationError("target_levels must list num_classes entries");
  m.binning.validate();
  for (const auto& c : m.binning.class_ranges)
    if (c.class_index > m.num_classes) throw ValidationError("binning class exceeds num_classes");
  for (const auto& a : m.binning.ambiguous_ranges)
    if (a.interval.lo < 1 || a.interval.hi > m.num_classes)
      throw ValidationError("ambiguous interval outside [1, num_classes]");
  for (const auto& c : m.categorical_columns)
    if (std::find(m.feature_columns.begin(), m.feature_columns.end(), c) == m.feature_columns.end())
      throw ValidationError("categorical column '" + c + "' is not listed in features");
  if (m.split.train_precise < 0 && m.split.train_size <= 0)
    throw ValidationError("split needs train_size or train_precise");
  m.simulation.validate();
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json_text(buffer.str(), path.parent_path());
}

std::vector<std::string> available_manifests(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::filesystem::path find_manifest(const std::string& name, const std::filesystem::path& dir) {
  const auto path = dir / (name + ".json");
  if (std::filesystem::is_regular_file(path)) return path;
  std::string list;
  for (const auto& n : available_manifests(dir)) list += (list.empty() ? "" : ", ") + n;
  throw ValidationError("unknown manifest '" + name + "'; available: " + (list.empty() ? "(none)" : list));
}

std::filesystem::path default_manifest_dir() {
  if (const char* env = std::getenv("HOL_MANIFEST_DIR"); env != nullptr && *env != '\0') return env;
  return HOL_MANIFEST_DIR;
}

OrdinalDataset load_manifest_dataset(const DatasetManifest& manifest) {
  if (!std::filesystem::is_regular_file(manifest.source))
    throw ValidationError("dataset file missing: " + manifest.source.string());
  const CsvTable table = read_csv(manifest.source);

  auto column = [&](const std::string& name) {
    const int c = table.column(name);
    if (c < 0) throw ValidationError("missing column '" + name + "' in " + manifest.source.string());
    return static_cast<std::size_t>(c);
  };
  const std::size_t target = column(manifest.target_column);
  std::vector<std::size_t> feature_cols;
  for (const auto& f : manifest.feature_columns) feature_cols.push_back(column(f));

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    bool complete = !is_missing(row[target]);
    for (auto c : feature_cols) complete = complete && !is_missing(row[c]);
    if (complete) {
      rows.push_back(r);
    } else if (!manifest.drop_incomplete_rows) {
      throw ValidationError("missing value at row " + std::to_string(r + 1) + " of " + manifest.source.string());
    }
  }

  // Sorted category levels for each categorical column.
  std::map<std::string, std::vector<std::string>> levels;
  for (const auto& name : manifest.categorical_columns) {
    std::set<std::string> seen;
    const auto c = column(name);
    for (auto r : rows) seen.insert(table.rows[r][c]);
    levels[name].assign(seen.begin(), seen.end());
  }

  std::vector<std::string> names;
  for (const auto& f : manifest.feature_columns) {
    if (const auto it = levels.find(f); it != levels.end()) {
      for (const auto& level : it->second) names.push_back(f + "=" + level);
    } else {
      names.push_back(f);
    }
  }

  std::vector<std::optional<LabelInterval>> labels;
  if (!manifest.target_levels.empty()) {
    for (auto r : rows) {
      const auto& cell = table.rows[r][target];
      const auto it = std::find(manifest.target_levels.begin(), manifest.target_levels.end(), cell);
      if (it == manifest.target_levels.end())
        throw ValidationError("unknown target level '" + cell + "' at row " + std::to_string(r + 1));
      labels.emplace_back(LabelInterval::precise(static_cast<int>(it - manifest.target_levels.begin()) + 1));
    }
  } else {
    std::vector<double> values;
    for (auto r : rows) values.push_back(to_number(table.rows[r][target], manifest.target_column, r + 1));
    labels = bin_numeric_target(values, manifest.binning).labels;
  }

  OrdinalDataset out;
  out.num_classes = manifest.num_classes;
  out.feature_names = names;
  std::vector<std::vector<double>> kept;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (!labels[s]) continue;
    const auto& row = table.rows[rows[s]];
    std::vector<double> x;
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const auto& name = manifest.feature_columns[f];
      const auto& cell = row[feature_cols[f]];
      if (const auto it = levels.find(name); it != levels.end()) {
        for (const auto& level : it->second) x.push_back(cell == level ? 1.0 : 0.0);
      } else {
        x.push_back(to_number(cell, name, rows[s] + 1));
      }
    }
    kept.push_back(std::move(x));
    out.labels.push_back(*labels[s]);
  }
  out.features.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j)
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kept[i][j];
  out.validate();
  return out;
}

TrainTestSplit make_split(const OrdinalDataset& pool, const DatasetManifest& manifest, std::uint64_t seed) {
  const auto& spec = manifest.split;
  auto rng = make_rng(seed, Stream::split);
  std::vector<int> train, test;
  if (spec.train_precise >= 0) {
    std::vector<int> precise;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool.labels[i].is_precise()) precise.push_back(static_cast<int>(i));
      else train.push_back(static_cast<int>(i));
    }
    if (static_cast<std::size_t>(spec.train_precise) > precise.size())
      throw ValidationError("split asks for " + std::to_string(spec.train_precise) + " precise training samples but only " +
                            std::to_string(precise.size()) + " exist");
    shuffle_range(precise.begin(), precise.end(), rng);
    const auto cut = static_cast<std::size_t>(spec.train_precise);
    train.insert(train.end(), precise.begin(), precise.begin() + static_cast<std::ptrdiff_t>(cut));
    const std::size_t end = spec.test_size >= 0 ? std::min(precise.size(), cut + static_cast<std::size_t>(spec.test_size))
                                                : precise.size();
    test.assign(precise.begin() + static_cast<std::ptrdiff_t>(cut), precise.begin() + static_cast<std::ptrdiff_t>(end));
  } else {
    std::vector<int> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    const auto cut = static_cast<std::size_t>(spec.train_size);
    if (cut >= order.size())
      throw ValidationError("split train size " + std::to_string(cut) + " leaves no test samples out of " +
                            std::to_string(order.size()));
    shuffle_range(order.begin(), order.end(), rng);
    train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    const std::size_t end = spec.test_size >= 0 ? std::min(order.size(), cut + static_cast<std::size_t>(spec.test_size))
                                                : order.size();
    for (std::size_t i = cut; i < end; ++i)
      if (pool.labels[static_cast<std::size_t>(order[i])].is_precise()) test.push_back(order[i]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  TrainTestSplit split{pool.subset(train), pool.subset(test)};
  if (manifest.simulate) {
    SimulationParams params = manifest.simulation;
    params.seed = seed;
    split.train = simulate_intervals(split.train, params);
  }
  return split;
}

}  // namespace hol
