#include "hol/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hol/error.hpp"
#include "hol/rng.hpp"

namespace hol {

std::size_t OrdinalDataset::count_precise() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const LabelInterval& l) { return l.is_precise(); }));
}

void OrdinalDataset::validate() const {
  if (num_classes < 2) throw ValidationError("K must be at least 2, got " + std::to_string(num_classes));
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw ValidationError("feature rows (" + std::to_string(features.rows()) + ") and labels (" +
                          std::to_string(labels.size()) + ") differ");
  if (!group_ids.empty() && group_ids.size() != labels.size())
    throw ValidationError("group ids must have one entry per sample");
  if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(features.cols()))
    throw ValidationError("feature names must have one entry per column");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    if (l.lo > l.hi)
      throw ValidationError("lo > hi at sample " + std::to_string(i + 1));
    if (l.lo < 1 || l.hi > num_classes)
      throw ValidationError("label outside [1, " + std::to_string(num_classes) + "] at sample " +
                            std::to_string(i + 1));
  }
  if (!features.allFinite()) throw ValidationError("features contain NaN or Inf");
}

OrdinalDataset OrdinalDataset::subset(std::span<const int> indices) const {
  OrdinalDataset out;
  out.num_classes = num_classes;
  out.feature_names = feature_names;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  if (!group_ids.empty()) out.group_ids.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int i = indices[r];
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(i);
    out.labels.push_back(labels[static_cast<std::size_t>(i)]);
    if (!group_ids.empty()) out.group_ids.push_back(group_ids[static_cast<std::size_t>(i)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binning

bool NumericRange::contains(double v) const {
  const bool above = lower_inclusive ? v >= lower : v > lower;
  const bool below = upper_inclusive ? v <= upper : v < upper;
  return above && below;
}

bool NumericRange::overlaps(const NumericRange& o) const {
  // Empty intersection iff one range ends before the other starts.
  auto ends_before = [](const NumericRange& a, const NumericRange& b) {
    if (a.upper < b.lower) return true;
    if (a.upper == b.lower) return !(a.upper_inclusive && b.lower_inclusive);
    return false;
  };
  return !(ends_before(*this, o) || ends_before(o, *this));
}

namespace {

double parse_bound(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("bad range bound '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("bad range bound '" + s + "'");
  return v;
}

std::string format_bound(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

NumericRange NumericRange::parse(const std::string& text) {
  std::string t = text;
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
  if (t.size() < 5 || (t.front() != '(' && t.front() != '[') || (t.back() != ')' && t.back() != ']'))
    throw ValidationError("range must look like (a,b] or [a,b]: '" + text + "'");
  const auto comma = t.find(',');
  if (comma == std::string::npos) throw ValidationError("range is missing a comma: '" + text + "'");
  NumericRange r;
  r.lower_inclusive = t.front() == '[';
  r.upper_inclusive = t.back() == ']';
  r.lower = parse_bound(t.substr(1, comma - 1));
  r.upper = parse_bound(t.substr(comma + 1, t.size() - comma - 2));
  if (r.lower > r.upper) throw ValidationError("range lower bound exceeds upper: '" + text + "'");
  return r;
}

std::string NumericRange::to_string() const {
  return std::string(lower_inclusive ? "[" : "(") + format_bound(lower) + "," + format_bound(upper) +
         (upper_inclusive ? "]" : ")");
}

void BinningSpec::validate() const {
  std::vector<const NumericRange*> all;
  int previous_class = 0;
  double previous_upper = -std::numeric_limits<double>::infinity();
  for (const auto& c : class_ranges) {
    if (c.class_index <= previous_class)
      throw ValidationError("class ranges must be listed in increasing class order");
    if (c.range.lower < previous_upper)
      throw ValidationError("class ranges must increase with the class index");
    previous_class = c.class_index;
    previous_upper = c.range.upper;
    all.push_back(&c.range);
  }
  for (const auto& a : ambiguous_ranges) {
    if (a.interval.lo >= a.interval.hi)
      throw ValidationError("ambiguous range " + a.range.to_string() + " must map to an interval with lo < hi");
    all.push_back(&a.range);
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (all[i]->overlaps(*all[j]))
        throw ValidationError("overlapping ranges " + all[i]->to_string() + " and " + all[j]->to_string());
}

BinningResult bin_numeric_target(std::span<const double> values, const BinningSpec& spec) {
  spec.validate();
  BinningResult out;
  out.labels.reserve(values.size());
  for (double v : values) {
    std::optional<LabelInterval> label;
    for (const auto& c : spec.class_ranges)
      if (c.range.contains(v)) label = LabelInterval::precise(c.class_index);
    for (const auto& a : spec.ambiguous_ranges)
      if (a.range.contains(v)) label = a.interval;
    if (!label) ++out.excluded;
    else if (label->is_precise()) ++out.precise;
    else ++out.interval;
    out.labels.push_back(label);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ValidationError("unterminated quoted field in CSV");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw ValidationError("CSV has no header row");

  CsvTable table;
  table.header = std::move(records.front());
  if (!table.header.empty() && table.header.front().rfind("\xEF\xBB\xBF", 0) == 0)
    table.header.front().erase(0, 3);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw ValidationError("malformed row " + std::to_string(r) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(records[r].size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

namespace {

int require_column(const CsvTable& table, const std::string& name) {
  const int c = table.column(name);
  if (c < 0) throw ValidationError("missing column '" + name + "'");
  return c;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(last[-1]))) --last;
  if (first < last && *first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw ValidationError("non-numeric value '" + cell + "' in column '" + column + "' at row " +
                          std::to_string(row));
  if (!std::isfinite(v))
    throw ValidationError("non-finite value in column '" + column + "' at row " + std::to_string(row));
  return v;
}

int parse_label(const std::string& cell, std::size_t row, const std::string& column) {
  const double v = parse_number(cell, row, column);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ValidationError("label '" + cell + "' in column '" + column + "' at row " + std::to_string(row) +
                          " is not an integer");
  return static_cast<int>(v);
}

}  // namespace

OrdinalDataset dataset_from_table(const CsvTable& table, const CsvSchema& schema) {
  const bool single = !schema.label_column.empty();
  if (!single && (schema.lo_column.empty() || schema.hi_column.empty()))
    throw ValidationError("schema needs a label column or both lo and hi columns");

  std::vector<int> label_cols;
  if (single) {
    label_cols.push_back(require_column(table, schema.label_column));
  } else {
    label_cols.push_back(require_column(table, schema.lo_column));
    label_cols.push_back(require_column(table, schema.hi_column));
  }
  const int group_col = schema.group_column.empty() ? -1 : require_column(table, schema.group_column);

  std::vector<int> feature_cols;
  if (!schema.feature_columns.empty()) {
    for (const auto& name : schema.feature_columns) feature_cols.push_back(require_column(table, name));
  } else {
    for (int c = 0; c < static_cast<int>(table.header.size()); ++c)
      if (std::find(label_cols.begin(), label_cols.end(), c) == label_cols.end() && c != group_col)
        feature_cols.push_back(c);
  }

  OrdinalDataset out;
  const auto n = table.rows.size();
  out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_cols.size()));
  for (int c : feature_cols) out.feature_names.push_back(table.header[static_cast<std::size_t>(c)]);
  int max_label = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    const std::size_t row_no = r + 1;
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const auto c = static_cast<std::size_t>(feature_cols[j]);
      out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          parse_number(row[c], row_no, table.header[c]);
    }
    LabelInterval label;
    if (single) {
      const auto c = static_cast<std::size_t>(label_cols[0]);
      label = LabelInterval::precise(parse_label(row[c], row_no, table.header[c]));
    } else {
      const auto lo = static_cast<std::size_t>(label_cols[0]);
      const auto hi = static_cast<std::size_t>(label_cols[1]);
      label = {parse_label(row[lo], row_no, table.header[lo]), parse_label(row[hi], row_no, table.header[hi])};
    }
    if (label.lo > label.hi) throw ValidationError("lo > hi at row " + std::to_string(row_no));
    max_label = std::max(max_label, label.hi);
    out.labels.push_back(label);
    if (group_col >= 0) {
      const auto& cell = row[static_cast<std::size_t>(group_col)];
      if (cell.empty())
        out.group_ids.emplace_back(std::nullopt);
      else
        out.group_ids.emplace_back(
            static_cast<std::int64_t>(parse_label(cell, row_no, schema.group_column)));
    }
  }
  out.num_classes = schema.num_classes > 0 ? schema.num_classes : std::max(2, max_label);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& l = out.labels[r];
    if (l.lo < 1 || l.hi > out.num_classes)
      throw ValidationError("label outside [1, " + std::to_string(out.num_classes) + "] at row " +
                            std::to_string(r + 1));
  }
  out.validate();
  return out;
}

OrdinalDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  return dataset_from_table(read_csv(path), schema);
}

std::string to_csv_text(const OrdinalDataset& data) {
  std::ostringstream os;
  os.precision(17);
  for (int j = 0; j < data.dims(); ++j) {
    os << (data.feature_names.empty() ? "x" + std::to_string(j + 1) : data.feature_names[static_cast<std::size_t>(j)])
       << ',';
  }
  os << "lo,hi";
  if (!data.group_ids.empty()) os << ",group";
  os << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.dims(); ++j) os << data.features(static_cast<Eigen::Index>(i), j) << ',';
    os << data.labels[i].lo << ',' << data.labels[i].hi;
    if (!data.group_ids.empty()) {
      os << ',';
      if (data.group_ids[i]) os << *data.group_ids[i];
    }
    os << '\n';
  }
  return os.str();
}

void write_csv(const OrdinalDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << to_csv_text(data);
  if (!out) throw ValidationError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Standardization and folds

Standardizer Standardizer::fit(const RowMatrix& features) {
  if (features.rows() == 0) throw ValidationError("cannot standardize an empty training set");
  Standardizer s;
  const auto n = static_cast<double>(features.rows());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double mean = features.col(j).sum() / n;
    const double var = (features.col(j).array() - mean).square().sum() / n;
    s.mean.push_back(mean);
    s.scale.push_back(std::sqrt(var));
  }
  return s;
}

RowMatrix Standardizer::apply(const RowMatrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != mean.size())
    throw ValidationError("standardizer expects " + std::to_string(mean.size()) + " columns, got " +
                          std::to_string(features.cols()));
  RowMatrix out(features.rows(), features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const auto js = static_cast<std::size_t>(j);
    if (scale[js] > 0.0)
      out.col(j) = (features.col(j).array() - mean[js]) / scale[js];
    else
      out.col(j).setZero();
  }
  return out;
}

StandardizeResult standardize(const OrdinalDataset& train, std::span<const OrdinalDataset> others) {
  StandardizeResult result;
  result.stats = Standardizer::fit(train.features);
  result.train = train;
  result.train.features = result.stats.apply(train.features);
  for (const auto& o : others) {
    auto copy = o;
    copy.features = result.stats.apply(o.features);
    result.others.push_back(std::move(copy));
  }
  return result;
}

std::vector<Fold> group_kfold(const OrdinalDataset& data, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("folds must be at least 2");
  const auto n = data.size();
  // Group index per sample; samples without an id get their own group.
  std::vector<std::vector<int>> groups;
  {
    std::vector<std::pair<std::int64_t, int>> keyed;
    std::vector<int> singletons;
    for (std::size_t i = 0; i < n; ++i) {
      if (!data.group_ids.empty() && data.group_ids[i])
        keyed.emplace_back(*data.group_ids[i], static_cast<int>(i));
      else
        singletons.push_back(static_cast<int>(i));
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      if (k == 0 || keyed[k].first != keyed[k - 1].first) groups.emplace_back();
      groups.back().push_back(keyed[k].second);
    }
    for (int i : singletons) groups.push_back({i});
  }
  if (groups.size() < static_cast<std::size_t>(folds))
    throw ValidationError("fewer groups (" + std::to_string(groups.size()) + ") than folds (" +
                          std::to_string(folds) + ")");

  std::vector<int> order(groups.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = static_cast<int>(g);
  auto rng = make_rng(seed, Stream::fold);
  shuffle_range(order.begin(), order.end(), rng);

  std::vector<int> fold_of(n, -1);
  for (std::size_t r = 0; r < order.size(); ++r)
    for (int i : groups[static_cast<std::size_t>(order[r])]) fold_of[static_cast<std::size_t>(i)] = static_cast<int>(r % static_cast<std::size_t>(folds));

  std::vector<Fold> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < n; ++i)
    for (int f = 0; f < folds; ++f)
      (fold_of[i] == f ? out[static_cast<std::size_t>(f)].validation : out[static_cast<std::size_t>(f)].train)
          .push_back(static_cast<int>(i));
  return out;
}

}  // namespace hol
