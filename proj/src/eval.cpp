#include "hol/eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hol/error.hpp"
#include "hol/parallel.hpp"

namespace hol {

using nlohmann::json;

MetricSet compute_metrics(std::span<const int> predicted, std::span<const int> truth, int num_classes) {
  if (truth.empty()) throw ValidationError("cannot compute metrics on an empty test set");
  if (predicted.size() != truth.size()) throw ValidationError("predictions and truth differ in length");
  if (num_classes < 2) throw ValidationError("K must be at least 2");
  std::vector<long> per_class(static_cast<std::size_t>(num_classes), 0);
  std::vector<long> per_class_hits(static_cast<std::size_t>(num_classes), 0);
  long hits = 0;
  long deviation = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 1 || truth[i] > num_classes) throw ValidationError("true class outside [1, K]");
    if (predicted[i] < 1 || predicted[i] > num_classes) throw ValidationError("predicted class outside [1, K]");
    const auto c = static_cast<std::size_t>(truth[i] - 1);
    ++per_class[c];
    if (predicted[i] == truth[i]) {
      ++hits;
      ++per_class_hits[c];
    }
    deviation += std::abs(predicted[i] - truth[i]);
  }
  MetricSet m;
  const auto n = static_cast<double>(truth.size());
  m.overall_acc = static_cast<double>(hits) / n;
  m.mean_abs_deviation = static_cast<double>(deviation) / n;
  double class_sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    if (per_class[cc] == 0) {
      m.absent_classes.push_back(c + 1);
      continue;
    }
    class_sum += static_cast<double>(per_class_hits[cc]) / static_cast<double>(per_class[cc]);
    ++present;
  }
  m.avg_class_acc = class_sum / present;
  return m;
}

std::string to_string(Method method) {
  switch (method) {
    case Method::hol:
      return "HOL";
    case Method::no_interval:
      return "HOL/no-interval";
    case Method::mid_interval:
      return "HOL/mid-interval";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "hol") return Method::hol;
  if (n == "no-interval" || n == "hol/no-interval") return Method::no_interval;
  if (n == "mid-interval" || n == "hol/mid-interval") return Method::mid_interval;
  throw ValidationError("unknown method '" + name + "' (expected hol, no_interval or mid_interval)");
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace

void ReportRow::aggregate() {
  std::vector<double> acc, cls, mad;
  for (const auto& r : runs) {
    acc.push_back(r.metrics.overall_acc);
    cls.push_back(r.metrics.avg_class_acc);
    mad.push_back(r.metrics.mean_abs_deviation);
  }
  const auto a = mean_std(acc), c = mean_std(cls), d = mean_std(mad);
  overall_acc_mean = a.mean;
  overall_acc_std = a.std;
  avg_class_acc_mean = c.mean;
  avg_class_acc_std = c.std;
  mad_mean = d.mean;
  mad_std = d.std;
  run_count = static_cast<int>(runs.size());
  // Most frequent config; earliest run wins a tie.
  best_config_mode.clear();
  std::size_t best_count = 0;
  for (const auto& r : runs) {
    const auto count = static_cast<std::size_t>(
        std::count_if(runs.begin(), runs.end(), [&](const RunRecord& o) { return o.config == r.config; }));
    if (count > best_count) {
      best_count = count;
      best_config_mode = r.config;
    }
  }
}

const ReportRow* BenchmarkReport::find(const std::string& dataset, Method method) const {
  const auto name = to_string(method);
  for (const auto& r : rows)
    if (r.dataset == dataset && r.method == name) return &r;
  return nullptr;
}

BenchmarkReport run_benchmark(const DatasetManifest& manifest, std::span<const Method> methods, int runs,
                              std::uint64_t base_seed, const BenchmarkOptions& options) {
  if (runs < 1) throw ValidationError("runs must be at least 1");
  if (methods.empty()) throw ValidationError("at least one method is required");
  const OrdinalDataset pool = load_manifest_dataset(manifest);

  struct Task {
    std::optional<RunRecord> record;
    std::string failure;
  };
  const std::size_t count = static_cast<std::size_t>(runs) * methods.size();
  std::vector<Task> tasks(count);
  const int outer = std::min<int>(std::max(options.jobs, 1), static_cast<int>(count));
  const int inner = std::max(1, std::max(options.jobs, 1) / outer);

  parallel_for(count, outer, [&](std::size_t t) {
    const auto run = t / methods.size();
    const Method method = methods[t % methods.size()];
    const std::uint64_t seed = base_seed + run;
    try {
      const auto split = make_split(pool, manifest, seed);
      OrdinalDataset train = method == Method::hol           ? split.train
                             : method == Method::no_interval ? to_no_interval(split.train)
                                                             : to_mid_interval(split.train, seed);
      HolConfig config;
      if (options.frozen) {
        config = *options.frozen;
      } else {
        const auto grid = options.grid.empty() ? default_grid(train.dims()) : options.grid;
        CvOptions cv;
        cv.folds = options.folds;
        cv.seed = seed;
        cv.jobs = inner;
        cv.fit = options.fit;
        config = grid_search_cv(train, grid, cv).best;
      }
      const HolModel model = fit(train, config, options.fit);
      const auto predicted = predict(model, split.test.features);
      std::vector<int> truth;
      for (const auto& l : split.test.labels) truth.push_back(l.lo);
      RunRecord record;
      record.seed = seed;
      record.metrics = compute_metrics(predicted, truth, pool.num_classes);
      record.config = config.describe();
      record.train_precise = train.count_precise();
      record.train_interval = train.size() - record.train_precise;
      tasks[t].record = std::move(record);
    } catch (const std::exception& e) {
      tasks[t].failure = manifest.name + "/" + to_string(method) + "/run " + std::to_string(run) + ": " + e.what();
    }
  });

  BenchmarkReport report;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    ReportRow row;
    row.dataset = manifest.name;
    row.method = to_string(methods[m]);
    for (int run = 0; run < runs; ++run) {
      auto& task = tasks[static_cast<std::size_t>(run) * methods.size() + m];
      if (task.record) row.runs.push_back(std::move(*task.record));
      else report.failures.push_back(task.failure);
    }
    row.aggregate();
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Reports

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "table") return ReportFormat::table;
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  if (name == "plot") return ReportFormat::plot;
  throw ValidationError("unknown report format '" + name + "' (expected table, csv, json or plot)");
}

std::string format_mean_std(double mean, double std) {
  char mean_text[64];
  std::snprintf(mean_text, sizeof mean_text, "%.2f", mean);
  std::string std_text;
  if (!(std > 0.0)) {
    std_text = "0.0";
  } else {
    auto decimals = [](double v) { return std::max(0, 1 - static_cast<int>(std::floor(std::log10(v)))); };
    int digits = decimals(std);
    const double rounded = std::round(std * std::pow(10.0, digits)) / std::pow(10.0, digits);
    digits = decimals(rounded);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, rounded);
    std_text = buf;
  }
  return std::string(mean_text) + " (" + std_text + ")";
}

namespace {

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const char* kCsvHeader =
    "dataset,method,runs,overall_acc_mean,overall_acc_std,avg_class_acc_mean,avg_class_acc_std,mad_mean,mad_std,"
    "best_config_mode";

std::string render_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    os << csv_field(r.dataset) << ',' << csv_field(r.method) << ',' << r.run_count << ',' << number(r.overall_acc_mean)
       << ',' << number(r.overall_acc_std) << ',' << number(r.avg_class_acc_mean) << ',' << number(r.avg_class_acc_std)
       << ',' << number(r.mad_mean) << ',' << number(r.mad_std) << ',' << csv_field(r.best_config_mode) << '\n';
  }
  return os.str();
}

std::string render_table(const BenchmarkReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "dataset" << std::setw(18) << "method" << std::setw(6) << "runs" << std::setw(16)
     << "overall_acc" << std::setw(16) << "avg_class_acc" << "MSPE (mean abs dev)" << '\n';
  for (const auto& r : report.rows) {
    os << std::left << std::setw(14) << r.dataset << std::setw(18) << r.method << std::setw(6) << r.run_count
       << std::setw(16) << format_mean_std(r.overall_acc_mean, r.overall_acc_std) << std::setw(16)
       << format_mean_std(r.avg_class_acc_mean, r.avg_class_acc_std) << format_mean_std(r.mad_mean, r.mad_std) << '\n';
  }
  if (!report.failures.empty()) {
    os << "failed runs: " << report.failures.size() << '\n';
    for (const auto& f : report.failures) os << "  " << f << '\n';
  }
  return os.str();
}

// Long-format bar-chart data: one bar per (dataset, metric, method).
std::string render_plot(const BenchmarkReport& report) {
  std::ostringstream os;
  os << "dataset,metric,method,mean,std\n";
  const std::pair<const char*, double ReportRow::*> metrics[][2] = {
      {{"overall_acc", &ReportRow::overall_acc_mean}, {"", &ReportRow::overall_acc_std}},
      {{"avg_class_acc", &ReportRow::avg_class_acc_mean}, {"", &ReportRow::avg_class_acc_std}},
      {{"mad", &ReportRow::mad_mean}, {"", &ReportRow::mad_std}},
  };
  std::vector<std::string> datasets;
  for (const auto& r : report.rows)
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
  for (const auto& d : datasets)
    for (const auto& m : metrics)
      for (const auto& r : report.rows)
        if (r.dataset == d)
          os << csv_field(d) << ',' << m[0].first << ',' << csv_field(r.method) << ',' << number(r.*(m[0].second)) << ','
             << number(r.*(m[1].second)) << '\n';
  return os.str();
}

}  // namespace

json report_to_json(const BenchmarkReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json runs = json::array();
    for (const auto& run : r.runs) {
      runs.push_back({{"seed", run.seed},
                      {"overall_acc", run.metrics.overall_acc},
                      {"avg_class_acc", run.metrics.avg_class_acc},
                      {"mad", run.metrics.mean_abs_deviation},
                      {"absent_classes", run.metrics.absent_classes},
                      {"config", run.config},
                      {"train_precise", run.train_precise},
                      {"train_interval", run.train_interval}});
    }
    rows.push_back({{"dataset", r.dataset},
                    {"method", r.method},
                    {"runs", r.run_count},
                    {"overall_acc_mean", r.overall_acc_mean},
                    {"overall_acc_std", r.overall_acc_std},
                    {"avg_class_acc_mean", r.avg_class_acc_mean},
                    {"avg_class_acc_std", r.avg_class_acc_std},
                    {"mad_mean", r.mad_mean},
                    {"mad_std", r.mad_std},
                    {"best_config_mode", r.best_config_mode},
                    {"per_run", runs}});
  }
  return {{"rows", rows}, {"failures", report.failures}};
}

BenchmarkReport report_from_json(const json& doc) {
  BenchmarkReport report;
  try {
    for (const auto& r : doc.at("rows")) {
      ReportRow row;
      row.dataset = r.at("dataset").get<std::string>();
      row.method = r.at("method").get<std::string>();
      row.run_count = r.at("runs").get<int>();
      row.overall_acc_mean = r.at("overall_acc_mean").get<double>();
      row.overall_acc_std = r.at("overall_acc_std").get<double>();
      row.avg_class_acc_mean = r.at("avg_class_acc_mean").get<double>();
      row.avg_class_acc_std = r.at("avg_class_acc_std").get<double>();
      row.mad_mean = r.at("mad_mean").get<double>();
      row.mad_std = r.at("mad_std").get<double>();
      row.best_config_mode = r.at("best_config_mode").get<std::string>();
      for (const auto& run : r.value("per_run", json::array())) {
        RunRecord rec;
        rec.seed = run.at("seed").get<std::uint64_t>();
        rec.metrics.overall_acc = run.at("overall_acc").get<double>();
        rec.metrics.avg_class_acc = run.at("avg_class_acc").get<double>();
        rec.metrics.mean_abs_deviation = run.at("mad").get<double>();
        rec.metrics.absent_classes = run.at("absent_classes").get<std::vector<int>>();
        rec.config = run.at("config").get<std::string>();
        rec.train_precise = run.at("train_precise").get<std::size_t>();
        rec.train_interval = run.at("train_interval").get<std::size_t>();
        row.runs.push_back(std::move(rec));
      }
      report.rows.push_back(std::move(row));
    }
    report.failures = doc.value("failures", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad report document: ") + e.what());
  }
  return report;
}

BenchmarkReport report_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  std::string header;
  for (std::size_t c = 0; c < table.header.size(); ++c) header += (c ? "," : "") + table.header[c];
  if (header != kCsvHeader) throw ValidationError("unexpected report CSV header");
  auto to_double = [](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ValidationError("bad number '" + s + "' in report CSV");
    return v;
  };
  BenchmarkReport report;
  for (const auto& cells : table.rows) {
    ReportRow row;
    row.dataset = cells[0];
    row.method = cells[1];
    row.run_count = static_cast<int>(to_double(cells[2]));
    row.overall_acc_mean = to_double(cells[3]);
    row.overall_acc_std = to_double(cells[4]);
    row.avg_class_acc_mean = to_double(cells[5]);
    row.avg_class_acc_std = to_double(cells[6]);
    row.mad_mean = to_double(cells[7]);
    row.mad_std = to_double(cells[8]);
    row.best_config_mode = cells[9];
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string render_report(const BenchmarkReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::table:
      return render_table(report);
    case ReportFormat::csv:
      return render_csv(report);
    case ReportFormat::json:
      return report_to_json(report).dump(2) + "\n";
    case ReportFormat::plot:
      return render_plot(report);
  }
  return {};
}

void emit_report(const BenchmarkReport& report, ReportFormat format, const std::filesystem::path& path) {
  if (report.rows.empty()) throw ValidationError("report has no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << render_report(report, format);
  if (!out) throw ValidationError("failed writing " + path.string());
}

}  // namespace hol
