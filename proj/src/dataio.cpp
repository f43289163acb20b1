/*
 * Copyright 2026 The distreg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "distreg/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "distreg/error.hpp"
#include "distreg/seeding.hpp"

namespace distreg {
namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, bool& ok) {
  int value = 0;
  if (pos + len > text.size()) {
    ok = false;
    return 0;
  }
  const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
  if (ec != std::errc() || ptr != text.data() + pos + len) ok = false;
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t month_index(std::int64_t seconds) {
  using namespace std::chrono;
  const sys_days day{days{floor_div(seconds, kSecondsPerDay)}};
  const year_month_day ymd{day};
  return static_cast<std::size_t>(static_cast<int>(ymd.year()) * 12 +
                                  static_cast<int>(static_cast<unsigned>(ymd.month())) - 1);
}

void check_sorted(std::span<const std::int64_t> ts) {
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i] < ts[i - 1]) {
      throw Error(ErrorCode::kUnsortedData,
                  "timestamps decrease at row " + std::to_string(i) + " (" +
                      format_timestamp(ts[i]) + " after " + format_timestamp(ts[i - 1]) + ")");
    }
  }
}

}  // namespace

void TableSchema::validate() const {
  if (target.empty()) throw Error(ErrorCode::kConfig, "schema: target column is required");
  std::unordered_set<std::string> seen{target};
  auto add = [&](const std::string& name) {
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::kConfig, "schema: duplicate column '" + name + "'");
    }
  };
  for (const auto& c : numeric) add(c);
  for (const auto& c : categorical) add(c);
  if (timestamp) add(*timestamp);
  if (calendar && !timestamp) {
    throw Error(ErrorCode::kConfig, "schema: calendar features need a timestamp column");
  }
  if (lower.has_value() != upper.has_value() || (lower && !(*lower < *upper))) {
    throw Error(ErrorCode::kConfig, "schema: lower/upper must both be set with lower < upper");
  }
}

void to_json(nlohmann::json& j, const TableSchema& s) {
  j = nlohmann::json{{"target", s.target},
                     {"numeric", s.numeric},
                     {"categorical", s.categorical},
                     {"calendar", s.calendar},
                     {"drop_zero_target", s.drop_zero_target}};
  if (s.timestamp) j["timestamp"] = *s.timestamp;
  if (s.lower) j["lower"] = *s.lower;
  if (s.upper) j["upper"] = *s.upper;
}

void from_json(const nlohmann::json& j, TableSchema& s) {
  s.target = j.value("target", s.target);
  s.numeric = j.value("numeric", s.numeric);
  s.categorical = j.value("categorical", s.categorical);
  if (j.contains("timestamp")) s.timestamp = j.at("timestamp").get<std::string>();
  s.calendar = j.value("calendar", s.calendar);
  if (j.contains("lower")) s.lower = j.at("lower").get<double>();
  if (j.contains("upper")) s.upper = j.at("upper").get<double>();
  s.drop_zero_target = j.value("drop_zero_target", s.drop_zero_target);
}

std::int64_t parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  bool ok = text.size() >= 10 && text[4] == '-' && text[7] == '-';
  const int y = parse_fixed_int(text, 0, 4, ok);
  const int mo = parse_fixed_int(text, 5, 2, ok);
  const int d = parse_fixed_int(text, 8, 2, ok);
  int hh = 0, mm = 0, ss = 0;
  std::string_view rest = ok ? text.substr(10) : std::string_view{};
  if (ok && !rest.empty()) {
    if (rest.back() == 'Z') rest.remove_suffix(1);
    ok = rest.size() >= 6 && (rest[0] == 'T' || rest[0] == ' ') && rest[3] == ':';
    hh = parse_fixed_int(rest, 1, 2, ok);
    mm = parse_fixed_int(rest, 4, 2, ok);
    if (ok && rest.size() > 6) {
      ok = rest.size() == 9 && rest[6] == ':';
      ss = parse_fixed_int(rest, 7, 2, ok);
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ok || !ymd.ok() || hh > 23 || mm > 59 || ss > 60 || hh < 0 || mm < 0 || ss < 0) {
    throw Error(ErrorCode::kParseError, "unparseable timestamp '" + std::string(text) + "'");
  }
  const std::int64_t days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return days_since_epoch * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(std::int64_t seconds) {
  using namespace std::chrono;
  const std::int64_t day_count = floor_div(seconds, kSecondsPerDay);
  const std::int64_t sec_of_day = seconds - day_count * kSecondsPerDay;
  const year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(sec_of_day / 3600), static_cast<int>(sec_of_day % 3600 / 60),
                static_cast<int>(sec_of_day % 60));
  return buf;
}

double day_of_year(std::int64_t seconds) {
  using namespace std::chrono;
  const std::int64_t day_count = floor_div(seconds, kSecondsPerDay);
  const year_month_day ymd{sys_days{days{day_count}}};
  const std::int64_t jan1 = sys_days{ymd.year() / January / 1}.time_since_epoch().count();
  return static_cast<double>(seconds - jan1 * kSecondsPerDay) / static_cast<double>(kSecondsPerDay);
}

std::vector<std::string> calendar_feature_names() {
  std::vector<std::string> names{"doy_sin", "doy_cos"};
  for (int h = 0; h < 24; ++h) names.push_back("hour_" + std::to_string(h));
  return names;
}

Matrix calendar_features(std::span<const std::int64_t> timestamps) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(timestamps.size()), 26);
  for (std::size_t r = 0; r < timestamps.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    const double angle = 2.0 * std::numbers::pi * day_of_year(timestamps[r]) / kYearPeriodDays;
    out(i, 0) = std::sin(angle);
    out(i, 1) = std::cos(angle);
    const std::int64_t sec_of_day =
        timestamps[r] - floor_div(timestamps[r], kSecondsPerDay) * kSecondsPerDay;
    out(i, 2 + sec_of_day / 3600) = 1.0;
  }
  return out;
}

void append_calendar_features(Dataset& data) {
  if (data.timestamps.size() != data.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "calendar features need one timestamp per row");
  }
  const Matrix cal = calendar_features(data.timestamps);
  Matrix x(data.x.rows(), data.x.cols() + cal.cols());
  x << data.x, cal;
  data.x = std::move(x);
  for (auto& n : calendar_feature_names()) data.feature_names.push_back(std::move(n));
}

Dataset read_csv(std::istream& in, const TableSchema& schema) {
  schema.validate();
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw Error(ErrorCode::kEmptyFile, "no header row");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i]));
    if (!col.emplace(name, i).second) {
      throw Error(ErrorCode::kParseError, "duplicate header column '" + name + "'");
    }
  }
  auto need = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw Error(ErrorCode::kMissingColumn, "column '" + name + "' not found");
    return it->second;
  };
  const std::size_t target_col = need(schema.target);
  std::vector<std::size_t> numeric_cols;
  for (const auto& c : schema.numeric) numeric_cols.push_back(need(c));
  std::vector<std::size_t> cat_cols;
  for (const auto& c : schema.categorical) cat_cols.push_back(need(c));
  const std::optional<std::size_t> ts_col =
      schema.timestamp ? std::optional<std::size_t>(need(*schema.timestamp)) : std::nullopt;

  std::vector<double> ys;
  std::vector<std::vector<double>> numeric_rows;
  std::vector<std::vector<std::size_t>> cat_rows;
  std::vector<std::vector<std::string>> levels(cat_cols.size());
  std::vector<std::unordered_map<std::string, std::size_t>> level_index(cat_cols.size());
  std::vector<std::int64_t> times;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    auto number = [&](std::size_t c) {
      double v;
      if (!parse_double(fields[c], v)) {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ", column '" +
                                                std::string(trim(header[c])) + "': '" +
                                                fields[c] + "' is not a finite number");
      }
      return v;
    };
    const double y = number(target_col);
    if (schema.drop_zero_target && y == 0.0) continue;
    ys.push_back(y);
    std::vector<double> nums;
    nums.reserve(numeric_cols.size());
    for (auto c : numeric_cols) nums.push_back(number(c));
    numeric_rows.push_back(std::move(nums));
    std::vector<std::size_t> cats;
    for (std::size_t k = 0; k < cat_cols.size(); ++k) {
      const std::string value(trim(fields[cat_cols[k]]));
      if (value.empty()) {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ", column '" +
                                                schema.categorical[k] + "': missing value");
      }
      auto [it, inserted] = level_index[k].emplace(value, levels[k].size());
      if (inserted) levels[k].push_back(value);
      cats.push_back(it->second);
    }
    cat_rows.push_back(std::move(cats));
    if (ts_col) {
      try {
        times.push_back(parse_timestamp(fields[*ts_col]));
      } catch (const Error& e) {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (ys.empty()) throw Error(ErrorCode::kEmptyFile, "no data rows");

  std::size_t width = numeric_cols.size();
  for (const auto& l : levels) width += l.size();
  Dataset d;
  d.x = Matrix::Zero(static_cast<Eigen::Index>(ys.size()), static_cast<Eigen::Index>(width));
  d.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  d.feature_names = schema.numeric;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    for (const auto& l : levels[k]) d.feature_names.push_back(schema.categorical[k] + "=" + l);
  }
  for (std::size_t r = 0; r < ys.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    Eigen::Index c = 0;
    for (double v : numeric_rows[r]) d.x(i, c++) = v;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      d.x(i, c + static_cast<Eigen::Index>(cat_rows[r][k])) = 1.0;
      c += static_cast<Eigen::Index>(levels[k].size());
    }
  }
  d.timestamps = std::move(times);
  if (schema.calendar) append_calendar_features(d);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const TableSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return read_csv(in, schema);
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::string header;
  if (!std::getline(in, header) || trim(header).empty()) {
    throw Error(ErrorCode::kEmptyFile, "'" + path.string() + "' has no header row");
  }
  TableSchema schema;
  for (const auto& raw : split_csv_line(header)) {
    const std::string name(trim(raw));
    if (name == schema.target) continue;
    if (name == "timestamp") {
      schema.timestamp = name;
    } else {
      schema.numeric.push_back(name);
    }
  }
  in.seekg(0);
  return read_csv(in, schema);
}

void write_csv(const Dataset& data, std::ostream& out) {
  data.validate();
  const auto names =
      data.feature_names.empty() ? default_feature_names(data.features()) : data.feature_names;
  out << "y";
  for (const auto& n : names) out << ',' << n;
  const bool timed = !data.timestamps.empty();
  if (timed) out << ",timestamp";
  out << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    out << format_double(data.y(i));
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << ',' << format_double(data.x(i, c));
    if (timed) out << ',' << format_timestamp(data.timestamps[r]);
    out << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  write_csv(data, out);
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

void RollingPlan::validate(std::size_t rows) const {
  if (folds.empty()) throw Error(ErrorCode::kEmptyFold, "rolling plan has no folds");
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& fold = folds[f];
    if (fold.train_end == 0) {
      throw Error(ErrorCode::kEmptyFold, "fold " + std::to_string(f) + " has no training rows");
    }
    if (fold.test_end <= fold.train_end) {
      throw Error(ErrorCode::kEmptyFold, "fold " + std::to_string(f) + " has no test rows");
    }
    if (fold.test_end > rows) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fold " + std::to_string(f) + " ends at row " + std::to_string(fold.test_end) +
                      " beyond " + std::to_string(rows) + " rows");
    }
    if (f > 0 && fold.train_end != folds[f - 1].test_end) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fold " + std::to_string(f) + " does not start where fold " +
                      std::to_string(f - 1) + " ended");
    }
  }
}

RollingPlan monthly_plan(std::span<const std::int64_t> timestamps, std::size_t initial_months,
                         std::size_t max_folds) {
  if (timestamps.empty()) throw Error(ErrorCode::kEmptyData, "no timestamps");
  if (initial_months == 0) throw Error(ErrorCode::kInvalidCount, "initial_months must be >= 1");
  check_sorted(timestamps);
  const std::size_t first = month_index(timestamps.front());
  const std::size_t last = month_index(timestamps.back());
  const std::size_t total = last - first + 1;
  if (total <= initial_months) {
    throw Error(ErrorCode::kEmptyFold, "data spans " + std::to_string(total) +
                                           " month(s); nothing left after the initial window");
  }
  // Row index where month offset k starts.
  auto month_start = [&](std::size_t k) {
    const auto it = std::partition_point(timestamps.begin(), timestamps.end(), [&](auto t) {
      return month_index(t) < first + k;
    });
    return static_cast<std::size_t>(it - timestamps.begin());
  };
  std::size_t n_folds = total - initial_months;
  if (max_folds != 0) n_folds = std::min(n_folds, max_folds);
  RollingPlan plan;
  for (std::size_t f = 0; f < n_folds; ++f) {
    plan.folds.push_back({month_start(initial_months + f), month_start(initial_months + f + 1)});
  }
  plan.validate(timestamps.size());
  return plan;
}

RollingPlan row_plan(std::size_t rows, std::size_t initial_rows, std::size_t test_rows,
                     std::size_t folds) {
  RollingPlan plan;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t train_end = initial_rows + f * test_rows;
    plan.folds.push_back({train_end, train_end + test_rows});
  }
  plan.validate(rows);
  return plan;
}

bool RollingResult::all_ok() const {
  return std::all_of(folds.begin(), folds.end(), [](const auto& f) { return f.ok(); });
}

namespace {

template <class Field>
double mean_over_ok(const std::vector<FoldScore>& folds, Field field) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& f : folds) {
    if (!f.ok()) continue;
    total += field(f.report);
    ++n;
  }
  return n == 0 ? std::nan("") : total / static_cast<double>(n);
}

}  // namespace

double RollingResult::mean_crps() const {
  return mean_over_ok(folds, [](const ScoreReport& r) { return r.crps; });
}

double RollingResult::mean_aqtl() const {
  return mean_over_ok(folds, [](const ScoreReport& r) { return r.aqtl; });
}

double RollingResult::mean_coverage90() const {
  return mean_over_ok(folds, [](const ScoreReport& r) { return r.coverage90; });
}

RollingResult rolling_eval(const Dataset& data, const RollingPlan& plan,
                           const ModelFactory& factory, const ScoreOptions& options) {
  data.validate();
  plan.validate(data.rows());
  const bool timed = !data.timestamps.empty();
  if (timed) check_sorted(data.timestamps);
  RollingResult result;
  for (std::size_t f = 0; f < plan.size(); ++f) {
    const Fold& fold = plan.folds[f];
    FoldScore score;
    score.fold = f;
    score.train_rows = fold.train_end;
    score.test_rows = fold.test_end - fold.train_end;
    if (timed) {
      score.max_train_time = data.timestamps[fold.train_end - 1];
      score.min_test_time = data.timestamps[fold.train_end];
    }
    try {
      const Dataset train = data.slice(0, fold.train_end);
      const Dataset test = data.slice(fold.train_end, fold.test_end);
      const auto model = factory(train, f);
      score.report = score_testset(*model, test, options);
    } catch (const std::exception& e) {
      score.status = e.what();
    }
    result.folds.push_back(std::move(score));
  }
  return result;
}

RollingResult rolling_eval(const Dataset& data, const RollingPlan& plan,
                           const ModelRecipe& recipe, const ScoreOptions& options) {
  return rolling_eval(
      data, plan,
      [&](const Dataset& train, std::size_t fold) {
        ModelRecipe r = recipe;
        r.seed = child_seed(recipe.seed, fold);
        return fit_recipe(r, train);
      },
      options);
}

RelativeChange relative_change(const RollingResult& a, const RollingResult& b) {
  if (a.folds.size() != b.folds.size()) {
    throw Error(ErrorCode::kLengthMismatch, "rolling results have different fold counts");
  }
  RelativeChange out;
  std::size_t n = 0;
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    const auto& fa = a.folds[f];
    const auto& fb = b.folds[f];
    if (!fa.ok() || !fb.ok()) {
      out.crps.push_back(std::nan(""));
      out.aqtl.push_back(std::nan(""));
      continue;
    }
    out.crps.push_back((fa.report.crps - fb.report.crps) / fb.report.crps);
    out.aqtl.push_back((fa.report.aqtl - fb.report.aqtl) / fb.report.aqtl);
    out.mean_crps += out.crps.back();
    out.mean_aqtl += out.aqtl.back();
    ++n;
  }
  if (n > 0) {
    out.mean_crps /= static_cast<double>(n);
    out.mean_aqtl /= static_cast<double>(n);
  }
  return out;
}

void write_fold_csv(const RollingResult& a, const RelativeChange* change, std::ostream& out) {
  out << "fold,n,crps,aqtl,coverage90";
  if (change) out << ",crps_rel_change,aqtl_rel_change";
  out << '\n';
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    const auto& fold = a.folds[f];
    out << fold.fold << ',' << fold.test_rows << ',' << format_double(fold.report.crps) << ','
        << format_double(fold.report.aqtl) << ',' << format_double(fold.report.coverage90);
    if (change) {
      out << ',' << format_double(change->crps[f]) << ',' << format_double(change->aqtl[f]);
    }
    out << '\n';
  }
}

nlohmann::json rolling_summary_json(const RollingResult& a, const RollingResult* b,
                                    const RelativeChange* change) {
  auto summarize = [](const RollingResult& r) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : r.folds) {
      nlohmann::json jf{{"fold", f.fold},
                        {"train_rows", f.train_rows},
                        {"test_rows", f.test_rows},
                        {"status", f.status},
                        {"leakage_free", f.leakage_free()}};
      if (f.ok()) jf["scores"] = f.report;
      folds.push_back(std::move(jf));
    }
    return nlohmann::json{{"folds", std::move(folds)},
                          {"mean_crps", r.mean_crps()},
                          {"mean_aqtl", r.mean_aqtl()},
                          {"mean_coverage90", r.mean_coverage90()},
                          {"all_ok", r.all_ok()}};
  };
  nlohmann::json j{{"recipe_a", summarize(a)}};
  if (b) j["recipe_b"] = summarize(*b);
  if (change) {
    j["relative_change"] = {{"crps", change->crps},
                            {"aqtl", change->aqtl},
                            {"mean_crps", change->mean_crps},
                            {"mean_aqtl", change->mean_aqtl}};
  }
  return j;
}

Dataset synthetic_seasonal(std::int64_t start, std::size_t days, std::size_t rows_per_day,
                           std::uint64_t seed) {
  if (rows_per_day == 0 || days == 0) {
    throw Error(ErrorCode::kInvalidCount, "synthetic series needs days and rows_per_day >= 1");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> cloud_dist(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = days * rows_per_day;
  const std::int64_t step = kSecondsPerDay / static_cast<std::int64_t>(rows_per_day);
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(n), 1);
  d.y.resize(static_cast<Eigen::Index>(n));
  d.feature_names = {"cloud"};
  d.timestamps.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    const std::int64_t t = start + static_cast<std::int64_t>(r) * step;
    const double season = std::sin(2.0 * std::numbers::pi * day_of_year(t) / kYearPeriodDays);
    const double cloud = cloud_dist(rng);
    const double mean = 0.5 + 0.2 * season - 0.15 * cloud;
    const double sd = 0.04 + 0.04 * std::abs(cloud);
    double y;
    do {
      y = mean + sd * normal(rng);
    } while (y <= 0.0 || y >= 1.0);
    d.timestamps[r] = t;
    d.x(i, 0) = cloud;
    d.y(i) = y;
  }
  return d;
}

}  // namespace distreg
