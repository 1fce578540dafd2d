#include "sepsis/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

namespace sepsis {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto bar = line.find('|', start);
    if (bar == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, bar - start));
    start = bar + 1;
  }
  return out;
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 engine(seed);
  std::shuffle(order.begin(), order.end(), engine);
  return order;
}

}  // namespace

FeatureCatalog FeatureCatalog::challenge_default() {
  FeatureCatalog c;
  c.names = {"HR",         "O2Sat",        "Temp",        "SBP",
             "MAP",        "DBP",          "Resp",        "EtCO2",
             "BaseExcess", "HCO3",         "FiO2",        "pH",
             "PaCO2",      "SaO2",         "AST",         "BUN",
             "Alkalinephos", "Calcium",    "Chloride",    "Creatinine",
             "Bilirubin_direct", "Glucose", "Lactate",    "Magnesium",
             "Phosphate",  "Potassium",    "Bilirubin_total", "TroponinI",
             "Hct",        "Hgb",          "PTT",         "WBC",
             "Fibrinogen", "Platelets",    "Age",         "Gender",
             "Unit1",      "Unit2",        "HospAdmTime", "ICULOS"};
  c.weighted_set = {"Lactate", "MAP", "HR", "Resp"};
  // Vital signs and laboratory values: the first 34 columns.
  c.time_varying_set.assign(c.names.begin(), c.names.begin() + 34);
  c.static_set = {"Age", "Gender", "Unit1", "Unit2", "HospAdmTime"};
  return c;
}

std::optional<std::size_t> FeatureCatalog::index_of(
    std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::size_t FeatureCatalog::require_index(std::string_view name) const {
  const auto idx = index_of(name);
  if (!idx) throw ArgumentError("unknown feature '" + std::string(name) + "'");
  return *idx;
}

bool FeatureCatalog::is_time_varying(std::size_t column) const {
  return std::find(time_varying_set.begin(), time_varying_set.end(),
                   names.at(column)) != time_varying_set.end();
}

bool FeatureCatalog::is_static(std::size_t column) const {
  return std::find(static_set.begin(), static_set.end(), names.at(column)) !=
         static_set.end();
}

void FeatureCatalog::validate() const {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw ConfigError("feature catalog contains an empty name");
    if (!seen.insert(n).second)
      throw ConfigError("duplicate feature name '" + n + "'");
    if (n == kLabelColumn)
      throw ConfigError("feature catalog must not contain the label column");
  }
  auto check_subset = [&](const std::vector<std::string>& group,
                          const char* what) {
    for (const auto& n : group)
      if (!seen.count(n))
        throw ConfigError(std::string(what) + " feature '" + n +
                          "' is not in the catalog");
  };
  check_subset(weighted_set, "weighted");
  check_subset(time_varying_set, "time-varying");
  check_subset(static_set, "static");
}

bool PatientRecord::is_septic() const {
  return std::find(labels.begin(), labels.end(), 1) != labels.end();
}

std::optional<std::size_t> PatientRecord::first_positive_hour() const {
  const auto it = std::find(labels.begin(), labels.end(), 1);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

bool PatientRecord::labels_monotone() const {
  return std::is_sorted(labels.begin(), labels.end());
}

std::size_t Cohort::total_hours() const {
  std::size_t n = 0;
  for (const auto& p : patients) n += p.hour_count();
  return n;
}

std::size_t Cohort::septic_count() const {
  return static_cast<std::size_t>(
      std::count_if(patients.begin(), patients.end(),
                    [](const PatientRecord& p) { return p.is_septic(); }));
}

Cohort Cohort::subset(const std::vector<std::string>& ids) const {
  Cohort out;
  out.catalog = catalog;
  out.patients.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it =
        std::find_if(patients.begin(), patients.end(),
                     [&](const PatientRecord& p) { return p.id == id; });
    if (it == patients.end())
      throw ArgumentError("patient '" + id + "' is not in the cohort");
    out.patients.push_back(*it);
  }
  return out;
}

void Cohort::validate_unique_ids() const {
  std::unordered_set<std::string> seen;
  for (const auto& p : patients)
    if (!seen.insert(p.id).second)
      throw DataError("duplicate patient id '" + p.id + "'");
}

PatientRecord parse_patient_file(std::string_view text,
                                 const FeatureCatalog& catalog,
                                 std::string id) {
  if (text.empty()) throw DataError("empty patient file");

  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      lines.push_back(chomp(text.substr(start, nl - start)));
      start = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
  }
  if (lines.empty()) throw DataError("empty patient file");

  const std::size_t width = catalog.size() + 1;
  const auto header = split_fields(lines.front());
  for (std::size_t i = 0; i < std::min(header.size(), width); ++i) {
    const std::string_view expected =
        i < catalog.size() ? std::string_view(catalog.names[i]) : kLabelColumn;
    if (header[i] != expected)
      throw DataError("header column " + std::to_string(i + 1) +
                      ": expected '" + std::string(expected) + "', found '" +
                      std::string(header[i]) + "'");
  }
  if (header.size() < width) {
    const std::string_view missing = header.size() < catalog.size()
                                         ? std::string_view(
                                               catalog.names[header.size()])
                                         : kLabelColumn;
    throw DataError("header has " + std::to_string(header.size()) +
                    " columns, expected " + std::to_string(width) +
                    " (missing column '" + std::string(missing) + "')");
  }
  if (header.size() > width)
    throw DataError("header has " + std::to_string(header.size()) +
                    " columns, expected " + std::to_string(width) +
                    " (unexpected column '" + std::string(header[width]) +
                    "')");

  PatientRecord record;
  record.id = std::move(id);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto line_no = std::to_string(ln + 1);
    const auto fields = split_fields(lines[ln]);
    if (fields.size() != width)
      throw DataError("line " + line_no + ": expected " +
                      std::to_string(width) + " fields, found " +
                      std::to_string(fields.size()));
    FeatureVector hour(catalog.size());
    for (std::size_t c = 0; c < catalog.size(); ++c) {
      if (fields[c] == "NaN") {
        hour[c] = kMissing;
      } else if (!parse_double(fields[c], hour[c])) {
        throw DataError("line " + line_no + ": cannot parse '" +
                        std::string(fields[c]) + "' in column '" +
                        catalog.names[c] + "'");
      }
    }
    double label = 0.0;
    if (!parse_double(fields.back(), label) || (label != 0.0 && label != 1.0))
      throw DataError("line " + line_no + ": SepsisLabel must be 0 or 1, found '" +
                      std::string(fields.back()) + "'");
    record.hours.push_back(std::move(hour));
    record.labels.push_back(static_cast<int>(label));
  }
  if (record.hours.empty()) throw DataError("patient file has no data rows");
  return record;
}

std::string format_patient_file(const PatientRecord& record,
                                const FeatureCatalog& catalog) {
  std::string out;
  for (const auto& n : catalog.names) {
    out += n;
    out += '|';
  }
  out += kLabelColumn;
  out += '\n';
  char buf[64];
  for (std::size_t t = 0; t < record.hour_count(); ++t) {
    for (double v : record.hours[t]) {
      if (is_missing(v)) {
        out += "NaN";
      } else {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.append(buf, ptr);
      }
      out += '|';
    }
    out += record.labels[t] ? '1' : '0';
    out += '\n';
  }
  return out;
}

PatientRecord load_patient_file(const std::filesystem::path& path,
                                const FeatureCatalog& catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_patient_file(buf.str(), catalog, path.stem().string());
}

Cohort load_cohort(const std::filesystem::path& directory,
                   const FeatureCatalog& catalog) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory))
    throw DataError("not a directory: " + directory.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() &&
        entry.path().extension() == kPatientFileExtension)
      files.push_back(entry.path());
  }
  if (files.empty())
    throw DataError("no patient files (*" + std::string(kPatientFileExtension) +
                    ") in " + directory.string());
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.stem().string() < b.stem().string();
  });

  Cohort cohort;
  cohort.catalog = catalog;
  std::string failures;
  std::size_t n_failed = 0;
  for (const auto& f : files) {
    try {
      cohort.patients.push_back(load_patient_file(f, catalog));
    } catch (const DataError& e) {
      ++n_failed;
      failures += "\n  " + f.filename().string() + ": " + e.what();
    }
  }
  if (n_failed > 0)
    throw DataError(std::to_string(n_failed) + " patient file(s) failed to parse:" +
                    failures);
  for (const auto& p : cohort.patients)
    if (!p.labels_monotone())
      spdlog::warn("patient {}: SepsisLabel is not monotone; onset taken at "
                   "the first positive hour",
                   p.id);
  cohort.validate_unique_ids();
  return cohort;
}

CohortSplit split_cohort(const Cohort& cohort, double train_fraction,
                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("train_fraction must lie in (0, 1)");
  if (cohort.empty()) throw ArgumentError("cannot split an empty cohort");

  const std::size_t n = cohort.size();
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * double(n)));
  auto order = shuffled_indices(n, seed);
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> test_idx(order.begin() + n_train, order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  CohortSplit split;
  split.train.catalog = cohort.catalog;
  split.test.catalog = cohort.catalog;
  for (auto i : train_idx) split.train.patients.push_back(cohort.patients[i]);
  for (auto i : test_idx) split.test.patients.push_back(cohort.patients[i]);
  if (split.train.empty() || split.test.empty()) {
    split.warning = "split of " + std::to_string(n) + " patient(s) leaves the " +
                    (split.train.empty() ? "train" : "test") + " side empty";
    spdlog::warn("{}", *split.warning);
  }
  return split;
}

namespace {

std::vector<Fold> deal_folds(const Cohort& cohort,
                             const std::vector<std::vector<std::size_t>>& groups,
                             int k) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
  std::size_t position = 0;
  for (const auto& group : groups)
    for (auto idx : group) members[position++ % members.size()].push_back(idx);
  std::vector<Fold> folds;
  folds.reserve(members.size());
  for (auto& m : members) {
    std::sort(m.begin(), m.end());
    Fold fold;
    for (auto idx : m) fold.push_back(cohort.patients[idx].id);
    folds.push_back(std::move(fold));
  }
  return folds;
}

void check_k(const Cohort& cohort, int k) {
  if (k < 2) throw ArgumentError("k-fold partition needs k >= 2");
  if (static_cast<std::size_t>(k) > cohort.size())
    throw ArgumentError("k-fold partition needs k <= number of patients (" +
                        std::to_string(cohort.size()) + ")");
}

}  // namespace

std::vector<Fold> kfold_partition(const Cohort& cohort, int k,
                                  std::uint64_t seed) {
  check_k(cohort, k);
  return deal_folds(cohort, {shuffled_indices(cohort.size(), seed)}, k);
}

std::vector<Fold> stratified_kfold_partition(const Cohort& cohort, int k,
                                             std::uint64_t seed) {
  check_k(cohort, k);
  std::vector<std::size_t> septic, other;
  for (auto idx : shuffled_indices(cohort.size(), seed))
    (cohort.patients[idx].is_septic() ? septic : other).push_back(idx);
  return deal_folds(cohort, {septic, other}, k);
}

}  // namespace sepsis
