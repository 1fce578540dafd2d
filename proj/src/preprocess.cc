#include "sepsis/preprocess.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace sepsis {

void ImputationPolicy::validate() const {
  if (min_observations < 2)
    throw ConfigError("imputation.min_observations must be >= 2");
}

void InstanceMatrix::append_row(std::span<const double> row, int label,
                                std::size_t patient, std::size_t hour) {
  if (row.size() != n_features())
    throw ArgumentError("row width " + std::to_string(row.size()) +
                        " does not match matrix width " +
                        std::to_string(n_features()));
  values.insert(values.end(), row.begin(), row.end());
  labels.push_back(label);
  patient_index.push_back(patient);
  hour_index.push_back(hour);
}

std::size_t InstanceMatrix::positive_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

InstanceMatrix InstanceMatrix::from_rows(
    const std::vector<std::vector<double>>& rows,
    const std::vector<int>& labels) {
  if (rows.size() != labels.size())
    throw ArgumentError("rows and labels differ in length");
  InstanceMatrix m;
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  for (std::size_t f = 0; f < width; ++f)
    m.feature_names.push_back("f" + std::to_string(f));
  for (std::size_t r = 0; r < rows.size(); ++r) m.append_row(rows[r], labels[r], r, 0);
  return m;
}

std::vector<double> impute_series(std::span<const double> values,
                                  const ImputationPolicy& policy) {
  std::vector<double> out(values.begin(), values.end());
  std::vector<std::size_t> observed;
  for (std::size_t t = 0; t < out.size(); ++t)
    if (!is_missing(out[t])) observed.push_back(t);
  if (observed.size() < static_cast<std::size_t>(policy.min_observations))
    return out;

  for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
    const std::size_t a = observed[k];
    const std::size_t b = observed[k + 1];
    const double span = static_cast<double>(b - a);
    for (std::size_t t = a + 1; t < b; ++t)
      out[t] = out[a] + (out[b] - out[a]) * static_cast<double>(t - a) / span;
  }
  if (policy.extrapolate_ends) {
    std::fill(out.begin(), out.begin() + observed.front(), out[observed.front()]);
    std::fill(out.begin() + observed.back() + 1, out.end(), out[observed.back()]);
  }
  return out;
}

PatientRecord impute_patient(const PatientRecord& record,
                             const FeatureCatalog& catalog,
                             const ImputationPolicy& policy) {
  PatientRecord out = record;
  const std::size_t n = record.hour_count();
  std::vector<double> column(n);
  for (std::size_t c = 0; c < catalog.size(); ++c) {
    for (std::size_t t = 0; t < n; ++t) column[t] = record.hours[t][c];

    if (catalog.is_time_varying(c)) {
      const auto filled = impute_series(column, policy);
      for (std::size_t t = 0; t < n; ++t) out.hours[t][c] = filled[t];
    } else if (catalog.is_static(c)) {
      // forward fill, then back fill the leading gap
      double last = kMissing;
      for (std::size_t t = 0; t < n; ++t) {
        if (!is_missing(column[t])) last = column[t];
        out.hours[t][c] = last;
      }
      const auto first = std::find_if(column.begin(), column.end(),
                                      [](double v) { return !is_missing(v); });
      if (first != column.end())
        for (std::size_t t = 0; t < static_cast<std::size_t>(first - column.begin()); ++t)
          out.hours[t][c] = *first;
    }
  }
  return out;
}

namespace {

double square_clamped(double v, std::size_t& clamped) {
  if (is_missing(v)) return v;
  if (v < 0.0) {
    ++clamped;
    return 0.0;
  }
  return v * v;
}

void warn_clamped(std::size_t clamped) {
  if (clamped > 0)
    spdlog::warn("{} negative value(s) of squared features clamped to zero",
                 clamped);
}

}  // namespace

std::size_t apply_feature_weights(PatientRecord& record,
                                  const FeatureCatalog& catalog,
                                  const WeightingPolicy& policy) {
  std::vector<std::size_t> columns;
  for (const auto& name : policy.squared_features)
    columns.push_back(catalog.require_index(name));
  std::size_t clamped = 0;
  for (auto& hour : record.hours)
    for (auto c : columns) hour[c] = square_clamped(hour[c], clamped);
  warn_clamped(clamped);
  return clamped;
}

std::size_t apply_feature_weights(InstanceMatrix& matrix,
                                  const WeightingPolicy& policy) {
  std::vector<std::size_t> columns;
  for (const auto& name : policy.squared_features) {
    const auto it =
        std::find(matrix.feature_names.begin(), matrix.feature_names.end(), name);
    if (it == matrix.feature_names.end())
      throw ArgumentError("unknown feature '" + name + "'");
    columns.push_back(static_cast<std::size_t>(it - matrix.feature_names.begin()));
  }
  std::size_t clamped = 0;
  for (std::size_t r = 0; r < matrix.rows(); ++r)
    for (auto c : columns) matrix.at(r, c) = square_clamped(matrix.at(r, c), clamped);
  warn_clamped(clamped);
  return clamped;
}

InstanceMatrix flatten(const Cohort& cohort) {
  InstanceMatrix m;
  m.feature_names = cohort.catalog.names;
  m.values.reserve(cohort.total_hours() * m.n_features());
  for (std::size_t p = 0; p < cohort.size(); ++p) {
    const auto& rec = cohort.patients[p];
    for (std::size_t t = 0; t < rec.hour_count(); ++t)
      m.append_row(rec.hours[t], rec.labels[t], p, t);
  }
  return m;
}

namespace {

InstanceMatrix select_columns(const InstanceMatrix& m,
                              const std::vector<std::size_t>& keep) {
  InstanceMatrix out;
  for (auto c : keep) out.feature_names.push_back(m.feature_names[c]);
  out.labels = m.labels;
  out.patient_index = m.patient_index;
  out.hour_index = m.hour_index;
  out.values.reserve(m.rows() * keep.size());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (auto c : keep) out.values.push_back(m.at(r, c));
  return out;
}

}  // namespace

DropResult drop_sparse_features(const InstanceMatrix& matrix,
                                double missing_fraction_threshold) {
  if (!(missing_fraction_threshold >= 0.0 && missing_fraction_threshold <= 1.0))
    throw ArgumentError("missing-fraction threshold must lie in [0, 1]");
  DropResult result;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < matrix.n_features(); ++c) {
    std::size_t missing = 0;
    for (std::size_t r = 0; r < matrix.rows(); ++r)
      missing += is_missing(matrix.at(r, c)) ? 1 : 0;
    const double fraction =
        matrix.rows() == 0 ? 0.0 : double(missing) / double(matrix.rows());
    if (fraction > missing_fraction_threshold)
      result.removed.push_back(matrix.feature_names[c]);
    else
      keep.push_back(c);
  }
  if (keep.empty() && matrix.n_features() > 0)
    throw DataError(fmt::format(
        "every feature exceeds the missing-fraction threshold {}",
        missing_fraction_threshold));
  result.matrix = select_columns(matrix, keep);
  return result;
}

Quartiles exclusive_quartiles(std::span<const double> sorted) {
  if (sorted.empty()) throw ArgumentError("quartiles of an empty sample");
  const auto n = sorted.size();
  auto at_position = [&](double p) {
    const double h = p * static_cast<double>(n + 1);
    if (h <= 1.0) return sorted.front();
    if (h >= static_cast<double>(n)) return sorted.back();
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
  };
  return {at_position(0.25), at_position(0.75)};
}

IqrResult iqr_outlier_filter(const InstanceMatrix& matrix, double k) {
  if (!(k > 0.0)) throw ArgumentError("IQR multiplier k must be positive");
  IqrResult result;
  result.matrix = matrix;
  std::vector<double> column;
  for (std::size_t c = 0; c < matrix.n_features(); ++c) {
    column.clear();
    for (std::size_t r = 0; r < matrix.rows(); ++r)
      if (!is_missing(matrix.at(r, c))) column.push_back(matrix.at(r, c));
    if (column.empty()) continue;
    std::sort(column.begin(), column.end());
    const auto q = exclusive_quartiles(column);
    const double iqr = q.q3 - q.q1;
    result.fences.push_back(
        {matrix.feature_names[c], q.q1, q.q3, q.q1 - k * iqr, q.q3 + k * iqr});
  }
  result.masked = apply_fences(result.matrix, result.fences);
  return result;
}

std::size_t apply_fences(InstanceMatrix& matrix,
                         const std::vector<IqrFence>& fences) {
  std::size_t masked = 0;
  for (const auto& fence : fences) {
    const auto it = std::find(matrix.feature_names.begin(),
                              matrix.feature_names.end(), fence.feature);
    if (it == matrix.feature_names.end()) continue;
    const auto c = static_cast<std::size_t>(it - matrix.feature_names.begin());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      double& v = matrix.at(r, c);
      if (!is_missing(v) && (v < fence.lower || v > fence.upper)) {
        v = kMissing;
        ++masked;
      }
    }
  }
  return masked;
}

FeatureCatalog with_delta_features(const FeatureCatalog& catalog) {
  FeatureCatalog out = catalog;
  for (const auto& name : catalog.time_varying_set)
    out.names.push_back(name + "_delta");
  return out;
}

PatientRecord add_delta_features(const PatientRecord& record,
                                 const FeatureCatalog& catalog) {
  std::vector<std::size_t> columns;
  for (const auto& name : catalog.time_varying_set)
    columns.push_back(catalog.require_index(name));
  PatientRecord out = record;
  for (std::size_t t = 0; t < out.hour_count(); ++t) {
    for (auto c : columns) {
      double delta = 0.0;
      if (t > 0) {
        const double prev = record.hours[t - 1][c];
        const double cur = record.hours[t][c];
        delta = is_missing(prev) || is_missing(cur) ? kMissing : cur - prev;
      }
      out.hours[t].push_back(delta);
    }
  }
  return out;
}

std::string to_string(AblationKind kind) {
  switch (kind) {
    case AblationKind::kNone: return "none";
    case AblationKind::kDropSparse: return "drop-sparse";
    case AblationKind::kIqr: return "iqr";
    case AblationKind::kDelta: return "delta";
  }
  return "none";
}

AblationKind parse_ablation_kind(std::string_view text) {
  if (text == "none") return AblationKind::kNone;
  if (text == "drop-sparse") return AblationKind::kDropSparse;
  if (text == "iqr") return AblationKind::kIqr;
  if (text == "delta") return AblationKind::kDelta;
  throw ConfigError("unknown ablation '" + std::string(text) +
                    "' (expected none, drop-sparse, iqr or delta)");
}

namespace {

PatientRecord prepare_record(const PatientRecord& raw,
                             const FeatureCatalog& catalog,
                             const FeatureCatalog& widened,
                             const ImputationPolicy& imputation,
                             const WeightingPolicy& weighting,
                             bool delta) {
  auto rec = impute_patient(raw, catalog, imputation);
  if (delta) rec = add_delta_features(rec, catalog);
  apply_feature_weights(rec, widened, weighting);
  return rec;
}

}  // namespace

PreparedData fit_preprocess(const Cohort& cohort,
                            const PreprocessOptions& options) {
  options.imputation.validate();
  const bool delta = options.ablation.kind == AblationKind::kDelta;

  Cohort work;
  work.catalog = delta ? with_delta_features(cohort.catalog) : cohort.catalog;
  work.patients.reserve(cohort.size());
  for (const auto& p : cohort.patients)
    work.patients.push_back(prepare_record(p, cohort.catalog, work.catalog,
                                           options.imputation,
                                           options.weighting, delta));

  PreparedData out;
  out.matrix = flatten(work);
  out.state.catalog = cohort.catalog;
  out.state.imputation = options.imputation;
  out.state.weighting = options.weighting;
  out.state.ablation = options.ablation;

  if (options.ablation.kind == AblationKind::kDropSparse) {
    auto dropped =
        drop_sparse_features(out.matrix, options.ablation.missing_threshold);
    out.matrix = std::move(dropped.matrix);
    out.state.removed_features = std::move(dropped.removed);
  } else if (options.ablation.kind == AblationKind::kIqr) {
    auto filtered = iqr_outlier_filter(out.matrix, options.ablation.iqr_k);
    out.matrix = std::move(filtered.matrix);
    out.state.fences = std::move(filtered.fences);
  }
  out.state.feature_names = out.matrix.feature_names;
  return out;
}

InstanceMatrix transform_patient(const PatientRecord& record,
                                 const PreprocessState& state) {
  for (const auto& hour : record.hours)
    if (hour.size() != state.catalog.size())
      throw DataError("patient " + record.id + " has " +
                      std::to_string(hour.size()) + " features, model expects " +
                      std::to_string(state.catalog.size()));
  const bool delta = state.ablation.kind == AblationKind::kDelta;
  const auto widened = delta ? with_delta_features(state.catalog) : state.catalog;
  const auto rec = prepare_record(record, state.catalog, widened,
                                  state.imputation, state.weighting, delta);

  std::vector<std::size_t> columns;
  for (const auto& name : state.feature_names) {
    const auto idx = widened.index_of(name);
    if (!idx) throw ConfigError("model feature '" + name + "' is not produced by its catalog");
    columns.push_back(*idx);
  }
  InstanceMatrix m;
  m.feature_names = state.feature_names;
  m.values.reserve(rec.hour_count() * columns.size());
  std::vector<double> row(columns.size());
  for (std::size_t t = 0; t < rec.hour_count(); ++t) {
    for (std::size_t j = 0; j < columns.size(); ++j) row[j] = rec.hours[t][columns[j]];
    m.append_row(row, rec.labels[t], 0, t);
  }
  apply_fences(m, state.fences);
  return m;
}

std::string preprocess_report(const PreprocessState& state) {
  std::ostringstream os;
  os << "ablation: " << to_string(state.ablation.kind) << "\n";
  os << "features (" << state.feature_names.size() << "):";
  for (const auto& f : state.feature_names) os << ' ' << f;
  os << "\n";
  if (state.ablation.kind == AblationKind::kDropSparse) {
    os << "missing-fraction threshold: " << state.ablation.missing_threshold << "\n";
    os << "removed features (" << state.removed_features.size() << "):";
    for (const auto& f : state.removed_features) os << ' ' << f;
    os << "\n";
  }
  if (state.ablation.kind == AblationKind::kIqr) {
    os << "iqr k: " << state.ablation.iqr_k << "\n";
    os << "fences (feature q1 q3 lower upper):\n";
    for (const auto& f : state.fences)
      os << fmt::format("  {} {} {} {} {}\n", f.feature, f.q1, f.q3, f.lower, f.upper);
  }
  return os.str();
}

}  // namespace sepsis
