#include "farva/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace farva {

namespace {

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw data_error("cannot parse '" + text + "' as a number for " + what);
  }
  return v;
}

}  // namespace

std::string to_string(SymptomKind kind) {
  switch (kind) {
    case SymptomKind::binary: return "binary";
    case SymptomKind::continuous_identity: return "continuous";
    case SymptomKind::continuous_log: return "continuous-log";
    case SymptomKind::count: return "count";
    case SymptomKind::categorical: return "categorical";
  }
  return "binary";
}

SymptomKind parse_symptom_kind(const std::string& text) {
  if (text == "binary") return SymptomKind::binary;
  if (text == "continuous" || text == "continuous-identity") return SymptomKind::continuous_identity;
  if (text == "continuous-log") return SymptomKind::continuous_log;
  if (text == "count") return SymptomKind::count;
  if (text == "categorical") return SymptomKind::categorical;
  throw data_error("unknown symptom kind '" + text + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void validate_schema(const Schema& schema) {
  if (schema.empty()) throw data_error("schema declares no symptoms");
  std::set<std::string> names;
  for (const auto& spec : schema) {
    if (spec.name.empty()) throw data_error("symptom with empty name");
    if (!names.insert(spec.name).second) throw data_error("duplicate symptom name '" + spec.name + "'");
    if (spec.kind == SymptomKind::categorical) {
      if (spec.categories.size() < 2) {
        throw data_error("categorical symptom '" + spec.name + "' needs at least 2 categories");
      }
      std::set<std::string> labels(spec.categories.begin(), spec.categories.end());
      if (labels.size() != spec.categories.size()) {
        throw data_error("categorical symptom '" + spec.name + "' repeats a category");
      }
    }
  }
}

LatentConstraint LatentConstraint::point(double value) {
  if (!std::isfinite(value)) throw data_error("point constraint must be finite");
  LatentConstraint c;
  c.kind = Kind::point;
  c.lo = c.hi = value;
  c.lo_closed = c.hi_closed = true;
  return c;
}

LatentConstraint LatentConstraint::interval(double lo, double hi, bool lo_closed, bool hi_closed) {
  if (!(lo < hi)) throw data_error("interval constraint needs lo < hi");
  LatentConstraint c;
  c.kind = Kind::interval;
  c.lo = lo;
  c.hi = hi;
  c.lo_closed = lo_closed && std::isfinite(lo);
  c.hi_closed = hi_closed && std::isfinite(hi);
  return c;
}

bool LatentConstraint::contains(double z) const {
  if (!std::isfinite(z)) return false;
  switch (kind) {
    case Kind::free: return true;
    case Kind::point: return z == lo;
    case Kind::interval: {
      const bool above = lo_closed ? z >= lo : z > lo;
      const bool below = hi_closed ? z <= hi : z < hi;
      return above && below;
    }
  }
  return false;
}

double LatentConstraint::sample(double mean, double sd, Rng& rng) const {
  switch (kind) {
    case Kind::point: return lo;
    case Kind::free: return sample_normal(mean, sd, rng);
    case Kind::interval: break;
  }
  double z = sample_truncated_normal(mean, sd, lo, hi, rng);
  // Open endpoints are measure-zero but reachable through rounding.
  if (!lo_closed && z <= lo) z = std::nextafter(lo, hi);
  if (!hi_closed && z >= hi) z = std::nextafter(hi, lo);
  return z;
}

std::vector<double> expand_categorical(const SymptomSpec& spec,
                                       const std::optional<std::string>& value) {
  const std::size_t t = spec.categories.size();
  if (spec.kind != SymptomKind::categorical || t < 2) {
    throw data_error("expand_categorical: '" + spec.name + "' is not categorical");
  }
  if (!value) return std::vector<double>(t - 1, kMissing);
  const auto it = std::find(spec.categories.begin(), spec.categories.end(), *value);
  if (it == spec.categories.end()) {
    throw data_error("undeclared category '" + *value + "' for symptom '" + spec.name + "'");
  }
  std::vector<double> out(t - 1, 0.0);
  const auto pos = static_cast<std::size_t>(it - spec.categories.begin());
  if (pos > 0) out[pos - 1] = 1.0;
  return out;
}

std::optional<std::string> collapse_categorical(const SymptomSpec& spec,
                                                std::span<const double> dummies) {
  if (dummies.size() + 1 != spec.categories.size()) {
    throw data_error("collapse_categorical: wrong dummy count for '" + spec.name + "'");
  }
  std::optional<std::string> out = spec.categories.front();
  for (std::size_t k = 0; k < dummies.size(); ++k) {
    if (is_missing(dummies[k])) return std::nullopt;
    if (dummies[k] == 1.0) out = spec.categories[k + 1];
  }
  return out;
}

StandardizedColumn standardize_continuous(std::span<const double> column, bool log_scale) {
  StandardizedColumn out;
  out.values.assign(column.begin(), column.end());
  double sum = 0.0;
  int count = 0;
  for (double& v : out.values) {
    if (is_missing(v)) continue;
    if (log_scale) {
      if (!(v > 0.0)) throw data_error("log-scale continuous value must be positive");
      v = std::log(v);
    }
    sum += v;
    ++count;
  }
  if (count < 2) throw data_error("standardize_continuous: need at least two observed values");
  const double mean = sum / count;
  double ss = 0.0;
  for (double v : out.values) {
    if (!is_missing(v)) ss += (v - mean) * (v - mean);
  }
  const double var = ss / (count - 1);
  if (!(var > 0.0)) throw zero_variance_error("standardize_continuous: zero variance");
  out.scale = std::sqrt(var);
  if (out.scale != 1.0) {
    for (double& v : out.values) {
      if (!is_missing(v)) v /= out.scale;
    }
  }
  return out;
}

LatentConstraint encode_constraint(const Column& column, double value) {
  if (is_missing(value)) return LatentConstraint::free();
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (column.kind) {
    case ColumnKind::binary:
      if (value == 1.0) return LatentConstraint::interval(0.0, inf, false, false);
      if (value == 0.0) return LatentConstraint::interval(-inf, 0.0, false, true);
      throw data_error("binary column '" + column.name + "' holds a value other than 0/1");
    case ColumnKind::count: {
      if (value < 0.0) throw data_error("negative count in column '" + column.name + "'");
      if (value != std::floor(value)) {
        throw data_error("non-integer count in column '" + column.name + "'");
      }
      if (value == 0.0) return LatentConstraint::interval(-inf, 0.0, false, false);
      return LatentConstraint::interval(value - 1.0, value, true, false);
    }
    case ColumnKind::continuous:
      return LatentConstraint::point(value);
  }
  return LatentConstraint::free();
}

double decode_latent(const Column& column, double z) {
  switch (column.kind) {
    case ColumnKind::binary: return z > 0.0 ? 1.0 : 0.0;
    case ColumnKind::count: return z < 0.0 ? 0.0 : std::floor(z) + 1.0;
    case ColumnKind::continuous: return z;
  }
  return z;
}

std::vector<int> Dataset::unknown_rows() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(y.size()); ++i) {
    if (y[i] < 0) out.push_back(i);
  }
  return out;
}

std::vector<int> Dataset::known_rows() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(y.size()); ++i) {
    if (y[i] >= 0) out.push_back(i);
  }
  return out;
}

std::vector<Column> expand_schema(const Schema& schema) {
  std::vector<Column> columns;
  for (int k = 0; k < static_cast<int>(schema.size()); ++k) {
    const auto& spec = schema[k];
    Column col;
    col.name = spec.name;
    col.symptom = k;
    switch (spec.kind) {
      case SymptomKind::binary:
        col.kind = ColumnKind::binary;
        columns.push_back(col);
        break;
      case SymptomKind::count:
        col.kind = ColumnKind::count;
        columns.push_back(col);
        break;
      case SymptomKind::continuous_identity:
      case SymptomKind::continuous_log:
        col.kind = ColumnKind::continuous;
        col.log_scale = spec.kind == SymptomKind::continuous_log;
        columns.push_back(col);
        break;
      case SymptomKind::categorical:
        for (std::size_t t = 1; t < spec.categories.size(); ++t) {
          Column dummy = col;
          dummy.kind = ColumnKind::binary;
          dummy.category = spec.categories[t];
          dummy.name = spec.name + "=" + spec.categories[t];
          columns.push_back(dummy);
        }
        break;
    }
  }
  return columns;
}

void refresh_constraints(Dataset& data) {
  const int n = data.n();
  const int p = data.P();
  data.constraints.assign(static_cast<std::size_t>(n) * p, LatentConstraint::free());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      data.constraints[i * p + j] = encode_constraint(data.columns[j], data.s(i, j));
    }
  }
}

Dataset build_dataset(const DatasetInput& input, const std::vector<Column>* reference) {
  validate_schema(input.schema);
  const int n = static_cast<int>(input.symptoms.size());
  if (static_cast<int>(input.ids.size()) != n || static_cast<int>(input.labels.size()) != n) {
    throw data_error("ids, labels and symptom rows disagree in length");
  }
  if (input.covariates.rows() != n ||
      input.covariates.cols() != static_cast<Eigen::Index>(input.covariate_names.size())) {
    throw data_error("covariate matrix does not match row count or covariate names");
  }
  if (input.n_causes < 1) throw data_error("cause count must be at least 1");

  Dataset data;
  data.schema = input.schema;
  data.columns = expand_schema(input.schema);
  data.ids = input.ids;
  data.covariate_names = input.covariate_names;
  data.n_causes = input.n_causes;
  data.y = input.labels;
  for (int label : data.y) {
    if (label < -1 || label >= data.n_causes) throw data_error("cause label out of range");
  }
  data.x.resize(n, 1 + input.covariates.cols());
  data.x.col(0).setOnes();
  data.x.rightCols(input.covariates.cols()) = input.covariates;

  const int p = data.P();
  if (reference && static_cast<int>(reference->size()) != p) {
    throw data_error("reference columns do not match schema");
  }
  data.s.setConstant(n, p, kMissing);
  data.raw.setConstant(n, p, kMissing);
  const int n_symptoms = static_cast<int>(input.schema.size());
  int j = 0;
  for (int k = 0; k < n_symptoms; ++k) {
    const auto& spec = input.schema[k];
    auto cell = [&](int i) -> const std::string& {
      if (static_cast<int>(input.symptoms[i].size()) != n_symptoms) {
        throw data_error("row " + std::to_string(i) + " has the wrong number of symptoms");
      }
      return input.symptoms[i][k];
    };
    switch (spec.kind) {
      case SymptomKind::binary:
        for (int i = 0; i < n; ++i) {
          const auto& t = cell(i);
          if (t.empty()) continue;
          if (t != "0" && t != "1") throw data_error("binary symptom '" + spec.name + "' got '" + t + "'");
          data.s(i, j) = t == "1" ? 1.0 : 0.0;
        }
        ++j;
        break;
      case SymptomKind::count:
        for (int i = 0; i < n; ++i) {
          const auto& t = cell(i);
          if (t.empty()) continue;
          const double v = parse_number(t, spec.name);
          if (v < 0.0) throw data_error("negative count for symptom '" + spec.name + "'");
          if (v != std::floor(v)) throw data_error("non-integer count for symptom '" + spec.name + "'");
          data.s(i, j) = v;
        }
        ++j;
        break;
      case SymptomKind::continuous_identity:
      case SymptomKind::continuous_log: {
        const bool log_scale = spec.kind == SymptomKind::continuous_log;
        std::vector<double> raw(n, kMissing);
        for (int i = 0; i < n; ++i) {
          const auto& t = cell(i);
          if (!t.empty()) raw[i] = parse_number(t, spec.name);
          data.raw(i, j) = raw[i];
        }
        if (reference) {
          const double scale = (*reference)[j].scale;
          for (int i = 0; i < n; ++i) {
            if (is_missing(raw[i])) continue;
            double v = raw[i];
            if (log_scale) {
              if (!(v > 0.0)) throw data_error("log-scale value must be positive for '" + spec.name + "'");
              v = std::log(v);
            }
            data.s(i, j) = v / scale;
          }
          data.columns[j].scale = scale;
        } else {
          const auto standardized = standardize_continuous(raw, log_scale);
          for (int i = 0; i < n; ++i) data.s(i, j) = standardized.values[i];
          data.columns[j].scale = standardized.scale;
        }
        ++j;
        break;
      }
      case SymptomKind::categorical: {
        const int t = static_cast<int>(spec.categories.size());
        for (int i = 0; i < n; ++i) {
          const auto& text = cell(i);
          const auto dummies =
              expand_categorical(spec, text.empty() ? std::nullopt : std::optional(text));
          for (int d = 0; d < t - 1; ++d) data.s(i, j + d) = dummies[d];
        }
        j += t - 1;
        break;
      }
    }
  }
  refresh_constraints(data);
  return data;
}

std::vector<RawRow> raw_symptoms(const Dataset& data) {
  const int n = data.n();
  const int n_symptoms = static_cast<int>(data.schema.size());
  std::vector<RawRow> rows(n, RawRow(n_symptoms));
  int j = 0;
  for (int k = 0; k < n_symptoms; ++k) {
    const auto& spec = data.schema[k];
    if (spec.kind == SymptomKind::categorical) {
      const int width = static_cast<int>(spec.categories.size()) - 1;
      std::vector<double> dummies(width);
      for (int i = 0; i < n; ++i) {
        for (int d = 0; d < width; ++d) dummies[d] = data.s(i, j + d);
        rows[i][k] = collapse_categorical(spec, dummies).value_or("");
      }
      j += width;
      continue;
    }
    const Column& col = data.columns[j];
    for (int i = 0; i < n; ++i) {
      const double v = data.s(i, j);
      if (is_missing(v)) continue;
      if (col.kind == ColumnKind::continuous) {
        if (data.raw.rows() == n && !is_missing(data.raw(i, j))) {
          rows[i][k] = format_double(data.raw(i, j));
        } else {
          const double t = v * col.scale;
          rows[i][k] = format_double(col.log_scale ? std::exp(t) : t);
        }
      } else {
        rows[i][k] = format_double(v);
      }
    }
    ++j;
  }
  return rows;
}

Dataset subset_rows(const Dataset& data, std::span<const int> rows) {
  Dataset out;
  out.schema = data.schema;
  out.columns = data.columns;
  out.covariate_names = data.covariate_names;
  out.n_causes = data.n_causes;
  const int m = static_cast<int>(rows.size());
  const int p = data.P();
  out.x.resize(m, data.B());
  out.s.resize(m, p);
  out.raw.setConstant(m, p, kMissing);
  out.ids.reserve(m);
  out.y.reserve(m);
  out.constraints.reserve(static_cast<std::size_t>(m) * p);
  for (int r = 0; r < m; ++r) {
    const int i = rows[r];
    if (i < 0 || i >= data.n()) throw data_error("subset_rows: row index out of range");
    out.x.row(r) = data.x.row(i);
    out.s.row(r) = data.s.row(i);
    if (data.raw.rows() == data.n()) out.raw.row(r) = data.raw.row(i);
    out.ids.push_back(data.ids[i]);
    out.y.push_back(data.y[i]);
    for (int j = 0; j < p; ++j) out.constraints.push_back(data.constraint(i, j));
  }
  return out;
}

Dataset intercept_only(const Dataset& data) {
  Dataset out = data;
  out.covariate_names.clear();
  out.x = Eigen::MatrixXd::Ones(data.n(), 1);
  return out;
}

}  // namespace farva
