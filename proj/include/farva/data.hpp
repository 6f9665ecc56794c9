#ifndef FARVA_DATA_HPP
#define FARVA_DATA_HPP

/// Symptom schema, mixed-type links between observed symptoms and latent
/// Gaussian coordinates, and the dataset container.
///
/// Observed values are held in "model space": binary as 0/1, counts as
/// non-negative integers, continuous values after the optional log and the
/// unit-variance rescaling. Categorical symptoms are expanded into T-1 binary
/// columns, so every downstream module only sees binary, count and continuous
/// columns.

#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "farva/numerics.hpp"

namespace farva {

class data_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class zero_variance_error : public data_error {
 public:
  using data_error::data_error;
};

enum class SymptomKind { binary, continuous_identity, continuous_log, count, categorical };

std::string to_string(SymptomKind kind);
SymptomKind parse_symptom_kind(const std::string& text);

struct SymptomSpec {
  std::string name;
  SymptomKind kind = SymptomKind::binary;
  /// Categorical only: declared labels, baseline first.
  std::vector<std::string> categories;
};

using Schema = std::vector<SymptomSpec>;

/// Throws data_error on duplicate names or categorical symptoms with T < 2.
void validate_schema(const Schema& schema);

enum class ColumnKind { binary, continuous, count };

/// One latent coordinate after categorical expansion.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::binary;
  int symptom = 0;       // index into the schema
  bool log_scale = false;
  double scale = 1.0;    // continuous: model value = transformed raw / scale
  std::string category;  // categorical dummy: the non-baseline label it flags

  /// Noise variance is fixed at 1 for binary (and categorical dummy) columns.
  bool fixed_variance() const { return kind == ColumnKind::binary; }
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return v != v; }

/// The set of latent values compatible with one observed cell.
struct LatentConstraint {
  enum class Kind { point, interval, free };

  Kind kind = Kind::free;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;

  static LatentConstraint point(double value);
  static LatentConstraint interval(double lo, double hi, bool lo_closed, bool hi_closed);
  static LatentConstraint free() { return {}; }

  bool contains(double z) const;

  /// Draws from N(mean, sd^2) restricted to the constraint.
  double sample(double mean, double sd, Rng& rng) const;
};

/// Categorical value to T-1 dummies in declared non-baseline order. A missing
/// value gives T-1 missing cells.
std::vector<double> expand_categorical(const SymptomSpec& spec,
                                       const std::optional<std::string>& value);

/// Inverse of expand_categorical. Returns nullopt when any dummy is missing.
std::optional<std::string> collapse_categorical(const SymptomSpec& spec,
                                                std::span<const double> dummies);

struct StandardizedColumn {
  std::vector<double> values;
  double scale = 1.0;
};

/// Divides a continuous column by its sample standard deviation (after a log
/// when `log_scale`). Missing entries stay missing.
StandardizedColumn standardize_continuous(std::span<const double> column, bool log_scale);

LatentConstraint encode_constraint(const Column& column, double value);

/// s = f(z) for the column's link.
double decode_latent(const Column& column, double z);

/// Raw symptom cells as text, one entry per schema symptom; "" is missing.
using RawRow = std::vector<std::string>;

struct Dataset {
  Schema schema;
  std::vector<Column> columns;
  std::vector<std::string> ids;
  /// Names of the non-intercept covariates, i.e. columns 1.. of x.
  std::vector<std::string> covariate_names;
  Eigen::MatrixXd x;  // n x B, column 0 is the intercept
  Eigen::MatrixXd s;  // n x P, model space, kMissing for missing
  /// n x P raw continuous values as read, before log and rescaling; kMissing
  /// in other columns. Kept so re-serialization is exact.
  Eigen::MatrixXd raw;
  std::vector<int> y; // 0-based cause, -1 when unknown
  int n_causes = 1;
  std::vector<LatentConstraint> constraints;  // row-major n x P

  int n() const { return static_cast<int>(s.rows()); }
  int P() const { return static_cast<int>(columns.size()); }
  int B() const { return static_cast<int>(x.cols()); }
  const LatentConstraint& constraint(int i, int j) const { return constraints[i * P() + j]; }
  std::vector<int> unknown_rows() const;
  std::vector<int> known_rows() const;
};

struct DatasetInput {
  Schema schema;
  std::vector<std::string> ids;
  std::vector<std::string> covariate_names;
  Eigen::MatrixXd covariates;  // n x (B-1), no intercept
  std::vector<RawRow> symptoms;
  std::vector<int> labels;     // 0-based or -1
  int n_causes = 1;
};

/// Parses, transforms and encodes raw input. When `reference` is given its
/// continuous scale factors are reused instead of being fit (test data).
Dataset build_dataset(const DatasetInput& input, const std::vector<Column>* reference = nullptr);

/// Raw text cells: continuous cells come from `raw` when present, otherwise
/// from inverting the transform.
std::vector<RawRow> raw_symptoms(const Dataset& data);

/// Rows in the given order; schema and scale factors are shared.
Dataset subset_rows(const Dataset& data, std::span<const int> rows);

/// Same rows with covariates dropped (x = intercept column only).
Dataset intercept_only(const Dataset& data);

/// Recomputes `constraints` from `s`.
void refresh_constraints(Dataset& data);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// Expands a schema into latent columns with unit scale factors.
std::vector<Column> expand_schema(const Schema& schema);

}  // namespace farva

#endif  // FARVA_DATA_HPP
