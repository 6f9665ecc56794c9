#ifndef FARVA_IO_HPP
#define FARVA_IO_HPP

/// File formats: dataset CSV with a schema sidecar, the binary posterior
/// container, prediction tables and JSON reports.
///
/// Dataset CSV header: id, cause, x_<covariate>..., <symptom>... . Causes are
/// 1-based; an empty cell means unknown cause or missing symptom.
///
/// Schema sidecar, one entry per line ('#' starts a comment):
///   @causes = 4
///   fever = binary
///   duration = continuous-log
///   region = categorical: north, south, east
///
/// Posterior file: "FARVAPST", u32 version, u32 byte-order marker 0x01020304,
/// u64 metadata length, UTF-8 JSON metadata, then little-endian payload
/// (doubles and i32 labels) whose layout the metadata describes.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "farva/data.hpp"
#include "farva/model.hpp"
#include "farva/predict.hpp"

namespace farva {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SchemaFile {
  Schema schema;
  int n_causes = 0;
};

SchemaFile parse_schema(std::istream& in);
SchemaFile read_schema(const std::filesystem::path& path);
void write_schema(std::ostream& out, const SchemaFile& schema);
void write_schema(const std::filesystem::path& path, const SchemaFile& schema);

/// Splits one CSV record; supports double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a dataset CSV against a schema. Every x_ column is returned as a
/// covariate; symptom columns must match the schema names in order.
DatasetInput parse_dataset_csv(std::istream& in, const SchemaFile& schema);
DatasetInput read_dataset_csv(const std::filesystem::path& path, const SchemaFile& schema);

/// Keeps only the named covariates (with or without the x_ prefix), in the
/// given order. Throws data_error when a name is absent.
void select_covariates(DatasetInput& input, const std::vector<std::string>& names);

void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

struct TrainedModel {
  PosteriorSamples samples;
  Schema schema;
  std::vector<Column> columns;                // with fitted scale factors
  std::vector<std::string> covariate_names;
  std::vector<std::string> unknown_ids;       // training rows with unknown cause
  /// unknown_labels[s][u]: imputed cause of unknown row u in snapshot s.
  std::vector<std::vector<int>> unknown_labels;
  Eigen::VectorXd shrinkage;                  // shrinkage_diagnostic
  Eigen::VectorXd factor_norms;               // factor_diagnostic at the mean covariate
};

/// Bundles a chain with the training dataset's schema and scale factors.
TrainedModel make_trained_model(PosteriorSamples samples, const Dataset& train);

void write_posterior(std::ostream& out, const TrainedModel& model);
void write_posterior(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel read_posterior(std::istream& in);
TrainedModel read_posterior(const std::filesystem::path& path);

/// id, prob_1..prob_C, top_cause (1-based).
void write_predictions(std::ostream& out, const std::vector<std::string>& ids,
                       const CodPosterior& posterior);

struct PredictionTable {
  std::vector<std::string> ids;
  Eigen::MatrixXd probs;
  std::vector<int> top;  // 0-based
};

PredictionTable read_predictions(const std::filesystem::path& path);

struct LabelTable {
  std::vector<std::string> ids;
  std::vector<int> labels;  // 0-based, -1 unknown
};

/// Reads the id and cause columns of any CSV that has them (dataset files
/// included).
LabelTable read_labels(const std::filesystem::path& path);

std::string csmf_json(const CsmfEstimate& csmf);

struct Metrics {
  double acc1 = 0.0;
  double acc_csmf = 0.0;
  double ccc = 0.0;
  int n = 0;
};

std::string metrics_json(const Metrics& metrics);

}  // namespace farva

#endif  // FARVA_IO_HPP
