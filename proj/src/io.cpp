#include "farva/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "farva/gibbs.hpp"

namespace farva {

namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'F', 'A', 'R', 'V', 'A', 'P', 'S', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kByteOrder = 0x01020304u;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_trimmed(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

int parse_int(const std::string& s, const std::string& what) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw data_error(what + ": '" + s + "' is not an integer");
  }
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw data_error(what + ": '" + s + "' is not a finite number");
  }
  return v;
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out << ',';
    out << quote_field(fields[k]);
  }
  out << '\n';
}

// Little-endian payload encoding, independent of the host byte order.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { bytes(v, 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void i32(std::int32_t v) { bytes(static_cast<std::uint32_t>(v), 4); }
  void f64(double v) { bytes(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

  void mat(const Eigen::MatrixXd& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) f64(m.data()[k]);
  }
  void vec(const Eigen::VectorXd& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) f64(v(k));
  }

 private:
  void bytes(std::uint64_t v, int n) {
    char buf[8];
    for (int k = 0; k < n; ++k) buf[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
    out_.write(buf, n);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(bytes(4))); }
  double f64() { return std::bit_cast<double>(bytes(8)); }
  void raw(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw io_error("posterior file is truncated");
  }

  Eigen::MatrixXd mat(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = f64();
    return m;
  }
  Eigen::VectorXd vec(int n) {
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v(k) = f64();
    return v;
  }

 private:
  std::uint64_t bytes(int n) {
    unsigned char buf[8];
    raw(reinterpret_cast<char*>(buf), static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int k = 0; k < n; ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
    return v;
  }
  std::istream& in_;
};

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

// ---- schema ----

SchemaFile parse_schema(std::istream& in) {
  SchemaFile out;
  std::string line;
  int lineno = 0;
  while (read_line(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "schema line " + std::to_string(lineno);
    if (eq == std::string::npos) throw data_error(where + ": expected 'name = kind'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw data_error(where + ": empty symptom name");
    if (key == "@causes") {
      out.n_causes = parse_int(value, where);
      continue;
    }
    if (key[0] == '@') throw data_error(where + ": unknown directive '" + key + "'");
    SymptomSpec spec;
    spec.name = key;
    const auto colon = value.find(':');
    spec.kind = parse_symptom_kind(trim(value.substr(0, colon)));
    if (spec.kind == SymptomKind::categorical) {
      if (colon == std::string::npos) throw data_error(where + ": categorical symptom needs labels");
      spec.categories = split_trimmed(value.substr(colon + 1), ',');
    } else if (colon != std::string::npos) {
      throw data_error(where + ": only categorical symptoms take labels");
    }
    out.schema.push_back(std::move(spec));
  }
  if (out.n_causes < 1) throw data_error("schema: missing or invalid '@causes = C' line");
  validate_schema(out.schema);
  return out;
}

SchemaFile read_schema(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_schema(in);
}

void write_schema(std::ostream& out, const SchemaFile& schema) {
  out << "@causes = " << schema.n_causes << '\n';
  for (const auto& spec : schema.schema) {
    out << spec.name << " = " << to_string(spec.kind);
    if (spec.kind == SymptomKind::categorical) {
      out << ':';
      for (std::size_t k = 0; k < spec.categories.size(); ++k) out << (k ? ", " : " ") << spec.categories[k];
    }
    out << '\n';
  }
}

void write_schema(const std::filesystem::path& path, const SchemaFile& schema) {
  auto out = open_out(path);
  write_schema(out, schema);
  finish(out, path);
}

// ---- dataset CSV ----

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw data_error("unterminated quote in CSV record");
  out.push_back(std::move(cur));
  return out;
}

DatasetInput parse_dataset_csv(std::istream& in, const SchemaFile& schema) {
  std::string line;
  if (!read_line(in, line)) throw data_error("dataset: empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "cause") {
    throw data_error("dataset: header must start with 'id,cause'");
  }
  std::size_t col = 2;
  DatasetInput out;
  out.schema = schema.schema;
  out.n_causes = schema.n_causes;
  while (col < header.size() && header[col].rfind("x_", 0) == 0) {
    out.covariate_names.push_back(header[col].substr(2));
    ++col;
  }
  const std::size_t n_cov = out.covariate_names.size();
  const std::size_t p = schema.schema.size();
  if (header.size() - col != p) {
    throw data_error("schema mismatch: dataset has " + std::to_string(header.size() - col) +
                     " symptom columns, schema declares " + std::to_string(p));
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (header[col + j] != schema.schema[j].name) {
      throw data_error("schema mismatch: column '" + header[col + j] + "' where schema expects '" +
                       schema.schema[j].name + "'");
    }
  }
  std::vector<std::vector<double>> cov_rows;
  int lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    const std::string where = "dataset line " + std::to_string(lineno);
    if (fields.size() != header.size()) {
      throw data_error(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    out.ids.push_back(fields[0]);
    const std::string cause = trim(fields[1]);
    if (cause.empty()) {
      out.labels.push_back(-1);
    } else {
      const int c = parse_int(cause, where);
      if (c < 1 || c > schema.n_causes) throw data_error(where + ": cause " + cause + " out of range");
      out.labels.push_back(c - 1);
    }
    std::vector<double> cov(n_cov);
    for (std::size_t b = 0; b < n_cov; ++b) cov[b] = parse_double(trim(fields[2 + b]), where);
    cov_rows.push_back(std::move(cov));
    out.symptoms.emplace_back(fields.begin() + static_cast<std::ptrdiff_t>(col), fields.end());
  }
  out.covariates.resize(static_cast<Eigen::Index>(cov_rows.size()), static_cast<Eigen::Index>(n_cov));
  for (std::size_t i = 0; i < cov_rows.size(); ++i) {
    for (std::size_t b = 0; b < n_cov; ++b) out.covariates(i, b) = cov_rows[i][b];
  }
  return out;
}

DatasetInput read_dataset_csv(const std::filesystem::path& path, const SchemaFile& schema) {
  auto in = open_in(path);
  return parse_dataset_csv(in, schema);
}

void select_covariates(DatasetInput& input, const std::vector<std::string>& names) {
  Eigen::MatrixXd picked(input.covariates.rows(), static_cast<Eigen::Index>(names.size()));
  std::vector<std::string> kept;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const std::string name = names[k].rfind("x_", 0) == 0 ? names[k].substr(2) : names[k];
    const auto it = std::find(input.covariate_names.begin(), input.covariate_names.end(), name);
    if (it == input.covariate_names.end()) throw data_error("covariate 'x_" + name + "' not found in dataset");
    picked.col(static_cast<Eigen::Index>(k)) = input.covariates.col(it - input.covariate_names.begin());
    kept.push_back(name);
  }
  input.covariates = std::move(picked);
  input.covariate_names = std::move(kept);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  std::vector<std::string> header = {"id", "cause"};
  for (const auto& name : data.covariate_names) header.push_back("x_" + name);
  for (const auto& spec : data.schema) header.push_back(spec.name);
  write_row(out, header);
  const auto raw = raw_symptoms(data);
  for (int i = 0; i < data.n(); ++i) {
    std::vector<std::string> row = {data.ids[i], data.y[i] < 0 ? "" : std::to_string(data.y[i] + 1)};
    for (int b = 1; b < data.B(); ++b) row.push_back(format_double(data.x(i, b)));
    row.insert(row.end(), raw[i].begin(), raw[i].end());
    write_row(out, row);
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_out(path);
  write_dataset_csv(out, data);
  finish(out, path);
}

// ---- posterior container ----

TrainedModel make_trained_model(PosteriorSamples samples, const Dataset& train) {
  if (samples.snapshots.empty()) throw std::invalid_argument("make_trained_model: no snapshots");
  TrainedModel out;
  out.schema = train.schema;
  out.columns = train.columns;
  out.covariate_names = train.covariate_names;
  const auto unknown = train.unknown_rows();
  for (int i : unknown) out.unknown_ids.push_back(train.ids[i]);
  for (auto& snap : samples.snapshots) {
    std::vector<int> labels;
    labels.reserve(unknown.size());
    for (int i : unknown) labels.push_back(snap.labels[i]);
    out.unknown_labels.push_back(std::move(labels));
    snap.z.resize(0, 0);
    snap.eta.resize(0, 0);
    snap.labels.clear();
  }
  out.shrinkage = shrinkage_diagnostic(samples);
  const Eigen::VectorXd x_mean = train.n() > 0 ? Eigen::VectorXd(train.x.colwise().mean().transpose())
                                               : Eigen::VectorXd::Unit(train.B(), 0);
  out.factor_norms = factor_diagnostic(samples, x_mean);
  out.samples = std::move(samples);
  return out;
}

void write_posterior(std::ostream& out, const TrainedModel& model) {
  const auto& samples = model.samples;
  const auto& first = samples.snapshots.front();
  const auto& h = samples.hyper;
  json meta;
  meta["format"] = "farva-posterior";
  meta["version"] = kVersion;
  meta["dims"] = {{"C", first.C()}, {"P", first.P()}, {"K", first.K()}, {"L", first.L()}, {"B", first.B()}};
  meta["chain"] = {{"iterations", samples.meta.iterations},
                   {"burn_in", samples.meta.burn_in},
                   {"thinning", samples.meta.thinning},
                   {"seed", samples.meta.seed},
                   {"snapshots", samples.snapshots.size()}};
  meta["hyper"] = {{"gamma", h.gamma},           {"d1", h.d1},   {"d2", h.d2},
                   {"nu0", h.nu0},               {"v0", h.v0},   {"sigma_shape", h.sigma_shape},
                   {"sigma_rate", h.sigma_rate}};
  json schema = json::array();
  for (const auto& spec : model.schema) {
    schema.push_back({{"name", spec.name}, {"kind", to_string(spec.kind)}, {"categories", spec.categories}});
  }
  meta["schema"] = schema;
  meta["covariates"] = model.covariate_names;
  meta["unknown_ids"] = model.unknown_ids;
  meta["diagnostics"] = {{"shrinkage", to_std(model.shrinkage)}, {"factor_norms", to_std(model.factor_norms)}};
  meta["payload"] = {"column scales", "a", "mu0", "Lambda0", "S0", "A0", "L0", "D0",
                     "snapshots: theta, delta, phi, delta_mg, tau, beta, mu_beta, sigma_beta, alpha, "
                     "mu_alpha, sigma_alpha, sigma2, pi, unknown labels"};
  const std::string text = meta.dump(2);

  Writer w(out);
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  w.u32(kByteOrder);
  w.u64(text.size());
  w.raw(text.data(), text.size());
  for (const auto& c : model.columns) w.f64(c.scale);
  w.vec(h.a);
  w.vec(h.mu0);
  w.mat(h.Lambda0);
  w.mat(h.S0);
  w.vec(h.A0);
  w.mat(h.L0);
  w.mat(h.D0);
  for (std::size_t t = 0; t < samples.snapshots.size(); ++t) {
    const auto& s = samples.snapshots[t];
    for (const auto& m : s.theta) w.mat(m);
    w.mat(s.delta);
    w.mat(s.phi);
    w.vec(s.delta_mg);
    w.vec(s.tau);
    for (const auto& m : s.beta) w.mat(m);
    w.mat(s.mu_beta);
    for (const auto& m : s.sigma_beta) w.mat(m);
    for (const auto& m : s.alpha) w.mat(m);
    w.mat(s.mu_alpha);
    for (const auto& m : s.sigma_alpha) w.mat(m);
    w.vec(s.sigma2);
    w.vec(s.pi);
    for (int label : model.unknown_labels[t]) w.i32(label);
  }
  if (!out) throw io_error("failed writing posterior file");
}

void write_posterior(const std::filesystem::path& path, const TrainedModel& model) {
  auto out = open_out(path, true);
  write_posterior(out, model);
  finish(out, path);
}

TrainedModel read_posterior(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.raw(magic, sizeof(magic));
  if (!std::equal(magic, magic + 8, kMagic)) throw io_error("not a posterior file (bad magic)");
  const auto version = r.u32();
  if (version != kVersion) throw io_error("unsupported posterior file version " + std::to_string(version));
  if (r.u32() != kByteOrder) throw io_error("posterior file has an unexpected byte-order marker");
  const auto len = r.u64();
  if (len > (1u << 30)) throw io_error("posterior metadata block is implausibly large");
  std::string text(len, '\0');
  r.raw(text.data(), text.size());
  json meta;
  try {
    meta = json::parse(text);
  } catch (const json::exception& e) {
    throw io_error(std::string("posterior metadata is not valid JSON: ") + e.what());
  }

  TrainedModel model;
  try {
    const auto& dims = meta.at("dims");
    const int C = dims.at("C"), P = dims.at("P"), K = dims.at("K"), L = dims.at("L"), B = dims.at("B");
    const auto& chain = meta.at("chain");
    auto& samples = model.samples;
    samples.meta.iterations = chain.at("iterations");
    samples.meta.burn_in = chain.at("burn_in");
    samples.meta.thinning = chain.at("thinning");
    samples.meta.seed = chain.at("seed");
    const std::size_t n_snap = chain.at("snapshots");
    auto& h = samples.hyper;
    const auto& hj = meta.at("hyper");
    h.K = K;
    h.L = L;
    h.gamma = hj.at("gamma");
    h.d1 = hj.at("d1");
    h.d2 = hj.at("d2");
    h.nu0 = hj.at("nu0");
    h.v0 = hj.at("v0");
    h.sigma_shape = hj.at("sigma_shape");
    h.sigma_rate = hj.at("sigma_rate");
    for (const auto& sj : meta.at("schema")) {
      SymptomSpec spec;
      spec.name = sj.at("name");
      spec.kind = parse_symptom_kind(sj.at("kind"));
      spec.categories = sj.at("categories").get<std::vector<std::string>>();
      model.schema.push_back(std::move(spec));
    }
    model.columns = expand_schema(model.schema);
    if (static_cast<int>(model.columns.size()) != P) throw io_error("posterior schema does not match P");
    model.covariate_names = meta.at("covariates").get<std::vector<std::string>>();
    if (static_cast<int>(model.covariate_names.size()) + 1 != B) {
      throw io_error("posterior covariate list does not match B");
    }
    model.unknown_ids = meta.at("unknown_ids").get<std::vector<std::string>>();
    const auto& diag = meta.at("diagnostics");
    const auto shrink = diag.at("shrinkage").get<std::vector<double>>();
    const auto norms = diag.at("factor_norms").get<std::vector<double>>();
    model.shrinkage = Eigen::Map<const Eigen::VectorXd>(shrink.data(), static_cast<Eigen::Index>(shrink.size()));
    model.factor_norms = Eigen::Map<const Eigen::VectorXd>(norms.data(), static_cast<Eigen::Index>(norms.size()));

    for (auto& c : model.columns) c.scale = r.f64();
    h.a = r.vec(C);
    h.mu0 = r.vec(B);
    h.Lambda0 = r.mat(B, B);
    h.S0 = r.mat(B, B);
    h.A0 = r.vec(B);
    h.L0 = r.mat(B, B);
    h.D0 = r.mat(B, B);
    const int LK = L * K;
    const std::size_t n_unknown = model.unknown_ids.size();
    samples.snapshots.resize(n_snap);
    model.unknown_labels.resize(n_snap);
    for (std::size_t t = 0; t < n_snap; ++t) {
      auto& s = samples.snapshots[t];
      s.theta.resize(C);
      for (auto& m : s.theta) m = r.mat(P, L);
      s.delta = r.mat(P, L);
      s.phi = r.mat(P, L);
      s.delta_mg = r.vec(L);
      s.tau = r.vec(L);
      s.beta.resize(C);
      for (auto& m : s.beta) m = r.mat(LK, B);
      s.mu_beta = r.mat(LK, B);
      s.sigma_beta.resize(LK);
      for (auto& m : s.sigma_beta) m = r.mat(B, B);
      s.alpha.resize(C);
      for (auto& m : s.alpha) m = r.mat(K, B);
      s.mu_alpha = r.mat(K, B);
      s.sigma_alpha.resize(K);
      for (auto& m : s.sigma_alpha) m = r.mat(B, B);
      s.sigma2 = r.vec(P);
      s.pi = r.vec(C);
      auto& labels = model.unknown_labels[t];
      labels.resize(n_unknown);
      for (auto& label : labels) {
        label = r.i32();
        if (label < 0 || label >= C) throw io_error("posterior file holds an out-of-range label");
      }
    }
  } catch (const json::exception& e) {
    throw io_error(std::string("posterior metadata is incomplete: ") + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) throw io_error("posterior file has trailing bytes");
  return model;
}

TrainedModel read_posterior(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  return read_posterior(in);
}

// ---- tables and reports ----

void write_predictions(std::ostream& out, const std::vector<std::string>& ids,
                       const CodPosterior& posterior) {
  const auto c_count = posterior.probs.cols();
  std::vector<std::string> header = {"id"};
  for (Eigen::Index c = 0; c < c_count; ++c) header.push_back("prob_" + std::to_string(c + 1));
  header.push_back("top_cause");
  write_row(out, header);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<std::string> row = {ids[i]};
    for (Eigen::Index c = 0; c < c_count; ++c) {
      row.push_back(format_double(posterior.probs(static_cast<Eigen::Index>(i), c)));
    }
    row.push_back(std::to_string(posterior.top[i] + 1));
    write_row(out, row);
  }
}

PredictionTable read_predictions(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!read_line(in, line)) throw data_error("predictions: empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "id" || header.back() != "top_cause") {
    throw data_error("predictions: header must be 'id,prob_1..prob_C,top_cause'");
  }
  const int c_count = static_cast<int>(header.size()) - 2;
  PredictionTable out;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "predictions line " + std::to_string(lineno);
    if (fields.size() != header.size()) throw data_error(where + ": wrong number of fields");
    out.ids.push_back(fields[0]);
    std::vector<double> probs(c_count);
    for (int c = 0; c < c_count; ++c) probs[c] = parse_double(trim(fields[1 + c]), where);
    rows.push_back(std::move(probs));
    const int top = parse_int(trim(fields.back()), where);
    if (top < 1 || top > c_count) throw data_error(where + ": top cause out of range");
    out.top.push_back(top - 1);
  }
  out.probs.resize(static_cast<Eigen::Index>(rows.size()), c_count);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < c_count; ++c) out.probs(static_cast<Eigen::Index>(i), c) = rows[i][c];
  }
  return out;
}

LabelTable read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!read_line(in, line)) throw data_error("labels: empty file");
  const auto header = split_csv_line(line);
  const auto id_col = std::find(header.begin(), header.end(), "id") - header.begin();
  const auto cause_col = std::find(header.begin(), header.end(), "cause") - header.begin();
  if (id_col == static_cast<std::ptrdiff_t>(header.size()) ||
      cause_col == static_cast<std::ptrdiff_t>(header.size())) {
    throw data_error("labels: '" + path.string() + "' needs 'id' and 'cause' columns");
  }
  LabelTable out;
  int lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw data_error("labels line " + std::to_string(lineno) + ": wrong number of fields");
    }
    out.ids.push_back(fields[id_col]);
    const std::string cause = trim(fields[cause_col]);
    out.labels.push_back(cause.empty() ? -1 : parse_int(cause, "labels line " + std::to_string(lineno)) - 1);
  }
  return out;
}

std::string csmf_json(const CsmfEstimate& csmf) {
  json j = {{"mean", to_std(csmf.mean)}, {"lower", to_std(csmf.lower)}, {"upper", to_std(csmf.upper)}};
  return j.dump(2) + "\n";
}

std::string metrics_json(const Metrics& metrics) {
  json j = {{"acc1", metrics.acc1}, {"acc_csmf", metrics.acc_csmf}, {"ccc", metrics.ccc}, {"n", metrics.n}};
  return j.dump(2) + "\n";
}

}  // namespace farva
