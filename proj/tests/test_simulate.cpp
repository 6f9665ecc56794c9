#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "farva/simulate.hpp"

using namespace farva;

namespace {

SimConfig with_seed(const std::string& preset, std::uint64_t seed) {
  SimConfig c = SimConfig::preset(preset);
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("presets and config validation") {
  for (const auto& name : SimConfig::preset_names()) CHECK_NOTHROW(SimConfig::preset(name).validate());
  CHECK_THROWS_AS(SimConfig::preset("h"), std::invalid_argument);
  SimConfig c = SimConfig::preset("a");
  c.cov_covariate = true;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(generate_dataset(c), std::invalid_argument);
  c = SimConfig::preset("a");
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  const SimConfig d = SimConfig::preset("a");
  CHECK(d.n == 928);
  CHECK(d.P == 21);
  CHECK(d.C == 4);
}

TEST_CASE("shape, labels and binary cells") {
  const SimResult r = generate_dataset(with_seed("b", 3));
  CHECK(r.data.n() == 928);
  CHECK(r.data.P() == 21);
  CHECK(r.data.B() == 1);
  CHECK(r.data.n_causes == 4);
  for (int y : r.data.y) CHECK((y >= 0 && y < 4));
  CHECK(r.data.y == r.truth.labels);
  CHECK(((r.data.s.array() == 0.0) || (r.data.s.array() == 1.0)).all());
  for (int i = 0; i < 928; ++i) {
    for (int j = 0; j < 21; ++j) CHECK((r.data.s(i, j) == 1.0) == (r.truth.z(i, j) > 0.0));
  }
}

TEST_CASE("covariate presets carry one binary covariate") {
  const SimResult r = generate_dataset(with_seed("e", 4));
  REQUIRE(r.data.B() == 2);
  CHECK(((r.data.x.col(1).array() == 0.0) || (r.data.x.col(1).array() == 1.0)).all());
  const double frac = r.data.x.col(1).mean();
  CHECK(std::abs(frac - 0.5) < 3.0 * std::sqrt(0.25 / 928));
}

TEST_CASE("preset a: pooled within-cause correlations are near zero") {
  const SimResult r = generate_dataset(with_seed("a", 5));
  const auto& d = r.data;
  Eigen::MatrixXd centered = d.s;
  for (int c = 0; c < 4; ++c) {
    Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(d.P());
    int count = 0;
    for (int i = 0; i < d.n(); ++i) {
      if (d.y[i] == c) {
        m += d.s.row(i);
        ++count;
      }
    }
    m /= count;
    for (int i = 0; i < d.n(); ++i) {
      if (d.y[i] == c) centered.row(i) -= m;
    }
  }
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  double worst = 0.0;
  for (int j = 0; j < d.P(); ++j) {
    for (int k = 0; k < j; ++k) {
      worst = std::max(worst, std::abs(cov(j, k) / std::sqrt(cov(j, j) * cov(k, k))));
    }
  }
  CHECK(worst < 0.15);
}

TEST_CASE("preset c: symptom frequencies agree across causes") {
  const SimResult r = generate_dataset(with_seed("c", 6));
  const auto& d = r.data;
  int failures = 0;
  for (int j = 0; j < d.P(); ++j) {
    const double pooled = d.s.col(j).mean();
    for (int c = 0; c < 4; ++c) {
      double ones = 0.0;
      int count = 0;
      for (int i = 0; i < d.n(); ++i) {
        if (d.y[i] != c) continue;
        ones += d.s(i, j);
        ++count;
      }
      const double se = std::sqrt(pooled * (1.0 - pooled) / count);
      if (std::abs(ones / count - pooled) > 3.0 * se) ++failures;
    }
  }
  // 84 comparisons at the 3 SE level: expect at most a couple of exceedances.
  CHECK(failures <= 2);
}

TEST_CASE("generating parameter invariants") {
  SUBCASE("common mean is identical across causes") {
    const SimResult r = generate_dataset(with_seed("c", 7));
    for (int c = 1; c < 4; ++c) CHECK(r.truth.means[c][0] == r.truth.means[0][0]);
    for (int c = 1; c < 4; ++c) CHECK(r.truth.covs[c][0] != r.truth.covs[0][0]);
  }
  SUBCASE("independent covariance is diagonal and shared") {
    const SimResult r = generate_dataset(with_seed("a", 7));
    for (int c = 0; c < 4; ++c) CHECK(r.truth.covs[c][0] == Eigen::MatrixXd::Identity(21, 21));
    CHECK(r.truth.means[1][0] != r.truth.means[0][0]);
  }
  SUBCASE("dependent covariance is SPD with unit diagonal") {
    const SimResult r = generate_dataset(with_seed("d", 7));
    for (int c = 0; c < 4; ++c) {
      const auto& s = r.truth.covs[c][0];
      CHECK((s.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
      CHECK(Eigen::LLT<Eigen::MatrixXd>(s).info() == Eigen::Success);
      CHECK((s - Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff() > 0.1);
    }
  }
  SUBCASE("V flags separate covariate levels") {
    const SimResult e = generate_dataset(with_seed("e", 7));
    for (int c = 0; c < 4; ++c) {
      CHECK(e.truth.means[c][1] != e.truth.means[c][0]);
      CHECK(e.truth.covs[c][1] == e.truth.covs[c][0]);
    }
    const SimResult f = generate_dataset(with_seed("f", 7));
    for (int c = 0; c < 4; ++c) {
      CHECK(f.truth.means[c][1] == f.truth.means[c][0]);
      CHECK(f.truth.covs[c][1] != f.truth.covs[c][0]);
    }
    const SimResult a = generate_dataset(with_seed("a", 7));
    CHECK(a.truth.means[0].size() == 1);
  }
}

TEST_CASE("g1, g2 and g3 share the latent data") {
  const SimResult g1 = generate_dataset(with_seed("g1", 8));
  const SimResult g2 = generate_dataset(with_seed("g2", 8));
  const SimResult g3 = generate_dataset(with_seed("g3", 8));
  CHECK(g1.truth.z == g2.truth.z);
  CHECK(g1.truth.z == g3.truth.z);
  CHECK(g1.truth.labels == g3.truth.labels);
  CHECK(g1.data.x == g3.data.x);
  // g2: first ceil(P/2) = 11 columns binary, the rest continuous.
  for (int j = 0; j < 21; ++j) CHECK((g2.data.columns[j].kind == ColumnKind::binary) == (j < 11));
  for (const auto& col : g3.data.columns) CHECK(col.kind == ColumnKind::continuous);
  // Continuous columns hold z up to the unit-variance rescaling.
  const int j = 15;
  const double scale = g3.data.columns[j].scale;
  CHECK(std::abs(g3.data.s(0, j) * scale - g3.truth.z(0, j)) < 1e-9);
  CHECK(g3.data.raw(0, j) == g3.truth.z(0, j));
}

TEST_CASE("generation is deterministic per seed") {
  const SimResult a = generate_dataset(with_seed("d", 9));
  const SimResult b = generate_dataset(with_seed("d", 9));
  const SimResult c = generate_dataset(with_seed("d", 10));
  CHECK(a.truth.z == b.truth.z);
  CHECK(a.data.s == b.data.s);
  CHECK(a.truth.z != c.truth.z);
}

TEST_CASE("split_train_test") {
  const SimResult r = generate_dataset(with_seed("a", 11));
  Rng rng(1), again(1);
  const TrainTestSplit s = split_train_test(r.data, 0.25, rng);
  const TrainTestSplit t = split_train_test(r.data, 0.25, again);
  CHECK(s.test.n() == 232);
  CHECK(s.train.n() == 696);
  CHECK(s.test_rows == t.test_rows);
  std::set<int> all(s.test_rows.begin(), s.test_rows.end());
  all.insert(s.train_rows.begin(), s.train_rows.end());
  CHECK(all.size() == 928);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 927);
  for (int y : s.test.y) CHECK(y == -1);
  for (std::size_t k = 0; k < s.test_rows.size(); ++k) {
    CHECK(s.test_labels[k] == r.data.y[s.test_rows[k]]);
    CHECK(s.test.ids[k] == r.data.ids[s.test_rows[k]]);
  }
  for (int y : s.train.y) CHECK(y >= 0);
  CHECK_THROWS_AS(split_train_test(r.data, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(split_train_test(r.data, 1.0, rng), std::invalid_argument);
}
