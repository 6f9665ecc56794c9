#include <cmath>
#include <vector>

#include "doctest.h"
#include "farva/nbc.hpp"
#include "helpers.hpp"

using namespace farva;
using farva::test::make_dataset;

TEST_CASE("nbc_fit: Laplace-smoothed rates") {
  Eigen::MatrixXd s(3, 1);
  s << 1, 1, 1;
  const Dataset d = make_dataset(s, {ColumnKind::binary}, {0, 0, 0}, 1);
  const NaiveBayesModel m = nbc_fit(d);
  CHECK(m.rates(0, 0) == doctest::Approx(0.8));
  CHECK(m.prior(0) == 1.0);
  CHECK(nbc_fit(d, 1e9).rates(0, 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(nbc_fit(d, 0.0), std::invalid_argument);
}

TEST_CASE("nbc_fit: prior, missing cells and non-binary columns") {
  Eigen::MatrixXd s(4, 3);
  s << 1, 0.5, 0, 0, 1.2, kMissing, 1, 2.0, 1, 0, -0.3, 1;
  const Dataset d =
      make_dataset(s, {ColumnKind::binary, ColumnKind::continuous, ColumnKind::binary}, {0, 1, 0, 1}, 2);
  const NaiveBayesModel m = nbc_fit(d);
  CHECK(m.columns == std::vector<int>{0, 2});
  CHECK(m.prior == Eigen::Vector2d(0.5, 0.5));
  CHECK(m.rates(0, 0) == doctest::Approx(3.0 / 4.0));
  CHECK(m.rates(1, 0) == doctest::Approx(1.0 / 4.0));
  // Cause 2 has one observed cell in column 3 (the other is missing).
  CHECK(m.rates(1, 1) == doctest::Approx(2.0 / 3.0));
  Dataset unlabeled = d;
  unlabeled.y = {-1, -1, -1, -1};
  CHECK_THROWS_AS(nbc_fit(unlabeled), std::invalid_argument);
}

TEST_CASE("nbc_predict") {
  NaiveBayesModel m;
  m.columns = {0};
  m.prior = Eigen::Vector2d(0.5, 0.5);
  m.rates.resize(2, 1);
  m.rates << 0.99, 0.01;
  const Eigen::VectorXd p = nbc_predict(m, Eigen::VectorXd::Ones(1));
  CHECK(p(0) == doctest::Approx(0.99));
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));

  m.rates << 0.3, 0.3;
  const Eigen::VectorXd q = nbc_predict(m, Eigen::VectorXd::Zero(1));
  CHECK(q(0) == doctest::Approx(0.5));

  m.prior = Eigen::Vector2d(0.2, 0.8);
  m.rates << 0.9, 0.1;
  const Eigen::VectorXd r = nbc_predict(m, Eigen::VectorXd::Constant(1, kMissing));
  CHECK(r(0) == doctest::Approx(0.2));
}

TEST_CASE("nbc_predict: long rows stay on the simplex") {
  NaiveBayesModel m;
  const int p = 400;
  for (int j = 0; j < p; ++j) m.columns.push_back(j);
  m.prior = Eigen::Vector3d(0.3, 0.3, 0.4);
  m.rates.resize(3, p);
  m.rates.row(0).setConstant(0.05);
  m.rates.row(1).setConstant(0.5);
  m.rates.row(2).setConstant(0.95);
  Eigen::VectorXd row = Eigen::VectorXd::Ones(p);
  const Eigen::VectorXd post = nbc_predict(m, row);
  CHECK(std::abs(post.sum() - 1.0) < 1e-12);
  CHECK(post(2) == doctest::Approx(1.0));
  // Duplicating a column that is missing changes nothing.
  NaiveBayesModel dup = m;
  dup.columns.push_back(p);
  dup.rates.conservativeResize(Eigen::NoChange, p + 1);
  dup.rates.col(p) = m.rates.col(0);
  Eigen::VectorXd row2(p + 1);
  row2 << row, kMissing;
  row(0) = 0.0;
  row2(0) = 0.0;
  CHECK(nbc_predict(dup, row2) == nbc_predict(m, row));
}
