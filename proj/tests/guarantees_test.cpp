#include "mro/guarantees.hpp"

#include <doctest.h>

#include <random>

namespace {

const mro::SolverBackend& backend() {
  static auto b = mro::make_backend("clarabel");
  return *b;
}

}  // namespace

TEST_CASE("adjusted epsilon adds the clustering displacement") {
  Eigen::MatrixXd rows(4, 1);
  rows << 0.0, 1.0, 4.0, 5.0;
  const mro::Dataset data(rows);

  const auto one = mro::kmeans(data, 1);
  CHECK(one.eta == doctest::Approx(2.5));
  CHECK(mro::adjusted_epsilon(0.3, one) == doctest::Approx(2.8));

  const auto full = mro::kmeans(data, 4);
  CHECK(full.eta == doctest::Approx(0.0));
  CHECK(mro::adjusted_epsilon(0.3, full) == doctest::Approx(0.3));

  CHECK_THROWS_AS(mro::adjusted_epsilon(-0.1, one), std::invalid_argument);
}

TEST_CASE("sandwich bounds hold on random quadratic instances") {
  std::mt19937 rng(17);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index m = 2, n = 2, N = 12;
    Eigen::MatrixXd rows(N, m);
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) rows(i, j) = 2.0 + gauss(rng);
    }
    const mro::Dataset data(rows);
    std::vector<Eigen::MatrixXd> A;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::MatrixXd G(m, m);
      for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) G(r, c) = gauss(rng);
      }
      A.push_back(G.transpose() * G + 0.1 * Eigen::MatrixXd::Identity(m, m));
    }
    const auto fam = mro::ConstraintFamily::concave_quadratic(A);
    Eigen::VectorXd x(n);
    x << unif(rng), unif(rng);

    for (Eigen::Index K : {Eigen::Index(1), Eigen::Index(3)}) {
      const auto cl = mro::kmeans(data, K, {.restarts = 16});
      const mro::UncertaintySpec spec(2.0, mro::NormSpec(2), unif(rng),
                                      mro::SupportSet::full_space(m));
      const auto rep = mro::sandwich_check(fam, x, data, cl, spec, backend());
      CHECK(rep.holds_lower);
      CHECK(rep.holds_upper);
      CHECK(rep.bound == doctest::Approx(0.5 * rep.L * rep.D));
      CHECK(rep.D == doctest::Approx(cl.D));
    }
  }
}

TEST_CASE("sandwich is tight when every point is its own cluster") {
  Eigen::MatrixXd rows(3, 1);
  rows << 1.0, 2.0, 4.0;
  const mro::Dataset data(rows);
  const auto cl = mro::kmeans(data, 3);
  std::vector<Eigen::MatrixXd> A{Eigen::MatrixXd::Constant(1, 1, 1.0)};
  const auto fam = mro::ConstraintFamily::concave_quadratic(A);
  const mro::UncertaintySpec spec(2.0, mro::NormSpec(2), 0.5, mro::SupportSet::full_space(1));
  const auto rep = mro::sandwich_check(fam, Eigen::VectorXd::Ones(1), data, cl, spec, backend());
  CHECK(rep.g_K == doctest::Approx(rep.g_N).epsilon(1e-7));
  CHECK(rep.bound == doctest::Approx(0.0));
  CHECK(rep.holds_lower);
  CHECK(rep.holds_upper);
}

TEST_CASE("out of sample beta counts violated repetitions") {
  auto generator = [](uint64_t, Eigen::Index count) {
    return mro::Dataset(Eigen::MatrixXd::Ones(count, 1));
  };
  // repetitions alternate between satisfied and violated evaluators;
  // repetition 4 fails to solve and is excluded
  auto solve_fn = [](const mro::Dataset&, int r)
      -> std::optional<std::function<double(const Eigen::VectorXd&)>> {
    if (r == 4) return std::nullopt;
    const double sign = (r % 2 == 0) ? -1.0 : 1.0;
    return [sign](const Eigen::VectorXd&) { return sign; };
  };
  const auto est = mro::out_of_sample_beta(generator, solve_fn, 5, 3, 6, 0);
  CHECK(est.failures == 1);
  CHECK(est.means.size() == 4);
  CHECK(est.beta_hat == doctest::Approx(2.0 / 4.0));
  CHECK_THROWS_AS(mro::out_of_sample_beta(generator, solve_fn, 0, 3, 6, 0),
                  std::invalid_argument);
}

TEST_CASE("beta repetitions see distinct training draws") {
  std::vector<double> seen;
  auto generator = [](uint64_t seed, Eigen::Index count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd rows(count, 1);
    for (Eigen::Index i = 0; i < count; ++i) rows(i, 0) = unif(rng);
    return mro::Dataset(rows);
  };
  auto solve_fn = [&seen](const mro::Dataset& train, int)
      -> std::optional<std::function<double(const Eigen::VectorXd&)>> {
    seen.push_back(train.samples(0, 0));
    return [](const Eigen::VectorXd&) { return -1.0; };
  };
  mro::out_of_sample_beta(generator, solve_fn, 3, 4, 4, 123);
  REQUIRE(seen.size() == 3);
  CHECK(seen[0] != seen[1]);
  CHECK(seen[1] != seen[2]);
}

TEST_CASE("epsilon cross validation picks the smallest qualifying radius") {
  const std::vector<double> grid{0.1, 0.2, 0.4, 0.8};
  auto run = [](double eps) {
    const double beta = eps < 0.35 ? 0.3 : 0.05;  // larger radii are safer
    return std::make_pair(beta, -eps);
  };
  const auto sel = mro::cross_validate_epsilon(grid, 0.1, run);
  CHECK(sel.eps_star == doctest::Approx(0.4));
  CHECK_FALSE(sel.warning);
  CHECK(sel.table.size() == 4);

  auto hopeless = [](double eps) { return std::make_pair(0.9, -eps); };
  const auto fallback = mro::cross_validate_epsilon(grid, 0.1, hopeless);
  CHECK(fallback.eps_star == doctest::Approx(0.8));
  CHECK(fallback.warning);

  CHECK_THROWS_AS(mro::cross_validate_epsilon({}, 0.1, run), std::invalid_argument);
  CHECK_THROWS_AS(mro::cross_validate_epsilon(grid, 0.0, run), std::invalid_argument);
  CHECK_THROWS_AS(mro::cross_validate_epsilon({0.4, 0.1}, 0.1, run), std::invalid_argument);
}
