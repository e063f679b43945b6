#include <cmath>
#include <random>

#include "pvsoc/energy_forecast.hpp"
#include "test_util.hpp"

using namespace pvsoc;
using pvsoc::testing::hour;

namespace {

EnergyForecast comonotone_fixture() {
  EnergyForecast f;
  f.start = hour(2019, 6, 1);
  f.hourly = {{0, 0, 0}, {10, 20, 35}, {50, 80, 90}, {100, 120, 160}, {5, 5, 5}};
  return f;
}

// Random SPD covariance A A' with a few off-diagonal links.
EnergyForecast correlated_fixture(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(n * n);
  for (auto& v : a) v = 10.0 * u(rng);
  EnergyForecast f;
  f.start = hour(2019, 6, 1);
  f.z = 1.5;
  f.error_cov.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) f.error_cov[i * n + j] += a[i * n + k] * a[j * n + k];
  for (std::size_t i = 0; i < n; ++i) {
    const double e = 40.0 + 30.0 * u(rng);
    const double h = f.z * std::sqrt(f.error_cov[i * n + i]);
    f.hourly.push_back({std::max(0.0, e - h), e, e + h});
  }
  return f;
}

}  // namespace

TEST(EnergyForecastTest, ComonotoneIntervalAddsHourlyBounds) {
  const auto f = comonotone_fixture();
  const auto t = f.interval(1, 4);
  EXPECT_DOUBLE_EQ(t.low, 160.0);
  EXPECT_DOUBLE_EQ(t.exp, 220.0);
  EXPECT_DOUBLE_EQ(t.up, 285.0);
}

TEST(EnergyForecastTest, EmptyAndClampedIntervals) {
  const auto f = comonotone_fixture();
  const auto empty = f.interval(3, 3);
  EXPECT_EQ(empty.exp, 0.0);
  EXPECT_EQ(empty.up, 0.0);
  const auto reversed = f.interval(4, 2);
  EXPECT_EQ(reversed.exp, 0.0);
  const auto clamped = f.interval(3, 99);
  EXPECT_DOUBLE_EQ(clamped.exp, 125.0);
}

TEST(EnergyForecastTest, CovarianceIntervalUsesSummedVariance) {
  EnergyForecast f;
  f.z = 2.0;
  f.hourly = {{0, 10, 20}, {0, 10, 20}};
  f.error_cov = {25.0, 15.0, 15.0, 25.0};  // var of sum = 80
  const auto t = f.interval(0, 2);
  const double half = 2.0 * std::sqrt(80.0);
  EXPECT_DOUBLE_EQ(t.exp, 20.0);
  EXPECT_DOUBLE_EQ(t.up, 20.0 + half);
  EXPECT_DOUBLE_EQ(t.low, std::max(0.0, 20.0 - half));
}

TEST(EnergyForecastTest, CovarianceLowerBoundFlooredAtZero) {
  EnergyForecast f;
  f.z = 3.0;
  f.hourly = {{0, 1, 10}};
  f.error_cov = {9.0};
  const auto t = f.interval(0, 1);
  EXPECT_EQ(t.low, 0.0);
  EXPECT_DOUBLE_EQ(t.up, 10.0);
}

TEST(EnergyForecastTest, IndexMatchesDirectIntervalComonotone) {
  const auto f = comonotone_fixture();
  const IntervalIndex idx(f);
  ASSERT_EQ(idx.size(), f.size());
  for (std::size_t a = 0; a <= f.size(); ++a)
    for (std::size_t b = 0; b <= f.size() + 1; ++b) {
      const auto d = f.interval(a, b);
      const auto q = idx.interval(a, b);
      EXPECT_NEAR(q.low, d.low, 1e-9) << a << "," << b;
      EXPECT_NEAR(q.exp, d.exp, 1e-9) << a << "," << b;
      EXPECT_NEAR(q.up, d.up, 1e-9) << a << "," << b;
    }
}

TEST(EnergyForecastTest, IndexMatchesDirectIntervalWithCovariance) {
  const auto f = correlated_fixture(30, 11);
  const IntervalIndex idx(f);
  for (std::size_t a = 0; a <= f.size(); ++a)
    for (std::size_t b = a; b <= f.size(); ++b) {
      const auto d = f.interval(a, b);
      const auto q = idx.interval(a, b);
      const double tol = 1e-9 * std::max(1.0, d.up);
      EXPECT_NEAR(q.low, d.low, tol) << a << "," << b;
      EXPECT_NEAR(q.exp, d.exp, tol) << a << "," << b;
      EXPECT_NEAR(q.up, d.up, tol) << a << "," << b;
    }
}

TEST(EnergyForecastTest, SliceKeepsCovarianceBlock) {
  const auto f = correlated_fixture(8, 3);
  const auto s = f.slice(2, 6);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.start, f.start + std::chrono::hours(2));
  EXPECT_EQ(s.z, f.z);
  for (std::size_t a = 0; a <= 4; ++a)
    for (std::size_t b = a; b <= 4; ++b) {
      const auto x = s.interval(a, b);
      const auto y = f.interval(a + 2, b + 2);
      EXPECT_NEAR(x.up, y.up, 1e-9);
      EXPECT_NEAR(x.low, y.low, 1e-9);
    }
}

TEST(EnergyForecastTest, JoinIsBlockDiagonal) {
  EnergyForecast a;
  a.z = 2.0;
  a.hourly = {{0, 10, 20}, {0, 10, 20}};
  a.error_cov = {25.0, 25.0, 25.0, 25.0};
  EnergyForecast b;
  b.z = 2.0;
  b.hourly = {{4, 10, 14}};  // no covariance: sd = max(6, 4) / 2 = 3
  const auto j = EnergyForecast::join(a, b);
  ASSERT_EQ(j.size(), 3u);
  ASSERT_EQ(j.error_cov.size(), 9u);
  EXPECT_DOUBLE_EQ(j.error_cov[0 * 3 + 2], 0.0);
  EXPECT_DOUBLE_EQ(j.error_cov[2 * 3 + 2], 9.0);
  const auto t = j.interval(0, 3);
  EXPECT_DOUBLE_EQ(t.exp, 30.0);
  EXPECT_NEAR(t.up, 30.0 + 2.0 * std::sqrt(100.0 + 9.0), 1e-12);
}

TEST(EnergyForecastTest, JoinWithoutCovarianceStaysComonotone) {
  const auto f = comonotone_fixture();
  const auto j = EnergyForecast::join(f, f);
  EXPECT_TRUE(j.error_cov.empty());
  EXPECT_EQ(j.size(), 10u);
  EXPECT_DOUBLE_EQ(j.interval(0, 10).up, 2 * f.interval(0, 5).up);
}

TEST(EnergyForecastTest, ExactHasZeroWidth) {
  const auto f = EnergyForecast::exact(hour(2019, 1, 1), {1.0, 2.0, 3.0});
  const auto t = f.interval(0, 3);
  EXPECT_EQ(t.low, 6.0);
  EXPECT_EQ(t.exp, 6.0);
  EXPECT_EQ(t.up, 6.0);
  EXPECT_EQ(f.expected(), (std::vector<double>{1.0, 2.0, 3.0}));
}

TEST(EnergyForecastTest, CheckOrderedRejectsInvertedBounds) {
  auto f = comonotone_fixture();
  EXPECT_NO_THROW(f.check_ordered());
  f.hourly[2] = {90, 80, 100};
  EXPECT_EQ(pvsoc::testing::code_of([&] { f.check_ordered(); }), ErrorCode::InvariantBreach);
  f.hourly[2] = {-1, 0, 1};
  EXPECT_EQ(pvsoc::testing::code_of([&] { f.check_ordered(); }), ErrorCode::InvariantBreach);
}
