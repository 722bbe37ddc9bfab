#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "fractrack/errors.hpp"
#include "fractrack/fractional_calculus.hpp"
#include "fractrack/mittag_leffler.hpp"
#include "fractrack/verification.hpp"

using namespace fractrack;

namespace {

double max_abs_diff(const TimeSeries& a, const std::function<double(double)>& f, int from = 0) {
  double m = 0.0;
  for (int i = from; i < a.grid.n_nodes(); ++i) m = std::max(m, std::abs(a[i] - f(a.grid.node(i))));
  return m;
}

}  // namespace

TEST_SUITE("fractional_calculus") {
  TEST_CASE("time grid") {
    const TimeGrid g = TimeGrid::make(0.6, 120);
    CHECK(g.step() == doctest::Approx(0.005));
    CHECK(g.node(120) == 0.6);
    CHECK(g.n_nodes() == 121);
    CHECK(g.trapezoid_weight(0) == 0.5);
    CHECK(g.trapezoid_weight(60) == 1.0);
    CHECK_THROWS_AS(TimeGrid::make(0.0, 10), DomainError);
    CHECK_THROWS_AS(TimeGrid::make(1.0, 1), DomainError);
    CHECK_THROWS_AS(TimeSeries(g, std::vector<double>(5)), DomainError);
  }

  TEST_CASE("left Riemann-Liouville integral") {
    const TimeGrid g = TimeGrid::make(1.0, 50);
    const auto one = TimeSeries::sample(g, [](double) { return 1.0; });
    CHECK(rl_integral_left(one, 0.5)[50] == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-13));
    const auto zero = TimeSeries::sample(g, [](double) { return 0.0; });
    for (double v : rl_integral_left(zero, 0.3).values) CHECK(v == 0.0);
    const auto lin = TimeSeries::sample(g, [](double t) { return t; });
    CHECK(max_abs_diff(rl_integral_left(lin, 1.0), [](double t) { return t * t / 2; }) <= 1e-15);
    CHECK_THROWS_AS(rl_integral_left(one, 0.0), DomainError);
    CHECK_THROWS_AS(rl_integral_left(one, 1.2), DomainError);
  }

  TEST_CASE("product trapezoid rule is second order") {
    const double a = 0.5;
    std::vector<double> err;
    for (int n : {20, 40, 80, 160}) {
      const TimeGrid g = TimeGrid::make(1.0, n);
      const auto phi = TimeSeries::sample(g, [](double t) { return t * t; });
      err.push_back(std::abs(rl_integral_left(phi, a)[n] - 2.0 / std::tgamma(3.0 + a)));
    }
    CHECK(min_observed_order(err) >= 1.9);
  }

  TEST_CASE("L1 Caputo derivative") {
    const TimeGrid g = TimeGrid::make(1.0, 40);
    const auto c5 = TimeSeries::sample(g, [](double) { return 5.0; });
    for (double v : caputo_left(c5, 0.5).values) CHECK(v == 0.0);
    const auto lin = TimeSeries::sample(g, [](double t) { return t; });
    CHECK(caputo_left(lin, 0.5)[40] == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-13));
    CHECK_THROWS_AS(caputo_left(lin, -0.1), DomainError);

    std::vector<double> err_classical, err_frac;
    for (int n : {20, 40, 80, 160}) {
      const TimeGrid h = TimeGrid::make(1.0, n);
      const auto sq = TimeSeries::sample(h, [](double t) { return t * t; });
      err_classical.push_back(max_abs_diff(caputo_left(sq, 1.0), [](double t) { return 2 * t; }, 1));
      const double a = 0.5;
      err_frac.push_back(max_abs_diff(caputo_left(sq, a),
                                      [&](double t) { return 2 * std::pow(t, 2 - a) / std::tgamma(3 - a); }));
    }
    CHECK(min_observed_order(err_classical) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(min_observed_order(err_frac) >= 1.5 - 0.05);
  }

  TEST_CASE("right Riemann-Liouville derivative") {
    const TimeGrid g = TimeGrid::make(1.0, 40);
    const auto zero = TimeSeries::sample(g, [](double) { return 0.0; });
    for (double v : rl_derivative_right(zero, 0.5).values) CHECK(v == 0.0);
    const auto ramp = TimeSeries::sample(g, [](double t) { return 1.0 - t; });
    const auto d1 = rl_derivative_right(ramp, 1.0);
    for (int i = 0; i < 40; ++i) CHECK(d1[i] == doctest::Approx(1.0).epsilon(1e-12));
    const auto d = rl_derivative_right(ramp, 0.5);
    for (int i = 0; i < 40; ++i)
      CHECK(d[i] == doctest::Approx(std::sqrt(1.0 - g.node(i)) / std::tgamma(1.5)).epsilon(1e-12));

    const auto parts = rl_derivative_right_parts(ramp, 0.5);
    CHECK(parts.singular == 0.0);
    const auto one = TimeSeries::sample(g, [](double) { return 1.0; });
    CHECK(rl_derivative_right_parts(one, 0.5).singular == doctest::Approx(1.0 / std::tgamma(0.5)));
  }

  TEST_CASE("time reversal") {
    const TimeGrid g = TimeGrid::make(1.0, 2);
    const TimeSeries s(g, {1.0, 2.0, 3.0});
    CHECK(time_reverse(s).values == std::vector<double>{3.0, 2.0, 1.0});
    CHECK(time_reverse(time_reverse(s)).values == s.values);
    const TimeSeries c(g, {4.0, 4.0, 4.0});
    CHECK(time_reverse(c).values == c.values);
  }

  TEST_CASE("right integral agrees with the closed form and the mirror identity") {
    const double a = 0.4;
    const TimeGrid g = TimeGrid::make(1.0, 16);
    const auto lin = TimeSeries::sample(g, [](double t) { return t; });
    const auto r = rl_integral_right(lin, a);
    for (int i = 0; i <= 16; ++i) {
      const double t = g.node(i);
      const double want = std::pow(1 - t, a) / std::tgamma(a + 1) * t + a * std::pow(1 - t, a + 1) / std::tgamma(a + 2);
      CHECK(r[i] == doctest::Approx(want).epsilon(1e-13));
    }
    const auto sq = TimeSeries::sample(g, [](double t) { return std::exp(t); });
    const auto mirrored = time_reverse(rl_integral_left(time_reverse(sq), a));
    const auto direct = rl_integral_right(sq, a);
    for (int i = 0; i <= 16; ++i) CHECK(mirrored[i] == direct[i]);
    CHECK(rl_integral_right(sq, 0.0).values == sq.values);
  }

  TEST_CASE("operators are linear") {
    const TimeGrid g = TimeGrid::make(2.0, 64);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<double> p(65), q(65), m(65);
    for (int i = 0; i <= 64; ++i) {
      p[i] = n(rng);
      q[i] = n(rng);
      m[i] = 1.5 * p[i] - 0.25 * q[i];
    }
    const TimeSeries P(g, p), Q(g, q), M(g, m);
    using Op = TimeSeries (*)(const TimeSeries&, double);
    for (Op op : {Op(rl_integral_left), Op(caputo_left), Op(rl_integral_right)}) {
      const auto a = op(P, 0.6), b = op(Q, 0.6), c = op(M, 0.6);
      for (int i = 0; i <= 64; ++i) CHECK(std::abs(c[i] - 1.5 * a[i] + 0.25 * b[i]) <= 1e-12 * (1 + std::abs(c[i])));
    }
  }

  TEST_CASE("semigroup of integrals") {
    const double a = 0.3, b = 0.4;
    std::vector<double> err;
    for (int n : {20, 40, 80, 160}) {
      const TimeGrid g = TimeGrid::make(1.0, n);
      const auto phi = TimeSeries::sample(g, [](double t) { return std::cos(t) + t; });
      const auto twice = rl_integral_left(rl_integral_left(phi, a), b);
      const auto once = rl_integral_left(phi, a + b);
      err.push_back(std::abs(twice[n] - once[n]));
    }
    CHECK(err.back() < 1e-3);
    CHECK(min_observed_order(err) >= 1.0 + a - 0.1);
  }

  TEST_CASE("integral of the Caputo derivative recovers the function") {
    std::vector<double> err;
    for (int n : {20, 40, 80, 160}) {
      const TimeGrid g = TimeGrid::make(1.0, n);
      const auto phi = TimeSeries::sample(g, [](double t) { return 2.0 + std::sin(2 * t); });
      const auto back = rl_integral_left(caputo_left(phi, 0.5), 0.5);
      double m = 0.0;
      for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(back[i] - (phi[i] - phi[0])));
      err.push_back(m);
    }
    CHECK(err.back() < 5e-3);
    CHECK(min_observed_order(err) >= 0.9);
  }

  TEST_CASE("integration by parts") {
    const TimeGrid g = TimeGrid::make(1.0, 256);
    const auto c = TimeSeries::sample(g, [](double) { return 3.0; });
    const auto smooth = TimeSeries::sample(g, [](double t) { return std::exp(-t) + t * t; });
    CHECK(integration_by_parts_residual(c, smooth, 0.5) <= 1e-3);

    std::vector<double> frac, classical;
    for (int n : {40, 80, 160, 320}) {
      const TimeGrid h = TimeGrid::make(1.0, n);
      // quadratic against linear is integrated exactly
      const auto p1 = TimeSeries::sample(h, [](double t) { return t * t; });
      const auto p2 = TimeSeries::sample(h, [](double t) { return 1.0 - t; });
      CHECK(integration_by_parts_residual(p1, p2, 0.5) <= 1e-14);
      const auto s1 = TimeSeries::sample(h, [](double t) { return std::sin(t) + t * t; });
      const auto s2 = TimeSeries::sample(h, [](double t) { return std::exp(-t); });
      frac.push_back(integration_by_parts_residual(s1, s2, 0.5));
      const auto q1 = TimeSeries::sample(h, [](double t) { return std::sin(t); });
      const auto q2 = TimeSeries::sample(h, [](double t) { return std::exp(t); });
      classical.push_back(integration_by_parts_residual(q1, q2, 1.0));
    }
    CHECK(min_observed_order(frac) >= 1.0);
    // backward differences at a = 1: first order
    CHECK(min_observed_order(classical) >= 0.9);
    CHECK(classical.back() < 5e-3);
    CHECK_THROWS_AS(integration_by_parts_residual(c, TimeSeries::sample(TimeGrid::make(1.0, 32), [](double) { return 1.0; }), 0.5),
                    DomainError);
  }
}
