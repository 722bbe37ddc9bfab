#include "fractrack/fractional_calculus.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fractrack/errors.hpp"
#include "fractrack/mittag_leffler.hpp"

namespace fractrack {

namespace {

void require_order(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    std::ostringstream os;
    os << "fractional order must lie in (0, 1], got " << alpha;
    throw DomainError(os.str());
  }
}

void require_shape(const TimeSeries& s) {
  if (s.values.size() != static_cast<std::size_t>(s.grid.n_nodes()))
    throw DomainError("time series length does not match its grid");
}

}  // namespace

TimeGrid TimeGrid::make(double horizon, int n_steps) {
  if (!(horizon > 0.0)) throw DomainError("time horizon must be positive");
  if (n_steps < 2) throw DomainError("time grid needs at least 2 steps");
  return TimeGrid{horizon, n_steps};
}

TimeSeries::TimeSeries(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  require_shape(*this);
}

TimeSeries rl_integral_left(const TimeSeries& series, double alpha) {
  require_order(alpha);
  require_shape(series);
  const int n = series.grid.n_steps;
  const double h = series.grid.step();
  const double scale = std::pow(h, alpha) * rgamma(alpha + 2.0);
  const double ap1 = alpha + 1.0;
  std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
  for (int i = 1; i <= n; ++i) {
    double s = (std::pow(i - 1.0, ap1) - (i - alpha - 1.0) * std::pow(i, alpha)) * series[0];
    for (int j = 1; j < i; ++j) {
      const double m = i - j;
      s += (std::pow(m + 1.0, ap1) - 2.0 * std::pow(m, ap1) + std::pow(m - 1.0, ap1)) * series[j];
    }
    s += series[i];
    out[static_cast<std::size_t>(i)] = scale * s;
  }
  return TimeSeries(series.grid, std::move(out));
}

TimeSeries time_reverse(const TimeSeries& series) {
  require_shape(series);
  return TimeSeries(series.grid, std::vector<double>(series.values.rbegin(), series.values.rend()));
}

TimeSeries rl_integral_right(const TimeSeries& series, double order) {
  if (order == 0.0) return series;
  return time_reverse(rl_integral_left(time_reverse(series), order));
}

TimeSeries caputo_left(const TimeSeries& series, double alpha) {
  require_order(alpha);
  require_shape(series);
  const int n = series.grid.n_steps;
  const double h = series.grid.step();
  std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
  if (alpha == 1.0) {
    out[0] = (series[1] - series[0]) / h;
    for (int i = 1; i <= n; ++i) out[static_cast<std::size_t>(i)] = (series[i] - series[i - 1]) / h;
    return TimeSeries(series.grid, std::move(out));
  }
  const double one_minus = 1.0 - alpha;
  std::vector<double> b(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m)
    b[static_cast<std::size_t>(m)] = std::pow(m + 1.0, one_minus) - std::pow(m, one_minus);
  const double scale = std::pow(h, -alpha) * rgamma(2.0 - alpha);
  for (int i = 1; i <= n; ++i) {
    double s = 0.0;
    for (int j = 0; j < i; ++j) s += b[static_cast<std::size_t>(i - j - 1)] * (series[j + 1] - series[j]);
    out[static_cast<std::size_t>(i)] = scale * s;
  }
  return TimeSeries(series.grid, std::move(out));
}

TimeSeries rl_derivative_left(const TimeSeries& series, double alpha) {
  TimeSeries out = caputo_left(series, alpha);
  if (alpha == 1.0) return out;
  const double c = series[0] * rgamma(1.0 - alpha);
  if (c != 0.0) {
    out.values[0] = std::copysign(std::numeric_limits<double>::infinity(), c);
    for (int i = 1; i <= series.grid.n_steps; ++i)
      out.values[static_cast<std::size_t>(i)] += c * std::pow(series.grid.node(i), -alpha);
  }
  return out;
}

TimeSeries rl_derivative_right(const TimeSeries& series, double alpha) {
  return time_reverse(rl_derivative_left(time_reverse(series), alpha));
}

RightDerivativeParts rl_derivative_right_parts(const TimeSeries& series, double alpha) {
  RightDerivativeParts parts;
  parts.regular = time_reverse(caputo_left(time_reverse(series), alpha));
  if (alpha < 1.0) parts.singular = series.values.back() * rgamma(1.0 - alpha);
  return parts;
}

double trapezoid(const TimeSeries& series) {
  require_shape(series);
  double s = 0.0;
  for (int i = 0; i <= series.grid.n_steps; ++i) s += series.grid.trapezoid_weight(i) * series[i];
  return s * series.grid.step();
}

double integration_by_parts_residual(const TimeSeries& phi1, const TimeSeries& phi2,
                                     double alpha) {
  require_order(alpha);
  require_shape(phi1);
  require_shape(phi2);
  if (!(phi1.grid == phi2.grid)) throw DomainError("series live on different grids");
  const TimeGrid& g = phi1.grid;
  const int n = g.n_steps;
  const double h = g.step();
  const double T = g.horizon;

  const TimeSeries c1 = caputo_left(phi1, alpha);
  double lhs = 0.0;
  for (int i = 0; i <= n; ++i) lhs += g.trapezoid_weight(i) * phi2[i] * c1[i];
  lhs *= h;

  const RightDerivativeParts d2 = rl_derivative_right_parts(phi2, alpha);
  double rhs = 0.0;
  for (int i = 0; i <= n; ++i) rhs += g.trapezoid_weight(i) * phi1[i] * d2.regular[i];
  rhs *= h;
  if (d2.singular != 0.0) {
    // int_{t_j}^{t_{j+1}} (T - t)^{-a} (linear phi1) dt, exactly.
    const double p = 1.0 - alpha;
    double sing = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = T - g.node(j);
      const double b = T - g.node(j + 1);
      const double m0 = (std::pow(a, p) - std::pow(b, p)) / p;
      const double m1 = (std::pow(a, p + 1.0) - std::pow(b, p + 1.0)) / (p + 1.0);
      // phi1 on the step in terms of s = T - t: phi1 = phi1_j + (a - s)/h * (phi1_{j+1} - phi1_j)
      const double slope = (phi1[j + 1] - phi1[j]) / h;
      sing += (phi1[j] + slope * a) * m0 - slope * m1;
    }
    rhs += d2.singular * sing;
  }

  const TimeSeries i2 = rl_integral_right(phi2, 1.0 - alpha);
  const double boundary = phi1[n] * i2[n] - phi1[0] * i2[0];
  return std::abs(lhs - rhs - boundary);
}

}  // namespace fractrack
