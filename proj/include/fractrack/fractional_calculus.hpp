#pragma once

// Discrete Riemann-Liouville / Caputo operators on uniform grids. These are
// verification tools, independent of the Mittag-Leffler propagators: the
// solvers never call them.
//
//   left RL integral     product trapezoidal rule (piecewise-linear phi, exact kernel moments)
//   left Caputo          L1 scheme; backward differences at order 1
//   right-sided ops      realized through time reversal R phi(t) = phi(T - t):
//                        R (right op) = (left op) R

#include <vector>

namespace fractrack {

struct TimeGrid {
  double horizon = 1.0;
  int n_steps = 2;

  // Throws DomainError unless horizon > 0 and n_steps >= 2.
  static TimeGrid make(double horizon, int n_steps);

  double step() const { return horizon / n_steps; }
  double node(int i) const { return horizon * i / n_steps; }
  int n_nodes() const { return n_steps + 1; }
  // Trapezoidal weight of node i (without the factor h).
  double trapezoid_weight(int i) const { return (i == 0 || i == n_steps) ? 0.5 : 1.0; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct TimeSeries {
  TimeGrid grid;
  std::vector<double> values;  // one per node

  TimeSeries() = default;
  TimeSeries(TimeGrid g, std::vector<double> v);
  template <class F>
  static TimeSeries sample(const TimeGrid& g, F&& f) {
    std::vector<double> v(static_cast<std::size_t>(g.n_nodes()));
    for (int i = 0; i < g.n_nodes(); ++i) v[static_cast<std::size_t>(i)] = f(g.node(i));
    return TimeSeries(g, std::move(v));
  }

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

// (1/Gamma(a)) int_0^{t_i} (t_i - s)^{a-1} phi(s) ds, a in (0, 1].
TimeSeries rl_integral_left(const TimeSeries& series, double alpha);

// Right-sided integral (1/Gamma(a)) int_{t_i}^T (s - t_i)^{a-1} phi(s) ds.
// Order 0 is accepted and returns the input unchanged.
TimeSeries rl_integral_right(const TimeSeries& series, double order);

// L1 approximation of the Caputo derivative. Node 0 holds 0 for a < 1 and a
// forward difference for a = 1.
TimeSeries caputo_left(const TimeSeries& series, double alpha);

// Left Riemann-Liouville derivative d/dt I^{1-a}, discretized as
// L1(phi) + phi(0) t^{-a} / Gamma(1 - a). The value at t = 0 is infinite when
// phi(0) != 0 and a < 1.
TimeSeries rl_derivative_left(const TimeSeries& series, double alpha);

// Right Riemann-Liouville derivative -d/dt I_T^{1-a} via the mirror identity.
TimeSeries rl_derivative_right(const TimeSeries& series, double alpha);

// The right derivative split as regular(t) + singular * (T - t)^{-a}, so it
// can be integrated without sampling the endpoint singularity.
struct RightDerivativeParts {
  TimeSeries regular;
  double singular = 0.0;
};
RightDerivativeParts rl_derivative_right_parts(const TimeSeries& series, double alpha);

TimeSeries time_reverse(const TimeSeries& series);

// |int phi2 cD^a phi1 - int phi1 D_T^a phi2 - [phi1 I_T^{1-a} phi2]_0^T|
// with trapezoidal time quadrature; the (T - t)^{-a} part of D_T^a phi2 is
// integrated exactly against the piecewise-linear phi1.
double integration_by_parts_residual(const TimeSeries& phi1, const TimeSeries& phi2, double alpha);

// Composite trapezoid on the series' grid.
double trapezoid(const TimeSeries& series);

}  // namespace fractrack
