#pragma once

// Real-argument two-parameter Mittag-Leffler function
//
//   E_{a,b}(z) = sum_{k>=0} z^k / Gamma(a k + b),   0 < a <= 2, b > 0.
//
// Evaluation regimes (chosen per call, reported in MlResult::regime):
//
//   closed_form        z == 0, or a == 1 with integer b (exponential formulas).
//   series             |z| <= kSeriesRadius for z < 0, and 0 < z <= kSeriesPositiveLimit.
//                      Compensated summation; terms past Gamma overflow go through lgamma.
//   asymptotic         a < 1 and z <= -kAsymptoticCrossover:
//                      E_{a,b}(z) ~ -sum_{k=1}^{K} z^{-k} / Gamma(b - a k), K = kAsymptoticTerms,
//                      accepted only when the first omitted term is below the target.
//   laplace_inversion  everything else: trapezoidal rule on an optimal parabolic contour
//                      for the inverse Laplace transform s^{a-b} / (s^a - z), plus the
//                      residues of the poles lying to the right of the contour.
//
// The plain Taylor series is only usable in double precision close to the
// origin: for z = -10 and a = 1/2 the largest term is about e^{100}.

#include <string_view>

namespace fractrack {

struct MlParams {
  double alpha = 1.0;
  double beta = 1.0;

  // Throws DomainError unless 0 < alpha <= 2 and beta > 0.
  void validate() const;
};

enum class MlRegime { closed_form, series, asymptotic, laplace_inversion };

std::string_view to_string(MlRegime regime);

struct MlResult {
  double value = 0.0;
  MlRegime regime = MlRegime::series;
  // Set when the evaluator could not reach its accuracy target; the value is
  // still the best estimate available.
  bool accuracy_warning = false;
  // Absolute error estimate for the chosen regime.
  double error_estimate = 0.0;
};

inline constexpr double kSeriesRadius = 1.0;
inline constexpr double kSeriesPositiveLimit = 5.0;
inline constexpr double kAsymptoticCrossover = 30.0;
inline constexpr int kAsymptoticTerms = 20;

// Euler gamma function for x > 0.
double gamma_fn(double x);

// 1 / Gamma(x) on the whole real line (zero at the poles 0, -1, -2, ...).
double rgamma(double x);

MlResult ml_evaluate(const MlParams& params, double z);

inline double ml(const MlParams& params, double z) { return ml_evaluate(params, z).value; }

// Exact moment of the weakly singular kernel over one step:
//   int_0^h s^{a-1} E_{a,a}(lambda s^a) ds = h^a E_{a,a+1}(lambda h^a).
double ml_conv_moment(double alpha, double lambda, double h);

}  // namespace fractrack
