#include "fractrack/mittag_leffler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "fractrack/errors.hpp"

namespace fractrack {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTargetLogEps = -34.538776394910684;  // log(1e-15)
const double kLogMachineEps = std::log(std::numeric_limits<double>::epsilon());

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// z^k / Gamma(a k + b), falling back to logs once Gamma would overflow.
double series_term(double z, int k, double a, double b) {
  const double arg = a * k + b;
  if (z == 0.0) return k == 0 ? rgamma(arg) : 0.0;
  const double log_z = k * std::log(std::abs(z));
  if (arg < 170.0 && log_z < 650.0) return std::pow(z, k) * rgamma(arg);
  const double log_mag = log_z - std::lgamma(arg);
  const double sign = (z < 0.0 && (k % 2) != 0) ? -1.0 : 1.0;
  return sign * std::exp(log_mag);
}

MlResult eval_series(double a, double b, double z) {
  CompensatedSum sum;
  double max_term = 0.0;
  double prev = kInf;
  constexpr int kMaxTerms = 20000;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double term = series_term(z, k, a, b);
    sum.add(term);
    max_term = std::max(max_term, std::abs(term));
    const double s = std::abs(sum.value());
    // Stop once the terms are decreasing and negligible.
    if (std::abs(term) <= prev && std::abs(term) <= 1e-17 * s && k > 2) break;
    if (s == 0.0 && std::abs(term) == 0.0 && k > 2) break;
    prev = std::abs(term);
  }
  MlResult r;
  r.value = sum.value();
  r.regime = MlRegime::series;
  r.error_estimate = 4.0 * std::numeric_limits<double>::epsilon() * max_term;
  r.accuracy_warning = r.error_estimate > 1e-10 * std::abs(r.value);
  return r;
}

// Closed forms for a == 1 and small integer b:
//   E_{1,n}(z) = (e^z - sum_{k=0}^{n-2} z^k / k!) / z^{n-1}.
bool closed_form_alpha_one(double b, double z, double& out) {
  if (b != std::floor(b) || b < 1.0 || b > 4.0) return false;
  const int n = static_cast<int>(b);
  if (n == 1) {
    out = std::exp(z);
    return true;
  }
  if (std::abs(z) <= kSeriesRadius) return false;
  double poly = 0.0;
  double fact = 1.0;
  for (int k = 0; k <= n - 2; ++k) {
    if (k > 0) fact *= k;
    poly += std::pow(z, k) / fact;
  }
  const double head = (n == 2) ? std::expm1(z) : std::exp(z) - poly;
  out = head / std::pow(z, n - 1);
  return true;
}

MlResult eval_asymptotic(double a, double b, double z) {
  CompensatedSum sum;
  const double inv = 1.0 / z;
  double power = 1.0;
  for (int k = 1; k <= kAsymptoticTerms; ++k) {
    power *= inv;
    sum.add(-power * rgamma(b - a * k));
  }
  power *= inv;
  const double omitted = std::abs(power * rgamma(b - a * (kAsymptoticTerms + 1)));
  MlResult r;
  r.value = sum.value();
  r.regime = MlRegime::asymptotic;
  r.error_estimate = omitted + std::numeric_limits<double>::epsilon() * std::abs(r.value);
  r.accuracy_warning = false;
  return r;
}

struct ContourParams {
  double mu = 0.0;
  double h = 0.0;
  double n = kInf;
};

// Optimal parameters for a contour lying between two singularities
// (bounded region) with strengths p and q.
ContourParams optimal_param_bounded(double phi_j, double phi_j1, double p, double q,
                                    double log_eps) {
  constexpr double fac = 1.01;
  const double f_max = std::exp(log_eps - kLogMachineEps);
  const double sq_phi_j = std::sqrt(phi_j);
  const double threshold = 2.0 * std::sqrt(log_eps - kLogMachineEps);
  const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);

  double sq_bar_j = 0.0, sq_bar_j1 = 0.0, f_bar = 1.0;
  bool admissible = false;
  if (p < 1e-14 && q < 1e-14) {
    sq_bar_j = sq_phi_j;
    sq_bar_j1 = sq_phi_j1;
    admissible = true;
  } else if (p < 1e-14) {
    sq_bar_j = sq_phi_j;
    const double f_min =
        sq_phi_j > 0.0 ? fac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), q) : fac;
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fq = std::pow(f_bar, -1.0 / q);
      sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
      admissible = true;
    }
  } else if (q < 1e-14) {
    sq_bar_j1 = sq_phi_j1;
    const double f_min = fac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), p);
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / p);
      sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
      admissible = true;
    }
  } else {
    double f_min =
        fac * (sq_phi_j + sq_phi_j1) / std::pow(sq_phi_j1 - sq_phi_j, std::max(p, q));
    if (f_min < f_max) {
      f_min = std::max(f_min, 1.5);
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / p);
      const double fq = std::pow(f_bar, -1.0 / q);
      const double w = -phi_j1 / log_eps;
      const double den = 2.0 + w - (1.0 + w) * fp + fq;
      sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
      sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
      admissible = true;
    }
  }
  if (!admissible) return {};

  const double le = log_eps - std::log(f_bar);
  const double w = -sq_bar_j1 * sq_bar_j1 / le;
  ContourParams c;
  c.mu = std::pow(((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w), 2);
  c.h = -2.0 * kPi / le * (sq_bar_j1 - sq_bar_j) / ((1.0 + w) * sq_bar_j + sq_bar_j1);
  c.n = std::ceil(std::sqrt(1.0 - le / c.mu) / c.h);
  return c;
}

// Optimal parameters for the unbounded region to the right of the last singularity.
ContourParams optimal_param_unbounded(double phi_j, double p, double log_eps) {
  const double sq_phi_j = std::sqrt(phi_j);
  double phi_bar = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
  double sq_phi_bar = std::sqrt(phi_bar);
  constexpr double f_min = 1.0, f_max = 10.0, f_tar = 5.0;

  double n = 0.0, a_coef = 0.0, sq_mu = 0.0;
  for (int guard = 0; guard < 200; ++guard) {
    const double phi_t = phi_bar;
    const double log_eps_phi_t = log_eps / phi_t;
    n = std::ceil(phi_t / kPi *
                  (1.0 - 3.0 * log_eps_phi_t / 2.0 + std::sqrt(1.0 - 2.0 * log_eps_phi_t)));
    a_coef = kPi * n / phi_t;
    sq_mu = sq_phi_bar * std::abs(4.0 - a_coef) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * a_coef));
    const double f_bar = std::pow((sq_phi_bar - sq_phi_j) / sq_mu, -p);
    if (p < 1e-14 || (f_min < f_bar && f_bar < f_max)) break;
    sq_phi_bar = std::pow(f_tar, -1.0 / p) * sq_mu + sq_phi_j;
    phi_bar = sq_phi_bar * sq_phi_bar;
  }
  ContourParams c;
  c.mu = sq_mu * sq_mu;
  c.h = (-3.0 * a_coef - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * a_coef)) / (4.0 - a_coef) / n;
  c.n = n;

  // Keep round-off under control when mu gets large.
  const double threshold = log_eps - kLogMachineEps;
  if (c.mu > threshold) {
    const double qq = p < 1e-14 ? 0.0 : std::pow(f_tar, -1.0 / p) * std::sqrt(c.mu);
    phi_bar = std::pow(qq + sq_phi_j, 2);
    if (phi_bar < threshold) {
      const double w = std::sqrt(kLogMachineEps / (kLogMachineEps - log_eps));
      const double u = std::sqrt(-phi_bar / kLogMachineEps);
      c.mu = threshold;
      c.n = std::ceil(w * log_eps / 2.0 / kPi / (u * w - 1.0));
      c.h = std::sqrt(kLogMachineEps / (kLogMachineEps - log_eps)) / c.n;
    } else {
      c.n = kInf;
      c.h = 0.0;
    }
  }
  return c;
}

MlResult eval_laplace_inversion(double a, double b, double z) {
  const double theta = z < 0.0 ? kPi : 0.0;
  const int kmin = static_cast<int>(std::ceil(-a / 2.0 - theta / (2.0 * kPi)));
  const int kmax = static_cast<int>(std::floor(a / 2.0 - theta / (2.0 * kPi)));

  struct Singularity {
    cplx s;
    double phi;
  };
  std::vector<Singularity> poles;
  const double radius = std::pow(std::abs(z), 1.0 / a);
  for (int k = kmin; k <= kmax; ++k) {
    const cplx s = std::polar(radius, (theta + 2.0 * k * kPi) / a);
    const double phi = (s.real() + std::abs(s)) / 2.0;
    if (phi > 1e-15) poles.push_back({s, phi});
  }
  std::sort(poles.begin(), poles.end(),
            [](const Singularity& x, const Singularity& y) { return x.phi < y.phi; });

  // Singularities: the branch point at the origin followed by the poles.
  std::vector<cplx> s_star{cplx(0.0, 0.0)};
  std::vector<double> phi{0.0};
  for (const auto& pole : poles) {
    s_star.push_back(pole.s);
    phi.push_back(pole.phi);
  }
  const std::size_t j1 = s_star.size();
  std::vector<double> p(j1, 1.0), q(j1, 1.0);
  p[0] = std::max(0.0, -2.0 * (a - b + 1.0));
  q[j1 - 1] = kInf;
  phi.push_back(kInf);

  std::vector<std::size_t> regions;
  for (std::size_t j = 0; j < j1; ++j)
    if (phi[j] < (kTargetLogEps - kLogMachineEps) && phi[j] < phi[j + 1]) regions.push_back(j);

  double log_eps = kTargetLogEps;
  bool relaxed = false;
  ContourParams best;
  std::size_t best_region = 0;
  for (int attempt = 0; attempt < 20; ++attempt) {
    best = ContourParams{};
    for (std::size_t j : regions) {
      const ContourParams c = (j + 1 < j1)
                                  ? optimal_param_bounded(phi[j], phi[j + 1], p[j], q[j], log_eps)
                                  : optimal_param_unbounded(phi[j], p[j], log_eps);
      if (c.n < best.n) {
        best = c;
        best_region = j;
      }
    }
    if (best.n <= 200.0) break;
    log_eps += std::log(10.0);
    relaxed = true;
  }
  if (!std::isfinite(best.n)) {
    std::ostringstream os;
    os << "Mittag-Leffler contour selection failed for alpha=" << a << " beta=" << b
       << " z=" << z;
    throw ConsistencyError(os.str());
  }

  const int n = static_cast<int>(best.n);
  cplx integral(0.0, 0.0);
  for (int k = -n; k <= n; ++k) {
    const double u = best.h * k;
    const cplx zc = best.mu * std::pow(cplx(1.0, u), 2);
    const cplx zd(-2.0 * best.mu * u, 2.0 * best.mu);
    const cplx f = std::pow(zc, a - b) / (std::pow(zc, a) - z) * zd;
    integral += std::exp(zc) * f;
  }
  integral *= best.h / (2.0 * kPi * cplx(0.0, 1.0));

  cplx residues(0.0, 0.0);
  for (std::size_t j = best_region + 1; j < j1; ++j)
    residues += (1.0 / a) * std::pow(s_star[j], 1.0 - b) * std::exp(s_star[j]);

  MlResult r;
  r.value = (integral + residues).real();
  r.regime = MlRegime::laplace_inversion;
  r.error_estimate = std::exp(log_eps);
  r.accuracy_warning = relaxed && r.error_estimate > 1e-10 * std::abs(r.value);
  return r;
}

}  // namespace

void MlParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    std::ostringstream os;
    os << "Mittag-Leffler alpha must lie in (0, 2], got " << alpha;
    throw DomainError(os.str());
  }
  if (!(beta > 0.0)) {
    std::ostringstream os;
    os << "Mittag-Leffler beta must be positive, got " << beta;
    throw DomainError(os.str());
  }
}

std::string_view to_string(MlRegime regime) {
  switch (regime) {
    case MlRegime::closed_form:
      return "closed_form";
    case MlRegime::series:
      return "series";
    case MlRegime::asymptotic:
      return "asymptotic";
    case MlRegime::laplace_inversion:
      return "laplace_inversion";
  }
  return "unknown";
}

double gamma_fn(double x) {
  if (!(x > 0.0)) {
    std::ostringstream os;
    os << "gamma_fn requires a positive argument, got " << x;
    throw DomainError(os.str());
  }
  return std::tgamma(x);
}

double rgamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > 171.0) return std::exp(-std::lgamma(x));
  return 1.0 / std::tgamma(x);
}

MlResult ml_evaluate(const MlParams& params, double z) {
  params.validate();
  if (!std::isfinite(z)) throw DomainError("Mittag-Leffler argument must be finite");
  const double a = params.alpha;
  const double b = params.beta;

  if (z == 0.0) return {rgamma(b), MlRegime::closed_form, false, 0.0};

  if (a == 1.0) {
    double v = 0.0;
    if (closed_form_alpha_one(b, z, v))
      return {v, MlRegime::closed_form, false,
              4.0 * std::numeric_limits<double>::epsilon() * std::abs(v)};
  }

  if ((z < 0.0 && -z <= kSeriesRadius) || (z > 0.0 && z <= kSeriesPositiveLimit))
    return eval_series(a, b, z);

  if (a < 1.0 && z <= -kAsymptoticCrossover) {
    MlResult r = eval_asymptotic(a, b, z);
    if (r.error_estimate <= 1e-14 * std::abs(r.value) || r.error_estimate <= 1e-300) return r;
  }
  return eval_laplace_inversion(a, b, z);
}

double ml_conv_moment(double alpha, double lambda, double h) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("ml_conv_moment requires alpha in (0, 1]");
  if (!(h > 0.0)) throw DomainError("ml_conv_moment requires a positive step");
  if (lambda > 0.0) throw DomainError("ml_conv_moment requires lambda <= 0");
  const double ha = std::pow(h, alpha);
  return ha * ml({alpha, alpha + 1.0}, lambda * ha);
}

}  // namespace fractrack
