#include "fractrack/spectral_basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fractrack/errors.hpp"
#include "fractrack/kernels.hpp"

namespace fractrack {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// (1/L) int_left^right cos(m pi x / L) dx
double cos_integral(int m, const Region& r, double L) {
  if (m == 0) return r.length() / L;
  const double f = m * kPi / L;
  return (std::sin(f * r.right) - std::sin(f * r.left)) / (m * kPi);
}

}  // namespace

QuadratureRule QuadratureRule::composite_gauss_legendre(double left, double right,
                                                        int points_per_panel, int panels) {
  std::vector<double> gx, gw;
  gauss_legendre(points_per_panel, gx, gw);
  QuadratureRule rule;
  const double width = (right - left) / panels;
  rule.nodes.reserve(static_cast<std::size_t>(points_per_panel * panels));
  rule.weights.reserve(rule.nodes.capacity());
  for (int p = 0; p < panels; ++p) {
    const double mid = left + (p + 0.5) * width;
    for (int i = 0; i < points_per_panel; ++i) {
      rule.nodes.push_back(mid + 0.5 * width * gx[static_cast<std::size_t>(i)]);
      rule.weights.push_back(0.5 * width * gw[static_cast<std::size_t>(i)]);
    }
  }
  return rule;
}

double QuadratureRule::integrate(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
  return s;
}

void Region::validate(double domain_length) const {
  if (!(left >= 0.0 && left < right && right <= domain_length)) {
    std::ostringstream os;
    os << "region [" << left << ", " << right << "] must satisfy 0 <= left < right <= "
       << domain_length;
    throw DomainError(os.str());
  }
}

SpectralField SpectralField::unit(int n_modes, int k) {
  SpectralField f = zero(n_modes);
  f.coefficients[k] = 1.0;
  return f;
}

SpectralBasis SpectralBasis::build(double diffusivity, double reaction, double length,
                                   int n_modes) {
  if (!(diffusivity > 0.0)) throw DomainError("diffusivity must be positive");
  if (!(length > 0.0)) throw DomainError("domain length must be positive");
  if (n_modes < 1) throw DomainError("n_modes must be at least 1");
  if (!std::isfinite(reaction)) throw DomainError("reaction coefficient must be finite");

  SpectralBasis b;
  b.diffusivity_ = diffusivity;
  b.reaction_ = reaction;
  b.length_ = length;
  b.eigenvalues_.resize(static_cast<std::size_t>(n_modes));
  for (int k = 0; k < n_modes; ++k) {
    const double w = k * kPi / length;
    b.eigenvalues_[static_cast<std::size_t>(k)] = -diffusivity * w * w + reaction;
  }
  b.adjoint_eigenvalues_ = b.eigenvalues_;
  b.self_adjoint_ = true;
  b.quadrature_ =
      QuadratureRule::composite_gauss_legendre(0.0, length, kGaussPointsPerPanel, kGaussPanels);
  return b;
}

double SpectralBasis::eigenfunction(int k, double x) const {
  if (k == 0) return 1.0 / std::sqrt(length_);
  return std::sqrt(2.0 / length_) * std::cos(k * kPi * x / length_);
}

namespace {

SpectralField project_with(const ScalarFunction& f, const QuadratureRule& rule,
                           const SpectralBasis& basis) {
  const int n = basis.n_modes();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double x = rule.nodes[q];
    const double fw = f(x) * rule.weights[q];
    for (int k = 0; k < n; ++k) c[k] += fw * basis.eigenfunction(k, x);
  }
  return SpectralField(std::move(c));
}

}  // namespace

SpectralField project(const ScalarFunction& f, const SpectralBasis& basis) {
  return project_with(f, basis.quadrature(), basis);
}

SpectralField project_region(const ScalarFunction& f, const Region& region,
                             const SpectralBasis& basis) {
  region.validate(basis.length());
  const auto rule = QuadratureRule::composite_gauss_legendre(region.left, region.right,
                                                             kGaussPointsPerPanel, kGaussPanels);
  return project_with(f, rule, basis);
}

std::vector<double> synthesize(const SpectralField& field, const SpectralBasis& basis,
                               std::span<const double> points) {
  if (field.n_modes() != basis.n_modes())
    throw DomainError("field and basis have different mode counts");
  std::vector<double> out;
  out.reserve(points.size());
  for (double x : points) {
    if (!(x >= 0.0 && x <= basis.length())) {
      std::ostringstream os;
      os << "synthesis point " << x << " lies outside [0, " << basis.length() << "]";
      throw DomainError(os.str());
    }
    double s = 0.0;
    for (int k = 0; k < basis.n_modes(); ++k) s += field.coefficients[k] * basis.eigenfunction(k, x);
    out.push_back(s);
  }
  return out;
}

Eigen::MatrixXd region_gram(const Region& region, const SpectralBasis& basis) {
  region.validate(basis.length());
  const int n = basis.n_modes();
  const double L = basis.length();
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k <= j; ++k) {
      double v;
      if (j == 0 && k == 0)
        v = cos_integral(0, region, L);
      else if (k == 0)
        v = std::sqrt(2.0) * cos_integral(j, region, L);
      else
        v = cos_integral(j - k, region, L) + cos_integral(j + k, region, L);
      g(j, k) = v;
      g(k, j) = v;
    }
  }
  return g;
}

SpectralField apply_p_omega(const SpectralField& field, const Eigen::MatrixXd& gram) {
  if (gram.rows() != field.n_modes() || gram.cols() != field.n_modes())
    throw DomainError("Gram matrix and field dimensions disagree");
  const int n = field.n_modes();
  Eigen::VectorXd out(n);
  // G is symmetric, so row k equals column k (contiguous in column-major storage).
  for (int k = 0; k < n; ++k)
    out[k] = kernels::dot({gram.col(k).data(), static_cast<std::size_t>(n)},
                          {field.coefficients.data(), static_cast<std::size_t>(n)});
  return SpectralField(std::move(out));
}

double gram_inner(const Eigen::VectorXd& c, const Eigen::MatrixXd& gram, const Eigen::VectorXd& d) {
  const auto n = static_cast<std::size_t>(c.size());
  double s = 0.0;
  for (Eigen::Index k = 0; k < gram.cols(); ++k)
    s += d[k] * kernels::dot({gram.col(k).data(), n}, {c.data(), n});
  return s;
}

double region_l2_norm(const SpectralField& field, const Eigen::MatrixXd& gram) {
  if (gram.rows() != field.n_modes() || gram.cols() != field.n_modes())
    throw DomainError("Gram matrix and field dimensions disagree");
  const double q = gram_inner(field.coefficients, gram, field.coefficients);
  if (q < -1e-12) {
    std::ostringstream os;
    os << "region quadratic form is negative (" << q << ")";
    throw ConsistencyError(os.str());
  }
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace fractrack
