#pragma once

// Eigenbasis of the 1D Neumann operator A = a d^2/dx^2 + c on (0, L):
//
//   lambda_k = -a (k pi / L)^2 + c,
//   xi_0(x)  = 1 / sqrt(L),   xi_k(x) = sqrt(2 / L) cos(k pi x / L).
//
// Fields are stored by their coefficients (phi, xi_k) in this basis. Region
// restriction chi_omega and its adjoint appear only through the Gram matrix
// G_jk = int_omega xi_j xi_k dx, so that p_omega acts as c -> G c.

#include <Eigen/Core>
#include <functional>
#include <span>
#include <vector>

namespace fractrack {

// Composite Gauss-Legendre rule on an interval.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadratureRule composite_gauss_legendre(double left, double right, int points_per_panel,
                                                 int panels);

  double integrate(const std::function<double(double)>& f) const;
};

inline constexpr int kGaussPointsPerPanel = 8;
inline constexpr int kGaussPanels = 64;

struct Region {
  double left = 0.0;
  double right = 1.0;

  double length() const { return right - left; }
  bool contains(double x) const { return x >= left && x <= right; }
  // Throws DomainError unless 0 <= left < right <= domain_length.
  void validate(double domain_length) const;

  bool operator==(const Region&) const = default;
};

struct SpectralField {
  Eigen::VectorXd coefficients;

  SpectralField() = default;
  explicit SpectralField(Eigen::VectorXd c) : coefficients(std::move(c)) {}
  static SpectralField zero(int n_modes) { return SpectralField(Eigen::VectorXd::Zero(n_modes)); }
  static SpectralField unit(int n_modes, int k);

  int n_modes() const { return static_cast<int>(coefficients.size()); }
};

class SpectralBasis {
 public:
  // Throws DomainError for a <= 0, L <= 0 or n_modes < 1.
  static SpectralBasis build(double diffusivity, double reaction, double length, int n_modes);

  double diffusivity() const { return diffusivity_; }
  double reaction() const { return reaction_; }
  double length() const { return length_; }
  int n_modes() const { return static_cast<int>(eigenvalues_.size()); }

  std::span<const double> eigenvalues() const { return eigenvalues_; }
  double eigenvalue(int k) const { return eigenvalues_[static_cast<std::size_t>(k)]; }

  // Only the self-adjoint case is supported; the adjoint eigenvalues are
  // carried so the adjoint solver can check that assumption.
  std::span<const double> adjoint_eigenvalues() const { return adjoint_eigenvalues_; }
  bool self_adjoint() const { return self_adjoint_; }

  double eigenfunction(int k, double x) const;

  const QuadratureRule& quadrature() const { return quadrature_; }

 private:
  SpectralBasis() = default;

  double diffusivity_ = 1.0;
  double reaction_ = 0.0;
  double length_ = 1.0;
  bool self_adjoint_ = true;
  std::vector<double> eigenvalues_;
  std::vector<double> adjoint_eigenvalues_;
  QuadratureRule quadrature_;
};

using ScalarFunction = std::function<double(double)>;

// Coefficients (f, xi_k) over the whole domain.
SpectralField project(const ScalarFunction& f, const SpectralBasis& basis);

// Coefficients of chi*_omega f, i.e. (f, xi_k) integrated over the region only.
SpectralField project_region(const ScalarFunction& f, const Region& region,
                             const SpectralBasis& basis);

// Evaluates sum_k c_k xi_k(x) at each point. Throws DomainError outside [0, L].
std::vector<double> synthesize(const SpectralField& field, const SpectralBasis& basis,
                               std::span<const double> points);

// Closed-form G_jk = int_omega xi_j xi_k dx.
Eigen::MatrixXd region_gram(const Region& region, const SpectralBasis& basis);

SpectralField apply_p_omega(const SpectralField& field, const Eigen::MatrixXd& gram);

// sqrt(c^T G c) = ||chi_omega phi||_{L2(omega)}.
double region_l2_norm(const SpectralField& field, const Eigen::MatrixXd& gram);

// c^T G d with the symmetric Gram matrix; column-wise dot products go through
// the SIMD kernels.
double gram_inner(const Eigen::VectorXd& c, const Eigen::MatrixXd& gram, const Eigen::VectorXd& d);

}  // namespace fractrack
