#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "screener/convexgrid.hpp"
#include "screener/preference.hpp"
#include "screener/qconvex.hpp"
#include "screener/types.hpp"

// Variational models L(u) = sum_k w_k [F1(x_k, y_b(x_k, Du_k)) + F0(x_k, u_k)]
// and checkers for their structural hypotheses.

namespace screener {

/// Scalar field on X: a constant, or a piecewise-linear table along one axis
/// (constant extrapolation outside the knots).
struct ScalarProfile {
  enum class Kind { constant, piecewise_linear };

  Kind kind = Kind::constant;
  double level = 1.0;
  int axis = 0;
  std::vector<double> knots;
  std::vector<double> values;

  static ScalarProfile constant(double value);
  static ScalarProfile piecewise_linear(int axis, std::vector<double> knots,
                                        std::vector<double> values);

  void validate() const;
  double operator()(const Vec& x) const;
  double min() const;
  double max() const;
  double lipschitz() const;
};

/// Integrand data. F1 is written in the product variable y; the energy
/// composes it with the b-exponential map.
struct Functional {
  std::string name;
  double q = 2.0;
  double delta = 1.0;  // modulus in the (q, delta)-strong convexity hypothesis
  ConvexityForm form = ConvexityForm::power_q;
  ScalarProfile density;       // gamma
  bool uniformly_positive = false;
  double lambda = 0.0;         // inf gamma when uniformly positive

  std::function<double(const Vec& x, const Vec& y)> f1;
  std::function<Vec(const Vec& x, const Vec& y)> f1_grad;  // D_y F1
  std::function<Mat(const Vec& x, const Vec& y)> f1_hess;  // D_yy F1
  std::function<double(const Vec& x, double z)> f0;
  std::function<double(const Vec& x, double z)> f0_dz;
  std::function<double(const Vec& x, double z)> f0_dzz;

  std::function<double(double z)> eta;     // envelope for |D_z F0|
  std::function<double(const Vec& y)> g;    // envelope for |D_p F1| and |D_{x_i p_i} F1|

  /// Linear part of F0 in z when F0 = f(x) z, used by the ruled-region query.
  std::function<double(const Vec& x)> source;

  void validate() const;
};

/// Rochet-Chone integrand (|p|^q/q - x.p) gamma(x) + z gamma(x).
/// delta = lambda c(q) / q, where c(q) is the certified constant of the
/// natural convexity form for q. Throws InvalidArgument for q <= 1 or a
/// density that is not uniformly positive.
Functional rochet_chone(double q, const ScalarProfile& gamma, const Box& x_domain);

/// F1 = coefficient |p|^q, F0 = f(x) z. coefficient = 1/q gives the 1-d
/// reference problem with f = 1.
Functional power_source(double q, const ScalarProfile& f, const Box& x_domain,
                        double coefficient = -1.0);

/// F1 = |p| ln(1 + |p|), F0 = f(x) z, with the logarithmic convexity form.
Functional log_power(const ScalarProfile& f, const Box& x_domain);

/// F1 = -x.p gamma(x), F0 = z gamma(x): linear in p, so no strong convexity.
Functional linear_tariff(const ScalarProfile& gamma, const Box& x_domain, double delta = 1.0);

/// Participation option u >= a0 + b(x, y0).
struct ParticipationConstraint {
  double a0 = 0.0;
  Vec y0;

  void validate(const PreferenceFunction& b) const;
};

/// Phi(x, p) = F1(x, y_b(x, p)) with derivatives in p.
struct IntegrandValue {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

IntegrandValue evaluate_integrand(const Functional& model, const PreferenceFunction& b,
                                  const Vec& x, const Vec& p, bool with_hessian);

/// Discrete energy with trapezoidal weights and the gradients of
/// gradient_field. Node terms are computed in parallel and summed in
/// lexicographic node order.
class EnergyEvaluator {
 public:
  EnergyEvaluator(const Functional& model, const PreferenceFunction& b, const GridDomain& domain);

  double value(std::span<const double> u) const;
  Vec gradient(std::span<const double> u) const;
  /// Returns the value and fills the gradient.
  double value_and_gradient(std::span<const double> u, Vec& grad) const;
  Eigen::SparseMatrix<double> hessian(std::span<const double> u) const;

  const GridDomain& domain() const { return domain_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  Mat gradients(std::span<const double> u) const;

  const Functional& model_;
  const PreferenceFunction& b_;
  GridDomain domain_;
  std::vector<Vec> points_;
  std::vector<double> weights_;
  std::vector<Eigen::SparseMatrix<double>> ops_;
};

double evaluate_energy(const Functional& model, const PreferenceFunction& b, const ConvexGrid& u);

struct HypothesisViolation {
  Vec x;
  Vec p1;
  Vec p2;
  double gap = 0.0;
  double bound = 0.0;
};

struct H1Report {
  std::size_t samples = 0;
  std::size_t violation_count = 0;
  std::vector<HypothesisViolation> violations;
  double worst_ratio = 0.0;  // min gap / bound over samples with bound > 0
  double delta = 0.0;
  ConvexityForm form = ConvexityForm::power_q;
  bool pass() const { return violation_count == 0; }
};

/// Samples x in X and p1, p2 in the ball of radius samples.radius and checks
/// Phi(p1) - Phi(p2) >= D_p Phi(p2).(p1 - p2) + delta * bound(p1, p2).
H1Report check_H1(const Functional& model, const PreferenceFunction& b, const SampleSpec& samples,
                  std::size_t max_witnesses = 16);

struct H2H3Report {
  std::size_t samples = 0;
  double max_ratio_f0 = 0.0;     // |D_z F0| / eta(z)
  double max_ratio_dp = 0.0;     // |D_p F1| / g(y)
  double max_ratio_mixed = 0.0;  // |D_{x_i p_i} F1| / g(y)
  double tolerance = 1e-6;
  bool pass = false;
};

/// z is sampled in [-radius, radius] and p in the ball of that radius. The
/// mixed derivative is a central difference in x of the composed D_p F1.
H2H3Report check_H2_H3(const Functional& model, const PreferenceFunction& b,
                       const SampleSpec& samples, double tolerance = 1e-6);

}  // namespace screener
