#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "screener/types.hpp"

// Generalized convexity toolkit: preference functions b(x, y), the
// b-exponential map, discrete b-transforms and structural checkers.

namespace screener {

/// Axis-aligned box [lower, upper].
struct Box {
  Vec lower;
  Vec upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& p, double tol = 0.0) const;
  Vec clamp(const Vec& p) const;
  static Box cube(int dim, double lo, double hi);
};

/// Smooth convex scalar potential with derivatives, used to build the
/// separable and rank-one preference families.
struct ConvexPotential {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;

  /// (k/2)|x|^2
  static ConvexPotential quadratic(double k);
  /// k sqrt(1 + |x|^2); its gradient has norm < k everywhere.
  static ConvexPotential hyperbolic(double k);
  static ConvexPotential zero();
};

enum class PreferenceKind { bilinear, separable_concave, rank_one_perturbed, custom };

const char* to_string(PreferenceKind kind);

class PreferenceFunction {
 public:
  PreferenceFunction(PreferenceKind kind, std::string name, Box x_domain, Box y_domain);
  virtual ~PreferenceFunction() = default;

  virtual double value(const Vec& x, const Vec& y) const = 0;
  virtual Vec grad_x(const Vec& x, const Vec& y) const = 0;
  virtual Vec grad_y(const Vec& x, const Vec& y) const = 0;
  /// Entry (i, j) is d^2 b / dx_i dy_j.
  virtual Mat cross_hessian(const Vec& x, const Vec& y) const = 0;
  /// Closed-form b-exponential map, when the family has one.
  virtual std::optional<Vec> exponential_closed_form(const Vec& x, const Vec& p) const;
  /// Potential phi with "u is b-convex iff u + phi is convex" when the family
  /// admits one (zero for bilinear, F for separable_concave).
  virtual std::optional<double> convexifying_potential(const Vec& x) const;

  PreferenceKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const Box& x_domain() const { return x_domain_; }
  const Box& y_domain() const { return y_domain_; }
  int dim() const { return x_domain_.dim(); }

 private:
  PreferenceKind kind_;
  std::string name_;
  Box x_domain_;
  Box y_domain_;
};

using PreferencePtr = std::shared_ptr<const PreferenceFunction>;

/// b(x, y) = x.y
PreferencePtr make_bilinear(Box x_domain, Box y_domain);
/// b(x, y) = x.y - F(x) - G(y)
PreferencePtr make_separable_concave(Box x_domain, Box y_domain, ConvexPotential f,
                                     ConvexPotential g);
/// b(x, y) = x.y + F(x)(a.y)
PreferencePtr make_rank_one_perturbed(Box x_domain, Box y_domain, ConvexPotential f, Vec a);

/// Compiled-in custom preference functions, selected by name:
///   "quartic_perturbed"  b = x.y - eps (x.y)^2        (params: eps)
///   "degenerate_twist"   b = x_1 y_1                  (2-d only)
PreferencePtr make_custom(const std::string& name, Box x_domain, Box y_domain,
                          const std::map<std::string, double>& params = {});
std::vector<std::string> custom_preference_names();

struct NewtonOptions {
  double tol = 1e-10;
  int max_iterations = 50;
  double singular_tol = 1e-12;  // on |det| relative to the scale of the Jacobian
  double range_tol = 1e-9;      // slack when testing membership in the closed box
  bool check_range = true;
};

/// y with D_x b(x, y) = p, by damped Newton started at y = p.
/// Throws SingularTwist, NoConvergence or OutOfRange.
Vec b_exponential(const PreferenceFunction& b, const Vec& x, const Vec& p,
                  const NewtonOptions& options = {});

/// x with D_y b(x, y) = target, by damped Newton started at x = target.
/// This inverts the other half of the twist and realizes affine curves in
/// the X-side image.
Vec x_exponential(const PreferenceFunction& b, const Vec& y, const Vec& target,
                  const NewtonOptions& options = {});

struct TransformResult {
  std::vector<double> values;
  std::vector<std::size_t> argmax;  // index of the maximizing competitor
};

/// u^b(x) = max_j { b(x, y_j) - v_j } over a finite Y-grid. Cost is
/// O(|X-grid| * |Y-grid|) evaluations of b. Ties go to the smallest index.
TransformResult b_transform(const PreferenceFunction& b, std::span<const Vec> x_points,
                            std::span<const Vec> y_points, std::span<const double> v);

/// u^{b*}(y) = max_i { b(x_i, y) - u_i } over a finite X-grid.
TransformResult bstar_transform(const PreferenceFunction& b, std::span<const Vec> x_points,
                                std::span<const Vec> y_points, std::span<const double> u);

/// (u^{b*})^b on the X-grid.
std::vector<double> double_transform(const PreferenceFunction& b, std::span<const Vec> x_points,
                                     std::span<const Vec> y_points, std::span<const double> u);

struct BConvexityResult {
  bool b_convex = false;
  double max_deviation = 0.0;
};

BConvexityResult is_b_convex(const PreferenceFunction& b, std::span<const Vec> x_points,
                             std::span<const Vec> y_points, std::span<const double> u,
                             double tol);

struct TwistReport {
  std::size_t samples = 0;
  double min_abs_det = 0.0;
  Vec witness_x;
  Vec witness_y;
  double threshold = 0.0;
  bool pass = false;
};

/// Samples (x, y) uniformly in X x Y and reports min |det D_xy b|.
TwistReport check_twist(const PreferenceFunction& b, const SampleSpec& samples,
                        double threshold = 1e-6);

struct CrossCurvatureReport {
  std::size_t samples = 0;
  double min_value = 0.0;
  Vec witness_x;
  Vec witness_y;
  Vec witness_xi;   // direction of the affine segment in D_y b(., y0)
  Vec witness_eta;  // direction of the affine segment in D_x b(x0, .)
  double tolerance = 0.0;
  bool pass = false;
};

/// Evaluates d^4/ds^2 dt^2 b(x(s), y(t)) at (0, 0), where s -> D_y b(x(s), y0)
/// and t -> D_x b(x0, y(t)) are affinely parameterized segments. The mixed
/// Hessian supplies the first two derivatives analytically; the remaining
/// d^2/ds dt is taken with 5-point central stencils in s and t.
double cross_curvature(const PreferenceFunction& b, const Vec& x0, const Vec& y0,
                       const Vec& xi, const Vec& eta);

CrossCurvatureReport check_cross_curvature(const PreferenceFunction& b,
                                           const SampleSpec& samples,
                                           double tolerance = 1e-8);

/// Coordinates centered at a b-support pair (x0, y0):
///   x~ = D_y b(x, y0) - D_y b(x0, y0),  y~ = D_x b(x0, y) - D_x b(x0, y0),
///   u~ = u - [u(x0) + b(x, y0) - b(x0, y0)],
///   b~ = b(x, y) - [b(x0, y) + b(x, y0) - b(x0, y0)].
/// `residual(i, j)` is b~ - x~.y~ at (x_i, y_j), the quartic correction.
struct NormalizedChart {
  Vec x0;
  Vec y0;
  std::vector<Vec> x_tilde;
  std::vector<Vec> y_tilde;
  std::vector<double> u_tilde;
  Mat residual;
  double max_abs_residual = 0.0;

  /// Original-coordinate point for a tilde coordinate, via x_exponential.
  Vec to_x(const PreferenceFunction& b, const Vec& x_tilde_point) const;
};

/// `u` holds values at `x_points`; `x0_index` selects the base node and y0
/// must be a b-support selection for u there. Throws SingularTwist when
/// D_xy b(x0, y0) is singular.
NormalizedChart normalize_coordinates(const PreferenceFunction& b,
                                      std::span<const Vec> x_points,
                                      std::span<const double> u, std::size_t x0_index,
                                      const Vec& y0, std::span<const Vec> y_points);

/// Registry lookup used by configuration files.
struct PreferenceSpec {
  std::string kind = "bilinear";  // bilinear | separable_concave | rank_one_perturbed | custom
  std::string name;               // custom registry entry
  std::string potential = "quadratic";  // quadratic | hyperbolic | zero  (F)
  double potential_scale = 0.0;
  std::string y_potential = "zero";  // G for separable_concave
  double y_potential_scale = 0.0;
  std::vector<double> a;            // rank-one direction
  std::map<std::string, double> params;
};

PreferencePtr make_preference(const PreferenceSpec& spec, Box x_domain, Box y_domain);

}  // namespace screener
