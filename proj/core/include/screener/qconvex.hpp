#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "screener/types.hpp"

// Quantitative convexity of |p|^q and of |p| ln(1 + |p|).
//
// For q >= 2 the power function separates from its tangent plane by
// c(q)|y - x|^q; for 1 < q < 2 the separation is c(q)|y - x|^2 (1+|x|+|y|)^(q-2)
// with c(q) = q(q-1)/2. The log variant separates by |y-x|^2 / (2(1+|x|+|y|)).

namespace screener {

enum class ConvexityForm {
  power_q,           // c |y-x|^q
  power_2_weighted,  // c |y-x|^2 (1+|x|+|y|)^(q-2)
  log_weighted,      // c |y-x|^2 / (1+|x|+|y|)
};

const char* to_string(ConvexityForm form);

/// Form implied by the exponent: power_q for q >= 2, power_2_weighted otherwise.
ConvexityForm natural_form(double q);

struct QConvexityCertificate {
  double q = 2.0;
  ConvexityForm form = ConvexityForm::power_q;
  double c = 1.0;
  std::size_t sample_count = 0;
  double worst_ratio = 1.0;  // smallest gap/|y-x|^q seen; always >= c
  // Minimizing normalized configuration: |y - x| = 1, |x| = radius, and
  // angle = angle between x and y - x.
  double min_radius = 0.0;
  double min_angle = 0.0;
};

/// |y|^q - |x|^q - q|x|^(q-2) x.(y - x); the middle term is 0 at x = 0.
double qpower_gap(const Vec& x, const Vec& y, double q);

/// Right-hand side of the sharpened inequality for the given form and constant.
double qpower_bound(const Vec& x, const Vec& y, double q, double c, ConvexityForm form);

/// |y|ln(1+|y|) - |x|ln(1+|x|) - (ln(1+|x|) + |x|/(1+|x|)) (x/|x|).(y - x).
double logpower_gap(const Vec& x, const Vec& y);

/// |y - x|^2 / (2 (1 + |x| + |y|)).
double logpower_bound(const Vec& x, const Vec& y);

struct ConvexityViolation {
  Vec x;
  Vec y;
  double gap = 0.0;
  double bound = 0.0;
};

struct VerificationReport {
  double q = 2.0;
  double c = 1.0;
  ConvexityForm form = ConvexityForm::power_q;
  std::size_t samples = 0;
  std::size_t violation_count = 0;
  std::vector<ConvexityViolation> violations;  // first witnesses, in sample order
  double worst_ratio = 0.0;                    // min over samples of gap / (bound / c)
  bool pass() const { return violation_count == 0; }
};

/// Samples x, y uniformly in [-radius, radius]^n with n drawn from
/// [min_dim, max_dim] and checks qpower_gap >= qpower_bound. `extra_pairs`
/// are checked first, so known witnesses always appear in the report.
VerificationReport verify_strong_convexity(
    double q, double c, const SampleSpec& samples,
    std::span<const std::pair<Vec, Vec>> extra_pairs = {},
    std::size_t max_witnesses = 32);

/// Same sampling for the logarithmic inequality (c is fixed at 1/2).
VerificationReport verify_log_convexity(const SampleSpec& samples,
                                        std::size_t max_witnesses = 32);

struct SearchSpec {
  int radial_points = 241;
  int angular_points = 181;
  int refinements = 8;
  int refine_points = 41;
  double safety = 0.99;
};

/// Certified lower bound for c(q). For q >= 2 the search runs over the
/// normalized configurations |y - x| = 1 (homogeneity) in a plane (rotation
/// invariance); the region |x| > 1 + (2/q)^(1/(q-2)) is excluded analytically
/// because the ratio there is at least 1, which x = 0 already attains.
/// For 1 < q < 2 the closed form q(q-1)/2 of the weighted form is returned.
QConvexityCertificate derive_c(double q, const SearchSpec& spec = {});

/// Like derive_c but insists on a specific form; power_q with q < 2 throws.
QConvexityCertificate derive_c(double q, ConvexityForm requested,
                               const SearchSpec& spec = {});

}  // namespace screener
