#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace ser {

// Regularized incomplete beta function I_x(a, b), evaluated with the Lentz
// continued fraction; the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) keeps the
// fraction in its fast-converging region.
inline double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("beta parameters must be > 0");
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("x must lie in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(log_front) / a;

  const double tiny = 1e-300;
  double f = 1.0, c = 1.0, d = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const int m = i / 2;
    double numerator;
    if (i == 0)
      numerator = 1.0;
    else if (i % 2 == 0)
      numerator = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    else
      numerator = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));

    d = 1.0 + numerator * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = 1.0 + numerator / c;
    if (std::abs(c) < tiny) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(1.0 - delta) < 1e-14) return front * (f - 1.0);
  }
  throw std::runtime_error("incomplete beta did not converge");
}

// Upper tail P(T >= t) of Student's t distribution.
inline double student_t_upper_tail(double t, double degrees_of_freedom) {
  if (degrees_of_freedom <= 0.0)
    throw std::invalid_argument("degrees of freedom must be > 0");
  const double x = degrees_of_freedom / (degrees_of_freedom + t * t);
  const double half_tail = 0.5 * incomplete_beta(degrees_of_freedom / 2.0, 0.5, x);
  return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

struct WelchResult {
  double t = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;  // one-sided, alternative mean(first) > mean(second)
};

// Welch's unequal-variance t-test with the one-sided alternative that the
// first sample's mean exceeds the second's.
inline WelchResult welch_one_sided(std::span<const double> first,
                                   std::span<const double> second) {
  const std::size_t n1 = first.size(), n2 = second.size();
  if (n1 < 2 || n2 < 2)
    throw std::invalid_argument("welch test needs at least 2 observations per sample");

  double m1 = 0.0, m2 = 0.0;
  for (double v : first) m1 += v;
  for (double v : second) m2 += v;
  m1 /= n1;
  m2 /= n2;
  double v1 = 0.0, v2 = 0.0;
  for (double v : first) v1 += (v - m1) * (v - m1);
  for (double v : second) v2 += (v - m2) * (v - m2);
  v1 /= n1 - 1;
  v2 /= n2 - 1;

  const double se1 = v1 / n1, se2 = v2 / n2;
  WelchResult result;
  if (se1 + se2 == 0.0) {
    // Degenerate zero-variance samples: the direction alone decides.
    result.t = m1 == m2 ? 0.0
                        : std::copysign(std::numeric_limits<double>::infinity(), m1 - m2);
    result.degrees_of_freedom = static_cast<double>(n1 + n2 - 2);
    result.p_value = m1 > m2 ? 0.0 : (m1 < m2 ? 1.0 : 0.5);
    return result;
  }

  result.t = (m1 - m2) / std::sqrt(se1 + se2);
  result.degrees_of_freedom =
      (se1 + se2) * (se1 + se2) /
      (se1 * se1 / (n1 - 1) + se2 * se2 / (n2 - 1));
  result.p_value = student_t_upper_tail(result.t, result.degrees_of_freedom);
  return result;
}

}  // namespace ser
