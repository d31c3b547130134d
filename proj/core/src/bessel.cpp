#include "ecomb/bessel.hpp"

#include <cmath>
#include <cstdlib>

#include "ecomb/errors.hpp"

namespace ecomb {

std::vector<double> bessel_jn_array(int n_max, double x) {
  if (n_max < 0) throw ConfigError("bessel_jn_array: n_max must be >= 0");
  if (x < 0.0) throw ConfigError("bessel_jn_array: x must be >= 0");

  std::vector<double> j(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }

  // Starting order well above both n_max and the turning point ~x.
  int start = n_max + 16 + static_cast<int>(std::ceil(1.2 * x));
  if (start % 2 != 0) ++start;

  double fnp1 = 0.0;
  double fn = 1e-300;
  double sum = 0.0; // accumulates J_0 + 2 J_2 + 2 J_4 + ...
  for (int n = start; n >= 1; --n) {
    const double fnm1 = (2.0 * n / x) * fn - fnp1;
    fnp1 = fn;
    fn = fnm1;
    if (n - 1 <= n_max) j[n - 1] = fn;
    if ((n - 1) % 2 == 0) sum += (n - 1 == 0) ? fn : 2.0 * fn;
    if (std::abs(fn) > 1e250) { // rescale to avoid overflow on long descents
      fn *= 1e-250;
      fnp1 *= 1e-250;
      sum *= 1e-250;
      for (auto& v : j) v *= 1e-250;
    }
  }
  const double scale = 1.0 / sum;
  for (auto& v : j) v *= scale;
  return j;
}

double bessel_jn(int n, double x) {
  const int na = std::abs(n);
  const double sign = (n < 0 && na % 2 != 0) ? -1.0 : 1.0;
  if (x >= 0.0) return sign * bessel_jn_array(na, x)[na];
  const double xsign = (na % 2 != 0) ? -1.0 : 1.0;
  return sign * xsign * bessel_jn_array(na, -x)[na];
}

} // namespace ecomb
