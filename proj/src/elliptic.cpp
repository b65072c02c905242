#include "nhemit/elliptic.hpp"

#include <cmath>
#include <numbers>

#include "nhemit/errors.hpp"

namespace nhemit {

std::complex<double> agm(std::complex<double> a, std::complex<double> b) {
  for (int it = 0; it < 64; ++it) {
    const auto an = 0.5 * (a + b);
    auto bn = std::sqrt(a * b);
    if (std::abs(an - bn) > std::abs(an + bn)) bn = -bn;
    a = an;
    b = bn;
    if (std::abs(a - b) <= 1e-15 * std::abs(a)) return a;
  }
  throw ConvergenceError("AGM iteration did not converge");
}

std::complex<double> elliptic_k(std::complex<double> m) {
  if (std::abs(m.imag()) <= 1e-14 * std::max(1.0, std::abs(m)) && m.real() >= 1.0)
    throw BranchAmbiguityError("elliptic K evaluated on its branch cut m >= 1");
  return std::numbers::pi / (2.0 * agm(1.0, std::sqrt(1.0 - m)));
}

}  // namespace nhemit
