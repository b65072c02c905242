#pragma once

#include <complex>

namespace nhemit {

// Arithmetic-geometric mean with the "right" square-root choice at each
// step, valid for complex arguments.
std::complex<double> agm(std::complex<double> a, std::complex<double> b);

// Complete elliptic integral of the first kind, parameter convention
// K(m) = int_0^{pi/2} dt / sqrt(1 - m sin^2 t). Analytic off m in [1, inf).
std::complex<double> elliptic_k(std::complex<double> m);

}  // namespace nhemit
