#ifndef DISPERSIM_TRANSFORM_HPP
#define DISPERSIM_TRANSFORM_HPP

#include <functional>

#include "dispersim/grid.hpp"

namespace dispersim {

enum class Direction { forward, inverse };

/// Unitary discrete Fourier transform with the box-centered phase
/// convention: fhat(xi_k) = N^{-n/2} sum_j f(x_j) exp(-i xi_k . x_j).
/// A plane wave on a lattice frequency maps to a single mode and
/// Parseval holds with no stray constants.
ComplexField spectral_transform(const ComplexField& f, Direction dir);

/// inverse_transform(multiplier(xi) * forward_transform(f)).
ComplexField apply_multiplier(const ComplexField& f,
                              const std::function<cplx(const Vec3&)>& m);

}  // namespace dispersim

#endif
