#ifndef DISPERSIM_SYMMETRY_HPP
#define DISPERSIM_SYMMETRY_HPP

#include "dispersim/grid.hpp"

namespace dispersim {

/// Galilei boost parameters g_{v,y}(t). Velocity must be commensurate with
/// the frequency lattice so the modulation e^{i x.v} is grid-periodic.
struct BoostSpec {
  Vec3 velocity{0, 0, 0};
  Vec3 offset{0, 0, 0};
  double time = 0.0;
};

/// (g f)(x) = e^{-i(|v|^2 t/2 + y.v)} e^{i x.v} f(x - y - v t).
/// The translation is the exact Fourier phase, so any real shift is allowed.
/// The phase convention is fixed by requiring the conjugacy identity
/// g(t) free(t) = free(t) g(0) to hold to machine precision.
ComplexField galilei(const ComplexField& f, const BoostSpec& b);

/// Exact inverse; for y = 0 this coincides with galilei at velocity -v.
ComplexField galilei_inverse(const ComplexField& f, const BoostSpec& b);

/// Component-wise diagonal phase diag(e^{-i w(t)/2}, e^{+i w(t)/2}) with
/// w(t) = alpha^2 t + gamma.
SpinorField modulation(double alpha, double gamma, double t,
                       const SpinorField& s);
SpinorField modulation_inverse(double alpha, double gamma, double t,
                               const SpinorField& s);

/// Vector-valued boost: first component g psi1, second conj(g conj(psi2)).
SpinorField galilei_spinor(const SpinorField& s, const BoostSpec& b);
SpinorField galilei_spinor_inverse(const SpinorField& s, const BoostSpec& b);

}  // namespace dispersim

#endif
