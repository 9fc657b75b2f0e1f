#include "dispersim/symmetry.hpp"

#include <cmath>

#include "dispersim/model.hpp"
#include "dispersim/transform.hpp"

namespace dispersim {

namespace {

void require_boost(const Grid& g, const BoostSpec& b) {
  if (!is_commensurate(b.velocity, g.box_length()))
    throw ConfigError("boost velocity is not lattice-commensurate");
}

// Spectrally exact translation f(x) -> f(x - shift).
ComplexField translate(const ComplexField& f, const Vec3& shift) {
  return apply_multiplier(f, [&](const Vec3& xi) {
    double ph = 0.0;
    for (int d = 0; d < 3; ++d) ph += xi[d] * shift[d];
    return std::polar(1.0, -ph);
  });
}

double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

ComplexField galilei(const ComplexField& f, const BoostSpec& b) {
  const Grid& g = f.grid();
  require_boost(g, b);
  const Vec3& v = b.velocity;
  Vec3 shift{0, 0, 0};
  for (int d = 0; d < 3; ++d) shift[d] = b.offset[d] + v[d] * b.time;

  ComplexField out = translate(f, shift);
  double c0 = -0.5 * dot(v, v) * b.time - dot(b.offset, v);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Vec3 x = g.point(i);
    out[i] *= std::polar(1.0, c0 + dot(x, v));
  }
  return out;
}

ComplexField galilei_inverse(const ComplexField& f, const BoostSpec& b) {
  const Grid& g = f.grid();
  require_boost(g, b);
  const Vec3& v = b.velocity;
  Vec3 shift{0, 0, 0};
  for (int d = 0; d < 3; ++d) shift[d] = -(b.offset[d] + v[d] * b.time);

  double c0 = 0.5 * dot(v, v) * b.time + dot(b.offset, v);
  ComplexField tmp = f;
  for (std::size_t i = 0; i < tmp.size(); ++i) {
    Vec3 x = g.point(i);
    tmp[i] *= std::polar(1.0, c0 - dot(x, v));
  }
  return translate(tmp, shift);
}

SpinorField modulation(double alpha, double gamma, double t,
                       const SpinorField& s) {
  double w = alpha * alpha * t + gamma;
  cplx up = std::polar(1.0, -0.5 * w);
  cplx dn = std::conj(up);
  SpinorField out = s;
  for (auto& z : out.up.values()) z *= up;
  for (auto& z : out.down.values()) z *= dn;
  return out;
}

SpinorField modulation_inverse(double alpha, double gamma, double t,
                               const SpinorField& s) {
  return modulation(alpha, -gamma, -t, s);
}

namespace {

ComplexField conj_field(const ComplexField& f) {
  ComplexField out = f;
  for (auto& z : out.values()) z = std::conj(z);
  return out;
}

}  // namespace

SpinorField galilei_spinor(const SpinorField& s, const BoostSpec& b) {
  return {galilei(s.up, b), conj_field(galilei(conj_field(s.down), b))};
}

SpinorField galilei_spinor_inverse(const SpinorField& s, const BoostSpec& b) {
  return {galilei_inverse(s.up, b),
          conj_field(galilei_inverse(conj_field(s.down), b))};
}

}  // namespace dispersim
