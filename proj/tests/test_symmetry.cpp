#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dispersim/propagate.hpp"
#include "dispersim/symmetry.hpp"
#include "test_util.hpp"

using namespace dispersim;
using test::random_field;
using test::random_smooth_field;
using test::rel_l2_error;

namespace {

const double kUnit = 2.0 * std::numbers::pi / 40.0;  // L = 40 mode spacing

}  // namespace

TEST_CASE("galilei identity and phase-only cases") {
  auto g = make_grid(1, 128, 40.0);
  ComplexField f = random_field(g, 31);

  CHECK(rel_l2_error(galilei(f, {{0, 0, 0}, {0, 0, 0}, 1.7}), f) < 1e-14);

  // t = 0, y = 0: pure modulation e^{i x.v}, an isometry.
  BoostSpec b{{kUnit * 5.0, 0, 0}, {0, 0, 0}, 0.0};
  ComplexField out = galilei(f, b);
  CHECK(lp_norm(out, 2.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-12));
  for (std::size_t j = 0; j < f.size(); ++j) {
    cplx expected = f[j] * std::polar(1.0, g->point(j)[0] * b.velocity[0]);
    CHECK(std::abs(out[j] - expected) < 1e-10);
  }
}

TEST_CASE("galilei isometry and inverse round trip") {
  for (int dim : {1, 3}) {
    auto g = make_grid(dim, dim == 3 ? 16 : 128, 40.0);
    ComplexField f = random_field(g, 32 + dim);
    BoostSpec b{{kUnit * 3.0, 0, 0}, {1.3, 0, 0}, 2.5};
    if (dim == 3) b.velocity[2] = -kUnit * 2.0;

    ComplexField out = galilei(f, b);
    CHECK(std::abs(lp_norm(out, 2.0) / lp_norm(f, 2.0) - 1.0) < 1e-12);
    CHECK(rel_l2_error(galilei_inverse(out, b), f) < 1e-12);
  }
}

TEST_CASE("galilei inverse with y=0 equals the boost at -v") {
  // Band-limited input: a boost shifts the spectrum by v, and modes pushed
  // past Nyquist would alias, so the identity is exact only below the band.
  auto g = make_grid(1, 128, 40.0);
  ComplexField f = random_smooth_field(g, 33, 16);
  BoostSpec b{{kUnit * 4.0, 0, 0}, {0, 0, 0}, 1.5};
  BoostSpec neg{{-kUnit * 4.0, 0, 0}, {0, 0, 0}, 1.5};
  CHECK(rel_l2_error(galilei_inverse(f, b), galilei(f, neg)) < 1e-12);
}

TEST_CASE("galilei with v=0 is a plain translation") {
  auto g = make_grid(1, 128, 40.0);
  ComplexField f = random_smooth_field(g, 34);
  double a = 4.0 * g->spacing();
  BoostSpec b{{0, 0, 0}, {a, 0, 0}, 0.9};
  ComplexField out = galilei(f, b);
  // f(x - a) on lattice points: index shift by 4 with wraparound.
  for (std::size_t j = 0; j < f.size(); ++j) {
    std::size_t src = (j + f.size() - 4) % f.size();
    CHECK(std::abs(out[j] - f[src]) < 1e-10);
  }
}

TEST_CASE("galilei conjugacy with the free flow") {
  // g_v(t) e^{-itH_0} = e^{-itH_0} g_v(0): the phase convention is pinned
  // by this identity.
  // Band-limited fields: the boost shifts the spectrum by v, and the lattice
  // identity is exact only while no mode wraps past Nyquist.
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 10u}) {
    auto g = make_grid(1, 128, 40.0);
    ComplexField f = random_smooth_field(g, seed, 16);
    for (double mode : {1.0, 3.0, -5.0}) {
      BoostSpec bt{{kUnit * mode, 0, 0}, {0, 0, 0}, 1.75};
      BoostSpec b0{{kUnit * mode, 0, 0}, {0, 0, 0}, 0.0};
      ComplexField lhs = galilei(free_evolve(f, bt.time), bt);
      ComplexField rhs = free_evolve(galilei(f, b0), bt.time);
      CHECK(rel_l2_error(lhs, rhs) < 1e-10);
    }
  }
}

TEST_CASE("boosted Gaussian moments") {
  auto g = make_grid(1, 512, 40.0);
  ComplexField f(g);
  for (std::size_t j = 0; j < f.size(); ++j) {
    double x = g->point(j)[0];
    f[j] = std::exp(-x * x);
  }
  double v = kUnit * 6.0, t = 2.0;
  ComplexField out = galilei(f, {{v, 0, 0}, {0, 0, 0}, t});

  double mass = 0.0, xbar = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    double w = std::norm(out[j]);
    mass += w;
    xbar += g->point(j)[0] * w;
  }
  xbar /= mass;
  CHECK(xbar == doctest::Approx(v * t).epsilon(1e-6));

  // Momentum centroid from the spectral side.
  ComplexField ohat = spectral_transform(out, Direction::forward);
  double pmass = 0.0, pbar = 0.0;
  for (std::size_t k = 0; k < ohat.size(); ++k) {
    double w = std::norm(ohat[k]);
    pmass += w;
    pbar += g->freq_point(k)[0] * w;
  }
  pbar /= pmass;
  CHECK(pbar == doctest::Approx(v).epsilon(1e-6));
}

TEST_CASE("galilei rejects non-commensurate velocities") {
  auto g = make_grid(1, 64, 40.0);
  ComplexField f = random_field(g, 40);
  CHECK_THROWS_AS(galilei(f, {{0.1234, 0, 0}, {0, 0, 0}, 0.0}), ConfigError);
}

TEST_CASE("modulation properties") {
  auto g = make_grid(1, 64, 40.0);
  SpinorField s(g);
  s.up = random_field(g, 50);
  s.down = random_field(g, 51);

  // t = 0, gamma = 0: identity.
  SpinorField id = modulation(1.3, 0.0, 0.0, s);
  CHECK(rel_l2_error(id.up, s.up) < 1e-14);
  CHECK(rel_l2_error(id.down, s.down) < 1e-14);

  // Phase additivity in t at gamma = 0.
  SpinorField a = modulation(1.3, 0.0, 0.75, modulation(1.3, 0.0, 1.5, s));
  SpinorField b = modulation(1.3, 0.0, 2.25, s);
  CHECK(rel_l2_error(a.up, b.up) < 1e-13);
  CHECK(rel_l2_error(a.down, b.down) < 1e-13);

  // Componentwise isometry and exact inverse.
  SpinorField m = modulation(0.8, 0.4, 3.0, s);
  CHECK(std::abs(lp_norm(m.up, 2.0) - lp_norm(s.up, 2.0)) < 1e-14);
  CHECK(std::abs(lp_norm(m.down, 2.0) - lp_norm(s.down, 2.0)) < 1e-14);
  SpinorField back = modulation_inverse(0.8, 0.4, 3.0, m);
  CHECK(rel_l2_error(back.up, s.up) < 1e-13);
  CHECK(rel_l2_error(back.down, s.down) < 1e-13);
}

TEST_CASE("spinor boost: conjugated second component and isometry") {
  auto g = make_grid(1, 128, 40.0);
  SpinorField s(g);
  s.up = random_field(g, 60);
  // real second component to compare against the direct formula
  s.down = ComplexField(g);
  for (std::size_t j = 0; j < s.down.size(); ++j)
    s.down[j] = std::exp(-0.1 * g->point(j)[0] * g->point(j)[0]);

  BoostSpec b{{kUnit * 2.0, 0, 0}, {0, 0, 0}, 1.2};
  SpinorField out = galilei_spinor(s, b);
  CHECK(std::abs(lp_norm(out.up, 2.0) - lp_norm(s.up, 2.0)) < 1e-12);
  CHECK(std::abs(lp_norm(out.down, 2.0) - lp_norm(s.down, 2.0)) < 1e-12);

  // Second component: conj(g conj(f)) = e^{+i(...)} e^{-ix.v} f(x - y - vt).
  ComplexField gc = galilei(s.down, b);  // s.down real, conj(s.down)=s.down
  for (std::size_t j = 0; j < gc.size(); ++j)
    CHECK(std::abs(out.down[j] - std::conj(gc[j])) < 1e-10);

  SpinorField back = galilei_spinor_inverse(out, b);
  CHECK(rel_l2_error(back.up, s.up) < 1e-12);
  CHECK(rel_l2_error(back.down, s.down) < 1e-12);

  // Identity case.
  SpinorField id = galilei_spinor(s, {{0, 0, 0}, {0, 0, 0}, 0.0});
  CHECK(rel_l2_error(id.up, s.up) < 1e-14);
  CHECK(rel_l2_error(id.down, s.down) < 1e-14);
}
