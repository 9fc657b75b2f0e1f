#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dispersim/propagate.hpp"
#include "dispersim/spectral.hpp"
#include "dispersim/symmetry.hpp"
#include "test_util.hpp"

using namespace dispersim;
using test::random_field;
using test::random_smooth_field;
using test::rel_l2_error;

namespace {

// psi0 = e^{-x^2/2} evolves freely to (1+it)^{-1/2} e^{-x^2/(2(1+it))}
// per axis (i d/dt psi = -psi''/2).
ComplexField free_gaussian(const GridPtr& g, double t) {
  ComplexField f(g);
  cplx a(1.0, t);
  cplx pref = std::pow(a, -0.5 * g->dim());
  for (std::size_t j = 0; j < f.size(); ++j) {
    Vec3 x = g->point(j);
    double r2 = 0.0;
    for (int d = 0; d < g->dim(); ++d) r2 += x[d] * x[d];
    f[j] = pref * std::exp(-r2 / (2.0 * a));
  }
  return f;
}

ChargeTransferModel two_well_1d(const GridPtr& g) {
  const double unit = 2.0 * std::numbers::pi / g->box_length();
  PotentialSpec w1, w2;
  w1.depth = 2.0;
  w1.width = 1.0;
  w2.depth = 1.5;
  w2.width = 1.0;
  w2.center = {-10.0, 0, 0};
  w2.velocity = {unit * 10.0, 0, 0};
  return {{w1, w2}, g};
}

}  // namespace

TEST_CASE("free_evolve: identity, closed-form Gaussian, isometry") {
  auto g = make_grid(1, 1024, 80.0);
  ComplexField psi0 = free_gaussian(g, 0.0);
  CHECK(rel_l2_error(free_evolve(psi0, 0.0), psi0) == 0.0);

  for (double t : {-4.0, -1.0, 0.5, 2.0, 4.0}) {
    ComplexField num = free_evolve(psi0, t);
    CHECK(rel_l2_error(num, free_gaussian(g, t)) < 1e-8);
    CHECK(std::abs(lp_norm(num, 2.0) - lp_norm(psi0, 2.0)) < 1e-12);
  }
}

TEST_CASE("free_evolve closed form in 3D") {
  // h = 0.5 so the sampled unit Gaussian is resolved to ~e^{-2 pi^2}.
  auto g = make_grid(3, 64, 32.0);
  ComplexField psi0 = free_gaussian(g, 0.0);
  CHECK(rel_l2_error(free_evolve(psi0, 1.5), free_gaussian(g, 1.5)) < 1e-7);
}

TEST_CASE("evolve with zero potential equals free_evolve") {
  auto g = make_grid(1, 256, 40.0);
  PotentialSpec null;
  null.depth = 0.0;
  ChargeTransferModel m{{null}, g};
  ComplexField f = random_smooth_field(g, 70);
  ComplexField num = evolve_to(m, f, 0.0, 1.0, 0.01);
  CHECK(rel_l2_error(num, free_evolve(f, 1.0)) < 1e-12);
}

TEST_CASE("evolve validates the step count and step sign") {
  auto g = make_grid(1, 64, 40.0);
  ChargeTransferModel m = two_well_1d(g);
  ComplexField f = random_smooth_field(g, 71);
  CHECK_THROWS_AS(evolve(m, f, 0.0, 1.0, 0.3, 1), PropagationError);
  CHECK_THROWS_AS(evolve(m, f, 0.0, 1.0, -0.1, 1), PropagationError);
}

TEST_CASE("unitarity and exact time reversal of the splitting") {
  auto g = make_grid(1, 256, 40.0);
  ChargeTransferModel m = two_well_1d(g);
  ComplexField f = random_smooth_field(g, 72);
  double n0 = lp_norm(f, 2.0);

  Trajectory traj = evolve(m, f, 0.0, 1.0, 1e-3, 200);
  for (const auto& d : traj.diagnostics)
    CHECK(std::abs(d.l2_norm - n0) < 1e-10 * n0);

  // The backward sweep visits the same midpoints, so the round trip is
  // exact to roundoff.
  ComplexField back = evolve_to(m, traj.fields.back(), 1.0, 0.0, 1e-3);
  CHECK(rel_l2_error(back, f) < 1e-11);
}

TEST_CASE("splitting is second order in dt") {
  auto g = make_grid(1, 256, 40.0);
  ChargeTransferModel m = two_well_1d(g);
  ComplexField f = random_smooth_field(g, 73);

  ComplexField ref = evolve_to(m, f, 0.0, 1.0, 1.25e-4);
  double e1 = rel_l2_error(evolve_to(m, f, 0.0, 1.0, 2e-3), ref);
  double e2 = rel_l2_error(evolve_to(m, f, 0.0, 1.0, 1e-3), ref);
  double ratio = e1 / e2;
  CHECK(ratio > 4.0 / 1.5);
  CHECK(ratio < 4.0 * 1.5);
}

TEST_CASE("bound state only rotates in phase") {
  auto g = make_grid(1, 256, 40.0);
  PotentialSpec well;
  well.depth = 2.0;
  well.width = 1.0;
  SpectralFamily fam = bound_states(well, g, 1);
  REQUIRE(fam.size() >= 1);
  const BoundState& b = fam.states[0];

  ChargeTransferModel m{{well}, g};
  ComplexField psi = evolve_to(m, b.eigenfunction, 0.0, 10.0, 1e-3);
  ComplexField rotated = std::polar(1.0, b.eigenvalue * 10.0) * psi;
  CHECK(rel_l2_error(rotated, b.eigenfunction) < 1e-4);
}

TEST_CASE("moving-well covariance") {
  // With the well moving at v, psi(t) = g_v(t) e^{-itH_stat} g_v(0)^{-1} psi0.
  auto g = make_grid(1, 512, 80.0);
  const double unit = 2.0 * std::numbers::pi / 80.0;
  PotentialSpec well;
  well.depth = 2.0;
  well.width = 1.0;
  SpectralFamily fam = bound_states(well, g, 1);
  REQUIRE(fam.size() >= 1);
  const BoundState& b = fam.states[0];

  PotentialSpec moving = well;
  moving.velocity = {unit * 8.0, 0, 0};
  ChargeTransferModel m{{moving}, g};

  double T = 2.0;
  ComplexField psi0 = galilei(b.eigenfunction, {moving.velocity, {0, 0, 0}, 0.0});
  ComplexField psiT = evolve_to(m, psi0, 0.0, T, 1e-3);
  ComplexField expected =
      std::polar(1.0, -b.eigenvalue * T) *
      galilei(b.eigenfunction, {moving.velocity, {0, 0, 0}, T});
  CHECK(rel_l2_error(psiT, expected) < 1e-4);
}

TEST_CASE("evolve_stationary freezes the well") {
  auto g = make_grid(1, 256, 40.0);
  const double unit = 2.0 * std::numbers::pi / 40.0;
  PotentialSpec well;
  well.depth = 2.0;
  well.width = 1.0;
  well.velocity = {unit * 6.0, 0, 0};
  ComplexField f = random_smooth_field(g, 74);

  PotentialSpec frozen = well;
  frozen.velocity = {0, 0, 0};
  ChargeTransferModel m{{frozen}, g};
  CHECK(rel_l2_error(evolve_stationary(well, f, 1.5, 1e-2),
                     evolve_to(m, f, 0.0, 1.5, 1e-2)) < 1e-13);
}

TEST_CASE("pointwise_matrix_exp cases and oracle") {
  // Diagonal case.
  auto E = pointwise_matrix_exp({cplx(2.0, 0), 0, 0, cplx(-2.0, 0)}, 0.3);
  CHECK(std::abs(E[0] - std::polar(1.0, -0.6)) < 1e-14);
  CHECK(std::abs(E[3] - std::polar(1.0, 0.6)) < 1e-14);
  CHECK(std::abs(E[1]) == 0.0);

  // Zero generator.
  auto I = pointwise_matrix_exp({0, 0, 0, 0}, 0.7);
  CHECK(std::abs(I[0] - 1.0) < 1e-15);
  CHECK(std::abs(I[3] - 1.0) < 1e-15);

  // Trace check.
  CHECK_THROWS_AS(pointwise_matrix_exp({cplx(1, 0), 0, 0, cplx(1, 0)}, 0.1),
                  PropagationError);

  // Random trace-free matrices vs scaling-and-squaring.
  std::mt19937 rng(99);
  std::normal_distribution<double> gs;
  for (int trial = 0; trial < 20; ++trial) {
    std::array<cplx, 4> m{cplx(gs(rng), gs(rng)), cplx(gs(rng), gs(rng)),
                          cplx(gs(rng), gs(rng)), cplx(0, 0)};
    m[3] = -m[0];
    double dt = 0.5 + 0.1 * trial;
    // exp(-i dt m) by 2^20-fold squaring of the truncated series.
    std::array<cplx, 4> x{cplx(0, -dt / 1048576.0) * m[0],
                          cplx(0, -dt / 1048576.0) * m[1],
                          cplx(0, -dt / 1048576.0) * m[2],
                          cplx(0, -dt / 1048576.0) * m[3]};
    std::array<cplx, 4> acc{1.0 + x[0] + 0.5 * (x[0] * x[0] + x[1] * x[2]),
                            x[1] + 0.5 * (x[0] * x[1] + x[1] * x[3]),
                            x[2] + 0.5 * (x[2] * x[0] + x[3] * x[2]),
                            1.0 + x[3] + 0.5 * (x[2] * x[1] + x[3] * x[3])};
    for (int s = 0; s < 20; ++s) {
      std::array<cplx, 4> sq{acc[0] * acc[0] + acc[1] * acc[2],
                             acc[0] * acc[1] + acc[1] * acc[3],
                             acc[2] * acc[0] + acc[3] * acc[2],
                             acc[2] * acc[1] + acc[3] * acc[3]};
      acc = sq;
    }
    auto got = pointwise_matrix_exp(m, dt);
    // The repeated-squaring oracle carries ~1e-9 of its own rounding.
    for (int k = 0; k < 4; ++k) CHECK(std::abs(got[k] - acc[k]) < 1e-8);
  }

  // Small-argument series branch.
  std::array<cplx, 4> tiny{cplx(1e-6, 0), cplx(2e-6, 0), cplx(-1e-6, 0),
                           cplx(-1e-6, 0)};
  auto small = pointwise_matrix_exp(tiny, 1.0);
  CHECK(std::abs(small[0] - (1.0 - cplx(0, 1) * tiny[0])) < 1e-11);
}

TEST_CASE("matrix evolve: W=0 reduces to decoupled scalar flows") {
  auto g = make_grid(1, 256, 40.0);
  MatrixPotentialSpec spec;
  spec.u_profile.depth = 1.5;
  spec.u_profile.width = 1.0;
  spec.w_profile.depth = 0.0;
  spec.alpha = 1.0;
  MatrixChargeTransferModel mm{{spec}, g};

  SpinorField s0(g);
  s0.up = random_smooth_field(g, 80);
  s0.down = random_smooth_field(g, 81);

  Trajectory traj = evolve_matrix(mm, s0, 0.0, 1.0, 1e-3, 1000);
  // Component 1 sees i d/dt = (-Lap/2 + U) (no alpha term in the moving
  // model; the modulation carries it).
  ChargeTransferModel scalar{{spec.u_profile}, g};
  ComplexField up_ref = evolve_to(scalar, s0.up, 0.0, 1.0, 1e-3);
  CHECK(rel_l2_error(traj.spinors.back().up, up_ref) < 1e-10);
  // Component 2 sees i d/dt = (+Lap/2 - U): conjugate dynamics.
  ComplexField dn_conj(g);
  for (std::size_t j = 0; j < dn_conj.size(); ++j)
    dn_conj[j] = std::conj(s0.down[j]);
  ComplexField dn_ref = evolve_to(scalar, dn_conj, 0.0, 1.0, 1e-3);
  for (std::size_t j = 0; j < dn_ref.size(); ++j)
    CHECK(std::abs(traj.spinors.back().down[j] - std::conj(dn_ref[j])) < 1e-9);
}

TEST_CASE("trajectory clean-window bookkeeping") {
  Trajectory traj;
  traj.times = {0.0, 1.0, 2.0, 3.0};
  traj.diagnostics = {{1.0, 0.0}, {1.0, 1e-8}, {1.0, 1e-3}, {1.0, 0.1}};
  CHECK(traj.last_clean_index() == 2);
  CHECK(traj.last_clean_index(1e-6) == 1);
  CHECK(traj.last_clean_index(0.5) == 3);
}
