#include "dispersim/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dispersim/symmetry.hpp"
#include "dispersim/transform.hpp"

namespace dispersim {

ComplexField apply_hamiltonian(const ComplexField& f, const ComplexField& V) {
  ComplexField out = apply_multiplier(f, [](const Vec3& xi) {
    return cplx(0.5 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]), 0.0);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += V[i].real() * f[i];
  return out;
}

namespace {

void normalize(ComplexField& f) {
  double n = lp_norm(f, 2.0);
  if (n > 0.0)
    for (auto& z : f.values()) z /= n;
}

void deflate(ComplexField& f, const std::vector<BoundState>& found) {
  for (const auto& s : found) {
    cplx c = inner(f, s.eigenfunction);
    f -= c * s.eigenfunction;
  }
}

double rayleigh(const ComplexField& f, const ComplexField& V) {
  ComplexField Hf = apply_hamiltonian(f, V);
  return inner(Hf, f).real() / inner(f, f).real();
}

double residual_norm(const ComplexField& f, const ComplexField& V,
                     double lambda) {
  ComplexField r = apply_hamiltonian(f, V);
  r -= cplx(lambda, 0.0) * f;
  return lp_norm(r, 2.0);
}

// One imaginary-time split step exp(-tau H), Strang order.
void itp_step(ComplexField& f, const ComplexField& V,
              const std::vector<double>& kin_decay, double tau) {
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] *= std::exp(-0.5 * tau * V[i].real());
  ComplexField fhat = spectral_transform(f, Direction::forward);
  for (std::size_t i = 0; i < fhat.size(); ++i) fhat[i] *= kin_decay[i];
  f = spectral_transform(fhat, Direction::inverse);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] *= std::exp(-0.5 * tau * V[i].real());
}

// Conjugate gradient for (H - sigma) x = b restricted to the orthogonal
// complement of the already-found states; SPD there when sigma sits below
// the target eigenvalue.
ComplexField shifted_solve(const ComplexField& b, const ComplexField& V,
                           double sigma, const std::vector<BoundState>& lower,
                           int max_iter, double tol) {
  auto apply = [&](const ComplexField& x) {
    ComplexField y = apply_hamiltonian(x, V);
    y -= cplx(sigma, 0.0) * x;
    return y;
  };
  ComplexField rhs = b;
  deflate(rhs, lower);
  ComplexField x(b.grid_ptr());
  ComplexField r = rhs;
  ComplexField p = r;
  double rs = inner(r, r).real();
  double rhs0 = std::sqrt(inner(rhs, rhs).real());
  for (int it = 0; it < max_iter && std::sqrt(rs) > tol * rhs0; ++it) {
    ComplexField Ap = apply(p);
    deflate(Ap, lower);
    double alpha = rs / inner(Ap, p).real();
    x += cplx(alpha, 0.0) * p;
    r -= cplx(alpha, 0.0) * Ap;
    double rs_new = inner(r, r).real();
    ComplexField pn = r;
    pn += cplx(rs_new / rs, 0.0) * p;
    p = pn;
    rs = rs_new;
  }
  return x;
}

}  // namespace

SpectralFamily bound_states(const ComplexField& V, const Vec3& seed_center,
                            double seed_width, int k_max, double tol,
                            double gap_tol) {
  GridPtr grid = V.grid_ptr();
  const double tau = 0.25;
  std::vector<double> kin_decay(grid->size());
  for (std::size_t i = 0; i < kin_decay.size(); ++i) {
    Vec3 xi = grid->freq_point(i);
    double k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    kin_decay[i] = std::exp(-0.5 * tau * k2);
  }

  SpectralFamily family;
  std::mt19937 rng(777);
  std::normal_distribution<double> gauss;

  for (int k = 0; k < k_max; ++k) {
    // Smooth localized seed with a random component to break symmetry.
    ComplexField f(grid);
    const double w = seed_width;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double r2 = grid->torus_dist2(grid->point(i), seed_center);
      f[i] = std::exp(-r2 / (4.0 * w * w)) *
             (1.0 + 0.1 * cplx(gauss(rng), gauss(rng)));
    }
    deflate(f, family.states);
    normalize(f);

    double lambda = rayleigh(f, V);
    double res = residual_norm(f, V, lambda);
    const int max_itp = 4000;
    int it = 0;
    for (; it < max_itp; ++it) {
      itp_step(f, V, kin_decay, tau);
      deflate(f, family.states);
      normalize(f);
      if (it % 20 == 19) {
        double l_new = rayleigh(f, V);
        if (std::abs(l_new - lambda) < 1e-8) {
          lambda = l_new;
          break;
        }
        lambda = l_new;
      }
    }

    if (lambda >= 0.0) break;  // continuum reached, no further bound states

    // Rayleigh-quotient refinement by shifted inverse iteration.
    for (int round = 0; round < 8; ++round) {
      res = residual_norm(f, V, lambda);
      if (res < tol) break;
      double sigma = lambda - std::max(0.05, 0.1 * std::abs(lambda));
      ComplexField x = shifted_solve(f, V, sigma, family.states, 400, 1e-12);
      deflate(x, family.states);
      normalize(x);
      if (lp_norm(x, 2.0) == 0.0) break;
      f = x;
      lambda = rayleigh(f, V);
    }
    res = residual_norm(f, V, lambda);

    if (lambda >= 0.0) break;
    if (res >= tol) {
      // Not an eigenpair. Near zero this is the continuum edge: deflation
      // leakage can hold the Rayleigh quotient slightly negative there, and
      // only a converged residual can testify to a true threshold violation.
      if (lambda > -gap_tol) break;
      throw ConvergenceError("bound-state solver stalled at residual " +
                             std::to_string(res));
    }
    if (lambda > -gap_tol)
      throw NearThresholdError(
          "eigenvalue " + std::to_string(lambda) +
          " lies within the spectral gap tolerance of 0; the model violates "
          "the threshold condition numerically");
    family.states.push_back({lambda, f, res});
  }

  std::sort(family.states.begin(), family.states.end(),
            [](const BoundState& a, const BoundState& b) {
              return a.eigenvalue < b.eigenvalue;
            });
  return family;
}

SpectralFamily bound_states(const PotentialSpec& spec, const GridPtr& grid,
                            int k_max, double tol, double gap_tol) {
  PotentialSpec frozen = spec;
  frozen.velocity = {0, 0, 0};
  ComplexField V = potential_field(frozen, 0.0, grid);
  return bound_states(V, frozen.center, frozen.width, k_max, tol, gap_tol);
}

ComplexField project_point(const ComplexField& f, const SpectralFamily& family,
                           SpectralPart part) {
  ComplexField bound(f.grid_ptr());
  for (const auto& s : family.states) {
    check_same_grid(f, s.eigenfunction);
    bound += inner(f, s.eigenfunction) * s.eigenfunction;
  }
  if (part == SpectralPart::bound) return bound;
  return f - bound;
}

ComplexField project_point_moving(const ComplexField& f,
                                  const SpectralFamily& family, const Vec3& v,
                                  double t, SpectralPart part) {
  // Boost to the channel rest frame, project there, boost back. The rest
  // frame is reached by the inverse of the boost that carries a stationary
  // bound state onto the instantaneous moving one.
  BoostSpec b{v, {0, 0, 0}, t};
  ComplexField rest = galilei_inverse(f, b);
  ComplexField proj = project_point(rest, family, part);
  return galilei(proj, b);
}

ComplexField gaussian_packet_field(const GridPtr& grid,
                                   const GaussianPacket& packet) {
  ComplexField f(grid);
  const double s2 = 2.0 * packet.width * packet.width;
  for (std::size_t i = 0; i < f.size(); ++i) {
    Vec3 x = grid->point(i);
    double r2 = grid->torus_dist2(x, packet.center);
    double phase = 0.0;
    for (int d = 0; d < grid->dim(); ++d) phase += x[d] * packet.momentum[d];
    f[i] = std::polar(std::exp(-r2 / s2), phase);
  }
  normalize(f);
  return f;
}

ScatteringState project_scattering(const ComplexField& f,
                                   const ChargeTransferModel& model,
                                   const std::vector<SpectralFamily>& families,
                                   double overlap_tol, int max_passes) {
  ScatteringState out;
  ComplexField cur = f;
  std::vector<double> overlaps(families.size(), 0.0);
  int pass = 0;
  for (; pass < max_passes; ++pass) {
    bool clean = true;
    for (std::size_t j = 0; j < families.size(); ++j) {
      ComplexField b = project_point_moving(
          cur, families[j], model.wells[j].velocity, 0.0, SpectralPart::bound);
      cur -= b;
      overlaps[j] = lp_norm(
          project_point_moving(cur, families[j], model.wells[j].velocity, 0.0,
                               SpectralPart::bound),
          2.0);
      if (overlaps[j] > overlap_tol) clean = false;
    }
    if (clean) break;
  }
  if (pass == max_passes)
    throw PreparationError(
        "alternating bound-state projections did not converge; wells too "
        "close or the packet overlaps both channels");

  out.subtracted_mass = lp_norm(f - cur, 2.0);
  double nrm = lp_norm(cur, 2.0);
  if (nrm < 1e-8)
    throw PreparationError(
        "input has no scattering component after projection");
  out.field = cplx(1.0 / nrm, 0.0) * cur;
  out.residual_overlaps = overlaps;
  out.passes = pass + 1;
  return out;
}

ScatteringState prepare_scattering_state(
    const GaussianPacket& packet, const ChargeTransferModel& model,
    const std::vector<SpectralFamily>& families) {
  return project_scattering(gaussian_packet_field(model.grid, packet), model,
                            families);
}

WaveOperatorResult duhamel_wave_operator(const ChargeTransferModel& model,
                                         int channel, const BoundState& state,
                                         double s, double T, double dt) {
  if (T < s) throw ConfigError("wave-operator horizon must satisfy T >= s");
  const auto& well = model.wells.at(channel);
  BoostSpec at_s{well.velocity, {0, 0, 0}, s};
  ComplexField chan_s = galilei(state.eigenfunction, at_s);

  WaveOperatorResult out;
  if (T == s) {
    out.field = chan_s;
    out.distance = 0.0;
    return out;
  }

  // Single-channel reference flow forward to the horizon, full flow back.
  ChargeTransferModel single{{well}, model.grid};
  ComplexField at_T = evolve_to(single, chan_s, s, T, dt);
  out.field = evolve_to(model, at_T, T, s, dt);

  double ip = std::abs(inner(out.field, chan_s));
  double n2 = inner(out.field, out.field).real();
  out.distance = std::sqrt(std::max(0.0, n2 + 1.0 - 2.0 * ip));
  return out;
}

// ---------------------------------------------------------------------------
// 1D matrix point spectrum via the assembled operator and LAPACK dgeev.

namespace {

// Dense spectral kinetic matrix -Lap/2 (real symmetric circulant).
std::vector<double> kinetic_matrix(const Grid& g) {
  const int N = g.points_per_axis();
  std::vector<double> K(static_cast<std::size_t>(N) * N, 0.0);
  GridPtr gp = std::make_shared<Grid>(g);
  for (int j = 0; j < N; ++j) {
    ComplexField e(gp);
    e[j] = 1.0;
    ComplexField He = apply_multiplier(e, [](const Vec3& xi) {
      return cplx(0.5 * xi[0] * xi[0], 0.0);
    });
    for (int i = 0; i < N; ++i) K[static_cast<std::size_t>(i) * N + j] = He[i].real();
  }
  return K;
}

SpinorField column_to_spinor(const GridPtr& grid, const double* re, int N) {
  SpinorField s(grid);
  for (int i = 0; i < N; ++i) {
    s.up[i] = re[i];
    s.down[i] = re[N + i];
  }
  return s;
}

SpinorField apply_matrix_op(const MatrixPotentialSpec& spec,
                            const GridPtr& grid, const SpinorField& s,
                            bool adjoint) {
  PotentialSpec u = spec.u_profile, w = spec.w_profile;
  u.velocity = w.velocity = {0, 0, 0};
  ComplexField U = potential_field(u, 0.0, grid);
  ComplexField W = potential_field(w, 0.0, grid);
  const double mu = 0.5 * spec.alpha * spec.alpha;
  auto kinetic = [&](const ComplexField& f, double sign) {
    ComplexField y = apply_multiplier(f, [sign](const Vec3& xi) {
      return cplx(sign * 0.5 * xi[0] * xi[0], 0.0);
    });
    return y;
  };
  // A   = [[K + mu + U, -W], [ W, -K - mu - U]]
  // A^T = [[K + mu + U,  W], [-W, -K - mu - U]]
  double sw = adjoint ? -1.0 : 1.0;
  SpinorField out(grid);
  ComplexField k_up = kinetic(s.up, 1.0);
  ComplexField k_dn = kinetic(s.down, -1.0);
  for (std::size_t i = 0; i < out.up.size(); ++i) {
    double Ui = U[i].real(), Wi = W[i].real();
    out.up[i] = k_up[i] + (mu + Ui) * s.up[i] - sw * Wi * s.down[i];
    out.down[i] = k_dn[i] - (mu + Ui) * s.down[i] + sw * Wi * s.up[i];
  }
  return out;
}

}  // namespace

std::vector<BiorthogonalPair> matrix_bound_states(
    const MatrixPotentialSpec& spec, const GridPtr& grid, double margin) {
  if (grid->dim() != 1)
    throw ConfigError("matrix point spectrum is assembled in 1D only");
  const int N = grid->points_per_axis();
  const int M = 2 * N;
  const double mu = 0.5 * spec.alpha * spec.alpha;

  PotentialSpec u = spec.u_profile, w = spec.w_profile;
  u.velocity = w.velocity = {0, 0, 0};
  ComplexField U = potential_field(u, 0.0, grid);
  ComplexField W = potential_field(w, 0.0, grid);
  std::vector<double> K = kinetic_matrix(*grid);

  std::vector<double> A(static_cast<std::size_t>(M) * M, 0.0);
  auto at = [&](int i, int j) -> double& {
    return A[static_cast<std::size_t>(i) * M + j];
  };
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      double k = K[static_cast<std::size_t>(i) * N + j];
      at(i, j) = k;
      at(N + i, N + j) = -k;
    }
    at(i, i) += mu + U[i].real();
    at(N + i, N + i) -= mu + U[i].real();
    at(i, N + i) = -W[i].real();
    at(N + i, i) = W[i].real();
  }

  std::vector<double> wr(M), wi(M), vl(static_cast<std::size_t>(M) * M),
      vr(static_cast<std::size_t>(M) * M);
  int info = LAPACKE_dgeev(LAPACK_ROW_MAJOR, 'V', 'V', M, A.data(), M,
                           wr.data(), wi.data(), vl.data(), M, vr.data(), M);
  if (info != 0)
    throw ConvergenceError("dgeev failed on the assembled matrix operator");

  // Columns of vr/vl are eigenvectors; pick real eigenvalues strictly inside
  // (-mu, mu), away from 0 and the essential-spectrum edges.
  std::vector<BiorthogonalPair> pairs;
  for (int j = 0; j < M; ++j) {
    if (std::abs(wi[j]) > 1e-8) continue;
    double om = wr[j];
    if (std::abs(om) <= margin || std::abs(om) >= mu - margin) continue;

    std::vector<double> colr(M), coll(M);
    for (int i = 0; i < M; ++i) {
      colr[i] = vr[static_cast<std::size_t>(i) * M + j];
      coll[i] = vl[static_cast<std::size_t>(i) * M + j];
    }
    BiorthogonalPair p;
    p.eigenvalue = om;
    p.right = column_to_spinor(grid, colr.data(), N);
    p.left = column_to_spinor(grid, coll.data(), N);

    cplx g = inner(p.right, p.left);
    if (std::abs(g) < 1e-12) continue;  // defective direction, skip
    double sr = 1.0 / std::sqrt(std::abs(g));
    cplx sl = cplx(sr, 0.0) / std::conj(g / std::abs(g));
    for (auto* c : {&p.right.up, &p.right.down})
      for (auto& z : c->values()) z *= sr;
    for (auto* c : {&p.left.up, &p.left.down})
      for (auto& z : c->values()) z *= sl;

    SpinorField r = apply_matrix_op(spec, grid, p.right, false);
    r.up -= cplx(om, 0.0) * p.right.up;
    r.down -= cplx(om, 0.0) * p.right.down;
    p.residual_right = lp_norm(r, 2.0) / lp_norm(p.right, 2.0);
    SpinorField l = apply_matrix_op(spec, grid, p.left, true);
    l.up -= cplx(om, 0.0) * p.left.up;
    l.down -= cplx(om, 0.0) * p.left.down;
    p.residual_left = lp_norm(l, 2.0) / lp_norm(p.left, 2.0);
    pairs.push_back(std::move(p));
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const BiorthogonalPair& a, const BiorthogonalPair& b) {
              return a.eigenvalue < b.eigenvalue;
            });
  return pairs;
}

SpinorField project_matrix_point(const SpinorField& s,
                                 const std::vector<BiorthogonalPair>& pairs,
                                 SpectralPart part) {
  SpinorField bound(s.grid_ptr());
  for (const auto& p : pairs) {
    cplx c = inner(s, p.left);
    bound.up += c * p.right.up;
    bound.down += c * p.right.down;
  }
  if (part == SpectralPart::bound) return bound;
  SpinorField out = s;
  out.up -= bound.up;
  out.down -= bound.down;
  return out;
}

}  // namespace dispersim
