#include "dispersim/propagate.hpp"

#include <cmath>

#include "dispersim/transform.hpp"

namespace dispersim {

namespace {

double shell_mass(const ComplexField& f) {
  const Grid& g = f.grid();
  const double edge = 0.5 * g.box_length() - 0.1 * g.box_length();
  double inside = 0.0, shell = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    Vec3 x = g.point(i);
    bool on_shell = false;
    for (int d = 0; d < g.dim(); ++d)
      if (std::abs(x[d]) >= edge) on_shell = true;
    (on_shell ? shell : inside) += std::norm(f[i]);
  }
  double total = inside + shell;
  return total > 0.0 ? shell / total : 0.0;
}

double shell_mass(const SpinorField& s) {
  // mass-weighted combination of both components
  const Grid& g = s.grid();
  const double edge = 0.4 * g.box_length();
  double shell = 0.0, total = 0.0;
  for (const ComplexField* f : {&s.up, &s.down}) {
    for (std::size_t i = 0; i < f->size(); ++i) {
      Vec3 x = g.point(i);
      bool on_shell = false;
      for (int d = 0; d < g.dim(); ++d)
        if (std::abs(x[d]) >= edge) on_shell = true;
      double m = std::norm((*f)[i]);
      total += m;
      if (on_shell) shell += m;
    }
  }
  return total > 0.0 ? shell / total : 0.0;
}

std::vector<cplx> kinetic_phases(const Grid& g, double dt, double sign) {
  std::vector<cplx> ph(g.size());
  for (std::size_t i = 0; i < ph.size(); ++i) {
    Vec3 xi = g.freq_point(i);
    double k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    ph[i] = std::polar(1.0, sign * (-0.5) * dt * k2);
  }
  return ph;
}

void kinetic_step(ComplexField& f, const std::vector<cplx>& phases) {
  ComplexField fhat = spectral_transform(f, Direction::forward);
  for (std::size_t i = 0; i < fhat.size(); ++i) fhat[i] *= phases[i];
  f = spectral_transform(fhat, Direction::inverse);
}

int step_count(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw PropagationError("time step must be positive");
  double span = std::abs(t1 - t0);
  int n = static_cast<int>(std::llround(span / dt));
  if (n < 1) n = 1;
  if (std::abs(n * dt - span) > 1e-9 * std::max(1.0, span))
    throw PropagationError("(t1 - t0) / dt must be an integer");
  return n;
}

}  // namespace

int Trajectory::last_clean_index(double shell_tol) const {
  int last = -1;
  for (std::size_t i = 0; i < diagnostics.size(); ++i) {
    if (diagnostics[i].boundary_shell_mass > shell_tol) break;
    last = static_cast<int>(i);
  }
  return last;
}

double mixed_spacetime_norm(const Trajectory& traj,
                            const AdmissiblePair& pair) {
  return mixed_spacetime_norm(std::span<const double>(traj.times),
                              std::span<const ComplexField>(traj.fields),
                              pair);
}

ComplexField free_evolve(const ComplexField& f, double t) {
  if (t == 0.0) return f;
  return apply_multiplier(f, [t](const Vec3& xi) {
    double k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return std::polar(1.0, -0.5 * t * k2);
  });
}

Trajectory evolve(const ChargeTransferModel& model, const ComplexField& f,
                  double t0, double t1, double dt, int stride) {
  if (stride < 1) stride = 1;
  const int nsteps = step_count(t0, t1, dt);
  const double sdt = (t1 >= t0) ? dt : -dt;
  const Grid& g = *model.grid;

  auto kin = kinetic_phases(g, sdt, 1.0);
  Trajectory traj;
  auto store = [&](double t, const ComplexField& psi) {
    traj.times.push_back(t);
    traj.fields.push_back(psi);
    traj.diagnostics.push_back({lp_norm(psi, 2.0), shell_mass(psi)});
  };

  ComplexField psi = f;
  store(t0, psi);
  const double norm0 = lp_norm(psi, 2.0);
  for (int s = 0; s < nsteps; ++s) {
    const double tmid = t0 + (s + 0.5) * sdt;
    ComplexField V = total_potential(model, tmid);
    for (std::size_t i = 0; i < psi.size(); ++i)
      psi[i] *= std::polar(1.0, -0.5 * sdt * V[i].real());
    kinetic_step(psi, kin);
    for (std::size_t i = 0; i < psi.size(); ++i)
      psi[i] *= std::polar(1.0, -0.5 * sdt * V[i].real());

    if ((s + 1) % stride == 0 || s + 1 == nsteps) {
      double t = t0 + (s + 1) * sdt;
      store(t, psi);
      double nrm = traj.diagnostics.back().l2_norm;
      if (!std::isfinite(nrm) || nrm > 1e6 * std::max(norm0, 1e-300))
        throw PropagationError("propagation blew up at step " +
                               std::to_string(s + 1));
    }
  }
  return traj;
}

ComplexField evolve_to(const ChargeTransferModel& model, const ComplexField& f,
                       double t0, double t1, double dt) {
  Trajectory t = evolve(model, f, t0, t1, dt, 1 << 30);
  return t.fields.back();
}

ComplexField evolve_stationary(const PotentialSpec& spec,
                               const ComplexField& f, double t, double dt) {
  PotentialSpec frozen = spec;
  frozen.velocity = {0, 0, 0};
  ChargeTransferModel m{{frozen}, f.grid_ptr()};
  if (t == 0.0) return f;
  return evolve_to(m, f, 0.0, t, dt);
}

std::array<cplx, 4> pointwise_matrix_exp(const std::array<cplx, 4>& m,
                                         double dt) {
  const cplx a = m[0], b = m[1], c = m[2];
  if (std::abs(m[3] + a) > 1e-12 * (1.0 + std::abs(a)))
    throw PropagationError("pointwise_matrix_exp requires a trace-free matrix");
  const cplx s2 = a * a + b * c;
  const cplx z = std::sqrt(s2) * dt;  // branch-independent: even functions
  cplx cz, sincz;
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    cz = 1.0 - z2 / 2.0 + z2 * z2 / 24.0;
    sincz = 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  } else {
    cz = std::cos(z);
    sincz = std::sin(z) / z;
  }
  const cplx f = cplx(0, -1) * dt * sincz;
  return {cz + f * a, f * b, f * c, cz - f * a};
}

namespace {

Trajectory evolve_spinor_impl(
    const GridPtr& grid, const SpinorField& s0, double t0, double t1,
    double dt, int stride,
    const std::function<MatrixField(double)>& potential_at) {
  if (stride < 1) stride = 1;
  const int nsteps = step_count(t0, t1, dt);
  const double sdt = (t1 >= t0) ? dt : -dt;
  auto kin_up = kinetic_phases(*grid, sdt, 1.0);
  auto kin_dn = kinetic_phases(*grid, sdt, -1.0);

  Trajectory traj;
  auto store = [&](double t, const SpinorField& s) {
    traj.times.push_back(t);
    traj.spinors.push_back(s);
    traj.diagnostics.push_back({lp_norm(s, 2.0), shell_mass(s)});
  };

  SpinorField psi = s0;
  store(t0, psi);
  const double norm0 = lp_norm(psi, 2.0);

  auto half_potential = [&](SpinorField& s, const MatrixField& V) {
    for (std::size_t i = 0; i < s.up.size(); ++i) {
      auto E = pointwise_matrix_exp(
          {V.a11[i], V.a12[i], V.a21[i], V.a22[i]}, 0.5 * sdt);
      cplx u = s.up[i], d = s.down[i];
      s.up[i] = E[0] * u + E[1] * d;
      s.down[i] = E[2] * u + E[3] * d;
    }
  };

  for (int s = 0; s < nsteps; ++s) {
    const double tmid = t0 + (s + 0.5) * sdt;
    MatrixField V = potential_at(tmid);
    half_potential(psi, V);
    kinetic_step(psi.up, kin_up);
    kinetic_step(psi.down, kin_dn);
    half_potential(psi, V);

    if ((s + 1) % stride == 0 || s + 1 == nsteps) {
      store(t0 + (s + 1) * sdt, psi);
      double nrm = traj.diagnostics.back().l2_norm;
      if (!std::isfinite(nrm) || nrm > 1e6 * std::max(norm0, 1e-300))
        throw PropagationError("matrix propagation unstable at step " +
                               std::to_string(s + 1));
    }
  }
  return traj;
}

}  // namespace

Trajectory evolve_matrix(const MatrixChargeTransferModel& model,
                         const SpinorField& s, double t0, double t1, double dt,
                         int stride) {
  return evolve_spinor_impl(
      model.grid, s, t0, t1, dt, stride, [&](double t) {
        MatrixField sum = matrix_potential_field(model.channels[0], t,
                                                 model.grid);
        for (std::size_t j = 1; j < model.channels.size(); ++j) {
          MatrixField m =
              matrix_potential_field(model.channels[j], t, model.grid);
          sum.a11 += m.a11;
          sum.a12 += m.a12;
          sum.a21 += m.a21;
          sum.a22 += m.a22;
        }
        return sum;
      });
}

SpinorField evolve_matrix_stationary(const MatrixPotentialSpec& spec,
                                     const GridPtr& grid,
                                     const SpinorField& s, double t,
                                     double dt) {
  if (t == 0.0) return s;
  const double shift = 0.5 * spec.alpha * spec.alpha;
  PotentialSpec u = spec.u_profile, w = spec.w_profile;
  u.velocity = w.velocity = {0, 0, 0};

  // A = B + V with B = diag(-Lap/2 + mu, Lap/2 - mu), mu = alpha^2/2;
  // fold the constant mu into the kinetic multiplier and keep V trace-free.
  MatrixField V{ComplexField(grid), ComplexField(grid), ComplexField(grid),
                ComplexField(grid)};
  ComplexField U = potential_field(u, 0.0, grid);
  ComplexField W = potential_field(w, 0.0, grid);
  for (std::size_t i = 0; i < U.size(); ++i) {
    V.a11[i] = U[i].real();
    V.a12[i] = -W[i].real();
    V.a21[i] = W[i].real();
    V.a22[i] = -U[i].real();
  }

  const double sdt = (t >= 0.0) ? dt : -dt;
  const int nsteps = step_count(0.0, t, dt);
  const Grid& g = *grid;
  std::vector<cplx> kin_up(g.size()), kin_dn(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec3 xi = g.freq_point(i);
    double k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    kin_up[i] = std::polar(1.0, -sdt * (0.5 * k2 + shift));
    kin_dn[i] = std::polar(1.0, sdt * (0.5 * k2 + shift));
  }

  SpinorField psi = s;
  auto half_potential = [&](SpinorField& sp) {
    for (std::size_t i = 0; i < sp.up.size(); ++i) {
      auto E = pointwise_matrix_exp(
          {V.a11[i], V.a12[i], V.a21[i], V.a22[i]}, 0.5 * sdt);
      cplx a = sp.up[i], b = sp.down[i];
      sp.up[i] = E[0] * a + E[1] * b;
      sp.down[i] = E[2] * a + E[3] * b;
    }
  };
  for (int k = 0; k < nsteps; ++k) {
    half_potential(psi);
    kinetic_step(psi.up, kin_up);
    kinetic_step(psi.down, kin_dn);
    half_potential(psi);
  }
  return psi;
}

}  // namespace dispersim
