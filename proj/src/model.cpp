#include "dispersim/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace dispersim {

double PotentialSpec::profile(double r2) const {
  switch (shape) {
    case ProfileShape::gaussian:
      return std::exp(-r2 / (2.0 * width * width));
    case ProfileShape::exponential_smooth: {
      double s = std::sqrt(r2 + width * width);
      return std::exp(-(s - width) / width);
    }
  }
  return 0.0;
}

ComplexField potential_field(const PotentialSpec& spec, double t,
                             const GridPtr& grid) {
  ComplexField out(grid);
  Vec3 c = spec.center;
  for (int d = 0; d < grid->dim(); ++d) c[d] += spec.velocity[d] * t;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double r2 = grid->torus_dist2(grid->point(i), c);
    out[i] = -spec.depth * spec.profile(r2);
  }
  return out;
}

ComplexField total_potential(const ChargeTransferModel& model, double t) {
  ComplexField out(model.grid);
  for (const auto& w : model.wells) out += potential_field(w, t, model.grid);
  return out;
}

MatrixField matrix_potential_field(const MatrixPotentialSpec& spec, double t,
                                   const GridPtr& grid) {
  MatrixField m{ComplexField(grid), ComplexField(grid), ComplexField(grid),
                ComplexField(grid)};
  const Vec3& v = spec.velocity;
  double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  double phase_t = (v2 + spec.alpha * spec.alpha) * t + spec.gamma;
  Vec3 cu = spec.u_profile.center, cw = spec.w_profile.center;
  for (int d = 0; d < grid->dim(); ++d) {
    cu[d] += v[d] * t;
    cw[d] += v[d] * t;
  }
  for (std::size_t i = 0; i < m.a11.size(); ++i) {
    Vec3 x = grid->point(i);
    double U = -spec.u_profile.depth *
               spec.u_profile.profile(grid->torus_dist2(x, cu));
    double W = -spec.w_profile.depth *
               spec.w_profile.profile(grid->torus_dist2(x, cw));
    // theta evaluated in the co-moving argument x - v t, matching the
    // translated matrix potential V(t, x - v t).
    double xv = 0.0;
    for (int d = 0; d < grid->dim(); ++d) xv += (x[d] - v[d] * t) * v[d];
    double theta = phase_t + 2.0 * xv;
    cplx e = std::polar(1.0, theta);
    m.a11[i] = U;
    m.a12[i] = -e * W;
    m.a21[i] = std::conj(e) * W;
    m.a22[i] = -U;
  }
  return m;
}

Vec3 snap_commensurate(const Vec3& v, double L, bool half_step) {
  double unit = (half_step ? 1.0 : 2.0) * std::numbers::pi / L;
  Vec3 s{0, 0, 0};
  for (int d = 0; d < 3; ++d) s[d] = unit * std::round(v[d] / unit);
  return s;
}

bool is_commensurate(const Vec3& v, double L, bool half_step, double tol) {
  Vec3 s = snap_commensurate(v, L, half_step);
  for (int d = 0; d < 3; ++d)
    if (std::abs(v[d] - s[d]) > tol) return false;
  return true;
}

namespace {

double speed(const Vec3& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

bool same_velocity(const Vec3& a, const Vec3& b) {
  return speed({a[0] - b[0], a[1] - b[1], a[2] - b[2]}) < 1e-12;
}

bool parallel(const Vec3& a, const Vec3& b) {
  double na = speed(a), nb = speed(b);
  if (na < 1e-12 || nb < 1e-12) return false;
  double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return std::abs(std::abs(dot) - na * nb) < 1e-12 * na * nb;
}

// Max |V| over lattice points whose distance to the boundary is below h
// (the outermost shell), well frozen at t = 0.
double boundary_max(const PotentialSpec& spec, const Grid& g) {
  double m = 0.0;
  double edge = 0.5 * g.box_length() - g.spacing();
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec3 x = g.point(i);
    bool on_shell = false;
    for (int d = 0; d < g.dim(); ++d)
      if (std::abs(x[d]) >= edge) on_shell = true;
    if (!on_shell) continue;
    double r2 = g.torus_dist2(x, spec.center);
    m = std::max(m, spec.depth * spec.profile(r2));
  }
  return m;
}

template <class Velocities>
void check_velocities(const Velocities& vels, double L, bool half_step,
                      ValidationReport& rep) {
  for (std::size_t i = 0; i < vels.size(); ++i) {
    for (std::size_t j = i + 1; j < vels.size(); ++j) {
      if (same_velocity(vels[i], vels[j])) {
        std::ostringstream os;
        os << "wells " << i << " and " << j
           << " have identical velocities; Definition requires distinct "
              "vectors";
        rep.issues.push_back({true, os.str()});
      } else if (parallel(vels[i], vels[j])) {
        rep.issues.push_back(
            {false, "velocities are parallel but unequal; the introduction "
                    "asks for mutually non-parallel velocities"});
      }
    }
  }
  for (std::size_t i = 0; i < vels.size(); ++i) {
    if (!is_commensurate(vels[i], L, half_step)) {
      Vec3 s = snap_commensurate(vels[i], L, half_step);
      std::ostringstream os;
      os << "velocity of well " << i
         << " is not lattice-commensurate; nearest commensurate value is ("
         << s[0] << ", " << s[1] << ", " << s[2] << ")";
      rep.issues.push_back({true, os.str()});
    }
    rep.max_speed = std::max(rep.max_speed, speed(vels[i]));
  }
}

}  // namespace

ValidationReport validate_model(const ChargeTransferModel& model,
                                double packet_radius) {
  ValidationReport rep;
  if (model.wells.empty())
    rep.issues.push_back({true, "model needs at least one potential"});
  std::vector<Vec3> vels;
  for (const auto& w : model.wells) vels.push_back(w.velocity);
  check_velocities(vels, model.grid->box_length(), false, rep);
  for (const auto& w : model.wells)
    rep.boundary_potential_max =
        std::max(rep.boundary_potential_max, boundary_max(w, *model.grid));
  if (rep.max_speed > 0.0)
    rep.wrap_horizon =
        (0.5 * model.grid->box_length() - packet_radius) / rep.max_speed;
  return rep;
}

ValidationReport validate_model(const MatrixChargeTransferModel& model,
                                double packet_radius) {
  ValidationReport rep;
  if (model.channels.empty())
    rep.issues.push_back({true, "model needs at least one channel"});
  std::vector<Vec3> vels;
  for (const auto& c : model.channels) {
    vels.push_back(c.velocity);
    if (c.alpha == 0.0)
      rep.issues.push_back({true, "channel alpha must be nonzero"});
  }
  // The phase e^{2 i x.v} must be grid-periodic, so 2v is the commensurate
  // quantity (half-step lattice for v itself).
  check_velocities(vels, model.grid->box_length(), true, rep);
  for (const auto& c : model.channels) {
    rep.boundary_potential_max = std::max(
        {rep.boundary_potential_max, boundary_max(c.u_profile, *model.grid),
         boundary_max(c.w_profile, *model.grid)});
  }
  if (rep.max_speed > 0.0)
    rep.wrap_horizon =
        (0.5 * model.grid->box_length() - packet_radius) / rep.max_speed;
  return rep;
}

void require_valid(const ValidationReport& report) {
  std::ostringstream os;
  bool bad = false;
  for (const auto& i : report.issues) {
    if (i.hard) {
      if (bad) os << "; ";
      os << i.message;
      bad = true;
    }
  }
  if (bad) throw ConfigError(os.str());
}

}  // namespace dispersim
