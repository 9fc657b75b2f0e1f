#ifndef DISPERSIM_MODEL_HPP
#define DISPERSIM_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "dispersim/grid.hpp"

namespace dispersim {

enum class ProfileShape { gaussian, exponential_smooth };

/// A single attractive well: V(x) = -depth * profile(x - center - velocity*t).
/// Profiles are smooth, bounded by 1, and decay at least like exp(-|x|/w).
struct PotentialSpec {
  ProfileShape shape = ProfileShape::gaussian;
  double depth = 1.0;
  double width = 1.0;
  Vec3 center{0, 0, 0};
  Vec3 velocity{0, 0, 0};

  /// profile(r2) for squared distance r2; gaussian: exp(-r2/(2w^2)),
  /// exponential-smooth: exp(-(sqrt(r2+w^2)-w)/w).
  double profile(double r2) const;
};

struct ChargeTransferModel {
  std::vector<PotentialSpec> wells;
  GridPtr grid;
};

/// Matrix channel of the two-component system. Off-diagonal entries carry
/// the phase theta(t,x) = (|v|^2 + alpha^2) t + 2 x.v + gamma, evaluated in
/// the co-moving argument x - v t alongside the profiles.
struct MatrixPotentialSpec {
  PotentialSpec u_profile;  // diagonal scalar part U (depth/shape/width/center)
  PotentialSpec w_profile;  // coupling scalar part W
  double alpha = 1.0;       // must be nonzero
  double gamma = 0.0;
  Vec3 velocity{0, 0, 0};
};

struct MatrixChargeTransferModel {
  std::vector<MatrixPotentialSpec> channels;
  GridPtr grid;
};

/// V_j(x - y - v t) on the grid (real values in a ComplexField).
ComplexField potential_field(const PotentialSpec& spec, double t,
                             const GridPtr& grid);

/// Sum of all wells at time t.
ComplexField total_potential(const ChargeTransferModel& model, double t);

/// 2x2 trace-free matrix field, entries in row-major order
/// [[U, -e^{i theta} W], [e^{-i theta} W, -U]] with co-moving arguments.
struct MatrixField {
  ComplexField a11, a12, a21, a22;
};

MatrixField matrix_potential_field(const MatrixPotentialSpec& spec, double t,
                                   const GridPtr& grid);

struct ValidationIssue {
  bool hard = false;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  double max_speed = 0.0;
  double boundary_potential_max = 0.0;  // max |V| on the boundary shell at t=0
  double wrap_horizon = kInfHorizon;    // (L/2 - packet_radius)/max|v|

  static constexpr double kInfHorizon = 1e30;
  bool ok() const {
    for (const auto& i : issues)
      if (i.hard) return false;
    return true;
  }
};

/// Nearest velocity with every component an integer multiple of 2*pi/L
/// (or pi/L when half_step is set, as the matrix phase needs 2v commensurate).
Vec3 snap_commensurate(const Vec3& v, double L, bool half_step = false);

bool is_commensurate(const Vec3& v, double L, bool half_step = false,
                     double tol = 1e-9);

ValidationReport validate_model(const ChargeTransferModel& model,
                                double packet_radius = 0.0);
ValidationReport validate_model(const MatrixChargeTransferModel& model,
                                double packet_radius = 0.0);

/// Throws ConfigError listing every hard issue.
void require_valid(const ValidationReport& report);

}  // namespace dispersim

#endif
