#ifndef DISPERSIM_SPECTRAL_HPP
#define DISPERSIM_SPECTRAL_HPP

#include <optional>
#include <vector>

#include "dispersim/model.hpp"
#include "dispersim/propagate.hpp"

namespace dispersim {

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NearThresholdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreparationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Negative-eigenvalue eigenpair of a stationary channel Hamiltonian.
struct BoundState {
  double eigenvalue = 0.0;
  ComplexField eigenfunction;  // normalized to ||w||_2 = 1
  double residual = 0.0;       // ||H w - lambda w||_2
};

struct SpectralFamily {
  int channel = 0;
  std::vector<BoundState> states;  // sorted ascending in eigenvalue

  bool empty() const { return states.empty(); }
  std::size_t size() const { return states.size(); }
};

/// Operationalizes "0 is neither an eigenvalue nor a resonance": any
/// eigenvalue inside (-gap_tol, 0) is rejected as near-threshold.
inline constexpr double kGapTol = 0.05;

/// Apply the stationary Hamiltonian H = -Lap/2 + V (spectral kinetic term).
ComplexField apply_hamiltonian(const ComplexField& f, const ComplexField& V);

/// Up to k_max bound states of the frozen well, by imaginary-time
/// propagation with Gram-Schmidt deflation, refined by shifted inverse
/// iteration until the residual is below tol.
SpectralFamily bound_states(const PotentialSpec& spec, const GridPtr& grid,
                            int k_max, double tol = 1e-7,
                            double gap_tol = kGapTol);

/// Same solver for an arbitrary real potential sampled on the grid; the
/// seed is a Gaussian of the given width at seed_center.
SpectralFamily bound_states(const ComplexField& V, const Vec3& seed_center,
                            double seed_width, int k_max, double tol = 1e-7,
                            double gap_tol = kGapTol);

enum class SpectralPart { bound, continuous };

ComplexField project_point(const ComplexField& f, const SpectralFamily& family,
                           SpectralPart part);

/// Moving projection: boost to the channel rest frame, project, boost back.
ComplexField project_point_moving(const ComplexField& f,
                                  const SpectralFamily& family, const Vec3& v,
                                  double t, SpectralPart part);

struct GaussianPacket {
  Vec3 center{0, 0, 0};
  Vec3 momentum{0, 0, 0};
  double width = 1.0;
};

ComplexField gaussian_packet_field(const GridPtr& grid,
                                   const GaussianPacket& packet);

struct ScatteringState {
  ComplexField field;  // normalized
  double subtracted_mass = 0.0;
  std::vector<double> residual_overlaps;  // per channel, after final pass
  int passes = 0;
};

/// (Id - sum of instantaneous bound projections) packet, renormalized;
/// alternating projections until every channel overlap is below 1e-10.
ScatteringState prepare_scattering_state(
    const GaussianPacket& packet, const ChargeTransferModel& model,
    const std::vector<SpectralFamily>& families);

/// Same subtraction applied to an existing field.
ScatteringState project_scattering(const ComplexField& f,
                                   const ChargeTransferModel& model,
                                   const std::vector<SpectralFamily>& families,
                                   double overlap_tol = 1e-10,
                                   int max_passes = 50);

struct WaveOperatorResult {
  ComplexField field;
  /// L2 distance (modulo global phase) to the instantaneous bound state.
  double distance = 0.0;
};

/// Approximates the channel-j wave operator applied to a bound state:
/// U(s,T) applied to the free single-channel evolution of w at horizon T,
/// with the Galilei conjugation for moving channels.
WaveOperatorResult duhamel_wave_operator(const ChargeTransferModel& model,
                                         int channel, const BoundState& state,
                                         double s, double T, double dt);

/// Right/left eigenpair of the non-self-adjoint matrix operator A,
/// biorthogonally normalized: <phi, psi_star> = 1.
struct BiorthogonalPair {
  double eigenvalue = 0.0;
  SpinorField right;      // phi,  A phi = omega phi
  SpinorField left;       // psi*, A* psi* = conj(omega) psi*
  double residual_right = 0.0;
  double residual_left = 0.0;
};

/// Point spectrum of the assembled 1D matrix operator A inside (-mu, mu),
/// mu = alpha^2/2, excluding a margin around 0 and +-mu. 1D only.
std::vector<BiorthogonalPair> matrix_bound_states(
    const MatrixPotentialSpec& spec, const GridPtr& grid,
    double margin = 0.05);

/// Biorthogonal point projection P_b = sum phi_j <., psi_j*> and its
/// complement; idempotent but not orthogonal.
SpinorField project_matrix_point(const SpinorField& s,
                                 const std::vector<BiorthogonalPair>& pairs,
                                 SpectralPart part);

}  // namespace dispersim

#endif
