#ifndef DISPERSIM_VERIFY_HPP
#define DISPERSIM_VERIFY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dispersim/spectral.hpp"

namespace dispersim {

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Least-squares fit of a decay law; power fits regress log(value) on
/// log(t), exponential fits on t.
struct DecayFit {
  double exponent = 0.0;  // slope; for exponential fits the rate is -slope
  double intercept = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
  bool decreasing = false;
  bool defined = true;  // false when all samples sat below the floor
};

struct EstimateReport {
  std::string metric;
  std::map<std::string, double> values;
  std::string provenance;  // model/grid/dt description
  double window_start = 0.0;
  double window_end = 0.0;
  bool boundary_contaminated = false;
  /// Relative change of the headline value under refinement, when computed.
  std::optional<double> refinement_delta;
  std::vector<std::string> flags;

  bool flagged() const { return !flags.empty(); }
};

struct DecompositionReport {
  std::vector<cplx> coeff_stationary;  // one per stationary-channel bound state
  std::vector<cplx> coeff_moving;      // one per moving-channel bound state
  ComplexField free_profile;
  std::vector<double> times;
  std::vector<double> residual_norms;  // ||R(t)||_2 on the stored snapshots
  double fit_time = 0.0;               // T_late
  bool residual_decreasing = false;
};

struct Sample {
  double t;
  double value;
};

DecayFit fit_power_decay(const std::vector<Sample>& samples, double t_min,
                         double t_max);
DecayFit fit_exponential_decay(const std::vector<Sample>& samples,
                               double t_min, double t_max,
                               double floor = 1e-12);

struct DispersiveResult {
  EstimateReport report;
  DecayFit fit;
};

/// Sup-norm decay of a prepared scattering state; fits the exponent on the
/// contamination-free window and reports sup_t t^{n/2} ||psi||_inf / ||psi0||_1.
DispersiveResult dispersive_report(const ChargeTransferModel& model,
                                   const ComplexField& psi0, double T,
                                   double dt, int stride = 50,
                                   double fit_start_frac = 0.25);

/// Decay of ||<x-x0>^-sigma psi(t)||_2 for weighted, projected probes;
/// worst-case fit over the probe set. Empty families give the free /
/// stationary P_c variant.
DecayFit weighted_operator_report(const ChargeTransferModel& model,
                                  const std::vector<SpectralFamily>& families,
                                  const Vec3& x0, const Vec3& x1, double sigma,
                                  double T, double dt, int n_probes = 3,
                                  int stride = 50, unsigned seed = 12345);

/// Cumulative integral of the squared weighted norm along a moving center
/// x(t) = curve_origin + t * curve_velocity.
EstimateReport weighted_curve_report(const ChargeTransferModel& model,
                                     const ComplexField& psi0,
                                     const Vec3& curve_velocity, double sigma,
                                     double T, double dt, int stride = 20);

/// Mixed-norm ratios ||psi||_{L^p_t L^q_x} / ||psi0||_2 on the clean window,
/// with a divergence flag from the late-window increment.
EstimateReport strichartz_report(const Trajectory& traj,
                                 const std::vector<AdmissiblePair>& pairs);

EstimateReport energy_report(const Trajectory& traj, int k);

struct OrthogonalityDecay {
  DecayFit fit;  // exponential model on beta(t)
  std::vector<Sample> beta;
  double transient_end = 0.0;
  bool already_orthogonal = false;
};

/// beta(t) = ||P_b(H1) psi|| + ||P_b(H2,t) psi||, exponential fit after the
/// transient (argmax of beta).
OrthogonalityDecay orthogonality_decay_report(
    const ChargeTransferModel& model, const Trajectory& traj,
    const std::vector<SpectralFamily>& families);

/// Channel decomposition at the latest clean time: bound coefficients,
/// free profile, and the residual curve.
DecompositionReport asymptotic_decomposition(
    const ChargeTransferModel& model, const Trajectory& traj,
    const std::vector<SpectralFamily>& families);

/// Windowed cross-check of the coefficient extraction (mean over the late
/// clean snapshots); must agree with the single-time extraction.
DecompositionReport asymptotic_decomposition_windowed(
    const ChargeTransferModel& model, const Trajectory& traj,
    const std::vector<SpectralFamily>& families, int window_snapshots = 5);

/// Kato smoothing: gradient under <p>^-1/2 of the free flow, integrated
/// weighted norm; reports partial integrals and the late increment.
EstimateReport kato_smoothing_report(const ComplexField& u, double sigma,
                                     double T, double dt, int stride = 20);

/// Relative discrepancy between the moving matrix flow and the conjugated
/// stationary flow at T/4, T/2, T.
EstimateReport matrix_conjugacy_report(const MatrixPotentialSpec& spec,
                                       const GridPtr& grid,
                                       const SpinorField& s0, double T,
                                       double dt);

/// Norm history of the stationary matrix flow on the complement of the
/// biorthogonal point spectrum.
EstimateReport matrix_stability_report(const MatrixPotentialSpec& spec,
                                       const GridPtr& grid,
                                       const std::vector<BiorthogonalPair>& pairs,
                                       const SpinorField& s0, double T,
                                       double dt, int stride = 20);

}  // namespace dispersim

#endif
