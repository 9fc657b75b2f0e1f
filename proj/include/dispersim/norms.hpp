#ifndef DISPERSIM_NORMS_HPP
#define DISPERSIM_NORMS_HPP

#include <limits>
#include <span>
#include <vector>

#include "dispersim/grid.hpp"

namespace dispersim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Discrete L^p norm, (sum |f|^p h^n)^(1/p); p = kInf gives the lattice max.
double lp_norm(const ComplexField& f, double p);
double lp_norm(const SpinorField& s, double p);

/// H^k norm ||<xi>^k fhat||_2 via the spectral transform.
double sobolev_norm(const ComplexField& f, int k);
double sobolev_norm(const SpinorField& s, int k);

/// ||<x-x0>^-sigma f||_2 with the minimum-image torus distance.
double weighted_l2_norm(const ComplexField& f, const Vec3& center,
                        double sigma);

/// Exponent pair (p, q) with 2/p + n/q = n/2.
struct AdmissiblePair {
  double p;
  double q;
};

bool is_admissible(const AdmissiblePair& pair, int n, double tol = 1e-12);

/// Admissible pairs for dimension n, always including (inf, 2); for n = 3
/// also the endpoint (2, 6). Dimensions 1 and 2 get non-endpoint pairs only.
std::vector<AdmissiblePair> list_admissible_pairs(int n, int count = 6);

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// L^p_t L^q_x norm of uniformly spaced snapshots, trapezoid rule in time.
double mixed_spacetime_norm(std::span<const double> times,
                            std::span<const ComplexField> snaps,
                            const AdmissiblePair& pair);

}  // namespace dispersim

#endif
