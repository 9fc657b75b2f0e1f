#ifndef DISPERSIM_TEST_ORACLES_HPP
#define DISPERSIM_TEST_ORACLES_HPP

#include <lapacke.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "dispersim/grid.hpp"

namespace dispersim::test {

// Independent oracle: the discretized 3D Hamiltonian with the kinetic term
// applied through a naive axis-wise DFT (no shared code with the library
// transform), diagonalized by Lanczos with full reorthogonalization.
struct DenseHamiltonian3D {
  int N;
  double L;
  std::vector<double> V;  // potential on the same flattened lattice

  std::vector<cplx> apply(const std::vector<cplx>& f) const {
    const std::size_t total = f.size();
    std::vector<cplx> out(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = V[i] * f[i];

    std::vector<cplx> line(N), hat(N);
    // Index-space DFT phases e^{-2 pi i r / N}; jk enters only mod N.
    std::vector<cplx> root(N);
    for (int r = 0; r < N; ++r)
      root[r] = std::polar(1.0, -2.0 * std::numbers::pi * r / N);
    for (int axis = 0; axis < 3; ++axis) {
      const std::size_t stride =
          axis == 0 ? 1 : (axis == 1 ? static_cast<std::size_t>(N)
                                     : static_cast<std::size_t>(N) * N);
      const std::size_t planes = total / N;
      for (std::size_t p = 0; p < planes; ++p) {
        std::size_t lo = axis == 0 ? p * N
                         : axis == 1
                             ? (p / N) * static_cast<std::size_t>(N) * N + p % N
                             : p;
        for (int j = 0; j < N; ++j) line[j] = f[lo + j * stride];
        for (int k = 0; k < N; ++k) {
          cplx acc = 0.0;
          for (int j = 0; j < N; ++j) acc += line[j] * root[(j * k) % N];
          hat[k] = acc / static_cast<double>(N);
        }
        for (int k = 0; k < N; ++k) {
          int kk = k < N / 2 ? k : k - N;
          double xi = 2.0 * std::numbers::pi * kk / L;
          hat[k] *= 0.5 * xi * xi;
        }
        for (int j = 0; j < N; ++j) {
          cplx acc = 0.0;
          for (int k = 0; k < N; ++k)
            acc += hat[k] * std::conj(root[(j * k) % N]);
          out[lo + j * stride] += acc;
        }
      }
    }
    return out;
  }
};

inline double lanczos_ground_state(const DenseHamiltonian3D& H, int iters) {
  const std::size_t n = H.V.size();
  std::mt19937 rng(4242);
  std::normal_distribution<double> gs;
  std::vector<std::vector<cplx>> basis;
  std::vector<double> alpha, beta;

  std::vector<cplx> v(n);
  for (auto& z : v) z = gs(rng);
  double nrm = 0.0;
  for (const auto& z : v) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  for (auto& z : v) z /= nrm;
  basis.push_back(v);

  for (int it = 0; it < iters; ++it) {
    std::vector<cplx> w = H.apply(basis.back());
    cplx a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += w[i] * std::conj(basis.back()[i]);
    alpha.push_back(a.real());
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * basis.back()[i];
    if (basis.size() > 1) {
      const auto& prev = basis[basis.size() - 2];
      for (std::size_t i = 0; i < n; ++i) w[i] -= beta.back() * prev[i];
    }
    for (const auto& b : basis) {
      cplx c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += w[i] * std::conj(b[i]);
      for (std::size_t i = 0; i < n; ++i) w[i] -= c * b[i];
    }
    double bnorm = 0.0;
    for (const auto& z : w) bnorm += std::norm(z);
    bnorm = std::sqrt(bnorm);
    if (bnorm < 1e-12) break;
    beta.push_back(bnorm);
    for (auto& z : w) z /= bnorm;
    basis.push_back(std::move(w));
  }

  int m = static_cast<int>(alpha.size());
  std::vector<double> d = alpha, e(beta.begin(), beta.begin() + (m - 1));
  int info = LAPACKE_dstev(LAPACK_ROW_MAJOR, 'N', m, d.data(), e.data(),
                           nullptr, m);
  if (info != 0) throw std::runtime_error("dstev failed in the Lanczos oracle");
  return d[0];
}

}  // namespace dispersim::test

#endif
