#include "dispersim/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace dispersim {

namespace {

std::mutex plan_mutex;  // FFTW plan creation is not thread-safe

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* buf = nullptr;
  std::size_t total = 0;
};

// Cached in-place plans per (rank, N). Thread-local so concurrent
// trajectories never share a scratch buffer.
PlanPair& plans_for(int rank, int N, std::size_t total) {
  thread_local std::map<std::pair<int, int>, PlanPair> cache;
  auto key = std::make_pair(rank, N);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  PlanPair p;
  p.total = total;
  p.buf = fftw_alloc_complex(total);
  int dims[3] = {N, N, N};
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    p.fwd = fftw_plan_dft(rank, dims, p.buf, p.buf, FFTW_FORWARD,
                          FFTW_MEASURE);
    p.bwd = fftw_plan_dft(rank, dims, p.buf, p.buf, FFTW_BACKWARD,
                          FFTW_MEASURE);
  }
  return cache.emplace(key, p).first->second;
}

// Parity of the summed per-axis mode index; the box-centered convention
// multiplies mode k by (-1)^(k1+...+kn).
inline int index_parity(std::size_t idx, int N, int rank) {
  int s = 0;
  for (int d = 0; d < rank; ++d) {
    s += static_cast<int>(idx % N);
    idx /= N;
  }
  return s & 1;
}

}  // namespace

ComplexField spectral_transform(const ComplexField& f, Direction dir) {
  const Grid& g = f.grid();
  const int rank = g.dim();
  const int N = g.points_per_axis();
  const std::size_t total = g.size();
  auto& p = plans_for(rank, N, total);

  const double scale = 1.0 / std::sqrt(static_cast<double>(total));
  ComplexField out(f.grid_ptr());

  if (dir == Direction::forward) {
    for (std::size_t i = 0; i < total; ++i) {
      p.buf[i][0] = f[i].real();
      p.buf[i][1] = f[i].imag();
    }
    fftw_execute(p.fwd);
    for (std::size_t i = 0; i < total; ++i) {
      double sgn = index_parity(i, N, rank) ? -scale : scale;
      out[i] = cplx(p.buf[i][0] * sgn, p.buf[i][1] * sgn);
    }
  } else {
    for (std::size_t i = 0; i < total; ++i) {
      double sgn = index_parity(i, N, rank) ? -1.0 : 1.0;
      p.buf[i][0] = sgn * f[i].real();
      p.buf[i][1] = sgn * f[i].imag();
    }
    fftw_execute(p.bwd);
    for (std::size_t i = 0; i < total; ++i)
      out[i] = cplx(p.buf[i][0] * scale, p.buf[i][1] * scale);
  }
  return out;
}

ComplexField apply_multiplier(const ComplexField& f,
                              const std::function<cplx(const Vec3&)>& m) {
  ComplexField fhat = spectral_transform(f, Direction::forward);
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < fhat.size(); ++i) fhat[i] *= m(g.freq_point(i));
  return spectral_transform(fhat, Direction::inverse);
}

}  // namespace dispersim
