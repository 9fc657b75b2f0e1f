#include "dispersim/norms.hpp"

#include <algorithm>
#include <cmath>

#include "dispersim/transform.hpp"

namespace dispersim {

double lp_norm(const ComplexField& f, double p) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm requires p >= 1");
  if (p == kInf) {
    double m = 0.0;
    for (const auto& z : f.values()) m = std::max(m, std::abs(z));
    return m;
  }
  const double hn = f.grid().cell_volume();
  if (p == 2.0) {
    double acc = 0.0;
    for (const auto& z : f.values()) acc += std::norm(z);
    return std::sqrt(acc * hn);
  }
  double acc = 0.0;
  for (const auto& z : f.values()) acc += std::pow(std::abs(z), p);
  return std::pow(acc * hn, 1.0 / p);
}

double lp_norm(const SpinorField& s, double p) {
  if (p == kInf) return std::max(lp_norm(s.up, p), lp_norm(s.down, p));
  double a = lp_norm(s.up, p), b = lp_norm(s.down, p);
  return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

double sobolev_norm(const ComplexField& f, int k) {
  if (k < 0) throw ConfigError("sobolev order must be >= 0");
  if (k == 0) return lp_norm(f, 2.0);
  ComplexField fhat = spectral_transform(f, Direction::forward);
  const Grid& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < fhat.size(); ++i) {
    Vec3 xi = g.freq_point(i);
    double x2 = 1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    acc += std::pow(x2, k) * std::norm(fhat[i]);
  }
  return std::sqrt(acc * g.cell_volume());
}

double sobolev_norm(const SpinorField& s, int k) {
  double a = sobolev_norm(s.up, k), b = sobolev_norm(s.down, k);
  return std::sqrt(a * a + b * b);
}

double weighted_l2_norm(const ComplexField& f, const Vec3& center,
                        double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("weight exponent must be positive");
  const Grid& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double r2 = g.torus_dist2(g.point(i), center);
    acc += std::pow(1.0 + r2, -sigma) * std::norm(f[i]);
  }
  return std::sqrt(acc * g.cell_volume());
}

bool is_admissible(const AdmissiblePair& pair, int n, double tol) {
  if (pair.p < 2.0) return false;
  double lhs = (pair.p == kInf ? 0.0 : 2.0 / pair.p) +
               (pair.q == kInf ? 0.0 : n / pair.q);
  if (std::abs(lhs - 0.5 * n) > tol) return false;
  if (n == 3 && !(pair.q >= 2.0 && pair.q <= 6.0)) return false;
  return true;
}

std::vector<AdmissiblePair> list_admissible_pairs(int n, int count) {
  if (count < 1) throw ConfigError("pair count must be >= 1");
  std::vector<AdmissiblePair> out;
  out.push_back({kInf, 2.0});
  if (n == 3) out.push_back({2.0, 6.0});  // endpoint, n >= 3 only
  // Fill with q = 2np/(np - 4) for increasing finite p above the endpoint.
  double p_start = (n == 3) ? 4.0 : (n == 2 ? 4.0 : 6.0);
  for (double p = p_start; static_cast<int>(out.size()) < count; p += 2.0) {
    double denom = n * p - 4.0;
    if (denom <= 0.0) continue;
    double q = 2.0 * n * p / denom;
    if (q < 2.0) break;
    out.push_back({p, q});
  }
  out.resize(std::min<std::size_t>(out.size(), count));
  return out;
}

double mixed_spacetime_norm(std::span<const double> times,
                            std::span<const ComplexField> snaps,
                            const AdmissiblePair& pair) {
  if (times.size() < 3 || snaps.size() != times.size())
    throw InsufficientDataError(
        "mixed space-time norm needs at least 3 uniformly spaced snapshots");
  if (pair.p == kInf) {
    double m = 0.0;
    for (const auto& f : snaps) m = std::max(m, lp_norm(f, pair.q));
    return m;
  }
  const std::size_t n = times.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::pow(lp_norm(snaps[i], pair.q), pair.p);
    double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;  // trapezoid
    acc += w * v;
  }
  double dt = times[1] - times[0];
  return std::pow(acc * dt, 1.0 / pair.p);
}

}  // namespace dispersim
