#ifndef DISPERSIM_GRID_HPP
#define DISPERSIM_GRID_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace dispersim {

using cplx = std::complex<double>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Spatial point, up to 3 components; unused trailing components are 0.
using Vec3 = std::array<double, 3>;

inline Vec3 vec3(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

/// Periodic lattice: coordinates x_j = -L/2 + j h per axis, frequencies
/// 2*pi*k/L with k in [-N/2, N/2).
class Grid {
 public:
  Grid(int dimension, int points_per_axis, double box_length);

  int dim() const { return n_; }
  int points_per_axis() const { return N_; }
  double box_length() const { return L_; }
  double spacing() const { return h_; }
  std::size_t size() const { return total_; }

  /// Cell volume h^n.
  double cell_volume() const { return cell_vol_; }

  double coordinate(int j) const { return -0.5 * L_ + j * h_; }
  double frequency(int k) const {
    int kk = k < N_ / 2 ? k : k - N_;
    return two_pi_over_L_ * kk;
  }

  /// Decompose a flat index (axis 1 fastest) into per-axis indices.
  std::array<int, 3> unflatten(std::size_t idx) const {
    std::array<int, 3> a{0, 0, 0};
    for (int d = 0; d < n_; ++d) {
      a[d] = static_cast<int>(idx % N_);
      idx /= N_;
    }
    return a;
  }

  Vec3 point(std::size_t idx) const {
    auto a = unflatten(idx);
    Vec3 x{0, 0, 0};
    for (int d = 0; d < n_; ++d) x[d] = coordinate(a[d]);
    return x;
  }

  Vec3 freq_point(std::size_t idx) const {
    auto a = unflatten(idx);
    Vec3 xi{0, 0, 0};
    for (int d = 0; d < n_; ++d) xi[d] = frequency(a[d]);
    return xi;
  }

  /// Signed distance on the torus, wrapped into [-L/2, L/2) per axis.
  double wrap(double d) const;

  /// Squared minimum-image distance between x and c (first n axes).
  double torus_dist2(const Vec3& x, const Vec3& c) const;

  bool same_as(const Grid& o) const {
    return n_ == o.n_ && N_ == o.N_ && L_ == o.L_;
  }

 private:
  int n_;
  int N_;
  double L_;
  double h_;
  double cell_vol_;
  double two_pi_over_L_;
  std::size_t total_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dimension, int points_per_axis, double box_length);

/// Complex-valued wave function sampled on a Grid.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(GridPtr g) : grid_(std::move(g)), v_(grid_->size()) {}
  ComplexField(GridPtr g, std::vector<cplx> values);

  const Grid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  std::size_t size() const { return v_.size(); }

  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }
  std::vector<cplx>& values() { return v_; }
  const std::vector<cplx>& values() const { return v_; }

  bool finite() const;

 private:
  GridPtr grid_;
  std::vector<cplx> v_;
};

/// Two-component field; both components share one grid.
struct SpinorField {
  ComplexField up;
  ComplexField down;

  SpinorField() = default;
  explicit SpinorField(GridPtr g) : up(g), down(std::move(g)) {}
  SpinorField(ComplexField a, ComplexField b);

  const Grid& grid() const { return up.grid(); }
  GridPtr grid_ptr() const { return up.grid_ptr(); }
};

void check_same_grid(const ComplexField& a, const ComplexField& b);

// Pointwise linear algebra on fields.
ComplexField operator+(const ComplexField& a, const ComplexField& b);
ComplexField operator-(const ComplexField& a, const ComplexField& b);
ComplexField operator*(cplx s, const ComplexField& f);
ComplexField& operator+=(ComplexField& a, const ComplexField& b);
ComplexField& operator-=(ComplexField& a, const ComplexField& b);

/// h^n-weighted L2 inner product, conjugate-linear in the second slot.
cplx inner(const ComplexField& a, const ComplexField& b);
cplx inner(const SpinorField& a, const SpinorField& b);

}  // namespace dispersim

#endif
