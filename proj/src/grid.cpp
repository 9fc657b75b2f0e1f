#include "dispersim/grid.hpp"

#include <cmath>
#include <numbers>

namespace dispersim {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(int dimension, int points_per_axis, double box_length)
    : n_(dimension), N_(points_per_axis), L_(box_length) {
  if (n_ < 1 || n_ > 3)
    throw ConfigError("grid dimension must be 1, 2 or 3");
  if (!power_of_two(N_) || N_ < 16)
    throw ConfigError("points per axis must be a power of two >= 16");
  if (!(L_ > 0.0)) throw ConfigError("box length must be positive");
  h_ = L_ / N_;
  two_pi_over_L_ = 2.0 * std::numbers::pi / L_;
  total_ = 1;
  cell_vol_ = 1.0;
  for (int d = 0; d < n_; ++d) {
    total_ *= static_cast<std::size_t>(N_);
    cell_vol_ *= h_;
  }
}

double Grid::wrap(double d) const {
  d = std::remainder(d, L_);
  if (d >= 0.5 * L_) d -= L_;  // remainder returns (-L/2, L/2]
  return d;
}

double Grid::torus_dist2(const Vec3& x, const Vec3& c) const {
  double r2 = 0.0;
  for (int d = 0; d < n_; ++d) {
    double dd = wrap(x[d] - c[d]);
    r2 += dd * dd;
  }
  return r2;
}

GridPtr make_grid(int dimension, int points_per_axis, double box_length) {
  return std::make_shared<Grid>(dimension, points_per_axis, box_length);
}

ComplexField::ComplexField(GridPtr g, std::vector<cplx> values)
    : grid_(std::move(g)), v_(std::move(values)) {
  if (v_.size() != grid_->size())
    throw ConfigError("field value count does not match grid size");
}

bool ComplexField::finite() const {
  for (const auto& z : v_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

SpinorField::SpinorField(ComplexField a, ComplexField b)
    : up(std::move(a)), down(std::move(b)) {
  if (!up.grid().same_as(down.grid()))
    throw ConfigError("spinor components must share one grid");
}

void check_same_grid(const ComplexField& a, const ComplexField& b) {
  if (!a.grid().same_as(b.grid()))
    throw ConfigError("grid mismatch between fields");
}

ComplexField operator+(const ComplexField& a, const ComplexField& b) {
  check_same_grid(a, b);
  ComplexField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

ComplexField operator-(const ComplexField& a, const ComplexField& b) {
  check_same_grid(a, b);
  ComplexField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

ComplexField operator*(cplx s, const ComplexField& f) {
  ComplexField r = f;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= s;
  return r;
}

ComplexField& operator+=(ComplexField& a, const ComplexField& b) {
  check_same_grid(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

ComplexField& operator-=(ComplexField& a, const ComplexField& b) {
  check_same_grid(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

cplx inner(const ComplexField& a, const ComplexField& b) {
  check_same_grid(a, b);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc * a.grid().cell_volume();
}

cplx inner(const SpinorField& a, const SpinorField& b) {
  return inner(a.up, b.up) + inner(a.down, b.down);
}

}  // namespace dispersim
