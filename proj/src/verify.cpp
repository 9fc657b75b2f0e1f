#include "dispersim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dispersim/symmetry.hpp"
#include "dispersim/transform.hpp"

namespace dispersim {

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 1.0;
  std::vector<double> residuals;
};

LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  f.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.residuals[i] = y[i] - (f.intercept + f.slope * x[i]);
    ssr += f.residuals[i] * f.residuals[i];
  }
  f.r2 = syy > 1e-300 ? 1.0 - ssr / syy : 1.0;
  return f;
}

std::string prov(const Grid& g, double dt) {
  std::ostringstream os;
  os << "n=" << g.dim() << " N=" << g.points_per_axis()
     << " L=" << g.box_length() << " dt=" << dt;
  return os.str();
}

double dot3(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

DecayFit fit_power_decay(const std::vector<Sample>& samples, double t_min,
                         double t_max) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    if (s.t < t_min || s.t > t_max) continue;
    if (s.t <= 0.0) throw FitError("power-law fit needs strictly positive t");
    if (s.value <= 0.0)
      throw FitError("power-law fit needs strictly positive values");
    x.push_back(std::log(s.t));
    y.push_back(std::log(s.value));
  }
  if (x.size() < 5) throw FitError("fit window holds fewer than 5 samples");
  LineFit lf = ols(x, y);
  DecayFit fit;
  fit.exponent = lf.slope;
  fit.intercept = lf.intercept;
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.r_squared = lf.r2;
  fit.residuals = lf.residuals;
  fit.decreasing = lf.slope < 0.0;
  return fit;
}

DecayFit fit_exponential_decay(const std::vector<Sample>& samples,
                               double t_min, double t_max, double floor) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    if (s.t < t_min || s.t > t_max || s.value <= floor) continue;
    x.push_back(s.t);
    y.push_back(std::log(s.value));
  }
  DecayFit fit;
  fit.t_min = t_min;
  fit.t_max = t_max;
  if (x.size() < 5) {
    fit.defined = false;
    return fit;
  }
  LineFit lf = ols(x, y);
  fit.exponent = lf.slope;
  fit.intercept = lf.intercept;
  fit.r_squared = lf.r2;
  fit.residuals = lf.residuals;
  fit.decreasing = lf.slope < 0.0;
  return fit;
}

DispersiveResult dispersive_report(const ChargeTransferModel& model,
                                   const ComplexField& psi0, double T,
                                   double dt, int stride,
                                   double fit_start_frac) {
  const int n = model.grid->dim();
  Trajectory traj = evolve(model, psi0, 0.0, T, dt, stride);
  int clean = traj.last_clean_index();
  if (clean < 2) throw FitError("boundary contamination leaves no window");
  const double t_clean = traj.times[clean];
  const double l1 = lp_norm(psi0, 1.0);

  std::vector<Sample> samples;
  double sup_scaled = 0.0;
  for (int i = 1; i <= clean; ++i) {
    double t = traj.times[i];
    double v = lp_norm(traj.fields[i], kInf);
    samples.push_back({t, v});
    sup_scaled = std::max(sup_scaled, std::pow(t, 0.5 * n) * v / l1);
  }

  DispersiveResult out;
  out.fit = fit_power_decay(samples, fit_start_frac * t_clean, t_clean);
  out.report.metric = "dispersive_decay";
  out.report.values["exponent"] = out.fit.exponent;
  out.report.values["expected_exponent"] = -0.5 * n;
  out.report.values["r_squared"] = out.fit.r_squared;
  out.report.values["sup_t_scaled_supnorm_over_l1"] = sup_scaled;
  out.report.window_start = out.fit.t_min;
  out.report.window_end = out.fit.t_max;
  out.report.boundary_contaminated = clean + 1 < static_cast<int>(traj.size());
  out.report.provenance = prov(*model.grid, dt);
  if (out.fit.r_squared < 0.5) out.report.flags.push_back("poor_fit");
  if (!out.fit.decreasing) out.report.flags.push_back("non_decaying");
  return out;
}

DecayFit weighted_operator_report(const ChargeTransferModel& model,
                                  const std::vector<SpectralFamily>& families,
                                  const Vec3& x0, const Vec3& x1, double sigma,
                                  double T, double dt, int n_probes,
                                  int stride, unsigned seed) {
  const Grid& g = *model.grid;
  if (!(sigma > 0.5 * g.dim()))
    throw ConfigError("weight exponent must exceed n/2");
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;

  std::optional<DecayFit> worst;
  for (int probe = 0; probe < n_probes; ++probe) {
    // Smooth localized probe: random low modes under a Gaussian envelope.
    ComplexField f(model.grid);
    constexpr int kModes = 4;
    std::vector<cplx> coef(kModes);
    std::vector<Vec3> kvec(kModes);
    for (int m = 0; m < kModes; ++m) {
      coef[m] = cplx(gauss(rng), gauss(rng));
      for (int d = 0; d < g.dim(); ++d)
        kvec[m][d] =
            (2.0 * std::numbers::pi / g.box_length()) * std::round(3 * gauss(rng));
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      Vec3 x = g.point(i);
      double r2 = g.torus_dist2(x, x1);
      cplx osc = 0.0;
      for (int m = 0; m < kModes; ++m)
        osc += coef[m] * std::polar(1.0, dot3(x, kvec[m]));
      // weight <x - x1>^-sigma folded into the probe
      f[i] = osc * std::exp(-r2 / 8.0) * std::pow(1.0 + r2, -0.5 * sigma);
    }
    ComplexField start = f;
    if (!families.empty())
      start = project_scattering(f, model, families, 1e-10, 50).field;
    double nrm = lp_norm(start, 2.0);
    if (nrm == 0.0) continue;
    start = cplx(1.0 / nrm, 0.0) * start;

    Trajectory traj = evolve(model, start, 0.0, T, dt, stride);
    int clean = traj.last_clean_index();
    if (clean < 2) throw FitError("boundary contamination leaves no window");
    std::vector<Sample> samples;
    for (int i = 1; i <= clean; ++i)
      samples.push_back(
          {traj.times[i], weighted_l2_norm(traj.fields[i], x0, sigma)});
    DecayFit fit =
        fit_power_decay(samples, 0.25 * traj.times[clean], traj.times[clean]);
    if (!worst || fit.exponent > worst->exponent) worst = fit;
  }
  if (!worst) throw FitError("no usable probes");
  return *worst;
}

EstimateReport weighted_curve_report(const ChargeTransferModel& model,
                                     const ComplexField& psi0,
                                     const Vec3& curve_velocity, double sigma,
                                     double T, double dt, int stride) {
  Trajectory traj = evolve(model, psi0, 0.0, T, dt, stride);
  // The weight suppresses mass near the boundary, so the integral is kept
  // over the full horizon; wrap effects are reported, not truncated.
  int clean = static_cast<int>(traj.size()) - 1;
  bool contaminated = traj.last_clean_index() < clean;

  std::vector<double> integrand;
  for (int i = 0; i <= clean; ++i) {
    Vec3 c{curve_velocity[0] * traj.times[i], curve_velocity[1] * traj.times[i],
           curve_velocity[2] * traj.times[i]};
    double w = weighted_l2_norm(traj.fields[i], c, sigma);
    integrand.push_back(w * w);
  }
  const double step = traj.times[1] - traj.times[0];
  std::vector<double> cumulative(integrand.size(), 0.0);
  for (std::size_t i = 1; i < integrand.size(); ++i)
    cumulative[i] =
        cumulative[i - 1] + 0.5 * step * (integrand[i - 1] + integrand[i]);

  auto partial_at = [&](double frac) {
    std::size_t idx = static_cast<std::size_t>(frac * clean);
    return cumulative[idx];
  };
  EstimateReport rep;
  rep.metric = "weighted_spacetime_integral";
  rep.values["integral_quarter"] = partial_at(0.25);
  rep.values["integral_half"] = partial_at(0.5);
  rep.values["integral_full"] = cumulative[clean];
  double total = cumulative[clean];
  double late = total - partial_at(0.5);
  rep.values["late_increment_fraction"] = total > 0.0 ? late / total : 0.0;
  rep.window_start = traj.times[0];
  rep.window_end = traj.times[clean];
  rep.boundary_contaminated = contaminated;
  rep.provenance = prov(*model.grid, dt);
  if (total > 0.0 && late / total > 0.05)
    rep.flags.push_back("late_increment_above_5pct");
  return rep;
}

EstimateReport strichartz_report(const Trajectory& traj,
                                 const std::vector<AdmissiblePair>& pairs) {
  int clean = traj.last_clean_index();
  if (clean < 2) throw FitError("boundary contamination leaves no window");
  std::span<const double> times(traj.times.data(), clean + 1);
  std::span<const ComplexField> snaps(traj.fields.data(), clean + 1);
  const double norm0 = lp_norm(traj.fields.front(), 2.0);

  EstimateReport rep;
  rep.metric = "strichartz_ratios";
  rep.window_start = traj.times.front();
  rep.window_end = traj.times[clean];
  rep.boundary_contaminated = clean + 1 < static_cast<int>(traj.size());
  for (const auto& pr : pairs) {
    std::ostringstream key;
    key << "ratio_p=" << (pr.p == kInf ? std::string("inf")
                                       : std::to_string(pr.p))
        << "_q=" << pr.q;
    double full = mixed_spacetime_norm(times, snaps, pr);
    rep.values[key.str()] = full / norm0;
    if (pr.p != kInf && clean >= 4) {
      std::size_t half = clean / 2 + 1;
      double part = mixed_spacetime_norm(times.subspan(0, half),
                                         snaps.subspan(0, half), pr);
      // A non-decaying profile grows like T^(1/p); compare p-th power mass.
      double ip_full = std::pow(full, pr.p), ip_half = std::pow(part, pr.p);
      double late_frac = ip_full > 0.0 ? (ip_full - ip_half) / ip_full : 0.0;
      if (late_frac > 0.45) {
        key.str("");
        key << "divergent_p=" << pr.p << "_q=" << pr.q;
        rep.flags.push_back(key.str());
      }
    }
  }
  return rep;
}

EstimateReport energy_report(const Trajectory& traj, int k) {
  EstimateReport rep;
  rep.metric = "energy_h" + std::to_string(k);
  double sup = 0.0, sup_t = 0.0;
  std::vector<double> series;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    double v = traj.is_spinor() ? sobolev_norm(traj.spinors[i], k)
                                : sobolev_norm(traj.fields[i], k);
    series.push_back(v);
    if (v > sup) {
      sup = v;
      sup_t = traj.times[i];
    }
  }
  double early = 0.0, late = 0.0;
  std::size_t half = series.size() / 2;
  for (std::size_t i = 0; i < series.size(); ++i)
    (i < half ? early : late) = std::max(i < half ? early : late, series[i]);
  rep.values["sup"] = sup;
  rep.values["sup_time"] = sup_t;
  rep.values["late_growth_ratio"] = early > 0.0 ? late / early : 0.0;
  rep.window_start = traj.times.front();
  rep.window_end = traj.times.back();
  return rep;
}

OrthogonalityDecay orthogonality_decay_report(
    const ChargeTransferModel& model, const Trajectory& traj,
    const std::vector<SpectralFamily>& families) {
  OrthogonalityDecay out;
  int clean = traj.last_clean_index();
  if (clean < 0) clean = static_cast<int>(traj.size()) - 1;

  for (int i = 0; i <= clean; ++i) {
    double beta = 0.0;
    for (std::size_t j = 0; j < families.size(); ++j)
      beta += lp_norm(
          project_point_moving(traj.fields[i], families[j],
                               model.wells[j].velocity, traj.times[i],
                               SpectralPart::bound),
          2.0);
    out.beta.push_back({traj.times[i], beta});
  }

  double bmax = 0.0, t_peak = out.beta.front().t;
  for (const auto& s : out.beta)
    if (s.value > bmax) {
      bmax = s.value;
      t_peak = s.t;
    }
  out.transient_end = t_peak;
  if (bmax < 1e-12) {
    out.already_orthogonal = true;
    out.fit.defined = false;
    return out;
  }
  out.fit = fit_exponential_decay(out.beta, t_peak, out.beta.back().t);
  return out;
}

namespace {

// Bound coefficients at one time: c_i = e^{i lambda_i t} <psi, g(t) w_i>.
struct ChannelCoeffs {
  std::vector<cplx> c;
};

std::vector<ChannelCoeffs> extract_coeffs(
    const ChargeTransferModel& model, const ComplexField& psi, double t,
    const std::vector<SpectralFamily>& families) {
  std::vector<ChannelCoeffs> out(families.size());
  for (std::size_t j = 0; j < families.size(); ++j) {
    BoostSpec b{model.wells[j].velocity, {0, 0, 0}, t};
    for (const auto& st : families[j].states) {
      ComplexField chan = galilei(st.eigenfunction, b);
      cplx c = std::polar(1.0, st.eigenvalue * t) * inner(psi, chan);
      out[j].c.push_back(c);
    }
  }
  return out;
}

ComplexField reconstruct_bound(const ChargeTransferModel& model,
                               const std::vector<SpectralFamily>& families,
                               const std::vector<ChannelCoeffs>& coeffs,
                               double t, const GridPtr& grid) {
  ComplexField acc(grid);
  for (std::size_t j = 0; j < families.size(); ++j) {
    BoostSpec b{model.wells[j].velocity, {0, 0, 0}, t};
    for (std::size_t i = 0; i < families[j].states.size(); ++i) {
      const auto& st = families[j].states[i];
      ComplexField chan = galilei(st.eigenfunction, b);
      acc += (coeffs[j].c[i] * std::polar(1.0, -st.eigenvalue * t)) * chan;
    }
  }
  return acc;
}

DecompositionReport decomposition_from_coeffs(
    const ChargeTransferModel& model, const Trajectory& traj,
    const std::vector<SpectralFamily>& families,
    const std::vector<ChannelCoeffs>& coeffs, const ComplexField& phi0,
    double t_late, int clean) {
  DecompositionReport rep;
  rep.fit_time = t_late;
  rep.free_profile = phi0;
  if (!families.empty()) rep.coeff_stationary = coeffs[0].c;
  for (std::size_t j = 1; j < coeffs.size(); ++j)
    rep.coeff_moving.insert(rep.coeff_moving.end(), coeffs[j].c.begin(),
                            coeffs[j].c.end());

  for (int i = 0; i <= clean; ++i) {
    double t = traj.times[i];
    ComplexField recon =
        reconstruct_bound(model, families, coeffs, t, traj.fields[i].grid_ptr());
    recon += free_evolve(phi0, t);
    rep.times.push_back(t);
    rep.residual_norms.push_back(lp_norm(traj.fields[i] - recon, 2.0));
  }
  std::size_t m = rep.residual_norms.size();
  if (m >= 4) {
    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < m / 2; ++i) early += rep.residual_norms[i];
    for (std::size_t i = m / 2; i < m; ++i) late += rep.residual_norms[i];
    rep.residual_decreasing =
        late / (m - m / 2) <= early / (m / 2) + 1e-12;
  } else {
    rep.residual_decreasing = true;
  }
  return rep;
}

}  // namespace

DecompositionReport asymptotic_decomposition(
    const ChargeTransferModel& model, const Trajectory& traj,
    const std::vector<SpectralFamily>& families) {
  int clean = traj.last_clean_index();
  if (clean < 0) throw FitError("no contamination-free late window");
  const double T = traj.times[clean];
  const ComplexField& psiT = traj.fields[clean];

  auto coeffs = extract_coeffs(model, psiT, T, families);
  ComplexField scatter = psiT -
      reconstruct_bound(model, families, coeffs, T, psiT.grid_ptr());
  ComplexField phi0 = free_evolve(scatter, -T);
  return decomposition_from_coeffs(model, traj, families, coeffs, phi0, T,
                                   clean);
}

DecompositionReport asymptotic_decomposition_windowed(
    const ChargeTransferModel& model, const Trajectory& traj,
    const std::vector<SpectralFamily>& families, int window_snapshots) {
  int clean = traj.last_clean_index();
  if (clean < 0) throw FitError("no contamination-free late window");
  int first = std::max(0, clean - window_snapshots + 1);

  std::vector<ChannelCoeffs> mean;
  int count = 0;
  for (int i = first; i <= clean; ++i) {
    auto c = extract_coeffs(model, traj.fields[i], traj.times[i], families);
    if (mean.empty()) {
      mean = c;
    } else {
      for (std::size_t j = 0; j < c.size(); ++j)
        for (std::size_t k = 0; k < c[j].c.size(); ++k)
          mean[j].c[k] += c[j].c[k];
    }
    ++count;
  }
  for (auto& ch : mean)
    for (auto& z : ch.c) z /= static_cast<double>(count);

  const double T = traj.times[clean];
  ComplexField scatter = traj.fields[clean] -
      reconstruct_bound(model, families, mean, T, traj.fields[clean].grid_ptr());
  ComplexField phi0 = free_evolve(scatter, -T);
  return decomposition_from_coeffs(model, traj, families, mean, phi0, T,
                                   clean);
}

EstimateReport kato_smoothing_report(const ComplexField& u, double sigma,
                                     double T, double dt, int stride) {
  if (!(sigma > 0.5)) throw ConfigError("Kato weight needs sigma > 1/2");
  const Grid& g = u.grid();
  const int n = g.dim();

  // One half-smoothed gradient component per axis; the free flow commutes
  // with the multiplier so it is applied once up front.
  std::vector<ComplexField> comps;
  for (int a = 0; a < n; ++a) {
    comps.push_back(apply_multiplier(u, [a](const Vec3& xi) {
      double k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
      return cplx(0.0, xi[a]) / std::pow(1.0 + k2, 0.25);
    }));
  }

  const double step = dt * stride;
  const int nsamp = static_cast<int>(std::llround(T / step));
  std::vector<double> integrand;
  for (int k = 0; k <= nsamp; ++k) {
    double t = k * step;
    double val = 0.0;
    for (const auto& c : comps) {
      double w = weighted_l2_norm(free_evolve(c, t), {0, 0, 0}, sigma);
      val += w * w;
    }
    integrand.push_back(val);
  }
  std::vector<double> cumulative(integrand.size(), 0.0);
  for (std::size_t i = 1; i < integrand.size(); ++i)
    cumulative[i] =
        cumulative[i - 1] + 0.5 * step * (integrand[i - 1] + integrand[i]);

  EstimateReport rep;
  rep.metric = "kato_smoothing_integral";
  double total = cumulative.back();
  rep.values["integral_quarter"] = cumulative[integrand.size() / 4];
  rep.values["integral_half"] = cumulative[integrand.size() / 2];
  rep.values["integral_full"] = total;
  double late = total - cumulative[integrand.size() / 2];
  rep.values["late_increment_fraction"] = total > 0.0 ? late / total : 0.0;
  rep.window_start = 0.0;
  rep.window_end = T;
  rep.provenance = prov(g, dt);
  if (total > 0.0 && late / total > 0.05)
    rep.flags.push_back("late_increment_above_5pct");
  if (total > 0.0 && late / total > 0.45)
    rep.flags.push_back("linear_growth");
  return rep;
}

EstimateReport matrix_conjugacy_report(const MatrixPotentialSpec& spec,
                                       const GridPtr& grid,
                                       const SpinorField& s0, double T,
                                       double dt) {
  MatrixChargeTransferModel model{{spec}, grid};
  int nsteps = static_cast<int>(std::llround(T / dt));
  int stride = std::max(1, nsteps / 4);
  Trajectory lhs = evolve_matrix(model, s0, 0.0, T, dt, stride);

  const double norm0 = lp_norm(s0, 2.0);
  BoostSpec b0{spec.velocity, {0, 0, 0}, 0.0};
  SpinorField phi0 = modulation(spec.alpha, spec.gamma, 0.0,
                                galilei_spinor_inverse(s0, b0));

  EstimateReport rep;
  rep.metric = "matrix_conjugacy";
  double worst = 0.0;
  for (std::size_t i = 1; i < lhs.size(); ++i) {
    double t = lhs.times[i];
    SpinorField phi = evolve_matrix_stationary(spec, grid, phi0, t, dt);
    BoostSpec bt{spec.velocity, {0, 0, 0}, t};
    SpinorField rhs = galilei_spinor(
        modulation_inverse(spec.alpha, spec.gamma, t, phi), bt);
    SpinorField diff = lhs.spinors[i];
    diff.up -= rhs.up;
    diff.down -= rhs.down;
    double rel = lp_norm(diff, 2.0) / norm0;
    std::ostringstream key;
    key << "discrepancy_t=" << t;
    rep.values[key.str()] = rel;
    worst = std::max(worst, rel);
  }
  rep.values["discrepancy_max"] = worst;
  rep.window_start = 0.0;
  rep.window_end = T;
  rep.provenance = prov(*grid, dt);
  return rep;
}

EstimateReport matrix_stability_report(const MatrixPotentialSpec& spec,
                                       const GridPtr& grid,
                                       const std::vector<BiorthogonalPair>& pairs,
                                       const SpinorField& s0, double T,
                                       double dt, int stride) {
  SpinorField psi = project_matrix_point(s0, pairs, SpectralPart::continuous);
  const double norm0 = lp_norm(psi, 2.0);
  if (norm0 == 0.0) throw ConfigError("state has no continuous component");

  const double step = dt * stride;
  const int nsamp = static_cast<int>(std::llround(T / step));
  std::vector<double> history{norm0};
  for (int k = 1; k <= nsamp; ++k) {
    psi = evolve_matrix_stationary(spec, grid, psi, step, dt);
    double nrm = lp_norm(psi, 2.0);
    history.push_back(nrm);
    if (nrm > 1e6 * norm0)
      throw PropagationError(
          "matrix flow on the continuous subspace is numerically unstable");
  }
  double sup = 0.0, early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    sup = std::max(sup, history[i]);
    if (i < history.size() / 2)
      early = std::max(early, history[i]);
    else
      late = std::max(late, history[i]);
  }
  EstimateReport rep;
  rep.metric = "matrix_stability";
  rep.values["sup_ratio"] = sup / norm0;
  rep.values["late_growth_ratio"] = early > 0.0 ? late / early : 0.0;
  rep.values["final_ratio"] = history.back() / norm0;
  rep.window_start = 0.0;
  rep.window_end = T;
  rep.provenance = prov(*grid, dt);
  return rep;
}

}  // namespace dispersim
