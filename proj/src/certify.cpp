#include "ondamp/certify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ondamp/kernels.hpp"

namespace ondamp {

PMatrix::PMatrix(const Mat2& m) : m_(m) {
  if (m.a12 != m.a21) {
    throw InvalidParams("P must be symmetric");
  }
  const SymEigen ev = sym_eigenvalues(m);
  if (!(ev.lo > 0.0)) {
    throw InvalidParams("P must be positive definite");
  }
}

PMatrix PMatrix::energy_weight(double k) {
  if (!(k > 0.0)) {
    throw InvalidParams("gain k must be positive");
  }
  return PMatrix(Mat2{0.5 * k, 0.0, 0.0, 0.5});
}

SymEigen sym_eigenvalues(const Mat2& m) {
  const double mean = 0.5 * (m.a11 + m.a22);
  const double radius = std::hypot(0.5 * (m.a11 - m.a22), m.a12);
  return {mean - radius, mean + radius};
}

Mat2 demidovich_J(const ErrorState& e, const GainParams& p, const PMatrix& P) {
  const Mat2 a = jacobian_tracking(e, p);
  const Mat2& w = P.matrix();
  // S = P A; J = (S + S^T) / 2 since A^T P = (P A)^T for symmetric P.
  const double s11 = w.a11 * a.a11 + w.a12 * a.a21;
  const double s12 = w.a11 * a.a12 + w.a12 * a.a22;
  const double s21 = w.a21 * a.a11 + w.a22 * a.a21;
  const double s22 = w.a21 * a.a12 + w.a22 * a.a22;
  const double off = 0.5 * (s12 + s21);
  return {s11, off, off, s22};
}

double quadform_along_state(const ErrorState& e, const GainParams& p,
                            const PMatrix& P) {
  const Mat2 j = demidovich_J(e, p, P);
  return e.e1 * (j.a11 * e.e1 + j.a12 * e.e2) +
         e.e2 * (j.a21 * e.e1 + j.a22 * e.e2);
}

double closed_form_rate(const ErrorState& e, const GainParams& p, double c) {
  if (e.e2 == 0.0) {
    return 0.0;
  }
  const double denom = std::abs(e.e1) + p.mu;
  if (denom == 0.0) {
    throw SingularInput("closed-form rate undefined at e1 = 0 with mu = 0");
  }
  const double abs_e2 = std::abs(e.e2);
  return -c * abs_e2 * e.e2 * e.e2 * (std::abs(e.e1) + 2.0 * p.mu) /
         (denom * denom);
}

double lyapunov_V(const ErrorState& e, const GainParams& p) {
  return 0.5 * p.k * e.e1 * e.e1 + 0.5 * e.e2 * e.e2;
}

double lyapunov_Vdot(const ErrorState& e, const GainParams& p) {
  if (e.e2 == 0.0) {
    return 0.0;
  }
  const double denom = std::abs(e.e1) + p.mu;
  if (denom == 0.0) {
    throw SingularInput("energy rate undefined at e1 = 0 with mu = 0");
  }
  return -std::abs(e.e2) * e.e2 * e.e2 / denom;
}

double Axis::at(std::size_t i) const {
  if (n <= 1) {
    return lo;
  }
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

std::vector<double> Axis::values() const {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = at(i);
  }
  return v;
}

GridSpec GridSpec::default_grid() {
  GridSpec g;
  g.e1 = Axis{-2.0, 2.0, 101};
  g.e2 = Axis{-2.0, 2.0, 101};
  for (int j = 0; j <= 12; ++j) {
    const double mag = std::pow(10.0, -6.0 + 0.5 * j);
    g.e1_extra.push_back(-mag);
    g.e1_extra.push_back(mag);
  }
  return g;
}

std::vector<ErrorState> GridSpec::points() const {
  std::vector<ErrorState> pts;
  pts.reserve((e1.n + e1_extra.size()) * e2.n);
  const auto e2s = e2.values();
  for (double a : e1.values()) {
    for (double b : e2s) {
      pts.push_back({a, b});
    }
  }
  for (double a : e1_extra) {
    for (double b : e2s) {
      pts.push_back({a, b});
    }
  }
  return pts;
}

namespace {

double rel_err(double value, double reference) {
  if (value == reference) {
    return 0.0;
  }
  return std::abs(value - reference) /
         std::max(std::abs(value), std::abs(reference));
}

}  // namespace

CertSummary summarize(const std::vector<CertPoint>& points,
                      std::size_t skipped) {
  CertSummary s;
  s.evaluated = points.size();
  s.skipped = skipped;
  if (points.empty()) {
    return s;
  }
  s.max_quadform = -std::numeric_limits<double>::infinity();
  s.min_lambda = std::numeric_limits<double>::infinity();
  s.max_lambda = -std::numeric_limits<double>::infinity();
  bool zeros_match = true;
  for (const CertPoint& pt : points) {
    s.max_quadform = std::max(s.max_quadform, pt.quadform);
    const bool is_zero = pt.quadform == 0.0;
    s.zero_count += is_zero ? 1 : 0;
    if (is_zero != (pt.e2 == 0.0)) {
      zeros_match = false;
    }
    s.min_lambda = std::min(s.min_lambda, pt.lambda_lo);
    s.max_lambda = std::max(s.max_lambda, pt.lambda_hi);
    s.lambda_nonneg_count += pt.lambda_hi >= 0.0 ? 1 : 0;
    s.max_rel_err_printed =
        std::max(s.max_rel_err_printed, rel_err(pt.rate_printed, pt.quadform));
    s.max_rel_err_derived =
        std::max(s.max_rel_err_derived, rel_err(pt.rate_derived, pt.quadform));
  }
  s.zero_set_is_e2_axis = zeros_match && s.zero_count > 0;
  if (s.max_rel_err_derived <= kCoefficientMatchTol) {
    s.matched_coefficient = kDerivedRateCoefficient;
  } else if (s.max_rel_err_printed <= kCoefficientMatchTol) {
    s.matched_coefficient = kPrintedRateCoefficient;
  }
  return s;
}

Certificate grid_certificate(const GainParams& p, const PMatrix& P,
                             const GridSpec& grid) {
  p.validate();
  Certificate cert;
  cert.params = p;
  cert.weight = P.matrix();
  PointBatch batch = evaluate_points(grid.points(), p, P);
  cert.points = std::move(batch.points);
  cert.skipped = std::move(batch.skipped);
  cert.summary = summarize(cert.points, cert.skipped.size());
  return cert;
}

namespace {

void require_same_grid(const TimeSeries& a, const TimeSeries& b) {
  if (a.empty() || b.empty()) {
    throw DegenerateInput("contraction estimate needs non-empty series");
  }
  if (a.dt != b.dt || a.t0 != b.t0) {
    throw std::invalid_argument("series must share the same time grid");
  }
}

}  // namespace

ContractionReport contraction_estimate(const TimeSeries& a,
                                       const TimeSeries& b, double t_from) {
  require_same_grid(a, b);
  const std::size_t n = std::min(a.size(), b.size());
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = std::hypot(a.x1[i] - b.x1[i], a.x2[i] - b.x2[i]);
  }
  const double d0 = d[0];
  if (d0 == 0.0) {
    throw DegenerateInput("series start from the same state");
  }

  ContractionReport rep;
  const double t0 = a.t[0];
  for (std::size_t i = 0; i < n; ++i) {
    rep.sup_ratio = std::max(rep.sup_ratio, d[i] / d0);
  }

  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * d0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    if (a.t[i] < t_from) {
      continue;
    }
    if (!(d[i] > floor)) {
      break;
    }
    xs.push_back(a.t[i] - t0);
    ys.push_back(std::log(d[i]));
  }
  if (xs.size() < 2) {
    throw DegenerateInput("contraction fit window has fewer than 2 samples");
  }
  const auto m = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = xs[static_cast<std::size_t>(i)];
    rhs(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  rep.beta = -coef(1);
  rep.window_samples = xs.size();
  rep.fit_residual =
      std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(m));

  // Smallest alpha making the envelope hold on every sample.
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] == 0.0) {
      continue;
    }
    const double log_ratio = std::log(d[i] / d0) + rep.beta * (a.t[i] - t0);
    rep.alpha = std::max(rep.alpha, std::exp(log_ratio));
  }
  return rep;
}

double attractor_slope(const TimeSeries& ts, double window) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double norm = ts.error_norm(i);
    if (norm > 0.0 && norm < window) {
      xs.push_back(ts.e1[i]);
      ys.push_back(ts.e2[i]);
    }
  }
  if (xs.size() < 10) {
    std::ostringstream msg;
    msg << "only " << xs.size() << " samples inside attractor window "
        << window;
    throw DegenerateInput(msg.str());
  }
  const auto m = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = xs[static_cast<std::size_t>(i)];
    rhs(i) = ys[static_cast<std::size_t>(i)];
  }
  return design.colPivHouseholderQr().solve(rhs)(1);
}

LogFit logscale_fit(const TimeSeries& ts, double floor, double t_from) {
  std::vector<double> taus, ys;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts.t[i] < t_from) {
      continue;
    }
    const double mag = std::abs(ts.e1[i]);
    if (!(mag > floor)) {
      break;
    }
    taus.push_back(ts.t[i] - t_from);
    ys.push_back(std::log10(mag));
  }
  if (taus.size() < 3) {
    throw DegenerateInput("log-scale fit window has fewer than 3 samples");
  }
  // Fit on tau / span to keep the Vandermonde columns comparable.
  const double span = std::max(taus.back(), std::numeric_limits<double>::min());
  const auto m = static_cast<Eigen::Index>(taus.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = taus[static_cast<std::size_t>(i)] / span;
    design(i, 0) = 1.0;
    design(i, 1) = s;
    design(i, 2) = s * s;
    rhs(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d b = design.colPivHouseholderQr().solve(rhs);
  return {b(0), b(1) / span, b(2) / (span * span), taus.size()};
}

namespace {

// Cubic Hermite interpolation on [0, 1] with end slopes already scaled by h.
double hermite(double y0, double y1, double m0, double m1, double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 +
         (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
}

}  // namespace

double k_scaling_check(const GainParams& p, const PlantState& init, double dt,
                       double t_end) {
  p.validate();
  const double root_k = std::sqrt(p.k);
  GainParams unit = p;
  unit.k = 1.0;
  if (p.sat) {
    unit.sat = *p.sat / p.k;
  }

  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.stop_on_convergence = false;
  IntegratorConfig unit_cfg = cfg;
  unit_cfg.t_end = root_k * t_end;

  const RefProfile ref_k = make_constant(0.0, cfg.t_end);
  const RefProfile ref_1 = make_constant(0.0, unit_cfg.t_end);
  const SimOutcome run_k =
      simulate(SystemSpec::setpoint(p), init, ref_k, std::nullopt, cfg);
  const SimOutcome run_1 =
      simulate(SystemSpec::setpoint(unit),
               PlantState{init.x1, init.x2 / root_k}, ref_1, std::nullopt,
               unit_cfg);
  const TimeSeries& a = run_k.series;
  const TimeSeries& b = run_1.series;
  if (b.size() < 2) {
    throw DegenerateInput("unit-gain run produced fewer than 2 samples");
  }

  double worst = 0.0;
  const std::size_t last = b.size() - 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double pos = root_k * a.t[i] / dt;
    auto j = static_cast<std::size_t>(std::floor(pos));
    double s = pos - static_cast<double>(j);
    if (j >= last) {
      if (j > last || s > 1e-9) {
        break;
      }
      j = last - 1;
      s = 1.0;
    }
    const Deriv2 f0 = rhs_setpoint(PlantState{b.x1[j], b.x2[j]}, unit);
    const Deriv2 f1 = rhs_setpoint(PlantState{b.x1[j + 1], b.x2[j + 1]}, unit);
    const double x1 = hermite(b.x1[j], b.x1[j + 1], dt * f0.d1, dt * f1.d1, s);
    const double x2 = hermite(b.x2[j], b.x2[j + 1], dt * f0.d2, dt * f1.d2, s);
    const double dev =
        std::abs(a.x1[i] - x1) + std::abs(a.x2[i] / root_k - x2);
    worst = std::max(worst, dev);
  }
  return worst;
}

}  // namespace ondamp
