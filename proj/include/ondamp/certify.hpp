// Convergence analysis of the tracking loop: the Demidovich matrix
// J = 1/2 (P A + A^T P) with A the tracking Jacobian, its along-state
// quadratic form, the quadratic energy V = e^T P e and its rate, plus
// trajectory-level estimators (contraction envelope, attractor slope,
// log-scale decay fit, gain-scaling invariance).
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ondamp/integrator.hpp"
#include "ondamp/model.hpp"

namespace ondamp {

class DegenerateInput : public std::invalid_argument {
 public:
  explicit DegenerateInput(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Symmetric positive definite weight of the quadratic energy.
class PMatrix {
 public:
  /// Throws InvalidParams unless m is exactly symmetric with both
  /// eigenvalues positive.
  explicit PMatrix(const Mat2& m);

  /// 1/2 diag(k, 1): V = 1/2 k e1^2 + 1/2 e2^2.
  static PMatrix energy_weight(double k);

  const Mat2& matrix() const { return m_; }

 private:
  Mat2 m_;
};

struct SymEigen {
  double lo = 0.0;
  double hi = 0.0;
};

/// Closed-form eigenvalues of a symmetric 2x2 matrix (a12 is used for both
/// off-diagonal entries).
SymEigen sym_eigenvalues(const Mat2& m);

Mat2 demidovich_J(const ErrorState& e, const GainParams& p, const PMatrix& P);

/// e^T J(e) e.
double quadform_along_state(const ErrorState& e, const GainParams& p,
                            const PMatrix& P);

/// Coefficient printed with the closed-form along-state rate.
inline constexpr double kPrintedRateCoefficient = 0.75;
/// Coefficient obtained by expanding e^T J e for P = 1/2 diag(k, 1).
inline constexpr double kDerivedRateCoefficient = 0.5;

/// -c |e2| e2^2 (|e1| + 2 mu) / (|e1| + mu)^2.
double closed_form_rate(const ErrorState& e, const GainParams& p, double c);

double lyapunov_V(const ErrorState& e, const GainParams& p);
/// -|e2| e2^2 / (|e1| + mu).
double lyapunov_Vdot(const ErrorState& e, const GainParams& p);

/// Uniform axis; n == 1 yields the single value lo.
struct Axis {
  double lo = -2.0;
  double hi = 2.0;
  std::size_t n = 101;

  double at(std::size_t i) const;
  std::vector<double> values() const;
};

struct GridSpec {
  Axis e1;
  Axis e2;
  /// Additional e1 abscissae crossed with the e2 axis.
  std::vector<double> e1_extra;

  /// 101 x 101 on [-2, 2]^2 plus |e1| in {1e-6, 10^-5.5, ..., 1} (both signs).
  static GridSpec default_grid();
  std::vector<ErrorState> points() const;
};

struct CertPoint {
  double e1 = 0.0;
  double e2 = 0.0;
  double quadform = 0.0;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  /// Closed-form rate at the printed and derived coefficients.
  double rate_printed = 0.0;
  double rate_derived = 0.0;
};

struct CertSummary {
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  double max_quadform = 0.0;
  std::size_t zero_count = 0;
  /// Zeros of the quadratic form coincide with the e2 = 0 grid points.
  bool zero_set_is_e2_axis = false;
  double min_lambda = 0.0;
  double max_lambda = 0.0;
  /// Points where J has a non-negative eigenvalue.
  std::size_t lambda_nonneg_count = 0;
  double max_rel_err_printed = 0.0;
  double max_rel_err_derived = 0.0;
  /// The preset coefficient reproducing the numeric path, if any.
  std::optional<double> matched_coefficient;
};

struct Certificate {
  GainParams params;
  Mat2 weight;
  std::vector<CertPoint> points;
  std::vector<ErrorState> skipped;
  CertSummary summary;
};

/// Relative tolerance for matching the closed-form rate to the numeric path.
inline constexpr double kCoefficientMatchTol = 1e-10;

CertSummary summarize(const std::vector<CertPoint>& points,
                      std::size_t skipped);

Certificate grid_certificate(const GainParams& p, const PMatrix& P,
                             const GridSpec& grid);

struct ContractionReport {
  double alpha = 0.0;
  double beta = 0.0;
  double sup_ratio = 0.0;
  /// RMS residual of the log-linear fit.
  double fit_residual = 0.0;
  std::size_t window_samples = 0;
};

/// Fits log d(t) ~ log(alpha d0) - beta (t - t0) on t >= t_from until d drops
/// below 100 eps d0; alpha is then the smallest factor bounding every sample.
ContractionReport contraction_estimate(const TimeSeries& a,
                                       const TimeSeries& b,
                                       double t_from = 0.0);

/// Least-squares slope of e2 against e1 over samples with
/// 0 < |(e1, e2)| < window.
double attractor_slope(const TimeSeries& ts, double window);

struct LogFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::size_t samples = 0;
};

/// log10|e1| ~ c0 + c1 tau + c2 tau^2 with tau = t - t_from, over the
/// contiguous samples from t_from while |e1| > floor.
LogFit logscale_fit(const TimeSeries& ts, double floor, double t_from = 0.0);

/// Max over the common horizon of |x1_k(t) - x1_1(sqrt(k) t)| +
/// |x2_k(t) / sqrt(k) - x2_1(sqrt(k) t)| for set-point runs of gain k from
/// init and gain 1 from (x1, x2 / sqrt(k)). The unit-gain trace is
/// interpolated by cubic Hermite using the field as derivative.
double k_scaling_check(const GainParams& p, const PlantState& init, double dt,
                       double t_end);

struct EnergyGrid {
  std::vector<double> e1;
  std::vector<double> e2;
  /// |Vdot| at (e1[i], e2[j]) stored at i * e2.size() + j.
  std::vector<double> abs_vdot;

  double at(std::size_t i, std::size_t j) const {
    return abs_vdot[i * e2.size() + j];
  }
};

}  // namespace ondamp
