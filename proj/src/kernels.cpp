#include "ondamp/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <exception>

namespace ondamp {

CertPoint evaluate_point(const ErrorState& e, const GainParams& p,
                         const PMatrix& P) {
  const Mat2 j = demidovich_J(e, p, P);
  const SymEigen ev = sym_eigenvalues(j);
  CertPoint pt;
  pt.e1 = e.e1;
  pt.e2 = e.e2;
  pt.quadform = e.e1 * (j.a11 * e.e1 + j.a12 * e.e2) +
                e.e2 * (j.a21 * e.e1 + j.a22 * e.e2);
  pt.lambda_lo = ev.lo;
  pt.lambda_hi = ev.hi;
  pt.rate_printed = closed_form_rate(e, p, kPrintedRateCoefficient);
  pt.rate_derived = closed_form_rate(e, p, kDerivedRateCoefficient);
  return pt;
}

namespace {

// Singular points are flagged in place so the parallel loop needs no
// shared containers; compaction happens serially afterwards.
PointBatch compact(const std::vector<ErrorState>& pts,
                   std::vector<CertPoint>& evaluated,
                   const std::vector<std::uint8_t>& singular) {
  PointBatch out;
  out.points.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (singular[i]) {
      out.skipped.push_back(pts[i]);
    } else {
      out.points.push_back(evaluated[i]);
    }
  }
  return out;
}

}  // namespace

PointBatch evaluate_points_serial(const std::vector<ErrorState>& pts,
                                  const GainParams& p, const PMatrix& P) {
  PointBatch out;
  for (const ErrorState& e : pts) {
    try {
      out.points.push_back(evaluate_point(e, p, P));
    } catch (const SingularInput&) {
      out.skipped.push_back(e);
    }
  }
  return out;
}

PointBatch evaluate_points(const std::vector<ErrorState>& pts,
                           const GainParams& p, const PMatrix& P) {
  std::vector<CertPoint> evaluated(pts.size());
  std::vector<std::uint8_t> singular(pts.size(), 0);
  const auto n = static_cast<std::int64_t>(pts.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      evaluated[idx] = evaluate_point(pts[idx], p, P);
    } catch (const SingularInput&) {
      singular[idx] = 1;
    }
  }
  return compact(pts, evaluated, singular);
}

namespace {

EnergyGrid prepare_energy_grid(const GainParams& p, const Axis& e1,
                               const Axis& e2) {
  p.validate();
  if (e1.n == 0 || e2.n == 0) {
    throw InvalidParams("energy grid axes need at least one point");
  }
  EnergyGrid g;
  g.e1 = e1.values();
  g.e2 = e2.values();
  if (p.mu == 0.0) {
    for (double v : g.e1) {
      if (v == 0.0) {
        throw InvalidParams("energy rate is unbounded on e1 = 0 when mu = 0");
      }
    }
  }
  g.abs_vdot.assign(g.e1.size() * g.e2.size(), 0.0);
  return g;
}

}  // namespace

EnergyGrid energy_rate_grid_serial(const GainParams& p, const Axis& e1,
                                   const Axis& e2) {
  EnergyGrid g = prepare_energy_grid(p, e1, e2);
  for (std::size_t i = 0; i < g.e1.size(); ++i) {
    for (std::size_t j = 0; j < g.e2.size(); ++j) {
      g.abs_vdot[i * g.e2.size() + j] =
          std::abs(lyapunov_Vdot(ErrorState{g.e1[i], g.e2[j]}, p));
    }
  }
  return g;
}

EnergyGrid energy_rate_grid(const GainParams& p, const Axis& e1,
                            const Axis& e2) {
  EnergyGrid g = prepare_energy_grid(p, e1, e2);
  const auto rows = static_cast<std::int64_t>(g.e1.size());
  const std::size_t cols = g.e2.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto row = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < cols; ++j) {
      g.abs_vdot[row * cols + j] =
          std::abs(lyapunov_Vdot(ErrorState{g.e1[row], g.e2[j]}, p));
    }
  }
  return g;
}

std::vector<SimOutcome> simulate_batch_serial(const std::vector<SimJob>& jobs) {
  std::vector<SimOutcome> out;
  out.reserve(jobs.size());
  for (const SimJob& job : jobs) {
    out.push_back(simulate(job.system, job.init, job.ref, job.noise, job.cfg));
  }
  return out;
}

std::vector<SimOutcome> simulate_batch(const std::vector<SimJob>& jobs) {
  std::vector<SimOutcome> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const SimJob& job = jobs[idx];
    try {
      out[idx] = simulate(job.system, job.init, job.ref, job.noise, job.cfg);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }
  return out;
}

}  // namespace ondamp
