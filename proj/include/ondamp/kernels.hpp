// Data-parallel kernels. Every OpenMP kernel has a serial twin producing
// bit-identical results; tests compare the two and bench/ times them.
#pragma once

#include <optional>
#include <vector>

#include "ondamp/certify.hpp"
#include "ondamp/integrator.hpp"
#include "ondamp/reference.hpp"

namespace ondamp {

/// Evaluates one grid point; throws SingularInput where J is undefined.
CertPoint evaluate_point(const ErrorState& e, const GainParams& p,
                         const PMatrix& P);

struct PointBatch {
  std::vector<CertPoint> points;
  std::vector<ErrorState> skipped;
};

PointBatch evaluate_points_serial(const std::vector<ErrorState>& pts,
                                  const GainParams& p, const PMatrix& P);
PointBatch evaluate_points(const std::vector<ErrorState>& pts,
                           const GainParams& p, const PMatrix& P);

/// Throws InvalidParams if mu = 0 and the e1 axis contains 0.
EnergyGrid energy_rate_grid_serial(const GainParams& p, const Axis& e1,
                                   const Axis& e2);
EnergyGrid energy_rate_grid(const GainParams& p, const Axis& e1,
                            const Axis& e2);

struct SimJob {
  SystemSpec system;
  PlantState init;
  RefProfile ref;
  std::optional<NoiseConfig> noise;
  IntegratorConfig cfg;
};

std::vector<SimOutcome> simulate_batch_serial(const std::vector<SimJob>& jobs);
/// Runs are independent; each owns its noise channel.
std::vector<SimOutcome> simulate_batch(const std::vector<SimJob>& jobs);

}  // namespace ondamp
