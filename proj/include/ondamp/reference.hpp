// Piecewise-quadratic reference trajectories and the seeded measurement
// noise channel.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ondamp {

class OutOfDomain : public std::out_of_range {
 public:
  explicit OutOfDomain(const std::string& what) : std::out_of_range(what) {}
};

class InvalidProfile : public std::invalid_argument {
 public:
  explicit InvalidProfile(const std::string& what)
      : std::invalid_argument(what) {}
};

struct RefSample {
  double r = 0.0;
  double rdot = 0.0;
  double rddot = 0.0;
};

/// r(t) = c0 + c1 (t - t_start) + c2 (t - t_start)^2 on [t_start, t_end].
struct RefSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Ordered segments covering [0, t_end] with r and rdot continuous at every
/// joint. rddot may jump.
class RefProfile {
 public:
  /// Throws InvalidProfile on gaps, overlaps, or C1 discontinuities.
  explicit RefProfile(std::vector<RefSegment> segments);

  RefSample eval(double t) const;
  double t_end() const { return segments_.back().t_end; }
  /// End of the last segment with non-zero curvature (0 if none).
  double transient_end() const;
  const std::vector<RefSegment>& segments() const { return segments_; }

 private:
  std::vector<RefSegment> segments_;
};

RefSample eval_ref(const RefProfile& profile, double t);

RefProfile make_constant(double value, double t_end);
RefProfile make_slope(double v, double t_end);
/// Ramp to v_max at |accel|, cruise for t_cruise, ramp back to rest, then
/// hold the reached position until t_end.
RefProfile make_trapezoid(double v_max, double accel, double t_cruise,
                          double t_end);

struct NoiseConfig {
  double sigma1 = 1e-4;    // x1 measurement std [m]
  double sigma2 = 1e-3;    // x2 measurement std [m/s]
  double sample_dt = 1e-3; // hold interval [s]
  std::uint64_t seed = 0;

  void validate(double integrator_dt) const;
};

/// Zero-order-hold Gaussian noise on both measured coordinates. Each
/// coordinate draws from its own mt19937_64 stream seeded with
/// seed_seq{seed_lo, seed_hi, channel}; normal deviates come from the
/// Box-Muller transform on 53-bit uniforms so sequences are bit-exact across
/// standard libraries.
class NoiseChannel {
 public:
  explicit NoiseChannel(const NoiseConfig& cfg);

  struct Measurement {
    double x1 = 0.0;
    double x2 = 0.0;
  };

  /// Query times must be non-decreasing.
  Measurement measure(double true_x1, double true_x2, double t);

 private:
  class GaussianStream {
   public:
    GaussianStream(std::uint64_t seed, std::uint32_t channel);
    double next();

   private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
  };

  void advance_to(std::int64_t interval);

  NoiseConfig cfg_;
  GaussianStream stream1_;
  GaussianStream stream2_;
  std::int64_t interval_ = -1;
  double held1_ = 0.0;
  double held2_ = 0.0;
};

}  // namespace ondamp
