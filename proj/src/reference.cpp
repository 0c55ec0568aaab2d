#include "ondamp/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ondamp {

namespace {

RefSample eval_segment(const RefSegment& s, double t) {
  const double tau = t - s.t_start;
  return {s.c0 + (s.c1 + s.c2 * tau) * tau, s.c1 + 2.0 * s.c2 * tau,
          2.0 * s.c2};
}

// Appends a segment whose value and slope continue the previous one exactly.
void push_continuing(std::vector<RefSegment>& segs, double t_start,
                     double t_end, double c2) {
  if (t_end <= t_start) {
    return;
  }
  RefSegment next{t_start, t_end, 0.0, 0.0, c2};
  if (!segs.empty()) {
    const RefSample end = eval_segment(segs.back(), segs.back().t_end);
    next.c0 = end.r;
    next.c1 = end.rdot;
  }
  segs.push_back(next);
}

// Query slack for grid times that overshoot t_end by rounding.
double domain_slack(double t_end) { return 1e-9 * std::max(1.0, t_end); }

}  // namespace

RefProfile::RefProfile(std::vector<RefSegment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw InvalidProfile("reference profile needs at least one segment");
  }
  if (segments_.front().t_start != 0.0) {
    throw InvalidProfile("reference profile must start at t = 0");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const RefSegment& s = segments_[i];
    if (!(s.t_end > s.t_start) || !std::isfinite(s.t_end)) {
      throw InvalidProfile("reference segment has non-positive duration");
    }
    if (i == 0) {
      continue;
    }
    const RefSegment& prev = segments_[i - 1];
    if (prev.t_end != s.t_start) {
      throw InvalidProfile("reference segments leave a gap or overlap");
    }
    const RefSample left = eval_segment(prev, prev.t_end);
    if (left.r != s.c0 || left.rdot != s.c1) {
      std::ostringstream msg;
      msg << "reference is not C1 at t = " << s.t_start;
      throw InvalidProfile(msg.str());
    }
  }
}

RefSample RefProfile::eval(double t) const {
  if (!(t >= 0.0) || t > t_end() + domain_slack(t_end())) {
    std::ostringstream msg;
    msg << "reference evaluated at t = " << t << " outside [0, " << t_end()
        << "]";
    throw OutOfDomain(msg.str());
  }
  // Right-continuous at joints: the segment starting at t is active.
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double value, const RefSegment& s) { return value < s.t_start; });
  return eval_segment(*std::prev(it), t);
}

double RefProfile::transient_end() const {
  double end = 0.0;
  for (const auto& s : segments_) {
    if (s.c2 != 0.0) {
      end = s.t_end;
    }
  }
  return end;
}

RefSample eval_ref(const RefProfile& profile, double t) {
  return profile.eval(t);
}

RefProfile make_constant(double value, double t_end) {
  if (!(t_end > 0.0)) {
    throw InvalidProfile("profile t_end must be positive");
  }
  return RefProfile({RefSegment{0.0, t_end, value, 0.0, 0.0}});
}

RefProfile make_slope(double v, double t_end) {
  if (!(t_end > 0.0)) {
    throw InvalidProfile("profile t_end must be positive");
  }
  return RefProfile({RefSegment{0.0, t_end, 0.0, v, 0.0}});
}

RefProfile make_trapezoid(double v_max, double accel, double t_cruise,
                          double t_end) {
  if (!(accel > 0.0)) {
    throw InvalidProfile("trapezoid acceleration must be positive");
  }
  if (!(t_cruise >= 0.0)) {
    throw InvalidProfile("trapezoid cruise time must be non-negative");
  }
  const double t_ramp = std::abs(v_max) / accel;
  const double t_stop = 2.0 * t_ramp + t_cruise;
  if (!(t_end > 0.0) || t_stop > t_end) {
    std::ostringstream msg;
    msg << "trapezoid needs " << t_stop << " s but profile ends at " << t_end;
    throw InvalidProfile(msg.str());
  }
  const double half_a = 0.5 * std::copysign(accel, v_max);

  std::vector<RefSegment> segs;
  push_continuing(segs, 0.0, t_ramp, half_a);
  push_continuing(segs, t_ramp, t_ramp + t_cruise, 0.0);
  push_continuing(segs, t_ramp + t_cruise, t_stop, -half_a);
  push_continuing(segs, t_stop, t_end, 0.0);
  return RefProfile(std::move(segs));
}

void NoiseConfig::validate(double integrator_dt) const {
  if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0) || !std::isfinite(sigma1) ||
      !std::isfinite(sigma2)) {
    throw std::invalid_argument("noise standard deviations must be >= 0");
  }
  // Hold intervals shorter than one integration step would be skipped.
  if (!(sample_dt > 0.0) || sample_dt < integrator_dt * (1.0 - 1e-12)) {
    throw std::invalid_argument(
        "noise sample_dt must be positive and at least the integrator dt");
  }
}

NoiseChannel::GaussianStream::GaussianStream(std::uint64_t seed,
                                             std::uint32_t channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), channel};
  engine_.seed(seq);
}

double NoiseChannel::GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  constexpr double kTwoPow53 = 9007199254740992.0;
  // u1 in (0, 1], u2 in [0, 1)
  const double u1 = 1.0 - static_cast<double>(engine_() >> 11) / kTwoPow53;
  const double u2 = static_cast<double>(engine_() >> 11) / kTwoPow53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

NoiseChannel::NoiseChannel(const NoiseConfig& cfg)
    : cfg_(cfg), stream1_(cfg.seed, 1u), stream2_(cfg.seed, 2u) {}

void NoiseChannel::advance_to(std::int64_t interval) {
  while (interval_ < interval) {
    held1_ = cfg_.sigma1 * stream1_.next();
    held2_ = cfg_.sigma2 * stream2_.next();
    ++interval_;
  }
}

NoiseChannel::Measurement NoiseChannel::measure(double true_x1,
                                                double true_x2, double t) {
  // The relative nudge keeps grid times like 3 * 1e-3 in their own interval.
  const auto interval =
      static_cast<std::int64_t>(std::floor(t / cfg_.sample_dt + 1e-9));
  advance_to(interval);
  return {true_x1 + held1_, true_x2 + held2_};
}

}  // namespace ondamp
