#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cstariff/errors.hpp"

namespace cstariff {

struct VclCurveParams {
  double voll = 5.0;         // EUR/kWh
  double steepness_b = 8.0;  // dimensionless

  void validate() const {
    if (!(voll > 0.0) || !std::isfinite(voll)) {
      throw DomainError("VoLL must be positive");
    }
    if (!(steepness_b > 0.0) || !std::isfinite(steepness_b)) {
      throw DomainError("VCL steepness must be positive");
    }
  }
};

inline constexpr int kDefaultVclSegments = 10;

/// Marginal value of cut load (EUR/kWh) once a fraction `cut_fraction` of
/// peak load is already curtailed: voll * (1 - e^{-b f}) / (1 - e^{-b}).
inline double vcl_marginal(const VclCurveParams& params, double cut_fraction) {
  params.validate();
  if (!(cut_fraction >= 0.0 && cut_fraction <= 1.0)) {
    throw DomainError("cut fraction must lie in [0,1], got " +
                      std::to_string(cut_fraction));
  }
  if (cut_fraction == 1.0) return params.voll;
  const double b = params.steepness_b;
  return params.voll * -std::expm1(-b * cut_fraction) / -std::expm1(-b);
}

struct VclSegment {
  double width_kw;
  double marginal_cost;  // EUR/kWh
};

/// Piecewise-linear discomfort cost of one consumer in one scenario year.
/// Segments are filled cheapest first.
class VclSegmentStack {
 public:
  VclSegmentStack(double peak_load_kw, std::vector<VclSegment> segments)
      : peak_(peak_load_kw), segments_(std::move(segments)) {
    if (!(peak_ > 0.0) || !std::isfinite(peak_)) {
      throw DegenerateProfile("segment stack needs a positive peak load");
    }
    if (segments_.empty()) throw DomainError("segment stack is empty");
    double width = 0.0;
    for (std::size_t j = 0; j < segments_.size(); ++j) {
      if (!(segments_[j].width_kw > 0.0)) {
        throw DomainError("segment widths must be positive");
      }
      if (j > 0 &&
          !(segments_[j].marginal_cost > segments_[j - 1].marginal_cost)) {
        throw DomainError("segment marginal costs must strictly increase");
      }
      width += segments_[j].width_kw;
    }
    if (std::abs(width - peak_) > 1e-9 * peak_) {
      throw DomainError("segment widths must sum to the peak load");
    }
  }

  double peak_load_kw() const noexcept { return peak_; }
  std::span<const VclSegment> segments() const noexcept { return segments_; }
  std::size_t segment_count() const noexcept { return segments_.size(); }

 private:
  double peak_;
  std::vector<VclSegment> segments_;
};

/// `segment_count` equal-width segments, each priced at the curve's value at
/// the segment's right endpoint.
inline VclSegmentStack build_segment_stack(const VclCurveParams& params,
                                           double peak_load_kw,
                                           int segment_count) {
  params.validate();
  if (!(peak_load_kw > 0.0) || !std::isfinite(peak_load_kw)) {
    throw DegenerateProfile("cannot build VCL segments on a zero peak load");
  }
  if (segment_count < 1) throw DomainError("segment count must be >= 1");
  const double width = peak_load_kw / segment_count;
  std::vector<VclSegment> segments;
  segments.reserve(std::size_t(segment_count));
  for (int j = 1; j <= segment_count; ++j) {
    segments.push_back(
        {width, vcl_marginal(params, double(j) / double(segment_count))});
  }
  return {peak_load_kw, std::move(segments)};
}

/// Hourly discomfort (EUR) of curtailing `cut_kw`.
inline double discomfort_cost(const VclSegmentStack& stack, double cut_kw) {
  const double peak = stack.peak_load_kw();
  if (!(cut_kw >= 0.0) || cut_kw > peak + 1e-9 * std::max(1.0, peak)) {
    throw DomainError("cut of " + std::to_string(cut_kw) +
                      " kW outside [0, peak]");
  }
  double remaining = cut_kw;
  double cost = 0.0;
  for (const auto& seg : stack.segments()) {
    if (remaining <= 0.0) break;
    const double take = std::min(remaining, seg.width_kw);
    cost += take * seg.marginal_cost;
    remaining -= take;
  }
  // Rounding slack past the last segment is billed at the top rate.
  if (remaining > 0.0) cost += remaining * stack.segments().back().marginal_cost;
  return cost;
}

}  // namespace cstariff
