#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qathermo/ising.hpp"
#include "qathermo/sampler.hpp"

namespace qathermo {

/// Degenerate-regime and quality flags attached to an estimate.
enum class RegimeFlag : unsigned {
  none = 0,
  zero_temperature = 1u << 0,
  high_t_saturation = 1u << 1,
  poor_fit = 1u << 2,
};

class Flags {
 public:
  constexpr Flags() = default;
  constexpr explicit Flags(unsigned bits) : bits_(bits) {}

  constexpr bool has(RegimeFlag f) const { return (bits_ & static_cast<unsigned>(f)) != 0; }
  constexpr void set(RegimeFlag f) { bits_ |= static_cast<unsigned>(f); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr unsigned bits() const { return bits_; }

  /// "zero_temperature|poor_fit"; empty string for no flags.
  std::string to_string() const;
  static Flags parse(std::string_view text);

  friend constexpr bool operator==(Flags, Flags) = default;

 private:
  unsigned bits_ = 0;
};

struct EstimatorOptions {
  int max_iterations = 100;
  /// Stop once the bracket on t is narrower than this.
  double t_tolerance = 1e-6;
  double t_min = 1e-3;
  double t_max = 1e6;
  /// Half-width, in ln t, of the first bracket around the density-inversion guess.
  double initial_step = 0.02;
  double poor_fit_threshold = 0.05;
  /// delta_1: density at or above 1/2 - delta_1 is saturated.
  double high_t_delta = 1e-3;
  /// Excitation probability 1 - p(1) below which a temperature is treated as
  /// unresolvable. delta_0 is half the density gap between that temperature
  /// and the ground state.
  double resolution_floor = 1e-6;
  /// Overrides the derived delta_0 when set.
  std::optional<double> zero_t_delta;
};

struct EstimateResult {
  /// Empty when the ensemble is frozen (zero temperature).
  std::optional<Temperature> t_eff;
  double epsilon = 0.0;
  int iterations = 0;
  Flags flags;
  bool converged = false;
};

/// Total variation distance, 1/2 sum |xi(k) - p(k)|.
double tvd(const EmpiricalHistogram& hist, const DomainWallPmf& pmf);
double tvd(const EmpiricalHistogram& a, const EmpiricalHistogram& b);

/// delta_0 for this ring under `options`.
double zero_temperature_delta(RingSpec ring, const EstimatorOptions& options);

/// Regime flags from the histogram's mean density, plus poor_fit when a fitted
/// epsilon is supplied and exceeds the threshold.
Flags classify_regime(const EmpiricalHistogram& hist, RingSpec ring, std::optional<double> epsilon,
                      const EstimatorOptions& options = {});

/// Minimizes tvd(hist, domain_wall_pmf(t)) over t in [t_min, t_max], starting
/// from the inverse of the histogram's mean density.
EstimateResult estimate_temperature(const EmpiricalHistogram& hist, RingSpec ring,
                                    const EstimatorOptions& options = {});

}  // namespace qathermo
