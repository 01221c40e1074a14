#pragma once

#include <cstdint>
#include <optional>

#include "sweep/model.hpp"

namespace sweep {

enum class Regime { Soft, HardStrong, HardWeak };

const char* to_string(Regime r);

struct SweepPrediction {
  Regime regime = Regime::Soft;
  double p_ab1_limit = 0.0;
  std::optional<double> rho_K;    ///< hard-weak only
  std::optional<double> F_limit;  ///< soft only
  double fixation_prob = 0.0;
  std::optional<double> r_log_K;  ///< r_K log K, reported for hard sweeps
};

/// 1 - exp(-f_a r_K log K / S_aA).
double rho_K(const EcologyParams& params, double r_K, std::int64_t K);

/// Soft sweep from standing variation: (z_Ab1/z_A) F(z,r) + (z_ab1/z_a)(1 - F(z,r)).
SweepPrediction predict_soft(const EcologyParams& params, double r, const Vec4& z, double tol = 1e-10);

/// Hard sweep in the given recombination regime. The regime is an explicit
/// input; r_K log K is reported alongside.
SweepPrediction predict_hard(const EcologyParams& params, double r_K, std::int64_t K, double z_Ab1_frac,
                             Regime regime);

}  // namespace sweep
