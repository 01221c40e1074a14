#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sweep/model.hpp"
#include "sweep/rng.hpp"

namespace testing {

inline sweep::EcologyParams soft_params() {
  sweep::EcologyParams p;
  p.f_A = 1.0;
  p.f_a = 2.0;
  p.C << 1.0, 0.9, 0.5, 1.0;
  return p;
}

/// f_a = 2 and all competition 1: nbar = (1, 2), S_aA = 1, S_Aa = -1.
inline sweep::EcologyParams hard_params() {
  sweep::EcologyParams p;
  p.f_A = 1.0;
  p.f_a = 2.0;
  p.C << 1.0, 1.0, 1.0, 1.0;
  return p;
}

/// r_K with f_a r_K log K / S_aA = 1 for hard_params().
inline double weak_r(std::int64_t K) { return 1.0 / (2.0 * std::log(static_cast<double>(K))); }

/// Random parameters with f > D and positive competition.
inline sweep::EcologyParams random_params(sweep::Rng& rng) {
  sweep::EcologyParams p;
  p.f_A = 0.2 + 3.0 * rng.uniform();
  p.f_a = 0.2 + 3.0 * rng.uniform();
  p.D_A = p.f_A * 0.9 * rng.uniform();
  p.D_a = p.f_a * 0.9 * rng.uniform();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) p.C(i, j) = (i == j ? 0.1 : 0.0) + 2.0 * rng.uniform();
  return p;
}

inline sweep::PopState random_state(sweep::Rng& rng, std::int64_t max_count) {
  sweep::PopState s;
  for (int t = 0; t < 4; ++t) s[t] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_count) + 1));
  return s;
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Gambler's ruin by a dense linear solve: h(x) = P_x(hit hi before lo) for a
/// walk on [lo, hi] stepping up with probability p_up(x).
template <typename Up>
std::vector<double> ruin_probabilities(std::int64_t lo, std::int64_t hi, Up&& p_up) {
  const auto n = static_cast<Eigen::Index>(hi - lo + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  A(0, 0) = 1.0;
  A(n - 1, n - 1) = 1.0;
  rhs(n - 1) = 1.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double p = p_up(lo + i);
    A(i, i) = 1.0;
    A(i, i + 1) = -p;
    A(i, i - 1) = -(1.0 - p);
  }
  const Eigen::VectorXd h = A.partialPivLu().solve(rhs);
  return std::vector<double>(h.data(), h.data() + n);
}

struct Birth {
  sweep::Allele selected;
  int neutral_parent;
  double weight;
};

// Every outcome of one birth: ordered gamete pair weighted by fertility, then
// either a clone of one parent or a recombinant taking one locus from each.
inline std::vector<Birth> enumerate_births(const std::vector<sweep::Allele>& pop, const sweep::EcologyParams& p, double r) {
  double G = 0.0;
  for (sweep::Allele x : pop) G += p.f(x);
  std::vector<Birth> out;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    for (std::size_t j = 0; j < pop.size(); ++j) {
      const double w = p.f(pop[i]) * p.f(pop[j]) / (G * G);
      const int a = static_cast<int>(i), b = static_cast<int>(j);
      out.push_back({pop[i], a, w * (1 - r) / 2});
      out.push_back({pop[j], b, w * (1 - r) / 2});
      out.push_back({pop[i], b, w * r / 2});
      out.push_back({pop[j], a, w * r / 2});
    }
  }
  return out;
}

// P(two individuals sampled from the alpha1 and alpha2 groups just after an
// alpha1 birth coalesce at it), by listing every sampled pair.
inline double enumerated_coalescence(const std::vector<sweep::Allele>& pop, const sweep::EcologyParams& p, double r, sweep::Allele a1, sweep::Allele a2) {
  double joint = 0.0, marginal = 0.0;
  for (const Birth& b : enumerate_births(pop, p, r)) {
    if (b.selected != a1) continue;
    marginal += b.weight;
    std::vector<sweep::Allele> after = pop;
    after.push_back(a1);
    const int newborn = static_cast<int>(pop.size());
    std::int64_t pairs = 0, hits = 0;
    for (int x = 0; x < static_cast<int>(after.size()); ++x) {
      for (int y = 0; y < static_cast<int>(after.size()); ++y) {
        if (after[x] != a1 || after[y] != a2 || x == y) continue;
        if (a1 == a2 && y < x) continue;
        ++pairs;
        if ((x == newborn && y == b.neutral_parent) || (y == newborn && x == b.neutral_parent)) ++hits;
      }
    }
    joint += b.weight * static_cast<double>(hits) / static_cast<double>(pairs);
  }
  return joint / marginal;
}

// P_1(T_0 <= t) from the backward equation q' = d - (b + d) q + b q^2 by RK4.
inline double extinction_by_ode(double b, double d, double t, int steps = 20000) {
  auto f = [&](double q) { return d - (b + d) * q + b * q * q; };
  double q = 0.0;
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    const double k1 = f(q), k2 = f(q + h / 2 * k1), k3 = f(q + h / 2 * k2), k4 = f(q + h * k3);
    q += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return q;
}

}  // namespace testing
