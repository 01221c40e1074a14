#pragma once

#include <iosfwd>
#include <vector>

#include "sweep/model.hpp"

namespace sweep {

/// Four-type densities per unit K, plus the quadrature accumulators used to
/// evaluate F alongside the flow.
struct DenseState {
  Vec4 n = Vec4::Zero();  ///< Ab1, Ab2, ab1, ab2
  double h = 0.0;         ///< r f_A f_a int (n_A + n_a) / (f_A n_A + f_a n_a)
  double F = 0.0;         ///< F(z, r, t)

  double n_A() const { return n(0) + n(1); }
  double n_a() const { return n(2) + n(3); }
  double p_Ab1() const { return n(0) / n_A(); }
  double p_ab1() const { return n(2) / n_a(); }
};

/// (n_A, n_a, g = P_A,b1 - P_a,b1, P_a,b1).
struct ChangeVarState {
  double n_A = 0.0;
  double n_a = 0.0;
  double g = 0.0;
  double p_ab1 = 0.0;
};

ChangeVarState to_change_vars(const Vec4& n);
Vec4 from_change_vars(const ChangeVarState& c);

/// Right-hand side of the (n_A, n_a, g, p_a,b1) system.
ChangeVarState change_var_rhs(const EcologyParams& params, double r, const ChangeVarState& c);

/// Right-hand side of the four-type system (recombination included).
Vec4 lv4_rhs(const EcologyParams& params, double r, const Vec4& n);

struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double sample_dt = 0.0;  ///< 0: record accepted steps only
  double initial_dt = 1e-3;
  long max_steps = 50'000'000;
};

struct Lv2Point {
  double t = 0.0;
  double n_A = 0.0;
  double n_a = 0.0;
};

/// Competitive Lotka-Volterra flow of (n_A, n_a). The last point is at t_end.
std::vector<Lv2Point> integrate_lv2(const EcologyParams& params, double z_A, double z_a, double t_end,
                                    const OdeOptions& opts = {});

struct Lv4Point {
  double t = 0.0;
  DenseState state;
};

/// Four-type flow with the (h, F) accumulators integrated alongside. The
/// last point is at t_end.
std::vector<Lv4Point> integrate_lv4(const EcologyParams& params, double r, const DenseState& z, double t_end,
                                    const OdeOptions& opts = {});

/// F(z, r, t) by co-integration of (h, F) with the two-type flow.
double compute_F(const EcologyParams& params, double r, const Vec4& z, double t, const OdeOptions& opts = {});

struct FLimit {
  double value = 0.0;
  double t_stop = 0.0;
  double tail_bound = 0.0;  ///< certified bound on F(z, r) - F(z, r, t_stop)
  double eps = 0.0;         ///< target-set size used by the bound
};

/// F(z, r) = lim F(z, r, t). Integrates until the tail bound
/// 2 r f_A n_A(t) / ((nbar_a - eps/2) |S_Aa|), valid inside the relaxation
/// target set, drops below tol. Throws NumericalError at the time cap.
FLimit compute_F_limit(const EcologyParams& params, double r, const Vec4& z, double tol = 1e-10,
                       double time_cap = 1e4);

struct RelaxationTime {
  double t_eps = 0.0;
  double window = 0.0;  ///< trailing window over which invariance was checked
};

/// First time after which the two-type flow stays in
/// [0, eps^2 / 2] x [nbar_a - eps / 2, inf), checked over a trailing window
/// of 10 / |S_Aa|.
RelaxationTime relaxation_time(const EcologyParams& params, const Vec4& z, double eps, double time_cap = 1e4);

/// Largest eps accepted by relaxation_time for these parameters.
double max_relaxation_eps(const EcologyParams& params);

/// CSV with header t,n_Ab1,n_Ab2,n_ab1,n_ab2,h,F.
void write_dense_csv(std::ostream& os, const std::vector<Lv4Point>& trajectory);

}  // namespace sweep
