#include "sweep/dynsys.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "sweep/errors.hpp"
#include "sweep/format.hpp"

namespace sweep {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kNegativeTolerance = 1e-9;

template <int N>
using State = Eigen::Matrix<double, N, 1>;

// Adaptive Dormand-Prince 5(4) with dense output. After every accepted step
// the first `n_densities` components are checked: excursions below
// -kNegativeTolerance are an error, smaller ones are clamped to zero and the
// stepper restarted. on_step(stepper, t_prev, t_now) returns false to stop.
template <int N, typename System, typename OnStep>
void drive(System system, const State<N>& x0, double t_cap, int n_densities, const OdeOptions& opts,
           OnStep&& on_step) {
  using Stepper = odeint::runge_kutta_dopri5<State<N>, double, State<N>, double, odeint::vector_space_algebra>;
  auto stepper = odeint::make_dense_output(opts.abs_tol, opts.rel_tol, Stepper());
  stepper.initialize(x0, 0.0, opts.initial_dt);
  long steps = 0;
  while (stepper.current_time() < t_cap) {
    if (++steps > opts.max_steps) throw NumericalError("ODE step budget exhausted at t = " + format_double(stepper.current_time()));
    const auto [t_prev, t_now] = stepper.do_step(system);
    if (!std::isfinite(t_now) || !stepper.current_state().allFinite())
      throw NumericalError("ODE integration produced non-finite state at t = " + format_double(t_now));
    State<N> x = stepper.current_state();
    bool clamped = false;
    for (int i = 0; i < n_densities; ++i) {
      if (x(i) < -kNegativeTolerance)
        throw NumericalError("negative density " + format_double(x(i)) + " in component " + std::to_string(i) +
                             " at t = " + format_double(t_now));
      if (x(i) < 0.0) {
        x(i) = 0.0;
        clamped = true;
      }
    }
    if (!on_step(stepper, t_prev, t_now)) return;
    if (clamped) stepper.initialize(x, t_now, stepper.current_time_step());
  }
}

// Two-type flow with (h, F): state (n_A, n_a, h, F).
struct Lv2Quadrature {
  const EcologyParams& p;
  double r;
  void operator()(const State<4>& x, State<4>& dx, double) const {
    const double nA = x(0), na = x(1);
    dx(0) = (p.f_A - p.D_A - p.C(0, 0) * nA - p.C(0, 1) * na) * nA;
    dx(1) = (p.f_a - p.D_a - p.C(1, 0) * nA - p.C(1, 1) * na) * na;
    const double gametes = p.f_A * nA + p.f_a * na;
    const double k = gametes > 0.0 ? r * p.f_A * p.f_a / gametes : 0.0;
    dx(2) = k * (nA + na);
    dx(3) = k * nA * std::exp(-x(2));
  }
};

// Four-type flow with (h, F): state (n_Ab1, n_Ab2, n_ab1, n_ab2, h, F).
struct Lv4Quadrature {
  const EcologyParams& p;
  double r;
  void operator()(const State<6>& x, State<6>& dx, double) const {
    const Vec4 n = x.head<4>();
    dx.head<4>() = lv4_rhs(p, r, n);
    const double nA = n(0) + n(1), na = n(2) + n(3);
    const double gametes = p.f_A * nA + p.f_a * na;
    const double k = gametes > 0.0 ? r * p.f_A * p.f_a / gametes : 0.0;
    dx(4) = k * (nA + na);
    dx(5) = k * nA * std::exp(-x(4));
  }
};

// Calls emit(t, x) at every grid time in (t_prev, t_now], or at t_now when
// no grid is requested.
template <typename Stepper, typename Emit>
void sample_step(const Stepper& stepper, double t_prev, double t_now, double t_end, double dt, double& next_sample,
                 Emit&& emit) {
  using X = std::decay_t<decltype(stepper.current_state())>;
  if (dt <= 0.0) {
    if (t_now <= t_end) emit(t_now, stepper.current_state());
    return;
  }
  (void)t_prev;
  X x;
  while (next_sample <= std::min(t_now, t_end)) {
    stepper.calc_state(next_sample, x);
    emit(next_sample, x);
    next_sample += dt;
  }
}

void require_positive_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("t_end > 0");
}

}  // namespace

ChangeVarState to_change_vars(const Vec4& n) {
  if (!(n.array() > 0.0).all()) throw ParameterError("change of variables needs all four densities > 0");
  ChangeVarState c;
  c.n_A = n(0) + n(1);
  c.n_a = n(2) + n(3);
  c.p_ab1 = n(2) / c.n_a;
  c.g = n(0) / c.n_A - c.p_ab1;
  return c;
}

Vec4 from_change_vars(const ChangeVarState& c) {
  const double p_A = c.g + c.p_ab1;
  return Vec4(p_A * c.n_A, (1.0 - p_A) * c.n_A, c.p_ab1 * c.n_a, (1.0 - c.p_ab1) * c.n_a);
}

ChangeVarState change_var_rhs(const EcologyParams& p, double r, const ChangeVarState& c) {
  const double gametes = p.f_A * c.n_A + p.f_a * c.n_a;
  const double k = r * p.f_A * p.f_a / gametes;
  ChangeVarState d;
  d.n_A = (p.f_A - (p.D_A + p.C(0, 0) * c.n_A + p.C(0, 1) * c.n_a)) * c.n_A;
  d.n_a = (p.f_a - (p.D_a + p.C(1, 0) * c.n_A + p.C(1, 1) * c.n_a)) * c.n_a;
  d.g = -c.g * k * (c.n_A + c.n_a);
  d.p_ab1 = c.g * k * c.n_A;
  return d;
}

Vec4 lv4_rhs(const EcologyParams& params, double r, const Vec4& n) {
  return birth_rate_vector(params, r, n) - death_rate_vector(params, 1.0, n);
}

std::vector<Lv2Point> integrate_lv2(const EcologyParams& params, double z_A, double z_a, double t_end,
                                    const OdeOptions& opts) {
  params.validate();
  if (!(z_A >= 0.0) || !(z_a >= 0.0)) throw ParameterError("z_A, z_a >= 0");
  require_positive_time(t_end);
  std::vector<Lv2Point> out{{0.0, z_A, z_a}};
  double next_sample = opts.sample_dt > 0.0 ? opts.sample_dt : 0.0;
  const Lv2Quadrature sys{params, 0.0};
  drive<4>(sys, State<4>(z_A, z_a, 0.0, 0.0), t_end, 2, opts, [&](const auto& st, double t0, double t1) {
    sample_step(st, t0, t1, t_end, opts.sample_dt, next_sample,
                [&](double t, const State<4>& x) { out.push_back({t, std::max(0.0, x(0)), std::max(0.0, x(1))}); });
    if (t1 >= t_end) {
      if (out.back().t < t_end) {
        State<4> x;
        st.calc_state(t_end, x);
        out.push_back({t_end, std::max(0.0, x(0)), std::max(0.0, x(1))});
      }
      return false;
    }
    return true;
  });
  return out;
}

std::vector<Lv4Point> integrate_lv4(const EcologyParams& params, double r, const DenseState& z, double t_end,
                                    const OdeOptions& opts) {
  params.validate();
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("r in [0, 1]");
  if (!(z.n.array() >= 0.0).all() || !(z.n_A() + z.n_a() > 0.0)) throw ParameterError("z >= 0 and z_A + z_a > 0");
  require_positive_time(t_end);
  auto to_dense = [](double t, const State<6>& x) {
    Lv4Point p;
    p.t = t;
    p.state.n = x.head<4>().cwiseMax(0.0);
    p.state.h = x(4);
    p.state.F = x(5);
    return p;
  };
  State<6> x0;
  x0 << z.n, z.h, z.F;
  std::vector<Lv4Point> out{to_dense(0.0, x0)};
  double next_sample = opts.sample_dt > 0.0 ? opts.sample_dt : 0.0;
  const Lv4Quadrature sys{params, r};
  drive<6>(sys, x0, t_end, 4, opts, [&](const auto& st, double t0, double t1) {
    sample_step(st, t0, t1, t_end, opts.sample_dt, next_sample,
                [&](double t, const State<6>& x) { out.push_back(to_dense(t, x)); });
    if (t1 >= t_end) {
      if (out.back().t < t_end) {
        State<6> x;
        st.calc_state(t_end, x);
        out.push_back(to_dense(t_end, x));
      }
      return false;
    }
    return true;
  });
  return out;
}

double compute_F(const EcologyParams& params, double r, const Vec4& z, double t, const OdeOptions& opts) {
  params.validate();
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("r in [0, 1]");
  const double z_A = z(0) + z(1), z_a = z(2) + z(3);
  if (!(z.array() >= 0.0).all() || !(z_A + z_a > 0.0)) throw ParameterError("z >= 0 and z_A + z_a > 0");
  if (!(t >= 0.0)) throw ParameterError("t >= 0");
  if (t == 0.0 || r == 0.0) return 0.0;
  double value = 0.0;
  drive<4>(Lv2Quadrature{params, r}, State<4>(z_A, z_a, 0.0, 0.0), t, 2, opts,
           [&](const auto& st, double, double t1) {
             if (t1 >= t) {
               State<4> x;
               st.calc_state(t, x);
               value = x(3);
               return false;
             }
             return true;
           });
  return std::clamp(value, 0.0, 1.0);
}

double max_relaxation_eps(const EcologyParams& params) {
  const DerivedEcology e = derived_ecology(params);
  const double inf = std::numeric_limits<double>::infinity();
  const double a = params.C(1, 0) > 0.0 ? params.C(1, 1) / params.C(1, 0) : inf;
  const double b = params.C(0, 1) > 0.0 ? 2.0 * std::abs(e.S_Aa) / params.C(0, 1) : inf;
  return std::min(a, b);
}

namespace {

void require_relaxation_inputs(const EcologyParams& params, double z_a, double eps) {
  const DerivedEcology e = derived_ecology(params);
  if (!e.assumption1_ok) throw RegimeError("Assumption 1 (nbar_A > 0, nbar_a > 0, S_Aa < 0 < S_aA) does not hold");
  if (!(z_a > 0.0)) throw ParameterError("z_a > 0");
  if (!(eps > 0.0) || eps > max_relaxation_eps(params))
    throw ParameterError("eps <= C_aa / C_aA and eps <= 2 |S_Aa| / C_Aa (max " + format_double(max_relaxation_eps(params)) +
                         ")");
}

}  // namespace

RelaxationTime relaxation_time(const EcologyParams& params, const Vec4& z, double eps, double time_cap) {
  params.validate();
  const double z_A = z(0) + z(1), z_a = z(2) + z(3);
  require_relaxation_inputs(params, z_a, eps);
  const DerivedEcology e = derived_ecology(params);
  const double window = 10.0 / std::abs(e.S_Aa);
  const double a_max = 0.5 * eps * eps;
  const double a_min = e.nbar_a - 0.5 * eps;
  auto inside = [&](const State<4>& x) { return x(0) <= a_max && x(1) >= a_min; };

  const State<4> x0(z_A, z_a, 0.0, 0.0);
  bool in = inside(x0);
  double entry = in ? 0.0 : -1.0;
  bool done = false;
  constexpr int kProbes = 8;
  drive<4>(Lv2Quadrature{params, 0.0}, x0, time_cap, 2, OdeOptions{}, [&](const auto& st, double t0, double t1) {
    State<4> x;
    for (int k = 1; k <= kProbes; ++k) {
      const double t = t0 + (t1 - t0) * k / kProbes;
      st.calc_state(t, x);
      const bool now = inside(x);
      if (now && !in) {
        // Refine the entry time by bisection on the dense output.
        double lo = t0 + (t1 - t0) * (k - 1) / kProbes, hi = t;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          st.calc_state(mid, x);
          (inside(x) ? hi : lo) = mid;
        }
        entry = hi;
      }
      if (!now) entry = -1.0;
      in = now;
    }
    if (in && entry >= 0.0 && t1 - entry >= window) {
      done = true;
      return false;
    }
    return true;
  });
  if (!done) throw NumericalError("relaxation target set not reached and held before t = " + format_double(time_cap));
  return {entry, window};
}

FLimit compute_F_limit(const EcologyParams& params, double r, const Vec4& z, double tol, double time_cap) {
  params.validate();
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("r in [0, 1]");
  if (!(tol > 0.0)) throw ParameterError("tol > 0");
  const double z_A = z(0) + z(1), z_a = z(2) + z(3);
  if (!(z.array() >= 0.0).all()) throw ParameterError("z >= 0");
  const DerivedEcology e = derived_ecology(params);
  FLimit out;
  if (r == 0.0 || z_A == 0.0) return out;  // F vanishes identically
  if (!e.assumption1_ok) throw RegimeError("Assumption 1 (nbar_A > 0, nbar_a > 0, S_Aa < 0 < S_aA) does not hold");
  if (!(z_a > 0.0)) throw ParameterError("z_a > 0");

  // Inside the target set, n_A decays at least at rate |S_Aa| / 2 once
  // eps <= |S_Aa| / C_Aa, and n_a stays above nbar_a - eps / 2.
  const double inf = std::numeric_limits<double>::infinity();
  const double eps = std::min({0.1, max_relaxation_eps(params),
                               params.C(0, 1) > 0.0 ? std::abs(e.S_Aa) / params.C(0, 1) : inf, e.nbar_a / 2.0});
  out.eps = eps;
  const double a_max = 0.5 * eps * eps;
  const double a_min = e.nbar_a - 0.5 * eps;
  const double bound_coef = 2.0 * r * params.f_A / ((e.nbar_a - 0.5 * eps) * std::abs(e.S_Aa));
  out.tail_bound = inf;
  bool done = false;
  drive<4>(Lv2Quadrature{params, r}, State<4>(z_A, z_a, 0.0, 0.0), time_cap, 2, OdeOptions{},
           [&](const auto& st, double, double t1) {
             const auto& x = st.current_state();
             out.t_stop = t1;
             out.value = x(3);
             if (x(0) <= a_max && x(1) >= a_min) {
               out.tail_bound = bound_coef * std::max(0.0, x(0));
               if (out.tail_bound < tol) {
                 done = true;
                 return false;
               }
             }
             return true;
           });
  if (!done)
    throw NumericalError("F(z, r) tail bound " + format_double(out.tail_bound) + " still above tol " + format_double(tol) +
                         " at time cap " + format_double(time_cap));
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

void write_dense_csv(std::ostream& os, const std::vector<Lv4Point>& trajectory) {
  os << "t,n_Ab1,n_Ab2,n_ab1,n_ab2,h,F\n";
  for (const auto& p : trajectory) {
    os << format_double(p.t);
    for (int i = 0; i < 4; ++i) os << ',' << format_double(p.state.n(i));
    os << ',' << format_double(p.state.h) << ',' << format_double(p.state.F) << '\n';
  }
}

}  // namespace sweep
