#include "sweep/genealogy.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sweep/bdp.hpp"
#include "sweep/errors.hpp"
#include "sweep/format.hpp"
#include "sweep/parallel.hpp"

namespace sweep {

double coalescence_probability(const EcologyParams& params, double r_K, std::int64_t n_A, std::int64_t n_a,
                               Allele alpha1, Allele alpha2) {
  const double gametes = params.f_A * static_cast<double>(n_A) + params.f_a * static_cast<double>(n_a);
  const auto n_of = [&](Allele x) { return static_cast<double>(x == Allele::A ? n_A : n_a); };
  const double n1 = n_of(alpha1);
  const Allele bar = other(alpha1);
  if (alpha1 == alpha2) {
    if (n1 < 1.0) return 0.0;
    return 2.0 / (n1 * (n1 + 1.0)) * (1.0 - r_K * params.f(bar) * n_of(bar) / gametes);
  }
  return r_K * params.f(bar) / ((n1 + 1.0) * gametes);
}

double m_recombination_probability(const EcologyParams& params, double r_K, std::int64_t n_A, std::int64_t n_a,
                                   Allele alpha) {
  const double n_bar = static_cast<double>(alpha == Allele::A ? n_a : n_A);
  return n_bar * coalescence_probability(params, r_K, n_A, n_a, alpha, other(alpha));
}

// ---------------------------------------------------------------------------

void LineagePool::add(Individual ind) {
  pools_[type_index(ind.selected, ind.neutral)].push_back(ind);
}

Individual LineagePool::remove_at(int type, std::size_t index) {
  auto& v = pools_[type];
  Individual out = v[index];
  v[index] = v.back();
  v.pop_back();
  return out;
}

const Individual& LineagePool::nth_of(Allele s, std::size_t i) const {
  const int t1 = type_index(s, Neutral::b1);
  if (i < pools_[t1].size()) return pools_[t1][i];
  return pools_[t1 + 1][i - pools_[t1].size()];
}

PopState LineagePool::counts() const {
  PopState s;
  for (int t = 0; t < 4; ++t) s[t] = static_cast<std::int64_t>(pools_[t].size());
  return s;
}

ParentPair sample_parents(const LineagePool& pool, const EcologyParams& params, double r, int type, double birth_rate,
                          Rng& rng) {
  const Allele s = selected_of(type);
  const Neutral b = neutral_of(type);
  if (!(birth_rate > 0.0)) throw std::logic_error("sample_parents called for a zero-rate birth");
  const double clonal = (1.0 - r) * params.f(s) * static_cast<double>(pool.size(type)) / birth_rate;
  ParentPair pp;
  if (r == 0.0 || rng.uniform() < clonal) {
    const Individual& p = pool.at(type, rng.below(pool.size(type)));
    pp.selected_parent = &p;
    pp.neutral_parent = &p;
    return pp;
  }
  pp.recombined = true;
  pp.selected_parent = &pool.nth_of(s, rng.below(pool.size(s)));
  const int tA = type_index(Allele::A, b);
  const int ta = type_index(Allele::a, b);
  const double wA = params.f_A * static_cast<double>(pool.size(tA));
  const double wa = params.f_a * static_cast<double>(pool.size(ta));
  const int donor = rng.uniform() * (wA + wa) < wA ? tA : ta;
  pp.neutral_parent = &pool.at(donor, rng.below(pool.size(donor)));
  return pp;
}

namespace {

LineageSnapshot snapshot_a(const LineagePool& pool, double t) {
  LineageSnapshot snap;
  snap.t = t;
  for (int type : {type_index(Allele::a, Neutral::b1), type_index(Allele::a, Neutral::b2)}) {
    for (const Individual& ind : pool.group(type)) {
      ++snap.n_a;
      if (ind.m_recomb_count == 0) ++snap.zero_mrec;
      else if (ind.m_recomb_count == 1) ++snap.one_mrec;
      else ++snap.multi_mrec;
      if (ind.neutral == Neutral::b1) ++snap.b1;
    }
  }
  return snap;
}

}  // namespace

TaggedOutcome run_tagged_sweep(const EcologyParams& params, const ScalingParams& scaling, const TaggedConfig& config) {
  params.validate();
  scaling.validate();
  const bool hard_start = !config.initial_state.has_value();
  const PopState initial = hard_start ? hard_sweep_initial(params, scaling.K, config.z_Ab1_frac) : *config.initial_state;

  LineagePool pool;
  for (int type = 0; type < 4; ++type) {
    for (std::int64_t i = 0; i < initial[type]; ++i) {
      Individual ind;
      ind.id = pool.next_id();
      ind.selected = selected_of(type);
      ind.neutral = neutral_of(type);
      ind.origin = {hard_start && ind.selected == Allele::a ? OriginKind::Founder : OriginKind::Resident, 0.0, ind.neutral};
      ind.neutral_parent = ind.id;
      pool.add(ind);
    }
  }

  SimConfig sim;
  sim.initial_state = initial;
  sim.seed = config.seed;
  sim.max_events = config.max_events;
  sim.epsilon = config.epsilon;
  sim.stop_at_eps_hit = !config.run_to_extinction;

  TaggedOutcome out;
  const std::int64_t threshold = mutant_threshold(scaling.K, config.epsilon);
  if (initial.n_a() == threshold) out.at_eps = snapshot_a(pool, 0.0);
  Rng picks(stream_seed(config.seed, 1));

  auto observer = [&](double t, const PopState& before, const PopState& after, int channel) {
    const int type = channel_type(channel);
    if (is_birth(channel)) {
      const Vec4 b = birth_rate_vector(params, scaling.r_K, before.as_vector());
      const ParentPair pp = sample_parents(pool, params, scaling.r_K, type, b(type), picks);
      const Individual& donor = *pp.neutral_parent;
      Individual child;
      child.id = pool.next_id();
      child.selected = selected_of(type);
      child.neutral = neutral_of(type);
      if (donor.neutral != child.neutral || pp.selected_parent->selected != child.selected)
        throw std::logic_error("parent sampling inconsistent with the newborn genotype");
      const bool m_rec = donor.selected != child.selected;
      child.m_recomb_count = donor.m_recomb_count + (m_rec ? 1u : 0u);
      child.origin = m_rec ? Origin{OriginKind::Recombined, t, donor.neutral} : donor.origin;
      child.neutral_parent = donor.id;
      if (child.origin.allele != child.neutral || (child.origin.kind == OriginKind::Founder && child.neutral != Neutral::b1))
        throw std::logic_error("origin tag does not determine the neutral allele");
      ++out.births;
      if (m_rec) ++out.m_recombinations;
      if (config.on_birth)
        config.on_birth({t, before.n_A(), before.n_a(), child.selected, pp.recombined, m_rec});
      pool.add(child);
    } else {
      pool.remove_at(type, picks.below(pool.size(type)));
    }
    if (!(pool.counts() == after)) throw std::logic_error("lineage pools diverged from the count process");
    if (!out.at_eps && after.n_a() == threshold) out.at_eps = snapshot_a(pool, t);
    return true;
  };

  out.outcome = run_sweep_observed(params, scaling, sim, observer).outcome;
  if (out.outcome.fixed) out.at_ext = snapshot_a(pool, *out.outcome.t_ext);
  return out;
}

std::vector<TaggedOutcome> run_tagged_batch(const EcologyParams& params, const ScalingParams& scaling,
                                            const TaggedConfig& base, std::int64_t n_replicates,
                                            std::uint64_t seed_base, unsigned workers) {
  if (n_replicates < 1) throw ParameterError("n_replicates >= 1");
  std::vector<TaggedOutcome> out(static_cast<std::size_t>(n_replicates));
  parallel_for_index(out.size(), workers, [&](std::size_t i) {
    TaggedConfig cfg = base;
    cfg.on_birth = nullptr;
    cfg.seed = replicate_seed(seed_base, i);
    out[i] = run_tagged_sweep(params, scaling, cfg);
  });
  return out;
}

void write_origin_csv(std::ostream& os, const std::vector<TaggedOutcome>& rows) {
  os << "replicate,fixed,frac_zero_mrec,frac_one_mrec,frac_multi_mrec,frac_b1_at_Teps\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << i << ',' << (r.outcome.fixed ? 1 : 0);
    if (r.at_eps) {
      os << ',' << format_double(r.at_eps->frac_zero()) << ',' << format_double(r.at_eps->frac_one()) << ','
         << format_double(r.at_eps->frac_multi()) << ',' << format_double(r.at_eps->frac_b1()) << '\n';
    } else {
      os << ",nan,nan,nan,nan\n";
    }
  }
}

// ---------------------------------------------------------------------------

JumpCounts jump_counts_from_path(const MutantPath& path, std::int64_t M) {
  JumpCounts c;
  c.M = M;
  const auto size = static_cast<std::size_t>(M + 1);
  c.U.assign(size, 0);
  c.H.assign(size, 0);
  c.D.assign(size, 0);
  for (std::size_t m = 0; m + 1 < path.size(); ++m) {
    const std::int64_t k = path[m], next = path[m + 1];
    if (k < 0 || k > M) throw std::out_of_range("mutant path leaves [0, M]");
    if (next == k + 1) ++c.U[static_cast<std::size_t>(k)];
    else if (next == k - 1) ++c.D[static_cast<std::size_t>(k)];
    else if (next == k) ++c.H[static_cast<std::size_t>(k)];
    else throw std::logic_error("mutant path jumps by more than one");
  }
  return c;
}

void check_path_consistency(const JumpCounts& c) {
  if (c.D[1] != 0) throw std::logic_error("D_1 != 0 on a path absorbed at M");
  for (std::int64_t k = 1; k < c.M; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (c.U[i] < 1) throw std::logic_error("U_" + std::to_string(k) + " < 1");
    if (k >= 2 && c.D[i] != c.U[i - 1] - 1) throw std::logic_error("D_k != U_{k-1} - 1 at k = " + std::to_string(k));
  }
}

std::vector<std::int64_t> last_visit_indices(const MutantPath& path, std::int64_t M) {
  std::vector<std::int64_t> zeta(static_cast<std::size_t>(M + 1), -1);
  for (std::size_t m = 0; m < path.size(); ++m) {
    if (path[m] >= 0 && path[m] <= M) zeta[static_cast<std::size_t>(path[m])] = static_cast<std::int64_t>(m);
  }
  return zeta;
}

SplitUpcrossings split_upcrossings(const MutantPath& path, std::int64_t j, std::int64_t M) {
  const auto zeta = last_visit_indices(path, M);
  const std::int64_t cut = zeta.at(static_cast<std::size_t>(j));
  if (cut < 0) throw std::invalid_argument("level j is never visited");
  SplitUpcrossings s;
  s.before.assign(static_cast<std::size_t>(M + 1), 0);
  s.after.assign(static_cast<std::size_t>(M + 1), 0);
  for (std::size_t m = 0; m + 1 < path.size(); ++m) {
    if (path[m + 1] != path[m] + 1) continue;
    auto& dest = static_cast<std::int64_t>(m) < cut ? s.before : s.after;
    ++dest[static_cast<std::size_t>(path[m])];
  }
  return s;
}

std::optional<MutantPath> record_mutant_path(const EcologyParams& params, const ScalingParams& scaling,
                                             const SimConfig& config) {
  SimConfig cfg = config;
  cfg.stop_at_eps_hit = true;
  cfg.record_mode = RecordMode::OutcomeOnly;
  MutantPath path{static_cast<std::int32_t>(cfg.initial_state.n_a())};
  const auto run = run_sweep_observed(params, scaling, cfg, [&](double, const PopState&, const PopState& after, int) {
    path.push_back(static_cast<std::int32_t>(after.n_a()));
    return true;
  });
  if (run.outcome.status != SweepStatus::EpsHit) return std::nullopt;
  return path;
}

JumpStats jump_statistics(const EcologyParams& params, const ScalingParams& scaling, double eps,
                          std::int64_t n_conditioned, std::uint64_t seed_base, double z_Ab1_frac, unsigned workers,
                          std::int64_t max_attempts) {
  params.validate();
  scaling.validate();
  const DerivedEcology e = derived_ecology(params);
  if (!e.assumption1_ok) throw RegimeError("Assumption 1 (nbar_A > 0, nbar_a > 0, S_Aa < 0 < S_aA) does not hold");
  if (n_conditioned < 1) throw ParameterError("n_conditioned >= 1");
  const std::int64_t M = mutant_threshold(scaling.K, eps);
  if (M < 2) throw ParameterError("floor(eps K) >= 2");
  if (max_attempts <= 0) max_attempts = 20 * n_conditioned;

  JumpStats st;
  st.M = M;
  st.r_K = scaling.r_K;
  st.s_minus = coupling_rates(params, eps).s_minus;
  st.target = scaling.r_K * params.f_a * std::log(static_cast<double>(scaling.K)) / e.S_aA;
  const auto size = static_cast<std::size_t>(M + 1);
  st.mean_U.assign(size, 0.0);
  st.mean_U2.assign(size, 0.0);
  st.mean_H.assign(size, 0.0);
  st.mean_D.assign(size, 0.0);

  const PopState initial = hard_sweep_initial(params, scaling.K, z_Ab1_frac);
  const std::int64_t batch = std::max<std::int64_t>(n_conditioned, 64);
  std::int64_t next_attempt = 0;
  while (st.n_conditioned < n_conditioned && next_attempt < max_attempts) {
    const std::int64_t count = std::min(batch, max_attempts - next_attempt);
    std::vector<std::optional<JumpCounts>> results(static_cast<std::size_t>(count));
    parallel_for_index(results.size(), workers, [&](std::size_t i) {
      SimConfig cfg;
      cfg.initial_state = initial;
      cfg.seed = replicate_seed(seed_base, static_cast<std::uint64_t>(next_attempt) + i);
      cfg.epsilon = eps;
      if (auto path = record_mutant_path(params, scaling, cfg)) {
        JumpCounts c = jump_counts_from_path(*path, M);
        check_path_consistency(c);
        results[i] = std::move(c);
      }
    });
    for (auto& r : results) {
      ++st.n_attempted;
      if (!r) continue;
      double sum = 0.0;
      for (std::size_t k = 1; k < static_cast<std::size_t>(M); ++k) {
        const auto u = static_cast<double>(r->U[k]);
        sum += u / static_cast<double>(k + 1);
        st.mean_U[k] += u;
        st.mean_U2[k] += u * u;
        st.mean_H[k] += static_cast<double>(r->H[k]);
        st.mean_D[k] += static_cast<double>(r->D[k]);
      }
      st.per_replicate_sum.push_back(sum);
      if (++st.n_conditioned == n_conditioned) break;
    }
    next_attempt += count;
  }
  if (st.n_conditioned < 30)
    throw InsufficientSampleError("only " + std::to_string(st.n_conditioned) + " conditioned paths (need >= 30)");
  const auto n = static_cast<double>(st.n_conditioned);
  for (std::size_t k = 0; k < size; ++k) {
    st.mean_U[k] /= n;
    st.mean_U2[k] /= n;
    st.mean_H[k] /= n;
    st.mean_D[k] /= n;
  }
  st.statistic = scaling.r_K * mean(st.per_replicate_sum);
  const Interval ci = bootstrap_mean_ci(st.per_replicate_sum, stream_seed(seed_base, 7));
  st.statistic_ci = {scaling.r_K * ci.lo, scaling.r_K * ci.hi};
  return st;
}

}  // namespace sweep
