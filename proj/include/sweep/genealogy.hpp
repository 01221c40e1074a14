#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sweep/model.hpp"
#include "sweep/rng.hpp"
#include "sweep/ssa.hpp"
#include "sweep/stats.hpp"

namespace sweep {

// ---------------------------------------------------------------------------
// Closed-form per-birth probabilities

/// Probability that the lineages of two neutral alleles, sampled uniformly
/// among alpha1- and alpha2-individuals just after the birth of an
/// alpha1-individual from state (n_A, n_a), coalesce at that birth.
double coalescence_probability(const EcologyParams& params, double r_K, std::int64_t n_A, std::int64_t n_a,
                               Allele alpha1, Allele alpha2);

/// Probability that a uniformly chosen alpha-individual, just after the birth
/// of an alpha-individual from (n_A, n_a), is the newborn and underwent an
/// m-recombination (its neutral allele came from the other background).
double m_recombination_probability(const EcologyParams& params, double r_K, std::int64_t n_A, std::int64_t n_a,
                                   Allele alpha);

// ---------------------------------------------------------------------------
// Individual-based simulation with neutral-origin tags

enum class OriginKind {
  Founder,     ///< neutral lineage descends from the initial mutant without crossing backgrounds
  Resident,    ///< descends from an initial individual without crossing backgrounds
  Recombined,  ///< most recent background switch happened at `time`
};

struct Origin {
  OriginKind kind = OriginKind::Resident;
  double time = 0.0;
  Neutral allele = Neutral::b1;  ///< allele carried by the lineage at its origin
};

struct Individual {
  std::uint64_t id = 0;
  Allele selected = Allele::A;
  Neutral neutral = Neutral::b1;
  Origin origin;
  std::uint32_t m_recomb_count = 0;
  std::uint64_t neutral_parent = 0;  ///< id of the individual that gave the neutral allele
};

/// Individuals grouped by genotype, with O(1) uniform sampling and O(1)
/// swap-with-last removal. Ids are never reused.
class LineagePool {
 public:
  void add(Individual ind);
  Individual remove_at(int type, std::size_t index);
  const Individual& at(int type, std::size_t index) const { return pools_[type][index]; }
  std::size_t size(int type) const { return pools_[type].size(); }
  std::size_t size(Allele s) const { return size(type_index(s, Neutral::b1)) + size(type_index(s, Neutral::b2)); }
  /// i-th individual of background s, counting b1 then b2.
  const Individual& nth_of(Allele s, std::size_t i) const;
  PopState counts() const;
  std::uint64_t next_id() { return next_id_++; }
  const std::vector<Individual>& group(int type) const { return pools_[type]; }

 private:
  std::array<std::vector<Individual>, 4> pools_;
  std::uint64_t next_id_ = 0;
};

/// The two parents of a birth: the one giving the selected allele and the
/// one giving the neutral allele (identical without recombination).
struct ParentPair {
  const Individual* selected_parent = nullptr;
  const Individual* neutral_parent = nullptr;
  bool recombined = false;
};

/// Samples parents conditionally on the newborn genotype `type`, matching the
/// unconditional mechanism (two gametes drawn proportional to f, offspring
/// takes the selected locus from one and, with probability r, the neutral
/// locus from the other). `birth_rate` is b_type at the current state.
ParentPair sample_parents(const LineagePool& pool, const EcologyParams& params, double r, int type, double birth_rate,
                          Rng& rng);

struct BirthRecord {
  double t = 0.0;
  std::int64_t n_A = 0;  ///< before the birth
  std::int64_t n_a = 0;
  Allele newborn = Allele::A;
  bool recombined = false;
  bool m_recombination = false;
};

struct LineageSnapshot {
  double t = 0.0;
  std::int64_t n_a = 0;
  std::int64_t zero_mrec = 0;
  std::int64_t one_mrec = 0;
  std::int64_t multi_mrec = 0;
  std::int64_t b1 = 0;

  double frac(std::int64_t x) const { return n_a > 0 ? static_cast<double>(x) / static_cast<double>(n_a) : 0.0; }
  double frac_zero() const { return frac(zero_mrec); }
  double frac_one() const { return frac(one_mrec); }
  double frac_multi() const { return frac(multi_mrec); }
  double frac_b1() const { return frac(b1); }
};

struct TaggedConfig {
  double z_Ab1_frac = 0.5;
  std::optional<PopState> initial_state;  ///< default: hard-sweep start
  std::uint64_t seed = 0;
  std::int64_t max_events = 500'000'000;
  double epsilon = 0.1;
  bool run_to_extinction = true;
  std::function<void(const BirthRecord&)> on_birth;
};

struct TaggedOutcome {
  SweepOutcome outcome;                   ///< count-level outcome, same law as run_sweep
  std::optional<LineageSnapshot> at_eps;  ///< a-population at T_eps
  std::optional<LineageSnapshot> at_ext;  ///< a-population at T_ext on fixation
  std::int64_t births = 0;
  std::int64_t m_recombinations = 0;
};

/// Individual-based run. Events are drawn from the same stream as run_sweep
/// with the same seed, so the count projection matches it exactly; parent
/// choices use a separate derived stream.
TaggedOutcome run_tagged_sweep(const EcologyParams& params, const ScalingParams& scaling, const TaggedConfig& config);

std::vector<TaggedOutcome> run_tagged_batch(const EcologyParams& params, const ScalingParams& scaling,
                                            const TaggedConfig& base, std::int64_t n_replicates,
                                            std::uint64_t seed_base, unsigned workers = 1);

/// Rows replicate,fixed,frac_zero_mrec,frac_one_mrec,frac_multi_mrec,frac_b1_at_Teps.
void write_origin_csv(std::ostream& os, const std::vector<TaggedOutcome>& rows);

// ---------------------------------------------------------------------------
// Jump statistics of the mutant count before T_eps

/// Per-level counts on one path; vectors are indexed by k in [0, M].
struct JumpCounts {
  std::int64_t M = 0;
  std::vector<std::int64_t> U;  ///< upcrossings k -> k+1
  std::vector<std::int64_t> H;  ///< A-side jumps while N_a = k
  std::vector<std::int64_t> D;  ///< downcrossings k -> k-1
};

/// N_a after every event of a path, starting with N_a(0).
using MutantPath = std::vector<std::int32_t>;

JumpCounts jump_counts_from_path(const MutantPath& path, std::int64_t M);

/// Checks U_k >= 1, D_1 = 0 and D_k = U_{k-1} - 1 on a path absorbed at M.
/// Throws std::logic_error on violation.
void check_path_consistency(const JumpCounts& counts);

/// zeta_k: index of the last visit to k before the path ends (-1 if never).
std::vector<std::int64_t> last_visit_indices(const MutantPath& path, std::int64_t M);

/// Upcrossings k -> k+1 before and after the last visit to j.
struct SplitUpcrossings {
  std::vector<std::int64_t> before;  ///< U^(1)_{j,k}
  std::vector<std::int64_t> after;   ///< U^(2)_{j,k}
};
SplitUpcrossings split_upcrossings(const MutantPath& path, std::int64_t j, std::int64_t M);

/// Simulates one hard sweep up to T_eps and records N_a after every event.
/// Returns nullopt if N_a dies out (or the run is truncated) first.
std::optional<MutantPath> record_mutant_path(const EcologyParams& params, const ScalingParams& scaling,
                                             const SimConfig& config);

struct JumpStats {
  std::int64_t M = 0;
  std::int64_t n_attempted = 0;
  std::int64_t n_conditioned = 0;
  std::vector<double> mean_U;
  std::vector<double> mean_U2;
  std::vector<double> mean_H;
  std::vector<double> mean_D;
  std::vector<double> per_replicate_sum;  ///< sum_k U_k / (k + 1)
  double r_K = 0.0;
  double statistic = 0.0;  ///< r_K * mean of per_replicate_sum
  Interval statistic_ci;
  double target = 0.0;     ///< r_K f_a log K / S_aA
  double s_minus = 0.0;
};

/// Runs hard sweeps (attempt index order) until n_conditioned of them reach
/// floor(eps K), conditioning by rejection. Throws InsufficientSampleError
/// when fewer than 30 conditioned paths are found within max_attempts.
JumpStats jump_statistics(const EcologyParams& params, const ScalingParams& scaling, double eps,
                          std::int64_t n_conditioned, std::uint64_t seed_base, double z_Ab1_frac = 0.5,
                          unsigned workers = 1, std::int64_t max_attempts = 0);

}  // namespace sweep
