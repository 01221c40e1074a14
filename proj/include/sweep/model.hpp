#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace sweep {

enum class Allele : int { A = 0, a = 1 };
enum class Neutral : int { b1 = 0, b2 = 1 };

constexpr Allele other(Allele x) { return x == Allele::A ? Allele::a : Allele::A; }
constexpr Neutral other(Neutral x) { return x == Neutral::b1 ? Neutral::b2 : Neutral::b1; }

/// Genotype index in the fixed order Ab1, Ab2, ab1, ab2 used by every
/// four-vector in the library.
constexpr int type_index(Allele s, Neutral b) { return 2 * static_cast<int>(s) + static_cast<int>(b); }
constexpr Allele selected_of(int type) { return type < 2 ? Allele::A : Allele::a; }
constexpr Neutral neutral_of(int type) { return (type & 1) == 0 ? Neutral::b1 : Neutral::b2; }

using Vec4 = Eigen::Matrix<double, 4, 1>;

/// Birth, intrinsic death and competition parameters. C(i, j) is the
/// competition felt by allele i from allele j, indices A = 0, a = 1.
struct EcologyParams {
  double f_A = 1.0;
  double f_a = 1.0;
  double D_A = 0.0;
  double D_a = 0.0;
  Eigen::Matrix2d C = Eigen::Matrix2d::Identity();

  double f(Allele x) const { return x == Allele::A ? f_A : f_a; }
  double D(Allele x) const { return x == Allele::A ? D_A : D_a; }
  double comp(Allele x, Allele y) const { return C(static_cast<int>(x), static_cast<int>(y)); }

  /// Throws ParameterError naming the first violated constraint.
  void validate() const;
};

struct ScalingParams {
  std::int64_t K = 1;
  double r_K = 0.0;

  void validate() const;
};

/// Integer counts of the four genotypes.
struct PopState {
  std::int64_t n_Ab1 = 0;
  std::int64_t n_Ab2 = 0;
  std::int64_t n_ab1 = 0;
  std::int64_t n_ab2 = 0;

  std::int64_t n_A() const { return n_Ab1 + n_Ab2; }
  std::int64_t n_a() const { return n_ab1 + n_ab2; }
  std::int64_t total() const { return n_A() + n_a(); }
  std::int64_t n(Allele x) const { return x == Allele::A ? n_A() : n_a(); }

  std::int64_t& operator[](int type);
  std::int64_t operator[](int type) const;

  Vec4 as_vector() const {
    return Vec4(static_cast<double>(n_Ab1), static_cast<double>(n_Ab2), static_cast<double>(n_ab1),
                static_cast<double>(n_ab2));
  }

  bool operator==(const PopState&) const = default;
};

struct DerivedEcology {
  double nbar_A = 0.0;
  double nbar_a = 0.0;
  double S_aA = 0.0;  ///< invasion fitness of a in an A-population at equilibrium
  double S_Aa = 0.0;  ///< invasion fitness of A in an a-population at equilibrium
  bool assumption1_ok = false;
};

// Rate kernels on any four-vector of counts or densities. With K = 1 and real
// densities these are the right-hand sides of the deterministic limits.

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 4, 1> death_rate_vector(const EcologyParams& p, double K,
                                                                 const Eigen::MatrixBase<Derived>& n) {
  using S = typename Derived::Scalar;
  const S nA = n(0) + n(1);
  const S na = n(2) + n(3);
  const S dA = p.D_A + (p.C(0, 0) * nA + p.C(0, 1) * na) / K;
  const S da = p.D_a + (p.C(1, 0) * nA + p.C(1, 1) * na) / K;
  return Eigen::Matrix<S, 4, 1>(dA * n(0), dA * n(1), da * n(2), da * n(3));
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 4, 1> birth_rate_vector(const EcologyParams& p, double r,
                                                                 const Eigen::MatrixBase<Derived>& n) {
  using S = typename Derived::Scalar;
  const S gametes = p.f_A * (n(0) + n(1)) + p.f_a * (n(2) + n(3));
  if (!(gametes > S(0))) return Eigen::Matrix<S, 4, 1>::Zero();
  // Every recombination term is +/- the same disequilibrium product.
  const S cross = r * p.f_A * p.f_a * (n(3) * n(0) - n(2) * n(1)) / gametes;
  Eigen::Matrix<S, 4, 1> b(p.f_A * n(0) - cross, p.f_A * n(1) + cross, p.f_a * n(2) + cross,
                           p.f_a * n(3) - cross);
  return b.cwiseMax(S(0));
}

/// Per-genotype death rates of the jump process.
Vec4 death_rates(const EcologyParams& params, const ScalingParams& scaling, const PopState& state);

/// Per-genotype birth rates of the jump process; all zero on the empty state.
Vec4 birth_rates(const EcologyParams& params, const ScalingParams& scaling, const PopState& state);

DerivedEcology derived_ecology(const EcologyParams& params);

/// Assumption 1 in its raw inequality form on (f, D, C), without going
/// through equilibria and invasion fitnesses.
bool assumption1_raw(const EcologyParams& params);

/// n_ab2 * n_Ab1 - n_ab1 * n_Ab2.
double linkage_disequilibrium(const PopState& state);

/// Bounds of the resident band I_eps^K (real endpoints; membership is for
/// integer N_A).
struct ResidentBand {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(std::int64_t n_A) const {
    const auto x = static_cast<double>(n_A);
    return x >= lo && x <= hi;
  }
};
ResidentBand resident_band(const EcologyParams& params, std::int64_t K, double eps);

/// floor(eps * K): the mutant threshold defining T_eps^K.
std::int64_t mutant_threshold(std::int64_t K, double eps);

/// Initial state of a hard sweep: resident at floor(nbar_A K) split by
/// z_Ab1_frac between b1 and b2, plus a single a b1 mutant.
PopState hard_sweep_initial(const EcologyParams& params, std::int64_t K, double z_Ab1_frac);

/// floor(z K) componentwise.
PopState scaled_initial(const Vec4& z, std::int64_t K);

}  // namespace sweep
