#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace laurent::cones {

/// Exponent vector (l1,...,ln). The lexicographical order weighs the FIRST
/// coordinate most (t1 is the outermost variable): (l1,...,ln) <= (l'1,...,l'n)
/// iff l1 < l'1, or l1 = l'1 and recursion on the last n-1 coordinates.
using Exponent = std::vector<long long>;

enum class Ordering { Less, Equal, Greater };

Ordering lex_compare(const Exponent& a, const Exponent& b);
bool lex_less(const Exponent& a, const Exponent& b);
/// k > (0,...,0) in lex order.
bool lex_positive(const Exponent& k);

Exponent exp_add(const Exponent& a, const Exponent& b);
Exponent exp_sub(const Exponent& a, const Exponent& b);
Exponent exp_neg(const Exponent& a);
Exponent exp_scale(long long c, const Exponent& a);
Exponent exp_zero(int n);
/// Unit vector e_i (0-based i).
Exponent exp_unit(int n, int i);
std::string exp_to_string(const Exponent& k);

struct LexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    return lex_less(a, b);
  }
};

// ---------------------------------------------------------------------------
// Guarantee boxes

/// Componentwise cutoff "infinity" surrogate for exact series.
inline constexpr long long kBoxInfinity = 1LL << 31;

/// Known region K(N) = { k : k_i <= N_i for all i }.
using Box = std::vector<long long>;

bool box_contains(const Box& box, const Exponent& k);
Box box_meet(const Box& a, const Box& b);
Box box_all(int n, long long bound);
bool box_is_surrogate(const Box& box);
std::string box_to_string(const Box& box);

// ---------------------------------------------------------------------------
// Cone envelopes

/// Finitely generated over-approximation of a series support:
/// { base + sum m_j * gen_j : m_j >= 0 }, all generators lex-positive.
struct ConeEnvelope {
  Exponent base;
  std::vector<Exponent> generators;

  int arity() const { return static_cast<int>(base.size()); }
};

/// Builds an envelope, dropping zero generators, deduplicating, and
/// rejecting lex-nonpositive generators.
ConeEnvelope make_envelope(Exponent base, std::vector<Exponent> generators);

/// Decides k in env by bounded recursive search over generator multiplicities.
bool envelope_member(const Exponent& k, const ConeEnvelope& env);

/// Minkowski-sum over-approximation: bases add, generator lists unite.
ConeEnvelope envelope_sum(const ConeEnvelope& a, const ConeEnvelope& b);

/// Union-style join: lex-min base, united generators plus the base offset.
ConeEnvelope envelope_join(const ConeEnvelope& a, const ConeEnvelope& b);

/// Smallest envelope containing the given points (used for exact series):
/// base at the lex-min point, generators the differences to the others.
ConeEnvelope envelope_of_points(int n, const std::vector<Exponent>& points);

// ---------------------------------------------------------------------------
// Exact enumeration over cones
//
// Both routines enumerate multiplicity vectors m >= 0 (optionally capped
// per generator) over lex-positive generators, stratified by the first
// nonzero coordinate of each generator; that coordinate is positive, which
// bounds the multiplicities level by level and makes the search exact and
// finite. `visit` returns true to stop early; the routine then returns true.

struct ConeSearchBudget {
  long long nodes = 20'000'000;
};

/// Solutions of  base + sum m_j gen_j == target  (componentwise equality).
bool enumerate_cone_equal(
    const Exponent& base, const std::vector<Exponent>& gens,
    const std::vector<long long>& caps, const Exponent& target,
    const std::function<bool(const std::vector<long long>&)>& visit,
    ConeSearchBudget budget = {});

/// Solutions of  base + sum m_j gen_j <= target  (componentwise).
/// All target components must be finite (below the box surrogate).
bool enumerate_cone_below(
    const Exponent& base, const std::vector<Exponent>& gens,
    const std::vector<long long>& caps, const Exponent& target,
    const std::function<bool(const std::vector<long long>&)>& visit,
    ConeSearchBudget budget = {});

/// Decides whether the envelope contains a point that is lex-below `bound`
/// and outside the known box: the obstruction to certifying a valuation on
/// an inexact series. Exact: lex-below-`bound` splits into regions with
/// equalities on a prefix and an upper bound on the next coordinate; within
/// a region, any generator supported only on later coordinates escapes the
/// box at will, otherwise the finitely many constrained solutions are
/// checked directly.
bool cone_has_unknown_below(const ConeEnvelope& env, const Box& known,
                            const Exponent& bound,
                            ConeSearchBudget budget = {});

// ---------------------------------------------------------------------------
// Integer matrices and the echelon criterion

struct IntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<long long> a;  // row-major

  IntMatrix() = default;
  IntMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}

  long long& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  long long at(int r, int c) const {
    return a[static_cast<size_t>(r) * cols + c];
  }
  Exponent column(int c) const;
  Exponent apply(const Exponent& l) const;  // M * l
  bool operator==(const IntMatrix& other) const = default;
  std::string to_string() const;
};

IntMatrix matrix_mul(const IntMatrix& a, const IntMatrix& b);
IntMatrix identity_matrix(int n);

/// Pivot structure of an M+ matrix: pivot rows p_1 < ... < p_n (1-based),
/// complementary rows q, leading entries x_{p_i,i}, the permutation sign of
/// (p_1..p_n, q_1..q_{m-n}) and d = prod x_{p_i,i}.
struct SignatureData {
  std::vector<int> pivot_rows;
  std::vector<int> complement_rows;
  std::vector<long long> leading;
  int sign = 1;
  long long d = 1;
};

/// Column echelon form with positive leading entries: the pivot of column i
/// is its first nonzero row, pivots strictly increase, leading entries are
/// positive. Exactly the matrices that strictly preserve lex order.
std::optional<SignatureData> is_echelon_positive(const IntMatrix& m);

/// Brute-force check that M*l > 0 for all lex-positive l in the box
/// [-bound, bound]^n; differential-testing counterpart of the echelon test.
bool order_preservation_oracle(const IntMatrix& m, long long bound);
/// First counterexample in the box, if any.
std::optional<Exponent> order_violation_witness(const IntMatrix& m,
                                                long long bound);

// ---------------------------------------------------------------------------
// Unknown-region certification

/// Query data for box certification against unknown contributions: points
/// T(a) + c where a ranges over a source-side cone but is only trusted
/// inside the box `a_known`, c over a target-side cone, and `transform`
/// (optional, identity when null) maps a into the target coordinates.
struct UnknownContribution {
  Exponent a_base;
  std::vector<Exponent> a_gens;
  Box a_known;
  const IntMatrix* transform = nullptr;
  Exponent c_base;
  std::vector<Exponent> c_gens;
};

/// First point T(a) + c <= candidate (componentwise) with a outside its
/// known box, if any.
std::optional<Exponent> unknown_witness(const UnknownContribution& u,
                                        const Box& candidate,
                                        ConeSearchBudget budget = {});

/// Largest certified sub-box of `candidate`: shrinks one coordinate past
/// each witness until none lands inside; throws EmptyGuarantee when no
/// coordinate can be shrunk without dropping below `floor_point`.
Box certify_box(const UnknownContribution& u, Box candidate,
                const Exponent& floor_point, ConeSearchBudget budget = {});

struct DetDiagReport {
  long long det = 1;
  bool diag_all_one = false;
};

/// Determinant and unit-diagonal test for a square M+ matrix (lower
/// triangular with positive diagonal); throws NotEchelon otherwise.
DetDiagReport matrix_det_and_diag_units(const IntMatrix& m);

}  // namespace laurent::cones
