#pragma once

#include <random>
#include <string>
#include <vector>

#include "homs.hpp"

namespace laurent::verify {

using cones::Box;
using cones::Exponent;
using homs::ParamTuple;
using rings::RingPtr;
using rings::Value;
using series::Series;

enum class Status { Pass, Fail, SkippedPrecision };

struct CheckReport {
  std::string name;
  std::string instance;
  Status status = Status::Pass;
  std::string witness;  // first failing index and both values on fail
};

std::string status_name(Status s);
std::string report_line(const CheckReport& r);
bool all_passed(const std::vector<CheckReport>& reports);

/// Solves phi(psi) = id by fixed-point iteration on the normalized equation
/// psi_i = t_i * prod_{r>i} psi_r^{-Y_ri} * u_i(psi)^{-1}, starting from the
/// monomial tuple of Upsilon^{-1}. Requires a unit diagonal; shares no code
/// with the adjoint formula beyond series arithmetic.
ParamTuple oracle_compositional_inverse(const ParamTuple& phi,
                                        const Box& target);

/// f = sum_l res(f phi^{-l-1} J(phi) dt) phi^l, reconstructed via
/// adjoint_apply then substitute.
CheckReport check_identity(const Series& f, const ParamTuple& phi,
                           const Box& window);

/// One-variable formula for nu = 1:
/// sum_l [phi^{-l}]_0 phi^l = phi * (dphi/dt)^{-1} * t^{-1}.
CheckReport check_n1_formula(const Series& phi, const Box& window);

/// Generating series of constant terms of powers: for nu(F) = -1 over the
/// rationals, sum_{l>=1} [F^l]_0 t^l vanishes only for F = c t^{-1}.
CheckReport check_constant_term_series(const Series& f, const Box& window);

/// Catalogued injected bugs for mutation testing of the suites.
enum class Mutation { None, WedgeSignFlip, ResidueIndexOffByOne, DropNilTail };

struct SuiteConfig {
  unsigned long long seed = 20260823;
  int count = 25;  // instances per suite
  std::vector<RingPtr> rings;  // default_rings() when empty
  std::vector<int> arities{1, 2};
  long long window = 8;
  Mutation mutation = Mutation::None;
};

/// Z, Q, Z/4, Q[e]/(e^3).
std::vector<RingPtr> default_rings();

// Seeded instance generators (shared with the acceptance harness).
Value random_element(std::mt19937_64& rng, const RingPtr& ring);
Value random_unit(std::mt19937_64& rng, const RingPtr& ring);
/// Zero when the ring has no nonzero nilpotents.
Value random_nilpotent(std::mt19937_64& rng, const RingPtr& ring);
/// unit * t^w * (1 + up to 4 lex-positive terms) + up to 2 nilpotent
/// below-valuation terms; exponent entries bounded by 4.
Series random_invertible_series(std::mt19937_64& rng, int n,
                                const RingPtr& ring);
/// Valid tuple with unipotent lower-triangular Upsilon.
ParamTuple random_diag1_tuple(std::mt19937_64& rng, int n, const RingPtr& ring);
Series random_laurent_polynomial(std::mt19937_64& rng, int n,
                                 const RingPtr& ring);

std::vector<CheckReport> run_suite(const SuiteConfig& cfg);

}  // namespace laurent::verify
