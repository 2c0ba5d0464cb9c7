#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cones.hpp"
#include "rings.hpp"

namespace laurent::series {

using cones::Box;
using cones::ConeEnvelope;
using cones::Exponent;
using rings::RingPtr;
using rings::Value;

using CoeffMap = std::map<Exponent, Value, cones::LexLess>;

/// Truncated iterated Laurent series: a finite coefficient map plus a sound
/// support envelope and a certified guarantee box. Coefficients are exact
/// within K(guarantee); queries outside are refused. `exact` means the map
/// is the entire support and the box is the +infinity surrogate.
struct Series {
  int nvars = 0;
  RingPtr ring;
  CoeffMap coeffs;
  ConeEnvelope envelope;
  Box guarantee;
  bool exact = true;
  /// Per-connected-factor certified valuations, when a support argument
  /// (rather than the stored terms) proves them: the coefficient at nu is a
  /// unit and everything lex-below nu is nilpotent. Set by substitution on
  /// inexact outputs; empty otherwise.
  std::vector<Exponent> certified_nu;
};

Series make_series(int n, const RingPtr& ring,
                   const std::vector<std::pair<Exponent, Value>>& monomials);
Series zero_series(int n, const RingPtr& ring);
Series one_series(int n, const RingPtr& ring);
Series monomial(int n, const RingPtr& ring, const Exponent& k, const Value& c);
/// t_i as a series (0-based i).
Series variable(int n, const RingPtr& ring, int i);

Series add(const Series& f, const Series& g);
Series sub(const Series& f, const Series& g);
Series negate(const Series& f);
Series scalar_mul(const Value& c, const Series& f);
Series mul(const Series& f, const Series& g);
/// f^e for e >= 0 by repeated multiplication.
Series pow_nonneg(const Series& f, long long e);

Value coefficient(const Series& f, const Exponent& k);
Series partial_derivative(const Series& f, int i);
/// Multiplication by t^v (exactness and certification shift along).
Series shift(const Series& f, const Exponent& v);
/// Restrict the guarantee box (drops stored coefficients outside it).
Series truncate(const Series& f, const Box& box);

/// Per-connected-factor projection/merge, aligned with connected_factors().
Series project_factor(const Series& f, int i);
Series merge_factors(const RingPtr& ring, const std::vector<Series>& parts);

bool is_zero(const Series& f);
/// Equality of certified data: stored maps agree on the meet of the two
/// guarantee boxes (zeros not stored).
bool agree_on_common_window(const Series& f, const Series& g);
/// Strict equality of exact series.
bool exact_equal(const Series& f, const Series& g);

struct FactorDecomposition {
  Exponent nu;
  Value leading_unit;    // in the connected factor ring
  Series nil_tail;       // support lex-below nu, nilpotent coefficients
  Series positive_part;  // support lex-positive (normalized by unit*t^nu)
};

/// f = leading_unit * t^nu * (1 + positive_part) + nil_tail per factor.
struct UnitDecomposition {
  std::vector<FactorDecomposition> factors;

  /// Valuation tuple, one exponent per connected factor.
  std::vector<Exponent> nu() const;
};

UnitDecomposition unit_decompose(const Series& f);
Series invert(const Series& f, const Box& target);

Value pairing(const Series& f, const Series& g, const Exponent& k);

/// A top form coefficient * dt1 ^ ... ^ dtn.
struct TopForm {
  Series coefficient;
};

Value residue(const TopForm& w);

/// Canonical text: terms lex-ascending, `O(box: ...)` suffix when inexact.
std::string to_string(const Series& f);
std::string term_name(int nvars, const Exponent& k);

}  // namespace laurent::series
