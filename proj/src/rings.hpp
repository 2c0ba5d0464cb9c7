#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace laurent::rings {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class RingKind { Integers, Rationals, Modular, NilpotentExt, Product };

class Ring;
using RingPtr = std::shared_ptr<const Ring>;

/// Descriptor of a concrete coefficient ring. Immutable; built through the
/// factory functions, which normalize the structure so that every factor of
/// a Product is connected:
///   - a composite non-prime-power modulus is split by CRT,
///   - a nilpotent extension of a product is pushed inside the product,
///   - nested products are flattened.
class Ring : public std::enable_shared_from_this<Ring> {
 public:
  static RingPtr integers();
  static RingPtr rationals();
  static RingPtr modular(const Int& modulus);
  static RingPtr nilpotent_ext(RingPtr base, std::string generator_name,
                               int order);
  static RingPtr product(std::vector<RingPtr> factors);

  RingKind kind() const { return kind_; }
  const Int& modulus() const { return modulus_; }
  const Int& modular_prime() const { return prime_; }
  const RingPtr& base() const { return base_; }
  const std::string& generator_name() const { return gen_name_; }
  int nilpotency_order() const { return nil_order_; }
  const std::vector<RingPtr>& factors() const { return factors_; }

  int connected_factor_count() const { return factor_count_; }
  bool is_trivial() const { return trivial_; }

  /// Flattened list of connected factors; `this` itself when connected.
  std::vector<RingPtr> connected_factors() const;

  bool same_as(const Ring& other) const;
  std::string name() const;

 private:
  Ring() = default;

  RingKind kind_ = RingKind::Integers;
  Int modulus_;                 // Modular: prime power p^r after normalization
  Int prime_;                   // Modular: p
  RingPtr base_;                // NilpotentExt
  std::string gen_name_;        // NilpotentExt
  int nil_order_ = 0;           // NilpotentExt: k with gen^k = 0
  std::vector<RingPtr> factors_;  // Product
  int factor_count_ = 1;
  bool trivial_ = false;
};

struct NilpotencyReport {
  bool nilpotent = false;
  int index = 0;  // smallest e with a^e = 0 when nilpotent
};

/// Element of a concrete ring in canonical form. Immutable value type.
class Value {
 public:
  Value() = default;

  static Value zero(const RingPtr& ring);
  static Value one(const RingPtr& ring);
  static Value from_int(const RingPtr& ring, const Int& n);
  static Value from_rational(const RingPtr& ring, const Rational& q);
  /// NilpotentExt element from base coefficients (gen^0, gen^1, ...).
  static Value ext(const RingPtr& ring, std::vector<Value> coeffs);
  /// Product element from per-factor components.
  static Value tuple(const RingPtr& ring, std::vector<Value> components);

  const RingPtr& ring() const { return ring_; }
  bool is_zero() const;
  bool is_one() const;

  Value add(const Value& other) const;
  Value sub(const Value& other) const;
  Value mul(const Value& other) const;
  Value neg() const;
  Value pow(long long e) const;  // e >= 0
  bool eq(const Value& other) const;

  bool is_unit() const;
  NilpotencyReport nilpotency() const;
  bool is_nilpotent() const { return nilpotency().nilpotent; }
  /// Multiplicative inverse; throws NotAUnit.
  Value invert_unit() const;
  bool is_zero_divisor() const;

  /// Component living in connected factor `i` (over the factor ring).
  Value project(int i) const;
  /// Inverse of project: assemble a Value from per-factor components.
  static Value merge(const RingPtr& ring, const std::vector<Value>& parts);

  const Int& int_payload() const { return int_; }
  const Rational& rational_payload() const { return rat_; }
  const std::vector<Value>& parts() const { return parts_; }

  std::string to_string() const;
  /// True when to_string needs parentheses inside a product of factors.
  bool is_composite_literal() const;

 private:
  void check_same_ring(const Value& other) const;

  RingPtr ring_;
  Int int_;                   // Integers payload; Modular residue in [0, m)
  Rational rat_;              // Rationals payload
  std::vector<Value> parts_;  // NilpotentExt coefficients / Product components
};

}  // namespace laurent::rings
