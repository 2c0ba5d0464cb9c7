#include "rings.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace laurent::rings {

namespace {

// Trial division; moduli in this engine are desk-scale.
std::map<Int, int> factorize(Int n) {
  std::map<Int, int> out;
  for (Int p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      ++out[p];
      n /= p;
    }
  }
  if (n > 1) ++out[n];
  return out;
}

Int mod_inverse(const Int& a, const Int& m) {
  // extended Euclid
  Int old_r = a, r = m, old_s = 1, s = 0;
  while (r != 0) {
    Int q = old_r / r;
    Int tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
  }
  if (old_r != 1 && old_r != -1) fail(Errc::NotAUnit, "not invertible mod m");
  if (old_r == -1) old_s = -old_s;
  Int inv = old_s % m;
  if (inv < 0) inv += m;
  return inv;
}

}  // namespace

RingPtr Ring::integers() {
  static RingPtr r = [] {
    auto p = std::shared_ptr<Ring>(new Ring());
    p->kind_ = RingKind::Integers;
    return RingPtr(p);
  }();
  return r;
}

RingPtr Ring::rationals() {
  static RingPtr r = [] {
    auto p = std::shared_ptr<Ring>(new Ring());
    p->kind_ = RingKind::Rationals;
    return RingPtr(p);
  }();
  return r;
}

RingPtr Ring::modular(const Int& modulus) {
  if (modulus < 2) fail(Errc::TypeError, "modulus must be >= 2");
  auto fs = factorize(modulus);
  if (fs.size() == 1) {
    auto p = std::shared_ptr<Ring>(new Ring());
    p->kind_ = RingKind::Modular;
    p->modulus_ = modulus;
    p->prime_ = fs.begin()->first;
    return p;
  }
  // CRT split into prime-power factors
  std::vector<RingPtr> factors;
  for (const auto& [p, e] : fs) {
    Int pe = 1;
    for (int i = 0; i < e; ++i) pe *= p;
    factors.push_back(modular(pe));
  }
  return product(std::move(factors));
}

RingPtr Ring::nilpotent_ext(RingPtr base, std::string generator_name,
                            int order) {
  if (order < 2) fail(Errc::TypeError, "nilpotency order must be >= 2");
  if (base->kind() == RingKind::Product) {
    std::vector<RingPtr> factors;
    for (const auto& f : base->factors())
      factors.push_back(nilpotent_ext(f, generator_name, order));
    return product(std::move(factors));
  }
  auto p = std::shared_ptr<Ring>(new Ring());
  p->kind_ = RingKind::NilpotentExt;
  p->base_ = std::move(base);
  p->gen_name_ = std::move(generator_name);
  p->nil_order_ = order;
  return p;
}

RingPtr Ring::product(std::vector<RingPtr> factors) {
  std::vector<RingPtr> flat;
  for (auto& f : factors) {
    if (f->kind() == RingKind::Product)
      flat.insert(flat.end(), f->factors().begin(), f->factors().end());
    else
      flat.push_back(f);
  }
  if (flat.empty()) fail(Errc::TypeError, "empty ring product");
  if (flat.size() == 1) return flat[0];
  auto p = std::shared_ptr<Ring>(new Ring());
  p->kind_ = RingKind::Product;
  p->factors_ = std::move(flat);
  p->factor_count_ = 0;
  for (const auto& f : p->factors_)
    p->factor_count_ += f->connected_factor_count();
  return p;
}

std::vector<RingPtr> Ring::connected_factors() const {
  if (kind_ == RingKind::Product) return factors_;
  return {shared_from_this()};
}

bool Ring::same_as(const Ring& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case RingKind::Integers:
    case RingKind::Rationals:
      return true;
    case RingKind::Modular:
      return modulus_ == other.modulus_;
    case RingKind::NilpotentExt:
      return nil_order_ == other.nil_order_ && gen_name_ == other.gen_name_ &&
             base_->same_as(*other.base_);
    case RingKind::Product: {
      if (factors_.size() != other.factors_.size()) return false;
      for (size_t i = 0; i < factors_.size(); ++i)
        if (!factors_[i]->same_as(*other.factors_[i])) return false;
      return true;
    }
  }
  return false;
}

std::string Ring::name() const {
  switch (kind_) {
    case RingKind::Integers: return "Z";
    case RingKind::Rationals: return "Q";
    case RingKind::Modular: return "Z/" + modulus_.str();
    case RingKind::NilpotentExt:
      return base_->name() + "[" + gen_name_ + "]/(" + gen_name_ + "^" +
             std::to_string(nil_order_) + ")";
    case RingKind::Product: {
      std::string s;
      for (size_t i = 0; i < factors_.size(); ++i) {
        if (i) s += " * ";
        s += factors_[i]->name();
      }
      return s;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------

void Value::check_same_ring(const Value& other) const {
  if (!ring_ || !other.ring_ || !ring_->same_as(*other.ring_))
    fail(Errc::DescriptorMismatch, "operands live in different rings");
}

Value Value::zero(const RingPtr& ring) { return from_int(ring, 0); }
Value Value::one(const RingPtr& ring) { return from_int(ring, 1); }

Value Value::from_int(const RingPtr& ring, const Int& n) {
  Value v;
  v.ring_ = ring;
  switch (ring->kind()) {
    case RingKind::Integers:
      v.int_ = n;
      break;
    case RingKind::Rationals:
      v.rat_ = Rational(n);
      break;
    case RingKind::Modular: {
      Int r = n % ring->modulus();
      if (r < 0) r += ring->modulus();
      v.int_ = r;
      break;
    }
    case RingKind::NilpotentExt: {
      v.parts_.assign(ring->nilpotency_order(), zero(ring->base()));
      v.parts_[0] = from_int(ring->base(), n);
      break;
    }
    case RingKind::Product: {
      for (const auto& f : ring->factors()) v.parts_.push_back(from_int(f, n));
      break;
    }
  }
  return v;
}

Value Value::from_rational(const RingPtr& ring, const Rational& q) {
  if (denominator(q) == 1) return from_int(ring, numerator(q));
  if (ring->kind() == RingKind::Rationals) {
    Value v;
    v.ring_ = ring;
    v.rat_ = q;
    return v;
  }
  if (ring->kind() == RingKind::NilpotentExt || ring->kind() == RingKind::Product) {
    Value num = from_int(ring, numerator(q));
    Value den = from_int(ring, denominator(q));
    return num.mul(den.invert_unit());
  }
  fail(Errc::TypeError, "non-integral literal in ring " + ring->name());
}

Value Value::ext(const RingPtr& ring, std::vector<Value> coeffs) {
  if (ring->kind() != RingKind::NilpotentExt)
    fail(Errc::TypeError, "ext payload for non-extension ring");
  coeffs.resize(ring->nilpotency_order(), zero(ring->base()));
  Value v;
  v.ring_ = ring;
  v.parts_ = std::move(coeffs);
  return v;
}

Value Value::tuple(const RingPtr& ring, std::vector<Value> components) {
  if (ring->kind() != RingKind::Product)
    fail(Errc::TypeError, "tuple payload for non-product ring");
  if (components.size() != ring->factors().size())
    fail(Errc::TypeError, "component count mismatch");
  Value v;
  v.ring_ = ring;
  v.parts_ = std::move(components);
  return v;
}

bool Value::is_zero() const {
  switch (ring_->kind()) {
    case RingKind::Integers:
    case RingKind::Modular:
      return int_ == 0;
    case RingKind::Rationals:
      return rat_ == 0;
    case RingKind::NilpotentExt:
    case RingKind::Product:
      return std::all_of(parts_.begin(), parts_.end(),
                         [](const Value& p) { return p.is_zero(); });
  }
  return false;
}

bool Value::is_one() const { return eq(one(ring_)); }

Value Value::add(const Value& other) const {
  check_same_ring(other);
  Value v;
  v.ring_ = ring_;
  switch (ring_->kind()) {
    case RingKind::Integers:
      v.int_ = int_ + other.int_;
      break;
    case RingKind::Modular:
      v.int_ = (int_ + other.int_) % ring_->modulus();
      break;
    case RingKind::Rationals:
      v.rat_ = rat_ + other.rat_;
      break;
    case RingKind::NilpotentExt:
    case RingKind::Product:
      for (size_t i = 0; i < parts_.size(); ++i)
        v.parts_.push_back(parts_[i].add(other.parts_[i]));
      break;
  }
  return v;
}

Value Value::sub(const Value& other) const { return add(other.neg()); }

Value Value::neg() const {
  Value v;
  v.ring_ = ring_;
  switch (ring_->kind()) {
    case RingKind::Integers:
      v.int_ = -int_;
      break;
    case RingKind::Modular:
      v.int_ = int_ == 0 ? Int(0) : ring_->modulus() - int_;
      break;
    case RingKind::Rationals:
      v.rat_ = -rat_;
      break;
    case RingKind::NilpotentExt:
    case RingKind::Product:
      for (const auto& p : parts_) v.parts_.push_back(p.neg());
      break;
  }
  return v;
}

Value Value::mul(const Value& other) const {
  check_same_ring(other);
  Value v;
  v.ring_ = ring_;
  switch (ring_->kind()) {
    case RingKind::Integers:
      v.int_ = int_ * other.int_;
      break;
    case RingKind::Modular:
      v.int_ = (int_ * other.int_) % ring_->modulus();
      break;
    case RingKind::Rationals:
      v.rat_ = rat_ * other.rat_;
      break;
    case RingKind::NilpotentExt: {
      int k = ring_->nilpotency_order();
      v.parts_.assign(k, zero(ring_->base()));
      for (int i = 0; i < k; ++i) {
        if (parts_[i].is_zero()) continue;
        for (int j = 0; i + j < k; ++j)
          v.parts_[i + j] = v.parts_[i + j].add(parts_[i].mul(other.parts_[j]));
      }
      break;
    }
    case RingKind::Product:
      for (size_t i = 0; i < parts_.size(); ++i)
        v.parts_.push_back(parts_[i].mul(other.parts_[i]));
      break;
  }
  return v;
}

Value Value::pow(long long e) const {
  if (e < 0) fail(Errc::TypeError, "negative ring power");
  Value acc = one(ring_);
  Value base = *this;
  while (e > 0) {
    if (e & 1) acc = acc.mul(base);
    e >>= 1;
    if (e) base = base.mul(base);
  }
  return acc;
}

bool Value::eq(const Value& other) const {
  check_same_ring(other);
  switch (ring_->kind()) {
    case RingKind::Integers:
    case RingKind::Modular:
      return int_ == other.int_;
    case RingKind::Rationals:
      return rat_ == other.rat_;
    case RingKind::NilpotentExt:
    case RingKind::Product:
      for (size_t i = 0; i < parts_.size(); ++i)
        if (!parts_[i].eq(other.parts_[i])) return false;
      return true;
  }
  return false;
}

bool Value::is_unit() const {
  switch (ring_->kind()) {
    case RingKind::Integers:
      return int_ == 1 || int_ == -1;
    case RingKind::Rationals:
      return rat_ != 0;
    case RingKind::Modular:
      return int_ % ring_->modular_prime() != 0;
    case RingKind::NilpotentExt:
      return parts_[0].is_unit();
    case RingKind::Product:
      return std::all_of(parts_.begin(), parts_.end(),
                         [](const Value& p) { return p.is_unit(); });
  }
  return false;
}

NilpotencyReport Value::nilpotency() const {
  bool quick = false;
  switch (ring_->kind()) {
    case RingKind::Integers:
    case RingKind::Rationals:
      quick = is_zero();
      break;
    case RingKind::Modular:
      quick = int_ % ring_->modular_prime() == 0;
      break;
    case RingKind::NilpotentExt:
      quick = parts_[0].is_nilpotent();
      break;
    case RingKind::Product:
      quick = std::all_of(parts_.begin(), parts_.end(),
                          [](const Value& p) { return p.is_nilpotent(); });
      break;
  }
  if (!quick) return {};
  Value p = *this;
  int e = 1;
  while (!p.is_zero()) {
    p = p.mul(*this);
    ++e;
    if (e > 4096) fail(Errc::Internal, "nilpotency index search ran away");
  }
  return {true, e};
}

Value Value::invert_unit() const {
  switch (ring_->kind()) {
    case RingKind::Integers:
      if (int_ == 1 || int_ == -1) return *this;
      fail(Errc::NotAUnit, int_.str() + " has no inverse in Z");
    case RingKind::Rationals: {
      if (rat_ == 0) fail(Errc::NotAUnit, "0 has no inverse");
      Value v;
      v.ring_ = ring_;
      v.rat_ = 1 / rat_;
      return v;
    }
    case RingKind::Modular: {
      Value v;
      v.ring_ = ring_;
      v.int_ = mod_inverse(int_, ring_->modulus());
      return v;
    }
    case RingKind::NilpotentExt: {
      // a = a0 (1 + n) with n of zero constant term; truncated Neumann series.
      Value a0inv = parts_[0].invert_unit();
      Value a0inv_full = Value::ext(ring_, {a0inv});
      Value n = a0inv_full.mul(this->sub(Value::ext(ring_, {parts_[0]})));
      Value acc = one(ring_);
      Value term = one(ring_);
      for (int i = 1; i < ring_->nilpotency_order(); ++i) {
        term = term.mul(n).neg();
        acc = acc.add(term);
      }
      return a0inv_full.mul(acc);
    }
    case RingKind::Product: {
      std::vector<Value> comps;
      for (const auto& p : parts_) comps.push_back(p.invert_unit());
      return tuple(ring_, std::move(comps));
    }
  }
  fail(Errc::Internal, "unreachable");
}

bool Value::is_zero_divisor() const {
  switch (ring_->kind()) {
    case RingKind::Integers:
    case RingKind::Rationals:
      return is_zero();
    case RingKind::Modular:
      return int_ % ring_->modular_prime() == 0;
    case RingKind::NilpotentExt:
      return parts_[0].is_zero() || parts_[0].is_zero_divisor();
    case RingKind::Product:
      // Convention: a zero divisor in any factor (zero components included)
      // makes the whole element a zero divisor.
      return std::any_of(parts_.begin(), parts_.end(),
                         [](const Value& p) { return p.is_zero_divisor(); });
  }
  return false;
}

Value Value::project(int i) const {
  if (ring_->kind() == RingKind::Product) return parts_.at(i);
  if (i != 0) fail(Errc::Internal, "factor index out of range");
  return *this;
}

Value Value::merge(const RingPtr& ring, const std::vector<Value>& parts) {
  if (ring->kind() == RingKind::Product) return tuple(ring, parts);
  if (parts.size() != 1) fail(Errc::Internal, "merge arity mismatch");
  return parts[0];
}

std::string Value::to_string() const {
  switch (ring_->kind()) {
    case RingKind::Integers:
    case RingKind::Modular:
      return int_.str();
    case RingKind::Rationals: {
      if (denominator(rat_) == 1) return numerator(rat_).str();
      return numerator(rat_).str() + "/" + denominator(rat_).str();
    }
    case RingKind::NilpotentExt: {
      std::string out;
      const std::string& g = ring_->generator_name();
      for (size_t i = 0; i < parts_.size(); ++i) {
        if (parts_[i].is_zero()) continue;
        std::string term;
        if (i == 0) {
          term = parts_[i].to_string();
        } else {
          std::string c = parts_[i].to_string();
          std::string mono = i == 1 ? g : g + "^" + std::to_string(i);
          if (parts_[i].is_one())
            term = mono;
          else if (parts_[i].is_composite_literal())
            term = "(" + c + ")*" + mono;
          else
            term = c + "*" + mono;
        }
        if (!out.empty()) out += " + ";
        out += term;
      }
      return out.empty() ? "0" : out;
    }
    case RingKind::Product: {
      std::string out = "{";
      for (size_t i = 0; i < parts_.size(); ++i) {
        if (i) out += ", ";
        out += parts_[i].to_string();
      }
      return out + "}";
    }
  }
  return "?";
}

bool Value::is_composite_literal() const {
  switch (ring_->kind()) {
    case RingKind::Integers:
    case RingKind::Modular:
    case RingKind::Rationals:
      return false;
    case RingKind::NilpotentExt: {
      for (size_t i = 1; i < parts_.size(); ++i)
        if (!parts_[i].is_zero()) return true;
      return parts_[0].is_composite_literal();
    }
    case RingKind::Product:
      return false;  // braces already delimit
  }
  return false;
}

}  // namespace laurent::rings
