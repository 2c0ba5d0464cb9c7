#include "series.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace laurent::series {

using cones::box_contains;
using cones::box_is_surrogate;
using cones::box_meet;
using cones::ConeEnvelope;
using cones::envelope_join;
using cones::envelope_of_points;
using cones::envelope_sum;
using cones::exp_add;
using cones::exp_neg;
using cones::exp_scale;
using cones::exp_sub;
using cones::exp_to_string;
using cones::exp_unit;
using cones::exp_zero;
using cones::kBoxInfinity;
using cones::lex_compare;
using cones::lex_less;
using cones::Ordering;

namespace {

void check_compatible(const Series& f, const Series& g) {
  if (f.nvars != g.nvars) fail(Errc::ArityMismatch, "series arity differs");
  if (!f.ring->same_as(*g.ring))
    fail(Errc::DescriptorMismatch, "series rings differ");
}

Box surrogate_box(int n) { return cones::box_all(n, kBoxInfinity); }

long long add_clamped(long long a, long long b) {
  if (a >= kBoxInfinity || b >= kBoxInfinity) return kBoxInfinity;
  return a + b;
}

Box box_shift(const Box& box, const Exponent& v) {
  Box out(box.size());
  for (size_t i = 0; i < box.size(); ++i) out[i] = add_clamped(box[i], v[i]);
  return out;
}

void add_term(CoeffMap& m, const Exponent& k, const Value& v) {
  auto it = m.find(k);
  if (it == m.end()) {
    if (!v.is_zero()) m.emplace(k, v);
    return;
  }
  Value s = it->second.add(v);
  if (s.is_zero())
    m.erase(it);
  else
    it->second = s;
}

std::vector<Exponent> keys_of(const CoeffMap& m) {
  std::vector<Exponent> ks;
  ks.reserve(m.size());
  for (const auto& [k, v] : m) ks.push_back(k);
  return ks;
}

void restrict_to_box(CoeffMap& m, const Box& box) {
  for (auto it = m.begin(); it != m.end();) {
    if (!box_contains(box, it->first))
      it = m.erase(it);
    else
      ++it;
  }
}

bool all_generators_componentwise_nonneg(const ConeEnvelope& env) {
  for (const auto& g : env.generators)
    for (long long c : g)
      if (c < 0) return false;
  return true;
}

CoeffMap convolve(const Series& f, const Series& g,
                  const std::optional<Box>& window) {
  CoeffMap out;
  for (const auto& [p, a] : f.coeffs)
    for (const auto& [q, b] : g.coeffs) {
      Exponent k = exp_add(p, q);
      if (window && !box_contains(*window, k)) continue;
      add_term(out, k, a.mul(b));
    }
  return out;
}

}  // namespace

Series make_series(int n, const RingPtr& ring,
                   const std::vector<std::pair<Exponent, Value>>& monomials) {
  Series s;
  s.nvars = n;
  s.ring = ring;
  for (const auto& [k, v] : monomials) {
    if (static_cast<int>(k.size()) != n)
      fail(Errc::ArityMismatch, "exponent arity differs from series");
    if (!v.ring()->same_as(*ring))
      fail(Errc::DescriptorMismatch, "coefficient ring differs");
    add_term(s.coeffs, k, v);
  }
  s.envelope = envelope_of_points(n, keys_of(s.coeffs));
  s.guarantee = surrogate_box(n);
  s.exact = true;
  return s;
}

Series zero_series(int n, const RingPtr& ring) {
  return make_series(n, ring, {});
}

Series one_series(int n, const RingPtr& ring) {
  return make_series(n, ring, {{exp_zero(n), Value::one(ring)}});
}

Series monomial(int n, const RingPtr& ring, const Exponent& k,
                const Value& c) {
  return make_series(n, ring, {{k, c}});
}

Series variable(int n, const RingPtr& ring, int i) {
  return monomial(n, ring, exp_unit(n, i), Value::one(ring));
}

Series add(const Series& f, const Series& g) {
  check_compatible(f, g);
  Series s;
  s.nvars = f.nvars;
  s.ring = f.ring;
  s.coeffs = f.coeffs;
  for (const auto& [k, v] : g.coeffs) add_term(s.coeffs, k, v);
  s.guarantee = box_meet(f.guarantee, g.guarantee);
  restrict_to_box(s.coeffs, s.guarantee);
  s.envelope = envelope_join(f.envelope, g.envelope);
  s.exact = f.exact && g.exact;
  return s;
}

Series negate(const Series& f) {
  Series s = f;
  for (auto& [k, v] : s.coeffs) v = v.neg();
  return s;
}

Series sub(const Series& f, const Series& g) { return add(f, negate(g)); }

Series scalar_mul(const Value& c, const Series& f) {
  if (!c.ring()->same_as(*f.ring))
    fail(Errc::DescriptorMismatch, "scalar ring differs");
  Series s = f;
  s.certified_nu.clear();
  CoeffMap out;
  for (const auto& [k, v] : f.coeffs) add_term(out, k, c.mul(v));
  s.coeffs = std::move(out);
  return s;
}

Series mul(const Series& f, const Series& g) {
  check_compatible(f, g);
  Series s;
  s.nvars = f.nvars;
  s.ring = f.ring;
  s.envelope = envelope_sum(f.envelope, g.envelope);
  s.exact = f.exact && g.exact;

  if (s.exact) {
    s.guarantee = surrogate_box(f.nvars);
    s.coeffs = convolve(f, g, std::nullopt);
    return s;
  }

  Box out_box;
  if (all_generators_componentwise_nonneg(f.envelope) &&
      all_generators_componentwise_nonneg(g.envelope)) {
    // with componentwise-nonnegative generators, every unknown point of f
    // exceeds N_f somewhere and every point of g sits above g's base, so
    // their sums stay outside N_f + base_g; symmetrically for g
    out_box = surrogate_box(f.nvars);
    if (!f.exact)
      out_box = box_meet(out_box, box_shift(f.guarantee, g.envelope.base));
    if (!g.exact)
      out_box = box_meet(out_box, box_shift(g.guarantee, f.envelope.base));
  } else {
    out_box = box_meet(f.guarantee, g.guarantee);
    Exponent floor = s.envelope.base;
    if (!f.exact) {
      cones::UnknownContribution u{f.envelope.base, f.envelope.generators,
                                   f.guarantee,     nullptr,
                                   g.envelope.base, g.envelope.generators};
      out_box = cones::certify_box(u, out_box, floor);
    }
    if (!g.exact) {
      cones::UnknownContribution u{g.envelope.base, g.envelope.generators,
                                   g.guarantee,     nullptr,
                                   f.envelope.base, f.envelope.generators};
      out_box = cones::certify_box(u, out_box, floor);
    }
  }

  s.guarantee = out_box;
  s.coeffs = convolve(f, g, out_box);
  return s;
}

Series pow_nonneg(const Series& f, long long e) {
  if (e < 0) fail(Errc::Internal, "negative exponent in pow_nonneg");
  Series acc = one_series(f.nvars, f.ring);
  Series base = f;
  while (e > 0) {
    if (e & 1) acc = mul(acc, base);
    e >>= 1;
    if (e > 0) base = mul(base, base);
  }
  return acc;
}

Value coefficient(const Series& f, const Exponent& k) {
  if (static_cast<int>(k.size()) != f.nvars)
    fail(Errc::ArityMismatch, "exponent arity differs from series");
  if (!box_contains(f.guarantee, k))
    fail(Errc::QueryOutsidePrecision,
         "coefficient at " + exp_to_string(k) + " is not certified");
  auto it = f.coeffs.find(k);
  return it == f.coeffs.end() ? Value::zero(f.ring) : it->second;
}

Series partial_derivative(const Series& f, int i) {
  if (i < 0 || i >= f.nvars) fail(Errc::ArityMismatch, "no such variable");
  Series s;
  s.nvars = f.nvars;
  s.ring = f.ring;
  for (const auto& [k, v] : f.coeffs) {
    Value c = v.mul(Value::from_int(f.ring, k[static_cast<size_t>(i)]));
    if (c.is_zero()) continue;
    add_term(s.coeffs, exp_sub(k, exp_unit(f.nvars, i)), c);
  }
  s.guarantee = f.guarantee;
  s.guarantee[static_cast<size_t>(i)] =
      add_clamped(s.guarantee[static_cast<size_t>(i)], 1);
  s.envelope = cones::make_envelope(
      exp_sub(f.envelope.base, exp_unit(f.nvars, i)), f.envelope.generators);
  s.exact = f.exact;
  return s;
}

Series shift(const Series& f, const Exponent& v) {
  Series s;
  s.nvars = f.nvars;
  s.ring = f.ring;
  for (const auto& [k, c] : f.coeffs) s.coeffs.emplace(exp_add(k, v), c);
  s.envelope =
      cones::make_envelope(exp_add(f.envelope.base, v), f.envelope.generators);
  s.guarantee = f.exact ? f.guarantee : box_shift(f.guarantee, v);
  s.exact = f.exact;
  for (const auto& nu : f.certified_nu)
    s.certified_nu.push_back(exp_add(nu, v));
  return s;
}

Series truncate(const Series& f, const Box& box) {
  Series s = f;
  s.guarantee = box_meet(f.guarantee, box);
  restrict_to_box(s.coeffs, s.guarantee);
  s.exact = f.exact && s.guarantee == f.guarantee;
  s.certified_nu.clear();
  for (const auto& nu : f.certified_nu) {
    if (!box_contains(s.guarantee, nu)) {
      s.certified_nu.clear();
      break;
    }
    s.certified_nu.push_back(nu);
  }
  if (s.certified_nu.size() != f.certified_nu.size()) s.certified_nu.clear();
  return s;
}

Series project_factor(const Series& f, int i) {
  auto factors = f.ring->connected_factors();
  Series s;
  s.nvars = f.nvars;
  s.ring = factors.at(static_cast<size_t>(i));
  for (const auto& [k, v] : f.coeffs) {
    Value p = v.project(i);
    if (!p.is_zero()) s.coeffs.emplace(k, p);
  }
  s.envelope = f.envelope;
  s.guarantee = f.guarantee;
  s.exact = f.exact;
  if (!f.certified_nu.empty())
    s.certified_nu = {f.certified_nu.at(static_cast<size_t>(i))};
  return s;
}

Series merge_factors(const RingPtr& ring, const std::vector<Series>& parts) {
  if (parts.empty()) fail(Errc::Internal, "empty merge");
  auto factors = ring->connected_factors();
  if (factors.size() != parts.size())
    fail(Errc::DescriptorMismatch, "factor count differs in merge");
  Series s;
  s.nvars = parts[0].nvars;
  s.ring = ring;
  std::set<Exponent, cones::LexLess> keys;
  for (const auto& p : parts)
    for (const auto& [k, v] : p.coeffs) keys.insert(k);
  for (const auto& k : keys) {
    std::vector<Value> comps;
    for (size_t i = 0; i < parts.size(); ++i) {
      auto it = parts[i].coeffs.find(k);
      comps.push_back(it == parts[i].coeffs.end() ? Value::zero(factors[i])
                                                  : it->second);
    }
    s.coeffs.emplace(k, Value::merge(ring, comps));
  }
  s.envelope = parts[0].envelope;
  s.guarantee = parts[0].guarantee;
  s.exact = parts[0].exact;
  bool all_cert = true;
  for (const auto& p : parts) {
    s.envelope = envelope_join(s.envelope, p.envelope);
    s.guarantee = box_meet(s.guarantee, p.guarantee);
    s.exact = s.exact && p.exact;
    all_cert = all_cert && p.certified_nu.size() == 1;
  }
  restrict_to_box(s.coeffs, s.guarantee);
  if (all_cert)
    for (const auto& p : parts) s.certified_nu.push_back(p.certified_nu[0]);
  return s;
}

bool is_zero(const Series& f) { return f.coeffs.empty(); }

bool agree_on_common_window(const Series& f, const Series& g) {
  check_compatible(f, g);
  Box window = box_meet(f.guarantee, g.guarantee);
  for (const auto& [k, v] : f.coeffs) {
    if (!box_contains(window, k)) continue;
    auto it = g.coeffs.find(k);
    if (it == g.coeffs.end() || !it->second.eq(v)) return false;
  }
  for (const auto& [k, v] : g.coeffs) {
    if (!box_contains(window, k)) continue;
    if (f.coeffs.find(k) == f.coeffs.end()) return false;
  }
  return true;
}

bool exact_equal(const Series& f, const Series& g) {
  check_compatible(f, g);
  if (!f.exact || !g.exact) return false;
  if (f.coeffs.size() != g.coeffs.size()) return false;
  auto it = g.coeffs.begin();
  for (const auto& [k, v] : f.coeffs) {
    if (it->first != k || !it->second.eq(v)) return false;
    ++it;
  }
  return true;
}

std::vector<Exponent> UnitDecomposition::nu() const {
  std::vector<Exponent> out;
  for (const auto& fd : factors) out.push_back(fd.nu);
  return out;
}

namespace {

FactorDecomposition decompose_connected(const Series& f) {
  FactorDecomposition fd;
  bool have_nu = false;

  if (!f.certified_nu.empty()) {
    fd.nu = f.certified_nu[0];
    fd.leading_unit = coefficient(f, fd.nu);
    if (!fd.leading_unit.is_unit())
      fail(Errc::Internal, "certified valuation has no unit coefficient");
    have_nu = true;
  } else {
    for (const auto& [k, v] : f.coeffs) {
      if (v.is_unit()) {
        fd.nu = k;
        fd.leading_unit = v;
        have_nu = true;
        break;
      }
      if (!v.is_nilpotent())
        fail(Errc::NotInvertible,
             "coefficient at " + exp_to_string(k) +
                 " is neither a unit nor nilpotent");
    }
    if (!have_nu)
      fail(Errc::NotInvertible, "no invertible coefficient found");
    if (!f.exact &&
        cones::cone_has_unknown_below(f.envelope, f.guarantee, fd.nu))
      fail(Errc::InsufficientPrecision,
           "support below the leading unit is not certified");
  }

  std::vector<std::pair<Exponent, Value>> tail, pos;
  Value inv_unit = fd.leading_unit.invert_unit();
  for (const auto& [k, v] : f.coeffs) {
    if (lex_less(k, fd.nu)) {
      if (!v.is_nilpotent())
        fail(Errc::NotInvertible, "coefficient at " + exp_to_string(k) +
                                      " below the valuation is not nilpotent");
      tail.emplace_back(k, v);
    } else if (k != fd.nu) {
      pos.emplace_back(exp_sub(k, fd.nu), inv_unit.mul(v));
    }
  }
  fd.nil_tail = make_series(f.nvars, f.ring, tail);
  fd.positive_part = make_series(f.nvars, f.ring, pos);
  if (!f.exact) {
    fd.nil_tail.exact = false;
    fd.nil_tail.guarantee = f.guarantee;
    fd.nil_tail.envelope = f.envelope;
    fd.positive_part.exact = false;
    fd.positive_part.guarantee = box_shift(f.guarantee, exp_neg(fd.nu));
    fd.positive_part.envelope = cones::make_envelope(
        exp_sub(f.envelope.base, fd.nu), f.envelope.generators);
  }
  return fd;
}

}  // namespace

UnitDecomposition unit_decompose(const Series& f) {
  UnitDecomposition out;
  int count = f.ring->connected_factor_count();
  if (count == 1) {
    out.factors.push_back(decompose_connected(f));
    return out;
  }
  for (int i = 0; i < count; ++i)
    out.factors.push_back(decompose_connected(project_factor(f, i)));
  return out;
}

namespace {

Series invert_connected(const Series& f, const Box& target) {
  int n = f.nvars;
  const RingPtr& ring = f.ring;
  UnitDecomposition dec = unit_decompose(f);
  const FactorDecomposition& fd = dec.factors[0];
  const Exponent& nu = fd.nu;
  Value c_inv = fd.leading_unit.invert_unit();

  if (!f.exact && !is_zero(fd.nil_tail))
    fail(Errc::InsufficientPrecision,
         "cannot invert a truncated series with a nilpotent tail");
  if (!f.exact &&
      cones::cone_has_unknown_below(f.envelope, f.guarantee, nu))
    fail(Errc::InsufficientPrecision,
         "support below the leading unit is not certified");

  // normalize: f = c t^nu (1 + g), g = g_pos + g_nil
  Series g_pos = fd.positive_part;
  Series g_nil = scalar_mul(c_inv, shift(fd.nil_tail, exp_neg(nu)));

  // nilpotency index of the finite all-nilpotent part
  int nil_index = 1;
  {
    Series p = g_nil;
    while (!is_zero(p)) {
      ++nil_index;
      if (nil_index > 4096)
        fail(Errc::IterationBudgetExceeded, "nilpotent tail does not vanish");
      CoeffMap next;
      for (const auto& [a, va] : p.coeffs)
        for (const auto& [b, vb] : g_nil.coeffs)
          add_term(next, exp_add(a, b), va.mul(vb));
      p.coeffs = std::move(next);
    }
  }

  Exponent m_minus = exp_zero(n);
  for (const auto& [k, v] : g_nil.coeffs)
    for (size_t i = 0; i < k.size(); ++i)
      m_minus[i] = std::min(m_minus[i], k[i]);
  Exponent nil_allowance = exp_scale(nil_index - 1, m_minus);

  // purely nilpotent perturbation: the Neumann sum is finite and exact
  if (is_zero(g_pos) && f.exact) {
    Series s = one_series(n, ring);
    Series p = one_series(n, ring);
    Series mg = negate(g_nil);
    for (int i = 1; i < nil_index; ++i) {
      p = mul(p, mg);
      s = add(s, p);
    }
    return scalar_mul(c_inv, shift(s, exp_neg(nu)));
  }

  for (long long b : target)
    if (b >= kBoxInfinity)
      fail(Errc::InsufficientPrecision,
           "inversion of a non-nilpotent perturbation needs a finite box");

  Box window = box_shift(target, nu);  // box for the normalized sum

  std::vector<Exponent> pos_supp = keys_of(g_pos.coeffs);
  std::map<Exponent, bool, cones::LexLess> feas_cache;
  auto feasible = [&](const Exponent& e) {
    auto it = feas_cache.find(e);
    if (it != feas_cache.end()) return it->second;
    bool ok = cones::enumerate_cone_below(
        exp_add(e, nil_allowance), pos_supp, {}, window,
        [](const std::vector<long long>&) { return true; },
        cones::ConeSearchBudget{250'000});
    feas_cache.emplace(e, ok);
    return ok;
  };

  CoeffMap minus_g;
  for (const auto& [k, v] : g_pos.coeffs) add_term(minus_g, k, v.neg());
  for (const auto& [k, v] : g_nil.coeffs) add_term(minus_g, k, v.neg());

  CoeffMap sum, power;
  add_term(sum, exp_zero(n), Value::one(ring));
  add_term(power, exp_zero(n), Value::one(ring));
  const int kNeumannBudget = 10000;
  // meter the convolution work: wide skewed windows can make the Neumann
  // powers explode far beyond anything the caller's box can certify
  const long long kNeumannWorkBudget = 10'000'000;
  long long work = 0;
  int i = 0;
  while (!power.empty()) {
    if (++i > kNeumannBudget)
      fail(Errc::IterationBudgetExceeded, "Neumann summation did not settle");
    work += static_cast<long long>(power.size()) *
            static_cast<long long>(minus_g.size());
    if (work > kNeumannWorkBudget)
      fail(Errc::IterationBudgetExceeded, "Neumann summation budget exhausted");
    CoeffMap next;
    for (const auto& [a, va] : power)
      for (const auto& [b, vb] : minus_g) {
        Exponent e = exp_add(a, b);
        if (!feasible(e)) continue;
        add_term(next, e, va.mul(vb));
      }
    power = std::move(next);
    for (const auto& [k, v] : power) add_term(sum, k, v);
  }

  Series s;
  s.nvars = n;
  s.ring = ring;
  s.coeffs = std::move(sum);
  restrict_to_box(s.coeffs, window);
  std::vector<Exponent> gens = pos_supp;
  for (const auto& [k, v] : g_nil.coeffs) gens.push_back(exp_sub(k, m_minus));
  if (m_minus != exp_zero(n)) gens.push_back(exp_neg(m_minus));
  if (!f.exact)
    gens.insert(gens.end(), f.envelope.generators.begin(),
                f.envelope.generators.end());
  s.envelope = cones::make_envelope(nil_allowance, gens);
  s.guarantee = window;
  s.exact = false;

  if (!f.exact) {
    // unknown terms of f feed every Neumann power; certify the window
    // against their reach. When the envelope base sits at nu the unknown
    // support of g lives in the envelope's own cone; in one variable a
    // lower base is also fine because every unknown is >= 1, so repeated
    // unknown factors stay inside the cone once 1 is a generator.
    Exponent a_base = exp_zero(n);
    std::vector<Exponent> reach = gens;
    if (f.envelope.base != nu) {
      if (n != 1)
        fail(Errc::InsufficientPrecision,
             "envelope base differs from the valuation");
      a_base = exp_sub(f.envelope.base, nu);
      if (std::find(reach.begin(), reach.end(), Exponent{1}) == reach.end())
        reach.push_back({1});
    }
    cones::UnknownContribution u{a_base, f.envelope.generators,
                                 box_shift(f.guarantee, exp_neg(nu)), nullptr,
                                 nil_allowance, reach};
    Exponent floor = nil_allowance;
    for (const auto& [k, v] : s.coeffs)
      for (size_t j = 0; j < floor.size(); ++j)
        floor[j] = std::min(floor[j], k[j]);
    s.guarantee = cones::certify_box(u, s.guarantee, floor,
                                     cones::ConeSearchBudget{2'000'000});
    restrict_to_box(s.coeffs, s.guarantee);
  }

  return scalar_mul(c_inv, shift(s, exp_neg(nu)));
}

}  // namespace

Series invert(const Series& f, const Box& target) {
  int count = f.ring->connected_factor_count();
  if (count == 1) return invert_connected(f, target);
  std::vector<Series> parts;
  for (int i = 0; i < count; ++i)
    parts.push_back(invert_connected(project_factor(f, i), target));
  return merge_factors(f.ring, parts);
}

Value pairing(const Series& f, const Series& g, const Exponent& k) {
  check_compatible(f, g);
  if (static_cast<int>(k.size()) != f.nvars)
    fail(Errc::ArityMismatch, "exponent arity differs from series");
  // the certified box of the product is the same as in mul(), but we skip
  // the full convolution and extract the single requested coefficient
  if (!f.exact || !g.exact) {
    Box out_box;
    if (all_generators_componentwise_nonneg(f.envelope) &&
        all_generators_componentwise_nonneg(g.envelope)) {
      out_box = surrogate_box(f.nvars);
      if (!f.exact)
        out_box = box_meet(out_box, box_shift(f.guarantee, g.envelope.base));
      if (!g.exact)
        out_box = box_meet(out_box, box_shift(g.guarantee, f.envelope.base));
    } else {
      out_box = box_meet(f.guarantee, g.guarantee);
      if (box_contains(out_box, k)) {
        // point query: it suffices that no unknown contribution lands at or
        // below k, which is cheaper than shrinking a whole certified box;
        // a search-budget refusal is reported as an uncertified query
        cones::ConeSearchBudget budget{250'000};
        Box at_k(k.begin(), k.end());
        auto blocked = [&](const Series& a, const Series& b) {
          cones::UnknownContribution u{a.envelope.base, a.envelope.generators,
                                       a.guarantee,     nullptr,
                                       b.envelope.base, b.envelope.generators};
          try {
            return cones::unknown_witness(u, at_k, budget).has_value();
          } catch (const Error& e) {
            if (e.code() == Errc::IterationBudgetExceeded) return true;
            throw;
          }
        };
        if ((!f.exact && blocked(f, g)) || (!g.exact && blocked(g, f)))
          out_box = Box();  // forces the uncertified-query failure below
      }
    }
    if (out_box.empty() || !box_contains(out_box, k))
      fail(Errc::QueryOutsidePrecision,
           "coefficient at " + exp_to_string(k) + " is not certified");
  }
  const Series& small = f.coeffs.size() <= g.coeffs.size() ? f : g;
  const Series& large = f.coeffs.size() <= g.coeffs.size() ? g : f;
  Value c = Value::zero(f.ring);
  for (const auto& [e, v] : small.coeffs) {
    auto it = large.coeffs.find(exp_sub(k, e));
    if (it != large.coeffs.end()) c = c.add(v.mul(it->second));
  }
  return c;
}

Value residue(const TopForm& w) {
  return coefficient(w.coefficient,
                     Exponent(static_cast<size_t>(w.coefficient.nvars), -1));
}

std::string term_name(int nvars, const Exponent& k) {
  std::string s;
  for (int i = 0; i < nvars; ++i) {
    long long e = k[static_cast<size_t>(i)];
    if (e == 0) continue;
    if (!s.empty()) s += "*";
    s += nvars == 1 ? "t" : "t" + std::to_string(i + 1);
    if (e != 1) s += "^" + std::to_string(e);
  }
  return s;
}

std::string to_string(const Series& f) {
  std::string out;
  for (const auto& [k, v] : f.coeffs) {
    std::string cs = v.to_string();
    bool negative = false;
    if (!v.is_composite_literal() && !cs.empty() && cs[0] == '-') {
      negative = true;
      cs = v.neg().to_string();
    }
    if (v.is_composite_literal()) cs = "(" + cs + ")";
    std::string mono = term_name(f.nvars, k);
    std::string body;
    if (mono.empty())
      body = cs;
    else if (cs == "1")
      body = mono;
    else
      body = cs + "*" + mono;
    if (out.empty())
      out = negative ? "-" + body : body;
    else
      out += (negative ? " - " : " + ") + body;
  }
  if (f.exact) {
    if (out.empty()) out = "0";
  } else {
    std::string tail = "O(box: " + cones::box_to_string(f.guarantee) + ")";
    out = out.empty() ? tail : out + " + " + tail;
  }
  return out;
}

}  // namespace laurent::series
