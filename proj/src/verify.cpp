#include "verify.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <utility>

namespace laurent::verify {

using cones::box_contains;
using cones::box_meet;
using cones::exp_add;
using cones::exp_neg;
using cones::exp_scale;
using cones::exp_sub;
using cones::exp_to_string;
using cones::exp_unit;
using cones::exp_zero;
using cones::IntMatrix;
using cones::kBoxInfinity;
using cones::lex_less;
using cones::lex_positive;
using homs::compose_tuples;
using homs::validate_tuple;
using rings::Ring;
using rings::RingKind;
using series::add;
using series::coefficient;
using series::invert;
using series::make_series;
using series::merge_factors;
using series::monomial;
using series::mul;
using series::one_series;
using series::pow_nonneg;
using series::project_factor;
using series::scalar_mul;
using series::shift;
using series::truncate;
using series::unit_decompose;
using series::variable;

std::string status_name(Status s) {
  switch (s) {
    case Status::Pass:
      return "pass";
    case Status::Fail:
      return "fail";
    case Status::SkippedPrecision:
      return "skipped-precision";
  }
  return "?";
}

std::string report_line(const CheckReport& r) {
  std::string line = status_name(r.status) + "  " + r.name;
  if (!r.instance.empty()) line += "  [" + r.instance + "]";
  if (!r.witness.empty()) line += "  -- " + r.witness;
  return line;
}

bool all_passed(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (r.status == Status::Fail) return false;
  return true;
}

namespace {

bool is_precision_code(Errc c) {
  return c == Errc::InsufficientPrecision || c == Errc::QueryOutsidePrecision ||
         c == Errc::EmptyGuarantee || c == Errc::IterationBudgetExceeded;
}

/// First coefficient discrepancy on the common certified window.
std::optional<std::string> first_difference(const Series& f, const Series& g) {
  Box w = box_meet(f.guarantee, g.guarantee);
  std::set<Exponent, cones::LexLess> keys;
  for (const auto& [k, v] : f.coeffs)
    if (box_contains(w, k)) keys.insert(k);
  for (const auto& [k, v] : g.coeffs)
    if (box_contains(w, k)) keys.insert(k);
  for (const auto& k : keys) {
    Value a = coefficient(f, k);
    Value b = coefficient(g, k);
    if (!a.eq(b))
      return "at t^" + exp_to_string(k) + ": lhs=" + a.to_string() +
             ", rhs=" + b.to_string();
  }
  return std::nullopt;
}

Series power_int(const Series& f, long long e, const Box& box) {
  if (e >= 0) return pow_nonneg(f, e);
  return pow_nonneg(invert(f, box), -e);
}

std::optional<Exponent> solve_unit_lower(const IntMatrix& u,
                                         const Exponent& v) {
  int n = u.cols;
  Exponent x(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    long long s = v[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) s -= u.at(i, j) * x[static_cast<size_t>(j)];
    if (s % u.at(i, i) != 0) return std::nullopt;
    x[static_cast<size_t>(i)] = s / u.at(i, i);
  }
  return x;
}

IntMatrix unit_lower_inverse(const IntMatrix& u) {
  int n = u.cols;
  IntMatrix inv(n, n);
  for (int c = 0; c < n; ++c) {
    auto x = solve_unit_lower(u, exp_unit(n, c));
    for (int r = 0; r < n; ++r) inv.at(r, c) = (*x)[static_cast<size_t>(r)];
  }
  return inv;
}

ParamTuple oracle_connected(const ParamTuple& phi, const Box& target) {
  int n = phi.n;
  const RingPtr& ring = phi.ring;
  const IntMatrix& u = phi.factors[0].upsilon;
  for (int i = 0; i < n; ++i)
    if (u.at(i, i) != 1)
      fail(Errc::SystemNotTriangular,
           "undetermined-coefficient solve needs a unit diagonal");
  IntMatrix uinv = unit_lower_inverse(u);

  // phi_i = t^{nu_i} u_i with u_i a unit series of valuation 0
  std::vector<Series> units;
  for (int i = 0; i < n; ++i)
    units.push_back(shift(phi.components[static_cast<size_t>(i)],
                          exp_neg(u.column(i))));

  long long pad = 4;
  for (long long e : u.a) pad += std::llabs(e);
  for (long long e : uinv.a) pad += std::llabs(e);
  Box wide(target.size());
  for (size_t i = 0; i < target.size(); ++i)
    wide[i] = target[i] >= kBoxInfinity ? kBoxInfinity : target[i] + pad;

  auto with_cert = [&](Series s, int i) {
    if (!s.exact && box_contains(s.guarantee, uinv.column(i)))
      s.certified_nu = {uinv.column(i)};
    return s;
  };

  // an iterate whose certified window no longer reaches its valuation cannot
  // be validated; that is a refusal of this instance, not a wrong answer
  auto validate_or_refuse = [&](const std::vector<Series>& comps) {
    try {
      return validate_tuple(n, comps);
    } catch (const Error& e) {
      if (e.code() == Errc::NotInvertibleComponent)
        fail(Errc::SystemNotTriangular,
             std::string("iterate lost valuation certification: ") + e.what());
      throw;
    }
  };

  std::vector<Series> psi;
  for (int i = 0; i < n; ++i)
    psi.push_back(monomial(n, ring, uinv.column(i), Value::one(ring)));

  const int kIterationCap = 64;
  bool settled = false;
  for (int iter = 0; iter < kIterationCap && !settled; ++iter) {
    std::vector<Series> cur;
    for (int i = 0; i < n; ++i) cur.push_back(with_cert(psi[static_cast<size_t>(i)], i));
    ParamTuple cur_t = validate_or_refuse(cur);
    std::vector<Series> next;
    for (int i = 0; i < n; ++i) {
      Series s = variable(n, ring, i);
      for (int r = i + 1; r < n; ++r)
        if (u.at(r, i) != 0)
          s = mul(s, power_int(cur[static_cast<size_t>(r)], -u.at(r, i), wide));
      Series back = homs::substitute(units[static_cast<size_t>(i)], cur_t, wide);
      if (!back.exact && back.certified_nu.empty()) {
        // nu(u_i o psi) = Upsilon(psi) * nu(u_i) = 0 on every factor
        back.certified_nu.assign(
            static_cast<size_t>(ring->connected_factor_count()), exp_zero(n));
      }
      s = mul(s, invert(back, wide));
      next.push_back(std::move(s));
    }
    settled = iter > 0;
    for (int i = 0; i < n && settled; ++i)
      settled = !first_difference(truncate(next[static_cast<size_t>(i)], target),
                                  truncate(psi[static_cast<size_t>(i)], target))
                     .has_value();
    psi = std::move(next);
  }
  if (!settled)
    fail(Errc::SystemNotTriangular, "fixed-point iteration did not settle");

  std::vector<Series> comps;
  for (int i = 0; i < n; ++i) {
    Series c = psi[static_cast<size_t>(i)];
    if (!c.exact) c = truncate(c, box_meet(c.guarantee, target));
    comps.push_back(with_cert(std::move(c), i));
  }
  ParamTuple out = validate_or_refuse(comps);

  // sanity: the solution must compose back to the identity where certified
  ParamTuple round = compose_tuples(out, phi, target);
  for (int i = 0; i < n; ++i) {
    auto bad = first_difference(round.components[static_cast<size_t>(i)],
                                variable(n, ring, i));
    if (bad)
      fail(Errc::SystemNotTriangular,
           "solution does not compose to the identity: " + *bad);
  }
  return out;
}

}  // namespace

ParamTuple oracle_compositional_inverse_impl(const ParamTuple& phi,
                                             const Box& target);

ParamTuple oracle_compositional_inverse(const ParamTuple& phi,
                                        const Box& target) {
  if (phi.n != phi.m)
    fail(Errc::ArityMismatch, "compositional inverse needs a square tuple");
  try {
    return oracle_compositional_inverse_impl(phi, target);
  } catch (const Error& e) {
    // composition or factor merging can lose the valuation certification of
    // a truncated iterate; refuse the instance instead of misreporting it
    if (e.code() == Errc::NotInvertibleComponent)
      fail(Errc::SystemNotTriangular,
           std::string("iterate lost valuation certification: ") + e.what());
    throw;
  }
}

ParamTuple oracle_compositional_inverse_impl(const ParamTuple& phi,
                                             const Box& target) {
  int count = phi.ring->connected_factor_count();
  if (count == 1) return oracle_connected(phi, target);
  std::vector<ParamTuple> parts;
  for (int i = 0; i < count; ++i)
    parts.push_back(oracle_connected(homs::project_tuple(phi, i), target));
  std::vector<Series> comps;
  for (int j = 0; j < phi.n; ++j) {
    std::vector<Series> per;
    for (const auto& p : parts) per.push_back(p.components[static_cast<size_t>(j)]);
    comps.push_back(merge_factors(phi.ring, per));
  }
  return validate_tuple(phi.n, comps);
}

CheckReport check_identity(const Series& f, const ParamTuple& phi,
                           const Box& window) {
  CheckReport rep{"identity", "", Status::Pass, ""};
  try {
    Series dual = homs::adjoint_apply(phi, f, window);
    Series back = homs::substitute(dual, phi, window);
    auto bad = first_difference(back, f);
    if (bad) {
      rep.status = Status::Fail;
      rep.witness = *bad;
    }
  } catch (const Error& e) {
    if (!is_precision_code(e.code())) throw;
    rep.status = Status::SkippedPrecision;
    rep.witness = e.what();
  }
  return rep;
}

CheckReport check_n1_formula(const Series& phi, const Box& window) {
  CheckReport rep{"n1-formula", "", Status::Pass, ""};
  if (phi.nvars != 1) fail(Errc::ArityMismatch, "formula is one-variable");
  try {
    auto dec = unit_decompose(phi);
    long long allowance = 0;
    for (const auto& fd : dec.factors) {
      if (fd.nu != Exponent{1})
        fail(Errc::NotInvertible, "formula needs valuation 1");
      // nilpotency allowance of the normalized tail
      Series tail = shift(scalar_mul(fd.leading_unit.invert_unit(), fd.nil_tail),
                          {-1});
      for (const auto& [k, v] : tail.coeffs)
        allowance =
            std::min(allowance, (v.nilpotency().index - 1) * k[0]);
    }
    long long nn = window[0];
    Box pow_box{nn + 2 * std::llabs(allowance) + 4};

    Series lhs = series::zero_series(1, phi.ring);
    for (long long l = allowance; l <= nn + std::llabs(allowance); ++l) {
      // invert the exact power directly so the constant term stays certified
      Series p_minus_l = l > 0 ? invert(pow_nonneg(phi, l),
                                        {std::llabs(allowance) + 2})
                               : pow_nonneg(phi, -l);
      Value c0 = coefficient(p_minus_l, {0});
      if (!c0.is_zero()) {
        Series p_l = l >= 0 ? pow_nonneg(phi, l)
                            : invert(pow_nonneg(phi, -l), pow_box);
        lhs = add(lhs, scalar_mul(c0, truncate(p_l, window)));
      }
    }
    lhs = truncate(lhs, window);

    Series deriv = series::partial_derivative(phi, 0);
    Box rhs_box{nn + std::llabs(allowance) + 2};
    Series rhs = truncate(shift(mul(phi, invert(deriv, rhs_box)), {-1}), window);

    auto bad = first_difference(lhs, rhs);
    if (bad) {
      rep.status = Status::Fail;
      rep.witness = *bad;
    }
  } catch (const Error& e) {
    if (!is_precision_code(e.code())) throw;
    rep.status = Status::SkippedPrecision;
    rep.witness = e.what();
  }
  return rep;
}

CheckReport check_constant_term_series(const Series& f, const Box& window) {
  CheckReport rep{"constant-term-series", "", Status::Pass, ""};
  if (f.nvars != 1) fail(Errc::ArityMismatch, "check is one-variable");
  auto dec = unit_decompose(f);
  if (dec.factors[0].nu != Exponent{-1})
    fail(Errc::NotInvertible, "check needs valuation -1");
  if (f.exact && f.coeffs.size() == 1) return rep;  // excluded case c*t^-1
  try {
    Series p = one_series(1, f.ring);
    for (long long l = 1; l <= window[0]; ++l) {
      p = mul(p, f);
      if (!coefficient(p, {0}).is_zero()) return rep;
    }
    rep.status = Status::Fail;
    rep.witness = "all constant terms of powers vanish up to " +
                  std::to_string(window[0]);
  } catch (const Error& e) {
    if (!is_precision_code(e.code())) throw;
    rep.status = Status::SkippedPrecision;
    rep.witness = e.what();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Seeded instance generation

namespace {

long long rand_in(std::mt19937_64& rng, long long lo, long long hi) {
  return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

}  // namespace

std::vector<RingPtr> default_rings() {
  return {Ring::integers(), Ring::rationals(), Ring::modular(4),
          Ring::nilpotent_ext(Ring::rationals(), "e", 3)};
}

Value random_element(std::mt19937_64& rng, const RingPtr& ring) {
  switch (ring->kind()) {
    case RingKind::Integers:
      return Value::from_int(ring, rand_in(rng, -3, 3));
    case RingKind::Rationals:
      return Value::from_rational(
          ring, rings::Rational(rand_in(rng, -3, 3), rand_in(rng, 1, 3)));
    case RingKind::Modular:
      return Value::from_int(
          ring, rand_in(rng, 0, static_cast<long long>(ring->modulus()) - 1));
    case RingKind::NilpotentExt: {
      std::vector<Value> cs;
      for (int i = 0; i < ring->nilpotency_order(); ++i)
        cs.push_back(random_element(rng, ring->base()));
      return Value::ext(ring, cs);
    }
    case RingKind::Product: {
      std::vector<Value> parts;
      for (const auto& fr : ring->factors())
        parts.push_back(random_element(rng, fr));
      return Value::tuple(ring, parts);
    }
  }
  fail(Errc::Internal, "unknown ring kind");
}

Value random_unit(std::mt19937_64& rng, const RingPtr& ring) {
  switch (ring->kind()) {
    case RingKind::Integers:
      return Value::from_int(ring, rand_in(rng, 0, 1) ? 1 : -1);
    case RingKind::Rationals: {
      long long p = 0;
      while (p == 0) p = rand_in(rng, -3, 3);
      return Value::from_rational(ring, rings::Rational(p, rand_in(rng, 1, 3)));
    }
    case RingKind::Modular: {
      long long m = static_cast<long long>(ring->modulus());
      long long p = static_cast<long long>(ring->modular_prime());
      long long r = 0;
      do {
        r = rand_in(rng, 1, m - 1);
      } while (r % p == 0);
      return Value::from_int(ring, r);
    }
    case RingKind::NilpotentExt: {
      std::vector<Value> cs{random_unit(rng, ring->base())};
      for (int i = 1; i < ring->nilpotency_order(); ++i)
        cs.push_back(random_element(rng, ring->base()));
      return Value::ext(ring, cs);
    }
    case RingKind::Product: {
      std::vector<Value> parts;
      for (const auto& fr : ring->factors())
        parts.push_back(random_unit(rng, fr));
      return Value::tuple(ring, parts);
    }
  }
  fail(Errc::Internal, "unknown ring kind");
}

Value random_nilpotent(std::mt19937_64& rng, const RingPtr& ring) {
  switch (ring->kind()) {
    case RingKind::Integers:
    case RingKind::Rationals:
      return Value::zero(ring);
    case RingKind::Modular: {
      long long m = static_cast<long long>(ring->modulus());
      long long p = static_cast<long long>(ring->modular_prime());
      if (m == p) return Value::zero(ring);
      return Value::from_int(ring, p * rand_in(rng, 0, m / p - 1));
    }
    case RingKind::NilpotentExt: {
      std::vector<Value> cs{random_nilpotent(rng, ring->base())};
      for (int i = 1; i < ring->nilpotency_order(); ++i)
        cs.push_back(random_element(rng, ring->base()));
      return Value::ext(ring, cs);
    }
    case RingKind::Product: {
      std::vector<Value> parts;
      for (const auto& fr : ring->factors())
        parts.push_back(random_nilpotent(rng, fr));
      return Value::tuple(ring, parts);
    }
  }
  fail(Errc::Internal, "unknown ring kind");
}

namespace {

Exponent random_exponent(std::mt19937_64& rng, int n, long long lo,
                         long long hi) {
  Exponent e(static_cast<size_t>(n));
  for (auto& c : e) c = rand_in(rng, lo, hi);
  return e;
}

Exponent random_lex_positive(std::mt19937_64& rng, int n) {
  Exponent e;
  do {
    e = random_exponent(rng, n, -4, 4);
  } while (!lex_positive(e));
  return e;
}

Exponent random_lex_negative(std::mt19937_64& rng, int n) {
  Exponent e;
  do {
    e = random_exponent(rng, n, -4, 4);
  } while (!lex_positive(exp_neg(e)));
  return e;
}

Series random_unit_series_at(std::mt19937_64& rng, int n, const RingPtr& ring,
                             const Exponent& w) {
  std::vector<std::pair<Exponent, Value>> terms{{w, random_unit(rng, ring)}};
  long long npos = rand_in(rng, 0, 4);
  for (long long k = 0; k < npos; ++k)
    terms.push_back(
        {exp_add(w, random_lex_positive(rng, n)), random_element(rng, ring)});
  long long nnil = rand_in(rng, 0, 2);
  for (long long k = 0; k < nnil; ++k)
    terms.push_back(
        {exp_add(w, random_lex_negative(rng, n)), random_nilpotent(rng, ring)});
  return make_series(n, ring, terms);
}

}  // namespace

Series random_invertible_series(std::mt19937_64& rng, int n,
                                const RingPtr& ring) {
  return random_unit_series_at(rng, n, ring, random_exponent(rng, n, -3, 3));
}

ParamTuple random_diag1_tuple(std::mt19937_64& rng, int n,
                              const RingPtr& ring) {
  IntMatrix u = cones::identity_matrix(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < r; ++c) u.at(r, c) = rand_in(rng, 0, 1);
  std::vector<Series> comps;
  for (int j = 0; j < n; ++j)
    comps.push_back(random_unit_series_at(rng, n, ring, u.column(j)));
  return validate_tuple(n, comps);
}

Series random_laurent_polynomial(std::mt19937_64& rng, int n,
                                 const RingPtr& ring) {
  std::vector<std::pair<Exponent, Value>> terms;
  long long count = rand_in(rng, 1, 4);
  for (long long k = 0; k < count; ++k)
    terms.push_back(
        {random_exponent(rng, n, -3, 3), random_element(rng, ring)});
  return make_series(n, ring, terms);
}

// ---------------------------------------------------------------------------
// Suites

namespace {

struct SuiteContext {
  const SuiteConfig& cfg;
  std::vector<RingPtr> rings;
  std::vector<CheckReport>& reports;

  std::mt19937_64 rng_for(const std::string& suite) const {
    unsigned long long h = 1469598103934665603ULL;
    for (char c : suite) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    return std::mt19937_64(cfg.seed ^ h);
  }

  std::pair<RingPtr, int> pick(size_t idx) const {
    RingPtr r = rings[idx % rings.size()];
    int n = cfg.arities[(idx / rings.size()) % cfg.arities.size()];
    return {r, n};
  }

  std::string describe(const std::string& suite, size_t idx, const RingPtr& r,
                       int n) const {
    return suite + " seed=" + std::to_string(cfg.seed) +
           " idx=" + std::to_string(idx) + " ring=" + r->name() +
           " n=" + std::to_string(n);
  }
};

/// Removes the below-valuation nilpotent tail but keeps the original
/// envelope: the catalogued "dropped nilpotent tail" bug.
Series drop_nil_tail(const Series& f) {
  auto dec = unit_decompose(f);
  int count = f.ring->connected_factor_count();
  Series out = f;
  out.coeffs.clear();
  for (const auto& [k, v] : f.coeffs) {
    std::vector<Value> parts;
    bool keep_any = false;
    for (int i = 0; i < count; ++i) {
      Value p = count == 1 ? v : v.project(i);
      if (lex_less(k, dec.factors[static_cast<size_t>(i)].nu))
        p = Value::zero(p.ring());
      if (!p.is_zero()) keep_any = true;
      parts.push_back(p);
    }
    if (!keep_any) continue;
    out.coeffs.emplace(k, count == 1 ? parts[0] : Value::merge(f.ring, parts));
  }
  return out;
}

void suite_inversion(SuiteContext& ctx) {
  auto rng = ctx.rng_for("inversion");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    Series f = random_invertible_series(rng, n, ring);
    CheckReport rep{"inversion", ctx.describe("inversion", idx, ring, n),
                    Status::Pass, ""};
    try {
      Box w = cones::box_all(n, ctx.cfg.window);
      Series base = ctx.cfg.mutation == Mutation::DropNilTail
                        ? drop_nil_tail(f)
                        : f;
      Series p = mul(f, invert(base, w));
      auto bad = first_difference(p, one_series(n, ring));
      if (bad) {
        rep.status = Status::Fail;
        rep.witness = *bad;
      }
    } catch (const Error& e) {
      if (!is_precision_code(e.code())) throw;
      rep.status = Status::SkippedPrecision;
      rep.witness = e.what();
    }
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_identity(SuiteContext& ctx) {
  auto rng = ctx.rng_for("identity");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    ParamTuple phi = random_diag1_tuple(rng, n, ring);
    Series f = random_laurent_polynomial(rng, n, ring);
    CheckReport rep = check_identity(f, phi, cones::box_all(n, ctx.cfg.window));
    rep.instance = ctx.describe("identity", idx, ring, n);
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_valuation(SuiteContext& ctx) {
  auto rng = ctx.rng_for("valuation");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    ParamTuple phi = random_diag1_tuple(rng, n, ring);
    Series f = random_invertible_series(rng, n, ring);
    CheckReport rep{"valuation-pushforward",
                    ctx.describe("valuation", idx, ring, n), Status::Pass, ""};
    try {
      Series img = homs::substitute(f, phi, cones::box_all(n, ctx.cfg.window));
      auto nus = unit_decompose(f).nu();
      int count = ring->connected_factor_count();
      for (int i = 0; i < count; ++i) {
        Exponent expect =
            phi.factors[static_cast<size_t>(i)].upsilon.apply(
                nus[static_cast<size_t>(i)]);
        // scan the image independently of the certification set by
        // substitute: the first stored unit coefficient is the valuation
        Series part = count == 1 ? img : project_factor(img, i);
        if (!part.exact && !box_contains(part.guarantee, expect)) {
          rep.status = Status::SkippedPrecision;
          rep.witness = "factor " + std::to_string(i + 1) +
                        ": certified window does not reach nu=" +
                        exp_to_string(expect);
          break;
        }
        std::optional<Exponent> seen;
        for (const auto& [k, v] : part.coeffs) {
          if (v.is_unit()) {
            seen = k;
            break;
          }
          if (!v.is_nilpotent()) break;
        }
        if (!seen || *seen != expect) {
          rep.status = Status::Fail;
          rep.witness = "factor " + std::to_string(i + 1) + ": expected nu=" +
                        exp_to_string(expect) +
                        (seen ? ", scanned nu=" + exp_to_string(*seen)
                              : ", no unit coefficient found");
          break;
        }
      }
    } catch (const Error& e) {
      if (!is_precision_code(e.code())) throw;
      rep.status = Status::SkippedPrecision;
      rep.witness = e.what();
    }
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_wedge(SuiteContext& ctx) {
  auto rng = ctx.rng_for("wedge");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    ParamTuple phi = random_diag1_tuple(rng, n, ring);
    std::vector<std::pair<Exponent, Value>> terms{
        {Exponent(static_cast<size_t>(n), -1), random_unit(rng, ring)}};
    long long extra = rand_in(rng, 0, 3);
    for (long long k = 0; k < extra; ++k)
      terms.push_back(
          {random_exponent(rng, n, -3, 3), random_element(rng, ring)});
    series::TopForm w{make_series(n, ring, terms)};
    CheckReport rep{"wedge-invariance", ctx.describe("wedge", idx, ring, n),
                    Status::Pass, ""};
    try {
      Value lhs =
          homs::wedge_residue(phi, w, cones::box_all(n, ctx.cfg.window));
      if (ctx.cfg.mutation == Mutation::WedgeSignFlip) lhs = lhs.neg();
      Value rhs;
      if (ctx.cfg.mutation == Mutation::ResidueIndexOffByOne) {
        Exponent off(static_cast<size_t>(n), -1);
        off[0] = 0;
        rhs = coefficient(w.coefficient, off);
      } else {
        rhs = series::residue(w);
      }
      if (!lhs.eq(rhs)) {
        rep.status = Status::Fail;
        rep.witness =
            "wedge=" + lhs.to_string() + ", residue=" + rhs.to_string();
      }
    } catch (const Error& e) {
      if (!is_precision_code(e.code())) throw;
      rep.status = Status::SkippedPrecision;
      rep.witness = e.what();
    }
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_left_inverse(SuiteContext& ctx) {
  auto rng = ctx.rng_for("left-inverse");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    ParamTuple phi = random_diag1_tuple(rng, n, ring);
    Series f = random_laurent_polynomial(rng, n, ring);
    CheckReport rep{"left-inverse", ctx.describe("left-inverse", idx, ring, n),
                    Status::Pass, ""};
    try {
      Box w = cones::box_all(n, ctx.cfg.window);
      Series round = homs::adjoint_apply(phi, homs::substitute(f, phi, w), w);
      auto bad = first_difference(round, f);  // det(Upsilon) = 1
      if (bad) {
        rep.status = Status::Fail;
        rep.witness = *bad;
      }
    } catch (const Error& e) {
      if (!is_precision_code(e.code())) throw;
      rep.status = Status::SkippedPrecision;
      rep.witness = e.what();
    }
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_oracle_agreement(SuiteContext& ctx) {
  auto rng = ctx.rng_for("oracle");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    ParamTuple phi = random_diag1_tuple(rng, n, ring);
    CheckReport rep{"oracle-agreement", ctx.describe("oracle", idx, ring, n),
                    Status::Pass, ""};
    try {
      Box w = cones::box_all(n, ctx.cfg.window);
      ParamTuple direct = homs::inverse_tuple(phi, w);
      ParamTuple oracle = oracle_compositional_inverse(phi, w);
      for (int j = 0; j < n; ++j) {
        auto bad =
            first_difference(direct.components[static_cast<size_t>(j)],
                             oracle.components[static_cast<size_t>(j)]);
        if (bad) {
          rep.status = Status::Fail;
          rep.witness = "component " + std::to_string(j + 1) + " " + *bad;
          break;
        }
      }
    } catch (const Error& e) {
      if (!is_precision_code(e.code()) && e.code() != Errc::SystemNotTriangular)
        throw;
      rep.status = Status::SkippedPrecision;
      rep.witness = e.what();
    }
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_nilpotent_automorphism(SuiteContext& ctx) {
  auto rng = ctx.rng_for("nilpotent-automorphism");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    // t_i + nilpotent Laurent polynomial
    std::vector<Series> comps;
    for (int j = 0; j < n; ++j) {
      std::vector<std::pair<Exponent, Value>> terms{
          {exp_unit(n, j), Value::one(ring)}};
      long long extra = rand_in(rng, 0, 2);
      for (long long k = 0; k < extra; ++k)
        terms.push_back(
            {random_exponent(rng, n, -3, 3), random_nilpotent(rng, ring)});
      comps.push_back(make_series(n, ring, terms));
    }
    CheckReport rep{"nilpotent-automorphism",
                    ctx.describe("nilpotent", idx, ring, n), Status::Pass, ""};
    try {
      ParamTuple phi = validate_tuple(n, comps);
      if (!homs::endo_report(phi).all_invertible()) {
        rep.status = Status::Fail;
        rep.witness = "reported not invertible";
      } else {
        ParamTuple psi =
            homs::inverse_tuple(phi, cones::box_all(n, ctx.cfg.window));
        for (const auto& c : psi.components)
          if (!c.exact) {
            rep.status = Status::Fail;
            rep.witness = "inverse of a nilpotent automorphism is not exact";
            break;
          }
        if (rep.status == Status::Pass) {
          ParamTuple round = compose_tuples(
              psi, phi, cones::box_all(n, cones::kBoxInfinity));
          for (int j = 0; j < n; ++j) {
            auto bad =
                first_difference(round.components[static_cast<size_t>(j)],
                                 variable(n, ring, j));
            if (bad) {
              rep.status = Status::Fail;
              rep.witness = *bad;
              break;
            }
          }
        }
      }
    } catch (const Error& e) {
      if (!is_precision_code(e.code())) throw;
      rep.status = Status::SkippedPrecision;
      rep.witness = e.what();
    }
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_multiplicativity(SuiteContext& ctx) {
  auto rng = ctx.rng_for("multiplicativity");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    ParamTuple phi = random_diag1_tuple(rng, n, ring);
    Series f = random_laurent_polynomial(rng, n, ring);
    Series g = random_laurent_polynomial(rng, n, ring);
    CheckReport rep{"multiplicativity",
                    ctx.describe("multiplicativity", idx, ring, n),
                    Status::Pass, ""};
    try {
      Box w = cones::box_all(n, ctx.cfg.window);
      Series lhs = homs::substitute(mul(f, g), phi, w);
      Series rhs = mul(homs::substitute(f, phi, w), homs::substitute(g, phi, w));
      auto bad = first_difference(lhs, rhs);
      if (bad) {
        rep.status = Status::Fail;
        rep.witness = *bad;
      }
    } catch (const Error& e) {
      if (!is_precision_code(e.code())) throw;
      rep.status = Status::SkippedPrecision;
      rep.witness = e.what();
    }
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_upsilon_monoid(SuiteContext& ctx) {
  auto rng = ctx.rng_for("upsilon-monoid");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n] = ctx.pick(idx);
    ParamTuple theta = random_diag1_tuple(rng, n, ring);
    ParamTuple phi = random_diag1_tuple(rng, n, ring);
    CheckReport rep{"upsilon-monoid",
                    ctx.describe("upsilon-monoid", idx, ring, n), Status::Pass,
                    ""};
    try {
      // compose_tuples asserts Upsilon(theta)*Upsilon(phi) internally
      compose_tuples(theta, phi, cones::box_all(n, ctx.cfg.window));
    } catch (const Error& e) {
      if (e.code() == Errc::Internal) {
        rep.status = Status::Fail;
        rep.witness = e.what();
      } else if (is_precision_code(e.code()) ||
                 e.code() == Errc::NotInvertibleComponent) {
        // composing truncated tuples can lose a component's valuation
        // certification; that is a precision refusal, not a monoid failure
        rep.status = Status::SkippedPrecision;
        rep.witness = e.what();
      } else {
        throw;
      }
    }
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_n1_formula(SuiteContext& ctx) {
  auto rng = ctx.rng_for("n1-formula");
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    auto [ring, n_ignored] = ctx.pick(idx);
    Series phi = random_unit_series_at(rng, 1, ring, {1});
    CheckReport rep = check_n1_formula(phi, {ctx.cfg.window});
    rep.instance = ctx.describe("n1-formula", idx, ring, 1);
    ctx.reports.push_back(std::move(rep));
  }
}

void suite_constant_term(SuiteContext& ctx) {
  auto rng = ctx.rng_for("constant-term");
  RingPtr q = Ring::rationals();
  for (size_t idx = 0; idx < static_cast<size_t>(ctx.cfg.count); ++idx) {
    Series f = random_unit_series_at(rng, 1, q, {-1});
    CheckReport rep = check_constant_term_series(f, {ctx.cfg.window});
    rep.instance = ctx.describe("constant-term", idx, q, 1);
    ctx.reports.push_back(std::move(rep));
  }
}

}  // namespace

std::vector<CheckReport> run_suite(const SuiteConfig& cfg) {
  std::vector<CheckReport> reports;
  SuiteContext ctx{cfg, cfg.rings.empty() ? default_rings() : cfg.rings,
                   reports};
  suite_inversion(ctx);
  suite_identity(ctx);
  suite_valuation(ctx);
  suite_wedge(ctx);
  suite_left_inverse(ctx);
  suite_oracle_agreement(ctx);
  suite_nilpotent_automorphism(ctx);
  suite_multiplicativity(ctx);
  suite_upsilon_monoid(ctx);
  suite_n1_formula(ctx);
  suite_constant_term(ctx);
  std::stable_sort(reports.begin(), reports.end(),
                   [](const CheckReport& a, const CheckReport& b) {
                     return std::tie(a.name, a.instance) <
                            std::tie(b.name, b.instance);
                   });
  return reports;
}

}  // namespace laurent::verify
