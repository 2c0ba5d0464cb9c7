#include "homs.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>

namespace laurent::homs {

using cones::box_contains;
using cones::box_meet;
using cones::ConeEnvelope;
using cones::envelope_join;
using cones::envelope_of_points;
using cones::exp_add;
using cones::exp_neg;
using cones::exp_scale;
using cones::exp_sub;
using cones::exp_to_string;
using cones::exp_zero;
using cones::kBoxInfinity;
using series::add;
using series::coefficient;
using series::FactorDecomposition;
using series::merge_factors;
using series::monomial;
using series::mul;
using series::one_series;
using series::partial_derivative;
using series::project_factor;
using series::scalar_mul;
using series::shift;
using series::truncate;
using series::unit_decompose;
using series::variable;
using series::zero_series;

namespace {

long long add_clamped(long long a, long long b) {
  if (a >= kBoxInfinity || b >= kBoxInfinity) return kBoxInfinity;
  return a + b;
}

Exponent absvec(const Exponent& v) {
  Exponent out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] < 0 ? -v[i] : v[i];
  return out;
}

Exponent ones_vec(int n) { return Exponent(static_cast<size_t>(n), 1); }

std::vector<Exponent> keys_of(const series::CoeffMap& m) {
  std::vector<Exponent> ks;
  ks.reserve(m.size());
  for (const auto& [k, v] : m) ks.push_back(k);
  return ks;
}

/// Componentwise minimum of the stored support, zero for an empty map.
Exponent support_floor(const series::Series& f) {
  Exponent out = exp_zero(f.nvars);
  for (const auto& [k, v] : f.coeffs)
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], k[i]);
  return out;
}

/// Integral solution of U x = v for a square lower-triangular U with positive
/// diagonal (the shape of a square M+ matrix).
std::optional<Exponent> solve_lower(const IntMatrix& u, const Exponent& v) {
  int n = u.cols;
  Exponent x(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    long long s = v[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) s -= u.at(i, j) * x[static_cast<size_t>(j)];
    long long d = u.at(i, i);
    if (s % d != 0) return std::nullopt;
    x[static_cast<size_t>(i)] = s / d;
  }
  return x;
}

/// Inverse of a lower-triangular integer matrix with unit diagonal.
IntMatrix lower_unit_inverse(const IntMatrix& u) {
  int n = u.cols;
  IntMatrix inv(n, n);
  for (int c = 0; c < n; ++c) {
    Exponent e = exp_zero(n);
    e[static_cast<size_t>(c)] = 1;
    auto x = solve_lower(u, e);
    if (!x) fail(Errc::Internal, "unit-diagonal matrix has no integer inverse");
    for (int r = 0; r < n; ++r) inv.at(r, c) = (*x)[static_cast<size_t>(r)];
  }
  return inv;
}

Series det_minor(const std::vector<std::vector<Series>>& d, size_t row,
                 const std::vector<int>& cols, int m, const RingPtr& ring) {
  if (cols.size() == 1) return d[row][static_cast<size_t>(cols[0])];
  Series acc = zero_series(m, ring);
  for (size_t p = 0; p < cols.size(); ++p) {
    std::vector<int> rest;
    for (size_t q = 0; q < cols.size(); ++q)
      if (q != p) rest.push_back(cols[q]);
    Series term = mul(d[row][static_cast<size_t>(cols[p])],
                      det_minor(d, row + 1, rest, m, ring));
    acc = p % 2 == 0 ? add(acc, term) : series::sub(acc, term);
  }
  return acc;
}

/// det(d comps_a / d t_{cols_b}) over the listed target variables (0-based).
Series partials_det(const std::vector<Series>& comps,
                    const std::vector<int>& cols) {
  int m = comps[0].nvars;
  const RingPtr& ring = comps[0].ring;
  std::vector<std::vector<Series>> d(comps.size());
  for (size_t a = 0; a < comps.size(); ++a)
    for (int c : cols) d[a].push_back(partial_derivative(comps[a], c));
  std::vector<int> idx(cols.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return det_minor(d, 0, idx, m, ring);
}

Series tuple_jacobian(const std::vector<Series>& comps) {
  std::vector<int> cols(comps.size());
  for (size_t i = 0; i < cols.size(); ++i) cols[i] = static_cast<int>(i);
  return partials_det(comps, cols);
}

/// Component normalized as c * t^nu * (1 + pos + tprime): tprime is the nil
/// tail divided by the leading monomial (lex-negative support, nilpotent
/// coefficients).
struct NormalComponent {
  Exponent nu;
  Series pos;
  Series tprime;
};

NormalComponent normalize(const FactorDecomposition& fd) {
  NormalComponent nc;
  nc.nu = fd.nu;
  nc.pos = fd.positive_part;
  nc.tprime = shift(scalar_mul(fd.leading_unit.invert_unit(), fd.nil_tail),
                    exp_neg(fd.nu));
  return nc;
}

/// All exponent sums contributed by nilpotent-tail terms across a product of
/// component powers: each term (k, v) appears at most index(v) - 1 times in a
/// non-vanishing coefficient product, so the reachable shifts form the finite
/// set of capped multiset sums.
std::vector<Exponent> nil_offsets(const std::vector<NormalComponent>& comps,
                                  int m) {
  std::set<Exponent, cones::LexLess> sums{exp_zero(m)};
  for (const auto& nc : comps)
    for (const auto& [k, v] : nc.tprime.coeffs) {
      int cap = v.nilpotency().index - 1;
      std::set<Exponent, cones::LexLess> grown = sums;
      Exponent acc = exp_zero(m);
      for (int c = 1; c <= cap; ++c) {
        acc = exp_add(acc, k);
        for (const auto& s : sums) grown.insert(exp_add(s, acc));
      }
      sums = std::move(grown);
    }
  return {sums.begin(), sums.end()};
}

Exponent pointwise_min(const std::vector<Exponent>& points, int m) {
  Exponent out = exp_zero(m);
  for (const auto& p : points)
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], p[i]);
  return out;
}

/// Integer powers of the tuple components, with inversions computed once per
/// component at `inv_box` and everything memoized.
struct PowerProvider {
  const ParamTuple* phi = nullptr;
  Box inv_box;
  std::map<std::pair<int, long long>, Series> memo;
  long long work = 0;

  /// Truncations over skewed cones can force power supports that are orders
  /// of magnitude larger than the requested window; meter the convolution
  /// cost and refuse (as a precision failure) instead of grinding for
  /// minutes on an instance that cannot be certified anyway.
  static constexpr long long kWorkBudget = 4'000'000;

  void charge(size_t a, size_t b) {
    work += static_cast<long long>(a) * static_cast<long long>(b);
    if (work > kWorkBudget)
      fail(Errc::IterationBudgetExceeded,
           "power computation budget exhausted");
  }

  Series metered_mul(const Series& a, const Series& b) {
    charge(a.coeffs.size(), b.coeffs.size());
    return mul(a, b);
  }

  const Series& get(int j, long long k) {
    auto key = std::make_pair(j, k);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    Series r;
    if (k == 0)
      r = one_series(phi->m, phi->ring);
    else if (k > 0)
      r = metered_mul(get(j, k - 1), phi->components[static_cast<size_t>(j)]);
    else if (k == -1)
      r = series::invert(phi->components[static_cast<size_t>(j)], inv_box);
    else
      r = metered_mul(get(j, k + 1), get(j, -1));
    return memo.emplace(key, std::move(r)).first->second;
  }
};

Series substitute_connected(const Series& f, const ParamTuple& phi,
                            const Box& target);
Series adjoint_connected(const ParamTuple& phi, const Series& f,
                         const Box& target);
Value wedge_connected(const ParamTuple& phi, const Series& f,
                      const Box& target);

}  // namespace

ParamTuple validate_tuple(int n, const std::vector<Series>& components) {
  if (components.empty()) fail(Errc::ArityMismatch, "empty tuple");
  if (n != static_cast<int>(components.size()))
    fail(Errc::ArityMismatch, "declared arity differs from component count");
  ParamTuple t;
  t.n = n;
  t.m = components[0].nvars;
  t.ring = components[0].ring;
  t.components = components;
  for (const auto& c : components) {
    if (c.nvars != t.m) fail(Errc::ArityMismatch, "component arities differ");
    if (!c.ring->same_as(*t.ring))
      fail(Errc::DescriptorMismatch, "component rings differ");
  }
  if (n > t.m)
    fail(Errc::ArityExcess,
         "no continuous homomorphisms from " + std::to_string(n) + " into " +
             std::to_string(t.m) + " variables");
  for (int j = 0; j < n; ++j) {
    try {
      t.decompositions.push_back(
          unit_decompose(components[static_cast<size_t>(j)]));
    } catch (const Error& e) {
      if (e.code() == Errc::NotInvertible)
        fail(Errc::NotInvertibleComponent,
             "component " + std::to_string(j + 1) + ": " + e.what());
      throw;
    }
  }
  int count = t.ring->connected_factor_count();
  for (int i = 0; i < count; ++i) {
    IntMatrix u(t.m, n);
    for (int j = 0; j < n; ++j) {
      const Exponent& nu =
          t.decompositions[static_cast<size_t>(j)].factors.at(
              static_cast<size_t>(i)).nu;
      for (int r = 0; r < t.m; ++r) u.at(r, j) = nu[static_cast<size_t>(r)];
    }
    auto sig = cones::is_echelon_positive(u);
    if (!sig)
      fail(Errc::NotMPlus, "valuation matrix on factor " +
                               std::to_string(i + 1) +
                               " is not in M+: " + u.to_string());
    t.factors.push_back({u, *sig});
  }
  return t;
}

ParamTuple monomial_tuple(const RingPtr& ring, const IntMatrix& m_plus) {
  if (!cones::is_echelon_positive(m_plus))
    fail(Errc::NotMPlus, "matrix is not in M+: " + m_plus.to_string());
  std::vector<Series> comps;
  for (int c = 0; c < m_plus.cols; ++c)
    comps.push_back(
        monomial(m_plus.rows, ring, m_plus.column(c), Value::one(ring)));
  return validate_tuple(m_plus.cols, comps);
}

ParamTuple identity_tuple(const RingPtr& ring, int n) {
  return monomial_tuple(ring, cones::identity_matrix(n));
}

ParamTuple project_tuple(const ParamTuple& phi, int i) {
  auto factor_rings = phi.ring->connected_factors();
  ParamTuple out;
  out.n = phi.n;
  out.m = phi.m;
  out.ring = factor_rings.at(static_cast<size_t>(i));
  for (const auto& c : phi.components)
    out.components.push_back(project_factor(c, i));
  out.factors = {phi.factors.at(static_cast<size_t>(i))};
  for (const auto& d : phi.decompositions) {
    UnitDecomposition ud;
    ud.factors = {d.factors.at(static_cast<size_t>(i))};
    out.decompositions.push_back(std::move(ud));
  }
  return out;
}

namespace {

Series substitute_connected(const Series& f, const ParamTuple& phi,
                            const Box& target) {
  int m = phi.m;
  const RingPtr& ring = phi.ring;
  if (f.nvars != phi.n)
    fail(Errc::ArityMismatch, "series arity differs from tuple source arity");
  if (!f.ring->same_as(*ring))
    fail(Errc::DescriptorMismatch, "series ring differs from tuple ring");
  bool components_exact = true;
  for (const auto& c : phi.components) components_exact &= c.exact;
  if (!f.exact && !components_exact)
    fail(Errc::InsufficientPrecision,
         "substituting a truncated series into a truncated tuple is not "
         "supported");
  if (f.exact && f.coeffs.empty()) return zero_series(m, ring);

  std::vector<NormalComponent> comps;
  for (int j = 0; j < phi.n; ++j)
    comps.push_back(
        normalize(phi.decompositions[static_cast<size_t>(j)].factors[0]));

  // inversion box: padded so that products of component powers stay
  // certified on `target` (heuristic; every multiplication re-certifies)
  Exponent pad = exp_zero(m);
  for (int j = 0; j < phi.n; ++j) {
    long long maxabs = 0;
    for (const auto& [l, a] : f.coeffs)
      maxabs = std::max(maxabs, std::llabs(l[static_cast<size_t>(j)]));
    pad = exp_add(pad, exp_scale(maxabs + 1, absvec(comps[static_cast<size_t>(j)].nu)));
  }
  Box inv_box(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i)
    inv_box[static_cast<size_t>(i)] = add_clamped(
        target[static_cast<size_t>(i)], pad[static_cast<size_t>(i)] + 2);

  PowerProvider pp{&phi, inv_box, {}};
  Series acc = zero_series(m, ring);
  for (const auto& [l, a] : f.coeffs) {
    Series prod = pp.get(0, l[0]);
    for (int j = 1; j < phi.n; ++j)
      prod = pp.metered_mul(prod, pp.get(j, l[static_cast<size_t>(j)]));
    acc = add(acc, scalar_mul(a, prod));
  }

  const IntMatrix& u = phi.factors[0].upsilon;

  if (!f.exact) {
    // unknown terms of f land in Upsilon * (unknown support) plus the cone
    // reachable from the component expansions; certify the box against them
    std::vector<Exponent> sums = nil_offsets(comps, m);
    Exponent allowance = pointwise_min(sums, m);
    std::vector<Exponent> reach;
    for (const auto& nc : comps)
      for (const auto& [k, v] : nc.pos.coeffs) reach.push_back(k);
    for (const auto& s : sums) {
      Exponent g = exp_sub(s, allowance);
      if (g != exp_zero(m)) reach.push_back(g);
    }
    cones::UnknownContribution unk{f.envelope.base, f.envelope.generators,
                                   f.guarantee,     &u,
                                   allowance,       reach};
    Exponent image_base = exp_add(u.apply(f.envelope.base), allowance);
    Exponent floor = support_floor(acc);
    for (size_t i = 0; i < floor.size(); ++i)
      floor[i] = std::min(floor[i], image_base[i]);
    Box cand = box_meet(acc.guarantee, target);
    Box certified = cones::certify_box(unk, cand, floor,
                                       cones::ConeSearchBudget{2'000'000});
    acc = truncate(acc, certified);
    acc.exact = false;
    acc.guarantee = certified;
    std::vector<Exponent> image_gens = reach;
    for (const auto& g : f.envelope.generators)
      image_gens.push_back(u.apply(g));
    acc.envelope = envelope_join(acc.envelope,
                                 cones::make_envelope(image_base, image_gens));
  } else if (!acc.exact) {
    acc = truncate(acc, box_meet(acc.guarantee, target));
  }

  // certify the output valuation from the pushforward formula when the
  // input decomposes
  if (!acc.exact) {
    try {
      UnitDecomposition df = unit_decompose(f);
      Exponent nu_out = u.apply(df.factors[0].nu);
      if (box_contains(acc.guarantee, nu_out)) acc.certified_nu = {nu_out};
    } catch (const Error& e) {
      if (e.code() != Errc::NotInvertible &&
          e.code() != Errc::InsufficientPrecision)
        throw;
    }
  }
  return acc;
}

}  // namespace

Series substitute(const Series& f, const ParamTuple& phi, const Box& target) {
  if (!f.ring->same_as(*phi.ring))
    fail(Errc::DescriptorMismatch, "series ring differs from tuple ring");
  int count = phi.ring->connected_factor_count();
  if (count == 1) return substitute_connected(f, phi, target);
  std::vector<Series> parts;
  for (int i = 0; i < count; ++i)
    parts.push_back(
        substitute_connected(project_factor(f, i), project_tuple(phi, i),
                             target));
  return merge_factors(phi.ring, parts);
}

ParamTuple compose_tuples(const ParamTuple& theta, const ParamTuple& phi,
                          const Box& target) {
  if (theta.n != phi.m)
    fail(Errc::ArityMismatch, "tuple arities do not chain");
  if (!theta.ring->same_as(*phi.ring))
    fail(Errc::DescriptorMismatch, "tuple rings differ");
  std::vector<Series> comps;
  for (int i = 0; i < phi.n; ++i)
    comps.push_back(
        substitute(phi.components[static_cast<size_t>(i)], theta, target));
  ParamTuple out = validate_tuple(phi.n, comps);
  for (size_t i = 0; i < out.factors.size(); ++i) {
    IntMatrix expected =
        cones::matrix_mul(theta.factors[i].upsilon, phi.factors[i].upsilon);
    if (!(out.factors[i].upsilon == expected))
      fail(Errc::Internal,
           "Upsilon is not multiplicative on factor " + std::to_string(i + 1));
  }
  return out;
}

Series jacobian(const ParamTuple& phi, const Box& target) {
  if (phi.n != phi.m)
    fail(Errc::ArityMismatch, "Jacobian needs a square tuple");
  Series j = tuple_jacobian(phi.components);
  if (!j.exact) j = truncate(j, box_meet(j.guarantee, target));
  return j;
}

namespace {

Value wedge_connected(const ParamTuple& phi, const Series& f,
                      const Box& target) {
  const cones::SignatureData& sig = phi.factors[0].signature;
  int m = phi.m;
  Series g = substitute(f, phi, target);

  // keep the unique n-subset of dphi's complementary to the dlog rows
  std::vector<int> cols;
  for (int p : sig.pivot_rows) cols.push_back(p - 1);
  g = mul(g, partials_det(phi.components, cols));

  Exponent sh = exp_zero(m);
  for (int q : sig.complement_rows) sh[static_cast<size_t>(q - 1)] -= 1;
  g = shift(g, sh);

  Value r = coefficient(g, Exponent(static_cast<size_t>(m), -1));
  return sig.sign < 0 ? r.neg() : r;
}

}  // namespace

Value wedge_residue(const ParamTuple& phi, const TopForm& w,
                    const Box& target) {
  const Series& f = w.coefficient;
  if (f.nvars != phi.n)
    fail(Errc::ArityMismatch, "form arity differs from tuple source arity");
  if (!f.ring->same_as(*phi.ring))
    fail(Errc::DescriptorMismatch, "form ring differs from tuple ring");
  int count = phi.ring->connected_factor_count();
  if (count == 1) return wedge_connected(phi, f, target);
  std::vector<Value> parts;
  for (int i = 0; i < count; ++i)
    parts.push_back(
        wedge_connected(project_tuple(phi, i), project_factor(f, i), target));
  return Value::merge(phi.ring, parts);
}

namespace {

Series adjoint_connected(const ParamTuple& phi, const Series& f,
                         const Box& target) {
  int m = phi.m;
  const RingPtr& ring = phi.ring;
  if (f.nvars != m)
    fail(Errc::ArityMismatch, "series arity differs from tuple arity");
  const IntMatrix& u = phi.factors[0].upsilon;

  if (f.exact && f.coeffs.empty()) return zero_series(m, ring);

  std::vector<NormalComponent> comps;
  for (int j = 0; j < m; ++j)
    comps.push_back(
        normalize(phi.decompositions[static_cast<size_t>(j)].factors[0]));

  Series jac = tuple_jacobian(phi.components);
  if (jac.exact && jac.coeffs.empty()) return zero_series(m, ring);

  bool components_exact = true;
  for (const auto& c : phi.components) components_exact &= c.exact;

  // candidate exponents: the residue at l is nonzero only when the index
  // (-1,...,-1) is reachable, i.e. Upsilon*(l+1) = offset + 1 + cone point
  // for an offset from supp(f) + supp(J) + nilpotent shifts and a cone point
  // over the positive-part supports (plus envelope generators when inexact)
  std::set<Exponent, cones::LexLess> gen_set;
  for (const auto& nc : comps) {
    for (const auto& [k, v] : nc.pos.coeffs) gen_set.insert(k);
    if (!nc.pos.exact)
      for (const auto& g : nc.pos.envelope.generators) gen_set.insert(g);
  }
  if (!f.exact)
    for (const auto& g : f.envelope.generators) gen_set.insert(g);
  if (!jac.exact)
    for (const auto& g : jac.envelope.generators) gen_set.insert(g);
  std::vector<Exponent> gens(gen_set.begin(), gen_set.end());

  std::vector<Exponent> offs_f =
      f.exact ? keys_of(f.coeffs) : std::vector<Exponent>{f.envelope.base};
  std::vector<Exponent> offs_j =
      jac.exact ? keys_of(jac.coeffs) : std::vector<Exponent>{jac.envelope.base};
  std::vector<Exponent> sums = nil_offsets(comps, m);

  bool exact_mode =
      gens.empty() && f.exact && jac.exact && components_exact;
  Exponent one = ones_vec(m);

  std::set<Exponent, cones::LexLess> candidates;
  std::optional<ConeEnvelope> out_env;
  if (exact_mode) {
    for (const auto& a : offs_f)
      for (const auto& b : offs_j)
        for (const auto& s : sums) {
          Exponent o = exp_add(exp_add(a, b), s);
          auto x = solve_lower(u, exp_add(o, one));
          if (x) candidates.insert(exp_sub(*x, one));
        }
  } else {
    for (int i = 0; i < m; ++i)
      if (u.at(i, i) != 1)
        fail(Errc::InsufficientPrecision,
             "adjoint candidate enumeration needs unit diagonal valuations "
             "when cone generators are present");
    for (long long b : target)
      if (b >= kBoxInfinity)
        fail(Errc::InsufficientPrecision,
             "adjoint over a cone of exponents needs a finite box");
    IntMatrix uinv = lower_unit_inverse(u);
    std::set<Exponent, cones::LexLess> lifted;
    for (const auto& g : gens) lifted.insert(uinv.apply(g));
    std::vector<Exponent> gens_l(lifted.begin(), lifted.end());
    // distinct offset sums only: many (a, b, s) triples share a + b + s
    std::set<Exponent, cones::LexLess> offset_sums;
    for (const auto& a : offs_f)
      for (const auto& b : offs_j)
        for (const auto& s : sums)
          offset_sums.insert(exp_add(exp_add(a, b), s));
    // one search budget for the whole enumeration phase: instances that
    // exhaust it could not have been certified in sensible time
    long long per_sum =
        std::max<long long>(20'000, 4'000'000 / static_cast<long long>(
                                                    offset_sums.size()));
    for (const auto& o : offset_sums) {
      Exponent base_l = exp_sub(uinv.apply(exp_add(o, one)), one);
      ConeEnvelope env = cones::make_envelope(base_l, gens_l);
      out_env = out_env ? envelope_join(*out_env, env) : env;
      cones::enumerate_cone_below(
          base_l, gens_l, {}, target,
          [&](const std::vector<long long>& mult) {
            Exponent p = base_l;
            for (size_t i = 0; i < gens_l.size(); ++i)
              p = exp_add(p, exp_scale(mult[i], gens_l[i]));
            candidates.insert(p);
            return false;
          },
          cones::ConeSearchBudget{per_sum});
    }
  }

  // residues: coefficient at (-1,...,-1) of f * phi^{-l-1} * J
  Box inv_box;
  if (exact_mode) {
    inv_box = cones::box_all(m, kBoxInfinity);
  } else {
    Exponent pad_max = exp_zero(m);
    for (const auto& l : candidates) {
      Exponent pad = exp_zero(m);
      for (int j = 0; j < m; ++j)
        pad = exp_add(pad, exp_scale(std::llabs(l[static_cast<size_t>(j)]) + 1,
                                     absvec(comps[static_cast<size_t>(j)].nu)));
      for (size_t i = 0; i < pad_max.size(); ++i)
        pad_max[i] = std::max(pad_max[i], pad[i]);
    }
    Exponent fmin = support_floor(f);
    Exponent jmin = support_floor(jac);
    inv_box = Box(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
      inv_box[static_cast<size_t>(i)] =
          -1 + pad_max[static_cast<size_t>(i)] -
          std::min(0LL, fmin[static_cast<size_t>(i)]) -
          std::min(0LL, jmin[static_cast<size_t>(i)]) + 2;
  }

  PowerProvider pp{&phi, inv_box, {}};
  series::CoeffMap out;
  Box out_box = exact_mode ? cones::box_all(m, kBoxInfinity) : target;
  Exponent res_idx(static_cast<size_t>(m), -1);

  // candidates are visited in lex order, so consecutive ones share the
  // leading power indices; reuse the partial product across each run and
  // extract only the residue coefficient from the final factor
  Series fj = mul(f, jac);
  std::optional<Exponent> partial_key;
  Series partial;
  for (const auto& l : candidates) {
    if (!exact_mode && !box_contains(out_box, l)) continue;
    Exponent prefix(l.begin(), l.end() - 1);
    if (!partial_key || *partial_key != prefix) {
      partial = fj;
      for (int j = 0; j + 1 < m; ++j)
        partial = pp.metered_mul(partial, pp.get(j, -l[static_cast<size_t>(j)] - 1));
      partial_key = prefix;
    }
    Value c;
    try {
      c = series::pairing(partial, pp.get(m - 1, -l[static_cast<size_t>(m) - 1] - 1),
                          res_idx);
    } catch (const Error& e) {
      if (e.code() != Errc::QueryOutsidePrecision || exact_mode) throw;
      // this coefficient cannot be certified: exclude it from the output
      // box along the cheapest coordinate
      size_t best = 0;
      long long best_loss = out_box[0] - l[0] + 1;
      for (size_t i = 1; i < l.size(); ++i) {
        long long loss = out_box[i] - l[i] + 1;
        if (loss < best_loss) {
          best = i;
          best_loss = loss;
        }
      }
      out_box[best] = l[best] - 1;
      continue;
    }
    if (!c.is_zero()) out.emplace(l, c);
  }

  for (auto it = out.begin(); it != out.end();)
    it = box_contains(out_box, it->first) ? std::next(it) : out.erase(it);

  Series s;
  s.nvars = m;
  s.ring = ring;
  s.coeffs = std::move(out);
  s.exact = exact_mode;
  s.guarantee = out_box;
  if (exact_mode || !out_env)
    s.envelope = envelope_of_points(m, keys_of(s.coeffs));
  else
    s.envelope = envelope_join(*out_env,
                               envelope_of_points(m, keys_of(s.coeffs)));
  return s;
}

}  // namespace

Series adjoint_apply(const ParamTuple& phi, const Series& f,
                     const Box& target) {
  if (phi.n != phi.m)
    fail(Errc::ArityMismatch, "adjoint needs a square tuple");
  if (!f.ring->same_as(*phi.ring))
    fail(Errc::DescriptorMismatch, "series ring differs from tuple ring");
  int count = phi.ring->connected_factor_count();
  if (count == 1) return adjoint_connected(phi, f, target);
  std::vector<Series> parts;
  for (int i = 0; i < count; ++i)
    parts.push_back(
        adjoint_connected(project_tuple(phi, i), project_factor(f, i),
                          target));
  return merge_factors(phi.ring, parts);
}

bool EndoReport::all_invertible() const {
  for (bool b : invertible)
    if (!b) return false;
  return !invertible.empty();
}

EndoReport endo_report(const ParamTuple& phi) {
  if (phi.n != phi.m)
    fail(Errc::ArityMismatch, "endomorphism report needs a square tuple");
  EndoReport rep;
  auto factor_rings = phi.ring->connected_factors();
  std::vector<Value> dvals;
  for (size_t i = 0; i < phi.factors.size(); ++i) {
    auto dd = cones::matrix_det_and_diag_units(phi.factors[i].upsilon);
    rep.invertible.push_back(dd.diag_all_one);
    rep.det.push_back(dd.det);
    rep.d.push_back(phi.factors[i].signature.d);
    dvals.push_back(
        Value::from_int(factor_rings[i], phi.factors[i].signature.d));
  }
  Value d = dvals.size() == 1 ? dvals[0] : Value::merge(phi.ring, dvals);
  rep.injectivity_certified = !d.is_zero_divisor();
  return rep;
}

ParamTuple inverse_tuple(const ParamTuple& phi, const Box& target) {
  EndoReport rep = endo_report(phi);
  if (!rep.all_invertible())
    fail(Errc::NotInvertibleEndomorphism,
         "valuation matrix diagonal is not all 1");
  int n = phi.n;
  std::vector<IntMatrix> uinvs;
  for (const auto& fd : phi.factors)
    uinvs.push_back(lower_unit_inverse(fd.upsilon));
  std::vector<Series> psis;
  for (int j = 0; j < n; ++j) {
    Series psi = adjoint_apply(phi, variable(n, phi.ring, j), target);
    if (!psi.exact) {
      // the inverse components have valuations Upsilon^{-1} e_j
      std::vector<Exponent> cert;
      bool ok = true;
      for (const auto& uinv : uinvs) {
        Exponent nu = uinv.column(j);
        if (!box_contains(psi.guarantee, nu)) {
          ok = false;
          break;
        }
        cert.push_back(nu);
      }
      if (ok) psi.certified_nu = std::move(cert);
    }
    psis.push_back(std::move(psi));
  }
  try {
    return validate_tuple(n, psis);
  } catch (const Error& e) {
    // the endomorphism is invertible (checked above); failing to certify a
    // component's valuation on `target` is a precision problem
    if (e.code() == Errc::NotInvertibleComponent)
      fail(Errc::InsufficientPrecision,
           std::string("inverse components cannot be certified on the "
                       "requested box: ") +
               e.what());
    throw;
  }
}

}  // namespace laurent::homs
