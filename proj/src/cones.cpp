#include "cones.hpp"

#include <algorithm>
#include <set>

namespace laurent::cones {

Ordering lex_compare(const Exponent& a, const Exponent& b) {
  if (a.size() != b.size()) fail(Errc::ArityMismatch, "exponent arity differs");
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return Ordering::Less;
    if (a[i] > b[i]) return Ordering::Greater;
  }
  return Ordering::Equal;
}

bool lex_less(const Exponent& a, const Exponent& b) {
  return lex_compare(a, b) == Ordering::Less;
}

bool lex_positive(const Exponent& k) {
  return lex_compare(k, exp_zero(static_cast<int>(k.size()))) ==
         Ordering::Greater;
}

Exponent exp_add(const Exponent& a, const Exponent& b) {
  Exponent r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Exponent exp_sub(const Exponent& a, const Exponent& b) {
  Exponent r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Exponent exp_neg(const Exponent& a) {
  Exponent r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

Exponent exp_scale(long long c, const Exponent& a) {
  Exponent r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

Exponent exp_zero(int n) { return Exponent(static_cast<size_t>(n), 0); }

Exponent exp_unit(int n, int i) {
  Exponent r = exp_zero(n);
  r[static_cast<size_t>(i)] = 1;
  return r;
}

std::string exp_to_string(const Exponent& k) {
  std::string s = "(";
  for (size_t i = 0; i < k.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(k[i]);
  }
  return s + ")";
}

// ---------------------------------------------------------------------------

bool box_contains(const Box& box, const Exponent& k) {
  if (box.size() != k.size()) fail(Errc::ArityMismatch, "box arity differs");
  for (size_t i = 0; i < box.size(); ++i)
    if (k[i] > box[i]) return false;
  return true;
}

Box box_meet(const Box& a, const Box& b) {
  Box r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = std::min(a[i], b[i]);
  return r;
}

Box box_all(int n, long long bound) { return Box(static_cast<size_t>(n), bound); }

bool box_is_surrogate(const Box& box) {
  return std::all_of(box.begin(), box.end(),
                     [](long long v) { return v >= kBoxInfinity; });
}

std::string box_to_string(const Box& box) {
  std::string s;
  for (size_t i = 0; i < box.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(box[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------

ConeEnvelope make_envelope(Exponent base, std::vector<Exponent> generators) {
  std::set<Exponent> uniq;
  for (auto& g : generators) {
    if (g.size() != base.size())
      fail(Errc::ArityMismatch, "generator arity differs from base");
    if (lex_compare(g, exp_zero(static_cast<int>(g.size()))) ==
        Ordering::Equal)
      continue;
    if (!lex_positive(g))
      fail(Errc::Internal, "lex-nonpositive envelope generator");
    uniq.insert(g);
  }
  return ConeEnvelope{std::move(base), {uniq.begin(), uniq.end()}};
}

ConeEnvelope envelope_sum(const ConeEnvelope& a, const ConeEnvelope& b) {
  std::vector<Exponent> gens = a.generators;
  gens.insert(gens.end(), b.generators.begin(), b.generators.end());
  return make_envelope(exp_add(a.base, b.base), std::move(gens));
}

ConeEnvelope envelope_join(const ConeEnvelope& a, const ConeEnvelope& b) {
  const ConeEnvelope& lo = lex_less(b.base, a.base) ? b : a;
  const ConeEnvelope& hi = lex_less(b.base, a.base) ? a : b;
  std::vector<Exponent> gens = a.generators;
  gens.insert(gens.end(), b.generators.begin(), b.generators.end());
  gens.push_back(exp_sub(hi.base, lo.base));
  return make_envelope(lo.base, std::move(gens));
}

ConeEnvelope envelope_of_points(int n, const std::vector<Exponent>& points) {
  if (points.empty()) return make_envelope(exp_zero(n), {});
  Exponent base = points[0];
  for (const auto& p : points)
    if (lex_less(p, base)) base = p;
  std::vector<Exponent> gens;
  for (const auto& p : points) gens.push_back(exp_sub(p, base));
  for (int i = 0; i < n; ++i) gens.push_back(exp_unit(n, i));
  return make_envelope(std::move(base), std::move(gens));
}

// ---------------------------------------------------------------------------

namespace {

int generator_level(const Exponent& g) {
  for (size_t i = 0; i < g.size(); ++i)
    if (g[i] != 0) return static_cast<int>(i);
  return -1;
}

struct ConeSearch {
  const std::vector<Exponent>& gens;
  const std::vector<long long>& caps;
  bool equality;
  const std::function<bool(const std::vector<long long>&)>& visit;
  long long nodes_left;

  std::vector<std::vector<int>> by_level;  // gen indices per level
  std::vector<long long> mult;
  Exponent residual;

  bool found = false;

  void tick() {
    if (--nodes_left < 0)
      fail(Errc::IterationBudgetExceeded, "cone enumeration budget exhausted");
  }

  // Enumerate multiplicities of the level's generators against the level
  // coordinate budget, then descend a level.
  bool level_rec(int level) {
    tick();
    int n = static_cast<int>(residual.size());
    if (level == n) {
      found = visit(mult);
      return found;
    }
    long long budget = residual[static_cast<size_t>(level)];
    if (budget < 0) return false;
    return gen_rec(level, 0, budget);
  }

  bool gen_rec(int level, size_t pos, long long budget) {
    tick();
    size_t n = residual.size();
    const auto& idxs = by_level[static_cast<size_t>(level)];
    if (pos == idxs.size()) {
      if (equality && budget != 0) return false;
      return level_rec(level + 1);
    }
    int j = idxs[pos];
    const Exponent& g = gens[static_cast<size_t>(j)];
    long long v = g[static_cast<size_t>(level)];  // > 0
    long long maxm = budget / v;
    if (caps[static_cast<size_t>(j)] >= 0)
      maxm = std::min(maxm, caps[static_cast<size_t>(j)]);
    for (long long m = 0; m <= maxm; ++m) {
      mult[static_cast<size_t>(j)] = m;
      if (m > 0)
        for (size_t i = static_cast<size_t>(level); i < n; ++i)
          residual[i] -= g[i];
      if (gen_rec(level, pos + 1, budget - m * v)) {
        // restore before unwinding so callers can keep enumerating
        for (size_t i = static_cast<size_t>(level); i < n; ++i)
          residual[i] += m * g[i];
        mult[static_cast<size_t>(j)] = 0;
        return true;
      }
    }
    for (size_t i = static_cast<size_t>(level); i < n; ++i)
      residual[i] += maxm * g[i];
    mult[static_cast<size_t>(j)] = 0;
    return false;
  }
};

bool run_cone_search(const Exponent& base, const std::vector<Exponent>& gens,
                     const std::vector<long long>& caps, const Exponent& target,
                     bool equality,
                     const std::function<bool(const std::vector<long long>&)>& visit,
                     ConeSearchBudget budget) {
  int n = static_cast<int>(base.size());
  std::vector<long long> all_caps =
      caps.empty() ? std::vector<long long>(gens.size(), -1) : caps;
  if (all_caps.size() != gens.size())
    fail(Errc::Internal, "cap list size mismatch");
  ConeSearch s{gens, all_caps, equality, visit, budget.nodes, {}, {}, {}};
  s.by_level.assign(static_cast<size_t>(n), {});
  for (size_t j = 0; j < gens.size(); ++j) {
    int lv = generator_level(gens[j]);
    if (lv < 0) fail(Errc::Internal, "zero generator in cone search");
    s.by_level[static_cast<size_t>(lv)].push_back(static_cast<int>(j));
  }
  s.mult.assign(gens.size(), 0);
  s.residual = exp_sub(target, base);
  return s.level_rec(0);
}

}  // namespace

bool enumerate_cone_equal(
    const Exponent& base, const std::vector<Exponent>& gens,
    const std::vector<long long>& caps, const Exponent& target,
    const std::function<bool(const std::vector<long long>&)>& visit,
    ConeSearchBudget budget) {
  return run_cone_search(base, gens, caps, target, true, visit, budget);
}

bool enumerate_cone_below(
    const Exponent& base, const std::vector<Exponent>& gens,
    const std::vector<long long>& caps, const Exponent& target,
    const std::function<bool(const std::vector<long long>&)>& visit,
    ConeSearchBudget budget) {
  return run_cone_search(base, gens, caps, target, false, visit, budget);
}

bool envelope_member(const Exponent& k, const ConeEnvelope& env) {
  if (k.size() != env.base.size())
    fail(Errc::ArityMismatch, "exponent arity differs from envelope");
  return enumerate_cone_equal(env.base, env.generators, {}, k,
                              [](const std::vector<long long>&) { return true; });
}

bool cone_has_unknown_below(const ConeEnvelope& env, const Box& known,
                            const Exponent& bound, ConeSearchBudget budget) {
  int n = env.arity();
  long long nodes = budget.nodes;
  auto tick = [&nodes]() {
    if (--nodes < 0)
      fail(Errc::IterationBudgetExceeded, "region search budget exhausted");
  };

  std::vector<std::vector<int>> by_level(static_cast<size_t>(n));
  for (size_t g = 0; g < env.generators.size(); ++g)
    by_level[static_cast<size_t>(generator_level(env.generators[g]))].push_back(
        static_cast<int>(g));

  for (int j = 0; j < n; ++j) {
    // region: p_i = bound_i for i < j and p_j <= bound_j - 1; coordinates
    // past j are unconstrained within the region
    bool have_free = false;
    for (int lv = j + 1; lv < n; ++lv)
      if (!by_level[static_cast<size_t>(lv)].empty()) have_free = true;

    Exponent partial = env.base;
    bool found = false;

    // enumerate multiplicities of the generators at levels 0..j
    std::function<bool(int, size_t)> rec = [&](int level, size_t pos) -> bool {
      tick();
      if (level > j) {
        if (have_free) return true;  // a free generator escapes the box
        return !box_contains(known, partial);
      }
      long long used = partial[static_cast<size_t>(level)];
      long long limit = bound[static_cast<size_t>(level)] - (level == j ? 1 : 0);
      const auto& idxs = by_level[static_cast<size_t>(level)];
      if (pos == idxs.size()) {
        if (level < j && used != limit) return false;
        if (level == j && used > limit) return false;
        return rec(level + 1, 0);
      }
      const Exponent& g = env.generators[static_cast<size_t>(idxs[pos])];
      long long v = g[static_cast<size_t>(level)];
      long long maxm = (limit - used) / v;
      if (maxm < 0) maxm = 0;
      for (long long m = 0; m <= maxm; ++m) {
        if (m > 0)
          for (size_t i = static_cast<size_t>(level); i < g.size(); ++i)
            partial[i] += g[i];
        if (rec(level, pos + 1)) return true;
      }
      for (size_t i = static_cast<size_t>(level); i < g.size(); ++i)
        partial[i] -= maxm * g[i];
      return false;
    };
    if (rec(0, 0)) return true;
  }
  return false;
}

std::optional<Exponent> unknown_witness(const UnknownContribution& u,
                                        const Box& candidate,
                                        ConeSearchBudget budget) {
  const IntMatrix* t = u.transform;
  auto lift = [&](const Exponent& v) { return t ? t->apply(v) : v; };
  Exponent base = exp_add(lift(u.a_base), u.c_base);
  std::vector<Exponent> gens;
  for (const auto& g : u.a_gens) gens.push_back(lift(g));
  gens.insert(gens.end(), u.c_gens.begin(), u.c_gens.end());

  std::optional<Exponent> witness;
  enumerate_cone_below(
      base, gens, {}, candidate,
      [&](const std::vector<long long>& m) {
        Exponent a = u.a_base;
        for (size_t i = 0; i < u.a_gens.size(); ++i)
          a = exp_add(a, exp_scale(m[i], u.a_gens[i]));
        if (box_contains(u.a_known, a)) return false;
        Exponent w = base;
        for (size_t i = 0; i < gens.size(); ++i)
          w = exp_add(w, exp_scale(m[i], gens[i]));
        witness = w;
        return true;
      },
      budget);
  return witness;
}

Box certify_box(const UnknownContribution& u, Box candidate,
                const Exponent& floor_point, ConeSearchBudget budget) {
  while (true) {
    auto w = unknown_witness(u, candidate, budget);
    if (!w) return candidate;
    // exclude the witness by cutting the coordinate losing least box
    int best = -1;
    long long best_loss = 0;
    for (size_t c = 0; c < candidate.size(); ++c) {
      long long new_cut = (*w)[c] - 1;
      if (new_cut < floor_point[c]) continue;
      long long loss = candidate[c] - new_cut;
      if (best < 0 || loss < best_loss) {
        best = static_cast<int>(c);
        best_loss = loss;
      }
    }
    if (best < 0)
      fail(Errc::EmptyGuarantee, "no certifiable box remains at " +
                                     exp_to_string(*w));
    candidate[static_cast<size_t>(best)] = (*w)[static_cast<size_t>(best)] - 1;
  }
}

// ---------------------------------------------------------------------------

Exponent IntMatrix::column(int c) const {
  Exponent col(static_cast<size_t>(rows));
  for (int r = 0; r < rows; ++r) col[static_cast<size_t>(r)] = at(r, c);
  return col;
}

Exponent IntMatrix::apply(const Exponent& l) const {
  if (static_cast<int>(l.size()) != cols)
    fail(Errc::ArityMismatch, "matrix/vector arity mismatch");
  Exponent out(static_cast<size_t>(rows), 0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<size_t>(r)] += at(r, c) * l[static_cast<size_t>(c)];
  return out;
}

std::string IntMatrix::to_string() const {
  std::string s = "[";
  for (int r = 0; r < rows; ++r) {
    if (r) s += ", ";
    s += "[";
    for (int c = 0; c < cols; ++c) {
      if (c) s += ", ";
      s += std::to_string(at(r, c));
    }
    s += "]";
  }
  return s + "]";
}

IntMatrix matrix_mul(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols != b.rows) fail(Errc::ArityMismatch, "matrix shape mismatch");
  IntMatrix out(a.rows, b.cols);
  for (int r = 0; r < a.rows; ++r)
    for (int c = 0; c < b.cols; ++c)
      for (int k = 0; k < a.cols; ++k) out.at(r, c) += a.at(r, k) * b.at(k, c);
  return out;
}

IntMatrix identity_matrix(int n) {
  IntMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

std::optional<SignatureData> is_echelon_positive(const IntMatrix& m) {
  SignatureData sig;
  int prev = 0;
  for (int c = 0; c < m.cols; ++c) {
    int pivot = -1;
    for (int r = 0; r < m.rows; ++r) {
      if (m.at(r, c) != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) return std::nullopt;               // zero column
    if (pivot + 1 <= prev) return std::nullopt;       // pivots must increase
    if (m.at(pivot, c) <= 0) return std::nullopt;     // positive leading entry
    prev = pivot + 1;
    sig.pivot_rows.push_back(pivot + 1);
    sig.leading.push_back(m.at(pivot, c));
    sig.d *= m.at(pivot, c);
  }
  std::set<int> pivots(sig.pivot_rows.begin(), sig.pivot_rows.end());
  for (int r = 1; r <= m.rows; ++r)
    if (!pivots.count(r)) sig.complement_rows.push_back(r);
  std::vector<int> perm = sig.pivot_rows;
  perm.insert(perm.end(), sig.complement_rows.begin(),
              sig.complement_rows.end());
  int inversions = 0;
  for (size_t i = 0; i < perm.size(); ++i)
    for (size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) ++inversions;
  sig.sign = inversions % 2 == 0 ? 1 : -1;
  return sig;
}

std::optional<Exponent> order_violation_witness(const IntMatrix& m,
                                                long long bound) {
  int n = m.cols;
  Exponent l(static_cast<size_t>(n), -bound);
  while (true) {
    if (lex_positive(l) && !lex_positive(m.apply(l))) return l;
    int i = 0;
    while (i < n && l[static_cast<size_t>(i)] == bound) {
      l[static_cast<size_t>(i)] = -bound;
      ++i;
    }
    if (i == n) return std::nullopt;
    ++l[static_cast<size_t>(i)];
  }
}

bool order_preservation_oracle(const IntMatrix& m, long long bound) {
  return !order_violation_witness(m, bound).has_value();
}

DetDiagReport matrix_det_and_diag_units(const IntMatrix& m) {
  if (m.rows != m.cols) fail(Errc::NotEchelon, "matrix is not square");
  auto sig = is_echelon_positive(m);
  if (!sig) fail(Errc::NotEchelon, "matrix is not in M+");
  DetDiagReport rep;
  rep.diag_all_one = true;
  for (int i = 0; i < m.rows; ++i) {
    rep.det *= m.at(i, i);
    if (m.at(i, i) != 1) rep.diag_all_one = false;
  }
  return rep;
}

}  // namespace laurent::cones
