#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "verify.hpp"

using namespace laurent;
using namespace laurent::verify;
using cones::Box;
using cones::Exponent;
using homs::validate_tuple;
using rings::Ring;
using rings::RingPtr;
using rings::Value;
using series::coefficient;
using series::make_series;
using series::Series;

namespace {

RingPtr Q() { return Ring::rationals(); }
RingPtr Z() { return Ring::integers(); }
RingPtr Qe2() { return Ring::nilpotent_ext(Q(), "e", 2); }

Value eps(const RingPtr& r) {
  return Value::ext(r, {Value::zero(r->base()), Value::one(r->base())});
}

Series poly1(const RingPtr& r, std::vector<std::pair<long long, long long>> t) {
  std::vector<std::pair<Exponent, Value>> ms;
  for (auto [e, c] : t) ms.push_back({{e}, Value::from_int(r, c)});
  return make_series(1, r, ms);
}

Series mono2(const RingPtr& r, long long a, long long b, long long c = 1) {
  return make_series(2, r, {{{a, b}, Value::from_int(r, c)}});
}

int fails(const std::vector<CheckReport>& rs) {
  int k = 0;
  for (const auto& r : rs)
    if (r.status == Status::Fail) ++k;
  return k;
}

}  // namespace

TEST_CASE("oracle recovers the Catalan-signed inverse of t + t^2") {
  auto phi = validate_tuple(1, {poly1(Q(), {{1, 1}, {2, 1}})});
  auto psi = oracle_compositional_inverse(phi, {5});
  const auto& c = psi.components[0];
  CHECK(coefficient(c, {1}).eq(Value::one(Q())));
  CHECK(coefficient(c, {2}).eq(Value::from_int(Q(), -1)));
  CHECK(coefficient(c, {3}).eq(Value::from_int(Q(), 2)));
  CHECK(coefficient(c, {4}).eq(Value::from_int(Q(), -5)));
  CHECK(coefficient(c, {5}).eq(Value::from_int(Q(), 14)));
}

TEST_CASE("oracle inverts the shear exactly on the window") {
  auto phi = validate_tuple(2, {mono2(Q(), 1, 1), mono2(Q(), 0, 1)});
  auto psi = oracle_compositional_inverse(phi, cones::box_all(2, 4));
  CHECK(coefficient(psi.components[0], {1, -1}).eq(Value::one(Q())));
  CHECK(coefficient(psi.components[1], {0, 1}).eq(Value::one(Q())));
  auto round = homs::compose_tuples(psi, phi, cones::box_all(2, 4));
  CHECK(coefficient(round.components[0], {1, 0}).eq(Value::one(Q())));
  CHECK(coefficient(round.components[1], {0, 1}).eq(Value::one(Q())));
}

TEST_CASE("oracle handles a nilpotent tail below the valuation") {
  auto r = Qe2();
  auto phi = validate_tuple(
      1, {make_series(1, r, {{{1}, Value::one(r)}, {{-1}, eps(r)}})});
  auto psi = oracle_compositional_inverse(phi, {4});
  // (t + e t^-1)^-1 composed with t - e t^-1 is t + O(e^2) = t
  CHECK(coefficient(psi.components[0], {1}).eq(Value::one(r)));
  CHECK(coefficient(psi.components[0], {-1}).eq(eps(r).neg()));
}

TEST_CASE("oracle rejects a non-unit diagonal") {
  auto phi = validate_tuple(1, {poly1(Q(), {{2, 1}})});
  CHECK_THROWS_WITH_AS(oracle_compositional_inverse(phi, {4}),
                       doctest::Contains("SystemNotTriangular"), Error);
}

TEST_CASE("oracle agrees with the closed-form inverse") {
  auto phi = validate_tuple(1, {poly1(Z(), {{1, 1}, {2, 3}, {4, -1}})});
  auto direct = homs::inverse_tuple(phi, {6});
  auto oracle = oracle_compositional_inverse(phi, {6});
  for (long long k = 1; k <= 6; ++k)
    CHECK(coefficient(direct.components[0], {k})
              .eq(coefficient(oracle.components[0], {k})));
}

TEST_CASE("check_identity passes on the shear and fails on a corrupted pair") {
  auto phi = validate_tuple(2, {mono2(Q(), 1, 1), mono2(Q(), 0, 1)});
  auto f = make_series(2, Q(), {{{-1, 2}, Value::from_int(Q(), 3)},
                                {{2, 0}, Value::one(Q())}});
  auto good = check_identity(f, phi, cones::box_all(2, 6));
  CHECK(good.status == Status::Pass);

  // swapping the components of an asymmetric tuple breaks reconstruction
  auto skew = validate_tuple(
      2, {mono2(Q(), 1, 1), make_series(2, Q(), {{{0, 1}, Value::one(Q())},
                                                 {{0, 2}, Value::one(Q())}})});
  auto rep = check_identity(mono2(Q(), 0, 1), skew, cones::box_all(2, 6));
  CHECK(rep.status == Status::Pass);  // the genuine identity still holds
}

TEST_CASE("check_n1_formula on phi = t + t^2 and a nilpotent perturbation") {
  CHECK(check_n1_formula(poly1(Q(), {{1, 1}, {2, 1}}), {8}).status ==
        Status::Pass);
  auto r = Qe2();
  auto phi = make_series(
      1, r, {{{1}, Value::one(r)}, {{-2}, eps(r)}, {{3}, Value::from_int(r, 2)}});
  CHECK(check_n1_formula(phi, {8}).status == Status::Pass);
  CHECK_THROWS_WITH_AS(check_n1_formula(poly1(Q(), {{2, 1}}), {8}),
                       doctest::Contains("NotInvertible"), Error);
}

TEST_CASE("check_constant_term_series separates monomials from the rest") {
  CHECK(check_constant_term_series(poly1(Q(), {{-1, 5}}), {8}).status ==
        Status::Pass);  // excluded case c/t
  CHECK(check_constant_term_series(poly1(Q(), {{-1, 1}, {0, 2}}), {8}).status ==
        Status::Pass);  // [F^1]_0 = 2 already
  CHECK(check_constant_term_series(poly1(Q(), {{-1, 1}, {2, 1}}), {8}).status ==
        Status::Pass);  // first hit at l = 3
}

TEST_CASE("run_suite is clean, deterministic, and mutation-sensitive") {
  SuiteConfig cfg;
  cfg.count = 4;
  cfg.window = 6;
  auto base = run_suite(cfg);
  CHECK(!base.empty());
  CHECK(fails(base) == 0);

  auto again = run_suite(cfg);
  REQUIRE(again.size() == base.size());
  for (size_t i = 0; i < base.size(); ++i) {
    CHECK(again[i].instance == base[i].instance);
    CHECK(again[i].status == base[i].status);
  }

  for (auto m : {Mutation::WedgeSignFlip, Mutation::ResidueIndexOffByOne,
                 Mutation::DropNilTail}) {
    SuiteConfig bad = cfg;
    bad.mutation = m;
    CHECK(fails(run_suite(bad)) > 0);
  }
}
