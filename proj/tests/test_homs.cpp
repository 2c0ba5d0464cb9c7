#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "homs.hpp"

using namespace laurent;
using namespace laurent::homs;
using cones::Box;
using cones::Exponent;
using cones::IntMatrix;
using rings::Ring;
using rings::RingPtr;
using rings::Value;
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

IntMatrix mat22(long long a, long long b, long long c, long long d) {
  IntMatrix m(2, 2);
  m.at(0, 0) = a;
  m.at(0, 1) = b;
  m.at(1, 0) = c;
  m.at(1, 1) = d;
  return m;
}

ParamTuple shear2(const RingPtr& r) {  // (t1*t2, t2)
  return validate_tuple(2, {mono2(r, 1, 1), mono2(r, 0, 1)});
}

}  // namespace

TEST_CASE("validate_tuple assembles Upsilon and the signature") {
  auto phi = shear2(Q());
  CHECK(phi.n == 2);
  CHECK(phi.m == 2);
  CHECK(phi.factors.size() == 1);
  CHECK(phi.factors[0].upsilon == mat22(1, 0, 1, 1));
  CHECK(phi.factors[0].signature.pivot_rows == std::vector<int>{1, 2});
  CHECK(phi.factors[0].signature.sign == 1);
  CHECK(phi.factors[0].signature.d == 1);

  auto sq = validate_tuple(1, {poly1(Q(), {{2, 1}})});
  CHECK(sq.factors[0].upsilon.at(0, 0) == 2);
}

TEST_CASE("validate_tuple rejections") {
  // n > m has no continuous homomorphisms
  CHECK_THROWS_WITH_AS(
      validate_tuple(2, {poly1(Q(), {{1, 1}}), poly1(Q(), {{-1, 1}})}),
      doctest::Contains("ArityExcess"), Error);
  // 2 + t is not invertible over Z
  CHECK_THROWS_WITH_AS(validate_tuple(1, {poly1(Z(), {{0, 2}, {1, 1}})}),
                       doctest::Contains("NotInvertibleComponent"), Error);
  // equal valuations cannot be in echelon form
  CHECK_THROWS_WITH_AS(validate_tuple(2, {mono2(Q(), 1, 0), mono2(Q(), 1, 0)}),
                       doctest::Contains("NotMPlus"), Error);
}

TEST_CASE("monomial tuples read columns off the matrix") {
  auto id2 = identity_tuple(Q(), 2);
  CHECK(series::exact_equal(id2.components[0], mono2(Q(), 1, 0)));
  CHECK(series::exact_equal(id2.components[1], mono2(Q(), 0, 1)));

  auto m = mat22(1, 0, 2, 3);  // columns (1,2) and (0,3)
  auto phi = monomial_tuple(Q(), m);
  CHECK(series::exact_equal(phi.components[0], mono2(Q(), 1, 2)));
  CHECK(series::exact_equal(phi.components[1], mono2(Q(), 0, 3)));
  CHECK(phi.factors[0].upsilon == m);

  CHECK_THROWS_WITH_AS(monomial_tuple(Q(), mat22(1, 2, 0, 3)),
                       doctest::Contains("NotMPlus"), Error);
}

TEST_CASE("substitute on exact data") {
  auto phi = shear2(Q());
  auto t1 = mono2(Q(), 1, 0);
  auto img = substitute(t1, phi, cones::box_all(2, cones::kBoxInfinity));
  CHECK(series::exact_equal(img, mono2(Q(), 1, 1)));

  // identity tuple is the identity substitution
  auto f = make_series(2, Q(), {{{-1, 2}, Value::from_int(Q(), 3)},
                                {{0, 0}, Value::one(Q())}});
  auto back = substitute(f, identity_tuple(Q(), 2),
                         cones::box_all(2, cones::kBoxInfinity));
  CHECK(series::exact_equal(back, f));
}

TEST_CASE("substitute with a negative power matches inversion") {
  auto phi = validate_tuple(1, {poly1(Q(), {{1, 1}, {2, 1}})});  // t + t^2
  auto img = substitute(poly1(Q(), {{-1, 1}}), phi, {2});
  CHECK(cones::box_contains(img.guarantee, {2}));
  // 1/(t + t^2) = t^-1 - 1 + t - t^2 + ...
  CHECK(series::coefficient(img, {-1}).eq(Value::one(Q())));
  CHECK(series::coefficient(img, {0}).eq(Value::from_int(Q(), -1)));
  CHECK(series::coefficient(img, {1}).eq(Value::one(Q())));
  CHECK(series::coefficient(img, {2}).eq(Value::from_int(Q(), -1)));
}

TEST_CASE("substitution is multiplicative on certified windows") {
  auto phi = validate_tuple(1, {poly1(Q(), {{1, 1}, {3, -2}})});
  auto f = poly1(Q(), {{-1, 1}, {0, 2}});
  auto g = poly1(Q(), {{1, 1}, {2, 5}});
  Box n{6};
  auto lhs = substitute(series::mul(f, g), phi, n);
  auto rhs = series::mul(substitute(f, phi, n), substitute(g, phi, n));
  CHECK(series::agree_on_common_window(lhs, rhs));
}

TEST_CASE("substituting a truncated series certifies the image box") {
  auto phi = validate_tuple(1, {poly1(Q(), {{1, 1}, {2, 1}})});
  auto f = series::truncate(poly1(Q(), {{0, 1}, {1, 1}, {5, 7}}), {3});
  auto img = substitute(f, phi, {3});
  CHECK_FALSE(img.exact);
  // unknown terms of f sit above t^3 and land above t^3 under Upsilon = [1]
  CHECK(cones::box_contains(img.guarantee, {3}));
  CHECK(series::coefficient(img, {0}).eq(Value::one(Q())));
  CHECK(series::coefficient(img, {1}).eq(Value::one(Q())));  // from f's t
  CHECK(series::coefficient(img, {2}).eq(Value::one(Q())));  // from (t+t^2)
  CHECK(img.certified_nu == std::vector<Exponent>{{0}});
}

TEST_CASE("compose_tuples multiplies the matrices") {
  auto theta = validate_tuple(1, {poly1(Q(), {{3, 1}})});
  auto phi = validate_tuple(1, {poly1(Q(), {{2, 1}})});
  auto comp = compose_tuples(theta, phi, cones::box_all(1, cones::kBoxInfinity));
  CHECK(series::exact_equal(comp.components[0], poly1(Q(), {{6, 1}})));
  CHECK(comp.factors[0].upsilon.at(0, 0) == 6);

  auto shear = shear2(Q());
  auto unshear = validate_tuple(2, {mono2(Q(), 1, -1), mono2(Q(), 0, 1)});
  auto idc = compose_tuples(shear, unshear,
                            cones::box_all(2, cones::kBoxInfinity));
  CHECK(series::exact_equal(idc.components[0], mono2(Q(), 1, 0)));
  CHECK(series::exact_equal(idc.components[1], mono2(Q(), 0, 1)));
}

TEST_CASE("jacobian by cofactor expansion") {
  Box big = cones::box_all(2, cones::kBoxInfinity);
  CHECK(series::exact_equal(jacobian(shear2(Q()), big), mono2(Q(), 0, 1)));
  CHECK(series::exact_equal(
      jacobian(validate_tuple(1, {poly1(Q(), {{1, 1}, {2, 1}})}), {10}),
      poly1(Q(), {{0, 1}, {1, 2}})));
  CHECK(series::exact_equal(jacobian(identity_tuple(Q(), 2), big),
                            series::one_series(2, Q())));
}

TEST_CASE("wedge residue in equal and excess arity") {
  // identity: res(t^-1 dt) = 1
  auto id1 = identity_tuple(Q(), 1);
  series::TopForm w{poly1(Q(), {{-1, 1}})};
  CHECK(wedge_residue(id1, w, {4}).eq(Value::one(Q())));

  // phi = (t^2): res(phi(w)) = d(phi) res(w) = 2
  auto sq = validate_tuple(1, {poly1(Q(), {{2, 1}})});
  CHECK(wedge_residue(sq, w, {4}).eq(Value::from_int(Q(), 2)));

  // n=1 into m=2, phi = (t2): sign of (p,q)=(2,1) is -1
  auto emb = validate_tuple(1, {mono2(Q(), 0, 1)});
  CHECK(wedge_residue(emb, w, {4, 4}).eq(Value::from_int(Q(), -1)));
}

TEST_CASE("residue invariance for an invertible shear") {
  auto phi = shear2(Q());
  auto f = make_series(2, Q(), {{{-1, -1}, Value::from_int(Q(), 5)},
                                {{-2, 1}, Value::from_int(Q(), 3)},
                                {{0, 0}, Value::from_int(Q(), 7)}});
  series::TopForm w{f};
  CHECK(wedge_residue(phi, w, {4, 4}).eq(series::residue(w)));
}

TEST_CASE("adjoint of the identity is the identity") {
  auto id1 = identity_tuple(Q(), 1);
  auto f = poly1(Q(), {{-2, 3}, {0, 1}, {5, -4}});
  auto g = adjoint_apply(id1, f, cones::box_all(1, cones::kBoxInfinity));
  CHECK(series::exact_equal(f, g));
}

TEST_CASE("adjoint of t^2 doubles the right exponents") {
  auto sq = validate_tuple(1, {poly1(Q(), {{2, 1}})});
  auto g = adjoint_apply(sq, poly1(Q(), {{2, 1}}),
                         cones::box_all(1, cones::kBoxInfinity));
  CHECK(g.exact);
  CHECK(series::exact_equal(g, poly1(Q(), {{1, 2}})));  // 2t

  // odd exponents pair to zero
  auto z = adjoint_apply(sq, poly1(Q(), {{3, 1}}),
                         cones::box_all(1, cones::kBoxInfinity));
  CHECK(series::is_zero(z));
}

TEST_CASE("left inverse: adjoint after substitute is det(Upsilon) id") {
  auto sq = validate_tuple(1, {poly1(Q(), {{2, 1}})});
  Box big = cones::box_all(1, cones::kBoxInfinity);
  for (long long k = -2; k <= 2; ++k) {
    auto f = poly1(Q(), {{k, 1}});
    auto round = adjoint_apply(sq, substitute(f, sq, big), big);
    CHECK(series::exact_equal(round, poly1(Q(), {{k, 2}})));
  }
}

TEST_CASE("adjoint over a nilpotent perturbation is exact") {
  auto r = Qe2();
  auto phi = validate_tuple(
      1, {make_series(1, r, {{{1}, Value::one(r)}, {{-1}, eps(r)}})});
  auto g = adjoint_apply(phi, series::variable(1, r, 0),
                         cones::box_all(1, cones::kBoxInfinity));
  CHECK(g.exact);
  auto expected =
      make_series(1, r, {{{1}, Value::one(r)}, {{-1}, eps(r).neg()}});
  CHECK(series::exact_equal(g, expected));
}

TEST_CASE("endo_report invertibility and injectivity") {
  auto rep1 = endo_report(validate_tuple(1, {poly1(Q(), {{1, 1}, {2, 1}})}));
  CHECK(rep1.all_invertible());
  CHECK(rep1.det == std::vector<long long>{1});
  CHECK(rep1.injectivity_certified);

  auto rep2 = endo_report(validate_tuple(1, {poly1(Q(), {{2, 1}})}));
  CHECK_FALSE(rep2.all_invertible());
  CHECK(rep2.det == std::vector<long long>{2});
  CHECK(rep2.injectivity_certified);  // 2 is not a zero divisor in Q

  auto z4 = Ring::modular(4);
  auto rep3 = endo_report(validate_tuple(1, {poly1(z4, {{2, 1}})}));
  CHECK_FALSE(rep3.all_invertible());
  CHECK_FALSE(rep3.injectivity_certified);  // 2 is a zero divisor in Z/4
}

TEST_CASE("compositional inverse of t + t^2 has Catalan coefficients") {
  auto phi = validate_tuple(1, {poly1(Q(), {{1, 1}, {2, 1}})});
  auto psi = inverse_tuple(phi, {5});
  const auto& c = psi.components[0];
  CHECK(cones::box_contains(c.guarantee, {5}));
  CHECK(series::coefficient(c, {1}).eq(Value::one(Q())));
  CHECK(series::coefficient(c, {2}).eq(Value::from_int(Q(), -1)));
  CHECK(series::coefficient(c, {3}).eq(Value::from_int(Q(), 2)));
  CHECK(series::coefficient(c, {4}).eq(Value::from_int(Q(), -5)));
  CHECK(series::coefficient(c, {5}).eq(Value::from_int(Q(), 14)));

  auto round = compose_tuples(psi, phi, {5});
  CHECK(series::agree_on_common_window(round.components[0],
                                       poly1(Q(), {{1, 1}})));
}

TEST_CASE("exact two-variable inverse of the shear") {
  auto phi = shear2(Q());
  auto psi = inverse_tuple(phi, {6, 6});
  CHECK(psi.components[0].exact);
  CHECK(series::exact_equal(psi.components[0], mono2(Q(), 1, -1)));
  CHECK(series::exact_equal(psi.components[1], mono2(Q(), 0, 1)));

  Box n{6, 6};
  auto left = compose_tuples(psi, phi, n);
  auto right = compose_tuples(phi, psi, n);
  for (int i = 0; i < 2; ++i) {
    CHECK(series::exact_equal(left.components[static_cast<size_t>(i)],
                              series::variable(2, Q(), i)));
    CHECK(series::exact_equal(right.components[static_cast<size_t>(i)],
                              series::variable(2, Q(), i)));
  }
}

TEST_CASE("nilpotent inverse is exact with no truncation error") {
  auto r = Qe2();
  auto phi = validate_tuple(
      1, {make_series(1, r, {{{1}, Value::one(r)}, {{-1}, eps(r)}})});
  CHECK(endo_report(phi).all_invertible());
  auto psi = inverse_tuple(phi, {8});
  CHECK(psi.components[0].exact);
  auto expected =
      make_series(1, r, {{{1}, Value::one(r)}, {{-1}, eps(r).neg()}});
  CHECK(series::exact_equal(psi.components[0], expected));

  auto round = compose_tuples(psi, phi, cones::box_all(1, cones::kBoxInfinity));
  CHECK(series::exact_equal(round.components[0], series::variable(1, r, 0)));
}

TEST_CASE("two-variable inverse with a genuinely infinite tail") {
  // phi = (t1 + t1 t2, t2): inverse first component is t1/(1+t2)
  auto phi = validate_tuple(
      2, {make_series(2, Q(), {{{1, 0}, Value::one(Q())},
                               {{1, 1}, Value::one(Q())}}),
          mono2(Q(), 0, 1)});
  auto psi = inverse_tuple(phi, {3, 3});
  const auto& c = psi.components[0];
  for (long long k = 0; k <= 3; ++k)
    CHECK(series::coefficient(c, {1, k})
              .eq(Value::from_int(Q(), k % 2 == 0 ? 1 : -1)));
  auto round = compose_tuples(psi, phi, {3, 3});
  CHECK(series::agree_on_common_window(round.components[0],
                                       series::variable(2, Q(), 0)));
  CHECK(series::agree_on_common_window(round.components[1],
                                       series::variable(2, Q(), 1)));
}

TEST_CASE("inverse over a product ring goes factor by factor") {
  auto z6 = Ring::modular(6);  // splits as Z/2 x Z/3
  auto phi = validate_tuple(1, {poly1(z6, {{1, 1}, {2, 2}})});
  auto psi = inverse_tuple(phi, {4});
  auto round = compose_tuples(psi, phi, {4});
  CHECK(series::agree_on_common_window(round.components[0],
                                       poly1(z6, {{1, 1}})));
}

TEST_CASE("valuation pushforward under substitution") {
  auto phi = validate_tuple(1, {poly1(Q(), {{2, 1}})});
  auto f = poly1(Q(), {{1, 1}, {3, 1}});
  auto img = substitute(f, phi, cones::box_all(1, cones::kBoxInfinity));
  CHECK(series::unit_decompose(img).factors[0].nu == Exponent{2});

  auto phi2 = validate_tuple(1, {poly1(Q(), {{1, 1}, {2, 1}})});
  auto g = poly1(Q(), {{-1, 1}, {0, 1}});
  auto img2 = substitute(g, phi2, {4});
  CHECK(series::unit_decompose(img2).factors[0].nu == Exponent{-1});
}

TEST_CASE("identity formula: substitute after adjoint reconstructs f") {
  auto phi = validate_tuple(1, {poly1(Q(), {{1, 1}, {2, 1}})});
  auto f = poly1(Q(), {{1, 1}, {2, 3}});
  auto dual = adjoint_apply(phi, f, {6});
  auto back = substitute(dual, phi, {6});
  CHECK(series::agree_on_common_window(back, f));
}
