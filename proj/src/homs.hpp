#pragma once

#include <vector>

#include "series.hpp"

namespace laurent::homs {

using cones::Box;
using cones::Exponent;
using cones::IntMatrix;
using cones::SignatureData;
using rings::RingPtr;
using rings::Value;
using series::Series;
using series::TopForm;
using series::UnitDecomposition;

/// Per-connected-factor data of a validated tuple.
struct FactorData {
  IntMatrix upsilon;  // m x n, column j = nu(phi_j) on this factor
  SignatureData signature;
};

/// A validated point of H_{m,n}: n invertible series in m variables whose
/// valuation matrix is in M+ on every connected factor. Corresponds to the
/// continuous homomorphism t_i -> components[i].
struct ParamTuple {
  int n = 0;
  int m = 0;
  RingPtr ring;
  std::vector<Series> components;
  std::vector<FactorData> factors;
  std::vector<UnitDecomposition> decompositions;  // one per component
};

ParamTuple validate_tuple(int n, const std::vector<Series>& components);
ParamTuple monomial_tuple(const RingPtr& ring, const IntMatrix& m_plus);
ParamTuple identity_tuple(const RingPtr& ring, int n);

/// f(phi_1,...,phi_n) truncated to `target`.
Series substitute(const Series& f, const ParamTuple& phi, const Box& target);

/// theta in H_{p,m} composed after phi in H_{m,n}: components
/// phi_i(theta_1,...,theta_m); asserts Upsilon multiplicativity.
ParamTuple compose_tuples(const ParamTuple& theta, const ParamTuple& phi,
                          const Box& target);

/// det(d phi_i / d t_j) for square tuples (by cofactor expansion; truncated
/// to `target` only when the components are inexact).
Series jacobian(const ParamTuple& phi, const Box& target);

/// res(phi(w) ^ dlog t_{q_1} ^ ... ^ dlog t_{q_{m-n}}) with q the complement
/// rows of the signature (per connected factor).
Value wedge_residue(const ParamTuple& phi, const TopForm& w, const Box& target);

/// The explicit adjoint: sum over l of res(f phi^{-l-1} J(phi) dt) t^l.
Series adjoint_apply(const ParamTuple& phi, const Series& f, const Box& target);

struct EndoReport {
  std::vector<bool> invertible;  // per connected factor
  std::vector<long long> det;
  std::vector<long long> d;
  bool injectivity_certified = false;

  bool all_invertible() const;
};

EndoReport endo_report(const ParamTuple& phi);

/// phi^{-1} = phi^{vee} for invertible endomorphisms; components are the
/// adjoint applied to the variables, with valuations certified from
/// Upsilon^{-1}.
ParamTuple inverse_tuple(const ParamTuple& phi, const Box& target);

/// Per-connected-factor restriction of a tuple (components projected).
ParamTuple project_tuple(const ParamTuple& phi, int i);

}  // namespace laurent::homs
