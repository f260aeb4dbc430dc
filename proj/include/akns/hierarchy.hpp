#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "akns/field.hpp"
#include "akns/ncalg.hpp"

namespace akns {

/// 2×2 block matrix of NcPoly with blocks N×N, N×M; M×N, M×M.
struct Block {
  NcPoly a{kShapeNN};
  NcPoly b{kShapeNM};
  NcPoly c{kShapeMN};
  NcPoly d{kShapeMM};

  static Block zero() { return {}; }
  /// diag(s1·I_N, s2·I_M)
  static Block diag(const Rational& s1, const Rational& s2);
  /// Q = [[0, û], [u, 0]]
  static Block q();

  bool is_zero() const { return a.is_zero() && b.is_zero() && c.is_zero() && d.is_zero(); }
  Block& operator+=(const Block& o);
  Block& operator-=(const Block& o);
  Block& operator*=(const Rational& s);
  friend Block operator+(Block x, const Block& y) { return x += y; }
  friend Block operator-(Block x, const Block& y) { return x -= y; }
  friend Block operator*(const Rational& s, Block x) { return x *= s; }
  friend bool operator==(const Block&, const Block&) = default;
};

Block operator*(const Block& x, const Block& y);
Block derive(const Block& x);
Block eliminate_aux(const Block& x, const AuxRules& rules);
std::string to_string(const Block& x);

/// λ-graded block matrix Σ_k λᵏ·terms[k]; zero blocks are not stored.
struct LaxComponent {
  std::map<int, Block> terms;

  const Block& at(int k) const;
  int degree() const { return terms.empty() ? -1 : terms.rbegin()->first; }
  void add(int k, const Block& x);
  friend bool operator==(const LaxComponent&, const LaxComponent&) = default;
};

LaxComponent operator*(const LaxComponent& x, const LaxComponent& y);
LaxComponent operator-(const LaxComponent& x, const LaxComponent& y);
LaxComponent derive(const LaxComponent& x);

/// Σ = diag(I_N, -I_M)
Block sigma();

/// U = λ/2·Σ + Q.
LaxComponent build_u_matrix();

/// Matrix Darboux 𝒦 = [[𝒜, -û], [u, 𝒟]] over the extended alphabet.
Block darboux_k();

inline constexpr int kDefaultMaxFlow = 6;

/// V⁽ⁿ⁾ from w_{n-1} = ½[𝒦, Σ], w_{k-1} = -w_k 𝒦, with 𝒜, 𝒟 eliminated.
LaxComponent time_component(int n, int max_n = kDefaultMaxFlow);
/// The w⁽ⁿ⁾_k, k = 0..n-1, aux-free.
std::vector<Block> recursion_terms(int n);

struct EquationsOfMotion {
  int n = 0;
  NcPoly dt_u{kShapeMN};   // ∂ₜu = dt_u
  NcPoly dt_uh{kShapeNM};  // ∂ₜû = dt_uh
  std::string label;  // conventional name of the flow, when it has one
};

/// Zero curvature ∂ₜU − ∂ₓV + [U, V] = 0, i.e. ∂ₜU = ∂ₓV − [U, V].
/// Throws LambdaOrderResidual if any λ≥1 power (or a λ⁰ diagonal block) survives.
EquationsOfMotion derive_eom(int n);
/// ∂ₓV − [U, V] for V = time_component(n), all λ powers.
LaxComponent curvature_rhs(int n);

/// Parameters of the first-order differential Darboux one-soliton ansatz.
struct DarbouxOneSoliton {
  cplx k1{1.0, 0.0}, xi1{1.0, 0.0}, k2{1.0, 0.0}, xi2{1.0, 0.0};
  cplx x0{0.0, 0.0}, C0{1.0, 0.0};
  cplx w1{1.0, 0.0}, w2{-1.0, 0.0};
  cplx h() const { return w1 - w2; }
};

/// (A(x), C(x)) solving ∂A = (hξ1/w1)((k1/ξ1)A − A²), ∂C = −(h/w2)·C·A.
std::pair<cplx, cplx> fundamental_darboux_ode_solution(const DarbouxOneSoliton& p, double x);

/// Aux rules for the differential Darboux I∂ + K with weights 𝒲 = diag(w1, w2):
/// ∂A = −ûu/(w1h), ∂D = uû/(w2h), uA = −(w2/h)∂u, ûD = (w1/h)∂û.
AuxRules differential_darboux_rules(const Rational& w1, const Rational& w2);
/// K = [[A, −û/h], [u/h, D]].
Block differential_darboux_k(const Rational& w1, const Rational& w2);

/// Residual families of the order-m Darboux recursion; all zero iff valid.
std::vector<Block> check_general_darboux(int m, const std::vector<Block>& coeffs, const Block& u_candidate,
                                         const Rational& w1, const Rational& w2, const AuxRules& rules);

/// Sampled matrix-Darboux blocks 𝒜 (N×N), ℬ (N×M), 𝒞 (M×N), 𝒟 (M×M).
struct DarbouxSamples {
  std::vector<MatC> A, B, C, D;
};

struct BacklundResidual {
  double b = 0, c = 0, dA = 0, dD = 0, dB = 0, dC = 0;
  double max() const;
};

/// Sup-norm residuals of the x-part Darboux–Bäcklund relations over the FD-valid interior.
BacklundResidual backlund_residual(const GridField& fields, const GridField& seed, const DarbouxSamples& k,
                                   const FdScheme& fd);

}  // namespace akns
