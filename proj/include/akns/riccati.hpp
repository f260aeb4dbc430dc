#pragma once

#include <vector>

#include "akns/field.hpp"
#include "akns/ncalg.hpp"

namespace akns {

enum class RiccatiVariant {
  Gamma,     // Γ = Ψ₂Ψ₁⁻¹ (M×N):  ∂Γ = u − λΓ − ΓûΓ
  GammaHat,  // Γ̂ (N×M):          ∂Γ̂ = û + λΓ̂ − Γ̂uΓ̂
};

/// Coefficients of Γ = Σ_k Γ⁽ᵏ⁾ λ⁻ᵏ, k = 1..kmax.
struct GammaSeries {
  RiccatiVariant variant = RiccatiVariant::Gamma;
  std::vector<NcPoly> terms;  // terms[k-1] = Γ⁽ᵏ⁾

  int kmax() const { return static_cast<int>(terms.size()); }
  const NcPoly& operator[](int k) const { return terms.at(static_cast<std::size_t>(k - 1)); }
};

GammaSeries gamma_terms(int kmax, RiccatiVariant variant = RiccatiVariant::Gamma);

/// Trace density û·Γ⁽ᵏ⁾ (N×N).
NcPoly charge_density(int k);

struct ChargeValue {
  cplx value{0.0, 0.0};
  bool boundary_leak = false;  // |u| or |û| ≥ 1e-10 at a grid end
};

/// 𝓘⁽ᵏ⁾ = ∫ tr(ûΓ⁽ᵏ⁾) dx, composite trapezoid over the FD-valid interior.
ChargeValue evaluate_charge(int k, const GridField& field, const FdScheme& fd = {});

/// Sup norm of the truncated Riccati residual at spectral parameter λ.
double riccati_residual(const GammaSeries& series, cplx lambda, const GridField& field, const FdScheme& fd = {});

/// Cyclic variational derivative δ/δû of ∫ tr(density); density must be N×N.
NcPoly cyclic_variation(const NcPoly& density);
/// δ𝓘⁽ᵏ⁾/δû for k ≤ 3 (UnsupportedOrder beyond).
NcPoly variational_flow(int k);

}  // namespace akns
