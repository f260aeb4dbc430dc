#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "akns/field.hpp"
#include "akns/linearsol.hpp"

namespace akns {

/// Discrete linear-problem data for L-soliton fields.
struct SolitonConfig {
  DispersionParams disp;
  std::vector<MatC> b;   // N×M per mode
  std::vector<MatC> bh;  // M×N per mode
  std::optional<cplx> xi;  // Temperley-Lieb scalar: b b̂ b = ξ b, b̂ b b̂ = ξ b̂ (L = 1)

  int L() const { return disp.modes(); }
  int N() const { return static_cast<int>(b.front().rows()); }
  int M() const { return static_cast<int>(b.front().cols()); }
};

/// Validates shapes and, when xi is set, the Temperley-Lieb relations to 1e-12.
SolitonConfig make_soliton_config(DispersionParams disp, std::vector<MatC> b, std::vector<MatC> bh,
                                  std::optional<cplx> xi = std::nullopt);

/// 𝕄 = I − ℙ (LM×LM), 𝕄̂ = I − ℙ̂ (LN×LN) and the row vectors 𝖡 (N×LM), 𝖡̂ (M×LN).
struct MSystem {
  MatC M, Mh, B, Bh;
};

/// 𝔣_{βγα}(x,t) for the ℙ blocks; hat = true gives 𝔣̂_{βγα}.
cplx f_coefficient(const DispersionParams& p, int beta, int gamma, int alpha, double x, double t, bool hat);
MSystem build_m_matrices(const SolitonConfig& cfg, double x, double t);

struct FieldSample {
  MatC u, uh;
  cplx det_m, det_mh;
  double cond = 1.0;  // worse of the two LU reciprocal-condition estimates, inverted
};

/// Solves 𝕃𝕄 = −𝖡, 𝕃̂𝕄̂ = −𝖡̂ and returns û = h𝔹(x,x), u = −hℂ(x,x).
FieldSample solve_fields(const SolitonConfig& cfg, double x, double t);

/// One-soliton kernels of K⁺ under the Temperley-Lieb constraints.
struct KernelBlocks {
  MatC A, B, C, D;
};

/// (𝔹(x,z,t), ℂ(x,z,t)); throws PoleAt where 1 − ξ𝔣 vanishes.
std::pair<MatC, MatC> closed_form_one_soliton(const SolitonConfig& cfg, double x, double z, double t);
KernelBlocks closed_form_kernels(const SolitonConfig& cfg, double x, double z, double t);

/// Shift by δ: fields become u(x − δ).
SolitonConfig translate(const SolitonConfig& cfg, double delta);

enum class Provenance { ClosedFormTL, MatrixSolve };

struct SolitonField {
  Provenance provenance = Provenance::ClosedFormTL;
  int N = 1, M = 1;
  std::function<std::pair<MatC, MatC>(double x, double t)> eval;  // (u, û)
};

SolitonField soliton_field(const SolitonConfig& cfg, Provenance prov);

/// Map onto the U-hierarchy normalization: τ = time_scale·t, v̂ = uh_scale·û, v = u.
struct FlowMatch {
  double time_scale = 1.0;
  double uh_scale = 1.0;
};

FlowMatch flow_matching(const DispersionParams& p);
/// Field in flow-matched variables, evaluated at (x, τ).
SolitonField flow_matched(const SolitonField& f, const FlowMatch& m);

/// Samples a field on an x × t product grid.
Trajectory sample_trajectory(const SolitonField& f, const Grid1& x, const Grid1& t);

}  // namespace akns
