#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "akns/errors.hpp"
#include "akns/fd.hpp"
#include "akns/linearsol.hpp"

namespace akns {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

enum class Support { Upper, Lower, Full };

/// Matrix kernel K(x_i, x_j) (rows×cols blocks) on a uniform grid, stored as
/// one dense (n·rows)×(n·cols) matrix. Upper kernels vanish for j < i, lower
/// for j > i; writes outside the support throw.
template <class S>
class Kernel2D {
 public:
  Kernel2D() = default;
  Kernel2D(Grid1 g, int rows, int cols, Support sup)
      : grid_(g), rows_(rows), cols_(cols), support_(sup), data_(Mat<S>::Zero(g.n * rows, g.n * cols)) {}

  const Grid1& grid() const { return grid_; }
  int n() const { return grid_.n; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Support support() const { return support_; }
  bool in_support(int i, int j) const {
    return support_ == Support::Full || (support_ == Support::Upper ? j >= i : j <= i);
  }

  auto block(int i, int j) const { return data_.block(i * rows_, j * cols_, rows_, cols_); }
  template <class Derived>
  void set(int i, int j, const Eigen::MatrixBase<Derived>& v) {
    if (!in_support(i, j)) throw ShapeMismatch("write outside kernel support");
    data_.block(i * rows_, j * cols_, rows_, cols_) = v;
  }
  const Mat<S>& data() const { return data_; }
  Mat<S>& mutable_data() { return data_; }

  /// Largest block entry magnitude outside the declared support.
  double support_violation() const;

 private:
  Grid1 grid_;
  int rows_ = 0, cols_ = 0;
  Support support_ = Support::Full;
  Mat<S> data_;
};

/// Sampled linear data f (N×M) and f̂ (M×N) at a fixed time.
template <class S>
struct KernelPair {
  Kernel2D<S> f, fh;
  int N() const { return f.rows(); }
  int M() const { return f.cols(); }
  const Grid1& grid() const { return f.grid(); }
};

/// Samples a LinearKernel; the real instantiation rejects complex samples.
template <class S>
KernelPair<S> sample_kernel_pair(const LinearKernel& k, const Grid1& g, double t);

template <class S>
struct GlmSolution {
  Kernel2D<S> A, B, C, D;  // upper support
  std::vector<Mat<S>> u, uh;  // u = −hℂ(x,x), û = h𝔹(x,x)
  S h{};
  std::vector<int> solved_rows;
  double min_abs_det = 0;  // smallest |det(I − WĜ)| met (Fredholm proxy)
};

struct GlmOptions {
  double w1 = 1.0, w2 = -1.0;
  int row_stride = 1;        // solve rows i with i % stride == 0 (plus the last)
  double decay_gate = 1e-8;  // |f(X,X)|, |f̂(X,X)| must be below this
  double det_floor = 1e-12;
};

/// Trapezoid Nyström solve of the two GLM systems row by row, the upper
/// limit truncated at the last grid point.
template <class S>
GlmSolution<S> solve_glm(const KernelPair<S>& F, const GlmOptions& opt);

template <class S>
struct ResolventFields {
  Kernel2D<S> B, C;
};

/// Same discretization via the explicit resolvent kernel of (I − ĜW).
template <class S>
ResolventFields<S> resolvent_fields(const KernelPair<S>& F, const GlmOptions& opt);

/// Quadrature weights on m consecutive points (trapezoid, or Simpson with a 3/8 tail).
enum class Quadrature { Trapezoid, Simpson };
std::vector<double> quad_weights(int m, double dx, Quadrature q);

template <class S>
struct FactorizationReport {
  double residual = 0;
  Kernel2D<S> k_minus;  // lower support
};

/// Applies (I+K⁺)(I+F) and I+K⁻ to Gaussian test functions g(x − c)·I
/// (K⁻ from its integral representation for z ≤ x) with Simpson quadrature.
/// Residual: sup of the difference over max(1, ‖(I+F)Φ‖, ‖(I+K⁻)Φ‖).
template <class S>
FactorizationReport<S> factorization_check(const GlmSolution<S>& sol, const KernelPair<S>& F,
                                           const std::vector<double>& centers, double width);

struct Constr1Residual {
  double a = 0, d = 0, b = 0, c = 0;
  double max() const;
};

/// FD residuals of the four first-order kernel constraints over the interior.
template <class S>
Constr1Residual constr1_residual(const GlmSolution<S>& sol, double w1, double w2, const FdScheme& fd = {});

struct IntegralRiccatiResidual {
  double diagonal = 0;  // sup |u_ref + hγ(x,x)|
  double kernel = 0;    // sup |w1∂zγ + w2∂xγ − ∫γûγ|
  double max() const { return std::max(diagonal, kernel); }
};

/// γ from γ∘(id + 𝔸) = ℂ by a Volterra march; u_ref defaults to the GLM u.
template <class S>
IntegralRiccatiResidual integral_riccati_residual(const GlmSolution<S>& sol, double w1, double w2,
                                                  const std::vector<Mat<S>>* u_ref = nullptr,
                                                  const FdScheme& fd = {});

/// γ kernel itself (upper support).
template <class S>
Kernel2D<S> riccati_gamma(const GlmSolution<S>& sol);

}  // namespace akns
