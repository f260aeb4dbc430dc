#include "akns/glm.hpp"

#include <algorithm>
#include <cmath>

#include "akns/parallel.hpp"

namespace akns {

namespace {

template <class S>
S narrow(const cplx& v, double scale);

template <>
cplx narrow<cplx>(const cplx& v, double) {
  return v;
}

template <>
double narrow<double>(const cplx& v, double scale) {
  if (std::abs(v.imag()) > 1e-12 * std::max(1.0, scale)) throw ShapeMismatch("complex kernel sample for a real kernel");
  return v.real();
}

template <class S>
Mat<S> narrow_mat(const MatC& m) {
  const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  Mat<S> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = narrow<S>(m(i, j), scale);
  return out;
}

// Trapezoid weights on [i, n−1], indexed by absolute grid index.
std::vector<double> tail_weights(int i, int n, double dx) {
  std::vector<double> w(n, 0.0);
  if (n - i < 2) return w;
  for (int j = i; j < n; ++j) w[j] = dx;
  w[i] = w[n - 1] = 0.5 * dx;
  return w;
}

// Right-multiplies the column blocks (size bs) of m by the weights.
template <class S>
Mat<S> scale_col_blocks(const Mat<S>& m, const std::vector<double>& w, int first, int bs) {
  Mat<S> out = m;
  for (int k = 0; k < static_cast<int>(m.cols()) / bs; ++k) out.middleCols(k * bs, bs) *= w[first + k];
  return out;
}

template <class S>
Mat<S> scale_row_blocks(const Mat<S>& m, const std::vector<double>& w, int first, int bs) {
  Mat<S> out = m;
  for (int k = 0; k < static_cast<int>(m.rows()) / bs; ++k) out.middleRows(k * bs, bs) *= w[first + k];
  return out;
}

template <class S>
void check_truncation(const KernelPair<S>& F, const GlmOptions& opt) {
  const int n = F.grid().n;
  if (n < 3) throw GridMismatch("GLM grid needs at least three points");
  const double ef = F.f.block(n - 1, n - 1).cwiseAbs().maxCoeff();
  const double eh = F.fh.block(n - 1, n - 1).cwiseAbs().maxCoeff();
  if (!(std::max(ef, eh) < opt.decay_gate))
    throw TruncationInadmissible("kernel at X_max is " + std::to_string(std::max(ef, eh)) + ", above the decay gate");
}

// One side of the GLM pair. With P the data in the unknown's block row (P = f
// for 𝔹, f̂ for ℂ) and Q the other one, the row-i system on t_i = [i, n) is
// X·T_i = −P(i, t_i) with T_i = I − W_i Q W'_i P, W, W' trapezoid weights.
// T_i⁻¹ is carried from row i+1 by bordering plus a rank-(2c+2r) Woodbury
// update, so marching all rows costs O(n³).
template <class S>
class SideSolver {
 public:
  SideSolver(const Kernel2D<S>& P, const Kernel2D<S>& Q, double det_floor)
      : P_(P.data()), Q_(Q.data()), det_floor_(det_floor) {
    n_ = P.n();
    r_ = P.rows();
    c_ = P.cols();
    dx_ = P.grid().dx;
    Tinv_ = Mat<S>::Identity(n_ * c_, n_ * c_);
    w_.assign(n_, 0.0);
  }

  void step_to(int i) {
    if (i >= n_ - 1) return;
    const int m = n_ - i;
    const Eigen::Index mc = static_cast<Eigen::Index>(m) * c_, mr = static_cast<Eigen::Index>(m) * r_;
    const Eigen::Index o = static_cast<Eigen::Index>(i) * c_, orr = static_cast<Eigen::Index>(i) * r_;

    // Border with the old weights (w_[i] == 0): column block i of −W Q W' P.
    const Mat<S> WQWP_i = scale_rows(scale_cols(Mat<S>(Q_.block(o + c_, orr + r_, mc - c_, mr - r_)), i + 1, r_) *
                                         P_.block(orr + r_, o, mr - r_, c_),
                                     i + 1, c_);
    auto T = Tinv_.bottomRightCorner(mc, mc);
    T.block(c_, 0, mc - c_, c_).noalias() = T.bottomRightCorner(mc - c_, mc - c_) * WQWP_i;
    T.block(0, 0, c_, c_).setIdentity();
    T.block(0, c_, c_, mc - c_).setZero();

    // New weights.
    std::vector<double> wn = w_;
    wn[i] += 0.5 * dx_;
    wn[i + 1] += 0.5 * dx_;
    const int k = 2 * c_ + 2 * r_;
    Mat<S> U = Mat<S>::Zero(mc, k), Vt(k, mc);
    U.block(0, 0, 2 * c_, 2 * c_).setIdentity();
    U.block(0, 0, 2 * c_, 2 * c_) *= 0.5 * dx_;
    Vt.topRows(2 * c_) = scale_cols_w(Mat<S>(Q_.block(o, orr, 2 * c_, mr)), wn, i, r_) * P_.block(orr, o, mr, mc);
    U.rightCols(2 * r_) = (0.5 * dx_) * scale_rows(Mat<S>(Q_.block(o, orr, mc, 2 * r_)), i, c_);
    Vt.bottomRows(2 * r_) = P_.block(orr, o, 2 * r_, mc);
    w_ = std::move(wn);

    const Mat<S> TU = T * U;
    const Mat<S> cap = Mat<S>::Identity(k, k) - Vt * TU;
    Eigen::PartialPivLU<Mat<S>> lu(cap);
    det_ *= std::abs(lu.determinant());
    if (!(det_ > det_floor_)) throw SingularResolvent("I − WĜ singular at grid index " + std::to_string(i));
    const Mat<S> VT = Vt * T;
    T.noalias() += TU * lu.solve(VT);
  }

  double abs_det() const { return det_; }

  // Returns (X_row, Y_row) on t_i.
  std::pair<Mat<S>, Mat<S>> solve(int i) const {
    const Eigen::Index mc = static_cast<Eigen::Index>(n_ - i) * c_, mr = static_cast<Eigen::Index>(n_ - i) * r_;
    const Eigen::Index o = static_cast<Eigen::Index>(i) * c_, orr = static_cast<Eigen::Index>(i) * r_;
    const Mat<S> X = -P_.block(orr, o, r_, mc) * Tinv_.bottomRightCorner(mc, mc);
    const Mat<S> Y = -scale_cols(X, i, c_) * Q_.block(o, orr, mc, mr);
    return {X, Y};
  }

  Mat<S> prow(int i) const {
    return P_.block(static_cast<Eigen::Index>(i) * r_, static_cast<Eigen::Index>(i) * c_, r_,
                    static_cast<Eigen::Index>(n_ - i) * c_);
  }
  Mat<S> qsub(int i) const {
    return Q_.block(static_cast<Eigen::Index>(i) * c_, static_cast<Eigen::Index>(i) * r_,
                    static_cast<Eigen::Index>(n_ - i) * c_, static_cast<Eigen::Index>(n_ - i) * r_);
  }

 private:
  // Scale column (row) blocks of size bs starting at grid index first by the current weights.
  Mat<S> scale_cols(const Mat<S>& m, int first, int bs) const { return scale_col_blocks<S>(m, w_, first, bs); }
  Mat<S> scale_cols_w(const Mat<S>& m, const std::vector<double>& w, int first, int bs) const {
    return scale_col_blocks<S>(m, w, first, bs);
  }
  Mat<S> scale_rows(const Mat<S>& m, int first, int bs) const { return scale_row_blocks<S>(m, w_, first, bs); }

  const Mat<S>& P_;
  const Mat<S>& Q_;
  double det_floor_;
  int n_, r_, c_;
  double dx_;
  Mat<S> Tinv_;
  std::vector<double> w_;
  double det_ = 1.0;
};

// Ĝ = Q W P on t_i with the trapezoid weights of [x_i, X], built directly.
template <class S>
Mat<S> g_hat(const Mat<S>& P, const Mat<S>& Q, int i, int n, int r, int c, double dx) {
  const std::vector<double> w = tail_weights(i, n, dx);
  const Eigen::Index mc = static_cast<Eigen::Index>(n - i) * c, mr = static_cast<Eigen::Index>(n - i) * r;
  const Mat<S> q = Q.block(static_cast<Eigen::Index>(i) * c, static_cast<Eigen::Index>(i) * r, mc, mr);
  return scale_col_blocks<S>(q, w, i, r) * P.block(static_cast<Eigen::Index>(i) * r, static_cast<Eigen::Index>(i) * c, mr, mc);
}

template <class S>
void store_row(Kernel2D<S>& K, int i, const Mat<S>& row) {
  const int bs = K.cols();
  for (int k = 0; k < static_cast<int>(row.cols()) / bs; ++k) K.set(i, i + k, row.middleCols(k * bs, bs));
}

}  // namespace

template <class S>
double Kernel2D<S>::support_violation() const {
  double v = 0;
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j)
      if (!in_support(i, j)) v = std::max(v, static_cast<double>(block(i, j).cwiseAbs().maxCoeff()));
  return v;
}

template <class S>
KernelPair<S> sample_kernel_pair(const LinearKernel& k, const Grid1& g, double t) {
  KernelPair<S> out{Kernel2D<S>(g, k.N, k.M, Support::Full), Kernel2D<S>(g, k.M, k.N, Support::Full)};
  parallel_for(static_cast<std::size_t>(g.n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < g.n; ++j) {
      const MatC f = k.f(g.at(i), g.at(j), t), fh = k.fh(g.at(i), g.at(j), t);
      if (f.rows() != k.N || f.cols() != k.M || fh.rows() != k.M || fh.cols() != k.N)
        throw ShapeMismatch("kernel evaluator returned a block of the wrong shape");
      out.f.set(i, j, narrow_mat<S>(f));
      out.fh.set(i, j, narrow_mat<S>(fh));
    }
  });
  return out;
}

template <class S>
GlmSolution<S> solve_glm(const KernelPair<S>& F, const GlmOptions& opt) {
  check_truncation(F, opt);
  const Grid1 g = F.grid();
  const int n = g.n, N = F.N(), M = F.M();
  if (opt.row_stride < 1) throw ConfigError("row_stride must be positive");
  GlmSolution<S> sol;
  sol.A = Kernel2D<S>(g, N, N, Support::Upper);
  sol.B = Kernel2D<S>(g, N, M, Support::Upper);
  sol.C = Kernel2D<S>(g, M, N, Support::Upper);
  sol.D = Kernel2D<S>(g, M, M, Support::Upper);
  sol.h = static_cast<S>(opt.w1 - opt.w2);
  sol.u.assign(n, Mat<S>::Zero(M, N));
  sol.uh.assign(n, Mat<S>::Zero(N, M));
  sol.min_abs_det = std::numeric_limits<double>::infinity();

  SideSolver<S> sb(F.f, F.fh, opt.det_floor), sc(F.fh, F.f, opt.det_floor);
  for (int i = n - 1; i >= 0; --i) {
    sb.step_to(i);
    sc.step_to(i);
    if (i % opt.row_stride != 0 && i != n - 1) continue;
    auto [Brow, Arow] = sb.solve(i);
    auto [Crow, Drow] = sc.solve(i);
    store_row(sol.B, i, Brow);
    store_row(sol.A, i, Arow);
    store_row(sol.C, i, Crow);
    store_row(sol.D, i, Drow);
    sol.uh[i] = sol.h * Mat<S>(sol.B.block(i, i));
    sol.u[i] = -sol.h * Mat<S>(sol.C.block(i, i));
    sol.solved_rows.push_back(i);
  }
  sol.min_abs_det = std::min(sb.abs_det(), sc.abs_det());
  std::reverse(sol.solved_rows.begin(), sol.solved_rows.end());
  return sol;
}

template <class S>
ResolventFields<S> resolvent_fields(const KernelPair<S>& F, const GlmOptions& opt) {
  check_truncation(F, opt);
  const Grid1 g = F.grid();
  const int n = g.n;
  ResolventFields<S> out{Kernel2D<S>(g, F.N(), F.M(), Support::Upper), Kernel2D<S>(g, F.M(), F.N(), Support::Upper)};
  const Mat<S>&f = F.f.data(), &fh = F.fh.data();
  const int N = F.N(), M = F.M();
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    struct Side {
      const Mat<S>& P;
      const Mat<S>& Q;
      int r, c;
      Kernel2D<S>* K;
    };
    for (const Side& sd : {Side{f, fh, N, M, &out.B}, Side{fh, f, M, N, &out.C}}) {
      const Mat<S> frow = sd.P.block(static_cast<Eigen::Index>(i) * sd.r, static_cast<Eigen::Index>(i) * sd.c, sd.r,
                                     static_cast<Eigen::Index>(n - i) * sd.c);
      if (n - i < 2) {
        store_row(*sd.K, i, Mat<S>(-frow));
        continue;
      }
      const int bs = sd.c, m = (n - i) * bs;
      const std::vector<double> w = tail_weights(i, n, g.dx);
      const Mat<S> T = Mat<S>::Identity(m, m) - scale_col_blocks<S>(g_hat(sd.P, sd.Q, i, n, sd.r, sd.c, g.dx), w, i, bs);
      Eigen::PartialPivLU<Mat<S>> lu(T);
      if (!(std::abs(lu.determinant()) > opt.det_floor))
        throw SingularResolvent("I − ĜW singular at grid index " + std::to_string(i));
      // R = (T⁻¹ − I)W⁻¹, then X = −f − f W R.
      Mat<S> R = lu.inverse() - Mat<S>::Identity(m, m);
      std::vector<double> winv(n, 0.0);
      for (int j = i; j < n; ++j) winv[j] = 1.0 / w[j];
      R = scale_col_blocks<S>(R, winv, i, bs);
      const Mat<S> X = -frow - scale_col_blocks<S>(frow, w, i, bs) * R;
      store_row(*sd.K, i, X);
    }
  });
  return out;
}
std::vector<double> quad_weights(int m, double dx, Quadrature q) {
  std::vector<double> w(std::max(m, 0), 0.0);
  if (m < 2) return w;
  if (q == Quadrature::Trapezoid || m == 2) {
    for (auto& v : w) v = dx;
    w.front() = w.back() = 0.5 * dx;
    return w;
  }
  const int intervals = m - 1;
  int simpson_end = intervals;  // last node index covered by 1/3 panels
  if (intervals % 2 == 1) simpson_end = intervals - 3;
  for (int k = 0; k + 2 <= simpson_end; k += 2) {
    w[k] += dx / 3;
    w[k + 1] += 4 * dx / 3;
    w[k + 2] += dx / 3;
  }
  if (simpson_end != intervals) {
    const int k = simpson_end;
    w[k] += 3 * dx / 8;
    w[k + 1] += 9 * dx / 8;
    w[k + 2] += 9 * dx / 8;
    w[k + 3] += 3 * dx / 8;
  }
  return w;
}

namespace {

// Dense operator matrices over the grid with L×L blocks, L = N + M.
template <class S>
Mat<S> kplus_matrix(const GlmSolution<S>& s) {
  const int n = s.A.n(), N = s.A.rows(), M = s.D.rows(), L = N + M;
  Mat<S> k = Mat<S>::Zero(static_cast<Eigen::Index>(n) * L, static_cast<Eigen::Index>(n) * L);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      auto b = k.block(static_cast<Eigen::Index>(i) * L, static_cast<Eigen::Index>(j) * L, L, L);
      b.topLeftCorner(N, N) = s.A.block(i, j);
      b.topRightCorner(N, M) = s.B.block(i, j);
      b.bottomLeftCorner(M, N) = s.C.block(i, j);
      b.bottomRightCorner(M, M) = s.D.block(i, j);
    }
  return k;
}

template <class S>
Mat<S> f_matrix(const KernelPair<S>& F) {
  const int n = F.grid().n, N = F.N(), M = F.M(), L = N + M;
  Mat<S> k = Mat<S>::Zero(static_cast<Eigen::Index>(n) * L, static_cast<Eigen::Index>(n) * L);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto b = k.block(static_cast<Eigen::Index>(i) * L, static_cast<Eigen::Index>(j) * L, L, L);
      b.topRightCorner(N, M) = F.f.block(i, j);
      b.bottomLeftCorner(M, N) = F.fh.block(i, j);
    }
  return k;
}

// Row block i of K weighted by the Simpson rule on [i, n) (upper) or [0, i] (lower).
template <class S>
void weight_rows(Mat<S>& k, int n, int L, double dx, bool upper) {
  for (int i = 0; i < n; ++i) {
    const int first = upper ? i : 0, m = upper ? n - i : i + 1;
    const std::vector<double> w = quad_weights(m, dx, Quadrature::Simpson);
    for (int j = 0; j < n; ++j) {
      const double wj = (j >= first && j < first + m) ? w[j - first] : 0.0;
      k.block(static_cast<Eigen::Index>(i) * L, static_cast<Eigen::Index>(j) * L, L, L) *= wj;
    }
  }
}

}  // namespace

template <class S>
FactorizationReport<S> factorization_check(const GlmSolution<S>& sol, const KernelPair<S>& F,
                                           const std::vector<double>& centers, double width) {
  const Grid1 g = F.grid();
  const int n = g.n, L = F.N() + F.M();
  if (static_cast<int>(sol.solved_rows.size()) != n) throw ConfigError("factorization check needs every row solved");
  FactorizationReport<S> rep;
  rep.k_minus = Kernel2D<S>(g, L, L, Support::Lower);

  Mat<S> Kw = kplus_matrix(sol);
  weight_rows(Kw, n, L, g.dx, true);
  const Mat<S> Fm = f_matrix(F);
  // K⁻(x_i, z) = F(x_i, z) + ∫_{x_i} K⁺(x_i, y) F(y, z) dy, kept for z ≤ x_i.
  Mat<S> Km = Fm;
  Km.noalias() += Kw * Fm;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto b = Km.block(static_cast<Eigen::Index>(i) * L, static_cast<Eigen::Index>(j) * L, L, L);
      if (j > i)
        b.setZero();
      else
        rep.k_minus.set(i, j, b);
    }
  Mat<S> Kmw = Km;
  weight_rows(Kmw, n, L, g.dx, false);
  Mat<S> Fw = Fm;
  {
    const std::vector<double> w = quad_weights(n, g.dx, Quadrature::Simpson);
    for (int j = 0; j < n; ++j) Fw.middleCols(static_cast<Eigen::Index>(j) * L, L) *= w[j];
  }

  double res = 0;
  for (double c : centers) {
    Mat<S> phi = Mat<S>::Zero(static_cast<Eigen::Index>(n) * L, L);
    for (int k = 0; k < n; ++k)
      phi.middleRows(static_cast<Eigen::Index>(k) * L, L).setIdentity() *= std::exp(-0.5 * std::pow((g.at(k) - c) / width, 2));
    const Mat<S> psi = phi + Fw * phi;      // (I + F)Φ
    const Mat<S> lhs = psi + Kw * psi;      // (I + K⁺)(I + F)Φ
    const Mat<S> rhs = phi + Kmw * phi;     // (I + K⁻)Φ
    // Relative to the terms that cancel: (I+F)Φ can be far larger than Φ.
    const double scale = std::max({1.0, static_cast<double>(psi.cwiseAbs().maxCoeff()),
                                   static_cast<double>(rhs.cwiseAbs().maxCoeff())});
    res = std::max(res, static_cast<double>((lhs - rhs).cwiseAbs().maxCoeff()) / scale);
  }
  rep.residual = res;
  return rep;
}

double Constr1Residual::max() const { return std::max({a, d, b, c}); }

template <class S>
Constr1Residual constr1_residual(const GlmSolution<S>& sol, double w1, double w2, const FdScheme& fd) {
  const int n = sol.A.n();
  if (static_cast<int>(sol.solved_rows.size()) != n) throw ConfigError("constraint check needs every row solved");
  const FdOperator D1(n, sol.A.grid().dx, 1, FdScheme{fd.order, Boundary::ShrinkDomain});
  const int r = D1.first_valid();
  const double h = w1 - w2;
  Constr1Residual out;
  for (int i = r; i <= D1.last_valid(); ++i) {
    const Mat<S> Bxx = sol.B.block(i, i), Cxx = sol.C.block(i, i);
    for (int j = i + r; j <= D1.last_valid(); ++j) {
      auto dx = [&](const Kernel2D<S>& K) { return D1.apply(i, [&](int k) { return Mat<S>(K.block(k, j)); }); };
      auto dy = [&](const Kernel2D<S>& K) { return D1.apply(j, [&](int k) { return Mat<S>(K.block(i, k)); }); };
      const Mat<S> ra = w1 * (dx(sol.A) + dy(sol.A)) + h * Bxx * sol.C.block(i, j);
      const Mat<S> rd = w2 * (dx(sol.D) + dy(sol.D)) - h * Cxx * sol.B.block(i, j);
      const Mat<S> rb = w1 * dx(sol.B) + w2 * dy(sol.B) + h * Bxx * sol.D.block(i, j);
      const Mat<S> rc = w2 * dx(sol.C) + w1 * dy(sol.C) - h * Cxx * sol.A.block(i, j);
      out.a = std::max(out.a, static_cast<double>(ra.cwiseAbs().maxCoeff()));
      out.d = std::max(out.d, static_cast<double>(rd.cwiseAbs().maxCoeff()));
      out.b = std::max(out.b, static_cast<double>(rb.cwiseAbs().maxCoeff()));
      out.c = std::max(out.c, static_cast<double>(rc.cwiseAbs().maxCoeff()));
    }
  }
  return out;
}

template <class S>
Kernel2D<S> riccati_gamma(const GlmSolution<S>& sol) {
  const Grid1 g = sol.C.grid();
  const int n = g.n, M = sol.C.rows(), N = sol.C.cols();
  if (static_cast<int>(sol.solved_rows.size()) != n) throw ConfigError("γ march needs every row solved");
  Kernel2D<S> gam(g, M, N, Support::Upper);
  const double dx = g.dx;
  const Mat<S>& A = sol.A.data();
  // γ(x_i, z) + ∫_{x_i}^{z} γ(x_i, y)𝔸(y, z) dy = ℂ(x_i, z), marched in z.
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    const Eigen::Index oi = static_cast<Eigen::Index>(i) * N;
    Mat<S> row = Mat<S>::Zero(M, static_cast<Eigen::Index>(n - i) * N);  // γ(i, ·) on t_i, weighted copy below
    Mat<S> wrow = row;  // ω_y γ(i, y) with interior weights
    row.leftCols(N) = sol.C.block(i, i);
    wrow.leftCols(N) = (0.5 * dx) * row.leftCols(N);
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Index oj = static_cast<Eigen::Index>(j) * N, len = oj - oi;
      Mat<S> rhs = sol.C.block(i, j);
      rhs.noalias() -= wrow.leftCols(len) * A.block(oi, oj, len, N);
      const Mat<S> lhs = Mat<S>::Identity(N, N) + (0.5 * dx) * Mat<S>(sol.A.block(j, j));
      if (std::abs(lhs.determinant()) < 1e-12) throw SingularA("id + 𝔸 singular at grid index " + std::to_string(j));
      row.middleCols(len, N) = lhs.transpose().partialPivLu().solve(rhs.transpose()).transpose();
      wrow.middleCols(len, N) = dx * row.middleCols(len, N);
    }
    for (int j = i; j < n; ++j) gam.set(i, j, row.middleCols(static_cast<Eigen::Index>(j - i) * N, N));
  });
  return gam;
}

template <class S>
IntegralRiccatiResidual integral_riccati_residual(const GlmSolution<S>& sol, double w1, double w2,
                                                  const std::vector<Mat<S>>* u_ref, const FdScheme& fd) {
  const Kernel2D<S> gam = riccati_gamma(sol);
  const Grid1 g = gam.grid();
  const int n = g.n, M = gam.rows(), N = gam.cols();
  const double h = w1 - w2, dx = g.dx;
  IntegralRiccatiResidual out;
  const std::vector<Mat<S>>& uref = u_ref ? *u_ref : sol.u;
  if (static_cast<int>(uref.size()) != n) throw GridMismatch("reference u length differs from the GLM grid");
  for (int i = 0; i < n; ++i)
    out.diagonal = std::max(out.diagonal, static_cast<double>((uref[i] + h * Mat<S>(gam.block(i, i))).cwiseAbs().maxCoeff()));

  // ∫_{x}^{z} γ û γ by trapezoid: dx·(Γ Û Γ) minus half the two endpoint terms.
  const Mat<S>& G = gam.data();
  Mat<S> GU(G.rows(), static_cast<Eigen::Index>(n) * M);
  for (int y = 0; y < n; ++y)
    GU.middleCols(static_cast<Eigen::Index>(y) * M, M) = G.middleCols(static_cast<Eigen::Index>(y) * N, N) * sol.uh[y];
  const Mat<S> full = dx * (GU * G);

  const FdOperator D1(n, dx, 1, FdScheme{fd.order, Boundary::ShrinkDomain});
  const int r = D1.first_valid();
  std::vector<double> part(n, 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (!D1.valid(i)) return;
    const Mat<S> gii = gam.block(i, i);
    for (int j = i + r; j <= D1.last_valid(); ++j) {
      const Mat<S> dz = D1.apply(j, [&](int k) { return Mat<S>(gam.block(i, k)); });
      const Mat<S> dxg = D1.apply(i, [&](int k) { return Mat<S>(gam.block(k, j)); });
      const Mat<S> gij = gam.block(i, j);
      const Mat<S> integral = Mat<S>(full.block(static_cast<Eigen::Index>(i) * M, static_cast<Eigen::Index>(j) * N, M, N)) -
                              (0.5 * dx) * (gii * sol.uh[i] * gij + gij * sol.uh[j] * Mat<S>(gam.block(j, j)));
      part[i] = std::max(part[i], static_cast<double>((w1 * dz + w2 * dxg - integral).cwiseAbs().maxCoeff()));
    }
  });
  out.kernel = *std::max_element(part.begin(), part.end());
  return out;
}

#define AKNS_GLM_INSTANTIATE(S)                                                                                  \
  template class Kernel2D<S>;                                                                                    \
  template KernelPair<S> sample_kernel_pair<S>(const LinearKernel&, const Grid1&, double);                      \
  template GlmSolution<S> solve_glm<S>(const KernelPair<S>&, const GlmOptions&);                                \
  template ResolventFields<S> resolvent_fields<S>(const KernelPair<S>&, const GlmOptions&);                     \
  template FactorizationReport<S> factorization_check<S>(const GlmSolution<S>&, const KernelPair<S>&,           \
                                                         const std::vector<double>&, double);                    \
  template Constr1Residual constr1_residual<S>(const GlmSolution<S>&, double, double, const FdScheme&);          \
  template Kernel2D<S> riccati_gamma<S>(const GlmSolution<S>&);                                                 \
  template IntegralRiccatiResidual integral_riccati_residual<S>(const GlmSolution<S>&, double, double,          \
                                                                const std::vector<Mat<S>>*, const FdScheme&);

AKNS_GLM_INSTANTIATE(double)
AKNS_GLM_INSTANTIATE(cplx)

}  // namespace akns
