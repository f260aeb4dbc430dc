#include "akns/field.hpp"

namespace akns {

GridField GridField::zeros(const Grid1& g, int N, int M) {
  GridField f{g, N, M, {}, {}};
  f.u.assign(static_cast<std::size_t>(g.n), MatC::Zero(M, N));
  f.uh.assign(static_cast<std::size_t>(g.n), MatC::Zero(N, M));
  return f;
}

void Trajectory::validate() const {
  if (slices.empty() || static_cast<int>(slices.size()) != t.n) throw GridMismatch("trajectory slice count != t grid");
  for (const auto& s : slices) {
    if (!s.grid.matches(x()) || s.N != N() || s.M != M()) throw GridMismatch("trajectory slices differ in grid/shape");
    if (static_cast<int>(s.u.size()) != s.grid.n || static_cast<int>(s.uh.size()) != s.grid.n) {
      throw GridMismatch("slice sample count != grid size");
    }
  }
}

const FdOperator& FieldJet::op(int k) const {
  auto it = ops_.find(k);
  if (it == ops_.end()) {
    it = ops_.emplace(k, std::make_unique<FdOperator>(f_->grid.n, f_->grid.dx, k, scheme_)).first;
  }
  return *it->second;
}

MatC FieldJet::derivative(bool uhat, int k, int i) const {
  const auto& s = uhat ? f_->uh : f_->u;
  if (k == 0) return s.at(static_cast<std::size_t>(i));
  return op(k).apply(i, [&](int j) -> const MatC& { return s[static_cast<std::size_t>(j)]; });
}

std::pair<int, int> FieldJet::valid_range(int kmax) const {
  if (kmax <= 0) return {0, f_->grid.n - 1};
  int lo = 0, hi = f_->grid.n - 1;
  for (int k = 1; k <= kmax; ++k) {
    lo = std::max(lo, op(k).first_valid());
    hi = std::min(hi, op(k).last_valid());
  }
  return {lo, hi};
}

double sup_norm(const MatC& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace akns
