#pragma once

#include <complex>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "akns/fd.hpp"

namespace akns {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;

/// Block fields sampled on a uniform x-grid at one time: u is M×N, uh is N×M.
struct GridField {
  Grid1 grid;
  int N = 1;
  int M = 1;
  std::vector<MatC> u;
  std::vector<MatC> uh;

  static GridField zeros(const Grid1& g, int N, int M);
  int size() const { return grid.n; }
};

/// Time series of GridField slices on a shared x-grid and uniform t-grid.
struct Trajectory {
  Grid1 t;
  std::vector<GridField> slices;

  const Grid1& x() const { return slices.front().grid; }
  int N() const { return slices.front().N; }
  int M() const { return slices.front().M; }
  /// Throws GridMismatch unless all slices share grid and shapes.
  void validate() const;
};

/// Lazily applies FD derivatives of a GridField; caches one operator per order.
class FieldJet {
 public:
  FieldJet(const GridField& f, FdScheme scheme) : f_(&f), scheme_(scheme) {}

  const GridField& field() const { return *f_; }
  const FdScheme& scheme() const { return scheme_; }
  /// ∂ₓᵏu (uhat=false) or ∂ₓᵏû at grid index i.
  MatC derivative(bool uhat, int k, int i) const;
  /// Valid interior range for derivatives up to order kmax.
  std::pair<int, int> valid_range(int kmax) const;

 private:
  const FdOperator& op(int k) const;

  const GridField* f_;
  FdScheme scheme_;
  mutable std::map<int, std::unique_ptr<FdOperator>> ops_;
};

double sup_norm(const MatC& m);

}  // namespace akns
