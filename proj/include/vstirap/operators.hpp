#pragma once

// Sparse operator building blocks on the composite atom (x) cavity space.

#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "vstirap/common.hpp"

namespace vstirap {

inline SparseOp sparse_identity(int n) {
  SparseOp id(n, n);
  id.setIdentity();
  return id;
}

/// Annihilation operator on an (n_max+1)-level Fock space.
inline SparseOp annihilation(int n_levels) {
  SparseOp a(n_levels, n_levels);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int n = 1; n < n_levels; ++n) trip.emplace_back(n - 1, n, std::sqrt(double(n)));
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

/// |i><j| on an n-dimensional space.
inline SparseOp transfer(int n, int i, int j, cplx amp = 1.0) {
  SparseOp t(n, n);
  t.insert(i, j) = amp;
  t.makeCompressed();
  return t;
}

inline SparseOp projector(int n, const std::vector<int>& indices) {
  SparseOp p(n, n);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int i : indices) trip.emplace_back(i, i, 1.0);
  p.setFromTriplets(trip.begin(), trip.end());
  return p;
}

inline SparseOp kron(const SparseOp& a, const SparseOp& b) {
  SparseOp out = Eigen::kroneckerProduct(a, b);
  out.makeCompressed();
  return out;
}

inline SparseOp dagger(const SparseOp& a) { return SparseOp(a.adjoint()); }

}  // namespace vstirap
