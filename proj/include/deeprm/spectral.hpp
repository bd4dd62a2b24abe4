#pragma once

#include <cstddef>
#include <vector>

#include "deeprm/dataset.hpp"

namespace deeprm {

// Dense square matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  bool is_symmetric(double tol = 0.0) const;
  double trace() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct LaplacianSummary {
  SquareMatrix lambda_matrix;
  double lambda2 = 0.0;
  CountMatrix counts;
};

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Sweeps until the off-diagonal Frobenius norm drops below 1e-12 (relative
// to the matrix norm when that exceeds 1).
std::vector<double> symmetric_eigenvalues(const SquareMatrix& matrix);

// Second-smallest eigenvalue.
double lambda2(const SquareMatrix& matrix);

// Lambda_ij = -n_ij / N, Lambda_ii = sum_{j != i} n_ij / N, where
// N = sum_{i<j} n_ij must equal `n`.
LaplacianSummary build_laplacian(const CountMatrix& counts, long n);

}  // namespace deeprm
