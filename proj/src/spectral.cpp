#include "deeprm/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "deeprm/error.hpp"

namespace deeprm {
namespace {

constexpr double kOffDiagonalTolerance = 1e-12;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const SquareMatrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

double frobenius_norm(const SquareMatrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

// Zeroes a(p, q) with a two-sided Givens rotation.
void rotate(SquareMatrix& a, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (r == p || r == q) continue;
    const double arp = a(r, p), arq = a(r, q);
    a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
    a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
  }
}

}  // namespace

SquareMatrix::SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : n_(rows.size()), data_() {
  data_.reserve(n_ * n_);
  for (const auto& row : rows) {
    if (row.size() != n_) throw DomainError("SquareMatrix rows must all have length n");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

bool SquareMatrix::is_symmetric(double tol) const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

double SquareMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

std::vector<double> symmetric_eigenvalues(const SquareMatrix& matrix) {
  if (!matrix.is_symmetric()) throw DomainError("eigenvalue solver needs a symmetric matrix");
  SquareMatrix a = matrix;
  const std::size_t n = a.size();
  const double tol = kOffDiagonalTolerance * std::max(1.0, frobenius_norm(matrix));
  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) > tol; ++sweep)
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) rotate(a, p, q);

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double lambda2(const SquareMatrix& matrix) {
  if (matrix.size() < 2) throw DomainError("lambda2 needs at least a 2x2 matrix");
  return symmetric_eigenvalues(matrix)[1];
}

LaplacianSummary build_laplacian(const CountMatrix& counts, long n) {
  const std::size_t m = counts.size();
  if (m < 2) throw DomainError("Laplacian needs at least two actions");
  long total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (counts[i].size() != m) throw DomainError("count matrix must be square");
    if (counts[i][i] != 0) throw DomainError("count matrix must have a zero diagonal");
    for (std::size_t j = 0; j < m; ++j) {
      if (counts[i][j] < 0) throw DomainError("comparison counts must be nonnegative");
      if (counts[i][j] != counts[j][i]) throw DomainError("comparison counts must be symmetric");
      if (i < j) total += counts[i][j];
    }
  }
  if (n <= 0 || total != n)
    throw DomainError("comparison counts total " + std::to_string(total) + " but N = " +
                      std::to_string(n));

  LaplacianSummary summary;
  summary.counts = counts;
  summary.lambda_matrix = SquareMatrix(m);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < m; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      summary.lambda_matrix(i, j) = -static_cast<double>(counts[i][j]) * inv_n;
      degree += static_cast<double>(counts[i][j]);
    }
    summary.lambda_matrix(i, i) = degree * inv_n;
  }
  summary.lambda2 = std::max(0.0, lambda2(summary.lambda_matrix));
  return summary;
}

}  // namespace deeprm
