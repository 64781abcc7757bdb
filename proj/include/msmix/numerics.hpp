#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "msmix/errors.hpp"

namespace msmix {

using Vec = std::vector<double>;

// Dense square matrix, row-major. Sized for species counts (n <= 64).
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diag(std::span<const double> d);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  const std::vector<double>& data() const { return a_; }

  Matrix transpose() const;
  double norm_inf() const;   // max row sum
  double max_abs() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend Vec operator*(const Matrix& a, std::span<const double> x);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
double sum(std::span<const double> a);

// Scalar root problem on a bracket. df is optional; without it (or with
// bisection_only) the solver bisects.
struct RootProblem {
  std::function<double(double)> f;
  std::function<double(double)> df;
  double bracket_lo = 0.0;
  double bracket_hi = 1.0;
  double tol_abs = 1e-12;
  int max_iter = 400;
  std::optional<double> guess;
  bool bisection_only = false;
};

double solve_bracketed(const RootProblem& problem);

// LU with partial pivoting, reusable for several right-hand sides.
class LU {
 public:
  explicit LU(const Matrix& a);
  Vec solve(std::span<const double> rhs) const;
  Matrix inverse() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

Vec lu_solve(const Matrix& a, std::span<const double> rhs);

// Cyclic Jacobi; eigenvalues ascending.
Vec symmetric_eigenvalues(const Matrix& a);
double min_symmetric_eigenvalue(const Matrix& a);
double max_symmetric_eigenvalue(const Matrix& a);

// Lower Cholesky factor, or nullopt if a is not numerically positive definite.
std::optional<Matrix> cholesky(const Matrix& a);

bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

// log(sum(exp(v))) without overflow.
double log_sum_exp(std::span<const double> v);

}  // namespace msmix
