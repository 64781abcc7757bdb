#include "msmix/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace msmix {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::ZeroTotalDensity: return "ZeroTotalDensity";
    case ErrorKind::NonpositiveDensity: return "NonpositiveDensity";
    case ErrorKind::SingularBeyondKernel: return "SingularBeyondKernel";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::StateCorrupted: return "StateCorrupted";
    case ErrorKind::AuditFailure: return "AuditFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(std::span<const double> d) {
  Matrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_; ++j) row += std::abs((*this)(i, j));
    best = std::max(best, row);
  }
  return best;
}

double Matrix::max_abs() const {
  double best = 0.0;
  for (double v : a_) best = std::max(best, std::abs(v));
  return best;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.a_.size(); ++i) c.a_[i] += b.a_[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.a_.size(); ++i) c.a_[i] -= b.a_[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.a_) v *= s;
  return c;
}

Vec operator*(const Matrix& a, std::span<const double> x) {
  const std::size_t n = a.size();
  Vec r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double sum(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s;
}

double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double solve_bracketed(const RootProblem& pr) {
  if (!(pr.tol_abs > 0.0) || pr.max_iter < 1)
    throw Error(ErrorKind::InvalidArgument, "root problem needs tol_abs > 0 and max_iter >= 1");
  double a = std::min(pr.bracket_lo, pr.bracket_hi);
  double b = std::max(pr.bracket_lo, pr.bracket_hi);
  double fa = pr.f(a);
  double fb = pr.f(b);
  if (std::abs(fa) <= pr.tol_abs) return a;
  if (std::abs(fb) <= pr.tol_abs) return b;
  if (std::isnan(fa) || std::isnan(fb) || (fa < 0) == (fb < 0)) {
    std::ostringstream os;
    os << "f(" << a << ")=" << fa << ", f(" << b << ")=" << fb;
    throw Error(ErrorKind::NoBracket, os.str());
  }
  const bool newton = pr.df && !pr.bisection_only;
  double x = (pr.guess && *pr.guess > a && *pr.guess < b) ? *pr.guess : 0.5 * (a + b);
  double prev_step = b - a;
  double best_x = std::abs(fa) < std::abs(fb) ? a : b;
  double best_f = std::min(std::abs(fa), std::abs(fb));

  for (int it = 0; it < pr.max_iter; ++it) {
    const double fx = pr.f(x);
    if (std::abs(fx) < best_f) {
      best_f = std::abs(fx);
      best_x = x;
    }
    if (std::abs(fx) <= pr.tol_abs) return x;
    if ((fx < 0) == (fa < 0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    if (b - a <= pr.tol_abs) return best_x;

    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) return best_x;  // bracket is two adjacent doubles

    double next = mid;
    if (newton) {
      const double d = pr.df(x);
      if (d != 0.0 && std::isfinite(d)) {
        const double cand = x - fx / d;
        // accept only steps that stay inside and keep shrinking
        if (cand > a && cand < b && std::abs(cand - x) < 0.5 * prev_step) next = cand;
      }
    }
    prev_step = std::abs(next - x);
    if (prev_step == 0.0) return best_x;
    x = next;
  }
  throw ConvergenceError("solve_bracketed: max_iter exceeded", best_x, best_f);
}

LU::LU(const Matrix& a) : lu_(a), perm_(a.size()) {
  const std::size_t n = a.size();
  const double scale = a.max_abs();
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        piv = i;
      }
    if (!(best > 1e-14 * scale))
      throw Error(ErrorKind::Singular, "pivot below 1e-14*max|A| at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = lu_(i, k) / lu_(k, k);
      lu_(i, k) = l;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
    }
  }
}

Vec LU::solve(std::span<const double> rhs) const {
  const std::size_t n = lu_.size();
  Vec z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * z[j];
    z[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = z[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * z[j];
    z[i] = s / lu_(i, i);
  }
  return z;
}

Matrix LU::inverse() const {
  const std::size_t n = lu_.size();
  Matrix inv(n);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vec col = solve(e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

Vec lu_solve(const Matrix& a, std::span<const double> rhs) { return LU(a).solve(rhs); }

bool is_symmetric(const Matrix& a, double rel_tol) {
  const double tol = rel_tol * a.max_abs();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

Vec symmetric_eigenvalues(const Matrix& in) {
  if (!is_symmetric(in)) throw Error(ErrorKind::NotSymmetric, "matrix is not symmetric to 1e-12");
  const std::size_t n = in.size();
  Matrix a = in;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));

  const double scale = a.max_abs();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off = std::max(off, std::abs(a(i, j)));
    if (off <= 1e-17 * scale || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
      }
  }
  Vec ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double min_symmetric_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return symmetric_eigenvalues(a).front();
}

double max_symmetric_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return symmetric_eigenvalues(a).back();
}

std::optional<Matrix> cholesky(const Matrix& a) {
  const std::size_t n = a.size();
  Matrix l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

}  // namespace msmix
