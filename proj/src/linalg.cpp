#include "siir/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace siir {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cdouble> d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix ComplexMatrix::from_rows(std::initializer_list<std::initializer_list<cdouble>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  ComplexMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(Errc::invalid_argument, "ragged matrix literal");
    std::size_t j = 0;
    for (const auto& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) out(c, r) = std::conj((*this)(r, c));
  return out;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

cdouble ComplexMatrix::trace() const {
  cdouble t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::hermitian_defect() const {
  if (!square()) return INFINITY;
  double d = 0.0;
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r <= c; ++r)
      d = std::max(d, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
  return d;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw Error(Errc::invalid_argument, "shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw Error(Errc::invalid_argument, "shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cdouble s) {
  for (auto& v : data_) v *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw Error(Errc::invalid_argument, "shape mismatch in matrix product");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cdouble bkj = b(k, j);
      if (bkj == cdouble{}) continue;
      for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) += a(i, k) * bkj;
    }
  return out;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(cdouble s, ComplexMatrix a) { return a *= s; }

CVector operator*(const ComplexMatrix& a, std::span<const cdouble> x) {
  if (a.cols() != x.size()) throw Error(Errc::invalid_argument, "shape mismatch in matrix-vector product");
  CVector out(a.rows());
  for (std::size_t k = 0; k < a.cols(); ++k)
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] += a(i, k) * x[k];
  return out;
}

double norm2(std::span<const cdouble> x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver

EigenDecomposition hermitian_eig(const ComplexMatrix& m, double hermitian_tol) {
  if (!m.square()) throw Error(Errc::not_hermitian, "matrix is not square");
  const double defect = m.hermitian_defect();
  if (!(defect <= hermitian_tol))
    throw Error(Errc::not_hermitian, "max |M - M^H| = " + std::to_string(defect));

  const std::size_t n = m.rows();
  ComplexMatrix a(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) a(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  ComplexMatrix v = ComplexMatrix::identity(n);

  double frob = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) frob += std::norm(a(i, j));
  frob = std::sqrt(frob);

  constexpr int kMaxSweeps = 200;
  bool converged = (frob == 0.0);
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t q = 1; q < n; ++q)
      for (std::size_t p = 0; p < q; ++p) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-15 * frob) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cdouble apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const cdouble phase = apq / mag;
        const double zeta = (aqq - app) / (2.0 * mag);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cdouble ph_conj = std::conj(phase);

        // A <- A G,  G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
        for (std::size_t k = 0; k < n; ++k) {
          const cdouble akp = a(k, p);
          const cdouble akq = a(k, q);
          a(k, p) = c * akp - s * ph_conj * akq;
          a(k, q) = s * akp + c * ph_conj * akq;
        }
        // A <- G^H A
        for (std::size_t k = 0; k < n; ++k) {
          const cdouble apk = a(p, k);
          const cdouble aqk = a(q, k);
          a(p, k) = c * apk - s * phase * aqk;
          a(q, k) = s * apk + c * phase * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const cdouble vkp = v(k, p);
          const cdouble vkq = v(k, q);
          v(k, p) = c * vkp - s * ph_conj * vkq;
          v(k, q) = s * vkp + c * ph_conj * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t q = 1; q < n; ++q)
      for (std::size_t p = 0; p < q; ++p) off += std::norm(a(p, q));
    if (std::sqrt(off) > 1e-15 * frob)
      throw Error(Errc::no_convergence, "Jacobi iteration exceeded 200 sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cholesky

namespace {

double rayleigh(const ComplexMatrix& a, std::span<const cdouble> x) {
  const CVector ax = a * x;
  cdouble num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += std::conj(x[i]) * ax[i];
    den += std::norm(x[i]);
  }
  return num.real() / den;
}

CVector probe_vector(std::size_t n) {
  // Deterministic, not orthogonal to any structured eigenvector we produce.
  CVector x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = cdouble(1.0 + 0.37 * static_cast<double>(i), 0.11 * static_cast<double>(i * i % 7));
  return x;
}

void normalize(CVector& x) {
  const double nrm = norm2(x);
  for (auto& v : x) v /= nrm;
}

}  // namespace

Cholesky::Cholesky(const ComplexMatrix& a) : l_(a.rows(), a.cols()) {
  if (!a.square()) throw Error(Errc::singular_matrix, "matrix is not square");
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i).real());
  if (!(max_diag > 0.0)) throw Error(Errc::singular_matrix, "non-positive diagonal");

  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l_(j, k));
    if (!(d > 1e-14 * max_diag))
      throw Error(Errc::singular_matrix, "Cholesky pivot " + std::to_string(j) + " not positive");
    const double ljj = std::sqrt(d);
    l_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cdouble s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * std::conj(l_(j, k));
      l_(i, j) = s / ljj;
    }
  }

  // Conditioning check: smallest eigenvalue by inverse iteration, largest by
  // power iteration.
  if (n > 1) {
    CVector x = probe_vector(n);
    CVector y = x;
    for (int it = 0; it < 12; ++it) {
      normalize(x);
      x = solve(x);
      normalize(y);
      y = a * y;
    }
    normalize(x);
    normalize(y);
    const double lmin = rayleigh(a, x);
    const double lmax = std::max(rayleigh(a, y), max_diag);
    if (!(lmin > 1e-12 * lmax))
      throw Error(Errc::singular_matrix, "smallest eigenvalue below 1e-12 of largest");
  }
}

CVector Cholesky::solve(std::span<const cdouble> b) const {
  const std::size_t n = l_.rows();
  if (b.size() != n) throw Error(Errc::invalid_argument, "right-hand side length mismatch");
  CVector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    cdouble s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
    y[i] = s / l_(i, i).real();
  }
  for (std::size_t ii = n; ii-- > 0;) {
    cdouble s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l_(k, ii)) * y[k];
    y[ii] = s / l_(ii, ii).real();
  }
  return y;
}

ComplexMatrix Cholesky::inverse() const {
  const std::size_t n = l_.rows();
  ComplexMatrix inv(n, n);
  CVector e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), cdouble{});
    e[j] = 1.0;
    const CVector x = solve(e);
    std::copy(x.begin(), x.end(), inv.col(j).begin());
  }
  // Enforce exact Hermitian symmetry.
  for (std::size_t j = 0; j < n; ++j) {
    inv(j, j) = inv(j, j).real();
    for (std::size_t i = j + 1; i < n; ++i) {
      const cdouble v = 0.5 * (inv(i, j) + std::conj(inv(j, i)));
      inv(i, j) = v;
      inv(j, i) = std::conj(v);
    }
  }
  return inv;
}

CVector hermitian_solve(const ComplexMatrix& a, std::span<const cdouble> b) { return Cholesky(a).solve(b); }

ComplexMatrix hermitian_inverse(const ComplexMatrix& a) { return Cholesky(a).inverse(); }

// ---------------------------------------------------------------------------
// General eigenvalues

namespace {

void to_hessenberg(ComplexMatrix& h) {
  const std::size_t n = h.rows();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm += std::norm(h(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    const cdouble x0 = h(k + 1, k);
    const cdouble phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : cdouble(1.0);
    CVector v(n - k - 1);
    for (std::size_t i = k + 1; i < n; ++i) v[i - k - 1] = h(i, k);
    v[0] += phase * xnorm;
    const double vn = norm2(v);
    if (vn == 0.0) continue;
    for (auto& e : v) e /= vn;
    // H <- (I - 2 v v^H) H
    for (std::size_t j = 0; j < n; ++j) {
      cdouble s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += std::conj(v[i]) * h(k + 1 + i, j);
      for (std::size_t i = 0; i < v.size(); ++i) h(k + 1 + i, j) -= 2.0 * v[i] * s;
    }
    // H <- H (I - 2 v v^H)
    for (std::size_t i = 0; i < n; ++i) {
      cdouble s = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) s += h(i, k + 1 + j) * v[j];
      for (std::size_t j = 0; j < v.size(); ++j) h(i, k + 1 + j) -= 2.0 * s * std::conj(v[j]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

}  // namespace

CVector small_general_eigenvalues(const ComplexMatrix& m) {
  if (!m.square()) throw Error(Errc::invalid_argument, "matrix is not square");
  const std::size_t n = m.rows();
  if (n > 8) throw Error(Errc::invalid_argument, "small_general_eigenvalues supports n <= 8");
  CVector eig;
  if (n == 0) return eig;

  ComplexMatrix h = m;
  to_hessenberg(h);
  const double scale = std::max(h.max_abs(), 1e-300);
  constexpr double eps = 2.220446049250313e-16;

  std::size_t hi = n - 1;
  int iter = 0;
  int total = 0;
  const int max_total = 60 * static_cast<int>(n);
  while (true) {
    if (hi == 0) {
      eig.push_back(h(0, 0));
      break;
    }
    // Find the start of the unreduced block ending at hi.
    std::size_t lo = hi;
    while (lo > 0) {
      const double sub = std::abs(h(lo, lo - 1));
      const double diag = std::abs(h(lo, lo)) + std::abs(h(lo - 1, lo - 1));
      if (sub <= eps * (diag > 0.0 ? diag : scale)) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eig.push_back(h(hi, hi));
      --hi;
      iter = 0;
      continue;
    }
    if (++total > max_total) throw Error(Errc::no_convergence, "shifted QR exceeded iteration cap");
    ++iter;

    // Wilkinson shift from the trailing 2x2 block.
    const cdouble a = h(hi - 1, hi - 1), b = h(hi - 1, hi), c = h(hi, hi - 1), d = h(hi, hi);
    cdouble mu;
    if (iter % 11 == 0) {
      mu = d + std::abs(c) * 0.75;  // exceptional shift
    } else {
      const cdouble half = 0.5 * (a - d);
      const cdouble disc = std::sqrt(half * half + b * c);
      const cdouble mu1 = 0.5 * (a + d) + disc;
      const cdouble mu2 = 0.5 * (a + d) - disc;
      mu = std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
    }

    for (std::size_t i = lo; i <= hi; ++i) h(i, i) -= mu;
    std::vector<std::pair<cdouble, cdouble>> rot;
    rot.reserve(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) {
      const cdouble x = h(k, k), y = h(k + 1, k);
      const double r = std::hypot(std::abs(x), std::abs(y));
      cdouble cs = 1.0, sn = 0.0;
      if (r > 0.0) {
        cs = x / r;
        sn = y / r;
      }
      for (std::size_t j = k; j <= hi; ++j) {
        const cdouble hk = h(k, j), hk1 = h(k + 1, j);
        h(k, j) = std::conj(cs) * hk + std::conj(sn) * hk1;
        h(k + 1, j) = -sn * hk + cs * hk1;
      }
      rot.emplace_back(cs, sn);
    }
    for (std::size_t k = lo; k < hi; ++k) {
      const auto [cs, sn] = rot[k - lo];
      const std::size_t last = std::min(k + 2, hi);
      for (std::size_t i = lo; i <= last; ++i) {
        const cdouble hk = h(i, k), hk1 = h(i, k + 1);
        h(i, k) = cs * hk + sn * hk1;
        h(i, k + 1) = -std::conj(sn) * hk + std::conj(cs) * hk1;
      }
    }
    for (std::size_t i = lo; i <= hi; ++i) h(i, i) += mu;
  }
  return eig;
}

// ---------------------------------------------------------------------------
// Least squares

ComplexMatrix least_squares(const ComplexMatrix& a_in, const ComplexMatrix& b_in) {
  const std::size_t m = a_in.rows(), n = a_in.cols();
  if (b_in.rows() != m) throw Error(Errc::invalid_argument, "least_squares: row mismatch");
  if (m < n) throw Error(Errc::singular_matrix, "least_squares: underdetermined system");
  ComplexMatrix a = a_in;
  ComplexMatrix b = b_in;
  double max_r = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k; i < m; ++i) xnorm += std::norm(a(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) throw Error(Errc::singular_matrix, "least_squares: rank deficient");
    const cdouble x0 = a(k, k);
    const cdouble phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : cdouble(1.0);
    CVector v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = a(i, k);
    v[0] += phase * xnorm;
    const double vn = norm2(v);
    for (auto& e : v) e /= vn;
    auto reflect = [&](ComplexMatrix& t) {
      for (std::size_t j = 0; j < t.cols(); ++j) {
        cdouble s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += std::conj(v[i]) * t(k + i, j);
        for (std::size_t i = 0; i < v.size(); ++i) t(k + i, j) -= 2.0 * v[i] * s;
      }
    };
    reflect(a);
    reflect(b);
    max_r = std::max(max_r, std::abs(a(k, k)));
  }
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(a(k, k)) <= 1e-12 * max_r) throw Error(Errc::singular_matrix, "least_squares: rank deficient");

  ComplexMatrix x(n, b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t ii = n; ii-- > 0;) {
      cdouble s = b(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, j);
      x(ii, j) = s / a(ii, ii);
    }
  }
  return x;
}

}  // namespace siir
