#pragma once

#include <array>
#include <cmath>
#include <cstdlib>

#include "lightray/errors.hpp"

// Small dense linear algebra sized for spacetime dimension <= 4.  Everything
// lives on the stack so the geodesic right-hand side stays allocation-free;
// the runtime dimension is carried next to the storage.

namespace lightray {

inline constexpr int kMaxDim = 4;

struct Vec {
  int n = 0;
  std::array<double, kMaxDim> a{};

  Vec() = default;
  explicit Vec(int size) : n(size) {}
  static Vec of(std::initializer_list<double> xs) {
    Vec v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v.a[i++] = x;
    return v;
  }

  double& operator[](int i) { return a[static_cast<size_t>(i)]; }
  double operator[](int i) const { return a[static_cast<size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n; ++i) a[i] += o.a[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n; ++i) a[i] -= o.a[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n; ++i) a[i] *= s;
    return *this;
  }
};

inline Vec operator+(Vec u, const Vec& v) { return u += v; }
inline Vec operator-(Vec u, const Vec& v) { return u -= v; }
inline Vec operator*(double s, Vec v) { return v *= s; }
inline Vec operator*(Vec v, double s) { return v *= s; }
inline Vec operator-(Vec v) {
  for (int i = 0; i < v.n; ++i) v.a[i] = -v.a[i];
  return v;
}

inline double dot(const Vec& u, const Vec& v) {
  double s = 0;
  for (int i = 0; i < u.n; ++i) s += u.a[i] * v.a[i];
  return s;
}

inline double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

inline double max_abs(const Vec& v) {
  double m = 0;
  for (int i = 0; i < v.n; ++i) m = std::max(m, std::abs(v.a[i]));
  return m;
}

// Row-major n x n matrix, capacity 4x4.
struct Mat {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim> a{};

  Mat() = default;
  explicit Mat(int size) : n(size) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i * n + j)]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i * n + j)]; }

  static Mat identity(int size) {
    Mat m(size);
    for (int i = 0; i < size; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat diagonal(const Vec& d) {
    Mat m(d.n);
    for (int i = 0; i < d.n; ++i) m(i, i) = d[i];
    return m;
  }
};

inline Vec mul(const Mat& m, const Vec& v) {
  Vec r(m.n);
  for (int i = 0; i < m.n; ++i) {
    double s = 0;
    for (int j = 0; j < m.n; ++j) s += m(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

inline Mat mul(const Mat& x, const Mat& y) {
  Mat r(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) {
      double s = 0;
      for (int k = 0; k < x.n; ++k) s += x(i, k) * y(k, j);
      r(i, j) = s;
    }
  return r;
}

// v^T M w without forming intermediates.
inline double bilinear(const Mat& m, const Vec& v, const Vec& w) {
  double s = 0;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) s += v[i] * m(i, j) * w[j];
  return s;
}

// LU decomposition with partial pivoting, in place.  Returns the permutation
// sign, or 0 if the matrix is numerically singular.
inline int lu_decompose(Mat& m, std::array<int, kMaxDim>& piv) {
  int sign = 1;
  for (int i = 0; i < m.n; ++i) piv[static_cast<size_t>(i)] = i;
  for (int k = 0; k < m.n; ++k) {
    int p = k;
    double best = std::abs(m(k, k));
    for (int i = k + 1; i < m.n; ++i)
      if (std::abs(m(i, k)) > best) {
        best = std::abs(m(i, k));
        p = i;
      }
    if (best == 0.0) return 0;
    if (p != k) {
      for (int j = 0; j < m.n; ++j) std::swap(m.a[static_cast<size_t>(k * m.n + j)], m.a[static_cast<size_t>(p * m.n + j)]);
      std::swap(piv[static_cast<size_t>(k)], piv[static_cast<size_t>(p)]);
      sign = -sign;
    }
    for (int i = k + 1; i < m.n; ++i) {
      m(i, k) /= m(k, k);
      for (int j = k + 1; j < m.n; ++j) m(i, j) -= m(i, k) * m(k, j);
    }
  }
  return sign;
}

inline double determinant(Mat m) {
  std::array<int, kMaxDim> piv;
  int sign = lu_decompose(m, piv);
  if (sign == 0) return 0.0;
  double d = sign;
  for (int i = 0; i < m.n; ++i) d *= m(i, i);
  return d;
}

inline Vec lu_solve(const Mat& lu, const std::array<int, kMaxDim>& piv, const Vec& b) {
  Vec x(lu.n);
  for (int i = 0; i < lu.n; ++i) x[i] = b[piv[static_cast<size_t>(i)]];
  for (int i = 1; i < lu.n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
  for (int i = lu.n - 1; i >= 0; --i) {
    for (int j = i + 1; j < lu.n; ++j) x[i] -= lu(i, j) * x[j];
    x[i] /= lu(i, i);
  }
  return x;
}

inline Mat inverse(const Mat& m) {
  Mat lu = m;
  std::array<int, kMaxDim> piv;
  if (lu_decompose(lu, piv) == 0) throw DomainError("singular matrix");
  Mat inv(m.n);
  for (int j = 0; j < m.n; ++j) {
    Vec e(m.n);
    e[j] = 1.0;
    Vec col = lu_solve(lu, piv, e);
    for (int i = 0; i < m.n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

// Cholesky factor L (lower) of a symmetric positive definite matrix.
inline Mat cholesky(const Mat& m) {
  Mat l(m.n);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0) throw NotSpacelikeError("matrix not positive definite");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

// Cyclic Jacobi eigenvalue iteration for symmetric matrices.  Values come
// back ascending; vectors (if requested) are the matching columns.
inline void sym_eigen(const Mat& m, Vec& values, Mat* vectors = nullptr) {
  Mat a = m;
  Mat v = Mat::identity(m.n);
  const int n = m.n;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  // insertion sort ascending
  std::array<int, kMaxDim> order;
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  for (int i = 1; i < n; ++i)
    for (int j = i; j > 0 && a(order[static_cast<size_t>(j - 1)], order[static_cast<size_t>(j - 1)]) > a(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]); --j)
      std::swap(order[static_cast<size_t>(j - 1)], order[static_cast<size_t>(j)]);
  values = Vec(n);
  for (int i = 0; i < n; ++i) values[i] = a(order[static_cast<size_t>(i)], order[static_cast<size_t>(i)]);
  if (vectors) {
    *vectors = Mat(n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) (*vectors)(i, j) = v(i, order[static_cast<size_t>(j)]);
  }
}

inline double smallest_eigenvalue(const Mat& m) {
  Vec vals;
  sym_eigen(m, vals);
  return vals[0];
}

// Symmetric square root (and its inverse) via the spectral decomposition.
inline Mat sym_sqrt(const Mat& m, bool invert = false) {
  Vec vals;
  Mat vecs;
  sym_eigen(m, vals, &vecs);
  Mat r(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      double s = 0;
      for (int k = 0; k < m.n; ++k) {
        if (vals[k] <= 0.0) throw NotSpacelikeError("matrix not positive definite");
        double w = invert ? 1.0 / std::sqrt(vals[k]) : std::sqrt(vals[k]);
        s += vecs(i, k) * w * vecs(j, k);
      }
      r(i, j) = s;
    }
  return r;
}

// Christoffel symbols: 64 doubles, indexed (up, lo, lo), symmetric in the
// lower pair by construction.
struct Christoffel {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> a{};

  explicit Christoffel(int size = 0) : n(size) {}
  double& operator()(int mu, int al, int be) {
    return a[static_cast<size_t>((mu * n + al) * n + be)];
  }
  double operator()(int mu, int al, int be) const {
    return a[static_cast<size_t>((mu * n + al) * n + be)];
  }
};

}  // namespace lightray
