#pragma once

// Eros (Extended Frobenius norm) similarity between multivariate time series
// of different lengths: a weighted sum of absolute inner products between
// positionally paired eigenvectors of each series' covariance matrix.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "netrca/core.hpp"

namespace netrca {

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenpairs are
// sorted by eigenvalue descending (stable on ties) and each eigenvector's
// largest-magnitude entry is made positive, so the result is a deterministic
// function of the input.
inline SymmetricEigen jacobi_eigen(Matrix a, double tolerance = 1e-12, int max_sweeps = 100) {
  const std::size_t n = a.rows;
  if (a.cols != n) throw InvalidArgument("jacobi_eigen: matrix not square");
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double norm = 0.0;
  for (double x : a.data) norm += x * x;
  norm = std::sqrt(norm);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= tolerance * std::max(norm, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    std::size_t big = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(v(i, src)) > std::abs(v(big, src))) big = i;
    }
    const double sign = v(big, src) < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
  }
  return out;
}

struct ErosDecomposition {
  std::string sample_id;
  std::vector<double> eigenvalues;  // non-increasing, >= 0
  Matrix eigenvectors;              // n x n, column i is v_i
};

struct ErosWeights {
  std::vector<double> w;
};

// Column-centred sample covariance X'X / max(m-1, 1).
inline Matrix covariance(const Matrix& x) {
  const std::size_t m = x.rows;
  const std::size_t n = x.cols;
  std::vector<double> mean(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) mean[c] += x(r, c);
  for (double& v : mean) v /= static_cast<double>(m);
  Matrix cov(n, n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double di = x(r, i) - mean[i];
      for (std::size_t j = i; j < n; ++j) cov(i, j) += di * (x(r, j) - mean[j]);
    }
  }
  const double denom = static_cast<double>(std::max<std::size_t>(m - 1, 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

inline ErosDecomposition decompose(const Matrix& values, std::string sample_id = {}) {
  if (values.rows == 0 || values.cols == 0) throw InvalidArgument("decompose: empty matrix");
  for (double v : values.data) {
    if (!std::isfinite(v)) throw InvalidArgument("decompose: non-finite value in sample " + sample_id);
  }
  ErosDecomposition d;
  d.sample_id = std::move(sample_id);
  auto eig = jacobi_eigen(covariance(values));
  d.eigenvalues = std::move(eig.values);
  for (double& v : d.eigenvalues) {
    if (v < 0.0) v = 0.0;
  }
  d.eigenvectors = std::move(eig.vectors);
  return d;
}

inline ErosDecomposition decompose(const Sample& sample) { return decompose(sample.values, sample.id); }

// Mean of the per-decomposition normalized eigenvalue vectors.
inline ErosWeights eros_weights(std::span<const ErosDecomposition> decomps) {
  if (decomps.empty()) throw InvalidArgument("eros_weights: no decompositions");
  const std::size_t n = decomps.front().eigenvalues.size();
  std::vector<double> w(n, 0.0);
  for (const auto& d : decomps) {
    if (d.eigenvalues.size() != n) throw InvalidArgument("eros_weights: dimension mismatch");
    double total = 0.0;
    for (double v : d.eigenvalues) total += v;
    for (std::size_t i = 0; i < n; ++i) w[i] += total > 0.0 ? d.eigenvalues[i] / total : 1.0 / static_cast<double>(n);
  }
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return ErosWeights{w};
}

inline double eros(const ErosDecomposition& a, const ErosDecomposition& b, const ErosWeights& w) {
  const std::size_t n = a.eigenvalues.size();
  if (b.eigenvalues.size() != n || w.w.size() != n || a.eigenvectors.rows != n || b.eigenvectors.rows != n) {
    throw InvalidArgument("eros: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t k = 0; k < n; ++k) dot += a.eigenvectors(k, i) * b.eigenvectors(k, i);
    s += w.w[i] * std::abs(dot);
  }
  return std::clamp(s, 0.0, 1.0);
}

}  // namespace netrca
