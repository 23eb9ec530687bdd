/*
 * Copyright (c) 2026 The expeval Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reference implementations used as test oracles. They are written directly
// from the definitions, favour clarity over speed, and share no code with the
// library.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

enum class Std { None, Mean, MeanLog, StandardScore };

inline double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline std::vector<double> standardize(const std::vector<double>& x, Std kind) {
  const double n = static_cast<double>(x.size());
  std::vector<double> out(x.size());
  switch (kind) {
    case Std::None:
      return x;
    case Std::Mean: {
      const double m = sum(x) / n;
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - m;
      return out;
    }
    case Std::MeanLog: {
      std::vector<double> l(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) l[i] = std::log2(x[i]);
      const double m = sum(l) / n;
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = l[i] - m;
      return out;
    }
    case Std::StandardScore: {
      const double m = sum(x) / n;
      double ss = 0.0;
      for (double v : x) ss += (v - m) * (v - m);
      const double sd = std::sqrt(ss / n);
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / sd;
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

inline double mse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// Sample covariance over the product of sample standard deviations.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = sum(a) / n, mb = sum(b) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return (cov / (n - 1)) / (std::sqrt(va / (n - 1)) * std::sqrt(vb / (n - 1)));
}

struct Triplet {
  std::size_t reference, test, random;
  int bit;
};

struct PieceResult {
  std::vector<Triplet> triplets;
  std::size_t defined = 0;
  std::size_t zeros = 0;
  double validity_error = 0.0;
  double reliability = 0.0;
  double mse_ee = 0.0, mse_er = 0.0, mse_rr = 0.0;
};

// Enumerates every (reference, test expert, random) combination.
inline PieceResult evaluate_piece(const std::vector<std::vector<double>>& experts,
                                  const std::vector<std::vector<double>>& randoms, Std kind) {
  std::vector<std::vector<double>> se, sr;
  for (const auto& e : experts) se.push_back(standardize(e, kind));
  for (const auto& r : randoms) sr.push_back(standardize(r, kind));
  const std::size_t n = experts.size(), m = randoms.size();

  PieceResult out;
  // bit[r][e][j], -1 for undefined
  std::vector<std::vector<std::vector<int>>> bit(n, std::vector<std::vector<int>>(n, std::vector<int>(m, -1)));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t e = 0; e < n; ++e) {
      if (e == r) continue;
      for (std::size_t j = 0; j < m; ++j) {
        const double e1 = mse(se[e], se[r]);
        const double e2 = mse(sr[j], se[r]);
        const int b = e1 < e2 ? 1 : 0;
        bit[r][e][j] = b;
        out.triplets.push_back({r, e, j, b});
        ++out.defined;
        if (b == 0) ++out.zeros;
      }
    }
  out.validity_error = static_cast<double>(out.zeros) / static_cast<double>(out.defined);

  double corr_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t r1 = 0; r1 < n; ++r1)
    for (std::size_t r2 = r1 + 1; r2 < n; ++r2) {
      std::vector<double> v1, v2;
      for (std::size_t e = 0; e < n; ++e) {
        if (e == r1 || e == r2) continue;
        for (std::size_t j = 0; j < m; ++j) {
          v1.push_back(bit[r1][e][j]);
          v2.push_back(bit[r2][e][j]);
        }
      }
      if (v1.empty()) continue;
      auto constant = [](const std::vector<double>& v) {
        for (double x : v)
          if (x != v.front()) return false;
        return true;
      };
      double c;
      if (!constant(v1) && !constant(v2)) {
        c = pearson(v1, v2);
      } else {
        std::size_t agree = 0;
        for (std::size_t i = 0; i < v1.size(); ++i) agree += v1[i] == v2[i];
        c = 2.0 * static_cast<double>(agree) / static_cast<double>(v1.size()) - 1.0;
      }
      corr_sum += c;
      ++pairs;
    }
  out.reliability = corr_sum / static_cast<double>(pairs);

  double s = 0.0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++c) s += mse(se[i], se[j]);
  out.mse_ee = s / static_cast<double>(c);
  s = 0.0;
  c = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j, ++c) s += mse(se[i], sr[j]);
  out.mse_er = s / static_cast<double>(c);
  s = 0.0;
  c = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j, ++c) s += mse(sr[i], sr[j]);
  out.mse_rr = c ? s / static_cast<double>(c) : std::nan("");
  return out;
}

// C(n,k) / 2^n by exact big-integer style accumulation in long double for
// small n (n <= 64).
inline long double binomial_small(unsigned n, unsigned k) {
  long double c = 1.0L;
  for (unsigned i = 1; i <= k; ++i) c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  return c / std::pow(2.0L, static_cast<long double>(n));
}

}  // namespace oracle
