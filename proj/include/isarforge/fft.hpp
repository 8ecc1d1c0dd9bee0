#pragma once

// Thin FFTW wrapper: in-place complex transforms along either axis of a
// row-major matrix, with a process-wide plan cache.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "isarforge/core.hpp"

namespace isarforge {

using cdouble = std::complex<double>;

/// Row-major complex matrix.
struct CMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cdouble> data;

  CMatrix() = default;
  CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  cdouble& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const cdouble& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  cdouble* row(std::size_t r) { return data.data() + r * cols; }
  const cdouble* row(std::size_t r) const { return data.data() + r * cols; }
  std::size_t size() const { return data.size(); }
};

/// Kernel sign: kForward uses exp(-j...), kBackward exp(+j...). Neither scales.
enum class FftSign : int { kForward = FFTW_FORWARD, kBackward = FFTW_BACKWARD };

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  /// In-place plan for `howmany` transforms of length n, element stride
  /// `stride`, transform spacing `dist`.
  fftw_plan get(int n, int howmany, int stride, int dist, FftSign sign) {
    const auto key = std::make_tuple(n, howmany, stride, dist, static_cast<int>(sign));
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cdouble> scratch(static_cast<std::size_t>(n - 1) * stride +
                                 static_cast<std::size_t>(howmany - 1) * dist + 1);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, stride, dist, buf, nullptr,
                                     stride, dist, static_cast<int>(sign),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw Error("FFTW failed to create a plan");
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int, int, int>, fftw_plan> plans_;
};

inline void execute(fftw_plan p, cdouble* data) {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, buf, buf);
}

}  // namespace detail

/// In-place unnormalised DFT of a contiguous vector.
inline void fft_inplace(cdouble* data, std::size_t n, FftSign sign) {
  if (n == 0) return;
  auto p = detail::PlanCache::instance().get(static_cast<int>(n), 1, 1, static_cast<int>(n), sign);
  detail::execute(p, data);
}

inline void fft_inplace(std::vector<cdouble>& v, FftSign sign) { fft_inplace(v.data(), v.size(), sign); }

/// Transform every row (along the column index).
inline void fft_rows(CMatrix& a, FftSign sign) {
  if (a.size() == 0) return;
  const int n = static_cast<int>(a.cols);
  auto p = detail::PlanCache::instance().get(n, static_cast<int>(a.rows), 1, n, sign);
  detail::execute(p, a.data.data());
}

/// Transform every column (along the row index).
inline void fft_cols(CMatrix& a, FftSign sign) {
  if (a.size() == 0) return;
  const int n = static_cast<int>(a.rows);
  const int c = static_cast<int>(a.cols);
  auto p = detail::PlanCache::instance().get(n, c, c, 1, sign);
  detail::execute(p, a.data.data());
}

/// Move the zero-frequency element of each axis to index floor(n/2).
inline void fftshift(CMatrix& a) {
  CMatrix out(a.rows, a.cols);
  const std::size_t sr = a.rows / 2, sc = a.cols / 2;
  for (std::size_t r = 0; r < a.rows; ++r) {
    const std::size_t rr = (r + sr) % a.rows;
    for (std::size_t c = 0; c < a.cols; ++c) out(rr, (c + sc) % a.cols) = a(r, c);
  }
  a = std::move(out);
}

}  // namespace isarforge
