#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace dualgnn::fft {

using cplx = std::complex<double>;

namespace detail {

// FFTW planning is not thread-safe; plans are created once per (kind, size)
// under a lock and executed with the thread-safe new-array interface.
class PlanCache {
 public:
  enum Kind { kForward, kInverse, kR2C, kC2R };

  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Kind kind, int n) {
    std::lock_guard lock(mu_);
    auto it = plans_.find({kind, n});
    if (it != plans_.end()) return it->second;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::vector<double> rbuf(static_cast<std::size_t>(n));
    std::vector<cplx> cin(static_cast<std::size_t>(n)), cout(static_cast<std::size_t>(n));
    auto* ci = reinterpret_cast<fftw_complex*>(cin.data());
    auto* co = reinterpret_cast<fftw_complex*>(cout.data());
    fftw_plan p = nullptr;
    switch (kind) {
      case kForward: p = fftw_plan_dft_1d(n, ci, co, FFTW_FORWARD, flags); break;
      case kInverse: p = fftw_plan_dft_1d(n, ci, co, FFTW_BACKWARD, flags); break;
      case kR2C: p = fftw_plan_dft_r2c_1d(n, rbuf.data(), co, flags); break;
      case kC2R: p = fftw_plan_dft_c2r_1d(n, ci, rbuf.data(), flags); break;
    }
    plans_.emplace(std::pair{kind, n}, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [_, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<std::pair<Kind, int>, fftw_plan> plans_;
};

}  // namespace detail

// Unnormalized forward DFT.
inline std::vector<cplx> forward(std::span<const cplx> x) {
  const int n = static_cast<int>(x.size());
  std::vector<cplx> in(x.begin(), x.end()), out(x.size());
  if (n == 0) return out;
  auto p = detail::PlanCache::instance().get(detail::PlanCache::kForward, n);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

// Inverse DFT scaled by 1/n.
inline std::vector<cplx> inverse(std::span<const cplx> x) {
  const int n = static_cast<int>(x.size());
  std::vector<cplx> in(x.begin(), x.end()), out(x.size());
  if (n == 0) return out;
  auto p = detail::PlanCache::instance().get(detail::PlanCache::kInverse, n);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  const double s = 1.0 / n;
  for (auto& v : out) v *= s;
  return out;
}

// Real-input forward DFT; returns bins 0..n/2.
inline std::vector<cplx> rfft(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x.begin(), x.end());
  std::vector<cplx> out(x.size() / 2 + 1);
  if (n == 0) return {};
  auto p = detail::PlanCache::instance().get(detail::PlanCache::kR2C, n);
  fftw_execute_dft_r2c(p, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

// Inverse of rfft for a length-n signal, scaled by 1/n.
inline std::vector<double> irfft(std::span<const cplx> spectrum, std::size_t n) {
  std::vector<cplx> in(spectrum.begin(), spectrum.end());
  in.resize(n / 2 + 1);
  std::vector<double> out(n);
  if (n == 0) return out;
  auto p = detail::PlanCache::instance().get(detail::PlanCache::kC2R, static_cast<int>(n));
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double s = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= s;
  return out;
}

}  // namespace dualgnn::fft
