#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dualgnn/errors.hpp"
#include "dualgnn/fft.hpp"

namespace dualgnn::dsp {

using Signal = std::vector<double>;

// ---------------------------------------------------------------------------
// Resampling

// Linear-phase low-pass FIR designed by the window method (Hamming), unit DC
// gain. `cutoff` is in cycles per sample (0 < cutoff < 0.5); `order` is even.
inline std::vector<double> fir_lowpass(int order, double cutoff) {
  if (order < 2 || order % 2 != 0) throw ValidationError("fir_lowpass: order must be even and >= 2");
  if (!(cutoff > 0.0 && cutoff < 0.5)) throw ValidationError("fir_lowpass: cutoff must be in (0, 0.5)");
  std::vector<double> h(static_cast<std::size_t>(order) + 1);
  const double mid = order / 2.0;
  double sum = 0.0;
  for (int k = 0; k <= order; ++k) {
    const double t = k - mid;
    const double sinc = (t == 0.0) ? 2.0 * cutoff
                                   : std::sin(2.0 * std::numbers::pi * cutoff * t) / (std::numbers::pi * t);
    const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / order);
    h[static_cast<std::size_t>(k)] = sinc * w;
    sum += h[static_cast<std::size_t>(k)];
  }
  for (auto& v : h) v /= sum;
  return h;
}

// Magnitude response of an FIR at `freq` cycles/sample.
inline double fir_gain(std::span<const double> h, double freq) {
  std::complex<double> acc = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k)
    acc += h[k] * std::polar(1.0, -2.0 * std::numbers::pi * freq * static_cast<double>(k));
  return std::abs(acc);
}

inline constexpr int kDecimationFirOrder = 64;

// Anti-alias filter (Hamming FIR, order 64, cutoff 0.8 * fs_out / 2) followed
// by decimation. The filter is applied centred on each output sample, so there
// is no group delay; samples beyond the edges are treated as zero.
inline Signal downsample(std::span<const double> x, int fs_in, int fs_out) {
  if (fs_in <= 0 || fs_out <= 0) throw ValidationError("downsample: sampling rates must be positive");
  if (fs_in % fs_out != 0)
    throw ValidationError("downsample: " + std::to_string(fs_in) + " Hz is not an integer multiple of " +
                          std::to_string(fs_out) + " Hz");
  const int factor = fs_in / fs_out;
  const std::size_t n_out = x.size() / static_cast<std::size_t>(factor);
  if (factor == 1) return Signal(x.begin(), x.end());

  const double cutoff = 0.8 * (fs_out / 2.0) / fs_in;
  const auto h = fir_lowpass(kDecimationFirOrder, cutoff);
  const long half = kDecimationFirOrder / 2;
  const long n = static_cast<long>(x.size());
  Signal y(n_out, 0.0);
  for (std::size_t i = 0; i < n_out; ++i) {
    const long c = static_cast<long>(i) * factor;
    double acc = 0.0;
    for (long k = 0; k <= kDecimationFirOrder; ++k) {
      const long idx = c + half - k;
      if (idx >= 0 && idx < n) acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(idx)];
    }
    y[i] = acc;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Spectral estimation

struct PSDResult {
  double fs = 0.0;
  std::vector<double> freqs;  // Hz, 0 .. fs/2
  std::vector<double> power;  // units^2 / Hz
};

// Welch's method: periodic Hann window, per-segment mean removal, one-sided
// density scaling. nperseg must be even.
inline PSDResult welch_psd(std::span<const double> x, double fs, int nperseg = 256, int overlap = 128) {
  if (nperseg < 2 || nperseg % 2 != 0) throw ValidationError("welch_psd: nperseg must be even and >= 2");
  if (overlap < 0 || overlap >= nperseg) throw ValidationError("welch_psd: overlap must be in [0, nperseg)");
  if (x.size() < static_cast<std::size_t>(nperseg))
    throw ValidationError("welch_psd: signal shorter than one segment");

  const auto seg = static_cast<std::size_t>(nperseg);
  const auto step = static_cast<std::size_t>(nperseg - overlap);
  std::vector<double> window(seg);
  double wss = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / nperseg);
    wss += window[i] * window[i];
  }

  const std::size_t n_bins = seg / 2 + 1;
  PSDResult out;
  out.fs = fs;
  out.freqs.resize(n_bins);
  out.power.assign(n_bins, 0.0);
  for (std::size_t k = 0; k < n_bins; ++k) out.freqs[k] = static_cast<double>(k) * fs / nperseg;

  std::size_t n_segments = 0;
  std::vector<double> buf(seg);
  for (std::size_t start = 0; start + seg <= x.size(); start += step) {
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += x[start + i];
    mean /= static_cast<double>(seg);
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (x[start + i] - mean) * window[i];
    const auto spec = fft::rfft(buf);
    for (std::size_t k = 0; k < n_bins; ++k) out.power[k] += std::norm(spec[k]);
    ++n_segments;
  }
  const double scale = 1.0 / (fs * wss * static_cast<double>(n_segments));
  for (std::size_t k = 0; k < n_bins; ++k) {
    const bool edge = (k == 0) || (k == n_bins - 1);
    out.power[k] *= scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

struct Band {
  double lo = 0.0;  // inclusive, Hz
  double hi = 0.0;  // exclusive, Hz
};

inline constexpr Band kDelta{0.5, 4.0};
inline constexpr Band kTheta{4.0, 8.0};
inline constexpr Band kAlpha{8.0, 13.0};
inline constexpr Band kBeta{13.0, 30.0};
inline constexpr Band kGamma{30.0, 64.0};

// P_b = (1/T) * sum of S(f) over bins with f in [lo, hi), where T is the
// length in samples of the signal the PSD was estimated from.
inline double band_power(const PSDResult& psd, Band band, std::size_t n_samples) {
  if (!(band.lo >= 0.0 && band.hi > band.lo && band.hi <= psd.fs / 2.0 + 1e-9))
    throw ValidationError("band_power: band [" + std::to_string(band.lo) + ", " + std::to_string(band.hi) +
                          ") is outside [0, fs/2]");
  if (n_samples == 0) throw ValidationError("band_power: n_samples must be positive");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    if (psd.freqs[k] >= band.lo && psd.freqs[k] < band.hi) {
      sum += psd.power[k];
      ++count;
    }
  }
  if (count == 0) throw EmptyResultError("band_power: no frequency bins in band");
  return sum / static_cast<double>(n_samples);
}

struct BandPowers {
  double delta = 0.0, theta = 0.0, alpha = 0.0, beta = 0.0, gamma = 0.0;
  double total() const { return delta + theta + alpha + beta + gamma; }
};

inline BandPowers band_powers(const PSDResult& psd, std::size_t n_samples) {
  return {band_power(psd, kDelta, n_samples), band_power(psd, kTheta, n_samples),
          band_power(psd, kAlpha, n_samples), band_power(psd, kBeta, n_samples),
          band_power(psd, kGamma, n_samples)};
}

// ---------------------------------------------------------------------------
// Time-domain statistics

namespace detail {
inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}
// Population variance; exactly 0 when the spread is only rounding noise.
inline double variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  const double var = s / static_cast<double>(x.size());
  return var <= 1e-24 * m * m ? 0.0 : var;
}
inline std::vector<double> diff(std::span<const double> x) {
  std::vector<double> d(x.size() > 0 ? x.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
  return d;
}
}  // namespace detail

struct Moments {
  double mean = 0.0;
  double std = 0.0;       // population standard deviation
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess kurtosis
};

// Population moments. A zero-variance signal has skewness = kurtosis = 0.
inline Moments statistical_moments(std::span<const double> x) {
  if (x.size() < 2) throw ValidationError("statistical_moments: need at least 2 samples");
  Moments m;
  m.mean = detail::mean(x);
  const double var = detail::variance(x);
  m.std = std::sqrt(var);
  if (var == 0.0) return m;
  double m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double z = (v - m.mean) / m.std;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  const auto n = static_cast<double>(x.size());
  m.skewness = m3 / n;
  m.kurtosis = m4 / n - 3.0;
  return m;
}

struct Hjorth {
  double activity = 0.0;
  double mobility = 0.0;
  double complexity = 0.0;
};

// activity = Var(x), mobility = sqrt(Var(dx)/Var(x)),
// complexity = sqrt(Var(d2x)/Var(dx)) / mobility.
// Var(x) = 0 gives (0, 0, 0); Var(dx) = 0 gives mobility = complexity = 0.
inline Hjorth hjorth(std::span<const double> x) {
  if (x.size() < 3) throw ValidationError("hjorth: need at least 3 samples");
  Hjorth h;
  const double var_x = detail::variance(x);
  if (var_x == 0.0) return h;
  h.activity = var_x;
  const auto dx = detail::diff(x);
  const auto ddx = detail::diff(dx);
  const double var_dx = detail::variance(dx);
  if (var_dx == 0.0) return h;
  h.mobility = std::sqrt(var_dx / var_x);
  h.complexity = std::sqrt(detail::variance(ddx) / var_dx) / h.mobility;
  return h;
}

// ---------------------------------------------------------------------------
// Discrete wavelet transform (Daubechies db4, 8 taps, periodization)

// db4 decomposition low-pass filter.
inline constexpr std::array<double, 8> kDb4Lo = {
    -0.010597401784997278, 0.032883011666982945, 0.030841381835986965, -0.18703481171888114,
    -0.02798376941698385,  0.6308807679295904,   0.7148465705525415,   0.23037781330885523};

// Quadrature-mirror high-pass: g[k] = (-1)^(k+1) h[L-1-k].
inline std::array<double, 8> db4_hi() {
  std::array<double, 8> g{};
  for (std::size_t k = 0; k < 8; ++k) g[k] = ((k % 2 == 0) ? -1.0 : 1.0) * kDb4Lo[7 - k];
  return g;
}

struct DwtLevel {
  std::vector<double> approx;
  std::vector<double> detail;
};

// One analysis step with periodic extension. Odd-length input is first
// extended by repeating its last sample.
inline DwtLevel dwt_step(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  if (s.size() % 2 != 0) s.push_back(s.back());
  const std::size_t n = s.size();
  const std::size_t half = n / 2;
  static const auto hi = db4_hi();
  DwtLevel out{std::vector<double>(half, 0.0), std::vector<double>(half, 0.0)};
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
      // y[i] = sum_k f[k] * s[(2i + 1 - k) mod n]
      const std::size_t idx = (2 * i + 1 + 8 * n - k) % n;
      a += kDb4Lo[k] * s[idx];
      d += hi[k] * s[idx];
    }
    out.approx[i] = a;
    out.detail[i] = d;
  }
  return out;
}

struct WaveletDecomposition {
  std::vector<std::vector<double>> details;  // details[0] = level 1 (finest)
  std::vector<double> approx;                // coarsest approximation
};

inline WaveletDecomposition dwt_decompose(std::span<const double> x, int levels) {
  if (levels < 1) throw ValidationError("dwt_decompose: levels must be >= 1");
  if (x.size() < (std::size_t{1} << levels))
    throw ValidationError("dwt_decompose: signal too short for " + std::to_string(levels) + " levels");
  WaveletDecomposition out;
  std::vector<double> cur(x.begin(), x.end());
  for (int l = 0; l < levels; ++l) {
    auto step = dwt_step(cur);
    out.details.push_back(std::move(step.detail));
    cur = std::move(step.approx);
  }
  out.approx = std::move(cur);
  return out;
}

struct WaveletEnergies {
  std::array<double, 4> detail{};  // e1..e4
  double approx = 0.0;             // energy left in the level-4 approximation
};

// E_k = sum_t c_k(t)^2 over the level-k detail coefficients, k = 1..4.
inline WaveletEnergies dwt_energies(std::span<const double> x) {
  const auto dec = dwt_decompose(x, 4);
  WaveletEnergies e;
  for (std::size_t k = 0; k < 4; ++k)
    for (double c : dec.details[k]) e.detail[k] += c * c;
  for (double c : dec.approx) e.approx += c * c;
  return e;
}

// ---------------------------------------------------------------------------
// Analytic signal and phase

// FFT construction: keep DC (and Nyquist for even n), double positive
// frequencies, zero negative ones, inverse transform.
inline std::vector<std::complex<double>> analytic_signal(std::span<const double> x) {
  if (x.size() < 4) throw ValidationError("analytic_signal: need at least 4 samples");
  const std::size_t n = x.size();
  std::vector<std::complex<double>> buf(x.begin(), x.end());
  auto spec = fft::forward(buf);
  const std::size_t pos_end = (n % 2 == 0) ? n / 2 : (n + 1) / 2;  // exclusive
  for (std::size_t k = 1; k < pos_end; ++k) spec[k] *= 2.0;
  for (std::size_t k = (n % 2 == 0) ? n / 2 + 1 : pos_end; k < n; ++k) spec[k] = 0.0;
  return fft::inverse(spec);
}

// Instantaneous phase in (-pi, pi].
inline std::vector<double> instantaneous_phase(std::span<const double> x) {
  const auto a = analytic_signal(x);
  std::vector<double> phase(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double p = std::arg(a[i]);
    if (p <= -std::numbers::pi) p = std::numbers::pi;
    phase[i] = p;
  }
  return phase;
}

}  // namespace dualgnn::dsp
