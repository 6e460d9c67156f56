#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dualgnn/dsp.hpp"

using namespace dualgnn;
using std::numbers::pi;

namespace {

std::vector<double> tone(std::size_t n, double f, double fs, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = amp * std::cos(2.0 * pi * f * t / fs + phase);
  return x;
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> x(n);
  for (double& v : x) v = normal(rng);
  return x;
}

double variance(const std::vector<double>& x) {
  double m = 0;
  for (double v : x) m += v;
  m /= x.size();
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return s / x.size();
}

}  // namespace

// ---------------------------------------------------------------------------
// downsample

TEST(Downsample, ConstantPreservedAwayFromEdges) {
  const std::vector<double> x(4096, 3.25);
  const auto y = dsp::downsample(x, 512, 128);
  ASSERT_EQ(y.size(), 1024u);
  for (std::size_t i = 20; i + 20 < y.size(); ++i) EXPECT_NEAR(y[i], 3.25, 1e-12);
}

TEST(Downsample, TenHertzSineSurvives) {
  const auto x = tone(5120, 10.0, 512.0);
  const auto y = dsp::downsample(x, 512, 128);
  ASSERT_EQ(y.size(), 1280u);
  const auto expect = tone(1280, 10.0, 128.0);
  for (std::size_t i = 100; i < 1180; ++i) EXPECT_NEAR(y[i], expect[i], 0.02);
}

TEST(Downsample, SixtyHertzAttenuatedTwentyDb) {
  const auto x = tone(5120, 60.0, 512.0);
  const auto y = dsp::downsample(x, 512, 128);
  double peak = 0;
  for (std::size_t i = 100; i < 1180; ++i) peak = std::max(peak, std::abs(y[i]));
  EXPECT_LE(peak, 0.1);
  // Independent frequency-response oracle: direct DTFT of the taps.
  const auto h = dsp::fir_lowpass(dsp::kDecimationFirOrder, 0.8 * 64.0 / 512.0);
  std::complex<double> acc = 0;
  for (std::size_t k = 0; k < h.size(); ++k) acc += h[k] * std::exp(std::complex<double>(0, -2.0 * pi * 60.0 / 512.0 * k));
  EXPECT_LE(20.0 * std::log10(std::abs(acc)), -20.0);
  EXPECT_NEAR(dsp::fir_gain(h, 60.0 / 512.0), std::abs(acc), 1e-12);
}

TEST(Downsample, LengthIsFloorAndFactorMustDivide) {
  EXPECT_EQ(dsp::downsample(std::vector<double>(1003, 0.0), 512, 128).size(), 250u);
  EXPECT_THROW(dsp::downsample(std::vector<double>(100, 0.0), 500, 128), ValidationError);
}

TEST(FirLowpass, UnitDcGainAndSymmetry) {
  const auto h = dsp::fir_lowpass(64, 0.1);
  ASSERT_EQ(h.size(), 65u);
  double sum = 0;
  for (double v : h) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  for (std::size_t k = 0; k < h.size(); ++k) EXPECT_NEAR(h[k], h[h.size() - 1 - k], 1e-15);
}

// ---------------------------------------------------------------------------
// welch_psd and band_power

TEST(Welch, BinGridAndPeak) {
  const auto psd = dsp::welch_psd(tone(1280, 10.0, 128.0), 128.0);
  ASSERT_EQ(psd.power.size(), 129u);
  EXPECT_EQ(psd.freqs.front(), 0.0);
  EXPECT_EQ(psd.freqs.back(), 64.0);
  const auto peak = std::max_element(psd.power.begin(), psd.power.end()) - psd.power.begin();
  EXPECT_EQ(psd.freqs[static_cast<std::size_t>(peak)], 10.0);
  for (double p : psd.power) EXPECT_GE(p, 0.0);
}

TEST(Welch, ZeroSignalZeroPower) {
  for (double p : dsp::welch_psd(std::vector<double>(512, 0.0), 128.0).power) EXPECT_EQ(p, 0.0);
}

TEST(Welch, WhiteNoiseFlatAndParsevalConsistent) {
  const auto x = gaussian(256 * 64, 21);
  const auto psd = dsp::welch_psd(x, 128.0);
  const auto [lo, hi] = std::minmax_element(psd.power.begin() + 1, psd.power.end() - 1);
  EXPECT_LT(*hi / *lo, 10.0);
  double integral = 0;
  for (double p : psd.power) integral += p * (psd.freqs[1] - psd.freqs[0]);
  EXPECT_NEAR(integral / variance(x), 1.0, 0.15);
}

TEST(Welch, OffsetOnlyAffectsDc) {
  auto x = gaussian(2048, 3);
  const auto a = dsp::welch_psd(x, 128.0);
  for (double& v : x) v += 7.5;
  const auto b = dsp::welch_psd(x, 128.0);
  for (std::size_t k = 1; k < a.power.size(); ++k) EXPECT_NEAR(a.power[k], b.power[k], 1e-9 * (1 + a.power[k]));
}

TEST(Welch, ShortSignalRejected) {
  EXPECT_THROW(dsp::welch_psd(std::vector<double>(255, 0.0), 128.0), ValidationError);
}

TEST(BandPower, TenHertzConcentratesInAlpha) {
  const auto x = tone(1280, 10.0, 128.0);
  const auto bp = dsp::band_powers(dsp::welch_psd(x, 128.0), x.size());
  EXPECT_GE(bp.alpha, 0.9 * bp.total());
}

TEST(BandPower, ScaledByOneOverT) {
  const auto x = gaussian(1280, 4);
  const auto psd = dsp::welch_psd(x, 128.0);
  double sum = 0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k)
    if (psd.freqs[k] >= 8.0 && psd.freqs[k] < 13.0) sum += psd.power[k];
  EXPECT_DOUBLE_EQ(dsp::band_power(psd, dsp::kAlpha, x.size()), sum / 1280.0);
}

TEST(BandPower, ZeroSignalAndBounds) {
  const auto psd = dsp::welch_psd(std::vector<double>(1280, 0.0), 128.0);
  const auto bp = dsp::band_powers(psd, 1280);
  EXPECT_EQ(bp.total(), 0.0);
  EXPECT_THROW(dsp::band_power(psd, {200.0, 300.0}, 1280), ValidationError);
  EXPECT_THROW(dsp::band_power(psd, {10.1, 10.2}, 1280), EmptyResultError);
}

// ---------------------------------------------------------------------------
// moments

TEST(Moments, ConstantConvention) {
  const auto m = dsp::statistical_moments(std::vector<double>(50, 5.0));
  EXPECT_EQ(m.mean, 5.0);
  EXPECT_EQ(m.std, 0.0);
  EXPECT_EQ(m.skewness, 0.0);
  EXPECT_EQ(m.kurtosis, 0.0);
}

TEST(Moments, TwoPointSignal) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2) ? 1.0 : -1.0;
  const auto m = dsp::statistical_moments(x);
  EXPECT_NEAR(m.mean, 0.0, 1e-15);
  EXPECT_NEAR(m.std, 1.0, 1e-15);
  EXPECT_NEAR(m.skewness, 0.0, 1e-12);
  EXPECT_NEAR(m.kurtosis, -2.0, 1e-12);
}

TEST(Moments, GaussianExcessKurtosisNearZero) {
  const auto m = dsp::statistical_moments(gaussian(200000, 8, 2.0));
  EXPECT_NEAR(m.kurtosis, 0.0, 0.2);
  EXPECT_NEAR(m.skewness, 0.0, 0.05);
  EXPECT_NEAR(m.std, 2.0, 0.02);
}

TEST(Moments, ExponentialSkewness) {
  // Exponential distribution: skewness 2, excess kurtosis 6.
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(400000);
  for (double& v : x) v = e(rng);
  const auto m = dsp::statistical_moments(x);
  EXPECT_NEAR(m.skewness, 2.0, 0.1);
  EXPECT_NEAR(m.kurtosis, 6.0, 0.6);
}

// ---------------------------------------------------------------------------
// Hjorth

TEST(Hjorth, ConstantConvention) {
  const auto h = dsp::hjorth(std::vector<double>(10, 1.0));
  EXPECT_EQ(h.activity, 0.0);
  EXPECT_EQ(h.mobility, 0.0);
  EXPECT_EQ(h.complexity, 0.0);
}

TEST(Hjorth, SineMobilityClosedForm) {
  for (double f : {2.0, 9.0, 30.0}) {
    const double w = 2.0 * pi * f;
    const auto h = dsp::hjorth(tone(1280, f, 128.0, 1.0, 0.4));
    EXPECT_NEAR(h.mobility, 2.0 * std::sin(w / 256.0), 0.01 * 2.0 * std::sin(w / 256.0));
    EXPECT_NEAR(h.complexity, 1.0, 0.02);
  }
}

TEST(Hjorth, WhiteNoiseMobility) {
  EXPECT_NEAR(dsp::hjorth(gaussian(100000, 5)).mobility, std::sqrt(2.0), 0.05 * std::sqrt(2.0));
}

TEST(Hjorth, ScalingInvariance) {
  auto x = gaussian(1000, 6);
  const auto a = dsp::hjorth(x);
  for (double& v : x) v *= -3.0;
  const auto b = dsp::hjorth(x);
  EXPECT_NEAR(b.activity, 9.0 * a.activity, 1e-12 * b.activity);
  EXPECT_NEAR(b.mobility, a.mobility, 1e-12);
  EXPECT_NEAR(b.complexity, a.complexity, 1e-12);
  EXPECT_GE(a.complexity, 1.0 - 1e-9);
}

// ---------------------------------------------------------------------------
// Wavelets

TEST(Dwt, ZeroSignal) {
  const auto e = dsp::dwt_energies(std::vector<double>(256, 0.0));
  for (double v : e.detail) EXPECT_EQ(v, 0.0);
}

TEST(Dwt, ParsevalIdentity) {
  for (std::size_t n : {std::size_t{16}, std::size_t{256}, std::size_t{1280}}) {
    auto x = gaussian(n, n);
    for (double& v : x) v += 0.5;
    const auto e = dsp::dwt_energies(x);
    double sum = e.approx, sq = 0;
    for (double d : e.detail) sum += d;
    for (double v : x) sq += v * v;
    EXPECT_NEAR(sum / sq, 1.0, 1e-6) << n;
  }
}

TEST(Dwt, FilterOrthonormality) {
  // Independent check of the db4 taps: unit norm, double-shift orthogonality,
  // and four vanishing moments.
  const auto& h = dsp::kDb4Lo;
  const auto g = dsp::db4_hi();
  for (int shift = 0; shift < 8; shift += 2) {
    double hh = 0, gg = 0, hg = 0;
    for (int k = 0; k + shift < 8; ++k) {
      hh += h[k] * h[k + shift];
      gg += g[k] * g[k + shift];
    }
    for (int k = 0; k < 8; ++k) hg += h[k] * g[(k + shift) % 8];
    EXPECT_NEAR(hh, shift == 0 ? 1.0 : 0.0, 1e-12);
    EXPECT_NEAR(gg, shift == 0 ? 1.0 : 0.0, 1e-12);
  }
  for (int p = 0; p < 4; ++p) {
    double moment = 0;
    for (int k = 0; k < 8; ++k) moment += g[k] * std::pow(k, p);
    EXPECT_NEAR(moment, 0.0, 1e-9) << "moment " << p;
  }
}

TEST(Dwt, AlternatingSignalLandsInFinestLevel) {
  std::vector<double> x(512);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2) ? -1.0 : 1.0;
  const auto e = dsp::dwt_energies(x);
  const double total = e.detail[0] + e.detail[1] + e.detail[2] + e.detail[3];
  EXPECT_GT(e.detail[0], 0.5 * total);
}

TEST(Dwt, ScalesQuadratically) {
  auto x = gaussian(512, 12);
  const auto a = dsp::dwt_energies(x);
  for (double& v : x) v *= 2.5;
  const auto b = dsp::dwt_energies(x);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(b.detail[k], 6.25 * a.detail[k], 1e-10 * b.detail[k]);
}

TEST(Dwt, TooShortRejected) {
  EXPECT_THROW(dsp::dwt_energies(std::vector<double>(15, 1.0)), ValidationError);
}

// ---------------------------------------------------------------------------
// Analytic signal and phase

TEST(Analytic, CosineBecomesComplexExponential) {
  const std::size_t n = 2048;
  const auto x = tone(n, 8.0, 256.0);
  const auto a = dsp::analytic_signal(x);
  for (std::size_t t = n / 20; t < n - n / 20; ++t) {
    EXPECT_NEAR(std::abs(a[t]), 1.0, 0.02);
    EXPECT_NEAR(a[t].imag(), std::sin(2.0 * pi * 8.0 * t / 256.0), 0.02);
  }
}

TEST(Analytic, RealPartReconstructs) {
  for (std::size_t n : {std::size_t{4}, std::size_t{7}, std::size_t{1000}, std::size_t{1023}}) {
    const auto x = gaussian(n, n);
    const auto a = dsp::analytic_signal(x);
    for (std::size_t t = 0; t < n; ++t) EXPECT_NEAR(a[t].real(), x[t], 1e-9 * (1 + std::abs(x[t])));
  }
}

TEST(Analytic, ZeroSignalAndTooShort) {
  for (const auto& v : dsp::analytic_signal(std::vector<double>(16, 0.0))) EXPECT_EQ(std::abs(v), 0.0);
  EXPECT_THROW(dsp::analytic_signal(std::vector<double>(3, 0.0)), ValidationError);
}

TEST(Phase, SlopeMatchesFrequency) {
  const double fs = 256.0, f = 6.0;
  const auto ph = dsp::instantaneous_phase(tone(2048, f, fs));
  double unwrapped = ph[200], prev = ph[200];
  for (std::size_t t = 201; t < 1848; ++t) {
    double d = ph[t] - prev;
    while (d > pi) d -= 2 * pi;
    while (d <= -pi) d += 2 * pi;
    unwrapped += d;
    prev = ph[t];
  }
  const double slope = (unwrapped - ph[200]) / (1847 - 200);
  const double omega = 2.0 * pi * f / fs;
  EXPECT_NEAR(slope, omega, 0.01 * omega);
  for (double p : ph) {
    EXPECT_GT(p, -pi);
    EXPECT_LE(p, pi);
  }
}

TEST(Phase, QuadratureOffsetAndAmplitudeInvariance) {
  const std::size_t n = 2048;
  const auto c = tone(n, 5.0, 256.0);
  const auto s = tone(n, 5.0, 256.0, 1.0, -pi / 2);  // sin
  const auto pc = dsp::instantaneous_phase(c);
  const auto ps = dsp::instantaneous_phase(s);
  auto scaled = c;
  for (double& v : scaled) v *= 3.0;
  const auto p3 = dsp::instantaneous_phase(scaled);
  for (std::size_t t = n / 10; t < n - n / 10; ++t) {
    EXPECT_NEAR(std::abs(std::arg(std::polar(1.0, pc[t] - ps[t]))), pi / 2, 0.02);
    EXPECT_NEAR(p3[t], pc[t], 1e-12);
  }
}
