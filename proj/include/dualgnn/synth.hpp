#pragma once

// Synthetic cohorts. Every channel carries unit-variance 1/f background
// noise. SOZ channels additionally carry a copy of one band-limited
// oscillation per recording, each copy with its own slowly varying Gaussian
// phase jitter. Jitter of standard deviation s on two channels gives an
// expected pairwise phase-locking of exp(-s^2), so s = sqrt(-ln target).
// Class-0 patients get the higher target.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "dualgnn/core_data.hpp"
#include "dualgnn/fft.hpp"
#include "dualgnn/parallel.hpp"
#include "dualgnn/rng.hpp"

namespace dualgnn {

struct SynthConfig {
  int n_patients = 20;
  int n_seizure_free = 10;  // patients with outcome 1
  int channels_min = 40;
  int channels_max = 80;
  double soz_fraction = 0.1;
  int seizures_min = 2;
  int seizures_max = 3;
  double duration_s = 120.0;  // per seizure recording
  int fs = 512;
  double class0_plv = 0.8;
  double class1_plv = 0.6;
  double plv_spread = 0.05;  // per-patient target drawn uniformly within +-spread
  double burst_lo_hz = 4.0;
  double burst_hi_hz = 12.0;
  double burst_amplitude = 2.0;  // RMS of the oscillation relative to the unit background
  double jitter_bandwidth_hz = 4.0;
  double noise_exponent = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_patients < 1) throw ConfigError("synth.n_patients", "must be >= 1");
    if (n_seizure_free < 0 || n_seizure_free > n_patients)
      throw ConfigError("synth.n_seizure_free", "must be in [0, n_patients]");
    if (channels_min < 2) throw ConfigError("synth.channels_min", "must be >= 2");
    if (channels_max < channels_min) throw ConfigError("synth.channels_max", "must be >= channels_min");
    if (!(soz_fraction > 0.0 && soz_fraction < 0.5)) throw ConfigError("synth.soz_fraction", "must be in (0, 0.5)");
    if (seizures_min < 1) throw ConfigError("synth.seizures_min", "must be >= 1");
    if (seizures_max < seizures_min) throw ConfigError("synth.seizures_max", "must be >= seizures_min");
    if (!(duration_s > 0.0)) throw ConfigError("synth.duration_s", "must be > 0");
    if (fs <= 0) throw ConfigError("synth.fs", "must be > 0");
    if (static_cast<long>(std::lround(duration_s * fs)) < 2) throw ConfigError("synth.duration_s", "too short for fs");
    if (!(class0_plv > 0.0 && class0_plv < 1.0)) throw ConfigError("synth.class0_plv", "must be in (0, 1)");
    if (!(class1_plv > 0.0 && class1_plv < 1.0)) throw ConfigError("synth.class1_plv", "must be in (0, 1)");
    if (!(class0_plv > class1_plv)) throw ConfigError("synth.class0_plv", "must exceed class1_plv");
    if (!(plv_spread >= 0.0)) throw ConfigError("synth.plv_spread", "must be >= 0");
    if (!(class1_plv - plv_spread > 0.0 && class0_plv + plv_spread < 1.0))
      throw ConfigError("synth.plv_spread", "targets +- spread must stay in (0, 1)");
    if (!(burst_lo_hz > 0.0 && burst_lo_hz < burst_hi_hz && burst_hi_hz < fs / 2.0))
      throw ConfigError("synth.burst_band_hz", "need 0 < lo < hi < fs/2");
    if (!(burst_amplitude >= 0.0)) throw ConfigError("synth.burst_amplitude", "must be >= 0");
    if (!(jitter_bandwidth_hz > 0.0)) throw ConfigError("synth.jitter_bandwidth_hz", "must be > 0");
    if (!(noise_exponent >= 0.0)) throw ConfigError("synth.noise_exponent", "must be >= 0");
  }
};

namespace detail {

inline void standardize(std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double& v : x) {
    v -= m;
    ss += v * v;
  }
  const double sd = std::sqrt(ss / static_cast<double>(x.size()));
  if (sd > 0.0)
    for (double& v : x) v /= sd;
}

// Gaussian white noise shaped in the frequency domain by gain(f_hz).
template <typename Gain>
std::vector<double> shaped_noise(std::size_t n, double fs, Rng& rng, Gain gain) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(n);
  for (double& v : white) v = normal(rng);
  auto spec = fft::rfft(white);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= gain(static_cast<double>(k) * fs / static_cast<double>(n));
  auto out = fft::irfft(spec, n);
  standardize(out);
  return out;
}

}  // namespace detail

// Zero-mean, unit-variance noise with power spectral density ~ 1/f^exponent.
// The DC bin is removed.
inline std::vector<double> pink_noise(std::size_t n_samples, double exponent, std::uint64_t seed, double fs = 1.0) {
  if (n_samples < 2) throw ValidationError("pink_noise: need at least 2 samples");
  Rng rng(seed);
  return detail::shaped_noise(n_samples, fs, rng, [&](double f) { return f > 0.0 ? std::pow(f, -exponent / 2.0) : 0.0; });
}

struct SynthPatient {
  std::string patient_id;
  int outcome = 0;
  double plv_target = 0.0;
  int n_channels = 0;
  int n_seizures = 0;
  std::vector<std::uint8_t> soz_mask;
};

inline std::string synth_patient_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "P%02d", index + 1);
  return buf;
}

// Outcome assignment is a seeded permutation so labels are not tied to index order.
inline std::vector<int> synth_outcomes(const SynthConfig& cfg) {
  std::vector<int> order(static_cast<std::size_t>(cfg.n_patients));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, "outcomes"));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> outcome(order.size(), 0);
  for (int i = 0; i < cfg.n_seizure_free; ++i) outcome[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  return outcome;
}

inline SynthPatient synth_patient_plan(const SynthConfig& cfg, int index) {
  cfg.validate();
  if (index < 0 || index >= cfg.n_patients) throw ValidationError("synth: patient index out of range");
  SynthPatient p;
  p.patient_id = synth_patient_id(index);
  p.outcome = synth_outcomes(cfg)[static_cast<std::size_t>(index)];
  Rng rng(derive_seed(derive_seed(cfg.seed, "patient"), static_cast<std::uint64_t>(index)));
  p.n_channels = std::uniform_int_distribution<int>(cfg.channels_min, cfg.channels_max)(rng);
  p.n_seizures = std::uniform_int_distribution<int>(cfg.seizures_min, cfg.seizures_max)(rng);
  const double base = p.outcome == 0 ? cfg.class0_plv : cfg.class1_plv;
  p.plv_target = base + std::uniform_real_distribution<double>(-cfg.plv_spread, cfg.plv_spread)(rng);
  const int n_soz = std::clamp(static_cast<int>(std::lround(cfg.soz_fraction * p.n_channels)), 2, p.n_channels - 1);
  std::vector<int> idx(static_cast<std::size_t>(p.n_channels));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  p.soz_mask.assign(static_cast<std::size_t>(p.n_channels), 0);
  for (int k = 0; k < n_soz; ++k) p.soz_mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = 1;
  return p;
}

// All recordings of one patient; deterministic in (cfg, index).
inline std::vector<Recording> generate_patient(const SynthConfig& cfg, int index) {
  const SynthPatient plan = synth_patient_plan(cfg, index);
  const auto n = static_cast<std::size_t>(std::lround(cfg.duration_s * cfg.fs));
  const double fs = cfg.fs;
  const double sigma = std::sqrt(-std::log(plan.plv_target));
  std::vector<std::string> names;
  for (int c = 0; c < plan.n_channels; ++c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "ch%03d", c + 1);
    names.emplace_back(buf);
  }

  std::vector<Recording> recs;
  for (int s = 0; s < plan.n_seizures; ++s) {
    const std::uint64_t rec_seed =
        derive_seed(derive_seed(derive_seed(cfg.seed, "recording"), static_cast<std::uint64_t>(index)),
                    static_cast<std::uint64_t>(s));
    Recording rec;
    rec.patient_id = plan.patient_id;
    rec.seizure_id = "S" + std::to_string(s + 1);
    rec.fs = cfg.fs;
    rec.channels = names;
    rec.soz_mask = plan.soz_mask;
    rec.outcome = plan.outcome;
    rec.samples.resize(plan.n_channels, static_cast<Eigen::Index>(n));

    // Shared oscillation: band-limited noise, split into envelope and phase.
    Rng src_rng(derive_seed(rec_seed, "source"));
    const auto carrier = detail::shaped_noise(
        n, fs, src_rng, [&](double f) { return (f >= cfg.burst_lo_hz && f <= cfg.burst_hi_hz) ? 1.0 : 0.0; });
    std::vector<std::complex<double>> spec(carrier.begin(), carrier.end());
    spec = fft::forward(spec);
    for (std::size_t k = 1; k < (n + 1) / 2; ++k) spec[k] *= 2.0;
    for (std::size_t k = n / 2 + 1; k < n; ++k) spec[k] = 0.0;
    const auto analytic = fft::inverse(spec);
    std::vector<double> envelope(n), phase(n);
    for (std::size_t t = 0; t < n; ++t) {
      envelope[t] = std::abs(analytic[t]);
      phase[t] = std::arg(analytic[t]);
    }
    // Scale so that A(t) cos(phase) has RMS burst_amplitude.
    double ms = 0.0;
    for (double e : envelope) ms += e * e;
    const double env_scale = cfg.burst_amplitude * std::sqrt(2.0 * static_cast<double>(n) / std::max(ms, 1e-300));

    for (int c = 0; c < plan.n_channels; ++c) {
      const std::uint64_t ch_seed = derive_seed(rec_seed, static_cast<std::uint64_t>(c));
      auto x = pink_noise(n, cfg.noise_exponent, derive_seed(ch_seed, "noise"), fs);
      if (plan.soz_mask[static_cast<std::size_t>(c)]) {
        Rng jit_rng(derive_seed(ch_seed, "jitter"));
        const auto jitter =
            detail::shaped_noise(n, fs, jit_rng, [&](double f) { return f <= cfg.jitter_bandwidth_hz ? 1.0 : 0.0; });
        for (std::size_t t = 0; t < n; ++t)
          x[t] += env_scale * envelope[t] * std::cos(phase[t] + sigma * jitter[t]);
      }
      for (std::size_t t = 0; t < n; ++t) rec.samples(c, static_cast<Eigen::Index>(t)) = static_cast<float>(x[t]);
    }
    recs.push_back(std::move(rec));
  }
  return recs;
}

// Whole cohort in memory; patients are generated in parallel.
inline std::vector<Recording> generate_cohort(const SynthConfig& cfg, int threads = 1) {
  cfg.validate();
  std::vector<std::vector<Recording>> per(static_cast<std::size_t>(cfg.n_patients));
  parallel_for(per.size(), threads, [&](std::size_t i) { per[i] = generate_patient(cfg, static_cast<int>(i)); });
  std::vector<Recording> out;
  for (auto& v : per)
    for (auto& r : v) out.push_back(std::move(r));
  return out;
}

}  // namespace dualgnn
