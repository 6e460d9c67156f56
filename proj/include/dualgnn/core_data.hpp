#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "dualgnn/errors.hpp"
#include "dualgnn/rng.hpp"

namespace dualgnn {

// channels x time, each channel contiguous. Stored as float to match the
// on-disk f32 payload exactly.
using SampleMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Recording {
  std::string patient_id;
  std::string seizure_id;
  int fs = 512;  // samples per second
  std::vector<std::string> channels;
  SampleMatrix samples;
  std::vector<std::uint8_t> soz_mask;  // 1 = involved in seizure onset
  int outcome = 0;                     // 1 = seizure freedom

  std::size_t n_channels() const { return channels.size(); }
  std::size_t n_samples() const { return static_cast<std::size_t>(samples.cols()); }
  double duration_s() const { return static_cast<double>(n_samples()) / fs; }
};

inline void validate(const Recording& rec) {
  if (rec.fs <= 0) throw ValidationError("recording " + rec.seizure_id + ": fs must be positive");
  if (static_cast<std::size_t>(rec.samples.rows()) != rec.channels.size())
    throw ShapeError("recording " + rec.seizure_id + ": sample rows != channel count");
  if (rec.soz_mask.size() != rec.channels.size())
    throw ShapeError("recording " + rec.seizure_id + ": soz_mask length != channel count");
  if (rec.outcome != 0 && rec.outcome != 1)
    throw ValidationError("recording " + rec.seizure_id + ": outcome must be 0 or 1");
  for (auto m : rec.soz_mask)
    if (m > 1) throw ValidationError("recording " + rec.seizure_id + ": soz_mask must be binary");
  std::unordered_set<std::string> seen;
  for (const auto& ch : rec.channels)
    if (!seen.insert(ch).second)
      throw ValidationError("recording " + rec.seizure_id + ": duplicate channel name '" + ch + "'");
  if (!rec.samples.allFinite())
    throw ValidationError("recording " + rec.seizure_id + ": non-finite sample value");
}

// Checks that the outcome label is constant per patient.
inline void validate_cohort(std::span<const Recording> recs) {
  std::map<std::string, int> outcome;
  for (const auto& r : recs) {
    auto [it, inserted] = outcome.emplace(r.patient_id, r.outcome);
    if (!inserted && it->second != r.outcome)
      throw ValidationError("patient " + r.patient_id + ": outcome differs across recordings");
  }
}

struct WindowSpec {
  double length_s = 10.0;
  double overlap_s = 0.0;

  void validate() const {
    if (!(length_s > 0.0)) throw ValidationError("window length must be positive");
    if (!(overlap_s >= 0.0 && overlap_s < length_s))
      throw ValidationError("window overlap must satisfy 0 <= overlap < length");
  }
  std::size_t samples_per_window(int fs) const {
    return static_cast<std::size_t>(std::llround(length_s * fs));
  }
  std::size_t step_samples(int fs) const {
    return samples_per_window(fs) - static_cast<std::size_t>(std::llround(overlap_s * fs));
  }
};

struct WindowSource {
  std::string patient_id;
  std::string seizure_id;
  std::size_t window_index = 0;

  auto operator<=>(const WindowSource&) const = default;
};

struct LabeledWindow {
  WindowSource source;
  int fs = 512;
  SampleMatrix data;  // channels x T_w
  std::vector<std::uint8_t> soz_mask;
  int outcome = 0;

  std::size_t n_channels() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t n_samples() const { return static_cast<std::size_t>(data.cols()); }
};

// Number of windows segment_windows would produce, without copying data.
inline std::size_t window_count(std::size_t total_samples, int fs, const WindowSpec& spec) {
  const std::size_t tw = spec.samples_per_window(fs);
  const std::size_t step = spec.step_samples(fs);
  if (tw == 0 || total_samples < tw) return 0;
  return (total_samples - tw) / step + 1;
}

// Splits a recording into fixed-length windows. A trailing partial window is
// discarded. Every window carries the parent's labels unchanged.
inline std::vector<LabeledWindow> segment_windows(const Recording& rec, const WindowSpec& spec) {
  spec.validate();
  const std::size_t tw = spec.samples_per_window(rec.fs);
  const std::size_t step = spec.step_samples(rec.fs);
  const std::size_t count = window_count(rec.n_samples(), rec.fs, spec);
  if (count == 0)
    throw EmptyResultError("recording " + rec.seizure_id + " is shorter than one window");

  std::vector<LabeledWindow> out;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    LabeledWindow win;
    win.source = {rec.patient_id, rec.seizure_id, w};
    win.fs = rec.fs;
    win.data = rec.samples.middleCols(static_cast<Eigen::Index>(w * step), static_cast<Eigen::Index>(tw));
    win.soz_mask = rec.soz_mask;
    win.outcome = rec.outcome;
    out.push_back(std::move(win));
  }
  return out;
}

// A collection of windows indexed by patient and seizure.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledWindow> windows) {
    for (auto& w : windows) add(std::move(w));
  }

  void add(LabeledWindow w) {
    const std::size_t idx = windows_.size();
    by_patient_[w.source.patient_id].push_back(idx);
    by_seizure_[{w.source.patient_id, w.source.seizure_id}].push_back(idx);
    windows_.push_back(std::move(w));
  }

  void add_recording(const Recording& rec, const WindowSpec& spec) {
    for (auto& w : segment_windows(rec, spec)) add(std::move(w));
  }

  const std::vector<LabeledWindow>& windows() const { return windows_; }
  std::size_t size() const { return windows_.size(); }
  bool empty() const { return windows_.empty(); }
  const LabeledWindow& operator[](std::size_t i) const { return windows_[i]; }

  std::vector<std::string> patients() const {
    std::vector<std::string> ids;
    for (const auto& [id, _] : by_patient_) ids.push_back(id);
    return ids;
  }
  const std::vector<std::size_t>& windows_of_patient(const std::string& id) const {
    return by_patient_.at(id);
  }
  const std::vector<std::size_t>& windows_of_seizure(const std::string& patient,
                                                     const std::string& seizure) const {
    return by_seizure_.at({patient, seizure});
  }

  std::vector<WindowSource> sources() const {
    std::vector<WindowSource> s;
    s.reserve(windows_.size());
    for (const auto& w : windows_) s.push_back(w.source);
    return s;
  }

 private:
  std::vector<LabeledWindow> windows_;
  std::map<std::string, std::vector<std::size_t>> by_patient_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_seizure_;
};

// Index partitions refer to positions in the caller's window list.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct PatientSplit {
  std::string test_patient;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

namespace detail {
// Positions of `keys` in canonical (patient, seizure, window) order.
inline std::vector<std::size_t> canonical_order(std::span<const WindowSource> keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}
}  // namespace detail

// Window-level k-fold split. One seeded permutation of the canonically sorted
// windows is laid out on a ring; fold f takes its test block starting at
// offset floor(f*n/k), followed by its validation block, and trains on the
// rest. With train_frac = 0.6 each fold is 60/20/20. The test blocks of all
// folds jointly cover every window whenever k * n_test >= n (k >= 5 here).
inline std::vector<SplitIndices> kfold_split(std::span<const WindowSource> keys, int k,
                                             double train_frac, std::uint64_t seed) {
  const std::size_t n = keys.size();
  if (n == 0) throw ValidationError("kfold_split: empty dataset");
  if (k < 2) throw ValidationError("kfold_split: k must be >= 2");
  if (static_cast<std::size_t>(k) > n) throw ValidationError("kfold_split: k larger than window count");
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw ValidationError("kfold_split: train_frac must be in (0, 1)");

  std::vector<std::size_t> perm = detail::canonical_order(keys);
  Rng rng(derive_seed(seed, "kfold"));
  std::shuffle(perm.begin(), perm.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_frac));
  const std::size_t n_val = (n - n_train) / 2;
  const std::size_t n_test = n - n_train - n_val;

  std::vector<SplitIndices> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    const std::size_t start = static_cast<std::size_t>(f) * n / static_cast<std::size_t>(k);
    auto& fold = folds[static_cast<std::size_t>(f)];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = perm[(start + i) % n];
      if (i < n_test)
        fold.test.push_back(idx);
      else if (i < n_test + n_val)
        fold.val.push_back(idx);
      else
        fold.train.push_back(idx);
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.val.begin(), fold.val.end());
    std::sort(fold.test.begin(), fold.test.end());
  }
  return folds;
}

inline std::vector<SplitIndices> kfold_split(const Dataset& ds, int k, double train_frac,
                                             std::uint64_t seed) {
  auto keys = ds.sources();
  return kfold_split(std::span<const WindowSource>(keys), k, train_frac, seed);
}

// One partition per patient (sorted by patient id); the held-out patient's
// windows form the test side.
inline std::vector<PatientSplit> leave_one_patient_out(std::span<const WindowSource> keys) {
  std::map<std::string, std::vector<std::size_t>> by_patient;
  for (std::size_t i = 0; i < keys.size(); ++i) by_patient[keys[i].patient_id].push_back(i);
  if (by_patient.size() < 2) throw ValidationError("leave_one_patient_out: need at least 2 patients");

  std::vector<PatientSplit> out;
  for (const auto& [pid, idx] : by_patient) {
    PatientSplit s;
    s.test_patient = pid;
    s.test = idx;
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i].patient_id != pid) s.train.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<PatientSplit> leave_one_patient_out(const Dataset& ds) {
  auto keys = ds.sources();
  return leave_one_patient_out(std::span<const WindowSource>(keys));
}

}  // namespace dualgnn
