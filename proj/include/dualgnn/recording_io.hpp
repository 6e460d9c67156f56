#pragma once

// On-disk recording format:
//
//   <name>.json  manifest
//     { "patient_id", "seizure_id", "fs", "channel_names": [...],
//       "soz_mask": [0|1, ...], "outcome": 0|1, "n_samples",
//       "payload_file": "<name>.f32", "dtype": "f32le", "layout": "channel-major" }
//   <name>.f32   channels x n_samples little-endian float32, channel-major
//
// A cohort is a directory of such pairs plus cohort.json:
//   { "format": "dualgnn-cohort", "version": 1, "recordings": ["<name>.json", ...] }

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualgnn/binary_io.hpp"
#include "dualgnn/core_data.hpp"

namespace dualgnn {

namespace fs = std::filesystem;

inline std::string recording_stem(const Recording& rec) {
  return rec.patient_id + "_" + rec.seizure_id;
}

inline nlohmann::json recording_manifest(const Recording& rec, const std::string& payload_file) {
  nlohmann::json j;
  j["patient_id"] = rec.patient_id;
  j["seizure_id"] = rec.seizure_id;
  j["fs"] = rec.fs;
  j["channel_names"] = rec.channels;
  std::vector<int> mask(rec.soz_mask.begin(), rec.soz_mask.end());
  j["soz_mask"] = mask;
  j["outcome"] = rec.outcome;
  j["n_samples"] = rec.n_samples();
  j["payload_file"] = payload_file;
  j["dtype"] = "f32le";
  j["layout"] = "channel-major";
  return j;
}

// Writes `<dir>/<stem>.json` and its payload; returns the manifest path.
inline fs::path save_recording(const Recording& rec, const fs::path& manifest_path) {
  validate(rec);
  const fs::path payload_path = fs::path(manifest_path).replace_extension(".f32");
  std::string payload;
  payload.reserve(static_cast<std::size_t>(rec.samples.size()) * 4);
  io::put_le_array<float>(payload, std::span<const float>(rec.samples.data(),
                                                          static_cast<std::size_t>(rec.samples.size())));
  io::write_file_atomic(payload_path, payload);
  io::write_file_atomic(manifest_path,
                        recording_manifest(rec, payload_path.filename().string()).dump(2) + "\n");
  return manifest_path;
}

inline Recording load_recording(const fs::path& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(manifest_path.string() + ": malformed manifest: " + e.what());
  }
  Recording rec;
  std::size_t n_samples = 0;
  std::string payload_file;
  try {
    rec.patient_id = j.at("patient_id").get<std::string>();
    rec.seizure_id = j.at("seizure_id").get<std::string>();
    rec.fs = j.at("fs").get<int>();
    rec.channels = j.at("channel_names").get<std::vector<std::string>>();
    for (int m : j.at("soz_mask").get<std::vector<int>>()) {
      if (m != 0 && m != 1) throw ValidationError(manifest_path.string() + ": soz_mask must be binary");
      rec.soz_mask.push_back(static_cast<std::uint8_t>(m));
    }
    rec.outcome = j.at("outcome").get<int>();
    n_samples = j.at("n_samples").get<std::size_t>();
    payload_file = j.at("payload_file").get<std::string>();
    if (j.at("dtype").get<std::string>() != "f32le")
      throw IoError(manifest_path.string() + ": unsupported dtype");
    if (j.at("layout").get<std::string>() != "channel-major")
      throw IoError(manifest_path.string() + ": unsupported layout");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(manifest_path.string() + ": " + e.what());
  }
  if (rec.soz_mask.size() != rec.channels.size())
    throw ShapeError(manifest_path.string() + ": soz_mask length != channel count");

  const std::string payload = io::read_file(manifest_path.parent_path() / payload_file);
  const std::size_t expected = rec.channels.size() * n_samples * sizeof(float);
  if (payload.size() != expected)
    throw ShapeError(manifest_path.string() + ": payload has " + std::to_string(payload.size() / 4) +
                     " values, manifest declares " + std::to_string(rec.channels.size()) + " x " +
                     std::to_string(n_samples));
  rec.samples.resize(static_cast<Eigen::Index>(rec.channels.size()), static_cast<Eigen::Index>(n_samples));
  io::LeReader reader(payload);
  reader.get_array<float>(std::span<float>(rec.samples.data(), static_cast<std::size_t>(rec.samples.size())));
  validate(rec);
  return rec;
}

// cohort.json lists manifest file names relative to the cohort directory.
// It is written last, so a directory without it is not a complete cohort.
inline void write_cohort_index(const fs::path& dir, const std::vector<std::string>& manifest_names) {
  nlohmann::json index;
  index["format"] = "dualgnn-cohort";
  index["version"] = 1;
  index["recordings"] = manifest_names;
  io::write_file_atomic(dir / "cohort.json", index.dump(2) + "\n");
}

inline void save_cohort(const std::vector<Recording>& recs, const fs::path& dir) {
  validate_cohort(recs);
  fs::create_directories(dir);
  std::vector<std::string> names;
  for (const auto& r : recs) {
    names.push_back(recording_stem(r) + ".json");
    save_recording(r, dir / names.back());
  }
  write_cohort_index(dir, names);
}

inline std::vector<std::string> cohort_manifest_names(const fs::path& dir) {
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(io::read_file(dir / "cohort.json"));
    return index.at("recordings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError((dir / "cohort.json").string() + ": " + e.what());
  }
}

// Visits recordings one at a time so a large cohort never has to be resident.
inline void for_each_recording(const fs::path& dir, const std::function<void(const Recording&)>& fn) {
  for (const auto& name : cohort_manifest_names(dir)) fn(load_recording(dir / name));
}

inline std::vector<Recording> load_cohort(const fs::path& dir) {
  std::vector<Recording> recs;
  for_each_recording(dir, [&](const Recording& r) { recs.push_back(r); });
  validate_cohort(recs);
  return recs;
}

}  // namespace dualgnn
