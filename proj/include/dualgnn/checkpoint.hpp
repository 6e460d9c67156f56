#pragma once

// Checkpoint file:
//   char[8]  magic "DGNNCKPT"
//   u64      header length H (little-endian)
//   char[H]  JSON header: { "format", "version", "config": {...},
//                           "layout": [{name, offset, rows, cols}], "n_params" }
//   f64[n]   flat parameter vector, little-endian

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dualgnn/binary_io.hpp"
#include "dualgnn/nn.hpp"

namespace dualgnn::nn {

inline nlohmann::json model_config_json(const ModelConfig& c) {
  return {{"in_dim", c.in_dim},
          {"hidden_dim", c.hidden_dim},
          {"dropout", c.dropout},
          {"alpha", c.alpha},
          {"class_weights_node", c.class_weights_node},
          {"class_weights_graph", c.class_weights_graph},
          {"seed", c.seed}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.in_dim = j.at("in_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.class_weights_node = j.at("class_weights_node").get<std::array<double, 2>>();
  c.class_weights_graph = j.at("class_weights_graph").get<std::array<double, 2>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline std::string encode_checkpoint(const ModelParams& p, const ModelConfig& cfg) {
  nlohmann::json h;
  h["format"] = "dualgnn-checkpoint";
  h["version"] = 1;
  h["config"] = model_config_json(cfg);
  h["n_params"] = p.flat.size();
  h["layout"] = nlohmann::json::array();
  for (const auto& b : p.layout.blocks)
    h["layout"].push_back({{"name", b.name}, {"offset", b.offset}, {"rows", b.rows}, {"cols", b.cols}});
  const std::string header = h.dump();
  std::string out("DGNNCKPT");
  io::put_le<std::uint64_t>(out, header.size());
  out += header;
  io::put_le_array<double>(out, std::span<const double>(p.flat.data(), static_cast<std::size_t>(p.flat.size())));
  return out;
}

struct Checkpoint {
  ModelParams params;
  ModelConfig config;
};

inline Checkpoint decode_checkpoint(std::string_view bytes) {
  io::LeReader r(bytes);
  if (r.take(8) != "DGNNCKPT") throw IoError("checkpoint: bad magic");
  const auto hlen = r.get<std::uint64_t>();
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(r.take(hlen));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: malformed header: ") + e.what());
  }
  Checkpoint ck;
  ck.config = model_config_from_json(h.at("config"));
  ck.params = ModelParams(ck.config.in_dim, ck.config.hidden_dim);
  if (h.at("n_params").get<Eigen::Index>() != ck.params.flat.size())
    throw IoError("checkpoint: parameter count does not match config");
  r.get_array<double>(std::span<double>(ck.params.flat.data(), static_cast<std::size_t>(ck.params.flat.size())));
  if (r.remaining() != 0) throw IoError("checkpoint: trailing bytes");
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams& p, const ModelConfig& cfg) {
  io::write_file_atomic(path, encode_checkpoint(p, cfg));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace dualgnn::nn
