#pragma once

// Feature cache layout (one directory):
//
//   index.json
//     { "format": "dualgnn-features", "version": 1, "feature_dim": 142,
//       "graph_dim": 6, "options": {...featurize options...},
//       "records": [ { "file": "w000000.bin", "patient_id", "seizure_id",
//                      "window_index", "n_nodes", "n_edges", "graph_label" }, ... ] }
//
//   wNNNNNN.bin, all little-endian:
//     char[4]  magic "DGFS"
//     u32      version (1)
//     u32      n_nodes N
//     u32      feature_dim F
//     u32      n_edges E
//     f64[N*F] node features, row-major
//     E x { u32 i, u32 j, f64 weight }   (i < j, sorted)
//     f64[6]   graph features (efficiency, path length, clustering,
//              modularity, small-world, assortativity)
//     u8[N]    node labels
//     u8       graph label

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualgnn/binary_io.hpp"
#include "dualgnn/featurize.hpp"

namespace dualgnn {

inline std::string encode_sample(const GraphSample& s) {
  std::string out;
  out.append("DGFS");
  io::put_le<std::uint32_t>(out, 1);
  io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.x.rows()));
  io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.x.cols()));
  io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.edges.edges.size()));
  for (Eigen::Index r = 0; r < s.x.rows(); ++r)
    for (Eigen::Index c = 0; c < s.x.cols(); ++c) io::put_le<double>(out, s.x(r, c));
  for (const auto& e : s.edges.edges) {
    io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.i));
    io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.j));
    io::put_le<double>(out, e.weight);
  }
  for (double v : s.g) io::put_le<double>(out, v);
  for (auto l : s.node_labels) io::put_le<std::uint8_t>(out, l);
  io::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(s.graph_label));
  return out;
}

inline GraphSample decode_sample(std::string_view bytes, WindowSource source) {
  io::LeReader r(bytes);
  if (r.take(4) != "DGFS") throw IoError("feature record: bad magic");
  if (r.get<std::uint32_t>() != 1) throw IoError("feature record: unsupported version");
  const auto n = r.get<std::uint32_t>();
  const auto f = r.get<std::uint32_t>();
  const auto e = r.get<std::uint32_t>();
  GraphSample s;
  s.source = std::move(source);
  s.x.resize(n, f);
  for (Eigen::Index i = 0; i < s.x.rows(); ++i)
    for (Eigen::Index c = 0; c < s.x.cols(); ++c) s.x(i, c) = r.get<double>();
  s.edges.n_nodes = static_cast<int>(n);
  for (std::uint32_t k = 0; k < e; ++k) {
    Edge edge;
    edge.i = static_cast<int>(r.get<std::uint32_t>());
    edge.j = static_cast<int>(r.get<std::uint32_t>());
    edge.weight = r.get<double>();
    if (edge.i >= edge.j || edge.j >= static_cast<int>(n)) throw IoError("feature record: bad edge");
    s.edges.edges.push_back(edge);
  }
  for (double& v : s.g) v = r.get<double>();
  s.node_labels.resize(n);
  for (auto& l : s.node_labels) l = r.get<std::uint8_t>();
  s.graph_label = r.get<std::uint8_t>();
  if (r.remaining() != 0) throw IoError("feature record: trailing bytes");
  return s;
}

inline nlohmann::json featurize_options_json(const FeaturizeOptions& o) {
  return {{"target_fs", o.target_fs}, {"tau", o.tau},       {"nperseg", o.nperseg},
          {"overlap", o.overlap},     {"n_rand", o.n_rand}, {"seed", o.seed}};
}

inline void write_feature_cache(const std::filesystem::path& dir, const std::vector<GraphSample>& samples,
                                const FeaturizeOptions& opt) {
  std::filesystem::create_directories(dir);
  nlohmann::json index;
  index["format"] = "dualgnn-features";
  index["version"] = 1;
  index["feature_dim"] = FeatureLayout::kDim;
  index["graph_dim"] = GraphFeatures::kSize;
  index["options"] = featurize_options_json(opt);
  index["records"] = nlohmann::json::array();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    char name[32];
    std::snprintf(name, sizeof(name), "w%06zu.bin", k);
    io::write_file_atomic(dir / name, encode_sample(s));
    index["records"].push_back({{"file", name},
                                {"patient_id", s.source.patient_id},
                                {"seizure_id", s.source.seizure_id},
                                {"window_index", s.source.window_index},
                                {"n_nodes", s.n_nodes()},
                                {"n_edges", s.edges.edges.size()},
                                {"graph_label", s.graph_label}});
  }
  io::write_file_atomic(dir / "index.json", index.dump(2) + "\n");
}

inline std::vector<GraphSample> read_feature_cache(const std::filesystem::path& dir) {
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(io::read_file(dir / "index.json"));
    if (index.at("format") != "dualgnn-features") throw IoError("not a feature cache: " + dir.string());
  } catch (const nlohmann::json::exception& e) {
    throw IoError((dir / "index.json").string() + ": " + e.what());
  }
  std::vector<GraphSample> out;
  for (const auto& rec : index.at("records")) {
    WindowSource src{rec.at("patient_id").get<std::string>(), rec.at("seizure_id").get<std::string>(),
                     rec.at("window_index").get<std::size_t>()};
    auto s = decode_sample(io::read_file(dir / rec.at("file").get<std::string>()), std::move(src));
    if (s.n_nodes() != rec.at("n_nodes").get<std::size_t>())
      throw IoError("feature cache: node count mismatch for " + rec.at("file").get<std::string>());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dualgnn
