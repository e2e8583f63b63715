#include "rumorlab/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rumorlab/error.hpp"

namespace rumorlab::io {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kInvalidArgument, "short write to " + path.string());
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

json blueprint_to_json(const TypeBlueprint& bp) {
  return json{{"n_types", bp.n_types()}, {"counts", bp.counts()}};
}

TypeBlueprint blueprint_from_json(const json& value, const std::string& pointer) {
  auto schema = [&](const std::string& where, const std::string& what) {
    const std::string at = pointer + where;
    throw Error(ErrorCode::kSchemaError, "at " + (at.empty() ? std::string("/") : at) + ": " + what);
  };
  if (!value.is_object()) schema("", "blueprint must be an object");
  for (const auto& [key, _] : value.items())
    if (key != "n_types" && key != "counts") schema("/" + key, "unknown key");
  if (!value.contains("counts")) schema("/counts", "missing");
  const json& counts = value.at("counts");
  if (!counts.is_array()) schema("/counts", "expected an array of rows");
  CountMatrix m;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::string row_ptr = "/counts/" + std::to_string(i);
    if (!counts[i].is_array()) schema(row_ptr, "expected an array");
    std::vector<int> row;
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      if (!counts[i][j].is_number_integer())
        schema(row_ptr + "/" + std::to_string(j), "expected an integer");
      row.push_back(counts[i][j].get<int>());
    }
    m.push_back(std::move(row));
  }
  if (value.contains("n_types")) {
    if (!value.at("n_types").is_number_integer()) schema("/n_types", "expected an integer");
    if (value.at("n_types").get<std::int64_t>() != static_cast<std::int64_t>(m.size()))
      schema("/n_types", "does not match the number of rows in counts");
  }
  return validate_blueprint(m);
}

std::string edges_csv(const Graph& graph) {
  std::string out = "u,v\n";
  for (auto [u, v] : graph.edges()) out += std::to_string(u) + "," + std::to_string(v) + "\n";
  return out;
}

json graph_sidecar(const Graph& graph) {
  return json{{"type_of", graph.types()}, {"blueprint", blueprint_to_json(graph.blueprint())}};
}

void write_graph(const Graph& graph, const fs::path& edges_path, const fs::path& sidecar_path) {
  write_text(edges_path, edges_csv(graph));
  write_json(sidecar_path, graph_sidecar(graph));
}

Graph read_graph(const fs::path& edges_path, const fs::path& sidecar_path) {
  const json side = read_json(sidecar_path);
  if (!side.is_object() || !side.contains("type_of") || !side.at("type_of").is_array())
    throw Error(ErrorCode::kSchemaError, "at /type_of: missing or not an array");
  std::vector<int> type_of;
  for (std::size_t i = 0; i < side.at("type_of").size(); ++i) {
    const json& t = side.at("type_of")[i];
    if (!t.is_number_integer() || t.get<int>() < 0)
      throw Error(ErrorCode::kSchemaError, "at /type_of/" + std::to_string(i) + ": expected a type index");
    type_of.push_back(t.get<int>());
  }

  std::vector<std::pair<int, int>> edges;
  std::istringstream in(read_text(edges_path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "u,v") continue;
    const auto comma = line.find(',');
    int u = -1, v = -1;
    const char* end = line.data() + line.size();
    if (comma == std::string::npos ||
        std::from_chars(line.data(), line.data() + comma, u).ptr != line.data() + comma ||
        std::from_chars(line.data() + comma + 1, end, v).ptr != end)
      throw Error(ErrorCode::kParseError, edges_path.string() + ":" + std::to_string(line_no) + ": expected u,v");
    edges.emplace_back(u, v);
  }

  if (side.contains("blueprint")) return Graph(blueprint_from_json(side.at("blueprint"), "/blueprint"), type_of, edges);

  // Read the counts off the first vertex of each type.
  int n_types = 0;
  for (int t : type_of) n_types = std::max(n_types, t + 1);
  const int n_vertices = static_cast<int>(type_of.size());
  std::vector<std::vector<int>> nbr(n_vertices);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n_vertices || v >= n_vertices)
      throw Error(ErrorCode::kInvalidArgument, "edge endpoint outside the vertex range");
    nbr[u].push_back(v);
    nbr[v].push_back(u);
  }
  CountMatrix counts(n_types, std::vector<int>(n_types, 0));
  std::vector<bool> seen(n_types, false);
  for (int v = 0; v < n_vertices; ++v) {
    if (seen[type_of[v]]) continue;
    seen[type_of[v]] = true;
    for (int w : nbr[v]) ++counts[type_of[v]][type_of[w]];
  }
  return Graph(validate_blueprint(counts), type_of, edges);
}

namespace {

const char* kStateNames[3] = {"X", "Y", "Z"};

}  // namespace

std::string trajectory_csv(const Trajectory& tr, bool density) {
  std::string out = "t,type,X,Y,Z\n";
  const double n = static_cast<double>(tr.num_vertices());
  for (std::size_t g = 0; g < tr.times.size(); ++g)
    for (int k = 0; k < tr.n_types; ++k) {
      out += format_number(tr.times[g]) + "," + std::to_string(k);
      for (int s = 0; s < 3; ++s) {
        out += ",";
        out += density ? format_number(static_cast<double>(tr.at(g, k, s)) / n) : std::to_string(tr.at(g, k, s));
      }
      out += "\n";
    }
  return out;
}

std::string replica_summary_csv(const ReplicaSet& set) {
  if (set.runs.empty()) throw Error(ErrorCode::kInvalidArgument, "empty replica set");
  const Trajectory& shape = set.runs.front();
  std::string out = "t,type";
  for (const char* p : {"mean_", "var_"})
    for (const char* s : kStateNames) out += std::string(",") + p + s;
  out += "\n";
  for (std::size_t g = 0; g < shape.times.size(); ++g)
    for (int k = 0; k < shape.n_types; ++k) {
      out += format_number(shape.times[g]) + "," + std::to_string(k);
      for (const auto* series : {&set.mean, &set.variance})
        for (int s = 0; s < 3; ++s) out += "," + format_number((*series)[(g * shape.n_types + k) * 3 + s]);
      out += "\n";
    }
  return out;
}

std::string meanfield_csv(const MeanFieldSolution& sol) {
  std::string out = "t,type,X,Y,Z\n";
  for (std::size_t m = 0; m < sol.times.size(); ++m)
    for (int k = 0; k < sol.n_types; ++k)
      out += format_number(sol.times[m]) + "," + std::to_string(k) + "," + format_number(sol.X(m, k)) + "," +
             format_number(sol.Y(m, k)) + "," + format_number(sol.Z(m, k)) + "\n";
  return out;
}

std::string fluctuation_csv(const std::vector<FluctuationSample>& samples) {
  std::string out = "sample_id,t,type,X,Y,Z\n";
  for (std::size_t id = 0; id < samples.size(); ++id) {
    const FluctuationSample& s = samples[id];
    for (std::size_t m = 0; m < s.times.size(); ++m)
      for (int k = 0; k < s.n_types; ++k)
        out += std::to_string(id) + "," + format_number(s.times[m]) + "," + std::to_string(k) + "," +
               format_number(s.X(m, k)) + "," + format_number(s.Y(m, k)) + "," + format_number(s.Z(m, k)) + "\n";
  }
  return out;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += format_number(m(i, j));
    }
    out += "\n";
  }
  return out;
}

void write_covariance(const NoiseCovariance& cov, const fs::path& dir) {
  json index;
  index["mode"] = cov.mode == CovarianceMode::kTable ? "table" : "shot_noise";
  index["times"] = cov.times;
  index["lambda"] = cov.lambda;
  index["blocks"] = json::array();
  auto emit = [&](const std::string& name, const Eigen::MatrixXd& m, json meta) {
    const std::string file = "covariance_" + name + ".csv";
    write_text(dir / file, matrix_csv(m));
    meta["file"] = file;
    index["blocks"].push_back(std::move(meta));
  };
  for (const auto& blk : cov.initial) {
    const std::string k = std::to_string(blk.k);
    emit("Y0_" + k + "_Y0_" + k, blk.yy, {{"row", "Y0"}, {"col", "Y0"}, {"k", blk.k}});
    emit("Z0_" + k + "_Z0_" + k, blk.yy, {{"row", "Z0"}, {"col", "Z0"}, {"k", blk.k}});
    emit("Y0_" + k + "_Z0_" + k, blk.yz, {{"row", "Y0"}, {"col", "Z0"}, {"k", blk.k}});
  }
  for (const auto& blk : cov.pairs) {
    const std::string kj = std::to_string(blk.k) + "_" + std::to_string(blk.j);
    auto meta = [&](const char* r, const char* c) {
      return json{{"row", r}, {"col", c}, {"k", blk.k}, {"j", blk.j}, {"c", blk.c}};
    };
    emit("Y_" + kj + "_Y_" + kj, blk.yy, meta("Y", "Y"));
    emit("Z_" + kj + "_Z_" + kj, blk.zz, meta("Z", "Z"));
    emit("Y_" + kj + "_Z_" + kj, blk.yz, meta("Y", "Z"));
    emit("B_" + kj + "_B_" + kj, blk.bb, meta("B", "B"));
  }
  write_json(dir / "covariance_index.json", index);
}

}  // namespace rumorlab::io
