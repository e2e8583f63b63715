#pragma once

// File formats. Numbers are written with %.17g, lines end in LF.

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "rumorlab/engine.hpp"
#include "rumorlab/fluctuations.hpp"
#include "rumorlab/meanfield.hpp"
#include "rumorlab/qtgraph.hpp"

namespace rumorlab::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_number(double v);

/// Throws Error{ParseError} when the file cannot be read.
std::string read_text(const fs::path& path);
/// Creates parent directories. Throws Error{InvalidArgument} on failure.
void write_text(const fs::path& path, const std::string& text);
json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& value);

/// {"n_types": n, "counts": [[...]]}
json blueprint_to_json(const TypeBlueprint& bp);
/// Throws Error{SchemaError} (with a JSON pointer) or a validation error.
TypeBlueprint blueprint_from_json(const json& value, const std::string& pointer = "");

/// Edge list CSV with header `u,v`.
std::string edges_csv(const Graph& graph);
/// {"type_of": [...], "blueprint": {...}}
json graph_sidecar(const Graph& graph);
void write_graph(const Graph& graph, const fs::path& edges_path, const fs::path& sidecar_path);
/// The blueprint comes from the sidecar when present, otherwise it is read
/// off the first vertex of each type.
Graph read_graph(const fs::path& edges_path, const fs::path& sidecar_path);

/// Columns t,type,X,Y,Z; counts, or densities relative to #V.
std::string trajectory_csv(const Trajectory& tr, bool density);
/// Columns t,type,mean_X,mean_Y,mean_Z,var_X,var_Y,var_Z (counts).
std::string replica_summary_csv(const ReplicaSet& set);
/// Columns t,type,X,Y,Z (densities relative to #V).
std::string meanfield_csv(const MeanFieldSolution& sol);
/// Columns sample_id,t,type,X,Y,Z.
std::string fluctuation_csv(const std::vector<FluctuationSample>& samples);
/// Dense matrix, one row per line, no header.
std::string matrix_csv(const Eigen::MatrixXd& m);

/// Writes covariance_<block>.csv files and covariance_index.json into dir.
void write_covariance(const NoiseCovariance& cov, const fs::path& dir);

}  // namespace rumorlab::io
