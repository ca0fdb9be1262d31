#pragma once

// JSON configuration parsing (with errors that name the failing field),
// run-directory artifact layout, and the run manifest.
//
// Artifact layout for a trajectory directory:
//   manifest.json   — config echo, outcome, summary stats, file index
//   S.csv           — source field
//   series.csv      — scalar diagnostics + cumulative integrals per snapshot
//   m_XXXXXXXX.csv, p_XXXXXXXX.csv — field snapshots by step index

#include "netform/bounds.hpp"
#include "netform/dynamics.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace netform {

inline constexpr const char* kToolName = "netform";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Configuration rejection; the message names the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

Grid parse_grid(const Json& j);
PhysParams parse_phys(const Json& j);
ScalarField parse_scalar_field(const Json& j, const Grid& g, const std::string& name);
VectorField parse_vector_field(const Json& j, const Grid& g, const std::string& name);
SimConfig parse_sim_config(const Json& j);
EstimateInputs parse_estimate_inputs(const Json& j);

Json grid_to_json(const Grid& g);
Json estimate_inputs_to_json(const EstimateInputs& in);
Json exponents_to_json(const ExponentSet& e);

/// Write every artifact of a finished run into `dir` (created if missing).
/// `config_echo` is embedded verbatim; wall time goes into a single field so
/// consumers can exclude it when comparing manifests.
void write_trajectory_artifacts(const std::string& dir, const Trajectory& traj,
                                const Json& config_echo, std::uint64_t seed,
                                double wall_time_s);

/// Rebuild a trajectory from a run directory written by
/// write_trajectory_artifacts.  The series table has snapshot cadence, which
/// is sufficient for the energy audits (they evaluate at snapshot times).
Trajectory load_trajectory(const std::string& dir);

/// Resolve the output directory: --out flag if nonempty, else NETFORM_OUT,
/// else "./out".
std::string resolve_out_dir(const std::string& flag_value);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace netform
