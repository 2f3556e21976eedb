#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "clusterosc/cluster.hpp"
#include "clusterosc/coupling.hpp"
#include "clusterosc/portrait.hpp"
#include "clusterosc/sim.hpp"
#include "clusterosc/stability.hpp"

namespace clusterosc::io {

using nlohmann::json;

// JSON shapes: coupling {"c":[c0..cR],"s":[s1..sR]}; cluster state
// {"sizes","phases","omega","Omega"}.  Parse errors surface as
// std::invalid_argument with the offending field named.
json to_json(const coupling::FourierCoupling& g);
coupling::FourierCoupling coupling_from_json(const json& j);

json to_json(const cluster::ClusterState& st);
cluster::ClusterState state_from_json(const json& j);

json to_json(const cluster::IsotropyClass& cls);
json to_json(const stability::StabilityReport& report);
json to_json(const std::vector<sim::ItineraryEvent>& events);
json to_json(const portrait::PortraitResult& result);

// Simulation config with an embedded "coupling" object; missing fields keep
// the SimConfig defaults.
json to_json(const sim::SimConfig& cfg);
sim::SimConfig sim_config_from_json(const json& j);

// CSV emission.  All floating-point values are written with %.17g so files
// round-trip exactly.
std::string csv_isotropy(const std::vector<cluster::IsotropyClass>& table);
std::string csv_trajectory(const sim::Trajectory& traj);
std::string csv_observables(const sim::Trajectory& traj,
                            const std::vector<std::vector<double>>& y);
std::string csv_portrait(const std::vector<portrait::FieldSample>& samples);

std::string format_double(double x);  // %.17g

// FNV-1a 64-bit over the canonical (sorted-key, dumped) JSON text; the config
// digest recorded in every run manifest.
std::uint64_t fnv1a(std::string_view text);
std::string config_digest(const json& config);

struct RunManifest {
    std::string command;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string tool_version;
    double wall_time = 0.0;  // seconds
};

json to_json(const RunManifest& m);

void write_text_file(const std::filesystem::path& path, const std::string& content);
json read_json_file(const std::filesystem::path& path);

}  // namespace clusterosc::io
