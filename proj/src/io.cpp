#include "clusterosc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace clusterosc::io {

namespace {

std::vector<double> number_array(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw std::invalid_argument(std::string("config: missing array field '") + key + "'");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number())
            throw std::invalid_argument(std::string("config: non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<int> int_array(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw std::invalid_argument(std::string("config: missing array field '") + key + "'");
    std::vector<int> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number_integer())
            throw std::invalid_argument(std::string("config: non-integer entry in '") + key + "'");
        out.push_back(v.get<int>());
    }
    return out;
}

json complex_json(const std::complex<double>& z) {
    return json{{"re", z.real()}, {"im", z.imag()}};
}

}  // namespace

json to_json(const coupling::FourierCoupling& g) {
    return json{{"c", g.c}, {"s", g.s}};
}

coupling::FourierCoupling coupling_from_json(const json& j) {
    coupling::FourierCoupling g;
    g.c = number_array(j, "c");
    g.s = number_array(j, "s");
    g.validate();
    return g;
}

json to_json(const cluster::ClusterState& st) {
    return json{{"sizes", st.partition.sizes},
                {"phases", st.phases},
                {"omega", st.omega},
                {"Omega", st.Omega}};
}

cluster::ClusterState state_from_json(const json& j) {
    cluster::ClusterState st;
    st.partition.sizes = int_array(j, "sizes");
    st.phases = number_array(j, "phases");
    st.omega = j.value("omega", 0.0);
    st.Omega = j.value("Omega", 0.0);
    st.partition.validate();
    if (st.phases.size() != st.partition.sizes.size())
        throw std::invalid_argument("config: phases/sizes length mismatch");
    return st;
}

json to_json(const cluster::IsotropyClass& cls) {
    return json{{"sizes", cls.sizes},
                {"fix_dim", cls.fix_dim},
                {"num_conjugates", cls.num_conjugates},
                {"orbit_size", cls.orbit_size}};
}

json to_json(const stability::StabilityReport& report) {
    json tangential = json::array();
    for (const auto& z : report.tangential) tangential.push_back(complex_json(z));
    json transverse = json::array();
    for (const auto& e : report.transverse) {
        json entry{{"multiplicity", e.multiplicity}};
        if (e.exponent)
            entry["exponent"] = *e.exponent;
        else
            entry["exponent"] = nullptr;
        transverse.push_back(entry);
    }
    json out{{"tangential", tangential},
             {"transverse", transverse},
             {"K", report.K},
             {"K_order", report.K_order},
             {"tangentially_stable", report.tangentially_stable}};
    out["mu"] = report.mu ? json(*report.mu) : json(nullptr);
    out["nu"] = report.nu ? json(*report.nu) : json(nullptr);
    out["classification"] =
        report.classification ? json(stability::to_string(*report.classification)) : json(nullptr);
    return out;
}

json to_json(const std::vector<sim::ItineraryEvent>& events) {
    json out = json::array();
    for (const auto& e : events)
        out.push_back(json{{"saddle_index", e.saddle_index},
                           {"t_enter", e.t_enter},
                           {"t_exit", e.t_exit},
                           {"alignment", e.alignment},
                           {"min_distance", e.min_distance}});
    return out;
}

json to_json(const portrait::PortraitResult& result) {
    json points = json::array();
    for (const auto& fp : result.points)
        points.push_back(json{{"u", fp.u},
                              {"v", fp.v},
                              {"kind", portrait::to_string(fp.kind)},
                              {"eigenvalues", json::array({complex_json(fp.eigenvalues[0]),
                                                           complex_json(fp.eigenvalues[1])})}});
    return json{{"degenerate", result.degenerate}, {"fixed_points", points}};
}

json to_json(const sim::SimConfig& cfg) {
    return json{{"n", cfg.n},
                {"coupling", to_json(cfg.g)},
                {"omega", cfg.omega},
                {"dt", cfg.dt},
                {"t_end", cfg.t_end},
                {"noise_amplitude", cfg.noise_amplitude},
                {"rng_seed", cfg.rng_seed},
                {"initial", cfg.initial},
                {"record_stride", cfg.record_stride}};
}

sim::SimConfig sim_config_from_json(const json& j) {
    sim::SimConfig cfg;
    if (!j.contains("coupling"))
        throw std::invalid_argument("config: missing 'coupling' object");
    cfg.g = coupling_from_json(j.at("coupling"));
    if (j.contains("n")) cfg.n = j.at("n").get<int>();
    cfg.omega = j.value("omega", cfg.omega);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.t_end = j.value("t_end", cfg.t_end);
    cfg.noise_amplitude = j.value("noise_amplitude", cfg.noise_amplitude);
    if (j.contains("rng_seed")) cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (j.contains("record_stride")) cfg.record_stride = j.at("record_stride").get<int>();
    if (j.contains("initial")) {
        const auto& init = j.at("initial");
        if (init.is_string()) {
            if (init.get<std::string>() != "random")
                throw std::invalid_argument("config: 'initial' must be an array or \"random\"");
            cfg.initial.clear();
        } else {
            cfg.initial = number_array(j, "initial");
        }
    }
    cfg.validate();
    return cfg;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_isotropy(const std::vector<cluster::IsotropyClass>& table) {
    std::ostringstream oss;
    oss << "sizes,fix_dim,num_conjugates,orbit_size\n";
    for (const auto& cls : table) {
        for (size_t i = 0; i < cls.sizes.size(); ++i)
            oss << (i ? "+" : "") << cls.sizes[i];
        oss << ',' << cls.fix_dim << ',' << cls.num_conjugates << ',' << cls.orbit_size << '\n';
    }
    return oss.str();
}

std::string csv_trajectory(const sim::Trajectory& traj) {
    std::ostringstream oss;
    const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
    oss << 't';
    for (int i = 1; i <= n; ++i) oss << ",theta_" << i;
    oss << '\n';
    for (size_t k = 0; k < traj.times.size(); ++k) {
        oss << format_double(traj.times[k]);
        for (double x : traj.states[k]) oss << ',' << format_double(x);
        oss << '\n';
    }
    return oss.str();
}

std::string csv_observables(const sim::Trajectory& traj,
                            const std::vector<std::vector<double>>& y) {
    std::ostringstream oss;
    const int n = y.empty() ? 0 : static_cast<int>(y.front().size());
    oss << 't';
    for (int i = 1; i <= n; ++i) oss << ",y_" << i;
    oss << '\n';
    for (size_t k = 0; k < y.size(); ++k) {
        oss << format_double(traj.times[k]);
        for (double x : y[k]) oss << ',' << format_double(x);
        oss << '\n';
    }
    return oss.str();
}

std::string csv_portrait(const std::vector<portrait::FieldSample>& samples) {
    std::ostringstream oss;
    oss << "u,v,du,dv\n";
    for (const auto& s : samples)
        oss << format_double(s.u) << ',' << format_double(s.v) << ',' << format_double(s.du)
            << ',' << format_double(s.dv) << '\n';
    return oss.str();
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string config_digest(const json& config) {
    const std::string canonical = config.dump();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical)));
    return buf;
}

json to_json(const RunManifest& m) {
    return json{{"command", m.command},
                {"config_digest", m.config_digest},
                {"seed", m.seed},
                {"tool_version", m.tool_version},
                {"wall_time", m.wall_time}};
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::invalid_argument("write failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config parse error in " + path.string() + ": " + e.what());
    }
}

}  // namespace clusterosc::io
