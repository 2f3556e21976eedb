#include <atomic>
#include <chrono>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "clusterosc/cluster.hpp"
#include "clusterosc/coupling.hpp"
#include "clusterosc/errors.hpp"
#include "clusterosc/io.hpp"
#include "clusterosc/portrait.hpp"
#include "clusterosc/sim.hpp"
#include "clusterosc/stability.hpp"
#include "clusterosc/version.hpp"

namespace {

namespace fs = std::filesystem;
using clusterosc::NumericalError;
using clusterosc::io::json;
namespace cluster = clusterosc::cluster;
namespace coupling = clusterosc::coupling;
namespace io = clusterosc::io;
namespace portrait = clusterosc::portrait;
namespace sim = clusterosc::sim;
namespace stability = clusterosc::stability;

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string fmt6(const std::complex<double>& z) {
    if (z.imag() == 0.0) return fmt6(z.real());
    return fmt6(z.real()) + (z.imag() < 0 ? " - " : " + ") + fmt6(std::abs(z.imag())) + "i";
}

fs::path resolve_out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("CLUSTEROSC_OUT_DIR"))
        if (*env) return env;
    return ".";
}

// Shared run bookkeeping: every command writes its resolved config (the
// digest input) and a manifest next to its outputs.
struct Run {
    std::string command;
    fs::path out_dir;
    json resolved;
    std::uint64_t seed = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void finish() const {
        io::RunManifest m;
        m.command = command;
        m.config_digest = io::config_digest(resolved);
        m.seed = seed;
        m.tool_version = clusterosc::kToolVersion;
        m.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        io::write_text_file(out_dir / "resolved_config.json", resolved.dump(2) + "\n");
        io::write_text_file(out_dir / "manifest.json", io::to_json(m).dump(2) + "\n");
    }
};

// Inputs shared by solve/stability/design/portrait: a coupling plus cluster
// sizes, Newton guess and omega, from --preset or a flat JSON config file
// {"c","s"[,"sizes","guess","omega"]} with flags taking precedence.
struct ProblemOpts {
    std::string preset;
    std::string config_path;
    std::vector<int> sizes;
    std::vector<double> guess;
    double omega = 0.0;
    bool omega_set = false;
};

struct ProblemInput {
    coupling::FourierCoupling g;
    cluster::Partition partition;
    std::vector<double> guess;
    double omega = 0.0;
};

std::vector<double> default_guess(const std::string& preset) {
    if (preset == "case0") return {0.0, 1.5, 3.1};
    return {0.0, 1.70, 4.76};
}

ProblemInput resolve_problem(const ProblemOpts& opts) {
    if (opts.preset.empty() == opts.config_path.empty())
        throw std::invalid_argument("give exactly one of --preset and --config");
    ProblemInput in;
    in.partition.sizes = {2, 2, 2};
    if (!opts.preset.empty()) {
        in.g = coupling::preset(opts.preset);
        in.guess = default_guess(opts.preset);
    } else {
        const json j = io::read_json_file(opts.config_path);
        in.g = io::coupling_from_json(j);
        if (j.contains("sizes")) in.partition.sizes = j.at("sizes").get<std::vector<int>>();
        if (j.contains("guess")) in.guess = j.at("guess").get<std::vector<double>>();
        in.omega = j.value("omega", 0.0);
        if (!j.contains("guess")) in.guess.clear();
    }
    if (!opts.sizes.empty()) in.partition.sizes = opts.sizes;
    if (!opts.guess.empty()) in.guess = opts.guess;
    if (opts.omega_set) in.omega = opts.omega;
    in.partition.validate();
    if (in.guess.empty())
        throw std::invalid_argument("no Newton guess: pass --guess or add \"guess\" to the config");
    if (static_cast<int>(in.guess.size()) != in.partition.M())
        throw std::invalid_argument("guess length must equal the number of clusters");
    return in;
}

json problem_json(const std::string& command, const ProblemInput& in) {
    json j = io::to_json(in.g);
    j["command"] = command;
    j["sizes"] = in.partition.sizes;
    j["guess"] = in.guess;
    j["omega"] = in.omega;
    return j;
}

void add_problem_flags(CLI::App* cmd, ProblemOpts& opts) {
    cmd->add_option("--preset", opts.preset, "coupling preset: case0, case1 or case2");
    cmd->add_option("--config", opts.config_path, "JSON config file {\"c\",\"s\",...}");
    cmd->add_option("--sizes", opts.sizes, "cluster sizes, e.g. 2,2,2")->delimiter(',');
    cmd->add_option("--guess", opts.guess, "Newton guess phases, e.g. 0,1.7,4.76")->delimiter(',');
    cmd->add_option("--omega", opts.omega, "intrinsic frequency")
        ->each([&opts](const std::string&) { opts.omega_set = true; });
}

// ---------------------------------------------------------------- enumerate

int cmd_enumerate(int n, const std::string& format, const std::string& out_flag) {
    Run run;
    run.command = "enumerate";
    run.out_dir = resolve_out_dir(out_flag);
    run.resolved = json{{"command", "enumerate"}, {"N", n}, {"format", format}};

    const auto table = cluster::enumerate_isotropy(n);
    if (format == "json") {
        json rows = json::array();
        for (const auto& cls : table) rows.push_back(io::to_json(cls));
        std::cout << rows.dump(2) << "\n";
        io::write_text_file(run.out_dir / "isotropy.json", rows.dump(2) + "\n");
    } else {
        const std::string csv = io::csv_isotropy(table);
        std::cout << csv;
        io::write_text_file(run.out_dir / "isotropy.csv", csv);
    }
    run.finish();
    return 0;
}

// -------------------------------------------------------------------- solve

int cmd_solve(const ProblemOpts& opts, const std::string& out_flag) {
    Run run;
    run.command = "solve";
    run.out_dir = resolve_out_dir(out_flag);
    const ProblemInput in = resolve_problem(opts);
    run.resolved = problem_json("solve", in);

    const cluster::ClusterState st =
        cluster::solve_phases(in.g, in.partition, in.guess, in.omega);
    const json out = io::to_json(st);
    std::cout << out.dump(2) << "\n";
    io::write_text_file(run.out_dir / "state.json", out.dump(2) + "\n");
    run.finish();
    return 0;
}

// ---------------------------------------------------------------- stability

int cmd_stability(const ProblemOpts& opts, const std::string& format,
                  const std::string& out_flag) {
    Run run;
    run.command = "stability";
    run.out_dir = resolve_out_dir(out_flag);
    const ProblemInput in = resolve_problem(opts);
    run.resolved = problem_json("stability", in);

    const cluster::ClusterState st =
        cluster::solve_phases(in.g, in.partition, in.guess, in.omega);
    const stability::StabilityReport report = stability::analyze(in.g, in.partition, st.phases);

    json out{{"state", io::to_json(st)}, {"report", io::to_json(report)}};
    io::write_text_file(run.out_dir / "report.json", out.dump(2) + "\n");

    if (format == "json") {
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "phases:";
        for (double p : st.phases) std::cout << ' ' << fmt6(p);
        std::cout << "\nOmega: " << fmt6(st.Omega) << "\ntangential:";
        for (const auto& z : report.tangential) std::cout << ' ' << fmt6(z);
        std::cout << "\ntransverse:";
        for (const auto& e : report.transverse) {
            if (e.exponent)
                std::cout << ' ' << fmt6(*e.exponent) << " (x" << e.multiplicity << ')';
            else
                std::cout << " - (trivial cluster)";
        }
        std::cout << '\n';
        if (report.mu) std::cout << "mu: " << fmt6(*report.mu) << "  nu: " << fmt6(*report.nu) << '\n';
        if (!report.K.empty()) {
            std::cout << "K sorted:";
            for (double k : report.K) std::cout << ' ' << fmt6(k);
            std::cout << '\n';
        }
        if (report.classification)
            std::cout << "classification: " << stability::to_string(*report.classification)
                      << (report.tangentially_stable ? "" : " (tangentially unstable)") << '\n';
    }
    run.finish();
    return 0;
}

// ------------------------------------------------------------------- design

int cmd_design(const ProblemOpts& opts, double r_min, double r_max, int r_steps,
               double epsilon_flag, int jobs, const std::string& out_flag) {
    Run run;
    run.command = "design";
    run.out_dir = resolve_out_dir(out_flag);
    const ProblemInput in = resolve_problem(opts);
    if (!(r_max >= r_min)) throw std::invalid_argument("need --r-max >= --r-min");
    if (r_steps < 1) throw std::invalid_argument("need --r-steps >= 1");

    const cluster::ClusterState base =
        cluster::solve_phases(in.g, in.partition, in.guess, in.omega);
    const double epsilon =
        epsilon_flag > 0.0 ? epsilon_flag : coupling::default_bump_epsilon(base.phases);

    run.resolved = problem_json("design", in);
    run.resolved["r_min"] = r_min;
    run.resolved["r_max"] = r_max;
    run.resolved["r_steps"] = r_steps;
    run.resolved["epsilon"] = epsilon;

    const stability::BifurcationThresholds thresholds =
        stability::bifurcation_thresholds(in.g, in.partition, base.phases, epsilon);

    struct Row {
        double r = 0.0;
        std::vector<double> lambda;
        int stable_count = 0;
        std::string classification;
    };
    std::vector<Row> rows(r_steps);
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (size_t i; (i = next.fetch_add(1)) < rows.size();) {
            try {
                Row row;
                row.r = r_steps == 1
                            ? r_min
                            : r_min + (r_max - r_min) * static_cast<double>(i) / (r_steps - 1);
                const coupling::Coupling gr =
                    coupling::perturbed_coupling(in.g, {epsilon, row.r});
                const cluster::ClusterState st =
                    cluster::solve_phases(gr, in.partition, base.phases, in.omega);
                row.lambda = stability::transverse_exponents(gr, in.partition, st.phases);
                for (double l : row.lambda) row.stable_count += l < 0.0 ? 1 : 0;
                if (in.partition.M() == 3)
                    row.classification = stability::to_string(
                        stability::transverse_classification(gr, in.partition, st.phases).cls);
                rows[i] = std::move(row);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int pool = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (pool < 1) pool = 1;
    pool = std::min<int>(pool, r_steps);
    std::vector<std::thread> threads;
    for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);

    std::ostringstream csv;
    csv << 'r';
    for (int k = 1; k <= in.partition.M(); ++k) csv << ",lambda_" << k;
    csv << ",stable_count,classification\n";
    for (const auto& row : rows) {
        csv << io::format_double(row.r);
        for (double l : row.lambda) csv << ',' << io::format_double(l);
        csv << ',' << row.stable_count << ',' << row.classification << '\n';
    }
    io::write_text_file(run.out_dir / "design.csv", csv.str());

    json summary{{"thresholds", thresholds.r_values}, {"epsilon", thresholds.epsilon_used}};
    io::write_text_file(run.out_dir / "design.json", summary.dump(2) + "\n");

    std::cout << "thresholds r_k:";
    for (double r : thresholds.r_values) std::cout << ' ' << fmt6(r);
    std::cout << "\nrows: " << rows.size() << "  stable counts: " << rows.front().stable_count
              << " -> " << rows.back().stable_count << '\n';
    run.finish();
    return 0;
}

// ----------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string preset;
    std::string config_path;
    double t_end = 100.0;
    double dt = 0.0;
    double noise = 0.0;
    double omega = 0.0;
    std::uint64_t seed = 0;
    int stride = 1;
    int n = 6;
    std::vector<double> initial;
    int ref = 0;  // 1-based; 0 = last oscillator
    double enter_tol = 0.05;
    double min_dwell = 5.0;
    std::vector<double> saddle_guess;
    bool no_itinerary = false;
    bool no_relabel = false;
};

int cmd_simulate(const SimulateOpts& opts, const std::vector<const CLI::Option*>& set_flags,
                 const std::string& out_flag) {
    Run run;
    run.command = "simulate";
    run.out_dir = resolve_out_dir(out_flag);
    if (opts.preset.empty() == opts.config_path.empty())
        throw std::invalid_argument("give exactly one of --preset and --config");

    sim::SimConfig cfg;
    if (!opts.preset.empty()) {
        cfg.g = coupling::preset(opts.preset);
    } else {
        cfg = io::sim_config_from_json(io::read_json_file(opts.config_path));
    }
    auto flag_set = [&](const char* name) {
        for (const auto* o : set_flags)
            if (o->check_name(name) && o->count() > 0) return true;
        return false;
    };
    if (flag_set("--t-end")) cfg.t_end = opts.t_end;
    if (flag_set("--dt")) cfg.dt = opts.dt;
    if (flag_set("--noise")) cfg.noise_amplitude = opts.noise;
    if (flag_set("--omega")) cfg.omega = opts.omega;
    if (flag_set("--seed")) cfg.rng_seed = opts.seed;
    if (flag_set("--stride")) cfg.record_stride = opts.stride;
    if (flag_set("--n")) cfg.n = opts.n;
    if (flag_set("--initial")) cfg.initial = opts.initial;
    if (!opts.preset.empty()) {
        // preset path starts from defaults; apply the common knobs even when
        // they repeat the defaults so presets and config files behave alike
        cfg.t_end = opts.t_end;
        cfg.dt = opts.dt;
        cfg.noise_amplitude = opts.noise;
        cfg.omega = opts.omega;
        cfg.rng_seed = opts.seed;
        cfg.record_stride = opts.stride;
        cfg.n = opts.n;
        cfg.initial = opts.initial;
    }
    run.seed = cfg.rng_seed;

    const sim::Trajectory traj = sim::integrate(cfg);

    int ref = opts.ref > 0 ? opts.ref : cfg.n;
    if (ref < 1 || ref > cfg.n) throw std::invalid_argument("--ref out of range");
    const auto y = sim::observables(traj, ref - 1);

    io::write_text_file(run.out_dir / "trajectory.csv", io::csv_trajectory(traj));
    io::write_text_file(run.out_dir / "observables.csv", io::csv_observables(traj, y));

    std::vector<double> saddle_guess = opts.saddle_guess;
    if (saddle_guess.empty() && (opts.preset == "case1" || opts.preset == "case2"))
        saddle_guess = {1.70, 4.76};

    json events_json = json::array();
    size_t n_events = 0;
    if (!opts.no_itinerary && saddle_guess.size() == 2 && cfg.n == 6) {
        const cluster::ClusterState st = cluster::solve_phases(
            cfg.g, cluster::Partition{{2, 2, 2}}, {0.0, saddle_guess[0], saddle_guess[1]});
        const sim::SaddleSet saddles = sim::saddle_set(st.phases[1], st.phases[2]);
        sim::Trajectory labelled = traj;
        if (!opts.no_relabel) {
            const long best = sim::best_paired_sample(traj);
            if (best >= 0) {
                const auto perm =
                    sim::pair_relabel_permutation(traj.states[static_cast<size_t>(best)], 1e-3);
                labelled = sim::apply_permutation(traj, perm);
            }
        }
        const auto events = sim::itinerary(labelled, saddles, opts.enter_tol, opts.min_dwell);
        events_json = io::to_json(events);
        n_events = events.size();
    }
    io::write_text_file(run.out_dir / "itinerary.json", events_json.dump(2) + "\n");

    run.resolved = io::to_json(traj.config);
    run.resolved["command"] = "simulate";
    run.resolved["ref"] = ref;
    run.resolved["enter_tol"] = opts.enter_tol;
    run.resolved["min_dwell"] = opts.min_dwell;
    run.resolved["saddle_guess"] = saddle_guess;

    std::cout << "recorded " << traj.times.size() << " samples over t = "
              << fmt6(traj.times.back()) << "; itinerary events: " << n_events << '\n';
    run.finish();
    return 0;
}

// ----------------------------------------------------------------- portrait

int cmd_portrait(const ProblemOpts& opts, int resolution, int grid,
                 const std::string& out_flag) {
    Run run;
    run.command = "portrait";
    run.out_dir = resolve_out_dir(out_flag);
    ProblemOpts inner = opts;
    if (inner.guess.empty() && inner.config_path.empty() && inner.preset.empty())
        throw std::invalid_argument("give exactly one of --preset and --config");
    // portrait does not solve, only needs a coupling + sizes; reuse the
    // resolver with a dummy guess so presets and config files parse the same
    if (inner.guess.empty()) inner.guess = {0.0, 0.0, 0.0};
    const ProblemInput in = resolve_problem(inner);

    run.resolved = io::to_json(in.g);
    run.resolved["command"] = "portrait";
    run.resolved["sizes"] = in.partition.sizes;
    run.resolved["resolution"] = resolution;
    run.resolved["grid"] = grid;

    const portrait::PortraitResult result =
        portrait::find_fixed_points(in.g, in.partition, grid);
    const auto samples = portrait::export_portrait_samples(in.g, in.partition, resolution);

    io::write_text_file(run.out_dir / "portrait.csv", io::csv_portrait(samples));
    io::write_text_file(run.out_dir / "fixed_points.json", io::to_json(result).dump(2) + "\n");

    int sinks = 0, sources = 0, saddles = 0, other = 0;
    for (const auto& fp : result.points) {
        switch (fp.kind) {
            case portrait::PointKind::Sink: ++sinks; break;
            case portrait::PointKind::Source: ++sources; break;
            case portrait::PointKind::Saddle: ++saddles; break;
            default: ++other; break;
        }
    }
    if (result.degenerate)
        std::cout << "degenerate field: every point is an equilibrium\n";
    else
        std::cout << "fixed points: " << result.points.size() << " (" << sinks << " sinks, "
                  << sources << " sources, " << saddles << " saddles, " << other
                  << " non-hyperbolic)\n";
    run.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cluster states of globally coupled identical phase oscillators"};
    app.set_version_flag("--version", clusterosc::kToolVersion);
    app.require_subcommand(1);

    int rc = 0;

    // enumerate
    auto* enumerate = app.add_subcommand("enumerate", "isotropy classes of S_N phase space");
    int enum_n = 6;
    std::string enum_format = "csv", enum_out;
    enumerate->add_option("N", enum_n, "number of oscillators (1..12)")->required();
    enumerate->add_option("--format", enum_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    enumerate->add_option("--out", enum_out, "output directory");
    enumerate->callback([&] { rc = cmd_enumerate(enum_n, enum_format, enum_out); });

    // solve
    auto* solve = app.add_subcommand("solve", "Newton-solve a cluster state");
    ProblemOpts solve_opts;
    std::string solve_out;
    add_problem_flags(solve, solve_opts);
    solve->add_option("--out", solve_out, "output directory");
    solve->callback([&] { rc = cmd_solve(solve_opts, solve_out); });

    // stability
    auto* stab = app.add_subcommand("stability", "tangential/transverse stability report");
    ProblemOpts stab_opts;
    std::string stab_format = "table", stab_out;
    add_problem_flags(stab, stab_opts);
    stab->add_option("--format", stab_format, "table or json")
        ->check(CLI::IsMember({"table", "json"}));
    stab->add_option("--out", stab_out, "output directory");
    stab->callback([&] { rc = cmd_stability(stab_opts, stab_format, stab_out); });

    // design
    auto* design = app.add_subcommand("design", "sweep the bump-perturbation parameter r");
    ProblemOpts design_opts;
    double r_min = 0.0, r_max = 0.0, design_eps = 0.0;
    int r_steps = 41, design_jobs = 0;
    std::string design_out;
    add_problem_flags(design, design_opts);
    design->add_option("--r-min", r_min, "sweep start")->required();
    design->add_option("--r-max", r_max, "sweep end")->required();
    design->add_option("--r-steps", r_steps, "number of sweep points");
    design->add_option("--epsilon", design_eps, "bump support half-width (default: auto)");
    design->add_option("--jobs", design_jobs, "worker threads (default: hardware)");
    design->add_option("--out", design_out, "output directory");
    design->callback([&] {
        rc = cmd_design(design_opts, r_min, r_max, r_steps, design_eps, design_jobs, design_out);
    });

    // simulate
    auto* simulate = app.add_subcommand("simulate", "integrate the full system");
    SimulateOpts sim_opts;
    std::string sim_out;
    std::vector<const CLI::Option*> sim_flags;
    sim_flags.push_back(simulate->add_option("--preset", sim_opts.preset, "coupling preset"));
    sim_flags.push_back(
        simulate->add_option("--config", sim_opts.config_path, "JSON simulation config"));
    sim_flags.push_back(simulate->add_option("--t-end", sim_opts.t_end, "integration time"));
    sim_flags.push_back(
        simulate->add_option("--dt", sim_opts.dt, "time step (0 = scheme default)"));
    sim_flags.push_back(
        simulate->add_option("--noise", sim_opts.noise, "additive noise amplitude"));
    sim_flags.push_back(simulate->add_option("--omega", sim_opts.omega, "intrinsic frequency"));
    sim_flags.push_back(simulate->add_option("--seed", sim_opts.seed, "RNG seed"));
    sim_flags.push_back(
        simulate->add_option("--stride", sim_opts.stride, "record every k-th step"));
    sim_flags.push_back(simulate->add_option("--n", sim_opts.n, "number of oscillators"));
    sim_flags.push_back(simulate->add_option("--initial", sim_opts.initial, "initial phases")
                            ->delimiter(','));
    simulate->add_option("--ref", sim_opts.ref, "observable reference oscillator (1-based)");
    simulate->add_option("--enter-tol", sim_opts.enter_tol, "itinerary entry tolerance");
    simulate->add_option("--min-dwell", sim_opts.min_dwell, "itinerary minimum dwell time");
    simulate->add_option("--saddle-guess", sim_opts.saddle_guess,
                         "Newton guess alpha,beta for the saddle gaps")
        ->delimiter(',');
    simulate->add_flag("--no-itinerary", sim_opts.no_itinerary, "skip itinerary extraction");
    simulate->add_flag("--no-relabel", sim_opts.no_relabel, "skip pair relabelling");
    simulate->add_option("--out", sim_out, "output directory");
    simulate->callback([&] { rc = cmd_simulate(sim_opts, sim_flags, sim_out); });

    // portrait
    auto* port = app.add_subcommand("portrait", "reduced (2,2,2) phase portrait");
    ProblemOpts port_opts;
    int resolution = 64, grid = 32;
    std::string port_out;
    add_problem_flags(port, port_opts);
    port->add_option("--resolution", resolution, "field sample grid (>= 16)");
    port->add_option("--grid", grid, "Newton seed grid (>= 8)");
    port->add_option("--out", port_out, "output directory");
    port->callback([&] { rc = cmd_portrait(port_opts, resolution, grid, port_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 3;
    }
    return rc;
}
