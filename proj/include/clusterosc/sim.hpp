#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "clusterosc/cluster.hpp"
#include "clusterosc/coupling.hpp"

namespace clusterosc::sim {

// Full-system integration of  dθ_i/dt = ω + (1/N) Σ_j g(θ_i − θ_j)  where the
// sum runs over all j including j = i.  Noise-free runs use fixed-step RK4;
// runs with noise_amplitude > 0 use Euler–Maruyama with additive Gaussian
// increments of standard deviation noise_amplitude·sqrt(dt) per component.
struct SimConfig {
    int n = 6;
    coupling::FourierCoupling g;
    double omega = 0.0;
    double dt = 0.0;  // 0 ⇒ scheme default: 0.01 (RK4) or 0.001 (Euler–Maruyama)
    double t_end = 100.0;
    double noise_amplitude = 0.0;
    std::uint64_t rng_seed = 0;
    std::vector<double> initial;  // empty ⇒ uniform on [0,2π)^n from rng_seed
    int record_stride = 1;

    double resolved_dt() const;
    void validate() const;
};

struct Trajectory {
    std::vector<double> times;                // strictly increasing
    std::vector<std::vector<double>> states;  // wrapped to [0,2π)^n
    SimConfig config;  // echo with dt resolved and `initial` set to the state used
};

// Integrates the full system.  Identical configs (same seed) reproduce the
// trajectory bit for bit.  Oscillators whose phases coincide exactly receive
// identical drift, so exactly clustered sets stay clustered under RK4.
Trajectory integrate(const SimConfig& config);

// Y_k(t) = sin(θ_k(t) − θ_ref(t)); one row per recorded sample, ref 0-based.
std::vector<std::vector<double>> observables(const Trajectory& traj, int ref);

struct ClusterAssignment {
    cluster::Partition partition;  // sizes sorted descending
    std::vector<int> labels;       // labels[i] = cluster id of oscillator i
};

// Single-linkage grouping under circle_distance < tol.  Cluster ids are
// ordered by descending size, ties broken by smallest member index.
ClusterAssignment detect_clustering(const std::vector<double>& theta, double tol);

// The six saddle points of the (2,2,2) dynamics built from the gaps (α, β):
//   P₁ = (0,0,α,α,β,β)              P₄ = (0,0,2π−α,2π−α,β−α,β−α)
//   P₂ = (0,0,β−α,β−α,2π−α,2π−α)    P₅ = (0,0,2π+α−β,2π+α−β,2π−β,2π−β)
//   P₃ = (0,0,2π−β,2π−β,2π+α−β,2π+α−β)  P₆ = (0,0,β,β,α,α)
// all wrapped to [0,2π).  They form the orbit of P₁ under permutations of the
// three pair blocks modulo global rotation.
struct SaddleSet {
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<std::vector<double>> points;  // points[i] is P_{i+1}
};

// Requires 0 < α < β < 2π and β ≠ 2α (phase degeneracy).
SaddleSet saddle_set(double alpha, double beta);

struct Alignment {
    double distance = 0.0;
    double rotation = 0.0;  // c in [0,2π) achieving the minimum below
};

// min over c of ‖wrap_signed(a − b − c·1)‖₂ on T^n (Euclidean norm of the
// component-wise wrapped residual), with the optimal rotation c.
Alignment rotation_min_distance(const std::vector<double>& a, const std::vector<double>& b);

// rotation_min_distance additionally minimized over the 8 within-pair swaps
// (1,2)(3,4)(5,6) of theta, which preserve the pair-block labelling.
Alignment saddle_distance(const std::vector<double>& theta, const std::vector<double>& point);

struct ItineraryEvent {
    int saddle_index = 0;  // 1–6
    double t_enter = 0.0;
    double t_exit = 0.0;
    double alignment = 0.0;     // rotation at the closest approach
    double min_distance = 0.0;  // closest approach during the event
};

// Scans the recorded samples: an event opens when the distance to the nearest
// saddle drops below enter_tol and closes when the distance to that saddle
// exceeds 2·enter_tol.  Events shorter than min_dwell are dropped, then
// consecutive events with the same index are merged.
std::vector<ItineraryEvent> itinerary(const Trajectory& traj, const SaddleSet& saddles,
                                      double enter_tol = 0.05, double min_dwell = 5.0);

// Invariant subspaces of the pair-block structure: I₁ frees pair (1,2),
// I₂ frees pair (5,6), I₃ frees pair (3,4); the other two pairs stay glued.
enum class Subspace { I1, I2, I3 };
std::string to_string(Subspace s);

struct ConnectionResult {
    bool reached = false;
    double final_distance = 0.0;  // to the stated target at t_max
    int nearest_index = 0;        // saddle nearest to the final state (1–6)
    double nearest_distance = 0.0;
};

// Kicks `source` by eps_kick along its unstable transverse direction (the
// antisymmetric direction on the pair freed by `subspace`), integrates the
// noiseless flow for t_max, and reports whether the endpoint lies within 1e−6
// (rotation-minimized) of `target`.  The glued pairs are checked to stay
// within 1e−12 each step and re-projected.  Requires the source to have
// exactly one positive transverse exponent, lying in the stated subspace.
ConnectionResult connection_check(const coupling::FourierCoupling& g, const SaddleSet& saddles,
                                  int source, Subspace subspace, int target, double eps_kick,
                                  double t_max = 500.0, double dt = 0.01);

// For a sample forming three tight pairs (a (2,2,2) clustering at `tol`),
// returns the permutation placing the pairs at slots (1,2)(3,4)(5,6): the
// relabelled vector is  out[i] = theta[perm[i]].  Pairs are ordered by their
// smallest member, members ascending.
std::array<int, 6> pair_relabel_permutation(const std::vector<double>& theta, double tol);

// Index of the recorded sample with the tightest (2,2,2) clustering at the
// given linkage tolerance (smallest maximum within-pair circle distance), or
// -1 when no sample clusters as (2,2,2).  Used to pick the pairing that
// relabels a free-running trajectory into pair-block form.
long best_paired_sample(const Trajectory& traj, double tol = 1e-3);

std::vector<double> apply_permutation(const std::vector<double>& theta,
                                      const std::array<int, 6>& perm);
Trajectory apply_permutation(const Trajectory& traj, const std::array<int, 6>& perm);

}  // namespace clusterosc::sim
