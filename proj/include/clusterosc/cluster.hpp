#pragma once

#include <string>
#include <vector>

#include "clusterosc/coupling.hpp"

namespace clusterosc::cluster {

using coupling::Coupling;

// Cluster sizes m_1..m_M with sum N.
struct Partition {
    std::vector<int> sizes;

    int M() const { return static_cast<int>(sizes.size()); }
    int N() const;
    void validate() const;  // throws std::invalid_argument
};

// A multi-cluster state: sizes, representative phases (gauge-fixed to
// phi_1 = 0), intrinsic frequency omega, and collective frequency Omega.
struct ClusterState {
    Partition partition;
    std::vector<double> phases;
    double omega = 0.0;
    double Omega = 0.0;
};

struct IsotropyClass {
    std::vector<int> sizes;  // descending
    int fix_dim = 0;
    long long num_conjugates = 0;
    long long orbit_size = 0;
};

// dPsi_k/dt = omega + (1/N) sum_l m_l g(Psi_k - Psi_l); the sum includes
// l = k, contributing m_k g(0).
std::vector<double> reduced_vector_field(const Coupling& g, const Partition& p,
                                         const std::vector<double>& psi,
                                         double omega);

// Components k = 2..M of sum_l m_l (g_{kl} - g_{1l}); all zero exactly at a
// rigidly rotating cluster state.
std::vector<double> existence_residual(const Coupling& g, const Partition& p,
                                       const std::vector<double>& phi);

struct SolveOptions {
    int max_iterations = 50;
    double tolerance = 1e-12;  // residual max-norm
};

// Damped Newton on (phi_2..phi_M) with the analytic Jacobian. Throws
// NumericalError on non-convergence or a singular Jacobian (both messages
// carry the final residual). The converged state gets Omega filled in.
ClusterState solve_phases(const Coupling& g, const Partition& p,
                          const std::vector<double>& guess, double omega = 0.0,
                          const SolveOptions& opts = {});

// True iff every pairwise difference phi_i - phi_j (i != j) is attained
// uniquely: all circle distances between distinct ordered differences > tol.
bool is_phase_nondegenerate(const std::vector<double>& phi, double tol);

enum class Certificate { PrimeN, DistinctSizes, PhaseNonDegenerate, Inconclusive };

std::string to_string(Certificate c);

// First applicable sufficient condition for all clusters being inequivalent:
// (a) N prime with a nontrivial cluster, (b) pairwise distinct sizes,
// (c) phase non-degeneracy.
Certificate inequivalence_certificate(const Partition& p,
                                      const std::vector<double>& phi, double tol);

// One class per integer partition of N (the subgroups without internal
// phase-shift symmetry). num_conjugates divides out permutations of
// equal-size blocks; orbit_size does not.
std::vector<IsotropyClass> enumerate_isotropy(int N);

// The count N!/(m * prod k_i!) quoted for isotropy subgroups with internal
// cyclic factor Z_m; exposed for documentation/cross-checks only. For m = 1
// and repeated block sizes this counts orbit points, not conjugacy classes.
long long shift_symmetric_state_count(const std::vector<int>& block_sizes, int m);

}
