#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clusterosc/cluster.hpp"
#include "clusterosc/coupling.hpp"
#include "clusterosc/linalg.hpp"

namespace clusterosc::stability {

using cluster::Partition;
using coupling::Coupling;
using coupling::FourierCoupling;

// Re-exported here because the spectrum solver is owned by this module; the
// implementation lives with the rest of the dense linear algebra.
using linalg::eigenvalues_small_real_matrix;

// Counts of transversely stable clusters in a three-cluster state, following
// the position of -g'(0) among the sorted coupling sums K_1 <= K_2 <= K_3.
enum class Classification { AllUnstable, OneStable, TwoStable, AllStable, Marginal };

std::string to_string(Classification c);

struct TransverseEntry {
    std::optional<double> exponent;  // absent for trivial clusters (m_k = 1)
    int multiplicity = 0;            // m_k - 1
};

struct StabilityReport {
    std::vector<std::complex<double>> tangential;  // M values incl. trivial ~0
    std::vector<TransverseEntry> transverse;       // one entry per cluster
    std::optional<double> mu, nu;                  // three-cluster block data
    std::optional<Classification> classification;  // three-cluster only
    std::vector<double> K;                         // sorted ascending (M = 3)
    std::vector<int> K_order;                      // original cluster index per slot
    bool tangentially_stable = false;
};

// T_{kl} = (1/N)[delta_{kl} sum_{r != k} m_r g'_{kr} - (1-delta_{kl}) m_l g'_{kl}].
// Row sums vanish by construction (the trivial eigenvalue of the T-symmetry).
linalg::Mat tangential_matrix(const Coupling& g, const Partition& p,
                              const std::vector<double>& phi);

// For M = 3 the closed form {0, (mu +- sqrt(nu - mu^2) i)/2} (interpreted as
// a real pair (mu +- sqrt(mu^2 - nu))/2 when nu < mu^2); general M goes
// through the QR solver. The two paths are cross-checked for M = 3.
std::vector<std::complex<double>> tangential_eigenvalues(const Coupling& g,
                                                         const Partition& p,
                                                         const std::vector<double>& phi);

// (mu, nu) of the nontrivial 2x2 tangential block; nu is evaluated through
// two algebraically distinct forms, which must agree to 1e-10.
std::pair<double, double> three_cluster_mu_nu(const Coupling& g, const Partition& p,
                                              const std::vector<double>& phi);

// lambda_k = (1/N)[m_k g'(0) + sum_{l != k} m_l g'_{kl}], one per cluster,
// carrying multiplicity m_k - 1 in the full system.
std::vector<double> transverse_exponents(const Coupling& g, const Partition& p,
                                         const std::vector<double>& phi);

struct TransverseClassification {
    std::vector<double> K;       // sorted ascending
    std::vector<int> order;      // cluster index occupying each sorted slot
    Classification cls = Classification::Marginal;
    bool tangentially_stable = false;
};

// Three-cluster classification by the position of -g'(0) among K_1..K_3
// (marginality band 1e-9). Also reports whether the state is tangentially
// stable, which the transverse-count classification presupposes.
TransverseClassification transverse_classification(const Coupling& g, const Partition& p,
                                                   const std::vector<double>& phi);

struct BifurcationThresholds {
    std::vector<double> r_values;  // ascending
    double epsilon_used = 0.0;
};

// r_k = g'(0) + K_k for the bump family g_r = g + r h. Each threshold is
// verified by bisecting the sign change of the matching transverse exponent
// (agreement demanded to 1e-8), and solved phases / tangential eigenvalues
// are spot-checked to be r-independent to 1e-10.
BifurcationThresholds bifurcation_thresholds(const FourierCoupling& g, const Partition& p,
                                             const std::vector<double>& phi, double epsilon);

// Linearization of the full N-oscillator system in the co-rotating frame:
// J_ij = -(1/N) g'(theta_i - theta_j) off-diagonal, rows summing to zero.
linalg::Mat full_jacobian(const Coupling& g, const std::vector<double>& theta);

// Everything above in one report (used by the CLI and the JSON emitter).
StabilityReport analyze(const Coupling& g, const Partition& p,
                        const std::vector<double>& phi);

// Multiset union {tangential} + {transverse exponents with multiplicity},
// the expected spectrum of full_jacobian at the clustered lift.
std::vector<std::complex<double>> expected_full_spectrum(const Coupling& g,
                                                         const Partition& p,
                                                         const std::vector<double>& phi);

}
