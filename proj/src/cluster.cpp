#include "clusterosc/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "clusterosc/errors.hpp"
#include "clusterosc/linalg.hpp"

namespace clusterosc::cluster {

int Partition::N() const {
    return std::accumulate(sizes.begin(), sizes.end(), 0);
}

void Partition::validate() const {
    if (sizes.empty()) throw std::invalid_argument("partition: empty");
    for (int m : sizes)
        if (m < 1) throw std::invalid_argument("partition: sizes must be >= 1");
}

std::vector<double> reduced_vector_field(const Coupling& g, const Partition& p,
                                         const std::vector<double>& psi,
                                         double omega) {
    p.validate();
    const int M = p.M();
    if (static_cast<int>(psi.size()) != M)
        throw std::invalid_argument("reduced_vector_field: phase count != M");
    const double N = p.N();
    std::vector<double> out(M);
    for (int k = 0; k < M; ++k) {
        double acc = 0.0;
        for (int l = 0; l < M; ++l) acc += p.sizes[l] * g(psi[k] - psi[l]);
        out[k] = omega + acc / N;
    }
    return out;
}

std::vector<double> existence_residual(const Coupling& g, const Partition& p,
                                       const std::vector<double>& phi) {
    p.validate();
    const int M = p.M();
    if (M < 2) throw std::invalid_argument("existence_residual: need M >= 2");
    if (static_cast<int>(phi.size()) != M)
        throw std::invalid_argument("existence_residual: phase count != M");
    std::vector<double> res(M - 1);
    for (int k = 1; k < M; ++k) {
        double acc = 0.0;
        for (int l = 0; l < M; ++l)
            acc += p.sizes[l] * (g(phi[k] - phi[l]) - g(phi[0] - phi[l]));
        res[k - 1] = acc;
    }
    return res;
}

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Jacobian of the residual with respect to (phi_2..phi_M).
linalg::Mat newton_jacobian(const Coupling& g, const Partition& p,
                            const std::vector<double>& phi) {
    const int M = p.M();
    linalg::Mat J(M - 1, M - 1);
    for (int k = 1; k < M; ++k) {
        for (int j = 1; j < M; ++j) {
            double v = 0.0;
            if (j == k) {
                for (int l = 0; l < M; ++l)
                    if (l != k) v += p.sizes[l] * g.deriv(phi[k] - phi[l]);
            } else {
                v -= p.sizes[j] * g.deriv(phi[k] - phi[j]);
            }
            v += p.sizes[j] * g.deriv(phi[0] - phi[j]);
            J(k - 1, j - 1) = v;
        }
    }
    return J;
}

}  // namespace

ClusterState solve_phases(const Coupling& g, const Partition& p,
                          const std::vector<double>& guess, double omega,
                          const SolveOptions& opts) {
    p.validate();
    const int M = p.M();
    if (M < 2) throw std::invalid_argument("solve_phases: need M >= 2");
    if (static_cast<int>(guess.size()) != M)
        throw std::invalid_argument("solve_phases: guess length != M");
    if (guess[0] != 0.0)
        throw std::invalid_argument("solve_phases: gauge requires guess[0] == 0");

    std::vector<double> phi = guess;
    std::vector<double> res = existence_residual(g, p, phi);
    double rnorm = max_abs(res);

    auto format_residual = [](double r) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", r);
        return std::string(buf);
    };
    auto finish = [&]() {
        ClusterState st;
        st.partition = p;
        st.phases.resize(M);
        for (int k = 0; k < M; ++k) st.phases[k] = coupling::wrap_2pi(phi[k]);
        st.phases[0] = 0.0;
        st.omega = omega;
        st.Omega = reduced_vector_field(g, p, st.phases, omega)[0];
        return st;
    };

    for (int it = 0; it < opts.max_iterations; ++it) {
        if (rnorm < opts.tolerance) return finish();
        std::vector<double> rhs(res.size());
        for (size_t i = 0; i < res.size(); ++i) rhs[i] = -res[i];
        std::vector<double> step;
        try {
            step = linalg::lu_solve(newton_jacobian(g, p, phi), rhs);
        } catch (const NumericalError&) {
            throw NumericalError("solve_phases: singular Newton Jacobian (residual " +
                                 format_residual(rnorm) + ")");
        }
        // Halve the step while it fails to decrease the residual.
        double lambda = 1.0;
        std::vector<double> trial(phi);
        std::vector<double> trial_res;
        double trial_norm = 0.0;
        for (int halvings = 0;; ++halvings) {
            for (int k = 1; k < M; ++k) trial[k] = phi[k] + lambda * step[k - 1];
            trial_res = existence_residual(g, p, trial);
            trial_norm = max_abs(trial_res);
            if (trial_norm < rnorm || halvings >= 8) break;
            lambda *= 0.5;
        }
        phi = trial;
        res = trial_res;
        rnorm = trial_norm;
    }
    if (rnorm < opts.tolerance) return finish();
    throw NumericalError("solve_phases: no convergence after " +
                         std::to_string(opts.max_iterations) +
                         " iterations (residual " + format_residual(rnorm) + ")");
}

bool is_phase_nondegenerate(const std::vector<double>& phi, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("is_phase_nondegenerate: tol must be > 0");
    const int M = static_cast<int>(phi.size());
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;
            for (int k = 0; k < M; ++k)
                for (int l = 0; l < M; ++l) {
                    if (k == l || (i == k && j == l)) continue;
                    if (coupling::circle_distance(phi[i] - phi[j], phi[k] - phi[l]) <= tol)
                        return false;
                }
        }
    return true;
}

std::string to_string(Certificate c) {
    switch (c) {
        case Certificate::PrimeN: return "PrimeN";
        case Certificate::DistinctSizes: return "DistinctSizes";
        case Certificate::PhaseNonDegenerate: return "PhaseNonDegenerate";
        case Certificate::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

Certificate inequivalence_certificate(const Partition& p,
                                      const std::vector<double>& phi, double tol) {
    p.validate();
    const bool has_nontrivial =
        std::any_of(p.sizes.begin(), p.sizes.end(), [](int m) { return m > 1; });
    if (is_prime(p.N()) && has_nontrivial) return Certificate::PrimeN;
    std::vector<int> sorted = p.sizes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end())
        return Certificate::DistinctSizes;
    if (is_phase_nondegenerate(phi, tol)) return Certificate::PhaseNonDegenerate;
    return Certificate::Inconclusive;
}

namespace {

long long factorial(int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

void partitions_rec(int remaining, int max_part, std::vector<int>& cur,
                    std::vector<std::vector<int>>& out) {
    if (remaining == 0) {
        out.push_back(cur);
        return;
    }
    for (int part = std::min(remaining, max_part); part >= 1; --part) {
        cur.push_back(part);
        partitions_rec(remaining - part, part, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<IsotropyClass> enumerate_isotropy(int N) {
    if (N < 1 || N > 12)
        throw std::invalid_argument("enumerate_isotropy: N must be in [1, 12]");
    std::vector<std::vector<int>> parts;
    std::vector<int> cur;
    partitions_rec(N, N, cur, parts);

    std::vector<IsotropyClass> out;
    out.reserve(parts.size());
    for (const auto& sizes : parts) {
        IsotropyClass cls;
        cls.sizes = sizes;  // already descending from the recursion
        cls.fix_dim = static_cast<int>(sizes.size());
        long long denom_orbit = 1;
        for (int m : sizes) denom_orbit *= factorial(m);
        long long denom_mult = 1;
        int run = 1;
        for (size_t i = 1; i <= sizes.size(); ++i) {
            if (i < sizes.size() && sizes[i] == sizes[i - 1]) {
                ++run;
            } else {
                denom_mult *= factorial(run);
                run = 1;
            }
        }
        cls.orbit_size = factorial(N) / denom_orbit;
        cls.num_conjugates = cls.orbit_size / denom_mult;
        out.push_back(std::move(cls));
    }
    std::sort(out.begin(), out.end(), [](const IsotropyClass& a, const IsotropyClass& b) {
        if (a.fix_dim != b.fix_dim) return a.fix_dim < b.fix_dim;
        return a.sizes > b.sizes;  // descending lexicographic within equal M
    });
    return out;
}

long long shift_symmetric_state_count(const std::vector<int>& block_sizes, int m) {
    if (m < 1) throw std::invalid_argument("shift_symmetric_state_count: m must be >= 1");
    int N = 0;
    long long denom = static_cast<long long>(m);
    for (int k : block_sizes) {
        if (k < 1) throw std::invalid_argument("shift_symmetric_state_count: block sizes must be >= 1");
        N += k * m;
        denom *= factorial(k);
    }
    if (N > 20) throw std::invalid_argument("shift_symmetric_state_count: N too large");
    return factorial(N) / denom;
}

}
