#include "clusterosc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "clusterosc/errors.hpp"

namespace clusterosc::stability {

std::string to_string(Classification c) {
    switch (c) {
        case Classification::AllUnstable: return "AllUnstable";
        case Classification::OneStable: return "OneStable";
        case Classification::TwoStable: return "TwoStable";
        case Classification::AllStable: return "AllStable";
        case Classification::Marginal: return "Marginal";
    }
    return "?";
}

linalg::Mat tangential_matrix(const Coupling& g, const Partition& p,
                              const std::vector<double>& phi) {
    p.validate();
    const int M = p.M();
    if (static_cast<int>(phi.size()) != M)
        throw std::invalid_argument("tangential_matrix: phase count != M");
    const double N = p.N();
    linalg::Mat T(M, M);
    for (int k = 0; k < M; ++k) {
        double diag = 0.0;
        for (int l = 0; l < M; ++l) {
            if (l == k) continue;
            const double d = g.deriv(phi[k] - phi[l]);
            diag += p.sizes[l] * d;
            T(k, l) = -p.sizes[l] * d / N;
        }
        T(k, k) = diag / N;
    }
    return T;
}

std::pair<double, double> three_cluster_mu_nu(const Coupling& g, const Partition& p,
                                              const std::vector<double>& phi) {
    p.validate();
    if (p.M() != 3) throw std::invalid_argument("three_cluster_mu_nu: M must be 3");
    if (phi.size() != 3) throw std::invalid_argument("three_cluster_mu_nu: need 3 phases");
    const double N = p.N();
    const double m1 = p.sizes[0], m2 = p.sizes[1], m3 = p.sizes[2];
    auto gd = [&](int a, int b) { return g.deriv(phi[a] - phi[b]); };
    const double g12 = gd(0, 1), g13 = gd(0, 2), g21 = gd(1, 0);
    const double g23 = gd(1, 2), g31 = gd(2, 0), g32 = gd(2, 1);

    const double mu =
        (m2 * g12 + m3 * g13 + m1 * g21 + m3 * g23 + m1 * g31 + m2 * g32) / N;

    // Product form of nu.
    const double nu_prod =
        4.0 / (N * N) *
        (m1 * m1 * g21 * g31 + m2 * m2 * g12 * g32 + m3 * m3 * g13 * g23 +
         m1 * m2 * (g21 * g32 + g12 * g31) + m1 * m3 * (g23 * g31 + g13 * g21) +
         m2 * m3 * (g13 * g32 + g12 * g23));
    // Pairwise-sum form of nu; the two must agree.
    const double a1 = m2 * g12 + m3 * g13;
    const double a2 = m1 * g21 + m3 * g23;
    const double a3 = m1 * g31 + m2 * g32;
    const double nu_sum = 4.0 / (N * N) *
                          (a2 * a3 - m2 * m3 * g32 * g23 + a1 * a3 - m1 * m3 * g31 * g13 +
                           a1 * a2 - m1 * m2 * g21 * g12);
    if (std::abs(nu_prod - nu_sum) > 1e-10 * std::max(1.0, std::abs(nu_prod)))
        throw NumericalError("three_cluster_mu_nu: nu forms disagree");
    return {mu, nu_prod};
}

std::vector<std::complex<double>> tangential_eigenvalues(const Coupling& g,
                                                         const Partition& p,
                                                         const std::vector<double>& phi) {
    const linalg::Mat T = tangential_matrix(g, p, phi);
    if (p.M() != 3) return eigenvalues_small_real_matrix(T);

    const auto [mu, nu] = three_cluster_mu_nu(g, p, phi);
    std::vector<std::complex<double>> ev;
    ev.emplace_back(0.0, 0.0);
    const double disc = nu - mu * mu;
    if (disc >= 0.0) {
        // Complex pair (mu +- i sqrt(nu - mu^2)) / 2.
        const double im = 0.5 * std::sqrt(disc);
        ev.emplace_back(0.5 * mu, im);
        ev.emplace_back(0.5 * mu, -im);
    } else {
        // Negative argument: the nontrivial 2x2 block has the real pair
        // (mu +- sqrt(mu^2 - nu)) / 2.
        const double rt = 0.5 * std::sqrt(-disc);
        ev.emplace_back(0.5 * mu + rt, 0.0);
        ev.emplace_back(0.5 * mu - rt, 0.0);
    }
    // Cross-check the closed form against the matrix spectrum.
    const auto qr = eigenvalues_small_real_matrix(T);
    if (!linalg::spectra_match(ev, qr, 1e-7 * std::max(1.0, linalg::frobenius_norm(T))))
        throw NumericalError("tangential_eigenvalues: closed form disagrees with QR spectrum");
    return ev;
}

std::vector<double> transverse_exponents(const Coupling& g, const Partition& p,
                                         const std::vector<double>& phi) {
    p.validate();
    const int M = p.M();
    if (static_cast<int>(phi.size()) != M)
        throw std::invalid_argument("transverse_exponents: phase count != M");
    const double N = p.N();
    const double g0p = g.deriv(0.0);
    std::vector<double> out(M);
    for (int k = 0; k < M; ++k) {
        double acc = p.sizes[k] * g0p;
        for (int l = 0; l < M; ++l)
            if (l != k) acc += p.sizes[l] * g.deriv(phi[k] - phi[l]);
        out[k] = acc / N;
    }
    return out;
}

TransverseClassification transverse_classification(const Coupling& g, const Partition& p,
                                                   const std::vector<double>& phi) {
    p.validate();
    if (p.M() != 3)
        throw std::invalid_argument("transverse_classification: M must be 3");

    TransverseClassification res;
    std::vector<double> K(3);
    for (int k = 0; k < 3; ++k) {
        double acc = 0.0;
        for (int l = 0; l < 3; ++l)
            if (l != k) acc += p.sizes[l] * g.deriv(phi[k] - phi[l]);
        K[k] = acc / p.sizes[k];
    }
    std::vector<int> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return K[a] < K[b]; });
    for (int slot = 0; slot < 3; ++slot) res.K.push_back(K[order[slot]]);
    res.order = order;

    const auto tang = tangential_eigenvalues(g, p, phi);
    double max_re = -1e300;
    for (const auto& l : tang)
        if (std::abs(l) > 1e-9) max_re = std::max(max_re, l.real());
    res.tangentially_stable = max_re < 0.0;

    const double threshold = -g.deriv(0.0);
    const double band = 1e-9;
    for (double Ks : res.K)
        if (std::abs(threshold - Ks) < band) {
            res.cls = Classification::Marginal;
            return res;
        }
    int below = 0;  // K values below -g'(0) == transversely stable clusters
    for (double Ks : res.K)
        if (Ks < threshold) ++below;
    switch (below) {
        case 0: res.cls = Classification::AllUnstable; break;
        case 1: res.cls = Classification::OneStable; break;
        case 2: res.cls = Classification::TwoStable; break;
        default: res.cls = Classification::AllStable; break;
    }
    return res;
}

BifurcationThresholds bifurcation_thresholds(const FourierCoupling& g, const Partition& p,
                                             const std::vector<double>& phi, double epsilon) {
    p.validate();
    const int M = p.M();
    if (static_cast<int>(phi.size()) != M)
        throw std::invalid_argument("bifurcation_thresholds: phase count != M");
    for (int m : p.sizes)
        if (m < 2)
            throw std::invalid_argument("bifurcation_thresholds: trivial cluster present");
    // The bump support must stay clear of every inter-cluster difference.
    double min_sep = 1e300;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            if (i != j)
                min_sep = std::min(min_sep,
                                   std::abs(coupling::wrap_signed(phi[i] - phi[j])));
    if (!(epsilon > 0.0 && epsilon < min_sep))
        throw std::invalid_argument("bifurcation_thresholds: epsilon too large for this state");

    const double g0p = g.deriv(0.0);
    std::vector<double> K(M);
    for (int k = 0; k < M; ++k) {
        double acc = 0.0;
        for (int l = 0; l < M; ++l)
            if (l != k) acc += p.sizes[l] * g.deriv(phi[k] - phi[l]);
        K[k] = acc / p.sizes[k];
    }
    std::vector<int> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return K[a] < K[b]; });

    BifurcationThresholds out;
    out.epsilon_used = epsilon;
    for (int slot = 0; slot < M; ++slot) out.r_values.push_back(g0p + K[order[slot]]);

    auto exponent_at = [&](int cluster, double r) {
        const coupling::BumpPerturbation bump{epsilon, r};
        const Coupling gr = coupling::perturbed_coupling(g, bump);
        return transverse_exponents(gr, p, phi)[cluster];
    };

    // Bisection oracle: each analytic threshold must reproduce the sign
    // change of its cluster's exponent to 1e-8.
    for (int slot = 0; slot < M; ++slot) {
        const int cluster = order[slot];
        const double r_star = out.r_values[slot];
        double lo = r_star - 0.1, hi = r_star + 0.1;
        double flo = exponent_at(cluster, lo), fhi = exponent_at(cluster, hi);
        if (!(flo > 0.0 && fhi < 0.0))
            throw NumericalError("bifurcation_thresholds: no bracketing sign change");
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            if (exponent_at(cluster, mid) > 0.0) lo = mid;
            else hi = mid;
        }
        if (std::abs(0.5 * (lo + hi) - r_star) > 1e-8)
            throw NumericalError("bifurcation_thresholds: bisection disagrees with analytic value");
    }

    // Spot-check r-invariance of the existence problem and tangential spectrum.
    const auto tang0 = tangential_eigenvalues(g, p, phi);
    std::vector<double> gauge(M);  // state re-expressed with phi_1 = 0
    for (int k = 0; k < M; ++k) gauge[k] = coupling::wrap_2pi(phi[k] - phi[0]);
    gauge[0] = 0.0;
    for (double r : {out.r_values.front() - 0.5, 0.5 * (out.r_values.front() + out.r_values.back()),
                     out.r_values.back() + 0.5}) {
        const coupling::BumpPerturbation bump{epsilon, r};
        const Coupling gr = coupling::perturbed_coupling(g, bump);
        const auto st = cluster::solve_phases(gr, p, gauge);
        for (int k = 0; k < M; ++k)
            if (std::abs(coupling::wrap_signed(st.phases[k] - gauge[k])) > 1e-10)
                throw NumericalError("bifurcation_thresholds: solved phases moved under g_r");
        const auto tang_r = tangential_eigenvalues(gr, p, st.phases);
        if (!linalg::spectra_match(tang0, tang_r, 1e-10))
            throw NumericalError("bifurcation_thresholds: tangential spectrum moved under g_r");
    }
    return out;
}

linalg::Mat full_jacobian(const Coupling& g, const std::vector<double>& theta) {
    const int N = static_cast<int>(theta.size());
    if (N < 1) throw std::invalid_argument("full_jacobian: empty state");
    linalg::Mat J(N, N);
    for (int i = 0; i < N; ++i) {
        double diag = 0.0;
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            const double d = g.deriv(theta[i] - theta[j]);
            J(i, j) = -d / N;
            diag += d;
        }
        J(i, i) = diag / N;
    }
    return J;
}

std::vector<std::complex<double>> expected_full_spectrum(const Coupling& g,
                                                         const Partition& p,
                                                         const std::vector<double>& phi) {
    std::vector<std::complex<double>> out = tangential_eigenvalues(g, p, phi);
    const auto tr = transverse_exponents(g, p, phi);
    for (int k = 0; k < p.M(); ++k)
        for (int rep = 0; rep < p.sizes[k] - 1; ++rep) out.emplace_back(tr[k], 0.0);
    return out;
}

StabilityReport analyze(const Coupling& g, const Partition& p,
                        const std::vector<double>& phi) {
    StabilityReport rep;
    rep.tangential = tangential_eigenvalues(g, p, phi);
    const auto tr = transverse_exponents(g, p, phi);
    for (int k = 0; k < p.M(); ++k) {
        TransverseEntry e;
        e.multiplicity = p.sizes[k] - 1;
        if (e.multiplicity > 0) e.exponent = tr[k];
        rep.transverse.push_back(e);
    }
    double max_re = -1e300;
    for (const auto& l : rep.tangential)
        if (std::abs(l) > 1e-9) max_re = std::max(max_re, l.real());
    rep.tangentially_stable = p.M() == 1 || max_re < 0.0;
    if (p.M() == 3) {
        const auto [mu, nu] = three_cluster_mu_nu(g, p, phi);
        rep.mu = mu;
        rep.nu = nu;
        const auto tc = transverse_classification(g, p, phi);
        rep.K = tc.K;
        rep.K_order = tc.order;
        rep.classification = tc.cls;
    }
    return rep;
}

}
