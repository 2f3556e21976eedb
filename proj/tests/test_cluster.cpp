#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "clusterosc/cluster.hpp"
#include "clusterosc/errors.hpp"

using namespace clusterosc;
using namespace clusterosc::cluster;
using coupling::FourierCoupling;
using coupling::preset;

namespace {
constexpr double pi = std::numbers::pi;

// Reference values for the two heteroclinic example couplings, frozen from
// high-precision solves of the existence system.
constexpr double kCase1Alpha = 1.7011159853857827;
constexpr double kCase1Beta = 4.7588699108920878;
constexpr double kCase1Omega = 1.0171192792153965;
constexpr double kCase2Alpha = 1.7086596670172429;
constexpr double kCase2Beta = 4.7762400135260554;
constexpr double kCase2Omega = 1.0168596043459612;

// Exhaustive set-partition enumeration through restricted growth strings;
// tallies the number of set partitions per block-size multiset. Feasible for
// N <= 9 (Bell(9) = 21147).
std::map<std::vector<int>, long long> brute_force_conjugates(int N) {
    std::map<std::vector<int>, long long> tally;
    std::vector<int> a(N, 0);
    while (true) {
        int blocks = *std::max_element(a.begin(), a.end()) + 1;
        std::vector<int> sizes(blocks, 0);
        for (int x : a) ++sizes[x];
        std::sort(sizes.begin(), sizes.end(), std::greater<int>());
        ++tally[sizes];

        // next restricted growth string
        int i = N - 1;
        for (; i > 0; --i) {
            int prefix_max = *std::max_element(a.begin(), a.begin() + i);
            if (a[i] <= prefix_max) {
                ++a[i];
                std::fill(a.begin() + i + 1, a.end(), 0);
                break;
            }
            a[i] = 0;
        }
        if (i == 0) break;
    }
    return tally;
}

constexpr long long kBell[] = {1,      1,      2,      5,       15,      52,    203,
                               877,    4140,   21147,  115975,  678570,  4213597};
}  // namespace

TEST_CASE("Partition basics") {
    Partition p{{2, 2, 2}};
    CHECK(p.M() == 3);
    CHECK(p.N() == 6);
    CHECK_NOTHROW(p.validate());
    CHECK_THROWS_AS(Partition{}.validate(), std::invalid_argument);
    CHECK_THROWS_AS((Partition{{2, 0, 1}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((Partition{{-1}}.validate()), std::invalid_argument);
}

TEST_CASE("reduced vector field at the splay-like case0 state") {
    Partition p{{2, 2, 2}};
    std::vector<double> psi{0.0, pi / 2.0, pi};
    auto F = reduced_vector_field(preset("case0"), p, psi, 0.3);
    REQUIRE(F.size() == 3);
    for (double f : F) CHECK(f == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("reduced vector field includes the self term") {
    // one cluster holding everything: F = omega + g(0)
    Partition p{{5}};
    FourierCoupling g{{0.7, 0.2}, {0.4}};
    auto F = reduced_vector_field(g, p, {0.0}, 1.0);
    REQUIRE(F.size() == 1);
    CHECK(F[0] == doctest::Approx(1.0 + g.eval(0.0)).epsilon(1e-15));
}

TEST_CASE("existence residual vanishes at the case0 state") {
    Partition p{{2, 2, 2}};
    auto res = existence_residual(preset("case0"), p, {0.0, pi / 2.0, pi});
    REQUIRE(res.size() == 2);
    for (double r : res) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("solve_phases reproduces the case1 state") {
    Partition p{{2, 2, 2}};
    auto st = solve_phases(preset("case1"), p, {0.0, 1.70, 4.76});
    REQUIRE(st.phases.size() == 3);
    CHECK(st.phases[0] == 0.0);
    CHECK(st.phases[1] == doctest::Approx(kCase1Alpha).epsilon(1e-12));
    CHECK(st.phases[2] == doctest::Approx(kCase1Beta).epsilon(1e-12));
    CHECK(st.Omega == doctest::Approx(kCase1Omega).epsilon(1e-12));
    CHECK(st.omega == 0.0);
    auto res = existence_residual(preset("case1"), p, st.phases);
    for (double r : res) CHECK(std::abs(r) < 1e-12);
    // rigid rotation: all reduced field components equal Omega
    auto F = reduced_vector_field(preset("case1"), p, st.phases, 0.0);
    for (double f : F) CHECK(f == doctest::Approx(st.Omega).epsilon(1e-12));
}

TEST_CASE("solve_phases reproduces the case2 state") {
    Partition p{{2, 2, 2}};
    auto st = solve_phases(preset("case2"), p, {0.0, 1.70, 4.76});
    CHECK(st.phases[1] == doctest::Approx(kCase2Alpha).epsilon(1e-12));
    CHECK(st.phases[2] == doctest::Approx(kCase2Beta).epsilon(1e-12));
    CHECK(st.Omega == doctest::Approx(kCase2Omega).epsilon(1e-12));
}

TEST_CASE("solve_phases finds the case0 state from a loose guess") {
    Partition p{{2, 2, 2}};
    auto st = solve_phases(preset("case0"), p, {0.0, 1.5, 3.1});
    CHECK(st.phases[1] == doctest::Approx(pi / 2.0).epsilon(1e-10));
    CHECK(st.phases[2] == doctest::Approx(pi).epsilon(1e-10));
    CHECK(st.Omega == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("intrinsic frequency shifts Omega but not the phases") {
    Partition p{{2, 2, 2}};
    auto base = solve_phases(preset("case1"), p, {0.0, 1.70, 4.76}, 0.0);
    auto shifted = solve_phases(preset("case1"), p, {0.0, 1.70, 4.76}, 0.5);
    CHECK(shifted.phases[1] == doctest::Approx(base.phases[1]).epsilon(1e-14));
    CHECK(shifted.phases[2] == doctest::Approx(base.phases[2]).epsilon(1e-14));
    CHECK(shifted.Omega == doctest::Approx(base.Omega + 0.5).epsilon(1e-12));
    CHECK(shifted.omega == 0.5);
}

TEST_CASE("solve_phases enforces the gauge and input shapes") {
    Partition p{{2, 2, 2}};
    CHECK_THROWS_AS(solve_phases(preset("case1"), p, {0.1, 1.7, 4.8}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_phases(preset("case1"), p, {0.0, 1.7}), std::invalid_argument);
}

TEST_CASE("solve_phases reports non-convergence") {
    // enormous coefficients push the attainable residual floor far above the
    // absolute tolerance, so Newton cannot ever satisfy it
    FourierCoupling g{{0.0, 0.0, 0.0, 0.0, 1e8}, {0.0, 0.0, 0.0, -1e8}};
    Partition p{{2, 2, 2}};
    CHECK_THROWS_AS(solve_phases(g, p, {0.0, 1.5, 3.0}), NumericalError);
}

TEST_CASE("symmetric guesses can land on a phase-degenerate root") {
    Partition p{{2, 2, 2}};
    auto st = solve_phases(preset("case1"), p, {0.0, 2.2, 2.2});
    auto res = existence_residual(preset("case1"), p, st.phases);
    for (double r : res) CHECK(std::abs(r) < 1e-12);
    CHECK(std::abs(st.phases[1] - st.phases[2]) < 1e-9);
    CHECK_FALSE(is_phase_nondegenerate(st.phases, 1e-6));
}

TEST_CASE("single-cluster partitions are rejected by the solver") {
    // nothing to solve for: the reduced field still works, the Newton system
    // does not exist
    Partition p{{4}};
    FourierCoupling g{{0.3, -0.2}, {0.5}};
    CHECK_THROWS_AS(solve_phases(g, p, {0.0}, 0.1), std::invalid_argument);
    auto F = reduced_vector_field(g, p, {0.0}, 0.1);
    CHECK(F[0] == doctest::Approx(0.1 + g.eval(0.0)).epsilon(1e-15));
}

TEST_CASE("phase non-degeneracy") {
    // case0 phases repeat differences (beta = 2 alpha), case1 phases do not
    CHECK_FALSE(is_phase_nondegenerate({0.0, pi / 2.0, pi}, 1e-6));
    CHECK(is_phase_nondegenerate({0.0, kCase1Alpha, kCase1Beta}, 1e-3));
    CHECK(is_phase_nondegenerate({0.0, 1.0}, 1e-6));
    // antipodal pair: the two ordered differences coincide on the circle
    CHECK_FALSE(is_phase_nondegenerate({0.0, pi}, 1e-6));
}

TEST_CASE("inequivalence certificates in precedence order") {
    CHECK(inequivalence_certificate(Partition{{5, 2}}, {0.0, 1.0}, 1e-6) ==
          Certificate::PrimeN);
    CHECK(inequivalence_certificate(Partition{{3, 2, 1}}, {0.0, 1.0, 2.0}, 1e-6) ==
          Certificate::DistinctSizes);
    CHECK(inequivalence_certificate(Partition{{2, 2, 2}},
                                    {0.0, kCase1Alpha, kCase1Beta}, 1e-6) ==
          Certificate::PhaseNonDegenerate);
    CHECK(inequivalence_certificate(Partition{{2, 2, 2}}, {0.0, pi / 2.0, pi}, 1e-6) ==
          Certificate::Inconclusive);
    // prime N alone is not enough: all-trivial clusters do not qualify
    CHECK(inequivalence_certificate(Partition{{1, 1, 1, 1, 1}},
                                    {0.0, pi / 2.0, pi, 3.0 * pi / 2.0, 2.0}, 1e-6) !=
          Certificate::PrimeN);
    CHECK(to_string(Certificate::PrimeN) == "PrimeN");
    CHECK(to_string(Certificate::Inconclusive) == "Inconclusive");
}

TEST_CASE("isotropy classes for N = 6 match the reference table") {
    auto classes = enumerate_isotropy(6);
    REQUIRE(classes.size() == 11);

    auto find = [&](std::vector<int> sizes) -> const IsotropyClass& {
        for (const auto& c : classes)
            if (c.sizes == sizes) return c;
        REQUIRE(false);
        return classes[0];
    };

    struct Row {
        std::vector<int> sizes;
        int fix_dim;
        long long conj, orbit;
    };
    const std::vector<Row> expected{
        {{6}, 1, 1, 1},           {{5, 1}, 2, 6, 6},
        {{4, 2}, 2, 15, 15},      {{3, 3}, 2, 10, 20},
        {{4, 1, 1}, 3, 15, 30},   {{3, 2, 1}, 3, 60, 60},
        {{2, 2, 2}, 3, 15, 90},   {{3, 1, 1, 1}, 4, 20, 120},
        {{2, 2, 1, 1}, 4, 45, 180}, {{2, 1, 1, 1, 1}, 5, 15, 360},
        {{1, 1, 1, 1, 1, 1}, 6, 1, 720}};
    for (const auto& row : expected) {
        const auto& c = find(row.sizes);
        CHECK(c.fix_dim == row.fix_dim);
        CHECK(c.num_conjugates == row.conj);
        CHECK(c.orbit_size == row.orbit);
    }

    // listing is ordered by fixed-space dimension
    for (size_t i = 1; i < classes.size(); ++i)
        CHECK(classes[i - 1].fix_dim <= classes[i].fix_dim);
}

TEST_CASE("conjugate counts agree with exhaustive set-partition enumeration") {
    for (int N = 2; N <= 9; ++N) {
        auto brute = brute_force_conjugates(N);
        auto classes = enumerate_isotropy(N);
        REQUIRE(classes.size() == brute.size());
        for (const auto& c : classes) {
            auto it = brute.find(c.sizes);
            REQUIRE(it != brute.end());
            CHECK(c.num_conjugates == it->second);
        }
    }
}

TEST_CASE("conjugate counts sum to the Bell numbers") {
    for (int N = 1; N <= 12; ++N) {
        long long total = 0;
        for (const auto& c : enumerate_isotropy(N)) total += c.num_conjugates;
        CHECK(total == kBell[N]);
    }
}

TEST_CASE("orbit sizes are multinomials") {
    for (const auto& c : enumerate_isotropy(8)) {
        long long denom = 1;
        for (int m : c.sizes)
            for (int k = 2; k <= m; ++k) denom *= k;
        long long fact = 1;
        for (int k = 2; k <= 8; ++k) fact *= k;
        CHECK(c.orbit_size == fact / denom);
    }
}

TEST_CASE("enumerate_isotropy range checks") {
    CHECK_THROWS_AS(enumerate_isotropy(0), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_isotropy(13), std::invalid_argument);
    CHECK(enumerate_isotropy(1).size() == 1);
    CHECK(enumerate_isotropy(2).size() == 2);
}

TEST_CASE("shift_symmetric_state_count formula") {
    CHECK(shift_symmetric_state_count({2, 2, 3}, 1) == 210);  // N = 7
    CHECK(shift_symmetric_state_count({2, 2, 2}, 1) == 90);   // matches the (2,2,2) orbit
    CHECK(shift_symmetric_state_count({3, 3}, 1) == 20);
    CHECK(shift_symmetric_state_count({3}, 2) == 60);         // N = 6, cyclic factor m = 2
    CHECK(shift_symmetric_state_count({1}, 6) == 120);        // N = 6, full rotation block
    CHECK_THROWS_AS(shift_symmetric_state_count({2, 2}, 0), std::invalid_argument);
    CHECK_THROWS_AS(shift_symmetric_state_count({0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(shift_symmetric_state_count({21}, 1), std::invalid_argument);
}
