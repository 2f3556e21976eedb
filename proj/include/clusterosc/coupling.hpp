#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace clusterosc::coupling {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Angles are plain doubles in radians; the canonical representative lives in
// [0, 2pi). wrap_signed gives the representative in (-pi, pi], which is what
// the bump perturbation and all distance computations work with.
using Phase = double;

inline double wrap_2pi(double x) {
    double y = std::fmod(x, two_pi);
    if (y < 0.0) y += two_pi;
    return y;
}

inline double wrap_signed(double x) {
    double y = std::fmod(x, two_pi);
    if (y <= -std::numbers::pi) y += two_pi;
    else if (y > std::numbers::pi) y -= two_pi;
    return y;
}

// Circle metric d(a,b) = 1 - cos(a-b), values in [0, 2].
inline double circle_distance(double a, double b) {
    return 1.0 - std::cos(a - b);
}

// Truncated Fourier series g(phi) = sum_{r=0}^{R} c_r cos(r phi) + s_r sin(r phi).
struct FourierCoupling {
    std::vector<double> c;  // c0..cR
    std::vector<double> s;  // s1..sR

    int modes() const { return static_cast<int>(s.size()); }
    void validate() const;  // throws std::invalid_argument

    double eval(double phi) const;
    double deriv(double phi) const;
};

// Named Fourier couplings: "case0" = -sin(4 phi), "case1" and "case2" are the
// two heteroclinic examples. Throws std::invalid_argument for unknown names.
FourierCoupling preset(const std::string& name);

// Smooth compactly supported perturbation h(phi) = -x * B(x/eps) with
// x = wrap_signed(phi) and B(u) = exp(1 - 1/(1-u^2)) on |u| < 1, else 0.
// By construction h(0) = 0 and h'(0) = -1.
struct BumpPerturbation {
    double epsilon;   // support half-width, must lie in (0, pi)
    double strength;  // the sweep parameter r

    void validate() const;
    double eval(double phi) const;
    double deriv(double phi) const;
};

// Type-erased coupling evaluator (value and derivative). Every analysis
// routine accepts this so that both plain Fourier couplings and bump-perturbed
// ones flow through the same code path.
struct Coupling {
    std::function<double(double)> g;
    std::function<double(double)> dg;

    Coupling() = default;
    Coupling(std::function<double(double)> g_, std::function<double(double)> dg_)
        : g(std::move(g_)), dg(std::move(dg_)) {}
    Coupling(const FourierCoupling& fc)  // intentionally implicit
        : g([fc](double phi) { return fc.eval(phi); }),
          dg([fc](double phi) { return fc.deriv(phi); }) {}

    double operator()(double phi) const { return g(phi); }
    double deriv(double phi) const { return dg(phi); }
};

// g_r = g + r*h. Outside the bump support the returned evaluator calls g
// alone, so values there match the unperturbed coupling bit for bit.
Coupling perturbed_coupling(const FourierCoupling& g, const BumpPerturbation& b);

// Default support half-width for a given cluster state: half the minimum
// wrapped absolute pairwise phase difference, which keeps the support of h
// clear of every inter-cluster difference with margin.
double default_bump_epsilon(const std::vector<double>& phases);

}
