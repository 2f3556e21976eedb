#include "clusterosc/coupling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace clusterosc::coupling {

void FourierCoupling::validate() const {
    if (c.empty()) throw std::invalid_argument("coupling: need at least c0");
    if (c.size() != s.size() + 1)
        throw std::invalid_argument("coupling: expect c0..cR and s1..sR (|c| = |s|+1)");
    for (double x : c)
        if (!std::isfinite(x)) throw std::invalid_argument("coupling: non-finite cosine coefficient");
    for (double x : s)
        if (!std::isfinite(x)) throw std::invalid_argument("coupling: non-finite sine coefficient");
}

double FourierCoupling::eval(double phi) const {
    double acc = c[0];
    for (int r = 1; r <= modes(); ++r)
        acc += c[r] * std::cos(r * phi) + s[r - 1] * std::sin(r * phi);
    return acc;
}

double FourierCoupling::deriv(double phi) const {
    double acc = 0.0;
    for (int r = 1; r <= modes(); ++r)
        acc += r * (-c[r] * std::sin(r * phi) + s[r - 1] * std::cos(r * phi));
    return acc;
}

FourierCoupling preset(const std::string& name) {
    if (name == "case0")
        return {{0.0, 0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, -1.0}};
    if (name == "case1")
        return {{0.0, 0.31185, 0.37096, 0.0, 0.99008}, {0.10793, 0.58180, 0.0, -0.14053}};
    if (name == "case2")
        return {{0.0, 0.31185, 0.39, 0.0, 0.99008}, {0.10793, 0.58180, 0.0, -0.14053}};
    throw std::invalid_argument("unknown coupling preset: " + name);
}

void BumpPerturbation::validate() const {
    if (!(epsilon > 0.0 && epsilon < std::numbers::pi))
        throw std::invalid_argument("bump: epsilon must lie in (0, pi)");
    if (!std::isfinite(strength))
        throw std::invalid_argument("bump: non-finite strength");
}

namespace {

// B(u) = exp(1 - 1/(1-u^2)) continued by 0 outside (-1, 1).
double mollifier(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double mollifier_deriv(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return -2.0 * u / (w * w) * mollifier(u);
}

}  // namespace

double BumpPerturbation::eval(double phi) const {
    const double x = wrap_signed(phi);
    if (std::abs(x) >= epsilon) return 0.0;
    return -x * mollifier(x / epsilon);
}

double BumpPerturbation::deriv(double phi) const {
    const double x = wrap_signed(phi);
    if (std::abs(x) >= epsilon) return 0.0;
    const double u = x / epsilon;
    return -mollifier(u) - (x / epsilon) * mollifier_deriv(u);
}

Coupling perturbed_coupling(const FourierCoupling& g, const BumpPerturbation& b) {
    g.validate();
    b.validate();
    // Explicit support test before touching the bump: at |wrap_signed(phi)| >=
    // epsilon the perturbed value is computed as g alone, not as g + 0.
    return Coupling(
        [g, b](double phi) {
            if (std::abs(wrap_signed(phi)) >= b.epsilon) return g.eval(phi);
            return g.eval(phi) + b.strength * b.eval(phi);
        },
        [g, b](double phi) {
            if (std::abs(wrap_signed(phi)) >= b.epsilon) return g.deriv(phi);
            return g.deriv(phi) + b.strength * b.deriv(phi);
        });
}

double default_bump_epsilon(const std::vector<double>& phases) {
    double min_sep = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < phases.size(); ++i)
        for (size_t j = 0; j < phases.size(); ++j)
            if (i != j)
                min_sep = std::min(min_sep, std::abs(wrap_signed(phases[i] - phases[j])));
    if (!std::isfinite(min_sep) || min_sep <= 0.0)
        throw std::invalid_argument("default_bump_epsilon: need distinct phases");
    return 0.5 * min_sep;
}

}
