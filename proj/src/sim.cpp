#include "clusterosc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "clusterosc/errors.hpp"
#include "clusterosc/stability.hpp"

namespace clusterosc::sim {

namespace {

using coupling::two_pi;
using coupling::wrap_2pi;
using coupling::wrap_signed;

// Per-oscillator mode tables cos(r θ_i), sin(r θ_i), r = 0..R, built with the
// angle-addition recurrence (one sin/cos pair per oscillator per fill).
struct TrigTables {
    int n = 0;
    int modes = 0;
    std::vector<double> cs, sn;  // (modes+1) rows of n entries each

    double C(int r, int i) const { return cs[r * n + i]; }
    double S(int r, int i) const { return sn[r * n + i]; }

    void fill(const std::vector<double>& theta, int R) {
        n = static_cast<int>(theta.size());
        modes = R;
        cs.resize(static_cast<size_t>(R + 1) * n);
        sn.resize(static_cast<size_t>(R + 1) * n);
        for (int i = 0; i < n; ++i) {
            cs[i] = 1.0;
            sn[i] = 0.0;
            const double c1 = std::cos(theta[i]);
            const double s1 = std::sin(theta[i]);
            for (int r = 1; r <= R; ++r) {
                cs[r * n + i] = cs[(r - 1) * n + i] * c1 - sn[(r - 1) * n + i] * s1;
                sn[r * n + i] = sn[(r - 1) * n + i] * c1 + cs[(r - 1) * n + i] * s1;
            }
        }
    }
};

// Right side of the full system.  Each oscillator accumulates its pair terms
// in the same index order over identical table entries, so oscillators with
// bitwise-equal phases receive bitwise-equal drift: exact clusters are
// invariant under the deterministic stepper.
void drift(const coupling::FourierCoupling& g, const std::vector<double>& theta, double omega,
           TrigTables& tab, std::vector<double>& out) {
    const int n = static_cast<int>(theta.size());
    const int R = g.modes();
    tab.fill(theta, R);
    const double c0 = g.c[0];
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            double pair = c0;
            for (int r = 1; r <= R; ++r) {
                const double cij = tab.C(r, i) * tab.C(r, j) + tab.S(r, i) * tab.S(r, j);
                const double sij = tab.S(r, i) * tab.C(r, j) - tab.C(r, i) * tab.S(r, j);
                pair += g.c[r] * cij + g.s[r - 1] * sij;
            }
            acc += pair;
        }
        out[i] = omega + acc / n;
    }
}

struct Workspace {
    TrigTables tab;
    std::vector<double> k1, k2, k3, k4, tmp;

    explicit Workspace(int n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

void rk4_step(const coupling::FourierCoupling& g, double omega, double dt,
              std::vector<double>& theta, Workspace& w) {
    const int n = static_cast<int>(theta.size());
    drift(g, theta, omega, w.tab, w.k1);
    for (int i = 0; i < n; ++i) w.tmp[i] = theta[i] + 0.5 * dt * w.k1[i];
    drift(g, w.tmp, omega, w.tab, w.k2);
    for (int i = 0; i < n; ++i) w.tmp[i] = theta[i] + 0.5 * dt * w.k2[i];
    drift(g, w.tmp, omega, w.tab, w.k3);
    for (int i = 0; i < n; ++i) w.tmp[i] = theta[i] + dt * w.k3[i];
    drift(g, w.tmp, omega, w.tab, w.k4);
    for (int i = 0; i < n; ++i)
        theta[i] = wrap_2pi(theta[i] +
                            dt / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]));
}

void em_step(const coupling::FourierCoupling& g, double omega, double dt, double sigma,
             std::vector<double>& theta, Workspace& w, std::mt19937_64& rng,
             std::normal_distribution<double>& normal) {
    const int n = static_cast<int>(theta.size());
    drift(g, theta, omega, w.tab, w.k1);
    for (int i = 0; i < n; ++i)
        theta[i] = wrap_2pi(theta[i] + dt * w.k1[i] + sigma * normal(rng));
}

void check_finite(const std::vector<double>& theta, double t) {
    for (double x : theta)
        if (!std::isfinite(x)) {
            std::ostringstream oss;
            oss << "integrate: non-finite state at t = " << t;
            throw NumericalError(oss.str());
        }
}

int freed_pair(Subspace s) {
    switch (s) {
        case Subspace::I1: return 0;  // oscillators (1,2)
        case Subspace::I3: return 1;  // oscillators (3,4)
        case Subspace::I2: return 2;  // oscillators (5,6)
    }
    throw std::invalid_argument("unknown subspace");
}

}  // namespace

double SimConfig::resolved_dt() const {
    if (dt > 0.0) return dt;
    return noise_amplitude > 0.0 ? 1e-3 : 1e-2;
}

void SimConfig::validate() const {
    g.validate();
    if (n < 2) throw std::invalid_argument("sim: need at least two oscillators");
    if (dt < 0.0 || !std::isfinite(dt)) throw std::invalid_argument("sim: bad dt");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("sim: bad t_end");
    if (resolved_dt() > t_end) throw std::invalid_argument("sim: t_end shorter than one step");
    if (noise_amplitude < 0.0 || !std::isfinite(noise_amplitude))
        throw std::invalid_argument("sim: bad noise amplitude");
    if (record_stride < 1) throw std::invalid_argument("sim: record_stride must be >= 1");
    if (!initial.empty() && static_cast<int>(initial.size()) != n)
        throw std::invalid_argument("sim: initial state size does not match n");
    for (double x : initial)
        if (!std::isfinite(x)) throw std::invalid_argument("sim: non-finite initial phase");
    if (!std::isfinite(omega)) throw std::invalid_argument("sim: bad omega");
}

Trajectory integrate(const SimConfig& config) {
    config.validate();
    SimConfig cfg = config;
    const double dt = cfg.resolved_dt();
    cfg.dt = dt;

    std::mt19937_64 rng(cfg.rng_seed);
    std::vector<double> theta;
    if (cfg.initial.empty()) {
        std::uniform_real_distribution<double> uniform(0.0, two_pi);
        theta.resize(cfg.n);
        for (double& x : theta) x = uniform(rng);
    } else {
        theta = cfg.initial;
        for (double& x : theta) x = wrap_2pi(x);
    }
    cfg.initial = theta;

    const long long nsteps = std::llround(cfg.t_end / dt);
    Trajectory traj;
    traj.config = cfg;
    traj.times.reserve(static_cast<size_t>(nsteps / cfg.record_stride) + 2);
    traj.states.reserve(traj.times.capacity());
    traj.times.push_back(0.0);
    traj.states.push_back(theta);

    Workspace w(cfg.n);
    const bool noisy = cfg.noise_amplitude > 0.0;
    const double sigma = cfg.noise_amplitude * std::sqrt(dt);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (long long step = 1; step <= nsteps; ++step) {
        if (noisy)
            em_step(cfg.g, cfg.omega, dt, sigma, theta, w, rng, normal);
        else
            rk4_step(cfg.g, cfg.omega, dt, theta, w);
        const double t = static_cast<double>(step) * dt;
        check_finite(theta, t);
        if (step % cfg.record_stride == 0 || step == nsteps) {
            traj.times.push_back(t);
            traj.states.push_back(theta);
        }
    }
    return traj;
}

std::vector<std::vector<double>> observables(const Trajectory& traj, int ref) {
    if (traj.states.empty()) throw std::invalid_argument("observables: empty trajectory");
    const int n = static_cast<int>(traj.states.front().size());
    if (ref < 0 || ref >= n) throw std::invalid_argument("observables: reference index out of range");
    std::vector<std::vector<double>> out(traj.states.size(), std::vector<double>(n));
    for (size_t k = 0; k < traj.states.size(); ++k) {
        const auto& th = traj.states[k];
        for (int i = 0; i < n; ++i) out[k][i] = std::sin(th[i] - th[ref]);
    }
    return out;
}

ClusterAssignment detect_clustering(const std::vector<double>& theta, double tol) {
    if (theta.empty()) throw std::invalid_argument("detect_clustering: empty state");
    if (!(tol > 0.0)) throw std::invalid_argument("detect_clustering: tol must be positive");
    const int n = static_cast<int>(theta.size());

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coupling::circle_distance(theta[i], theta[j]) < tol)
                parent[find(i)] = find(j);

    std::vector<std::vector<int>> groups;
    std::vector<int> group_of(n, -1);
    for (int i = 0; i < n; ++i) {
        const int r = find(i);
        if (group_of[r] < 0) {
            group_of[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[group_of[r]].push_back(i);  // members ascend within each group
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });

    ClusterAssignment out;
    out.labels.assign(n, -1);
    for (size_t c = 0; c < groups.size(); ++c) {
        out.partition.sizes.push_back(static_cast<int>(groups[c].size()));
        for (int i : groups[c]) out.labels[i] = static_cast<int>(c);
    }
    return out;
}

SaddleSet saddle_set(double alpha, double beta) {
    if (!(alpha > 0.0 && beta > alpha && beta < two_pi))
        throw std::invalid_argument("saddle_set: need 0 < alpha < beta < 2*pi");
    if (std::abs(beta - 2.0 * alpha) < 1e-12)
        throw std::invalid_argument("saddle_set: degenerate gaps (beta = 2*alpha)");

    auto point = [](double a, double b, double c) {
        return std::vector<double>{wrap_2pi(a), wrap_2pi(a), wrap_2pi(b),
                                   wrap_2pi(b), wrap_2pi(c), wrap_2pi(c)};
    };
    SaddleSet s;
    s.alpha = alpha;
    s.beta = beta;
    s.points = {
        point(0.0, alpha, beta),
        point(0.0, beta - alpha, two_pi - alpha),
        point(0.0, two_pi - beta, two_pi + alpha - beta),
        point(0.0, two_pi - alpha, beta - alpha),
        point(0.0, two_pi + alpha - beta, two_pi - beta),
        point(0.0, beta, alpha),
    };
    return s;
}

Alignment rotation_min_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("rotation_min_distance: size mismatch");
    const int n = static_cast<int>(a.size());
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = wrap_signed(a[i] - b[i]);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });

    // Candidate optima: lift the j smallest residuals by 2π and centre at the
    // arithmetic mean of the lifted branch, j = 0..n.
    Alignment best;
    best.distance = std::numeric_limits<double>::infinity();
    std::vector<double> cand = d;
    for (int j = 0; j <= n; ++j) {
        if (j > 0) cand[order[j - 1]] += two_pi;
        const double c = std::accumulate(cand.begin(), cand.end(), 0.0) / n;
        double ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = wrap_signed(cand[i] - c);
            ss += r * r;
        }
        const double dist = std::sqrt(ss);
        if (dist < best.distance) {
            best.distance = dist;
            best.rotation = wrap_2pi(c);
        }
    }
    return best;
}

Alignment saddle_distance(const std::vector<double>& theta, const std::vector<double>& point) {
    if (theta.size() != 6 || point.size() != 6)
        throw std::invalid_argument("saddle_distance: expects six oscillators");
    Alignment best;
    best.distance = std::numeric_limits<double>::infinity();
    std::vector<double> swapped = theta;
    for (int mask = 0; mask < 8; ++mask) {
        for (int p = 0; p < 3; ++p) {
            const bool flip = (mask >> p) & 1;
            swapped[2 * p] = theta[flip ? 2 * p + 1 : 2 * p];
            swapped[2 * p + 1] = theta[flip ? 2 * p : 2 * p + 1];
        }
        const Alignment al = rotation_min_distance(swapped, point);
        if (al.distance < best.distance) best = al;
    }
    return best;
}

std::vector<ItineraryEvent> itinerary(const Trajectory& traj, const SaddleSet& saddles,
                                      double enter_tol, double min_dwell) {
    if (!(enter_tol > 0.0) || min_dwell < 0.0)
        throw std::invalid_argument("itinerary: bad tolerances");
    if (saddles.points.size() != 6) throw std::invalid_argument("itinerary: need six saddles");
    if (traj.states.empty() || traj.states.front().size() != 6)
        throw std::invalid_argument("itinerary: trajectory must have six oscillators");

    std::vector<ItineraryEvent> raw;
    int cur = -1;
    ItineraryEvent ev;
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const auto& th = traj.states[k];
        const double t = traj.times[k];
        std::array<Alignment, 6> al;
        for (int s = 0; s < 6; ++s) al[s] = saddle_distance(th, saddles.points[s]);

        if (cur >= 0) {
            if (al[cur].distance < ev.min_distance) {
                ev.min_distance = al[cur].distance;
                ev.alignment = al[cur].rotation;
            }
            if (al[cur].distance > 2.0 * enter_tol) {
                ev.t_exit = t;
                raw.push_back(ev);
                cur = -1;
            }
        }
        if (cur < 0) {
            int s_min = 0;
            for (int s = 1; s < 6; ++s)
                if (al[s].distance < al[s_min].distance) s_min = s;
            if (al[s_min].distance < enter_tol) {
                cur = s_min;
                ev = ItineraryEvent{s_min + 1, t, t, al[s_min].rotation, al[s_min].distance};
            }
        }
    }
    if (cur >= 0) {
        ev.t_exit = traj.times.back();
        raw.push_back(ev);
    }

    std::vector<ItineraryEvent> out;
    for (const auto& e : raw) {
        if (e.t_exit - e.t_enter < min_dwell) continue;
        if (!out.empty() && out.back().saddle_index == e.saddle_index) {
            out.back().t_exit = e.t_exit;
            if (e.min_distance < out.back().min_distance) {
                out.back().min_distance = e.min_distance;
                out.back().alignment = e.alignment;
            }
        } else {
            out.push_back(e);
        }
    }
    return out;
}

std::string to_string(Subspace s) {
    switch (s) {
        case Subspace::I1: return "I1";
        case Subspace::I2: return "I2";
        case Subspace::I3: return "I3";
    }
    return "?";
}

ConnectionResult connection_check(const coupling::FourierCoupling& g, const SaddleSet& saddles,
                                  int source, Subspace subspace, int target, double eps_kick,
                                  double t_max, double dt) {
    g.validate();
    if (saddles.points.size() != 6) throw std::invalid_argument("connection_check: need six saddles");
    if (source < 1 || source > 6 || target < 1 || target > 6)
        throw std::invalid_argument("connection_check: saddle indices are 1..6");
    if (eps_kick < 0.0 || !(t_max > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("connection_check: bad parameters");

    const auto& P = saddles.points[source - 1];
    const cluster::Partition p{{2, 2, 2}};
    const std::vector<double> psi{P[0], P[2], P[4]};
    const auto lambda = stability::transverse_exponents(g, p, psi);
    int positives = 0;
    for (double l : lambda) positives += l > 0.0 ? 1 : 0;
    if (positives != 1)
        throw std::invalid_argument(
            "connection_check: source must carry exactly one positive transverse exponent");
    const int freed = freed_pair(subspace);
    if (!(lambda[freed] > 0.0))
        throw std::invalid_argument(
            "connection_check: unstable transverse direction is not contained in " +
            to_string(subspace));

    std::vector<double> theta = P;
    const double kick = eps_kick / std::sqrt(2.0);
    theta[2 * freed] = wrap_2pi(theta[2 * freed] + kick);
    theta[2 * freed + 1] = wrap_2pi(theta[2 * freed + 1] - kick);

    std::array<int, 2> glued{};
    for (int q = 0, w = 0; q < 3; ++q)
        if (q != freed) glued[w++] = q;

    Workspace work(6);
    const long long nsteps = std::llround(t_max / dt);
    for (long long step = 1; step <= nsteps; ++step) {
        rk4_step(g, 0.0, dt, theta, work);
        check_finite(theta, static_cast<double>(step) * dt);
        for (int q : glued) {
            const double gap = wrap_signed(theta[2 * q] - theta[2 * q + 1]);
            if (std::abs(gap) > 1e-12)
                throw NumericalError("connection_check: drift out of the invariant subspace");
            theta[2 * q + 1] = theta[2 * q];
        }
    }

    ConnectionResult res;
    res.final_distance = saddle_distance(theta, saddles.points[target - 1]).distance;
    res.reached = res.final_distance < 1e-6;
    res.nearest_index = 0;
    res.nearest_distance = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 6; ++s) {
        const double d = saddle_distance(theta, saddles.points[s]).distance;
        if (d < res.nearest_distance) {
            res.nearest_distance = d;
            res.nearest_index = s + 1;
        }
    }
    return res;
}

std::array<int, 6> pair_relabel_permutation(const std::vector<double>& theta, double tol) {
    if (theta.size() != 6)
        throw std::invalid_argument("pair_relabel_permutation: expects six oscillators");
    const ClusterAssignment cl = detect_clustering(theta, tol);
    if (cl.partition.sizes != std::vector<int>{2, 2, 2})
        throw std::invalid_argument(
            "pair_relabel_permutation: sample is not a (2,2,2) clustering at this tolerance");
    std::array<std::vector<int>, 3> members;
    for (int i = 0; i < 6; ++i) members[cl.labels[i]].push_back(i);
    std::array<int, 6> perm{};
    for (int c = 0; c < 3; ++c) {
        perm[2 * c] = members[c][0];
        perm[2 * c + 1] = members[c][1];
    }
    return perm;
}

long best_paired_sample(const Trajectory& traj, double tol) {
    long best = -1;
    double best_spread = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < traj.states.size(); ++k) {
        const auto& th = traj.states[k];
        if (th.size() != 6) throw std::invalid_argument("best_paired_sample: expects six oscillators");
        const ClusterAssignment cl = detect_clustering(th, tol);
        if (cl.partition.sizes != std::vector<int>{2, 2, 2}) continue;
        std::array<std::vector<int>, 3> members;
        for (int i = 0; i < 6; ++i) members[cl.labels[i]].push_back(i);
        double spread = 0.0;
        for (const auto& pair : members)
            spread = std::max(spread, coupling::circle_distance(th[pair[0]], th[pair[1]]));
        if (spread < best_spread) {
            best_spread = spread;
            best = static_cast<long>(k);
        }
    }
    return best;
}

std::vector<double> apply_permutation(const std::vector<double>& theta,
                                      const std::array<int, 6>& perm) {
    if (theta.size() != 6) throw std::invalid_argument("apply_permutation: expects six oscillators");
    std::vector<double> out(6);
    for (int i = 0; i < 6; ++i) out[i] = theta[perm[i]];
    return out;
}

Trajectory apply_permutation(const Trajectory& traj, const std::array<int, 6>& perm) {
    Trajectory out = traj;
    for (auto& st : out.states) st = apply_permutation(st, perm);
    if (out.config.initial.size() == 6) out.config.initial = apply_permutation(out.config.initial, perm);
    return out;
}

}  // namespace clusterosc::sim
