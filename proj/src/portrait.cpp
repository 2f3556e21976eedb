#include "clusterosc/portrait.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "clusterosc/stability.hpp"

namespace clusterosc::portrait {

namespace {

using coupling::two_pi;
using coupling::wrap_2pi;
using coupling::wrap_signed;

void require_three_clusters(const Partition& m) {
    m.validate();
    if (m.M() != 3) throw std::invalid_argument("portrait: requires exactly three clusters");
}

double wrapped_plane_distance(double u1, double v1, double u2, double v2) {
    return std::hypot(wrap_signed(u1 - u2), wrap_signed(v1 - v2));
}

std::array<std::complex<double>, 2> eigenvalues_2x2(const linalg::Mat& A) {
    const double tr = A(0, 0) + A(1, 1);
    const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return {std::complex<double>(0.5 * (tr + root), 0.0),
                std::complex<double>(0.5 * (tr - root), 0.0)};
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
}

PointKind classify(const std::array<std::complex<double>, 2>& eigs) {
    const double re1 = eigs[0].real();
    const double re2 = eigs[1].real();
    if (std::abs(re1) < 1e-8 || std::abs(re2) < 1e-8) return PointKind::NonHyperbolic;
    if (re1 > 0.0 && re2 > 0.0) return PointKind::Source;
    if (re1 < 0.0 && re2 < 0.0) return PointKind::Sink;
    return PointKind::Saddle;
}

}  // namespace

std::string to_string(PointKind k) {
    switch (k) {
        case PointKind::Source: return "Source";
        case PointKind::Saddle: return "Saddle";
        case PointKind::Sink: return "Sink";
        case PointKind::NonHyperbolic: return "NonHyperbolic";
    }
    return "?";
}

std::array<double, 2> difference_field(const Coupling& g, const Partition& m, double u, double v) {
    require_three_clusters(m);
    const auto F = cluster::reduced_vector_field(g, m, {u, v, 0.0}, 0.0);
    return {F[0] - F[2], F[1] - F[2]};
}

linalg::Mat difference_jacobian(const Coupling& g, const Partition& m, double u, double v) {
    require_three_clusters(m);
    const linalg::Mat T = stability::tangential_matrix(g, m, {u, v, 0.0});
    linalg::Mat A(2, 2);
    A(0, 0) = T(0, 0) - T(2, 0);
    A(0, 1) = T(0, 1) - T(2, 1);
    A(1, 0) = T(1, 0) - T(2, 0);
    A(1, 1) = T(1, 1) - T(2, 1);
    return A;
}

PortraitResult find_fixed_points(const Coupling& g, const Partition& m, int grid_density) {
    require_three_clusters(m);
    if (grid_density < 8) throw std::invalid_argument("portrait: grid_density must be >= 8");

    // Degenerate couplings (identically zero difference field) make every
    // point an equilibrium with a singular Newton matrix; report instead of
    // chasing 2^10 spurious roots.
    double field_scale = 0.0, jac_scale = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            const double u = i * two_pi / 16, v = j * two_pi / 16;
            const auto f = difference_field(g, m, u, v);
            field_scale = std::max({field_scale, std::abs(f[0]), std::abs(f[1])});
            const auto A = difference_jacobian(g, m, u, v);
            jac_scale = std::max({jac_scale, std::abs(A(0, 0)), std::abs(A(0, 1)),
                                  std::abs(A(1, 0)), std::abs(A(1, 1))});
        }
    PortraitResult out;
    if (field_scale < 1e-13 && jac_scale < 1e-13) {
        out.degenerate = true;
        return out;
    }

    const double h = two_pi / grid_density;
    for (int si = 0; si < grid_density; ++si) {
        for (int sj = 0; sj < grid_density; ++sj) {
            double u = si * h, v = sj * h;
            bool converged = false;
            for (int it = 0; it < 40; ++it) {
                const auto f = difference_field(g, m, u, v);
                if (std::max(std::abs(f[0]), std::abs(f[1])) < 1e-12) {
                    converged = true;
                    break;
                }
                const auto A = difference_jacobian(g, m, u, v);
                const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
                if (std::abs(det) < 1e-13 * std::max(1.0, jac_scale * jac_scale)) break;
                double du = (A(1, 1) * f[0] - A(0, 1) * f[1]) / det;
                double dv = (A(0, 0) * f[1] - A(1, 0) * f[0]) / det;
                const double len = std::hypot(du, dv);
                if (len > 1.0) {  // keep early steps inside one basin
                    du /= len;
                    dv /= len;
                }
                u = wrap_2pi(u - du);
                v = wrap_2pi(v - dv);
            }
            if (!converged) continue;
            {
                const auto f = difference_field(g, m, u, v);
                if (std::max(std::abs(f[0]), std::abs(f[1])) > 1e-11) continue;
            }
            bool duplicate = false;
            for (const auto& fp : out.points)
                if (wrapped_plane_distance(u, v, fp.u, fp.v) < 1e-6) {
                    duplicate = true;
                    break;
                }
            if (duplicate) continue;

            ReducedFixedPoint fp;
            fp.u = u;
            fp.v = v;
            fp.eigenvalues = eigenvalues_2x2(difference_jacobian(g, m, u, v));
            fp.kind = classify(fp.eigenvalues);
            out.points.push_back(fp);
        }
    }
    std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) {
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    return out;
}

std::vector<FieldSample> export_portrait_samples(const Coupling& g, const Partition& m,
                                                 int resolution) {
    require_three_clusters(m);
    if (resolution < 16) throw std::invalid_argument("portrait: resolution must be >= 16");
    std::vector<FieldSample> out;
    out.reserve(static_cast<size_t>(resolution) * resolution);
    const double h = two_pi / resolution;
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j) {
            FieldSample s;
            s.u = i * h;
            s.v = j * h;
            const auto f = difference_field(g, m, s.u, s.v);
            s.du = f[0];
            s.dv = f[1];
            out.push_back(s);
        }
    return out;
}

}  // namespace clusterosc::portrait
