#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "clusterosc/cluster.hpp"
#include "clusterosc/coupling.hpp"
#include "clusterosc/linalg.hpp"

namespace clusterosc::portrait {

using cluster::Partition;
using coupling::Coupling;

// Flow of a three-cluster reduction restricted to the phase differences
// (u, v) = (Ψ₁ − Ψ₃, Ψ₂ − Ψ₃); the common rotation (and ω) cancels exactly.
enum class PointKind { Source, Saddle, Sink, NonHyperbolic };

std::string to_string(PointKind k);

struct ReducedFixedPoint {
    double u = 0.0;
    double v = 0.0;
    PointKind kind = PointKind::NonHyperbolic;
    std::array<std::complex<double>, 2> eigenvalues{};
};

// (du/dt, dv/dt) = (F₁ − F₃, F₂ − F₃) with F the reduced vector field
// evaluated at Ψ = (u, v, 0).  Requires M = 3.
std::array<double, 2> difference_field(const Coupling& g, const Partition& m, double u, double v);

// Analytic 2×2 Jacobian of difference_field at (u, v); its eigenvalues are
// the two nontrivial tangential eigenvalues when (u, v) is a fixed point.
linalg::Mat difference_jacobian(const Coupling& g, const Partition& m, double u, double v);

struct PortraitResult {
    std::vector<ReducedFixedPoint> points;  // sorted by (u, v)
    bool degenerate = false;                // identically zero field (e.g. g ≡ 0)
};

// Newton refinement from a grid_density × grid_density seed grid over
// [0,2π)², duplicates merged under wrapped distance < 1e−6, each point
// classified by its Jacobian eigenvalues (|Re λ| < 1e−8 ⇒ NonHyperbolic).
PortraitResult find_fixed_points(const Coupling& g, const Partition& m, int grid_density = 32);

struct FieldSample {
    double u = 0.0, v = 0.0, du = 0.0, dv = 0.0;
};

// resolution × resolution samples of the difference field (row-major in u).
std::vector<FieldSample> export_portrait_samples(const Coupling& g, const Partition& m,
                                                 int resolution);

}  // namespace clusterosc::portrait
