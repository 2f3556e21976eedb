#include "clusterosc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "clusterosc/errors.hpp"

namespace clusterosc::linalg {

double frobenius_norm(const Mat& A) {
    double acc = 0.0;
    for (double x : A.a) acc += x * x;
    return std::sqrt(acc);
}

std::vector<double> lu_solve(Mat A, std::vector<double> b) {
    const int n = A.rows;
    if (A.cols != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("lu_solve: shape mismatch");
    double scale = 0.0;
    for (double x : A.a) scale = std::max(scale, std::abs(x));
    const double pivot_floor = 1e-13 * std::max(scale, 1e-30);

    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
        if (std::abs(A(piv, k)) < pivot_floor)
            throw NumericalError("lu_solve: singular matrix (pivot " +
                                 std::to_string(A(piv, k)) + ")");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(A(piv, j), A(k, j));
            std::swap(b[piv], b[k]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = A(i, k) / A(k, k);
            A(i, k) = 0.0;
            for (int j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double acc = b[i];
        for (int j = i + 1; j < n; ++j) acc -= A(i, j) * b[j];
        b[i] = acc / A(i, i);
    }
    return b;
}

namespace {

using cplx = std::complex<double>;

// Householder reduction to upper Hessenberg form (in place).
void hessenberg(Mat& H) {
    const int n = H.rows;
    std::vector<double> v(n);
    for (int k = 0; k + 2 < n; ++k) {
        double nrm = 0.0;
        for (int i = k + 1; i < n; ++i) nrm += H(i, k) * H(i, k);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) continue;
        const double alpha = H(k + 1, k) >= 0.0 ? -nrm : nrm;
        double vnorm2 = 0.0;
        for (int i = k + 1; i < n; ++i) {
            v[i] = H(i, k);
            if (i == k + 1) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) continue;
        // Left: H <- (I - 2 v v^T / v^T v) H on rows k+1..n-1.
        for (int j = k; j < n; ++j) {
            double dot = 0.0;
            for (int i = k + 1; i < n; ++i) dot += v[i] * H(i, j);
            const double f = 2.0 * dot / vnorm2;
            for (int i = k + 1; i < n; ++i) H(i, j) -= f * v[i];
        }
        // Right: H <- H (I - 2 v v^T / v^T v) on cols k+1..n-1.
        for (int i = 0; i < n; ++i) {
            double dot = 0.0;
            for (int j = k + 1; j < n; ++j) dot += H(i, j) * v[j];
            const double f = 2.0 * dot / vnorm2;
            for (int j = k + 1; j < n; ++j) H(i, j) -= f * v[j];
        }
        for (int i = k + 2; i < n; ++i) H(i, k) = 0.0;
        H(k + 1, k) = alpha;
    }
}

void eigenvalues_2x2(double a, double b, double c, double d,
                     std::vector<cplx>& out) {
    const double half_tr = 0.5 * (a + d);
    const double det = a * d - b * c;
    const double disc = half_tr * half_tr - det;
    if (disc < 0.0) {
        const double im = std::sqrt(-disc);
        out.emplace_back(half_tr, im);
        out.emplace_back(half_tr, -im);  // exact conjugate
    } else {
        const double root = std::sqrt(disc);
        const double l1 = half_tr >= 0.0 ? half_tr + root : half_tr - root;
        const double l2 = (l1 != 0.0) ? det / l1 : half_tr - root;
        out.emplace_back(l1, 0.0);
        out.emplace_back(l2, 0.0);
    }
}

// One implicit double-shift (Francis) sweep on the unreduced block [p..q].
void francis_sweep(Mat& H, int p, int q, bool exceptional) {
    double tr, det;
    if (exceptional) {
        // Ad-hoc shifts to break symmetric stalls (cyclic matrices etc.).
        const double s = std::abs(H(q, q - 1)) + std::abs(H(q - 1, q - 2));
        tr = 1.5 * s;
        det = s * s;
    } else {
        tr = H(q - 1, q - 1) + H(q, q);
        det = H(q - 1, q - 1) * H(q, q) - H(q - 1, q) * H(q, q - 1);
    }
    // First column of (H - l1 I)(H - l2 I) restricted to the block.
    double x = H(p, p) * H(p, p) + H(p, p + 1) * H(p + 1, p) - tr * H(p, p) + det;
    double y = H(p + 1, p) * (H(p, p) + H(p + 1, p + 1) - tr);
    double z = (p + 2 <= q) ? H(p + 2, p + 1) * H(p + 1, p) : 0.0;

    for (int k = p; k <= q - 2; ++k) {
        // Householder annihilating (y, z) against x.
        const double nrm = std::sqrt(x * x + y * y + z * z);
        if (nrm != 0.0) {
            const double alpha = x >= 0.0 ? -nrm : nrm;
            double v0 = x - alpha, v1 = y, v2 = z;
            const double vnorm2 = v0 * v0 + v1 * v1 + v2 * v2;
            if (vnorm2 != 0.0) {
                const int jlo = std::max(p, k - 1);
                for (int j = jlo; j <= q; ++j) {
                    const double dot = v0 * H(k, j) + v1 * H(k + 1, j) + v2 * H(k + 2, j);
                    const double f = 2.0 * dot / vnorm2;
                    H(k, j) -= f * v0;
                    H(k + 1, j) -= f * v1;
                    H(k + 2, j) -= f * v2;
                }
                const int ihi = std::min(q, k + 3);
                for (int i = p; i <= ihi; ++i) {
                    const double dot = v0 * H(i, k) + v1 * H(i, k + 1) + v2 * H(i, k + 2);
                    const double f = 2.0 * dot / vnorm2;
                    H(i, k) -= f * v0;
                    H(i, k + 1) -= f * v1;
                    H(i, k + 2) -= f * v2;
                }
            }
        }
        x = H(k + 1, k);
        y = H(k + 2, k);
        z = (k + 3 <= q) ? H(k + 3, k) : 0.0;
    }
    // Final 2-element reflection on (x, y).
    const double nrm = std::sqrt(x * x + y * y);
    if (nrm != 0.0) {
        const double alpha = x >= 0.0 ? -nrm : nrm;
        const double v0 = x - alpha, v1 = y;
        const double vnorm2 = v0 * v0 + v1 * v1;
        if (vnorm2 != 0.0) {
            for (int j = q - 2; j <= q; ++j) {
                const double dot = v0 * H(q - 1, j) + v1 * H(q, j);
                const double f = 2.0 * dot / vnorm2;
                H(q - 1, j) -= f * v0;
                H(q, j) -= f * v1;
            }
            for (int i = p; i <= q; ++i) {
                const double dot = v0 * H(i, q - 1) + v1 * H(i, q);
                const double f = 2.0 * dot / vnorm2;
                H(i, q - 1) -= f * v0;
                H(i, q) -= f * v1;
            }
        }
    }
}

std::vector<cplx> qr_eigenvalues(Mat H) {
    const int n = H.rows;
    const double eps = std::numeric_limits<double>::epsilon();
    std::vector<cplx> ev;
    ev.reserve(n);

    int q = n - 1;
    int iters = 0;
    while (q >= 0) {
        // Zero negligible subdiagonals in the trailing part.
        for (int i = 1; i <= q; ++i) {
            const double mag = std::abs(H(i - 1, i - 1)) + std::abs(H(i, i));
            if (std::abs(H(i, i - 1)) <= eps * std::max(mag, 1e-30)) H(i, i - 1) = 0.0;
        }
        if (q == 0) {
            ev.emplace_back(H(0, 0), 0.0);
            --q;
            iters = 0;
            continue;
        }
        if (H(q, q - 1) == 0.0) {
            ev.emplace_back(H(q, q), 0.0);
            --q;
            iters = 0;
            continue;
        }
        if (q == 1 || H(q - 1, q - 2) == 0.0) {
            eigenvalues_2x2(H(q - 1, q - 1), H(q - 1, q), H(q, q - 1), H(q, q), ev);
            q -= 2;
            iters = 0;
            continue;
        }
        int p = q - 1;
        while (p > 0 && H(p, p - 1) != 0.0) --p;
        if (++iters > 60)
            throw NumericalError("eigenvalues: QR failed to deflate after " +
                                 std::to_string(iters) + " sweeps");
        francis_sweep(H, p, q, iters % 13 == 0);
    }
    return ev;
}

// Complex LU solve used by the inverse-iteration verifier; near-singular
// pivots are nudged instead of rejected (that is the whole point here).
void lu_solve_regularized(std::vector<cplx> M, int n, std::vector<cplx>& x,
                          double tiny) {
    std::vector<int> perm(n);
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(M[i * n + k]) > std::abs(M[piv * n + k])) piv = i;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(M[piv * n + j], M[k * n + j]);
            std::swap(x[piv], x[k]);
        }
        if (std::abs(M[k * n + k]) < tiny) M[k * n + k] = cplx(tiny, 0.0);
        for (int i = k + 1; i < n; ++i) {
            const cplx f = M[i * n + k] / M[k * n + k];
            for (int j = k + 1; j < n; ++j) M[i * n + j] -= f * M[k * n + j];
            x[i] -= f * x[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        cplx acc = x[i];
        for (int j = i + 1; j < n; ++j) acc -= M[i * n + j] * x[j];
        x[i] = acc / M[i * n + i];
    }
}

bool verify_eigenvalue(const Mat& A, cplx lambda, double nrmA) {
    const int n = A.rows;
    const double floor_norm = std::max(nrmA, 1e-30);
    for (int attempt = 0; attempt < 4; ++attempt) {
        const cplx shift =
            lambda + cplx(attempt * 1e-12 * floor_norm, attempt * 1e-13 * floor_norm);
        std::vector<cplx> M(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                M[i * n + j] = cplx(A(i, j), 0.0) - (i == j ? shift : cplx(0.0));
        std::vector<cplx> v(n, cplx(1.0 / std::sqrt(double(n)), 0.0));
        for (int it = 0; it < 3; ++it) {
            lu_solve_regularized(M, n, v, 1e-14 * floor_norm);
            double nv = 0.0;
            for (const cplx& c : v) nv += std::norm(c);
            nv = std::sqrt(nv);
            if (nv == 0.0 || !std::isfinite(nv)) break;
            for (cplx& c : v) c /= nv;
        }
        double resid = 0.0;
        for (int i = 0; i < n; ++i) {
            cplx acc = -lambda * v[i];
            for (int j = 0; j < n; ++j) acc += A(i, j) * v[j];
            resid += std::norm(acc);
        }
        if (std::sqrt(resid) <= 1e-8 * floor_norm) return true;
    }
    return false;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues_small_real_matrix(const Mat& A) {
    const int n = A.rows;
    if (A.cols != n) throw std::invalid_argument("eigenvalues: matrix not square");
    if (n > 16) throw std::invalid_argument("eigenvalues: dimension capped at 16");
    for (double x : A.a)
        if (!std::isfinite(x)) throw std::invalid_argument("eigenvalues: non-finite entry");
    if (n == 0) return {};
    if (n == 1) return {cplx(A(0, 0), 0.0)};

    Mat H = A;
    hessenberg(H);
    std::vector<cplx> ev = qr_eigenvalues(std::move(H));

    const double nrmA = frobenius_norm(A);
    for (const cplx& lambda : ev)
        if (!verify_eigenvalue(A, lambda, nrmA))
            throw NumericalError("eigenvalues: inverse-iteration residual above 1e-8*||A||");
    return ev;
}

void sort_spectrum(std::vector<std::complex<double>>& ev) {
    std::sort(ev.begin(), ev.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

bool spectra_match(std::vector<std::complex<double>> a,
                   std::vector<std::complex<double>> b, double tol) {
    if (a.size() != b.size()) return false;
    std::vector<bool> used(b.size(), false);
    for (const cplx& x : a) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(x - b[j]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(j);
            }
        }
        if (best < 0 || best_d > tol) return false;
        used[best] = true;
    }
    return true;
}

}
