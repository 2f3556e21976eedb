#pragma once

#include <complex>
#include <vector>

namespace clusterosc::linalg {

// Dense row-major matrix, sized for the tiny systems this project needs
// (Newton Jacobians and oscillator Jacobians, dimension <= 16).
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

double frobenius_norm(const Mat& A);

// Solve A x = b by LU with partial pivoting. Throws NumericalError when a
// pivot falls below 1e-13 times the matrix scale (singular system).
std::vector<double> lu_solve(Mat A, std::vector<double> b);

// Full spectrum of a real square matrix with dim <= 16: Householder
// Hessenberg reduction followed by implicit double-shift QR with deflation.
// Every eigenvalue is re-verified by inverse iteration; the routine throws
// NumericalError if any eigenpair residual exceeds 1e-8 * ||A||_F or the QR
// iteration fails to deflate. Complex eigenvalues come in exactly conjugate
// pairs. Order follows deflation; sort with sort_spectrum for comparisons.
std::vector<std::complex<double>> eigenvalues_small_real_matrix(const Mat& A);

// Ascending by (re, im); handy for comparing spectra as multisets.
void sort_spectrum(std::vector<std::complex<double>>& ev);

// Greedy nearest matching between two spectra; true when they agree as
// multisets within tol (absolute, per eigenvalue).
bool spectra_match(std::vector<std::complex<double>> a,
                   std::vector<std::complex<double>> b, double tol);

}
