// Shared test helpers: deterministic pseudo-random operators and states, and
// an adaptive-Simpson quadrature oracle used to cross-check closed-form
// integral bounds.

#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "gibbstraj/linalg.hpp"
#include "gibbstraj/rng.hpp"

namespace testutil {

inline gibbs::Matrix rand_matrix(int d, std::uint64_t seed) {
    gibbs::CounterRng rng(seed, 0);
    gibbs::Matrix A(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            A(i, j) = gibbs::Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
    return A;
}

inline gibbs::Matrix rand_hermitian(int d, std::uint64_t seed) {
    const gibbs::Matrix A = rand_matrix(d, seed);
    return A + A.adjoint();
}

// Full-rank density matrix G G^dag / tr.
inline gibbs::Matrix rand_density(int d, std::uint64_t seed) {
    const gibbs::Matrix G = rand_matrix(d, seed);
    gibbs::Matrix rho = G * G.adjoint() + 1e-3 * gibbs::Matrix::Identity(d, d);
    return rho / rho.trace();
}

inline gibbs::Vector rand_state(int d, std::uint64_t seed) {
    gibbs::CounterRng rng(seed, 1);
    gibbs::Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = gibbs::Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
    v.normalize();
    return v;
}

// Adaptive Simpson quadrature with the usual 1/15 Richardson error estimate,
// recursion capped at depth 40.  The interval is pre-split into fixed panels
// so oscillatory integrands cannot terminate spuriously when the coarse
// samples happen to straddle zeros.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol) {
    struct Rec {
        const std::function<double(double)>& f;
        double run(double a, double b, double fa, double fm, double fb, double whole, double tol,
                   int depth) const {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth >= 40 || std::abs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return run(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
                   run(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        }
    } rec{f};
    const int panels = 64;
    const double w = (b - a) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double pa = a + k * w, pb = a + (k + 1) * w;
        const double fa = f(pa), fb = f(pb), fm = f(0.5 * (pa + pb));
        const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        total += rec.run(pa, pb, fa, fm, fb, whole, tol / panels, 0);
    }
    return total;
}

inline std::complex<double> adaptive_simpson_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b, double tol) {
    const double re = adaptive_simpson([&](double x) { return f(x).real(); }, a, b, tol);
    const double im = adaptive_simpson([&](double x) { return f(x).imag(); }, a, b, tol);
    return {re, im};
}

}  // namespace testutil
