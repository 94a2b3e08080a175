// Closed-form Birkhoff normal form through order 8 and the twist
// determinants D4, D6, D8 as polynomials in (f1, f2, mu).
#pragma once

#include "uvstab/normal_form/invariant_poly.hpp"
#include "uvstab/reduction.hpp"

#include <cmath>
#include <optional>

namespace uvstab {

namespace nf_poly {

// Each A-polynomial takes (f1, f2, mu); the mirrored coefficient is the same
// polynomial with f1 and f2 exchanged.

template <typename T>
T A20(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2;
    return -F * mu + F * f2;
}

template <typename T>
T A21(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2;
    return -4 * F * mu + 8 * f1 * f2;
}

template <typename T>
T A30(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2;
    return 2 * F * F * mu * mu - 2 * F * (3 * f1 + f2) * mu * f2 + 4 * F * f1 * f2 * f2;
}

template <typename T>
T A31(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2;
    return 15 * F * F * mu * mu - F * (5 * f1 * f1 + 44 * f1 * f2 + 11 * f2 * f2) * mu +
           (5 * f1 * f1 + 38 * f1 * f2 + 17 * f2 * f2) * f1 * f2;
}

template <typename T>
T A40(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2;
    const T F2 = F * F, F3 = F2 * F;
    return -16 * F3 * mu * mu * mu + 2 * (f1 * f1 + 36 * f1 * f2 + 11 * f2 * f2) * F2 * mu * mu -
           2 * F * (2 * f1 * f1 * f1 + 55 * f1 * f1 * f2 + 36 * f1 * f2 * f2 + 3 * f2 * f2 * f2) * mu * f2 +
           2 * F * (f1 * f1 + 26 * f1 * f2 + 5 * f2 * f2) * f1 * f2 * f2;
}

template <typename T>
T A41(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2;
    const T F2 = F * F, F3 = F2 * F;
    return -182 * F3 * mu * mu * mu + 26 * (3 * f1 * f1 + 31 * f1 * f2 + 8 * f2 * f2) * F2 * mu * mu -
           2 * (13 * f1 + f2) * F * (8 * f1 * f1 + 49 * f1 * f2 + 21 * f2 * f2) * mu * f2 +
           2 * (65 * f1 * f1 * f1 + 367 * f1 * f1 * f2 + 267 * f1 * f2 * f2 + 29 * f2 * f2 * f2) * f1 * f2 * f2;
}

template <typename T>
T A42(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2;
    const T F2 = F * F, F3 = F2 * F;
    const T a = f1 * f1, b = f2 * f2;
    return -354 * F3 * mu * mu * mu + 3 * (95 * a + 518 * f1 * f2 + 95 * b) * F2 * mu * mu -
           3 * F * (9 * a * a + 274 * a * f1 * f2 + 850 * a * b + 274 * f1 * f2 * b + 9 * b * b) * mu +
           3 * (9 * a * a + 204 * a * f1 * f2 + 518 * a * b + 204 * f1 * f2 * b + 9 * b * b) * f1 * f2;
}

}  // namespace nf_poly

/// Frequencies and quartic-to-octic coefficients of the normal form
///   H2 = omega1 w1 - omega2 w2
///   H4 = c4 (A20 w2^2 + A21 w1 w2 + A20' w1^2)
///   H6 = c6 (A30 w2^3 + A31 w1 w2^2 + A32 w1^2 w2 + A30' w1^3)
///   H8 = c8 (A40 w2^4 + A41 w1 w2^3 + A42 w1^2 w2^2 + A41' w1^3 w2 + A40' w1^4)
/// where ' exchanges f1 and f2 (A32 = A31'), c4 = 8F^3, c6 = -32F^5/d^2,
/// c8 = 64F^7/d^4, F = f1 + f2, d = f1 - f2.
template <typename T>
struct NormalFormCoeffs {
    T multiplier, omega1, omega2;
    T c4, c6, c8;
    T A20, A21, A30, A31, A32, A40, A41, A42;
    T A20s, A30s, A40s, A41s;

    /// H2 + ... + H_{2k} with k = max_degree (1..4), as a polynomial in w1, w2.
    InvariantPoly<T> poly(int max_degree = 4) const {
        using P = InvariantPoly<T>;
        typename P::Terms t;
        t[{1, 0, 0, 0}] = omega1;
        t[{0, 1, 0, 0}] = -omega2;
        if (max_degree >= 2) {
            t[{0, 2, 0, 0}] = c4 * A20;
            t[{1, 1, 0, 0}] = c4 * A21;
            t[{2, 0, 0, 0}] = c4 * A20s;
        }
        if (max_degree >= 3) {
            t[{0, 3, 0, 0}] = c6 * A30;
            t[{1, 2, 0, 0}] = c6 * A31;
            t[{2, 1, 0, 0}] = c6 * A32;
            t[{3, 0, 0, 0}] = c6 * A30s;
        }
        if (max_degree >= 4) {
            t[{0, 4, 0, 0}] = c8 * A40;
            t[{1, 3, 0, 0}] = c8 * A41;
            t[{2, 2, 0, 0}] = c8 * A42;
            t[{3, 1, 0, 0}] = c8 * A41s;
            t[{4, 0, 0, 0}] = c8 * A40s;
        }
        return P(std::move(t));
    }
};

template <typename T>
NormalFormCoeffs<T> nf_coefficients(const ConsolidatedParams<T>& cp) {
    using namespace nf_poly;
    const T &f1 = cp.f1, &f2 = cp.f2, &mu = cp.mu;
    const T F = f1 + f2, d = f1 - f2;
    NormalFormCoeffs<T> c;
    c.multiplier = 4 * d * F;
    c.omega1 = c.multiplier * f1;
    c.omega2 = c.multiplier * f2;
    c.c4 = 8 * F * F * F;
    c.c6 = -32 * F * F * F * F * F / (d * d);
    c.c8 = 64 * F * F * F * F * F * F * F / (d * d * d * d);
    c.A20 = A20(f1, f2, mu);
    c.A21 = A21(f1, f2, mu);
    c.A30 = A30(f1, f2, mu);
    c.A31 = A31(f1, f2, mu);
    c.A32 = A31(f2, f1, mu);
    c.A40 = A40(f1, f2, mu);
    c.A41 = A41(f1, f2, mu);
    c.A42 = A42(f1, f2, mu);
    c.A20s = A20(f2, f1, mu);
    c.A30s = A30(f2, f1, mu);
    c.A40s = A40(f2, f1, mu);
    c.A41s = A41(f2, f1, mu);
    return c;
}

template <typename T>
struct TwistReport {
    T D4, D6, D8;
    std::optional<int> first_nonzero;  // k of the first D_{2k} above tolerance
};

namespace nf_poly {

template <typename T>
T D4(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2, d = f1 - f2;
    const T F5 = F * F * F * F * F;
    return 128 * d * d * F5 *
           (-F * (f1 * f1 + 4 * f1 * f2 + f2 * f2) * mu + (f1 * f1 + 10 * f1 * f2 + f2 * f2) * f1 * f2);
}

template <typename T>
T D6(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2, d = f1 - f2;
    T F9 = F;
    for (int i = 1; i < 9; ++i) F9 *= F;
    const T p = f1 * f2;
    return -2048 * F9 *
           ((2 * f1 * f1 + 13 * p + 2 * f2 * f2) * F * F * mu * mu -
            F * (11 * f1 * f1 + 46 * p + 11 * f2 * f2) * mu * p + (9 * f1 * f1 + 50 * p + 9 * f2 * f2) * p * p) *
           d;
}

template <typename T>
T D8(const T& f1, const T& f2, const T& mu) {
    const T F = f1 + f2;
    T F11 = F;
    for (int i = 1; i < 11; ++i) F11 *= F;
    const T a = f1, b = f2;
    const T a2 = a * a, b2 = b * b, a3 = a2 * a, b3 = b2 * b, a4 = a3 * a, b4 = b3 * b;
    const T a5 = a4 * a, b5 = b4 * b, a6 = a5 * a, b6 = b5 * b;
    const T p = a * b;
    const T t3 = -2 * (8 * a4 + 91 * a3 * b + 177 * a2 * b2 + 91 * a * b3 + 8 * b4) * F * F * F * mu * mu * mu;
    const T t2 = (2 * a6 + 150 * a5 * b + 1113 * a4 * b2 + 1970 * a3 * b3 + 1113 * a2 * b4 + 150 * a * b5 + 2 * b6) *
                 F * F * mu * mu;
    const T t1 = -F *
                 (4 * a6 + 345 * a5 * b + 2226 * a4 * b2 + 3850 * a3 * b3 + 2226 * a2 * b4 + 345 * a * b5 + 4 * b6) *
                 mu * p;
    const T t0 = (2 * a6 + 211 * a5 * b + 1466 * a4 * b2 + 2642 * a3 * b3 + 1466 * a2 * b4 + 211 * a * b5 + 2 * b6) *
                 p * p;
    return 16384 * F11 * (t3 + t2 + t1 + t0);
}

}  // namespace nf_poly

/// Relative threshold below which a twist determinant counts as zero, measured
/// against the sum of absolute values of the terms of H_{2k}(omega2, omega1).
inline constexpr double kTwistTol = 1e-10;

template <typename T>
TwistReport<T> twist_determinants(const ConsolidatedParams<T>& cp) {
    TwistReport<T> r{nf_poly::D4(cp.f1, cp.f2, cp.mu), nf_poly::D6(cp.f1, cp.f2, cp.mu),
                     nf_poly::D8(cp.f1, cp.f2, cp.mu), std::nullopt};
    const auto c = nf_coefficients(cp);
    const auto P = c.poly(4);
    const T Ds[3] = {r.D4, r.D6, r.D8};
    for (int k = 2; k <= 4; ++k) {
        double scale = 0;
        const auto Hk = P.homogeneous(k);
        for (const auto& [m, v] : Hk.terms()) {
            T term = v;
            for (int i = 0; i < m[0]; ++i) term *= c.omega2;
            for (int i = 0; i < m[1]; ++i) term *= c.omega1;
            scale += std::abs(static_cast<double>(term));
        }
        if (std::abs(static_cast<double>(Ds[k - 2])) > kTwistTol * scale) {
            r.first_nonzero = k;
            break;
        }
    }
    return r;
}

}  // namespace uvstab
