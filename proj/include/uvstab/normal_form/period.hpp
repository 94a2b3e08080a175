// Periods of the reduced two-mode oscillation: predicted from a truncated
// normal form at given energy and momentum, and measured by integration.
#pragma once

#include "uvstab/normal_form/engine.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uvstab {

struct ZeroFrequencyError : std::domain_error {
    using std::domain_error::domain_error;
};

struct NonPeriodicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Normal form H2 + ... + H_{2k} in floating point from the Lie engine, k = 1..4.
template <typename T>
InvariantPoly<T> engine_normal_form(const ConsolidatedParams<T>& cp, int max_degree = 4) {
    const auto H = taylor_invariant_expansion<T>(cp, max_degree);
    return lie_normalize(H, max_degree).Hnf;
}

/// 2 pi / |dH/dw1 + dH/dw2| in normal-form time (physical time is this times
/// the mode-basis multiplier).
template <typename T>
T nf_period(const InvariantPoly<T>& Hnf, T w1, T w2) {
    if (w1 < 0 || w2 < 0) throw std::invalid_argument("nf_period: requires w1, w2 >= 0");
    const std::array<T, 4> w{w1, w2, T(0), T(0)};
    const T rate = Hnf.derivative(1).evaluate(w) + Hnf.derivative(2).evaluate(w);
    if (rate == T(0)) throw ZeroFrequencyError("nf_period: zero frequency");
    using std::abs;
    return 2 * std::numbers::pi_v<T> / abs(rate);
}

/// Order 4, 6 or 8 truncation of the engine normal form.
template <typename T>
T nf_period(const ConsolidatedParams<T>& cp, T w1, T w2, int order) {
    if (order != 4 && order != 6 && order != 8) throw std::invalid_argument("nf_period: order must be 4, 6 or 8");
    return nf_period(engine_normal_form(cp, order / 2), w1, w2);
}

/// Energy (relative to the equilibrium) and momentum w2 - w1 of the point
/// eps (q0, u0), the two quantities conserved by both flows.
template <typename T>
struct EnergyMomentum {
    T energy, momentum;
};

template <typename T>
EnergyMomentum<T> energy_momentum(const ConsolidatedParams<T>& cp, std::array<T, 2> q0, std::array<T, 2> u0, T eps) {
    const T q1 = eps * q0[0], q2 = eps * q0[1], u1 = eps * u0[0], u2 = eps * u0[1];
    const ModeBasis<T> mb(cp);
    const auto m = mb.to_modes(q1, q2, u1, u2);
    const auto w = invariants(m[0], m[1], m[2], m[3]);
    return {consolidated_energy_shifted(cp, q1, q2, u1, u2), w[1] - w[0]};
}

/// Normal-form period on the level set {Hnf = E, w2 - w1 = J}: Newton on w1.
template <typename T>
T nf_period_matched(const InvariantPoly<T>& Hnf, T E, T J) {
    const auto d1 = Hnf.derivative(1), d2 = Hnf.derivative(2);
    const T om1 = Hnf.coeff({1, 0, 0, 0}), om2 = -Hnf.coeff({0, 1, 0, 0});
    using std::abs;
    T a = (E + om2 * J) / (om1 - om2);
    for (int it = 0; it < 100; ++it) {
        const std::array<T, 4> w{a, a + J, T(0), T(0)};
        const T g = Hnf.evaluate(w) - E;
        const T dg = d1.evaluate(w) + d2.evaluate(w);
        const T step = g / dg;
        a -= step;
        if (abs(step) <= 8 * std::numeric_limits<T>::epsilon() * abs(a)) break;
    }
    return nf_period(Hnf, a, a + J);
}

namespace detail {

// One Gragg-Bulirsch-Stoer step: modified midpoint with n = 2, 4, ..., 2*levels
// substeps, polynomial extrapolation in the squared substep.
template <typename T, typename Field>
std::array<T, 4> gbs_step(const Field& field, const std::array<T, 4>& y0, T H, int levels = 8) {
    using V = std::array<T, 4>;
    auto axpy = [](const V& x, T a, const V& y) {
        V r;
        for (int i = 0; i < 4; ++i) r[i] = x[i] + a * y[i];
        return r;
    };
    std::vector<V> tab(levels);
    std::vector<int> ns(levels);
    const V f0 = field(y0);
    for (int j = 0; j < levels; ++j) {
        const int n = 2 * (j + 1);
        ns[j] = n;
        const T h = H / n;
        V zp = y0, z = axpy(y0, h, f0);
        for (int m = 1; m < n; ++m) {
            V zn = axpy(zp, 2 * h, field(z));
            zp = z;
            z = zn;
        }
        const V fz = field(z);
        V est;
        for (int i = 0; i < 4; ++i) est[i] = (z[i] + zp[i] + h * fz[i]) / 2;
        tab[j] = est;
        // Neville update in place: tab[j-k] becomes the order-k extrapolant
        for (int k = j - 1; k >= 0; --k) {
            const T r = T(ns[j]) / T(ns[k]);
            const T den = r * r - 1;
            for (int i = 0; i < 4; ++i) tab[k][i] = tab[k + 1][i] + (tab[k + 1][i] - tab[k][i]) / den;
        }
    }
    return tab[0];
}

}  // namespace detail

/// Time for the angle of (w3, w4), taken in the linear mode coordinates, to
/// advance by 2 pi along the consolidated flow from eps (q0, u0).
/// Integration uses fixed macro steps T0/steps_per_t0, T0 = 2 pi/(f1 - f2),
/// each by extrapolated modified midpoint; the final partial step is found by
/// secant iteration on the angle.
template <typename T>
T measure_period(const ConsolidatedParams<T>& cp, std::array<T, 2> q0, std::array<T, 2> u0, T eps,
                 int steps_per_t0 = 200) {
    using V = std::array<T, 4>;
    using std::abs;
    using std::atan2;
    using std::remainder;
    const T two_pi = 2 * std::numbers::pi_v<T>;
    const ModeBasis<T> mb(cp);
    const V y0{eps * q0[0], eps * q0[1], eps * u0[0], eps * u0[1]};
    chart_gamma3(y0[0] * y0[0] + y0[1] * y0[1]);

    auto field = [&](const V& y) {
        const auto g = consolidated_gradient(cp, y[0], y[1], y[2], y[3]);
        return V{g[2], g[3], -g[0], -g[1]};
    };
    auto angle = [&](const V& y) {
        const auto m = mb.to_modes(y[0], y[1], y[2], y[3]);
        const auto w = invariants(m[0], m[1], m[2], m[3]);
        return atan2(w[3], w[2]);
    };

    const T T0 = two_pi / (cp.f1 - cp.f2);
    const T h = T0 / steps_per_t0;
    const int max_steps = 50 * steps_per_t0;
    const T guard = T(1e-9);

    V y = y0;
    T phi = angle(y0), raw = phi;
    const T phi0 = phi;
    int dir = 0;
    for (int k = 0; k < max_steps; ++k) {
        const V yn = detail::gbs_step(field, y, h);
        const T rawn = angle(yn);
        const T dphi = remainder(rawn - raw, two_pi);
        if (dir == 0) dir = dphi > 0 ? 1 : -1;
        if (dir * dphi < -guard) throw NonPeriodicError("measure_period: (w3, w4) angle is not monotone");
        const T phin = phi + dphi;
        if (dir * (phin - phi0) >= two_pi) {
            // angle advance over a partial step tau from y, minus what is still missing
            const T need = two_pi - dir * (phi - phi0);
            auto g = [&](T tau) {
                const V yt = detail::gbs_step(field, y, tau);
                return dir * remainder(angle(yt) - raw, two_pi) - need;
            };
            // secant on the bracket [lo, hi], bisecting when the secant leaves it
            T lo = 0, glo = -need, hi = h, ghi = dir * dphi - need;
            T ta = lo, ga = glo, tb = hi, gb = ghi;
            for (int it = 0; it < 200; ++it) {
                T tc = gb != ga ? tb - gb * (tb - ta) / (gb - ga) : (lo + hi) / 2;
                if (!(tc > lo && tc < hi)) tc = (lo + hi) / 2;
                const T gc = g(tc);
                if (gc < 0) lo = tc, glo = gc;
                else hi = tc, ghi = gc;
                ta = tb;
                ga = gb;
                tb = tc;
                gb = gc;
                if (gc == T(0) || hi - lo <= 4 * std::numeric_limits<T>::epsilon() * h ||
                    abs(tb - ta) <= 4 * std::numeric_limits<T>::epsilon() * h)
                    break;
            }
            return k * h + tb;
        }
        y = yn;
        raw = rawn;
        phi = phin;
    }
    throw NonPeriodicError("measure_period: no full revolution within the step budget");
}

}  // namespace uvstab
