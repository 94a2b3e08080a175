// Second-order splitting integrator for the reduced system, built from exact
// flows of the four pieces H0 + H1 + H2 + H3 of the reduced Hamiltonian and
// of the momentum-preserving dissipation field, plus an RK4 reference.
#pragma once

#include "uvstab/reduction.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace uvstab {

/// Everything the reduced flows need at one momentum level.
struct ReducedModel {
    BodyParams body;
    MomentumLevel nu;
    DerivedCoeffs d;

    ReducedModel() = default;
    ReducedModel(const BodyParams& b, const MomentumLevel& n) : body(b), nu(n), d(derived_coeffs(b, n.nu_a.z())) {}
};

inline constexpr double kDefaultQmax = 0.999;

struct IntegratorConfig {
    double dt = 0.04453;
    double eps = 0.0;
    double r_stop = 0.5;
    double q_max = kDefaultQmax;
    long sample_stride = 1;
};

// ---------------------------------------------------------------------------
// The four pieces
//   H0 = H(q, 0)
//   H1 = Fp/2 (|p|^2 - (q.p)^2)
//   H2 = Fp Fl (q.p) Gamma3
//   H3 = -Fp nu_theta f (q1 p2 - q2 p1)
// ---------------------------------------------------------------------------

inline double split_h0(const ReducedModel& m, const ReducedState& s) {
    return reduced_hamiltonian(m.body, m.nu, {s.q1, s.q2, 0.0, 0.0});
}
inline double split_h1(const ReducedModel& m, const ReducedState& s) {
    const double qp = s.q1 * s.p1 + s.q2 * s.p2;
    return 0.5 * m.d.Fp * (s.p1 * s.p1 + s.p2 * s.p2 - qp * qp);
}
inline double split_h2(const ReducedModel& m, const ReducedState& s) {
    return m.d.Fp * m.d.Fl * (s.q1 * s.p1 + s.q2 * s.p2) * chart_gamma3(s.r2());
}
inline double split_h3(const ReducedModel& m, const ReducedState& s) {
    const double f = 1.0 / (1.0 + chart_gamma3(s.r2()));
    return -m.d.Fp * m.nu.nu_theta * f * so2_momentum(s);
}

/// Hamiltonian vector field (dH/dp, -dH/dq) of piece i = 0..3.
inline Vec4 split_field(int i, const ReducedModel& m, const ReducedState& s) {
    const double q1 = s.q1, q2 = s.q2, p1 = s.p1, p2 = s.p2;
    const double qp = q1 * p1 + q2 * p2;
    const double G3 = chart_gamma3(s.r2());
    Vec4 dq_dp;  // (dH/dq1, dH/dq2, dH/dp1, dH/dp2)
    switch (i) {
        case 0: {
            const Vec4 g = reduced_gradient(m.body, m.nu, {q1, q2, 0.0, 0.0});
            dq_dp = {g[0], g[1], 0.0, 0.0};
            break;
        }
        case 1:
            dq_dp = m.d.Fp * Vec4(-qp * p1, -qp * p2, p1 - qp * q1, p2 - qp * q2);
            break;
        case 2: {
            const double c = m.d.Fp * m.d.Fl;
            dq_dp = c * Vec4(p1 * G3 - qp * q1 / G3, p2 * G3 - qp * q2 / G3, G3 * q1, G3 * q2);
            break;
        }
        default: {
            const double a = m.d.Fp * m.nu.nu_theta;
            const double f = 1.0 / (1.0 + G3);
            const double fs = f * f / (2 * G3);
            const double L = so2_momentum(s);
            dq_dp = -a * Vec4(2 * fs * L * q1 + f * p2, 2 * fs * L * q2 - f * p1, -f * q2, f * q1);
        }
    }
    return {dq_dp[2], dq_dp[3], -dq_dp[0], -dq_dp[1]};
}

/// Momentum-preserving dissipation: dp/dt = -((q.p) Gamma3 + Fl |q|^2) q.
inline Vec4 dissipation_field(const ReducedModel& m, const ReducedState& s) {
    const double G3 = chart_gamma3(s.r2());
    const double k = -((s.q1 * s.p1 + s.q2 * s.p2) * G3 + m.d.Fl * s.r2());
    return {0.0, 0.0, k * s.q1, k * s.q2};
}

/// Full reduced vector field plus eps times the dissipation.
inline Vec4 reduced_field(const ReducedModel& m, double eps, const ReducedState& s) {
    const Vec4 g = reduced_gradient(m.body, m.nu, s);
    Vec4 x(g[2], g[3], -g[0], -g[1]);
    if (eps != 0.0) x += eps * dissipation_field(m, s);
    return x;
}

namespace detail {

inline void guard_chart(double r2, double q_max, const char* who) {
    if (!(r2 < q_max * q_max)) throw ChartError(std::string(who) + ": left the chart guard |q| < q_max");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact flows
// ---------------------------------------------------------------------------

/// p <- p - t grad H0(q).
inline ReducedState flow_h0(double t, const ReducedState& s, const ReducedModel& m) {
    const Vec4 g = reduced_gradient(m.body, m.nu, {s.q1, s.q2, 0.0, 0.0});
    return {s.q1, s.q2, s.p1 - t * g[0], s.p2 - t * g[1]};
}

/// Geodesic flow on the unit sphere x = (q, Gamma3) for the metric whose
/// inverse is Fp (I - q q^T).
inline ReducedState flow_h1(double t, const ReducedState& s, const ReducedModel& m, double q_max = kDefaultQmax) {
    const double Fp = m.d.Fp;
    const double G3 = chart_gamma3(s.r2());
    const double qp = s.q1 * s.p1 + s.q2 * s.p2;
    const Vec3 x(s.q1, s.q2, G3);
    const double vq1 = Fp * (s.p1 - qp * s.q1), vq2 = Fp * (s.p2 - qp * s.q2);
    const Vec3 v(vq1, vq2, -(s.q1 * vq1 + s.q2 * vq2) / G3);
    const double w = v.norm();
    if (w == 0.0) return s;
    const double phi = w * t;
    const Vec3 e = v / w;

    // lowest point of x3 along the arc x3(a) = x3 cos a + e3 sin a, a between 0 and phi
    const double A = x.z(), B = e.z();
    const double R = std::hypot(A, B), ac = std::atan2(B, A);
    const double lo = std::min(0.0, phi), hi = std::max(0.0, phi);
    double x3min = std::min(A, A * std::cos(phi) + B * std::sin(phi));
    const double k0 = std::ceil((lo - ac - std::numbers::pi) / (2 * std::numbers::pi));
    if (ac + std::numbers::pi + 2 * std::numbers::pi * k0 <= hi) x3min = -R;
    const double x3_guard = std::sqrt(1.0 - q_max * q_max);
    if (!(x3min > x3_guard)) throw ChartError("flow_h1: geodesic arc leaves the chart guard");

    const double c = std::cos(phi), sn = std::sin(phi);
    const Vec3 xt = c * x + sn * e;
    const Vec3 vt = w * (c * e - sn * x);
    const double q1 = xt.x(), q2 = xt.y();
    const double g3 = chart_gamma3(q1 * q1 + q2 * q2);
    // p = g qdot with g = (I + q q^T / Gamma3^2) / Fp
    const double qv = (q1 * vt.x() + q2 * vt.y()) / (g3 * g3);
    return {q1, q2, (vt.x() + q1 * qv) / Fp, (vt.y() + q2 * qv) / Fp};
}

/// Radial flow: r f(r) grows like exp(Fp Fl t) along the ray of q, while
/// H2 and q1 p2 - q2 p1 fix p.
inline ReducedState flow_h2(double t, const ReducedState& s, const ReducedModel& m, double q_max = kDefaultQmax) {
    const double c = m.d.Fp * m.d.Fl;
    if (c == 0.0) return s;
    const double s2 = s.r2();
    const double G30 = chart_gamma3(s2);
    const double f0 = 1.0 / (1.0 + G30);
    const double growth = std::exp(c * t);
    const double rho0sq = s2 * f0 * f0;
    const double rhosq = rho0sq * growth * growth;
    if (!(rhosq < 1.0)) throw ChartError("flow_h2: radial flow leaves the chart");
    const double k = growth * (1.0 + rho0sq) / (1.0 + rhosq);  // r(t)/r(0)
    const double G3 = (1.0 - rhosq) / (1.0 + rhosq);
    const double q1 = k * s.q1, q2 = k * s.q2;
    detail::guard_chart(q1 * q1 + q2 * q2, q_max, "flow_h2");
    // radial part of p scales by Gamma3(0)/(k Gamma3), tangential part by 1/k
    double p1 = s.p1, p2 = s.p2;
    if (s2 > 0.0) {
        const double rad = (s.q1 * s.p1 + s.q2 * s.p2) / s2 * (G30 / G3 - 1.0);
        p1 += rad * s.q1;
        p2 += rad * s.q2;
    }
    return {q1, q2, p1 / k, p2 / k};
}

/// |q| is frozen, so q rotates uniformly at Fp nu_theta f(|q|^2) and p obeys
/// a linear equation driven by q.
inline ReducedState flow_h3(double t, const ReducedState& s, const ReducedModel& m) {
    const double a = m.d.Fp * m.nu.nu_theta;
    if (a == 0.0) return s;
    const double G3 = chart_gamma3(s.r2());
    const double f = 1.0 / (1.0 + G3);
    const double fs = f * f / (2 * G3);
    const double kappa = 2 * a * fs * so2_momentum(s);
    const double th = a * f * t;
    const double c = std::cos(th), sn = std::sin(th);
    // exp(th J) with J x = (x2, -x1)
    auto rot = [&](double x1, double x2) { return std::pair{c * x1 + sn * x2, -sn * x1 + c * x2}; };
    const auto [q1, q2] = rot(s.q1, s.q2);
    const auto [p1, p2] = rot(s.p1 + kappa * t * s.q1, s.p2 + kappa * t * s.q2);
    return {q1, q2, p1, p2};
}

/// Exact flow of eps times the dissipation field: q fixed, q.p relaxes
/// exponentially to -Fl |q|^2 / Gamma3, the part of p orthogonal to q is untouched.
inline ReducedState flow_dissipation(double t, const ReducedState& s, const ReducedModel& m, double eps) {
    const double s2 = s.r2();
    if (eps == 0.0 || s2 == 0.0) return s;
    const double G3 = chart_gamma3(s2);
    const double sigma = s.q1 * s.p1 + s.q2 * s.p2;
    const double target = -m.d.Fl * s2 / G3;
    const double dsig = (sigma - target) * std::expm1(-eps * s2 * G3 * t);
    return {s.q1, s.q2, s.p1 + dsig / s2 * s.q1, s.p2 + dsig / s2 * s.q2};
}

/// G F0 F3 F2 F1 F2 F3 F0 G with half steps everywhere except F1.
inline ReducedState step(const ReducedState& s0, const IntegratorConfig& cfg, const ReducedModel& m) {
    const double h = 0.5 * cfg.dt;
    ReducedState s = flow_dissipation(h, s0, m, cfg.eps);
    s = flow_h0(h, s, m);
    s = flow_h3(h, s, m);
    s = flow_h2(h, s, m, cfg.q_max);
    s = flow_h1(cfg.dt, s, m, cfg.q_max);
    s = flow_h2(h, s, m, cfg.q_max);
    s = flow_h3(h, s, m);
    s = flow_h0(h, s, m);
    return flow_dissipation(h, s, m, cfg.eps);
}

enum class Termination { completed, escaped, chart_violation };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::escaped: return "escaped";
        case Termination::chart_violation: return "chart_violation";
    }
    return "?";
}

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<ReducedState> states;
    std::vector<double> r;
    std::vector<double> dH;            // reduced energy minus its initial value
    std::vector<double> so2_momentum;
    double max_r = 0.0;                // over every step, not only samples
    long steps_taken = 0;
    Termination termination = Termination::completed;
    std::string message;
};

/// Runs n_steps of step(), sampling every sample_stride steps (and at the
/// end); stops early once r exceeds r_stop or a flow leaves the chart.
inline TrajectoryRecord integrate(const ReducedState& s0, const IntegratorConfig& cfg, const ReducedModel& m,
                                  long n_steps) {
    TrajectoryRecord rec;
    const double H0 = reduced_hamiltonian(m.body, m.nu, s0);
    auto sample = [&](long k, const ReducedState& s) {
        rec.times.push_back(k * cfg.dt);
        rec.states.push_back(s);
        rec.r.push_back(s.r());
        rec.dH.push_back(reduced_hamiltonian(m.body, m.nu, s) - H0);
        rec.so2_momentum.push_back(so2_momentum(s));
    };
    const long stride = std::max(1L, cfg.sample_stride);
    ReducedState s = s0;
    rec.max_r = s.r();
    sample(0, s);
    long k = 0;
    try {
        while (k < n_steps) {
            s = step(s, cfg, m);
            ++k;
            const double r = s.r();
            rec.max_r = std::max(rec.max_r, r);
            if (r > cfg.r_stop) {
                rec.termination = Termination::escaped;
                break;
            }
            if (k % stride == 0) sample(k, s);
        }
    } catch (const ChartError& e) {
        rec.termination = Termination::chart_violation;
        rec.message = e.what();
    }
    rec.steps_taken = k;
    if (rec.times.empty() || rec.times.back() != k * cfg.dt) sample(k, s);
    return rec;
}

/// Classical fourth-order Runge-Kutta step for any state type with + and scalar *.
template <typename State, typename Field>
State rk4_reference(const Field& field, const State& x, double dt) {
    const State k1 = field(x);
    const State k2 = field(x + k1 * (dt / 2));
    const State k3 = field(x + k2 * (dt / 2));
    const State k4 = field(x + k3 * dt);
    return x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6);
}

}  // namespace uvstab
