// Canonical slice coordinates for the R^3 x SO(2)-reduced Kirchhoff system,
// the reduced Hamiltonians, and reconstruction back to (Pi, P, Gamma).
#pragma once

#include "uvstab/model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace uvstab {

struct ChartError : std::domain_error {
    using std::domain_error::domain_error;
};

using Vec4 = Eigen::Vector4d;

/// (q1, q2) are the horizontal components of Gamma, (p1, p2) conjugate.
struct ReducedState {
    double q1 = 0, q2 = 0, p1 = 0, p2 = 0;

    Vec4 vec() const { return {q1, q2, p1, p2}; }
    static ReducedState from(const Vec4& x) { return {x[0], x[1], x[2], x[3]}; }
    double r2() const { return q1 * q1 + q2 * q2; }
    double r() const { return std::sqrt(r2()); }
};

struct MomentumLevel {
    Vec3 nu_a = Vec3::Zero();
    double nu_theta = 0.0;

    bool is_vertical() const { return nu_a.x() == 0.0 && nu_a.y() == 0.0; }
};

/// Coefficients of the vertical-momentum Hamiltonian. mgl is carried along
/// for the potential term and the consolidated rescaling.
struct DerivedCoeffs {
    double Fp = 0, Fq = 0, Fl = 0;
    double mgl = 0;
};

inline DerivedCoeffs derived_coeffs(const BodyParams& p, double nu3) {
    return {p.M1 / p.det(), p.mgl() - nu3 * nu3 * (1.0 / p.M3 - 1.0 / p.M1), p.m * p.l * nu3 / p.M1,
            p.mgl()};
}

/// f1 > f2 > 0 are the mode frequencies of the gap, mu the potential weight.
template <typename T = double>
struct ConsolidatedParams {
    T f1{}, f2{}, mu{};
};

/// Gamma3 = sqrt(1 - s) for s = q1^2 + q2^2, throwing outside the chart.
template <typename T>
T chart_gamma3(T s) {
    if (!(s < T(1))) throw ChartError("attitude chart: q1² + q2² ≥ 1");
    using std::sqrt;
    return sqrt(T(1) - s);
}

/// A = I + xhat + f xhat^2 with x = (q2, -q1, 0) and f = 1/(1+Gamma3).
inline Eigen::Matrix3d attitude_matrix(double q1, double q2) {
    const double G3 = chart_gamma3(q1 * q1 + q2 * q2);
    const double f = 1.0 / (1.0 + G3);
    Eigen::Matrix3d X;
    X << 0, 0, -q1,
         0, 0, -q2,
         q1, q2, 0;
    return Eigen::Matrix3d::Identity() + X + f * X * X;
}

namespace detail {

// Pieces of the general reduced Hamiltonian shared by value and gradient.
struct RedTerms {
    double G3, f, fs;  // Gamma3, f(s), df/ds
    double pt1, pt2;   // shifted momenta
    double X;          // q2*pt1 - q1*pt2
    double gm;         // nu_a . (q1, q2, -Gamma3)
    double Fp, K, kd, mgl, c;
};

inline RedTerms red_terms(const BodyParams& bp, const MomentumLevel& nu, const ReducedState& s) {
    RedTerms t;
    t.G3 = chart_gamma3(s.r2());
    t.f = 1.0 / (1.0 + t.G3);
    t.fs = t.f * t.f / (2.0 * t.G3);
    const double D = bp.det();
    const double ml = bp.m * bp.l;
    t.c = ml / bp.M1;
    t.Fp = bp.M1 / D;
    t.K = 1.0 / bp.M3 - bp.I1 / D;
    t.kd = ml / D;
    t.mgl = bp.mgl();
    const Vec3& n = nu.nu_a;
    t.pt1 = s.p2 - t.f * s.q1 * nu.nu_theta - t.c * n.y();
    t.pt2 = -s.p1 - t.f * s.q2 * nu.nu_theta + t.c * n.x();
    t.X = s.q2 * t.pt1 - s.q1 * t.pt2;
    t.gm = n.x() * s.q1 + n.y() * s.q2 - n.z() * t.G3;
    return t;
}

}  // namespace detail

/// General reduced Hamiltonian at momentum level nu.
inline double reduced_hamiltonian(const BodyParams& bp, const MomentumLevel& nu, const ReducedState& s) {
    const auto t = detail::red_terms(bp, nu, s);
    const Vec3& n = nu.nu_a;
    return 0.5 * t.Fp * (t.pt1 * t.pt1 + t.pt2 * t.pt2 - t.X * t.X) + 0.5 * t.K * t.gm * t.gm +
           t.kd * (-t.X * t.gm + n.y() * t.pt1 - n.x() * t.pt2) - t.mgl * t.G3;
}

/// (dH/dq1, dH/dq2, dH/dp1, dH/dp2) of reduced_hamiltonian.
inline Vec4 reduced_gradient(const BodyParams& bp, const MomentumLevel& nu, const ReducedState& s) {
    const auto t = detail::red_terms(bp, nu, s);
    const Vec3& n = nu.nu_a;
    const double th = nu.nu_theta;
    const double q1 = s.q1, q2 = s.q2;

    // d(pt_i)/d(q_j); d(pt1)/dp2 = 1, d(pt2)/dp1 = -1
    const double a11 = -th * (t.f + 2 * q1 * q1 * t.fs);
    const double a12 = -th * 2 * q1 * q2 * t.fs;
    const double a21 = a12;
    const double a22 = -th * (t.f + 2 * q2 * q2 * t.fs);

    const double dX_q1 = q2 * a11 - t.pt2 - q1 * a21;
    const double dX_q2 = t.pt1 + q2 * a12 - q1 * a22;
    const double dX_p1 = q1;
    const double dX_p2 = q2;
    const double dg_q1 = n.x() + n.z() * q1 / t.G3;
    const double dg_q2 = n.y() + n.z() * q2 / t.G3;

    // dH = Fp(pt1 dpt1 + pt2 dpt2 - X dX) + K g dg + kd(-g dX - X dg + n2 dpt1 - n1 dpt2) - mgl dG3
    const double w1 = t.Fp * t.pt1 + t.kd * n.y();
    const double w2 = t.Fp * t.pt2 - t.kd * n.x();
    const double wX = -t.Fp * t.X - t.kd * t.gm;
    const double wg = t.K * t.gm - t.kd * t.X;

    Vec4 g;
    g[0] = w1 * a11 + w2 * a21 + wX * dX_q1 + wg * dg_q1 + t.mgl * q1 / t.G3;
    g[1] = w1 * a12 + w2 * a22 + wX * dX_q2 + wg * dg_q2 + t.mgl * q2 / t.G3;
    g[2] = -w2 + wX * dX_p1;
    g[3] = w1 + wX * dX_p2;
    return g;
}

/// Reduced Hamiltonian at vertical momentum nu_a = nu3 e3, normalised to vanish at the origin.
inline double reduced_hamiltonian_vertical(const BodyParams& bp, double nu3, double nu_theta,
                                           const ReducedState& s) {
    const auto d = derived_coeffs(bp, nu3);
    const double r2 = s.r2();
    const double G3 = chart_gamma3(r2);
    const double f = 1.0 / (1.0 + G3);
    const double qp = s.q1 * s.p1 + s.q2 * s.p2;
    const double a1 = s.p1 + d.Fl * G3 * s.q1 + nu_theta * f * s.q2;
    const double a2 = s.p2 + d.Fl * G3 * s.q2 - nu_theta * f * s.q1;
    return 0.5 * d.Fp * (a1 * a1 - qp * qp + a2 * a2) + 0.5 * d.Fq * r2 +
           d.mgl * (f - 0.5) * r2 + 0.5 * d.Fp * d.Fl * d.Fl * r2 * r2;
}

inline double so2_momentum(const ReducedState& s) { return s.q1 * s.p2 - s.q2 * s.p1; }

namespace detail {

inline Vec3 pi_from_shifted(const Eigen::Matrix3d& A, double pt1, double pt2, double nu_theta) {
    const Vec3 e3 = Vec3::UnitZ();
    const Vec3 pt(pt1, pt2, 0.0);
    return -e3.cross(A.transpose() * e3.cross(pt)) - nu_theta * e3;
}

}  // namespace detail

/// Body-frame (Pi, P, Gamma) of the slice point (q, p) at momentum level nu.
inline FullState reconstruct_full(const BodyParams& bp, const MomentumLevel& nu, const ReducedState& s) {
    const auto t = detail::red_terms(bp, nu, s);
    const Eigen::Matrix3d A = attitude_matrix(s.q1, s.q2);
    FullState out;
    out.Pi = detail::pi_from_shifted(A, t.pt1, t.pt2, nu.nu_theta);
    out.P = A.transpose() * nu.nu_a;
    out.Gamma = Vec3(s.q1, s.q2, t.G3);
    return out;
}

/// Angular velocity of the residual SO(2) phase about the symmetry axis:
/// derivative of the full energy of reconstruct_full with respect to nu_theta.
/// Integrating it alongside a reduced trajectory recovers the full one.
inline double phase_rate(const BodyParams& bp, const MomentumLevel& nu, const ReducedState& s) {
    const auto t = detail::red_terms(bp, nu, s);
    const Eigen::Matrix3d A = attitude_matrix(s.q1, s.q2);
    const FullState x = reconstruct_full(bp, nu, s);
    const Vec3 Omega = velocities_from_momenta(bp, x.Pi, x.P).Omega;
    const Vec3 e3 = Vec3::UnitZ();
    const Vec3 dpt(-t.f * s.q1, -t.f * s.q2, 0.0);
    const Vec3 dPi = -e3.cross(A.transpose() * e3.cross(dpt)) - e3;
    return Omega.dot(dPi);
}

/// Hamiltonian with the Fl term shifted away and the spin scaled to one.
template <typename T>
T consolidated_hamiltonian(const ConsolidatedParams<T>& cp, T q1, T q2, T u1, T u2) {
    const T s = q1 * q1 + q2 * q2;
    const T G3 = chart_gamma3(s);
    const T f = T(1) / (T(1) + G3);
    const T F = cp.f1 + cp.f2;
    const T a1 = u1 + f * q2;
    const T a2 = u2 - f * q1;
    const T t = q1 * u1 + q2 * u2;
    return F / 2 * (a1 * a1 - t * t + a2 * a2) - cp.f1 * cp.f2 / (2 * F) * s + cp.mu * (G3 + s / 2);
}

/// consolidated_hamiltonian minus its value mu at the origin, free of the
/// cancellation in Gamma3 - 1 for small q.
template <typename T>
T consolidated_energy_shifted(const ConsolidatedParams<T>& cp, T q1, T q2, T u1, T u2) {
    const T s = q1 * q1 + q2 * q2;
    const T G3 = chart_gamma3(s);
    const T f = T(1) / (T(1) + G3);
    const T F = cp.f1 + cp.f2;
    const T a1 = u1 + f * q2;
    const T a2 = u2 - f * q1;
    const T t = q1 * u1 + q2 * u2;
    return F / 2 * (a1 * a1 - t * t + a2 * a2) - cp.f1 * cp.f2 / (2 * F) * s - cp.mu * s * s * f * f / 2;
}

/// (dH/dq1, dH/dq2, dH/du1, dH/du2) of consolidated_hamiltonian.
template <typename T>
std::array<T, 4> consolidated_gradient(const ConsolidatedParams<T>& cp, T q1, T q2, T u1, T u2) {
    const T s = q1 * q1 + q2 * q2;
    const T G3 = chart_gamma3(s);
    const T f = T(1) / (T(1) + G3);
    const T fs = f * f / (2 * G3);
    const T F = cp.f1 + cp.f2;
    const T k = cp.f1 * cp.f2 / F;
    const T a1 = u1 + f * q2;
    const T a2 = u2 - f * q1;
    const T t = q1 * u1 + q2 * u2;
    const T pot = -cp.mu * s * f / G3;  // mu (1 - 1/Gamma3)
    return {F * (a1 * 2 * fs * q1 * q2 - a2 * (f + 2 * fs * q1 * q1) - t * u1) - k * q1 + pot * q1,
            F * (a1 * (f + 2 * fs * q2 * q2) - a2 * 2 * fs * q1 * q2 - t * u2) - k * q2 + pot * q2,
            F * (a1 - t * q1), F * (a2 - t * q2)};
}

struct NotInGapError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Gap-regime frequencies and potential weight at spin Se. With p = Se u the
/// vertical Hamiltonian becomes Se times the consolidated one, so f1, f2 are
/// the physical mode frequencies and mu = -mgl/Se.
inline ConsolidatedParams<double> consolidate_params(const DerivedCoeffs& d, double Se) {
    const double disc = d.Fp * d.Fp * Se * Se + 4 * d.Fp * d.Fq;
    if (!(disc > 0) || !(d.Fq < 0) || !(Se > 0))
        throw NotInGapError("consolidate_params: requires Fp²Se² + 4FpFq > 0, Fq < 0, Se > 0");
    const double root = std::sqrt(disc);
    return {0.5 * (d.Fp * Se + root), 0.5 * (d.Fp * Se - root), -d.mgl / Se};
}

}  // namespace uvstab
