// Kirchhoff equations for a neutrally buoyant axisymmetric rigid body
// in ideal fluid, in impulse variables (Pi, P, Gamma).
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace uvstab {

using Vec3 = Eigen::Vector3d;

/// Physical constants of the vehicle (added masses include the fluid).
struct BodyParams {
    double I1 = 4.0;  ///< transverse added inertia
    double I3 = 1.0;  ///< axial added inertia
    double M1 = 1.0;  ///< transverse added mass
    double M3 = 0.5;  ///< axial added mass
    double m = 1.0;   ///< body mass
    double l = 1.0;   ///< signed centre-of-mass offset along the symmetry axis
    double g = 1.0;

    /// I1*M1 - m^2 l^2
    double det() const { return I1 * M1 - m * m * l * l; }
    double mgl() const { return m * g * l; }
};

/// Throws std::invalid_argument naming the first violated inequality.
inline void validate_params(const BodyParams& p) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string(what) + " violated");
    };
    require(p.I1 > 0, "I1 > 0");
    require(p.I3 > 0, "I3 > 0");
    require(p.M1 > 0, "M1 > 0");
    require(p.M3 > 0, "M3 > 0");
    require(p.det() > 0, "I1·M1 − m²l² > 0");
}

struct FullState {
    Vec3 Pi = Vec3::Zero();
    Vec3 P = Vec3::Zero();
    Vec3 Gamma = Vec3::UnitZ();

    FullState operator+(const FullState& o) const { return {Pi + o.Pi, P + o.P, Gamma + o.Gamma}; }
    FullState operator*(double s) const { return {Pi * s, P * s, Gamma * s}; }
};

struct EquilibriumSpec {
    double Pe = 0.0;
    double Se = 0.0;
};

struct Velocities {
    Vec3 Omega;
    Vec3 v;
};

/// Inverse Legendre transform (Pi, P) -> (Omega, v).
inline Velocities velocities_from_momenta(const BodyParams& p, const Vec3& Pi, const Vec3& P) {
    const double D = p.det();
    const double ml = p.m * p.l;
    Velocities out;
    out.Omega = {(p.M1 * Pi.x() + ml * P.y()) / D,
                 (p.M1 * Pi.y() - ml * P.x()) / D,
                 Pi.z() / p.I3};
    out.v = {(p.I1 * P.x() - ml * Pi.y()) / D,
             (p.I1 * P.y() + ml * Pi.x()) / D,
             P.z() / p.M3};
    return out;
}

/// Forward map: Pi = I Omega + ml e3 x v, P = M v - ml e3 x Omega.
inline std::pair<Vec3, Vec3> momenta_from_velocities(const BodyParams& p, const Vec3& Omega,
                                                     const Vec3& v) {
    const double ml = p.m * p.l;
    const Vec3 e3 = Vec3::UnitZ();
    Vec3 Pi(p.I1 * Omega.x(), p.I1 * Omega.y(), p.I3 * Omega.z());
    Vec3 P(p.M1 * v.x(), p.M1 * v.y(), p.M3 * v.z());
    Pi += ml * e3.cross(v);
    P -= ml * e3.cross(Omega);
    return {Pi, P};
}

inline double hamiltonian_full(const BodyParams& p, const FullState& s) {
    const double D = p.det();
    const double ml = p.m * p.l;
    const Vec3& Pi = s.Pi;
    const Vec3& P = s.P;
    return p.M1 / (2 * D) * (Pi.x() * Pi.x() + Pi.y() * Pi.y()) + Pi.z() * Pi.z() / (2 * p.I3) +
           p.I1 / (2 * D) * (P.x() * P.x() + P.y() * P.y()) + P.z() * P.z() / (2 * p.M3) +
           ml / D * (Pi.x() * P.y() - Pi.y() * P.x()) - p.mgl() * s.Gamma.z();
}

inline FullState full_vector_field(const BodyParams& p, const FullState& s) {
    const auto [Omega, v] = velocities_from_momenta(p, s.Pi, s.P);
    const Vec3 e3 = Vec3::UnitZ();
    FullState d;
    d.Pi = s.Pi.cross(Omega) + s.P.cross(v) - p.mgl() * s.Gamma.cross(e3);
    d.P = s.P.cross(Omega);
    d.Gamma = s.Gamma.cross(Omega);
    return d;
}

struct Casimirs {
    double P2;
    double PGamma;
    double Gamma2;
};

inline Casimirs casimirs(const FullState& s) {
    return {s.P.squaredNorm(), s.P.dot(s.Gamma), s.Gamma.squaredNorm()};
}

/// Vehicle spinning at Se/I3 and translating at Pe/M3 along the vertical axis.
inline FullState relative_equilibrium_state(const BodyParams&, const EquilibriumSpec& e) {
    return {e.Se * Vec3::UnitZ(), e.Pe * Vec3::UnitZ(), Vec3::UnitZ()};
}

}  // namespace uvstab
