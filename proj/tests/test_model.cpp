#include "support.hpp"

#include <gtest/gtest.h>

using namespace uvstab;
using namespace uvstab::testing;

namespace {

std::string validation_message(const BodyParams& p) {
    try {
        validate_params(p);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

// 9x9 Lie-Poisson structure matrix of the (Pi, P, Gamma) bracket.
Eigen::Matrix<double, 9, 9> structure_matrix(const FullState& s) {
    Eigen::Matrix<double, 9, 9> J = Eigen::Matrix<double, 9, 9>::Zero();
    J.block<3, 3>(0, 0) = hat(s.Pi);
    J.block<3, 3>(0, 3) = hat(s.P);
    J.block<3, 3>(0, 6) = hat(s.Gamma);
    J.block<3, 3>(3, 0) = hat(s.P);
    J.block<3, 3>(6, 0) = hat(s.Gamma);
    return J;
}

FullState rk4_full(const BodyParams& p, FullState s, double h, int n) {
    auto f = [&](const FullState& x) { return full_vector_field(p, x); };
    for (int i = 0; i < n; ++i) s = rk4_reference(f, s, h);
    return s;
}

}  // namespace

TEST(ValidateParams, NumparamsAccepted) { EXPECT_NO_THROW(validate_params(BodyParams{})); }

TEST(ValidateParams, DegenerateDeterminantNamed) {
    BodyParams p;
    p.I1 = 1;
    EXPECT_EQ(validation_message(p), "I1·M1 − m²l² > 0 violated");
}

TEST(ValidateParams, NegativeAxialMassNamed) {
    BodyParams p;
    p.M3 = -0.5;
    EXPECT_EQ(validation_message(p), "M3 > 0 violated");
}

TEST(Legendre, EquilibriumVelocities) {
    BodyParams p;
    p.I3 = 2.5;
    const auto [Omega, v] = velocities_from_momenta(p, 6 * Vec3::UnitZ(), 1.5 * Vec3::UnitZ());
    EXPECT_NEAR((Omega - Vec3(0, 0, 6 / 2.5)).norm(), 0, 1e-15);
    EXPECT_NEAR((v - Vec3(0, 0, 1.5 / 0.5)).norm(), 0, 1e-15);
}

TEST(Legendre, ZeroMomentaGiveZeroVelocities) {
    const auto [Omega, v] = velocities_from_momenta(BodyParams{}, Vec3::Zero(), Vec3::Zero());
    EXPECT_EQ(Omega.norm(), 0);
    EXPECT_EQ(v.norm(), 0);
}

TEST(Legendre, RoundTripThroughForwardMap) {
    const BodyParams p;
    for (int k = 0; k < 200; ++k) {
        const Vec3 Pi = random_vec3(3), P = random_vec3(3);
        const auto [Omega, v] = velocities_from_momenta(p, Pi, P);
        const auto [Pi2, P2] = momenta_from_velocities(p, Omega, v);
        EXPECT_LT((Pi2 - Pi).norm(), 1e-12);
        EXPECT_LT((P2 - P).norm(), 1e-12);
    }
}

TEST(HamiltonianFull, RestStateIsPotentialOnly) {
    const BodyParams p;
    EXPECT_DOUBLE_EQ(hamiltonian_full(p, FullState{}), -p.mgl());
}

TEST(HamiltonianFull, EquilibriumValue) {
    BodyParams p;
    p.I3 = 3;
    const double Pe = 1.5, Se = 6;
    const double expected = 0.5 * Se * Se / p.I3 + 0.5 * Pe * Pe / p.M3 - p.mgl();
    EXPECT_NEAR(hamiltonian_full(p, relative_equilibrium_state(p, {Pe, Se})), expected, 1e-13);
}

TEST(HamiltonianFull, MatchesVelocityForm) {
    const BodyParams p;
    for (int k = 0; k < 200; ++k) {
        const FullState s = random_full_state();
        const auto [Omega, v] = velocities_from_momenta(p, s.Pi, s.P);
        const double oracle = 0.5 * Omega.dot(s.Pi) + 0.5 * v.dot(s.P) - p.mgl() * s.Gamma.z();
        EXPECT_NEAR(hamiltonian_full(p, s), oracle, 1e-12);
    }
}

TEST(FullVectorField, EquilibriumIsFixedPoint) {
    const BodyParams p;
    const auto d = full_vector_field(p, relative_equilibrium_state(p, {1.5, 6}));
    EXPECT_LE(flat(d).norm(), 1e-14);
}

TEST(FullVectorField, MatchesBracketFormWithNumericGradient) {
    const BodyParams p;
    for (int k = 0; k < 50; ++k) {
        const FullState s = random_full_state();
        const auto x = flat(s);
        Eigen::Matrix<double, 9, 1> grad;
        const double h = 1e-4;  // H is quadratic, so central differences are exact up to rounding
        for (int i = 0; i < 9; ++i) {
            auto a = x, b = x;
            a[i] += h;
            b[i] -= h;
            grad[i] = (hamiltonian_full(p, unflat(a)) - hamiltonian_full(p, unflat(b))) / (2 * h);
        }
        const Eigen::Matrix<double, 9, 1> oracle = structure_matrix(s) * grad;
        EXPECT_LT((flat(full_vector_field(p, s)) - oracle).norm(), 1e-10);
    }
}

TEST(Casimirs, EquilibriumValues) {
    const auto c = casimirs(relative_equilibrium_state(BodyParams{}, {1.5, 6}));
    EXPECT_DOUBLE_EQ(c.P2, 2.25);
    EXPECT_DOUBLE_EQ(c.PGamma, 1.5);
    EXPECT_DOUBLE_EQ(c.Gamma2, 1.0);
}

TEST(Casimirs, OrthogonalUnitVectors) {
    FullState s;
    s.Gamma = Vec3::UnitX();
    s.P = Vec3::UnitY();
    const auto c = casimirs(s);
    EXPECT_EQ(c.P2, 1);
    EXPECT_EQ(c.PGamma, 0);
    EXPECT_EQ(c.Gamma2, 1);
}

TEST(Casimirs, ConservedAlongRk4Trajectory) {
    const BodyParams p;
    FullState s = relative_equilibrium_state(p, {1.5, 6});
    s.Pi += Vec3(0.05, -0.03, 0.0);
    s.Gamma = Vec3(0.1, 0.05, 1).normalized();
    const auto c0 = casimirs(s);
    const auto c1 = casimirs(rk4_full(p, s, 1e-3, 36000));  // about 10 linear periods
    EXPECT_LE(std::abs(c1.P2 - c0.P2), 1e-8);
    EXPECT_LE(std::abs(c1.PGamma - c0.PGamma), 1e-8);
    EXPECT_LE(std::abs(c1.Gamma2 - c0.Gamma2), 1e-8);
}

TEST(Conservation, Rk4DriftIsFourthOrder) {
    const BodyParams p;
    FullState s{Vec3(0.4, -0.3, 1.2), Vec3(0.2, 0.5, 1.0), Vec3(0.3, -0.2, 0.9).normalized()};
    const double H0 = hamiltonian_full(p, s);
    const auto c0 = casimirs(s);
    const double T = 4.0;
    auto drift = [&](double h) {
        const FullState e = rk4_full(p, s, h, static_cast<int>(std::lround(T / h)));
        const auto c = casimirs(e);
        return std::array<double, 4>{std::abs(hamiltonian_full(p, e) - H0), std::abs(c.P2 - c0.P2),
                                     std::abs(c.PGamma - c0.PGamma), std::abs(c.Gamma2 - c0.Gamma2)};
    };
    const auto a = drift(0.04), b = drift(0.02);
    for (int i = 0; i < 4; ++i) {
        if (a[i] < 1e-13) continue;  // quantity conserved exactly by RK4 (quadratic invariant)
        const double ratio = a[i] / b[i];
        EXPECT_GT(ratio, 16 * 0.7) << "quantity " << i;
        EXPECT_LT(ratio, 16 * 1.3) << "quantity " << i;
    }
}

TEST(Conservation, SubcasimirWithVerticalImpulse) {
    const BodyParams p;
    // vertical impulse in space: P parallel to Gamma in the body frame
    const Vec3 Gamma = Vec3(0.2, 0.1, 1).normalized();
    FullState s{Vec3(0.3, -0.2, 2.0), 1.5 * Gamma, Gamma};
    const double k0 = s.Pi.dot(s.Gamma);
    const double k1 = [&] {
        const FullState e = rk4_full(p, s, 0.01, 500);
        return e.Pi.dot(e.Gamma);
    }();
    EXPECT_LE(std::abs(k1 - k0), 1e-7);
}

TEST(RelativeEquilibrium, RestState) {
    const auto s = relative_equilibrium_state(BodyParams{}, {0, 0});
    EXPECT_EQ(s.Pi.norm(), 0);
    EXPECT_EQ(s.P.norm(), 0);
    EXPECT_EQ(s.Gamma, Vec3::UnitZ());
}

TEST(RelativeEquilibrium, NumparamsState) {
    const auto s = relative_equilibrium_state(BodyParams{}, {1.5, 6});
    EXPECT_EQ(s.Pi, Vec3(0, 0, 6));
    EXPECT_EQ(s.P, Vec3(0, 0, 1.5));
    EXPECT_EQ(s.Gamma, Vec3::UnitZ());
}
