// Test-only oracles and random draws shared by the unit tests.
#pragma once

#include "uvstab/integrator.hpp"
#include "uvstab/model.hpp"
#include "uvstab/reduction.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>

namespace uvstab::testing {

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Vec3 random_vec3(double scale = 1.0) {
    return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
}

/// Point with |q| < qmax.
inline ReducedState random_state(double qmax = 0.6, double pscale = 0.5) {
    const double r = qmax * std::sqrt(uniform(0, 1)), a = uniform(0, 2 * std::numbers::pi);
    return {r * std::cos(a), r * std::sin(a), uniform(-pscale, pscale), uniform(-pscale, pscale)};
}

inline FullState random_full_state() {
    FullState s{random_vec3(2.0), random_vec3(2.0), random_vec3(1.0).normalized()};
    return s;
}

inline Eigen::Matrix3d hat(const Vec3& x) {
    Eigen::Matrix3d m;
    m << 0, -x.z(), x.y(),
         x.z(), 0, -x.x(),
         -x.y(), x.x(), 0;
    return m;
}

inline Eigen::Matrix<double, 9, 1> flat(const FullState& s) {
    Eigen::Matrix<double, 9, 1> v;
    v << s.Pi, s.P, s.Gamma;
    return v;
}

inline FullState unflat(const Eigen::Matrix<double, 9, 1>& v) {
    return {v.segment<3>(0), v.segment<3>(3), v.segment<3>(6)};
}

/// Central differences of a scalar function of 4 variables.
inline Vec4 fd_gradient(const std::function<double(const Vec4&)>& f, const Vec4& x, double h = 1e-6) {
    Vec4 g;
    for (int i = 0; i < 4; ++i) {
        Vec4 a = x, b = x;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(a) - f(b)) / (2 * h);
    }
    return g;
}

/// Hamiltonian field (dH/dp, -dH/dq) from a gradient (dH/dq, dH/dp).
inline Vec4 hamiltonian_field(const Vec4& grad) { return {grad[2], grad[3], -grad[0], -grad[1]}; }

/// n RK4 steps of size h on a Vec4 field.
inline Vec4 rk4_run(const std::function<Vec4(const Vec4&)>& field, Vec4 x, double h, int n) {
    for (int i = 0; i < n; ++i) x = rk4_reference(field, x, h);
    return x;
}

inline ReducedModel numparams_model(double Pe, double nu1 = 0.0, double nu2 = 0.0) {
    return ReducedModel(BodyParams{}, {Vec3(nu1, nu2, Pe), 6.0});
}

}  // namespace uvstab::testing
