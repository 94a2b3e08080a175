// Coefficient fields for invariant polynomials: exact rationals, the
// quadratic field Q(sqrt 2), and plain floating point.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <ostream>
#include <type_traits>

namespace uvstab {

using Rational = boost::multiprecision::cpp_rational;

/// a + b sqrt(2) with a, b in an exact field Q.
template <typename Q>
struct RootTwo {
    Q a{0}, b{0};

    RootTwo() = default;
    RootTwo(Q a_) : a(std::move(a_)) {}
    RootTwo(int a_) : a(a_) {}
    RootTwo(Q a_, Q b_) : a(std::move(a_)), b(std::move(b_)) {}

    friend RootTwo operator+(const RootTwo& x, const RootTwo& y) { return {x.a + y.a, x.b + y.b}; }
    friend RootTwo operator-(const RootTwo& x, const RootTwo& y) { return {x.a - y.a, x.b - y.b}; }
    friend RootTwo operator-(const RootTwo& x) { return {-x.a, -x.b}; }
    friend RootTwo operator*(const RootTwo& x, const RootTwo& y) {
        return {x.a * y.a + 2 * x.b * y.b, x.a * y.b + x.b * y.a};
    }
    friend RootTwo operator/(const RootTwo& x, const RootTwo& y) {
        const Q n = y.a * y.a - 2 * y.b * y.b;  // nonzero for y != 0 since sqrt 2 is irrational
        const RootTwo c{y.a / n, -y.b / n};
        return x * c;
    }
    RootTwo& operator+=(const RootTwo& y) { return *this = *this + y; }
    RootTwo& operator-=(const RootTwo& y) { return *this = *this - y; }
    RootTwo& operator*=(const RootTwo& y) { return *this = *this * y; }
    friend bool operator==(const RootTwo& x, const RootTwo& y) { return x.a == y.a && x.b == y.b; }

    double to_double() const {
        return static_cast<double>(a) + static_cast<double>(b) * std::sqrt(2.0);
    }
    friend std::ostream& operator<<(std::ostream& os, const RootTwo& x) {
        return os << x.a << " + " << x.b << "*sqrt2";
    }
};

/// Operations the polynomial code needs from a coefficient type.
template <typename C>
struct FieldTraits {
    static_assert(std::is_floating_point_v<C>);
    static C sqrt2() { using std::sqrt; return sqrt(C(2)); }
    static bool is_zero(const C& x) { return x == C(0); }
    static double magnitude(const C& x) { return static_cast<double>(x < 0 ? -x : x); }
    static constexpr bool exact = false;
};

template <>
struct FieldTraits<Rational> {
    static bool is_zero(const Rational& x) { return x == 0; }
    static double magnitude(const Rational& x) { return std::abs(static_cast<double>(x)); }
    static constexpr bool exact = true;
};

template <typename Q>
struct FieldTraits<RootTwo<Q>> {
    static RootTwo<Q> sqrt2() { return {Q(0), Q(1)}; }
    static bool is_zero(const RootTwo<Q>& x) { return x.a == 0 && x.b == 0; }
    static double magnitude(const RootTwo<Q>& x) { return std::abs(x.to_double()); }
    static constexpr bool exact = true;
};

}  // namespace uvstab
