// Polynomials in the SO(2) invariants w1..w4 of the two-mode normal form,
// kept modulo the relation 2 w1 w2 = w3^2 + w4^2.
#pragma once

#include "uvstab/normal_form/field.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

namespace uvstab {

/// Exponents (a, b, c, e) of w1^a w2^b w3^c w4^e.
using Monomial = std::array<int, 4>;

inline int degree(const Monomial& m) { return m[0] + m[1] + m[2] + m[3]; }

/// Canonical form keeps the exponent of w4 in {0, 1}; higher powers are
/// rewritten through w4^2 = 2 w1 w2 - w3^2.
template <typename C>
class InvariantPoly {
public:
    using Terms = std::map<Monomial, C>;

    InvariantPoly() = default;
    explicit InvariantPoly(Terms t) : terms_(std::move(t)) { prune(); }

    static InvariantPoly constant(const C& c) { return monomial({0, 0, 0, 0}, c); }
    static InvariantPoly monomial(const Monomial& m, const C& c = C(1)) {
        InvariantPoly p;
        p.terms_[m] = c;
        p.prune();
        return p;
    }
    /// The single invariant w_i, i = 1..4.
    static InvariantPoly w(int i) {
        Monomial m{0, 0, 0, 0};
        m.at(i - 1) = 1;
        return monomial(m);
    }

    const Terms& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    C coeff(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? C(0) : it->second;
    }

    int max_degree() const {
        int d = -1;
        for (const auto& [m, c] : terms_) d = std::max(d, degree(m));
        return d;
    }

    bool is_canonical() const {
        for (const auto& [m, c] : terms_)
            if (m[3] > 1) return false;
        return true;
    }

    /// True when only w1 and w2 occur.
    bool is_normal() const {
        for (const auto& [m, c] : terms_)
            if (m[2] != 0 || m[3] != 0) return false;
        return true;
    }

    InvariantPoly canonical() const {
        InvariantPoly out;
        for (const auto& [m, c] : terms_) out.add_reduced(m, c);
        out.prune();
        return out;
    }

    InvariantPoly homogeneous(int k) const {
        InvariantPoly out;
        for (const auto& [m, c] : terms_)
            if (degree(m) == k) out.terms_[m] = c;
        return out;
    }

    InvariantPoly truncated(int max_deg) const {
        InvariantPoly out;
        for (const auto& [m, c] : terms_)
            if (degree(m) <= max_deg) out.terms_[m] = c;
        return out;
    }

    /// Partial derivative in w_i, i = 1..4 (not canonicalized).
    InvariantPoly derivative(int i) const {
        const int k = i - 1;
        InvariantPoly out;
        for (const auto& [m, c] : terms_) {
            if (m[k] == 0) continue;
            Monomial n = m;
            n[k] -= 1;
            out.terms_[n] += c * C(m[k]);
        }
        out.prune();
        return out;
    }

    template <typename S>
    S evaluate(const std::array<S, 4>& w) const {
        S total(0);
        for (const auto& [m, c] : terms_) {
            S t = to_scalar<S>(c);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < m[i]; ++j) t *= w[i];
            total += t;
        }
        return total;
    }

    InvariantPoly& operator+=(const InvariantPoly& o) {
        for (const auto& [m, c] : o.terms_) terms_[m] += c;
        prune();
        return *this;
    }
    InvariantPoly& operator-=(const InvariantPoly& o) {
        for (const auto& [m, c] : o.terms_) terms_[m] -= c;
        prune();
        return *this;
    }
    friend InvariantPoly operator+(InvariantPoly x, const InvariantPoly& y) { return x += y; }
    friend InvariantPoly operator-(InvariantPoly x, const InvariantPoly& y) { return x -= y; }
    friend InvariantPoly operator-(const InvariantPoly& x) { return x * C(-1); }
    friend InvariantPoly operator*(const InvariantPoly& x, const C& s) {
        InvariantPoly out;
        for (const auto& [m, c] : x.terms_) out.terms_[m] = c * s;
        out.prune();
        return out;
    }
    friend InvariantPoly operator*(const C& s, const InvariantPoly& x) { return x * s; }
    /// Product, returned in canonical form.
    friend InvariantPoly operator*(const InvariantPoly& x, const InvariantPoly& y) {
        InvariantPoly out;
        for (const auto& [m, c] : x.terms_)
            for (const auto& [n, d] : y.terms_)
                out.add_reduced({m[0] + n[0], m[1] + n[1], m[2] + n[2], m[3] + n[3]}, c * d);
        out.prune();
        return out;
    }
    friend bool operator==(const InvariantPoly& x, const InvariantPoly& y) { return x.terms_ == y.terms_; }

    template <typename D>
    InvariantPoly<D> cast() const {
        typename InvariantPoly<D>::Terms t;
        for (const auto& [m, c] : terms_) t[m] = D(c);
        return InvariantPoly<D>(std::move(t));
    }

private:
    template <typename S>
    static S to_scalar(const C& c) {
        if constexpr (std::is_convertible_v<C, S>) return S(c);
        else return S(c.to_double());
    }

    void add_reduced(const Monomial& m, const C& c) {
        if (m[3] < 2) {
            terms_[m] += c;
            return;
        }
        // w4^e = w4^(e-2) (2 w1 w2 - w3^2)
        add_reduced({m[0] + 1, m[1] + 1, m[2], m[3] - 2}, c * C(2));
        add_reduced({m[0], m[1], m[2] + 2, m[3] - 2}, -c);
    }

    void prune() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (FieldTraits<C>::is_zero(it->second)) it = terms_.erase(it);
            else ++it;
        }
    }

    Terms terms_;
};

/// Bracket of the invariants:
/// {w1,w3} = {w2,w3} = w4, {w1,w4} = {w2,w4} = -w3, {w3,w4} = -(w1+w2), {w1,w2} = 0.
template <typename C>
InvariantPoly<C> structure_bracket(int i, int j) {
    using P = InvariantPoly<C>;
    if (i == j) return P{};
    if (i > j) return -structure_bracket<C>(j, i);
    if (i == 1 && j == 2) return P{};
    if (j == 3) return P::w(4);
    if (j == 4 && i <= 2) return -P::w(3);
    return -(P::w(1) + P::w(2));
}

template <typename C>
InvariantPoly<C> poisson_bracket_w(const InvariantPoly<C>& f, const InvariantPoly<C>& g) {
    std::array<InvariantPoly<C>, 4> df, dg;
    for (int i = 0; i < 4; ++i) {
        df[i] = f.derivative(i + 1);
        dg[i] = g.derivative(i + 1);
    }
    InvariantPoly<C> out;
    for (int i = 0; i < 4; ++i) {
        if (df[i].empty()) continue;
        for (int j = 0; j < 4; ++j) {
            if (i == j || dg[j].empty()) continue;
            const auto s = structure_bracket<C>(i + 1, j + 1);
            if (s.empty()) continue;
            out += df[i] * dg[j] * s;
        }
    }
    return out.canonical();
}

}  // namespace uvstab
