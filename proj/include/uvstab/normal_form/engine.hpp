// Taylor expansion of the consolidated Hamiltonian in the invariants and its
// Lie-series normalization to a function of w1, w2.
#pragma once

#include "uvstab/normal_form/invariant_poly.hpp"
#include "uvstab/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace uvstab {

inline constexpr int kMaxInvariantDegree = 5;

struct ExpansionOrderError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct ResonanceError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Normal-mode coordinates (Q1, P1, Q2, P2) and the scaled phase space (q, u):
///   q1 = 2F(Q1 + P2), q2 = 2F(P1 + Q2), u1 = d(P1 - Q2), u2 = d(P2 - Q1)
/// with F = f1 + f2, d = f1 - f2. The map multiplies the symplectic form by
/// 4 F d, so frequencies in these coordinates carry that multiplier.
template <typename T>
struct ModeBasis {
    T F, d;

    explicit ModeBasis(const ConsolidatedParams<T>& cp) : F(cp.f1 + cp.f2), d(cp.f1 - cp.f2) {}

    T multiplier() const { return 4 * F * d; }

    /// (q1, q2, u1, u2) -> (Q1, P1, Q2, P2)
    std::array<T, 4> to_modes(T q1, T q2, T u1, T u2) const {
        const T a = q1 / (2 * F), b = q2 / (2 * F), c = u1 / d, e = u2 / d;
        return {(a - e) / 2, (b + c) / 2, (b - c) / 2, (a + e) / 2};
    }
    /// (Q1, P1, Q2, P2) -> (q1, q2, u1, u2)
    std::array<T, 4> from_modes(T Q1, T P1, T Q2, T P2) const {
        return {2 * F * (Q1 + P2), 2 * F * (P1 + Q2), d * (P1 - Q2), d * (P2 - Q1)};
    }
};

/// w1..w4 of a point in normal-mode coordinates.
template <typename T>
std::array<T, 4> invariants(T Q1, T P1, T Q2, T P2) {
    using std::sqrt;
    const T r2 = sqrt(T(2));
    return {(Q1 * Q1 + P1 * P1) / 2, (Q2 * Q2 + P2 * P2) / 2, (Q1 * Q2 - P1 * P2) / r2,
            (Q1 * P2 + Q2 * P1) / r2};
}

namespace detail {

// Power-series coefficients in s, through s^n, of sqrt(1 - s) and of
// f(s) = 1/(1 + sqrt(1 - s)) = (1 - sqrt(1 - s))/s.
template <typename P>
std::pair<std::vector<P>, std::vector<P>> chart_series(int n) {
    std::vector<P> sq(n + 2);
    sq[0] = P(1);
    // binom(1/2, k) (-1)^k, by the ratio (k - 3/2)/k
    for (int k = 1; k <= n + 1; ++k) sq[k] = sq[k - 1] * P(2 * k - 3) / P(2 * k);
    std::vector<P> f(n + 1);
    for (int k = 0; k <= n; ++k) f[k] = -sq[k + 1];
    sq.resize(n + 1);
    return {sq, f};
}

template <typename C>
InvariantPoly<C> compose_series(const std::vector<InvariantPoly<C>>& powers, const std::vector<C>& coef) {
    InvariantPoly<C> out;
    for (std::size_t k = 0; k < coef.size() && k < powers.size(); ++k) out += powers[k] * coef[k];
    return out;
}

}  // namespace detail

/// Consolidated Hamiltonian minus its constant mu, expanded through w-degree
/// max_degree. C is the coefficient field (must contain sqrt 2), P the
/// parameter type.
template <typename C, typename P>
InvariantPoly<C> taylor_invariant_expansion(const ConsolidatedParams<P>& cp, int max_degree) {
    if (max_degree < 1 || max_degree > kMaxInvariantDegree)
        throw ExpansionOrderError("taylor_invariant_expansion: max_degree must be in 1..5");
    using Poly = InvariantPoly<C>;
    const C F = C(cp.f1 + cp.f2), d = C(cp.f1 - cp.f2), mu = C(cp.mu);
    const C f1f2 = C(cp.f1 * cp.f2);
    const C r2 = FieldTraits<C>::sqrt2();
    const Poly w1 = Poly::w(1), w2 = Poly::w(2), w3 = Poly::w(3), w4 = Poly::w(4);

    // |q|^2, |u|^2, q.u and q1 u2 - q2 u1 in the invariants
    const Poly s = (w1 + w2 + w4 * r2) * (C(8) * F * F);
    const Poly uu = (w1 + w2 - w4 * r2) * (C(2) * d * d);
    const Poly t = w3 * (C(-4) * r2 * F * d);
    const Poly L = (w2 - w1) * (C(4) * F * d);

    const int n = max_degree;
    std::vector<Poly> sp(n + 1);
    sp[0] = Poly::constant(C(1));
    for (int k = 1; k <= n; ++k) sp[k] = (sp[k - 1] * s).truncated(n);

    const auto [sq_q, f_q] = detail::chart_series<Rational>(n);
    std::vector<C> sq(n + 1), fc(n + 1), f2c(n + 1);
    for (int k = 0; k <= n; ++k) {
        sq[k] = C(sq_q[k]);
        fc[k] = C(f_q[k]);
    }
    for (int k = 0; k <= n; ++k) {
        Rational acc = 0;
        for (int j = 0; j <= k; ++j) acc += f_q[j] * f_q[k - j];
        f2c[k] = C(acc);
    }
    const Poly f = detail::compose_series(sp, fc);
    const Poly ff = detail::compose_series(sp, f2c);
    const Poly root = detail::compose_series(sp, sq);

    Poly H = (uu + (s * ff).truncated(n) - (f * L).truncated(n) * C(2) - t * t) * (F / C(2));
    H -= s * (f1f2 / (C(2) * F));
    H += (root + s * (C(1) / C(2)) - Poly::constant(C(1))) * mu;
    return H.truncated(n).canonical();
}

namespace detail {

// L(g) = -w4 dg/dw3 + w3 dg/dw4, so that {g, H2} = (omega1 - omega2) L(g).
template <typename C>
InvariantPoly<C> rotation_operator(const InvariantPoly<C>& g) {
    using Poly = InvariantPoly<C>;
    return (g.derivative(4) * Poly::w(3) - g.derivative(3) * Poly::w(4)).canonical();
}

template <typename C>
std::vector<Monomial> canonical_monomials(int k) {
    std::vector<Monomial> out;
    for (int e = 0; e <= 1; ++e)
        for (int c = 0; c + e <= k; ++c)
            for (int a = 0; a + c + e <= k; ++a) out.push_back({a, k - a - c - e, c, e});
    return out;
}

// Solves A x = b over C by Gaussian elimination (largest-magnitude pivot).
template <typename C>
std::vector<C> solve_dense(std::vector<std::vector<C>> A, std::vector<C> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = n;
        double best = 0;
        for (std::size_t r = col; r < n; ++r) {
            if (FieldTraits<C>::is_zero(A[r][col])) continue;
            const double mag = FieldTraits<C>::magnitude(A[r][col]);
            if (piv == n || mag > best) {
                piv = r;
                best = mag;
            }
        }
        if (piv == n) throw ResonanceError("homological equation is singular");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            if (FieldTraits<C>::is_zero(A[r][col])) continue;
            const C m = A[r][col] / A[col][col];
            for (std::size_t j = col; j < n; ++j) A[r][j] -= m * A[col][j];
            b[r] -= m * b[col];
        }
    }
    std::vector<C> x(n);
    for (std::size_t i = n; i-- > 0;) {
        C acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= A[i][j] * x[j];
        x[i] = acc / A[i][i];
    }
    return x;
}

}  // namespace detail

/// exp(ad_G) H = H + {H, G} + {{H, G}, G}/2 + ..., truncated at max_degree.
template <typename C>
InvariantPoly<C> lie_transform(const InvariantPoly<C>& H, const InvariantPoly<C>& G, int max_degree) {
    InvariantPoly<C> out = H.truncated(max_degree);
    InvariantPoly<C> term = out;
    for (int n = 1; !term.empty(); ++n) {
        term = (poisson_bracket_w(term, G) * (C(1) / C(n))).truncated(max_degree);
        out += term;
    }
    return out;
}

template <typename C>
struct LieNormalization {
    InvariantPoly<C> Hnf;
    std::vector<InvariantPoly<C>> generators;  // one per degree 2..max_degree, empty when not needed
};

/// Removes w3, w4 from each degree 2..max_degree in turn. Requires the
/// degree-1 part to be omega1 w1 - omega2 w2 with omega1 != omega2.
template <typename C>
LieNormalization<C> lie_normalize(const InvariantPoly<C>& H, int max_degree) {
    const InvariantPoly<C> H2 = H.homogeneous(1);
    const C om1 = H2.coeff({1, 0, 0, 0});
    const C om2 = -H2.coeff({0, 1, 0, 0});
    // floating-point input may carry rounding residue in w3, w4
    const double tol = FieldTraits<C>::exact
                           ? 0.0
                           : 1e-12 * (FieldTraits<C>::magnitude(om1) + FieldTraits<C>::magnitude(om2));
    for (const auto& [m, c] : H2.terms())
        if (m[0] + m[1] != 1 && FieldTraits<C>::magnitude(c) > tol)
            throw std::invalid_argument("lie_normalize: quadratic part is not normal");
    const C gap = om1 - om2;
    if (FieldTraits<C>::is_zero(gap)) throw ResonanceError("lie_normalize: omega1 == omega2");

    LieNormalization<C> out;
    InvariantPoly<C> cur = H.canonical().truncated(max_degree) - H2 +
                           InvariantPoly<C>::w(1) * om1 - InvariantPoly<C>::w(2) * om2;
    for (int k = 2; k <= max_degree; ++k) {
        const InvariantPoly<C> K = cur.homogeneous(k);
        if (K.is_normal()) {
            out.generators.emplace_back();
            continue;
        }
        // unknowns: G on monomials with w3 or w4, N on pure (w1, w2) monomials;
        // equations: K + {H2, G} - N = K - gap L(G) - N = 0
        const auto mons = detail::canonical_monomials<C>(k);
        std::map<Monomial, std::size_t> row;
        for (std::size_t i = 0; i < mons.size(); ++i) row[mons[i]] = i;
        const std::size_t n = mons.size();
        std::vector<std::vector<C>> A(n, std::vector<C>(n, C(0)));
        std::vector<C> b(n, C(0));
        for (const auto& [m, c] : K.terms()) b[row.at(m)] = -c;
        for (std::size_t j = 0; j < n; ++j) {
            const Monomial& m = mons[j];
            if (m[2] == 0 && m[3] == 0) {
                A[j][j] = C(-1);
                continue;
            }
            const auto Lm = detail::rotation_operator(InvariantPoly<C>::monomial(m));
            for (const auto& [mm, c] : Lm.terms()) A[row.at(mm)][j] -= gap * c;
        }
        const auto x = detail::solve_dense(A, b);
        typename InvariantPoly<C>::Terms gt;
        for (std::size_t j = 0; j < n; ++j)
            if (mons[j][2] != 0 || mons[j][3] != 0) gt[mons[j]] = x[j];
        InvariantPoly<C> G(std::move(gt));
        cur = lie_transform(cur, G, max_degree);
        if constexpr (!FieldTraits<C>::exact) {
            // replace the degree-k block by the solved normal part, dropping rounding residue
            typename InvariantPoly<C>::Terms nt;
            for (std::size_t j = 0; j < n; ++j)
                if (mons[j][2] == 0 && mons[j][3] == 0) nt[mons[j]] = x[j];
            cur = cur - cur.homogeneous(k) + InvariantPoly<C>(std::move(nt));
        }
        out.generators.push_back(std::move(G));
    }
    out.Hnf = cur;
    return out;
}

}  // namespace uvstab
