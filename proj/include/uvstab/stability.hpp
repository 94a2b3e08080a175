// Stability regions of the vertical relative equilibrium and the linear
// algebra of 4-dimensional SO(2)-symmetric linearizations.
#pragma once

#include "uvstab/reduction.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

namespace uvstab {

using Mat4 = Eigen::Matrix4d;
using cplx = std::complex<double>;

enum class StabilityClass { EMRegion, Gap, SpectrallyUnstable, BoundaryC1, BoundaryC2 };

inline const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::EMRegion: return "EMRegion";
        case StabilityClass::Gap: return "Gap";
        case StabilityClass::SpectrallyUnstable: return "SpectrallyUnstable";
        case StabilityClass::BoundaryC1: return "BoundaryC1";
        case StabilityClass::BoundaryC2: return "BoundaryC2";
    }
    return "?";
}

struct Thresholds {
    double C1, C2;
};

/// Pe^2 < C1: energy-momentum confinement. Pe^2 < C2: spectral stability.
/// Without M1 > M3 the potential term never loses definiteness; both are +inf.
inline Thresholds thresholds(const BodyParams& p, double Se) {
    if (!(p.M1 > p.M3)) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    const double k = p.M1 * p.M3 / (p.M1 - p.M3);
    const double C1 = k * p.mgl();
    return {C1, C1 + k * p.M1 * Se * Se / (4 * p.det())};
}

inline constexpr double kBoundaryTol = 1e-12;

inline StabilityClass classify(const BodyParams& p, double Pe, double Se) {
    const auto [C1, C2] = thresholds(p, Se);
    const double P2 = Pe * Pe;
    if (std::isinf(C1)) return StabilityClass::EMRegion;
    if (std::abs(P2 - C1) <= kBoundaryTol) return StabilityClass::BoundaryC1;
    if (std::abs(P2 - C2) <= kBoundaryTol) return StabilityClass::BoundaryC2;
    if (P2 < C1) return StabilityClass::EMRegion;
    if (P2 < C2) return StabilityClass::Gap;
    return StabilityClass::SpectrallyUnstable;
}

/// Symplectic structure matrix in (q1, q2, p1, p2).
inline Mat4 symplectic_J() {
    Mat4 J = Mat4::Zero();
    J.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity();
    J.block<2, 2>(2, 0) = -Eigen::Matrix2d::Identity();
    return J;
}

/// Hessian of q1 p2 - q2 p1.
inline Mat4 momentum_hessian() {
    Mat4 M = Mat4::Zero();
    M(0, 3) = M(3, 0) = 1;
    M(1, 2) = M(2, 1) = -1;
    return M;
}

/// Hessian at q = p = 0 of the vertical reduced Hamiltonian with nu3 = Pe, nu_theta = Se.
inline Mat4 vertical_hessian(const BodyParams& p, double Pe, double Se) {
    const auto d = derived_coeffs(p, Pe);
    // quadratic part: Fp/2 |B x|^2 + Fq/2 |q|^2
    Eigen::Matrix<double, 2, 4> B;
    B << d.Fl, Se / 2, 1, 0,
         -Se / 2, d.Fl, 0, 1;
    Mat4 H = d.Fp * B.transpose() * B;
    H(0, 0) += d.Fq;
    H(1, 1) += d.Fq;
    return H;
}

inline Mat4 vertical_linearization(const BodyParams& p, double Pe, double Se) {
    return symplectic_J() * vertical_hessian(p, Pe, Se);
}

struct SpectrumReport {
    std::array<cplx, 4> eigenvalues{};
    double max_real_part = 0;
    std::optional<std::pair<double, double>> frequencies;  // (larger, smaller) when elliptic
};

inline constexpr double kEllipticTol = 1e-10;

namespace detail {

inline SpectrumReport finish_report(std::array<cplx, 4> ev) {
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
        return a.imag() != b.imag() ? a.imag() > b.imag() : a.real() > b.real();
    });
    SpectrumReport r;
    r.eigenvalues = ev;
    r.max_real_part = -std::numeric_limits<double>::infinity();
    bool elliptic = true;
    for (auto z : ev) {
        r.max_real_part = std::max(r.max_real_part, z.real());
        if (std::abs(z.real()) > kEllipticTol || std::abs(z) == 0.0) elliptic = false;
    }
    if (elliptic) {
        std::array<double, 4> a;
        for (int i = 0; i < 4; ++i) a[i] = std::abs(ev[i].imag());
        std::sort(a.begin(), a.end());
        r.frequencies = std::make_pair(a[3], a[1]);
    }
    return r;
}

}  // namespace detail

/// Closed-form roots of lambda^2 + i Fp Se lambda + Fp Fq and their conjugates.
inline SpectrumReport linear_spectrum(const BodyParams& p, double Pe, double Se) {
    const auto d = derived_coeffs(p, Pe);
    const cplx root = std::sqrt(cplx(-d.Fp * d.Fp * Se * Se - 4 * d.Fp * d.Fq, 0.0));
    const cplx base(0.0, -d.Fp * Se);
    const cplx l1 = 0.5 * (base + root), l2 = 0.5 * (base - root);
    return detail::finish_report({l1, l2, std::conj(l1), std::conj(l2)});
}

inline SpectrumReport dense_spectrum(const Mat4& L) {
    Eigen::EigenSolver<Mat4> es(L, false);
    std::array<cplx, 4> ev;
    for (int i = 0; i < 4; ++i) ev[i] = es.eigenvalues()[i];
    return detail::finish_report(ev);
}

/// Frequency omega of one elliptic eigenvalue pair, signed by the Hessian on
/// its real eigenspace, together with the SO(2) type from the momentum form.
struct KreinMode {
    double signed_frequency;
    int type;
};

/// For a semisimple elliptic J*H, one KreinMode per eigenvalue pair +-i omega.
inline std::vector<KreinMode> krein_modes(const Mat4& H, const Mat4& Jm = momentum_hessian()) {
    Eigen::EigenSolver<Mat4> es(symplectic_J() * H, true);
    std::vector<KreinMode> out;
    for (int i = 0; i < 4; ++i) {
        const cplx lam = es.eigenvalues()[i];
        if (!(lam.imag() > 0) || std::abs(lam.real()) > kEllipticTol * std::max(1.0, std::abs(lam))) continue;
        const Eigen::Vector4cd v = es.eigenvectors().col(i);
        const Eigen::Vector4d a = v.real(), b = v.imag();
        const double h = a.dot(H * a) + b.dot(H * b);
        const double j = a.dot(Jm * a) + b.dot(Jm * b);
        const int type = std::abs(j) < 1e-12 * (a.squaredNorm() + b.squaredNorm()) ? 0 : (j > 0 ? 1 : -1);
        out.push_back({h > 0 ? lam.imag() : -lam.imag(), type});
    }
    std::sort(out.begin(), out.end(),
              [](const KreinMode& x, const KreinMode& y) { return x.signed_frequency < y.signed_frequency; });
    return out;
}

struct ResonanceVerdict {
    bool formally_stable = false;
    std::optional<double> lambda;  // (omega1 + lambda n1, omega2 + lambda n2) in one open quadrant
};

/// Formal stability of an SO(2)-symmetric elliptic equilibrium with
/// frequencies omega1 < 0 < omega2 and action types (n1, n2).
inline ResonanceVerdict resonance_formal_stability(double omega1, double omega2, int n1, int n2) {
    if (!(omega1 < 0 && 0 < omega2)) throw std::invalid_argument("requires omega1 < 0 < omega2");
    if (n1 == 0 && n2 == 0) throw std::invalid_argument("requires (n1, n2) != (0, 0)");
    const double det = omega1 * n2 - omega2 * n1;
    const double scale = (std::abs(omega1) + std::abs(omega2)) * (std::abs(n1) + std::abs(n2));
    if (std::abs(det) <= 1e-12 * scale) return {false, std::nullopt};
    // The line meets the open quadrant on an interval; take its midpoint.
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    auto constrain = [&](double w, int n, int sign) {
        // sign * (w + lambda n) > 0
        if (n == 0) return sign * w > 0;
        const double c = -w / n;
        if (sign * n > 0) lo = std::max(lo, c);
        else hi = std::min(hi, c);
        return true;
    };
    for (int sign : {1, -1}) {
        lo = -std::numeric_limits<double>::infinity();
        hi = std::numeric_limits<double>::infinity();
        if (!constrain(omega1, n1, sign) || !constrain(omega2, n2, sign)) continue;
        if (lo < hi) {
            double lam;
            if (std::isinf(lo)) lam = hi - 1.0;
            else if (std::isinf(hi)) lam = lo + 1.0;
            else lam = 0.5 * (lo + hi);
            return {true, lam};
        }
    }
    return {true, std::nullopt};
}

inline bool is_positive_definite(const Mat4& A) {
    Eigen::LLT<Mat4> llt(A);
    return llt.info() == Eigen::Success;
}

inline bool is_definite(const Mat4& A) { return is_positive_definite(A) || is_positive_definite(-A); }

/// Searches the line H + lambda M for a definite member. Definiteness can only
/// change where det(H + lambda M) = 0, so the candidates are the midpoints
/// between consecutive real roots plus one point beyond each end.
inline std::optional<double> formal_stability_search(const Mat4& H, const Mat4& M) {
    std::vector<double> roots;
    Eigen::GeneralizedEigenSolver<Mat4> ges(H, -M);
    for (int i = 0; i < 4; ++i) {
        const cplx a = ges.alphas()[i];
        const double b = ges.betas()[i];
        if (b == 0.0 || std::abs(a.imag()) > 1e-9 * std::abs(a)) continue;
        roots.push_back(a.real() / b);
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> cand;
    if (roots.empty()) {
        cand.push_back(0.0);
    } else {
        const double span = std::max(1.0, roots.back() - roots.front());
        cand.push_back(roots.front() - span);
        for (std::size_t i = 0; i + 1 < roots.size(); ++i) cand.push_back(0.5 * (roots[i] + roots[i + 1]));
        cand.push_back(roots.back() + span);
    }
    for (double lam : cand)
        if (is_definite(H + lam * M)) return lam;
    return std::nullopt;
}

struct HopfDiscriminant {
    double D;
    std::array<cplx, 2> eigenvalues;  // i Im(a) +- sqrt(D)
};

inline HopfDiscriminant hopf_discriminant(cplx a, double b, double c) {
    const double D = a.real() * a.real() + b * c;
    const cplx r = std::sqrt(cplx(D, 0.0));
    const cplx base(0.0, a.imag());
    return {D, {base + r, base - r}};
}

/// Equivariant blocks (a, b, c) of a 4x4 linearization written in a Lagrangian
/// splitting where SO(2) rotates both planes the same way; a 2x2 block
/// [[x, -y], [y, x]] is read as x + i y.
struct HopfBlocks {
    cplx a;
    double b, c;
};

inline HopfBlocks hopf_blocks(const Mat4& L) { return {cplx(L(0, 0), L(1, 0)), L(0, 2), L(2, 0)}; }

}  // namespace uvstab
