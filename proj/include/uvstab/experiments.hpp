// Batch experiments behind the command line tool: region classification,
// long dissipative runs, Pe sweeps, equilibrium continuation and the
// normal-form period table. Every command writes to a caller-supplied stream.
#pragma once

#include "uvstab/integrator.hpp"
#include "uvstab/normal_form/coefficients.hpp"
#include "uvstab/normal_form/period.hpp"
#include "uvstab/stability.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace uvstab {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    BodyParams body;
    double Se = 6.0;
    std::vector<double> Pe{1.5};
    std::vector<double> eps{0.05};
    double q1_0 = 0.0125;
    double nua1_0 = 0.0025;
    double periods = 1e4;
    // steps per linear period; unset means the fixed step kPaperDt
    std::optional<double> dt_per_period;
    std::uint64_t seed = 0;
};

/// Fixed step used for the long single runs.
inline constexpr double kPaperDt = 0.04453;
inline constexpr double kSweepStepsPerPeriod = 40;

inline void validate(const ExperimentConfig& c) {
    validate_params(c.body);
    if (!(c.Se > 0)) throw ConfigError("Se > 0 violated");
    if (c.Pe.empty()) throw ConfigError("Pe grid is empty");
    if (c.eps.empty()) throw ConfigError("eps list is empty");
    for (double e : c.eps)
        if (!(e >= 0)) throw ConfigError("eps >= 0 violated");
    for (double p : c.Pe)
        if (!std::isfinite(p)) throw ConfigError("Pe must be finite");
    if (!(c.periods > 0)) throw ConfigError("periods > 0 violated");
    if (c.dt_per_period && !(*c.dt_per_period > 0)) throw ConfigError("dt_per_period > 0 violated");
    if (!(std::abs(c.q1_0) < 0.5)) throw ConfigError("|q1_0| < 0.5 violated");
}

// ---------------------------------------------------------------------------
// Config I/O
// ---------------------------------------------------------------------------

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
    return j.get<double>();
}

inline std::vector<double> json_number_list(const nlohmann::json& j, const std::string& key) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ConfigError("'" + key + "' must be a number or a list of numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(json_number(x, key));
    return out;
}

inline std::vector<double> json_pe_grid(const nlohmann::json& j) {
    if (!j.is_object()) return json_number_list(j, "Pe");
    for (const auto& [k, v] : j.items())
        if (k != "min" && k != "max" && k != "count") throw ConfigError("unknown key 'Pe." + k + "'");
    if (!j.contains("min") || !j.contains("max") || !j.contains("count"))
        throw ConfigError("Pe grid needs min, max and count");
    const double lo = json_number(j["min"], "Pe.min"), hi = json_number(j["max"], "Pe.max");
    if (!j["count"].is_number_integer() || j["count"].get<long>() < 1)
        throw ConfigError("'Pe.count' must be a positive integer");
    const long n = j["count"].get<long>();
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (long i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

}  // namespace detail

/// Overlays the keys of a JSON object onto cfg. Unknown keys are errors.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "I1") cfg.body.I1 = detail::json_number(v, key);
        else if (key == "I3") cfg.body.I3 = detail::json_number(v, key);
        else if (key == "M1") cfg.body.M1 = detail::json_number(v, key);
        else if (key == "M3") cfg.body.M3 = detail::json_number(v, key);
        else if (key == "m") cfg.body.m = detail::json_number(v, key);
        else if (key == "l") cfg.body.l = detail::json_number(v, key);
        else if (key == "g") cfg.body.g = detail::json_number(v, key);
        else if (key == "Se") cfg.Se = detail::json_number(v, key);
        else if (key == "Pe") cfg.Pe = detail::json_pe_grid(v);
        else if (key == "eps") cfg.eps = detail::json_number_list(v, key);
        else if (key == "q1_0") cfg.q1_0 = detail::json_number(v, key);
        else if (key == "nua1_0") cfg.nua1_0 = detail::json_number(v, key);
        else if (key == "periods") cfg.periods = detail::json_number(v, key);
        else if (key == "dt_per_period") {
            if (v.is_null()) cfg.dt_per_period.reset();
            else cfg.dt_per_period = detail::json_number(v, key);
        } else if (key == "seed") {
            if (!v.is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
            cfg.seed = v.get<std::uint64_t>();
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    apply_json(base, j);
    return base;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"gap-run", "em-run", "pe-sweep", "nf-table"};
    return names;
}

/// Full-length run profiles. gap-run and em-run are single long runs from the
/// largest perturbation of their series; pe-sweep is the 57-point Pe grid;
/// nf-table is the eps list of the period check.
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    if (name == "gap-run") {
        c.Pe = {1.5};
        c.eps = {0.05};
        c.q1_0 = 0.05;
        c.nua1_0 = 0.01;
        c.periods = 3e5;
    } else if (name == "em-run") {
        c.Pe = {0.5};
        c.eps = {0.1};
        c.q1_0 = 0.05 / std::numbers::sqrt2;
        c.nua1_0 = 0.01 / std::numbers::sqrt2;
        c.periods = 1.2e6;
    } else if (name == "pe-sweep") {
        c.Pe = detail::json_pe_grid({{"min", 0.8}, {"max", 2.2}, {"count", 57}});
        c.eps = {0.05};
        c.q1_0 = 0.0125;
        c.nua1_0 = 0.0025;
        c.periods = 1.2e6;
        c.dt_per_period = kSweepStepsPerPeriod;
    } else if (name == "nf-table") {
        c.eps = {1e-4, 2e-4, 4e-4, 8e-4, 16e-4};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

/// 2 pi / omega with omega the largest |imaginary part| of the spectrum at the origin.
inline double linear_period(const BodyParams& b, double Pe, double Se) {
    const auto sp = linear_spectrum(b, Pe, Se);
    double w = 0;
    for (auto z : sp.eigenvalues) w = std::max(w, std::abs(z.imag()));
    if (w == 0) throw std::domain_error("linear_period: no oscillatory mode");
    return 2 * std::numbers::pi / w;
}

inline ReducedModel model_at(const ExperimentConfig& c, double Pe) {
    return ReducedModel(c.body, {Vec3(c.nua1_0, 0.0, Pe), c.Se});
}

/// "%.15g"
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

/// Runs body(i) for i in [0, n) on a small pool; body must only touch slot i.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

inline nlohmann::json classify_report(const ExperimentConfig& c, double Pe) {
    using nlohmann::json;
    const auto [C1, C2] = thresholds(c.body, c.Se);
    const auto region = classify(c.body, Pe, c.Se);
    const auto sp = linear_spectrum(c.body, Pe, c.Se);
    json out;
    out["Pe"] = Pe;
    out["Se"] = c.Se;
    out["C1"] = C1;
    out["C2"] = C2;
    out["region"] = to_string(region);
    json ev = json::array();
    for (auto z : sp.eigenvalues) ev.push_back({z.real(), z.imag()});
    out["eigenvalues"] = ev;
    out["max_real_part"] = sp.max_real_part;
    if (sp.frequencies) out["frequencies"] = {sp.frequencies->first, sp.frequencies->second};
    else out["frequencies"] = nullptr;

    switch (region) {
        case StabilityClass::EMRegion: out["verdict"] = "EM-stable"; break;
        case StabilityClass::SpectrallyUnstable: out["verdict"] = "unstable"; break;
        case StabilityClass::Gap: {
            const auto cp = consolidate_params(derived_coeffs(c.body, Pe), c.Se);
            const auto tw = twist_determinants(cp);
            out["f1"] = cp.f1;
            out["f2"] = cp.f2;
            out["mu"] = cp.mu;
            out["D4"] = tw.D4;
            out["D6"] = tw.D6;
            out["D8"] = tw.D8;
            if (tw.first_nonzero) {
                out["first_nonzero_twist"] = 2 * *tw.first_nonzero;
                out["verdict"] = "KAM-stable";
            } else {
                out["first_nonzero_twist"] = nullptr;
                out["verdict"] = "undetermined";
            }
            break;
        }
        default: out["verdict"] = "boundary"; break;
    }
    return out;
}

/// One JSON object per Pe, as an array.
inline void cmd_classify(const ExperimentConfig& c, std::ostream& os) {
    validate(c);
    nlohmann::json all = nlohmann::json::array();
    for (double Pe : c.Pe) all.push_back(classify_report(c, Pe));
    os << all.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline IntegratorConfig integrator_config(const ExperimentConfig& c, double Pe, double eps) {
    IntegratorConfig ic;
    const double period = linear_period(c.body, Pe, c.Se);
    ic.dt = c.dt_per_period ? period / *c.dt_per_period : kPaperDt;
    ic.eps = eps;
    ic.sample_stride = std::max(1L, std::lround(period / ic.dt));
    return ic;
}

inline long steps_for(const ExperimentConfig& c, double Pe, const IntegratorConfig& ic) {
    return std::lround(c.periods * linear_period(c.body, Pe, c.Se) / ic.dt);
}

/// Single run at Pe[0], eps[0], sampled once per linear period. The last
/// line is a comment carrying the termination status.
inline TrajectoryRecord cmd_simulate(const ExperimentConfig& c, std::ostream& os) {
    validate(c);
    if (c.Pe.size() != 1 || c.eps.size() != 1) throw ConfigError("simulate takes a single Pe and a single eps");
    const double Pe = c.Pe[0];
    const auto ic = integrator_config(c, Pe, c.eps[0]);
    const auto rec = integrate({c.q1_0, 0.0, 0.0, 0.0}, ic, model_at(c, Pe), steps_for(c, Pe, ic));
    os << "t,q1,q2,p1,p2,r,dH,so2_momentum\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        const auto& s = rec.states[i];
        os << fmt(rec.times[i]) << ',' << fmt(s.q1) << ',' << fmt(s.q2) << ',' << fmt(s.p1) << ',' << fmt(s.p2) << ','
           << fmt(rec.r[i]) << ',' << fmt(rec.dH[i]) << ',' << fmt(rec.so2_momentum[i]) << '\n';
    }
    os << "# termination: " << to_string(rec.termination);
    if (!rec.message.empty()) os << " (" << rec.message << ")";
    os << '\n';
    return rec;
}

// ---------------------------------------------------------------------------
// continue
// ---------------------------------------------------------------------------

struct ContinuationRow {
    double Pe = 0;
    ReducedState equilibrium;
    int iterations = 0;
    bool converged = false;
    std::array<double, 4> real_parts{};  // descending
    double max_real_part = 0;
    bool sign_confirmed = false;  // same sign of max_real_part with the second difference step
};

inline constexpr double kNewtonTol = 1e-12;
inline constexpr int kNewtonMaxIter = 50;
inline constexpr double kFdStep = 1e-7;
inline constexpr double kFdStepCheck = 1e-6;
// real parts this small count as zero when comparing the two difference steps
inline constexpr double kZeroRealTol = 1e-9;

inline Mat4 fd_jacobian(const ReducedModel& m, double eps, const Vec4& x, double h) {
    Mat4 J;
    for (int j = 0; j < 4; ++j) {
        Vec4 a = x, b = x;
        a[j] += h;
        b[j] -= h;
        J.col(j) = (reduced_field(m, eps, ReducedState::from(a)) - reduced_field(m, eps, ReducedState::from(b))) / (2 * h);
    }
    return J;
}

/// Newton from q = p = 0 on the full field including eps R; spectrum of the
/// central-difference Jacobian at the root. A row that leaves the chart or
/// fails to converge carries NaN real parts.
inline ContinuationRow continue_equilibrium(const ReducedModel& m, double eps) {
    ContinuationRow row;
    row.Pe = m.nu.nu_a.z();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.real_parts.fill(nan);
    row.max_real_part = nan;
    Vec4 x = Vec4::Zero();
    try {
        for (int it = 1; it <= kNewtonMaxIter; ++it) {
            const Vec4 F = reduced_field(m, eps, ReducedState::from(x));
            row.iterations = it;
            if (F.norm() <= kNewtonTol) {
                row.converged = true;
                break;
            }
            const Vec4 dx = fd_jacobian(m, eps, x, kFdStep).fullPivLu().solve(-F);
            if (!dx.allFinite()) break;
            x += dx;
            if (dx.norm() <= kNewtonTol * std::max(1.0, x.norm())) {
                row.converged = reduced_field(m, eps, ReducedState::from(x)).norm() <= 1e3 * kNewtonTol;
                break;
            }
        }
        row.equilibrium = ReducedState::from(x);
        if (!row.converged) return row;
        const auto sp = dense_spectrum(fd_jacobian(m, eps, x, kFdStep));
        for (int i = 0; i < 4; ++i) row.real_parts[i] = sp.eigenvalues[i].real();
        std::sort(row.real_parts.begin(), row.real_parts.end(), std::greater<>());
        row.max_real_part = sp.max_real_part;
        const double check = dense_spectrum(fd_jacobian(m, eps, x, kFdStepCheck)).max_real_part;
        auto sign = [](double v) { return v > kZeroRealTol ? 1 : (v < -kZeroRealTol ? -1 : 0); };
        row.sign_confirmed = sign(check) == sign(row.max_real_part);
    } catch (const ChartError&) {
        row.converged = false;
        row.equilibrium = ReducedState::from(x);
    }
    return row;
}

inline std::vector<ContinuationRow> continuation(const ExperimentConfig& c, double eps) {
    std::vector<ContinuationRow> rows(c.Pe.size());
    parallel_for(rows.size(), [&](std::size_t i) { rows[i] = continue_equilibrium(model_at(c, c.Pe[i]), eps); });
    return rows;
}

/// Rows in config order for every eps in the list.
inline void cmd_continue(const ExperimentConfig& c, std::ostream& os) {
    validate(c);
    os << "eps,Pe,q1,q2,p1,p2,iterations,converged,re1,re2,re3,re4,max_real_part,sign_confirmed\n";
    for (double eps : c.eps) {
        for (const auto& r : continuation(c, eps)) {
            const auto& s = r.equilibrium;
            os << fmt(eps) << ',' << fmt(r.Pe) << ',' << fmt(s.q1) << ',' << fmt(s.q2) << ',' << fmt(s.p1) << ','
               << fmt(s.p2) << ',' << r.iterations << ',' << (r.converged ? 1 : 0);
            for (double x : r.real_parts) os << ',' << fmt(x);
            os << ',' << fmt(r.max_real_part) << ',' << (r.sign_confirmed ? 1 : 0) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double Pe = 0;
    double max_r = 0;
    double max_real_part = 0;
    Termination termination = Termination::completed;
    double model_time = 0;
    std::string error;  // set when the row itself failed
};

/// Each Pe runs c.periods linear periods at 40 steps per period from
/// (q1_0, nua1_0). Rows come back in grid order.
inline std::vector<SweepRow> sweep(const ExperimentConfig& c, double eps) {
    std::vector<SweepRow> rows(c.Pe.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.Pe = c.Pe[i];
        try {
            const auto m = model_at(c, row.Pe);
            IntegratorConfig ic;
            const double period = linear_period(c.body, row.Pe, c.Se);
            ic.dt = period / kSweepStepsPerPeriod;
            ic.eps = eps;
            ic.sample_stride = std::numeric_limits<long>::max();
            const auto rec = integrate({c.q1_0, 0.0, 0.0, 0.0}, ic, m, std::lround(c.periods * kSweepStepsPerPeriod));
            row.max_r = rec.max_r;
            row.termination = rec.termination;
            row.model_time = rec.steps_taken * ic.dt;
        } catch (const std::exception& e) {
            row.error = e.what();
            row.max_r = std::nan("");
        }
        row.max_real_part = continue_equilibrium(model_at(c, row.Pe), eps).max_real_part;
    });
    return rows;
}

inline void cmd_sweep(const ExperimentConfig& c, std::ostream& os) {
    validate(c);
    if (c.eps.size() != 1) throw ConfigError("sweep takes a single eps");
    os << "Pe,max_r,max_real_part,termination\n";
    for (const auto& r : sweep(c, c.eps[0]))
        os << fmt(r.Pe) << ',' << fmt(r.max_r) << ',' << fmt(r.max_real_part) << ','
           << (r.error.empty() ? to_string(r.termination) : "error") << '\n';
}

// ---------------------------------------------------------------------------
// nf-check
// ---------------------------------------------------------------------------

struct NfCheckRow {
    double eps = 0;
    long double T_ratio = 0;
    std::array<long double, 3> Tnf_ratio{};  // orders 4, 6, 8
    std::array<std::optional<double>, 3> r;   // observed order against the 2 eps row
};

/// Parameters and initial data of the normal-form period table.
struct NfCheckSetup {
    ConsolidatedParams<long double> cp{std::sqrt(5.0L) / 2, 1.0L, 0.5L};
    std::array<long double, 2> q0{0.5L, 1.0L};
    std::array<long double, 2> u0{-0.75L, 0.0L};
};

/// Periods of the consolidated flow and of the order 4, 6, 8 normal forms at
/// matched energy and momentum, as ratios of the linear period.
inline std::vector<NfCheckRow> nf_check(const std::vector<double>& eps_list, const NfCheckSetup& st = {}) {
    using LD = long double;
    const auto& cp = st.cp;
    const LD mult = 4 * (cp.f1 - cp.f2) * (cp.f1 + cp.f2);
    const LD T0 = 2 * std::numbers::pi_v<LD> / (cp.f1 - cp.f2);
    const auto H8 = engine_normal_form(cp, 4);
    std::vector<NfCheckRow> rows(eps_list.size());
    std::vector<std::array<LD, 3>> diff(rows.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        auto& row = rows[i];
        row.eps = eps_list[i];
        const LD e = eps_list[i];
        const LD T = measure_period(cp, st.q0, st.u0, e);
        const auto em = energy_momentum(cp, st.q0, st.u0, e);
        row.T_ratio = T / T0;
        for (int k = 0; k < 3; ++k) {
            const LD Tnf = nf_period_matched(H8.truncated(k + 2), em.energy, em.momentum) * mult;
            row.Tnf_ratio[k] = Tnf / T0;
            diff[i][k] = Tnf - T;
        }
    });
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (eps_list[j] == 2 * eps_list[i])
                for (int k = 0; k < 3; ++k)
                    rows[i].r[k] = static_cast<double>(std::log2(std::abs(diff[j][k] / diff[i][k])));
    return rows;
}

inline void cmd_nfcheck(const std::vector<double>& eps_list, std::ostream& os) {
    if (eps_list.empty()) throw ConfigError("nf-check needs at least one eps");
    for (double e : eps_list)
        if (!(e > 0)) throw ConfigError("nf-check eps must be positive");
    os << "eps,T_ratio,Tnf4_ratio,r4,Tnf6_ratio,r6,Tnf8_ratio,r8\n";
    for (const auto& row : nf_check(eps_list)) {
        os << fmt(row.eps) << ',' << fmt(static_cast<double>(row.T_ratio));
        for (int k = 0; k < 3; ++k) {
            os << ',' << fmt(static_cast<double>(row.Tnf_ratio[k])) << ',';
            if (row.r[k]) os << fmt(*row.r[k]);
        }
        os << '\n';
    }
}

}  // namespace uvstab
