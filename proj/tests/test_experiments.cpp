#include "uvstab/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace uvstab;

namespace {

ExperimentConfig parse(const std::string& text) {
    ExperimentConfig c;
    apply_json(c, nlohmann::json::parse(text));
    return c;
}

std::string config_error(const std::string& text) {
    try {
        validate(parse(text));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

ExperimentConfig sweep_grid(double periods) {
    auto c = preset("pe-sweep");
    c.periods = periods;
    return c;
}

}  // namespace

TEST(Config, DefaultsAreValid) { EXPECT_NO_THROW(validate(ExperimentConfig{})); }

TEST(Config, ParsesAllKeys) {
    const auto c = parse(R"({"I1": 2, "I3": 3, "M1": 1.5, "M3": 0.5, "m": 1, "l": 1, "g": 1, "Se": 5,
                             "Pe": [0.5, 1.5], "eps": 0.1, "q1_0": 0.01, "nua1_0": 0.002,
                             "periods": 100, "dt_per_period": 40, "seed": 7})");
    EXPECT_EQ(c.body.I3, 3);
    EXPECT_EQ(c.Se, 5);
    EXPECT_EQ(c.Pe, (std::vector<double>{0.5, 1.5}));
    EXPECT_EQ(c.eps, std::vector<double>{0.1});
    EXPECT_EQ(c.dt_per_period, 40);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_NO_THROW(validate(c));
}

TEST(Config, PeGrid) {
    const auto c = parse(R"({"Pe": {"min": 0.8, "max": 2.2, "count": 57}})");
    ASSERT_EQ(c.Pe.size(), 57u);
    EXPECT_DOUBLE_EQ(c.Pe.front(), 0.8);
    EXPECT_DOUBLE_EQ(c.Pe.back(), 2.2);
    EXPECT_NEAR(c.Pe[1] - c.Pe[0], 0.025, 1e-15);
}

TEST(Config, UnknownKeyRejected) {
    EXPECT_THROW(parse(R"({"Pe": 1.5, "dt": 0.01})"), ConfigError);
    EXPECT_THROW(parse(R"({"Pe": {"min": 1, "max": 2, "count": 3, "step": 1}})"), ConfigError);
}

TEST(Config, InvalidValuesRejected) {
    EXPECT_EQ(config_error(R"({"periods": 0})"), "periods > 0 violated");
    EXPECT_EQ(config_error(R"({"Pe": []})"), "Pe grid is empty");
    EXPECT_EQ(config_error(R"({"eps": -1})"), "eps >= 0 violated");
    EXPECT_THROW(parse(R"({"Se": "six"})"), ConfigError);
    EXPECT_THROW(validate(parse(R"({"I1": 1})")), std::invalid_argument);
}

TEST(Config, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "uvstab_test_config.json";
    std::ofstream(path) << R"({"Pe": 0.5, "eps": [0, 0.05]})";
    const auto c = load_config(path.string());
    EXPECT_EQ(c.Pe, std::vector<double>{0.5});
    EXPECT_EQ(c.eps.size(), 2u);
    std::filesystem::remove(path);
    EXPECT_THROW(load_config(path.string()), ConfigError);
}

TEST(Presets, AllValid) {
    for (const auto& n : preset_names()) EXPECT_NO_THROW(validate(preset(n))) << n;
    EXPECT_THROW(preset("no-such-preset"), ConfigError);
}

TEST(Presets, RunData) {
    const auto top = preset("gap-run");
    EXPECT_EQ(top.Pe, std::vector<double>{1.5});
    EXPECT_EQ(top.periods, 3e5);
    const auto bottom = preset("em-run");
    EXPECT_EQ(bottom.Pe, std::vector<double>{0.5});
    EXPECT_EQ(bottom.eps, std::vector<double>{0.1});
    EXPECT_EQ(bottom.periods, 1.2e6);
    const auto f2 = preset("pe-sweep");
    EXPECT_EQ(f2.q1_0, 0.0125);
    EXPECT_EQ(f2.nua1_0, 0.0025);
    EXPECT_EQ(preset("nf-table").eps.size(), 5u);
}

TEST(Classify, Examples) {
    ExperimentConfig c;
    const auto em = classify_report(c, 0.5);
    EXPECT_EQ(em["region"], "EMRegion");
    EXPECT_NEAR(em["C1"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(em["C2"].get<double>(), 4.0, 1e-12);
    EXPECT_EQ(em["verdict"], "EM-stable");
    const auto gap = classify_report(c, 1.5);
    EXPECT_EQ(gap["region"], "Gap");
    EXPECT_NE(gap["D4"].get<double>(), 0.0);
    EXPECT_EQ(gap["verdict"], "KAM-stable");
    const auto un = classify_report(c, 2.5);
    EXPECT_EQ(un["region"], "SpectrallyUnstable");
    EXPECT_GT(un["max_real_part"].get<double>(), 0.0);
}

TEST(Classify, JsonArrayPerPe) {
    ExperimentConfig c;
    c.Pe = {0.5, 1.0, 1.5};
    std::ostringstream os;
    cmd_classify(c, os);
    const auto j = nlohmann::json::parse(os.str());
    ASSERT_EQ(j.size(), 3u);
    EXPECT_EQ(j[1]["verdict"], "boundary");
}

TEST(Simulate, CsvLayout) {
    ExperimentConfig c;
    c.periods = 20;
    std::ostringstream os;
    const auto rec = cmd_simulate(c, os);
    const auto ls = lines(os.str());
    EXPECT_EQ(ls.front(), "t,q1,q2,p1,p2,r,dH,so2_momentum");
    EXPECT_EQ(ls.back(), "# termination: completed");
    EXPECT_EQ(ls.size(), rec.times.size() + 2);
    EXPECT_GE(rec.times.size(), 21u);
}

TEST(Simulate, EnergyErrorSmallWithoutDamping) {
    ExperimentConfig c;
    c.eps = {0.0};
    c.nua1_0 = 0.0;
    c.q1_0 = 0.005;
    std::ostringstream os;
    const auto rec = cmd_simulate(c, os);
    double worst = 0;
    for (double d : rec.dH) worst = std::max(worst, std::abs(d));
    EXPECT_LE(worst, 1e-8);
}

TEST(Simulate, NoEnergyDriftWithoutDamping) {
    ExperimentConfig c;
    c.eps = {0.0};
    c.nua1_0 = 0.0;
    std::ostringstream os;
    const auto rec = cmd_simulate(c, os);
    const std::size_t n = rec.dH.size(), k = 1000;
    ASSERT_GT(n, 2 * k);
    double first = 0, last = 0;
    for (std::size_t i = 0; i < k; ++i) {
        first = std::max(first, std::abs(rec.dH[i]));
        last = std::max(last, std::abs(rec.dH[n - 1 - i]));
    }
    EXPECT_LE(last, 1.5 * first);
}

TEST(Simulate, RejectsGrids) {
    ExperimentConfig c;
    c.Pe = {0.5, 1.5};
    std::ostringstream os;
    EXPECT_THROW(cmd_simulate(c, os), ConfigError);
}

TEST(Continuation, VerticalMomentumConvergesImmediately) {
    ExperimentConfig c;
    c.nua1_0 = 0.0;
    const auto row = continue_equilibrium(model_at(c, 1.5), 0.05);
    EXPECT_TRUE(row.converged);
    EXPECT_EQ(row.iterations, 1);
    EXPECT_EQ(row.equilibrium.vec().norm(), 0.0);
}

TEST(Continuation, VerticalLimitMatchesLinearSpectrum) {
    ExperimentConfig c;
    c.nua1_0 = 0.0;
    for (double Pe : {0.5, 1.5, 2.5}) {
        const auto row = continue_equilibrium(model_at(c, Pe), 0.0);
        const auto sp = linear_spectrum(c.body, Pe, c.Se);
        std::array<double, 4> re;
        for (int i = 0; i < 4; ++i) re[i] = sp.eigenvalues[i].real();
        std::sort(re.begin(), re.end(), std::greater<>());
        for (int i = 0; i < 4; ++i) EXPECT_NEAR(row.real_parts[i], re[i], 1e-6) << "Pe " << Pe;
    }
}

TEST(Continuation, ConservativeGapHasZeroRealParts) {
    ExperimentConfig c;
    c.nua1_0 = 0.01;
    for (double Pe : {1.2, 1.5, 1.8}) {
        const auto row = continue_equilibrium(model_at(c, Pe), 0.0);
        ASSERT_TRUE(row.converged);
        for (double r : row.real_parts) EXPECT_LE(std::abs(r), 1e-9) << "Pe " << Pe;
    }
}

TEST(Continuation, DampingSignsByRegion) {
    ExperimentConfig c;
    c.nua1_0 = 0.01;
    for (double Pe : {0.5, 0.8}) EXPECT_LT(continue_equilibrium(model_at(c, Pe), 0.05).max_real_part, 0) << Pe;
    for (double Pe : {1.3, 1.7}) EXPECT_GT(continue_equilibrium(model_at(c, Pe), 0.05).max_real_part, 0) << Pe;
}

TEST(Continuation, CsvRowsInConfigOrder) {
    ExperimentConfig c;
    c.Pe = {1.5, 0.5};
    c.eps = {0.0, 0.05};
    std::ostringstream os;
    cmd_continue(c, os);
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 5u);
    EXPECT_EQ(ls[1].substr(0, 6), "0,1.5,");
    EXPECT_EQ(ls[4].substr(0, 10), "0.05,0.5,0");
}

TEST(Sweep, ConservativeGapStaysNearEquilibrium) {
    const auto rows = sweep(sweep_grid(5000), 0.0);
    ASSERT_EQ(rows.size(), 57u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i - 1].Pe, rows[i].Pe);
    for (const auto& r : rows) {
        if (r.Pe > 1.1 && r.Pe < 1.95) {
            EXPECT_LT(r.max_r, 0.1) << "Pe " << r.Pe;
        }
        EXPECT_LE(r.max_r, IntegratorConfig{}.r_stop + 0.05) << "Pe " << r.Pe;
    }
}

TEST(Sweep, OnlyGapOrUnstableRowsEscape) {
    const auto c = sweep_grid(5000);
    for (const auto& r : sweep(c, 0.05)) {
        const auto cls = classify(c.body, r.Pe, c.Se);
        if (r.Pe < 1.0 && cls == StabilityClass::EMRegion) {
            EXPECT_LT(r.max_r, 0.1) << "Pe " << r.Pe;
        }
        if (r.termination == Termination::escaped) {
            EXPECT_TRUE(cls == StabilityClass::Gap || cls == StabilityClass::SpectrallyUnstable) << "Pe " << r.Pe;
        }
    }
}

TEST(Sweep, DeterministicCsv) {
    auto c = sweep_grid(200);
    std::ostringstream a, b;
    cmd_sweep(c, a);
    cmd_sweep(c, b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(lines(a.str()).front(), "Pe,max_r,max_real_part,termination");
}

TEST(NfCheck, CsvLayoutAndFirstRow) {
    std::ostringstream os;
    cmd_nfcheck({1e-4, 2e-4}, os);
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 3u);
    EXPECT_EQ(ls[0], "eps,T_ratio,Tnf4_ratio,r4,Tnf6_ratio,r6,Tnf8_ratio,r8");
    const auto rows = nf_check({1e-4, 2e-4});
    EXPECT_NEAR(static_cast<double>(rows[0].T_ratio), 0.9995410553688, 1e-12);
    EXPECT_NEAR(static_cast<double>(rows[0].Tnf_ratio[2]), 0.9995410553684, 1e-12);
    ASSERT_TRUE(rows[0].r[2].has_value());
    EXPECT_FALSE(rows[1].r[2].has_value());
}

TEST(NfCheck, RejectsNonPositiveEps) {
    std::ostringstream os;
    EXPECT_THROW(cmd_nfcheck({0.0}, os), ConfigError);
}
