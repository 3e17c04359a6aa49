#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cbmm/harness.hpp"

using namespace cbmm;

namespace {

ConfigMap synthetic(std::size_t T, const char* algorithm = "cb_min_max") {
    return {{"experiment", "synthetic"}, {"algorithm", algorithm}, {"T", std::to_string(T)}};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Config, ParsesFlatText) {
    const ConfigMap m = parse_config_text("# comment\nexperiment = dro\n\n  T=50  # trailing\nlambda = 1e-3\n");
    EXPECT_EQ(m.at("experiment"), "dro");
    EXPECT_EQ(m.at("T"), "50");
    EXPECT_EQ(m.at("lambda"), "1e-3");
    EXPECT_THROW(parse_config_text("no equals sign"), ConfigError);
}

TEST(Config, FlagsOverrideFile) {
    const ConfigMap file = parse_config_text("T = 10\nx0 = 0.5\n");
    const RunConfig c = make_config(merge(file, {{"T", "20"}}));
    EXPECT_EQ(c.T, 20u);
    EXPECT_EQ(c.x0, 0.5);
}

TEST(Config, ExperimentDefaults) {
    const RunConfig s = make_config({});
    EXPECT_EQ(s.rho, 0.5);
    EXPECT_EQ(s.centering, Centering::origin);
    const RunConfig d = make_config({{"experiment", "dro"}});
    EXPECT_EQ(d.rho, 1e-4);
    EXPECT_EQ(d.lambda, 1e-4);
    EXPECT_EQ(d.radius, 1e5);
    EXPECT_EQ(d.regularizer_sign, 1);
}

TEST(Config, Rejections) {
    EXPECT_THROW(make_config({{"bogus", "1"}}), ConfigError);
    EXPECT_THROW(make_config({{"T", "0"}}), ConfigError);
    EXPECT_THROW(make_config({{"T", "-3"}}), ConfigError);
    EXPECT_THROW(make_config({{"T", "ten"}}), ConfigError);
    EXPECT_THROW(make_config({{"experiment", "chess"}}), ConfigError);
    EXPECT_THROW(make_config({{"algorithm", "adam"}}), ConfigError);
    EXPECT_THROW(make_config({{"algorithm", "cb_min_max_simplex"}}), ConfigError);
    EXPECT_THROW(make_config({{"algorithm", "pdg_entropic"}}), ConfigError);
    EXPECT_THROW(make_config({{"x0", "7"}}), ConfigError);
    EXPECT_THROW(make_config({{"epsilon_prime", "0"}}), ConfigError);
    EXPECT_THROW(make_config({{"experiment", "dro"}, {"regularizer_sign", "2"}}), ConfigError);
    EXPECT_THROW(make_config({{"algorithm", "restart"}, {"epsilon", "8"}}), ConfigError);
    EXPECT_THROW(make_config({{"record_every", "0"}}), ConfigError);
    EXPECT_THROW(make_config({{"timing", "maybe"}}), ConfigError);
}

TEST(Config, EveryKeyIsAccepted) {
    // Each documented key parses when given a sensible value.
    const ConfigMap values = {
        {"experiment", "dro"}, {"algorithm", "pdg"}, {"T", "5"}, {"epsilon_prime", "2"}, {"centering", "x0"},
        {"coin_sign", "literal"}, {"rho", "0.1"}, {"radius_x", "4"}, {"radius_y", "4"}, {"x0", "0"}, {"y0", "0"},
        {"lambda", "0.1"}, {"radius", "10"}, {"regularizer_sign", "-1"}, {"train", "a"}, {"test", "b"},
        {"positive_labels", "1"}, {"negative_labels", "2,3"}, {"test_fraction", "0.3"}, {"seed", "7"},
        {"gen_samples", "10"}, {"gen_features", "3"}, {"gen_flip", "0"}, {"epsilon0", "4"}, {"epsilon", "1"},
        {"theta", "0.5"}, {"complexity_constant", "10"}, {"eta_x", "0.1"}, {"eta_y", "0.1"},
        {"grad_bound_x", "3"}, {"grad_bound_y", "3"},
        {"record_every", "2"}, {"timing", "true"}, {"dro_gap", "all"}, {"output", "x.csv"}};
    EXPECT_EQ(values.size(), config_keys().size());
    EXPECT_NO_THROW(make_config(values));
}

TEST(Csv, HeaderAndEmptyColumns) {
    const RunResult r = execute(make_config(synthetic(1000)));
    const auto rows = lines(to_csv(r.output.trace));
    EXPECT_EQ(rows.front(), "iteration,elapsed_s,gap,gap_exact,dist_to_opt,train_loss,test_loss,robust_objective");
    EXPECT_EQ(rows.size(), 1001u);
    EXPECT_EQ(rows[1].rfind("1,,", 0), 0u);
    EXPECT_EQ(rows[1].substr(rows[1].size() - 3), ",,,");
}

TEST(Csv, SaddleStartAllZeroGaps) {
    ConfigMap m = synthetic(10);
    m["x0"] = "0";
    m["y0"] = "0";
    const RunResult r = execute(make_config(m));
    for (const auto& row : r.output.trace) {
        EXPECT_EQ(*row.gap, 0.0);
        EXPECT_TRUE(row.gap_exact);
    }
    EXPECT_EQ(lines(to_csv(r.output.trace))[1], "1,,0,1,0,,,");
}

TEST(Csv, TimingColumnOptIn) {
    ConfigMap m = synthetic(10);
    m["timing"] = "true";
    const RunResult r = execute(make_config(m));
    EXPECT_TRUE(r.output.trace.back().elapsed_seconds.has_value());
}

TEST(Run, CbBeatsPdgOnFinalDistance) {
    const RunResult cb = execute(make_config(synthetic(10000)));
    const RunResult pdg = execute(make_config(synthetic(10000, "pdg")));
    EXPECT_LT(*cb.output.trace.back().dist_to_opt, *pdg.output.trace.back().dist_to_opt);
}

TEST(Run, DeterministicCsv) {
    const std::string a = to_csv(execute(make_config(synthetic(2000))).output.trace);
    const std::string b = to_csv(execute(make_config(synthetic(2000))).output.trace);
    EXPECT_EQ(a, b);
}

TEST(Run, DroGeneratedColumns) {
    const ConfigMap m = {{"experiment", "dro"}, {"algorithm", "cb_min_max_simplex"}, {"T", "100"},
                         {"gen_samples", "40"}, {"gen_features", "5"}};
    const RunResult r = execute(make_config(m));
    const RunRecord& last = r.output.trace.back();
    EXPECT_TRUE(last.train_loss.has_value());
    EXPECT_FALSE(last.test_loss.has_value());
    EXPECT_TRUE(last.robust_objective.has_value());
    ASSERT_TRUE(last.gap.has_value());
    EXPECT_FALSE(last.gap_exact);
    EXPECT_FALSE(r.output.trace.front().gap.has_value());
    EXPECT_FALSE(last.dist_to_opt.has_value());
}

TEST(Run, DroWithSplitFile) {
    const ConfigMap m = {{"experiment", "dro"}, {"algorithm", "pdg_entropic"}, {"T", "50"},
                         {"train", std::string(CBMM_FIXTURE_DIR) + "/sensit_like.libsvm"},
                         {"positive_labels", "1"}, {"negative_labels", "2,3"}, {"test_fraction", "0.25"},
                         {"dro_gap", "all"}};
    const RunResult r = execute(make_config(m));
    EXPECT_TRUE(r.output.trace.back().test_loss.has_value());
    for (const auto& row : r.output.trace) EXPECT_TRUE(row.gap.has_value());
}

TEST(Run, DroDataErrors) {
    ConfigMap m = {{"experiment", "dro"}, {"train", std::string(CBMM_FIXTURE_DIR) + "/sensit_like.libsvm"}};
    EXPECT_THROW(execute(make_config(m)), RemapError);
    m["train"] = std::string(CBMM_FIXTURE_DIR) + "/bad_order.libsvm";
    EXPECT_THROW(execute(make_config(m)), FormatError);
}

TEST(Run, RestartStagesInTrace) {
    ConfigMap m = synthetic(1, "restart");
    m["record_every"] = "1";
    const RunResult r = execute(make_config(m));
    EXPECT_EQ(r.output.stage_ends, (std::vector<std::size_t>{36, 136, 419, 1219}));
    EXPECT_EQ(r.output.trace.size(), 1219u);
}

TEST(WriteAtomic, CreatesDirectoriesAndLeavesNoTemp) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cbmm_harness_test";
    fs::remove_all(dir);
    const std::string path = (dir / "sub" / "out.csv").string();
    write_atomic(path, "a,b\n");
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(text, "a,b\n");
    EXPECT_FALSE(fs::exists(path + ".tmp"));
    fs::remove_all(dir);
}

TEST(Compare, CbVersusPdgVerdict) {
    ConfigMap a = synthetic(2000);
    ConfigMap b = synthetic(2000, "pdg");
    const Comparison c = compare(make_config(a), make_config(b));
    EXPECT_EQ(c.verdict, "cb_min_max lower final dist");
    const auto rows = lines(c.merged_csv);
    EXPECT_EQ(rows.front(), std::string("algorithm,") + kCsvHeader);
    EXPECT_EQ(rows.size(), 1u + 2u * 1000u);
    EXPECT_EQ(rows[1].rfind("cb_min_max,", 0), 0u);
    EXPECT_EQ(rows.back().rfind("pdg,", 0), 0u);
}

TEST(Compare, IdenticalIsTie) {
    const Comparison c = compare(make_config(synthetic(500)), make_config(synthetic(500)));
    EXPECT_EQ(c.verdict, "tie");
    EXPECT_EQ(c.label_a, "cb_min_max_a");
}

TEST(Compare, DroLossCurves) {
    const ConfigMap base = {{"experiment", "dro"}, {"T", "200"}, {"seed", "42"}};
    ConfigMap a = base, b = base;
    a["algorithm"] = "cb_min_max_simplex";
    b["algorithm"] = "pdg_entropic";
    const Comparison c = compare(make_config(a), make_config(b));
    const auto rows = lines(c.merged_csv);
    EXPECT_EQ(rows.size(), 401u);
    EXPECT_NE(c.verdict.find("lower final train_loss"), std::string::npos);
}

TEST(Compare, IncompatibleConfigs) {
    EXPECT_THROW(compare(make_config(synthetic(100)), make_config(synthetic(200))), ConfigError);
    ConfigMap b = synthetic(100);
    b["x0"] = "0.1";
    EXPECT_THROW(compare(make_config(synthetic(100)), make_config(b)), ConfigError);
    ConfigMap d = {{"experiment", "dro"}, {"T", "100"}};
    EXPECT_THROW(compare(make_config(synthetic(100)), make_config(d)), ConfigError);
}

TEST(ExitCodes, Mapping) {
    std::ostringstream out, err;
    EXPECT_EQ(run_command({{"T", "0"}}, out, err), kExitConfig);
    EXPECT_NE(err.str().find("config error"), std::string::npos);
    EXPECT_EQ(run_command({{"experiment", "dro"}, {"train", "/nonexistent/file"}}, out, err), kExitData);
    EXPECT_EQ(run_command({{"grad_bound_x", "1"}, {"output", "/nonexistent/never.csv"}}, out, err),
              kExitNumerical);
    EXPECT_NE(err.str().find("iteration 1"), std::string::npos);
}

TEST(Run, BoundOverrideTooSmallIsScalingViolation) {
    ConfigMap m = synthetic(100);
    m["grad_bound_x"] = "1";  // |rho x^3 + y| = 1.5 at (1, 1)
    try {
        execute(make_config(m));
        FAIL();
    } catch (const ScalingViolation& e) {
        EXPECT_EQ(e.iteration(), 1u);
    }
    m["grad_bound_x"] = "1000";  // loose bounds are fine
    EXPECT_NO_THROW(execute(make_config(m)));
}
