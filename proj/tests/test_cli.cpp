// Copyright 2026 The recordlaw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "recordlaw/csv.hpp"
#include "recordlaw/rng.hpp"
#include "recordlaw/synthetic.hpp"

namespace fs = std::filesystem;
using namespace recordlaw;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("recordlaw_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        SplitMix64 rng(3);
        synthetic::CorpusShape shape;
        shape.group_sizes.assign(12, 30);
        shape.mean_gap_days = 20.0;
        write_csv(data(), synthetic::simulate_corpus({-2.03, -1.30, 0.075, 0.112, 0.0, 0.80}, shape, rng));
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string data() const { return path("corpus.csv"); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndVersion) {
    const auto r = run_cli({"--help"});
    EXPECT_EQ(r.code, cli::kOk);
    EXPECT_NE(r.out.find("benchmark"), std::string::npos);
    EXPECT_EQ(run_cli({"--version"}).code, cli::kOk);
    EXPECT_EQ(run_cli({"benchmark", "--help"}).code, cli::kOk);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run_cli({}).code, cli::kUsageError);
    EXPECT_EQ(run_cli({"benchmark", "--out", path("r.json")}).code, cli::kUsageError);
    EXPECT_EQ(run_cli({"benchmark", "--data", data(), "--out", path("r.json"), "--bogus"}).code, cli::kUsageError);
    EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsageError);
    EXPECT_EQ(run_cli({"benchmark", "--data", data(), "--out", path("r.json"), "--protocol", "weird"}).code,
              cli::kUsageError);
    EXPECT_EQ(run_cli({"transform", "--data", data(), "--out", data()}).code, cli::kUsageError);
}

TEST_F(Cli, DomainErrors) {
    std::ofstream(path("bad.csv")) << "series_id,kind,metric_name,timestamp_utc,value\n"
                                      "a,speedrun,,2020-01-02T00:00:00Z,100\n"
                                      "a,speedrun,,2020-01-01T00:00:00Z,90\n";
    const auto r = run_cli({"validate", path("bad.csv")});
    EXPECT_EQ(r.code, cli::kDomainError);
    EXPECT_NE(r.err.find("row"), std::string::npos);
    EXPECT_EQ(run_cli({"fit", "--data", path("missing.csv"), "--out", path("f.json")}).code, cli::kDomainError);
}

TEST_F(Cli, ValidateSummarisesSeries) {
    const auto r = run_cli({"validate", data()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 13);
}

TEST_F(Cli, TransformRows) {
    ASSERT_EQ(run_cli({"transform", "--data", data(), "--max-t", "9", "--out", path("rows.csv")}).code, cli::kOk);
    const auto text = slurp(path("rows.csv"));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 12 * 9);
}

TEST_F(Cli, FitWritesDocumentAndEffects) {
    const auto r = run_cli({"fit", "--data", data(), "--cutoff", "10", "--out", path("fit/fit.json"), "--effects-out",
                            path("fit/effects.csv")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto j = json::parse(slurp(path("fit/fit.json")));
    EXPECT_EQ(j.at("format"), "recordlaw.fit");
    EXPECT_EQ(j.at("n_obs"), 12 * 9);
    EXPECT_EQ(j.at("spec").at("mask").at("fix_cov"), true);
    const auto effects = slurp(path("fit/effects.csv"));
    EXPECT_EQ(std::count(effects.begin(), effects.end(), '\n'), 13);
    EXPECT_TRUE(fs::exists(path("fit/run-manifest.json")));
}

TEST_F(Cli, BaselinePredictions) {
    const auto r = run_cli({"baseline", "--data", data(), "--model", "ema", "--protocol", "speedrun-K10", "--out",
                            path("ema.csv")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto text = slurp(path("ema.csv"));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 12 * 21);
}

TEST_F(Cli, BenchmarkReportAndManifestReplay) {
    const auto r = run_cli({"benchmark", "--data", data(), "--protocol", "speedrun-K10", "--resamples", "1000",
                            "--out", path("out/report.json"), "--scatter-out", path("out/scatter.csv"), "--sweep",
                            "5,10", "--sweep-out", path("out/sweep.json")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.err.find("generated seed"), std::string::npos);
    const auto report = json::parse(slurp(path("out/report.json")));
    EXPECT_EQ(report.at("n_rows"), 12 * 21);
    EXPECT_EQ(report.at("summary").size(), 4u);
    EXPECT_TRUE(report.at("p_values").contains("re_vs_zero"));

    const auto m = json::parse(slurp(path("out/run-manifest.json")));
    EXPECT_EQ(m.at("format"), "recordlaw.manifest");
    EXPECT_EQ(m.at("seed_generated"), true);
    EXPECT_EQ(m.at("outputs").size(), 3u);
    EXPECT_EQ(m.at("inputs").size(), 1u);
    const auto& replay_argv = m.at("replay_argv");
    EXPECT_EQ(replay_argv[replay_argv.size() - 2], "--seed");

    const std::string before = slurp(path("out/report.json"));
    const std::string sweep_before = slurp(path("out/sweep.json"));
    fs::remove(path("out/report.json"));
    const auto replay = run_cli({"replay", path("out/run-manifest.json")});
    EXPECT_EQ(replay.code, cli::kOk) << replay.err;
    EXPECT_NE(replay.err.find("reproduced 3"), std::string::npos);
    EXPECT_EQ(slurp(path("out/report.json")), before);
    EXPECT_EQ(slurp(path("out/sweep.json")), sweep_before);
}

TEST_F(Cli, ReplayDetectsChangedInput) {
    ASSERT_EQ(run_cli({"fit", "--data", data(), "--cutoff", "10", "--out", path("f/fit.json")}).code, cli::kOk);
    std::ofstream(data(), std::ios::app) << "\n";
    EXPECT_EQ(run_cli({"replay", path("f/run-manifest.json")}).code, cli::kDomainError);
}

TEST_F(Cli, ConfigFilesAndFlagPrecedence) {
    std::ofstream(path("cfg.toml")) << "[benchmark]\nresamples = 1000\nmodels = \"zero,re\"\nseed = 5\n"
                                       "protocol = \"speedrun-K8\"\n";
    auto r = run_cli({"--config", path("cfg.toml"), "benchmark", "--data", data(), "--seed", "9", "--out",
                      path("toml/report.json")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    auto m = json::parse(slurp(path("toml/run-manifest.json")));
    EXPECT_EQ(m.at("seed"), 9);
    EXPECT_EQ(json::parse(slurp(path("toml/report.json"))).at("protocol"), "speedrun-K8");
    EXPECT_EQ(json::parse(slurp(path("toml/report.json"))).at("summary").size(), 2u);
    EXPECT_EQ(m.at("inputs").size(), 2u);

    std::ofstream(path("cfg.json")) << R"({"benchmark": {"resamples": 1000, "models": "zero,fixed", "seed": 5}})";
    r = run_cli({"--config", path("cfg.json"), "benchmark", "--data", data(), "--out", path("json/report.json")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    m = json::parse(slurp(path("json/run-manifest.json")));
    EXPECT_EQ(m.at("seed"), 5);
    EXPECT_EQ(m.at("seed_generated"), false);
    EXPECT_EQ(json::parse(slurp(path("json/report.json"))).at("models"), json({"zero", "fixed"}));
}

TEST_F(Cli, ForecastReport) {
    const auto r = run_cli({"forecast", "--data", data(), "--delta-t", "8w", "--n-min", "15", "--n-max", "20",
                            "--sims", "3", "--seed", "1", "--resamples", "1000", "--out", path("h/horizon.json")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto j = json::parse(slurp(path("h/horizon.json")));
    EXPECT_EQ(j.at("protocol"), "horizon");
    EXPECT_EQ(j.at("models"), json({"baseline", "simulation"}));
    EXPECT_EQ(j.at("n_rows").get<int>() + j.at("n_excluded").get<int>(), 12 * 6);
    EXPECT_TRUE(j.contains("horizon"));
}

TEST_F(Cli, SimulateExperiments) {
    ASSERT_EQ(run_cli({"simulate", "--experiment", "record-times", "--runs", "200", "--i-max", "10", "--seed", "1",
                       "--out", path("s/rt.csv")})
                  .code,
              cli::kOk);
    auto text = slurp(path("s/rt.csv"));
    EXPECT_EQ(text.rfind("i,mean_log_n,", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
    ASSERT_EQ(run_cli({"simulate", "--experiment", "gumbel", "--runs", "2", "--seed", "1", "--out", path("s/g.csv")})
                  .code,
              cli::kOk);
    text = slurp(path("s/g.csv"));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    ASSERT_EQ(run_cli({"simulate", "--experiment", "asymptotics", "--runs", "5", "--seed", "1", "--out",
                       path("s/a.csv")})
                  .code,
              cli::kOk);
    EXPECT_EQ(run_cli({"simulate", "--experiment", "nope", "--out", path("s/x.csv")}).code, cli::kUsageError);
}

TEST_F(Cli, ReportTables) {
    ASSERT_EQ(run_cli({"report", "--plot", "mean_loglog", "--data", data(), "--out", path("p/ml.csv")}).code, cli::kOk);
    EXPECT_EQ(slurp(path("p/ml.csv")).rfind("t,log_t,n_series,mean,sd,lower,upper\n", 0), 0u);
    ASSERT_EQ(run_cli({"benchmark", "--data", data(), "--resamples", "1000", "--seed", "2", "--out",
                       path("p/report.json")})
                  .code,
              cli::kOk);
    const auto r = run_cli({"report", "--plot", "error_scatter", "--report", path("p/report.json")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(r.out.rfind("series_id,t,abs_error_zero,abs_error_re\n", 0), 0u);
    const auto s = run_cli({"report", "--plot", "summary", "--report", path("p/report.json")});
    ASSERT_EQ(s.code, cli::kOk) << s.err;
    EXPECT_NE(s.out.find("re,"), std::string::npos);
    EXPECT_EQ(run_cli({"report", "--plot", "series"}).code, cli::kUsageError);
}

TEST(CliGolden, PipelineMatchesCommittedSummary) {
    const fs::path data = fs::path(RECORDLAW_TEST_DATA) / "speedrun_small.csv";
    const auto expected = json::parse(slurp(fs::path(RECORDLAW_TEST_DATA) / "speedrun_small_summary.json"));
    const auto out = fs::temp_directory_path() / "recordlaw_golden";
    fs::remove_all(out);
    const auto r = run_cli({"benchmark", "--data", data.string(), "--protocol", "speedrun-K10", "--resamples", "2000",
                            "--seed", "42", "--out", (out / "report.json").string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto got = json::parse(slurp(out / "report.json"));
    EXPECT_EQ(got.at("n_rows"), expected.at("n_rows"));
    ASSERT_EQ(got.at("summary").size(), expected.at("summary").size());
    for (std::size_t i = 0; i < got.at("summary").size(); ++i) {
        const auto& g = got.at("summary")[i];
        const auto& e = expected.at("summary")[i];
        EXPECT_EQ(g.at("model"), e.at("model"));
        for (const char* k : {"l2", "l1", "l2_secondary", "l1_secondary"})
            EXPECT_NEAR(g.at(k).get<double>(), e.at(k).get<double>(), 1e-9 * std::abs(e.at(k).get<double>())) << k;
    }
    for (const auto& [k, v] : expected.at("p_values").items()) EXPECT_NEAR(got.at("p_values").at(k).get<double>(), v.get<double>(), 1e-12) << k;
    fs::remove_all(out);
}

TEST(CliHelpers, Durations) {
    EXPECT_EQ(cli::parse_duration("8w"), 8 * 7 * 86400.0);
    EXPECT_EQ(cli::parse_duration("56d"), 56 * 86400.0);
    EXPECT_EQ(cli::parse_duration("1.5h"), 5400.0);
    EXPECT_EQ(cli::parse_duration("90"), 90.0);
    EXPECT_THROW(cli::parse_duration("w"), ConfigError);
    EXPECT_THROW(cli::parse_duration("-3d"), ConfigError);
}

TEST(CliHelpers, Sha256) {
    const auto p = fs::temp_directory_path() / "recordlaw_sha_abc";
    std::ofstream(p, std::ios::binary) << "abc";
    EXPECT_EQ(cli::sha256_file(p), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove(p);
}
