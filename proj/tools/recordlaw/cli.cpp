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

#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "recordlaw/io.hpp"
#include "recordlaw/recordlaw.hpp"
#include "recordlaw/fetch.hpp"

namespace recordlaw::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// JSON config files: {"<subcommand>": {"<option>": value}}. Top-level keys address global options.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        throw CLI::ConversionError("writing JSON configs is not supported");
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            input >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
        std::vector<CLI::ConfigItem> out;
        collect(j, {}, out);
        return out;
    }

private:
    static std::string scalar(const nlohmann::json& v, const std::string& name) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw CLI::ConversionError("config: unsupported value for '" + name + "'");
    }

    static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& out) {
        for (const auto& [key, v] : obj.items()) {
            if (v.is_object()) {
                auto p = parents;
                p.push_back(key);
                collect(v, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (v.is_array()) {
                for (const auto& e : v) item.inputs.push_back(scalar(e, key));
            } else {
                item.inputs.push_back(scalar(v, key));
            }
            out.push_back(std::move(item));
        }
    }
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err, const std::string& level) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
    auto lg = std::make_shared<spdlog::logger>("recordlaw", sink);
    lg->set_pattern("[%l] %v");
    lg->set_level(spdlog::level::from_str(level));
    return lg;
}

/// Everything a subcommand touched, for the manifest.
struct RunContext {
    std::shared_ptr<spdlog::logger> log;
    std::ostream* out = nullptr;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    std::optional<std::uint64_t> seed;
    bool seed_generated = false;

    void input(const fs::path& p) { inputs.push_back(p); }
    void output(const fs::path& p) {
        for (const auto& in : inputs)
            if (fs::exists(p) && fs::exists(in) && fs::equivalent(p, in))
                throw ConfigError("output '" + p.string() + "' would overwrite input '" + in.string() + "'");
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        outputs.push_back(p);
    }

    /// Returns the explicit seed or generates and remembers one.
    std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given) {
        if (given) {
            seed = given;
        } else {
            std::random_device rd;
            seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            seed_generated = true;
            log->warn("no --seed given; using generated seed {}", *seed);
        }
        return *seed;
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Options shared by every subcommand that reads a corpus.
struct DataOptions {
    std::string path;
    std::string kind;
    int min_records = 2;
    std::string metrics;

    void add(CLI::App* app, bool required = true) {
        auto* o = app->add_option("--data", path, "Record-series CSV");
        if (required) o->required();
        app->add_option("--kind", kind, "Expected series kind")->check(CLI::IsMember({"speedrun", "ml_benchmark"}));
        app->add_option("--min-records", min_records, "Drop series with fewer records")
            ->default_val(2)
            ->check(CLI::PositiveNumber);
        app->add_option("--metrics", metrics, "Comma-separated metric names to keep (ML corpora)");
    }

    Corpus load(RunContext& ctx) const {
        ctx.input(path);
        std::optional<SeriesKind> k;
        if (!kind.empty()) k = parse_series_kind(kind);
        Corpus c = load_csv(fs::path(path), k);
        CorpusFilter f;
        f.min_records = static_cast<std::size_t>(min_records);
        for (const auto& m : split_list(metrics)) f.allowed_metrics.push_back(m);
        check(f);
        const std::size_t before = c.size();
        c = apply_filter(c, f);
        ctx.log->info("loaded {} series ({} after filtering), {} records", before, c.size(), total_records(c));
        if (c.empty()) throw InputError("no series left after filtering");
        return c;
    }
};

MixedModelSpec parse_mask(const std::string& mask, SeriesKind kind, ModelForm form, double floor) {
    MixedModelSpec spec = MixedModelSpec::for_kind(kind, form);
    spec.variance_floor = floor;
    if (mask == "default") return spec;
    spec.mask = {};
    if (mask == "none") return spec;
    for (const auto& m : split_list(mask)) {
        if (m == "fix_var_alpha") spec.mask.fix_var_alpha = true;
        else if (m == "fix_var_beta") spec.mask.fix_var_beta = true;
        else if (m == "fix_cov") spec.mask.fix_cov = true;
        else throw ConfigError("unknown mask entry '" + m + "'");
    }
    return spec;
}

BenchProtocol parse_protocol(const std::string& name, SeriesKind kind) {
    if (name.empty()) return kind == SeriesKind::speedrun ? BenchProtocol::speedrun(10) : BenchProtocol::ml_last_out();
    if (name == "ml-lastout") return BenchProtocol::ml_last_out();
    const std::string prefix = "speedrun-K";
    if (name.rfind(prefix, 0) == 0) {
        int K = 0;
        const auto* b = name.data() + prefix.size();
        const auto* e = name.data() + name.size();
        auto [p, ec] = std::from_chars(b, e, K);
        if (ec == std::errc() && p == e && b != e) return BenchProtocol::speedrun(K);
    }
    throw ConfigError("unknown protocol '" + name + "' (expected speedrun-K<k> or ml-lastout)");
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        int v = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || p != item.data() + item.size()) throw ConfigError("not an integer: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

/// Opens `path` for writing, or returns the context's stdout when empty or "-".
class OutputStream {
public:
    OutputStream(const std::string& path, RunContext& ctx) {
        if (path.empty() || path == "-") {
            os_ = ctx.out;
            return;
        }
        ctx.output(path);
        file_.open(path, std::ios::binary);
        if (!file_) throw InputError("cannot write '" + path + "'");
        os_ = &file_;
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

void write_json_output(const std::string& path, const Json& j, RunContext& ctx) {
    ctx.output(path);
    io::write_json(path, j);
}

// ---------------------------------------------------------------- subcommands

struct FetchCmd {
    std::string games, out, api_base;
    double rate_limit = 1.0;
    int min_records = 2;

    void setup(CLI::App* app) {
        app->add_option("--games", games, "Game ids, one per line, in popularity order")->required()->check(CLI::ExistingFile);
        app->add_option("--out", out, "Output CSV")->required();
        app->add_option("--rate-limit", rate_limit, "Requests per second")->default_val(1.0)->check(CLI::PositiveNumber);
        app->add_option("--api-base", api_base, "API base URL (default: $RECORDLAW_API_BASE or the public API)");
        app->add_option("--min-records", min_records, "Drop series with fewer records")->default_val(2)->check(CLI::PositiveNumber);
    }

    void run(RunContext& ctx) const {
        ctx.input(games);
        std::ifstream in(games);
        const auto ids = fetch::read_game_list(in);
        const std::string base = api_base.empty() ? fetch::api_base_from_env() : api_base;
        ctx.log->info("fetching {} games from {}", ids.size(), base);
        Corpus c = fetch::fetch_speedrun_series(ids, base, rate_limit);
        CorpusFilter f;
        f.min_records = static_cast<std::size_t>(min_records);
        c = apply_filter(c, f);
        ctx.output(out);
        write_csv(fs::path(out), c);
        ctx.log->info("wrote {} series, {} records", c.size(), total_records(c));
    }
};

struct ValidateCmd {
    std::string path, kind;

    void setup(CLI::App* app) {
        app->add_option("csv", path, "Record-series CSV")->required();
        app->add_option("--kind", kind, "Expected series kind")->check(CLI::IsMember({"speedrun", "ml_benchmark"}));
    }

    void run(RunContext& ctx) const {
        ctx.input(path);
        std::optional<SeriesKind> k;
        if (!kind.empty()) k = parse_series_kind(kind);
        const Corpus c = load_csv(fs::path(path), k);
        auto& o = *ctx.out;
        o << "series_id,kind,metric_name,n_records,first_timestamp_utc,last_timestamp_utc\n";
        for (const auto& s : c) {
            o << quote_csv_field(s.series_id) << ',' << to_string(s.kind) << ',' << quote_csv_field(s.metric_name) << ','
              << s.size() << ',';
            if (!s.records.empty())
                o << format_rfc3339_utc(s.records.front().timestamp) << ',' << format_rfc3339_utc(s.records.back().timestamp);
            else
                o << ',';
            o << '\n';
        }
        ctx.log->info("valid: {} series, {} records", c.size(), total_records(c));
    }
};

struct TransformCmd {
    DataOptions data;
    std::string model = "power_law", out;
    std::optional<int> max_t;

    void setup(CLI::App* app) {
        data.add(app);
        app->add_option("--model", model, "Regressor form")->default_val("power_law")->check(CLI::IsMember({"power_law", "exponential"}));
        app->add_option("--max-t", max_t, "Keep pairs with index t <= max-t")->check(CLI::PositiveNumber);
        app->add_option("--out", out, "Output CSV (default stdout)");
    }

    void run(RunContext& ctx) const {
        const Corpus c = data.load(ctx);
        const auto rows = build_design(c, parse_model_form(model), max_t);
        OutputStream os(out, ctx);
        *os << "series_id,t,response,regressor\n";
        for (const auto& r : rows)
            *os << quote_csv_field(r.series_id) << ',' << r.t << ',' << format_double(r.response) << ','
                << format_double(r.regressor) << '\n';
    }
};

struct FitCmd {
    DataOptions data;
    std::string model = "power_law", mask = "default", out, effects_out;
    double variance_floor = 1e-6;
    std::optional<int> cutoff;
    bool leave_last_out = false;

    void setup(CLI::App* app) {
        data.add(app);
        app->add_option("--model", model, "Regressor form")->default_val("power_law")->check(CLI::IsMember({"power_law", "exponential"}));
        app->add_option("--mask", mask,
                        "Pinned covariance entries: default, none, or a list of fix_var_alpha,fix_var_beta,fix_cov")
            ->default_val("default");
        app->add_option("--variance-floor", variance_floor, "Value of pinned variances")->default_val(1e-6)->check(CLI::PositiveNumber);
        auto* k = app->add_option("--cutoff", cutoff, "Fit on the first K records of each series");
        auto* l = app->add_flag("--leave-last-out", leave_last_out, "Fit on all but the final improvement of each series");
        k->excludes(l);
        app->add_option("--out", out, "Fit JSON")->required();
        app->add_option("--effects-out", effects_out, "Per-series conditional modes as CSV");
    }

    void run(RunContext& ctx) const {
        const Corpus c = data.load(ctx);
        const ModelForm form = parse_model_form(model);
        const SeriesKind kind = c.front().kind;
        std::vector<ImprovementSample> rows;
        for (const auto& s : c) {
            if (s.size() < 2) continue;
            int n = static_cast<int>(s.size()) - 1;
            if (cutoff) {
                if (*cutoff < 2) throw ConfigError("--cutoff must be >= 2");
                n = std::min(n, *cutoff - 1);
            }
            if (leave_last_out) n -= 1;
            if (n < 1) continue;
            auto r = build_design(s, form, n);
            rows.insert(rows.end(), r.begin(), r.end());
        }
        const auto f = fit(rows, parse_mask(mask, kind, form, variance_floor));
        ctx.log->info("fit: {} obs, {} groups, loglik {:.4f}, converged {}", f.n_obs, f.n_groups, f.loglik, f.converged);
        write_json_output(out, io::to_json(f), ctx);
        if (!effects_out.empty()) {
            OutputStream os(effects_out, ctx);
            *os << "series_id,alpha,beta\n";
            for (const auto& [id, e] : f.group_effects)
                *os << quote_csv_field(id) << ',' << format_double(e.alpha) << ',' << format_double(e.beta) << '\n';
        }
    }
};

struct BaselineCmd {
    DataOptions data;
    std::string model, protocol, out;
    std::optional<double> decay;

    void setup(CLI::App* app) {
        data.add(app);
        app->add_option("--model", model, "Comparison model")->required()->check(CLI::IsMember({"zero", "fixed", "ema"}));
        app->add_option("--decay", decay, "EMA decay in (0, 1]; ex-post tuned when omitted");
        app->add_option("--protocol", protocol, "speedrun-K<k> or ml-lastout (default by series kind)");
        app->add_option("--out", out, "Per-row predictions CSV (default stdout)");
    }

    void run(RunContext& ctx) const {
        const Corpus c = data.load(ctx);
        BenchProtocol p = parse_protocol(protocol, c.front().kind);
        p.models = {model};
        p.ema_decay = decay;
        p.n_resamples = 0;
        const auto rep = run_benchmark(c, p);
        if (rep.ema_decay) ctx.log->info("ema decay {}", *rep.ema_decay);
        OutputStream os(out, ctx);
        *os << "series_id,t,current,actual,predicted,error,error_secondary,fallback\n";
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            const auto& r = rep.rows[i];
            *os << quote_csv_field(r.series_id) << ',' << r.t << ',' << format_double(r.current) << ','
                << format_double(r.actual) << ',' << format_double(r.predicted[0]) << ','
                << format_double(rep.errors[0][i]) << ',' << format_double(rep.secondary_errors[0][i]) << ','
                << (r.fallback ? "true" : "false") << '\n';
        }
    }
};

struct BenchmarkCmd {
    DataOptions data;
    std::string protocol, models, out, point = "median", mask = "default", sweep, sweep_out, scatter_out,
                                                 scatter_models = "zero,re";
    std::size_t resamples = 10000;
    std::optional<std::uint64_t> seed;
    std::optional<double> ema_decay;

    void setup(CLI::App* app) {
        data.add(app);
        app->add_option("--protocol", protocol, "speedrun-K<k> or ml-lastout (default by series kind)");
        app->add_option("--models", models, "Comma-separated subset of zero,fixed,ema,re,re_mean,re_exp");
        app->add_option("--resamples", resamples, "Paired bootstrap resamples (0 skips the tests)")->default_val(10000);
        app->add_option("--seed", seed, "Root RNG seed");
        app->add_option("--ema-decay", ema_decay, "Fixed EMA decay instead of ex-post tuning");
        app->add_option("--point", point, "Point forecast of the random-effects models")
            ->default_val("median")
            ->check(CLI::IsMember({"median", "mean"}));
        app->add_option("--mask", mask, "Covariance mask of the random-effects models")->default_val("default");
        app->add_option("--out", out, "Report JSON")->required();
        app->add_option("--sweep", sweep, "Comma-separated cutoffs for a cutoff sweep");
        app->add_option("--sweep-out", sweep_out, "Sweep JSON (with --sweep)");
        app->add_option("--scatter-out", scatter_out, "Error scatter CSV");
        app->add_option("--scatter-models", scatter_models, "Models a,b for the scatter (x = a)")->default_val("zero,re");
    }

    BenchProtocol protocol_for(const Corpus& c, RunContext& ctx) const {
        const SeriesKind kind = c.front().kind;
        BenchProtocol p = parse_protocol(protocol, kind);
        if (!models.empty()) p.models = split_list(models);
        p.seed = ctx.resolve_seed(seed);
        p.n_resamples = resamples;
        p.ema_decay = ema_decay;
        p.point_mode = point == "mean" ? PointMode::mean : PointMode::median;
        p.re_spec = parse_mask(mask, kind, ModelForm::power_law, 1e-6);
        if (resamples != 0 && resamples < 1000) throw ConfigError("--resamples must be 0 or >= 1000");
        return p;
    }

    void run(RunContext& ctx) const {
        const Corpus c = data.load(ctx);
        const BenchProtocol p = protocol_for(c, ctx);
        const auto rep = run_benchmark(c, p);
        for (const auto& m : rep.models)
            ctx.log->info("{:>8}  L2 {:.5f}  L1 {:.5f}", m, rep.metrics.at(m).l2, rep.metrics.at(m).l1);
        write_json_output(out, io::to_json(rep), ctx);
        if (!scatter_out.empty()) {
            const auto ab = split_list(scatter_models);
            if (ab.size() != 2) throw ConfigError("--scatter-models needs exactly two models");
            OutputStream os(scatter_out, ctx);
            emit_plot_data(*os, rep, ab[0], ab[1]);
        }
        if (!sweep.empty()) {
            if (sweep_out.empty()) throw ConfigError("--sweep needs --sweep-out");
            BenchProtocol base = p;
            base.n_resamples = 0;
            write_json_output(sweep_out, io::to_json(cutoff_sweep(c, parse_int_list(sweep), base)), ctx);
        }
    }
};

struct ForecastCmd {
    DataOptions data;
    std::string delta_t = "8w", data_end, out;
    int n_min = 15, n_max = 45, sims = 1;
    std::size_t resamples = 10000;
    std::optional<std::uint64_t> seed;

    void setup(CLI::App* app) {
        data.add(app);
        app->add_option("--delta-t", delta_t, "Horizon, e.g. 8w, 56d, 3600s")->default_val("8w");
        app->add_option("--n-min", n_min, "Smallest forecast origin N")->default_val(15);
        app->add_option("--n-max", n_max, "Largest forecast origin N")->default_val(45);
        app->add_option("--sims", sims, "Trajectories per forecast (median-aggregated)")->default_val(1);
        app->add_option("--seed", seed, "Root RNG seed");
        app->add_option("--resamples", resamples, "Paired bootstrap resamples (0 skips the test)")->default_val(10000);
        app->add_option("--data-end", data_end, "End of the observation window (RFC 3339); default: last record per series");
        app->add_option("--out", out, "Horizon report JSON")->required();
    }

    void run(RunContext& ctx) const {
        const Corpus c = data.load(ctx);
        HorizonConfig cfg;
        cfg.delta_t = parse_duration(delta_t);
        cfg.n_min = n_min;
        cfg.n_max = n_max;
        cfg.n_simulations = sims;
        cfg.n_resamples = resamples;
        cfg.seed = ctx.resolve_seed(seed);
        if (!data_end.empty()) cfg.data_end = parse_rfc3339_utc(data_end);
        if (resamples != 0 && resamples < 1000) throw ConfigError("--resamples must be 0 or >= 1000");
        const auto rep = evaluate_horizon(c, cfg);
        ctx.log->info("horizon: {} rows, {} excluded", rep.n_rows(), rep.n_excluded);
        for (const auto& m : rep.models) ctx.log->info("{:>10}  L2 {:.5f}", m, rep.metrics.at(m).l2);
        Json j = io::to_json(rep);
        j["horizon"] = Json{{"delta_t_seconds", cfg.delta_t},
                            {"n_min", cfg.n_min},
                            {"n_max", cfg.n_max},
                            {"n_simulations", cfg.n_simulations},
                            {"data_end", cfg.data_end ? Json(format_rfc3339_utc(*cfg.data_end)) : Json(nullptr)}};
        write_json_output(out, j, ctx);
    }
};

struct SimulateCmd {
    std::string experiment, out;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    int i_max = 30, n_series = 25, length = 50;
    double alpha = 0.0;
    double cap = std::numeric_limits<double>::infinity();

    void setup(CLI::App* app) {
        app->add_option("--experiment", experiment, "Experiment to run")
            ->required()
            ->check(CLI::IsMember({"record-times", "gumbel", "asymptotics"}));
        app->add_option("--runs", runs, "Ensemble size / number of seeds / grid points");
        app->add_option("--seed", seed, "Root RNG seed");
        app->add_option("--out", out, "Results CSV")->required();
        app->add_option("--i-max", i_max, "record-times: largest record index")->default_val(30)->check(CLI::PositiveNumber);
        app->add_option("--attempt-cap", cap, "record-times: censor runs whose record time exceeds this");
        app->add_option("--alpha", alpha, "gumbel: log scale of the log-record spread")->default_val(0.0);
        app->add_option("--n-series", n_series, "gumbel: series per fit")->default_val(25);
        app->add_option("--length", length, "gumbel: records per series")->default_val(50);
    }

    void run(RunContext& ctx) const {
        const std::uint64_t s = ctx.resolve_seed(seed);
        OutputStream os(out, ctx);
        if (experiment == "record-times") {
            const auto g = theory::record_time_growth(runs.value_or(10000), i_max, s, cap);
            ctx.log->info("{} runs, {} censored", g.n_runs, g.n_censored);
            *os << "i,mean_log_n,se_mean_log_n,var_log_n,growth,se_growth\n";
            for (std::size_t i = 0; i < g.mean_log_n.size(); ++i)
                *os << i + 1 << ',' << format_double(g.mean_log_n[i]) << ',' << format_double(g.se_mean_log_n[i]) << ','
                    << format_double(g.var_log_n[i]) << ',' << format_double(g.growth[i]) << ','
                    << format_double(g.se_growth[i]) << '\n';
        } else if (experiment == "gumbel") {
            *os << "run,alpha,fitted_alpha,fitted_beta,se_beta,degenerate\n";
            for (std::size_t r = 0; r < runs.value_or(10); ++r) {
                const auto g = theory::gumbel_consistency_check(alpha, n_series, length, derive_seed(s, {r}));
                *os << r << ',' << format_double(alpha) << ',' << format_double(g.fitted_alpha) << ','
                    << format_double(g.fitted_beta) << ',' << format_double(g.se_beta) << ','
                    << (g.degenerate ? "true" : "false") << '\n';
            }
        } else {
            SplitMix64 rng(s);
            std::uniform_real_distribution<double> ua(-3.0, 1.0), ub(-3.0, -1.05);
            *os << "alpha,beta,r1,limit,log_record_1e8,tail_bound\n";
            for (std::size_t r = 0; r < runs.value_or(50); ++r) {
                const theory::PowerLawParams p{ua(rng), ub(rng), 100.0};
                const auto lim = theory::asymptotic_limit(p);
                const double tail = std::exp(p.alpha) * std::pow(1e8, p.beta + 1.0) / -(p.beta + 1.0);
                *os << format_double(p.alpha) << ',' << format_double(p.beta) << ',' << format_double(p.r1) << ','
                    << format_double(lim.limit) << ',' << format_double(theory::log_record_at(p, 1e8)) << ','
                    << format_double(tail) << '\n';
            }
        }
    }
};

struct ReportCmd {
    std::string plot = "summary", data_path, report_path, models = "zero,re", out;

    void setup(CLI::App* app) {
        app->add_option("--plot", plot, "Table to emit")
            ->default_val("summary")
            ->check(CLI::IsMember({"summary", "series", "mean_loglog", "error_scatter"}));
        app->add_option("--data", data_path, "Record-series CSV (series, mean_loglog)");
        app->add_option("--report", report_path, "Benchmark or horizon report JSON (summary, error_scatter)");
        app->add_option("--models", models, "Models a,b for error_scatter")->default_val("zero,re");
        app->add_option("--out", out, "Output CSV (default stdout)");
    }

    void run(RunContext& ctx) const {
        if (plot == "series" || plot == "mean_loglog") {
            if (data_path.empty()) throw ConfigError("--plot " + plot + " needs --data");
            ctx.input(data_path);
            const Corpus c = load_csv(fs::path(data_path));
            OutputStream os(out, ctx);
            emit_plot_data(*os, c, parse_plot_kind(plot));
            return;
        }
        if (report_path.empty()) throw ConfigError("--plot " + plot + " needs --report");
        ctx.input(report_path);
        const auto rep = io::report_from_json(io::read_json(report_path));
        OutputStream os(out, ctx);
        if (plot == "error_scatter") {
            const auto ab = split_list(models);
            if (ab.size() != 2) throw ConfigError("--models needs exactly two models");
            emit_plot_data(*os, rep, ab[0], ab[1]);
            return;
        }
        *os << "model,n_rows,l2,l1,l2_secondary,l1_secondary\n";
        for (const auto& m : rep.models) {
            const auto& v = rep.metrics.at(m);
            *os << m << ',' << rep.n_rows() << ',' << format_double(v.l2) << ',' << format_double(v.l1) << ','
                << format_double(v.l2_secondary) << ',' << format_double(v.l1_secondary) << '\n';
        }
    }
};

Json option_values(const CLI::App* app) {
    Json j = Json::object();
    for (const CLI::Option* opt : app->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config") continue;
        if (opt->count() > 0) {
            const auto& r = opt->results();
            j[name] = r.size() == 1 ? Json(r.front()) : Json(r);
        } else if (!opt->get_default_str().empty()) {
            j[name] = opt->get_default_str();
        }
    }
    return j;
}

Json file_digests(const std::vector<fs::path>& paths) {
    Json arr = Json::array();
    for (const auto& p : paths) arr.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
    return arr;
}

int replay(const std::string& manifest_path, std::ostream& out, std::ostream& err,
           const std::shared_ptr<spdlog::logger>& log) {
    const Json m = io::read_json(manifest_path);
    if (m.value("format", "") != "recordlaw.manifest") throw ParseError("'" + manifest_path + "' is not a run manifest");
    const fs::path cwd = m.at("cwd").get<std::string>();
    const auto old = fs::current_path();
    struct Restore {
        fs::path p;
        ~Restore() { fs::current_path(p); }
    } restore{old};
    fs::current_path(cwd);
    for (const auto& in : m.at("inputs")) {
        const auto path = in.at("path").get<std::string>();
        if (sha256_file(path) != in.at("sha256").get<std::string>())
            throw DataError("input '" + path + "' changed since the recorded run");
    }
    const auto args = m.at("replay_argv").get<std::vector<std::string>>();
    log->info("replaying in {}", cwd.string());
    const int code = run(args, out, err);
    if (code != kOk) return code;
    bool same = true;
    for (const auto& o : m.at("outputs")) {
        const auto path = o.at("path").get<std::string>();
        if (sha256_file(path) != o.at("sha256").get<std::string>()) {
            log->error("output '{}' differs from the recorded run", path);
            same = false;
        }
    }
    if (!same) return kDomainError;
    log->info("replay reproduced {} output(s)", m.at("outputs").size());
    return kOk;
}

bool is_json_path(const std::string& p) {
    const auto ext = fs::path(p).extension().string();
    return ext == ".json" || ext == ".JSON";
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

double parse_duration(const std::string& text) {
    if (text.empty()) throw ConfigError("empty duration");
    double unit = 1.0;
    std::string num = text;
    switch (text.back()) {
        case 'w': unit = kSecondsPerWeek; break;
        case 'd': unit = 86400.0; break;
        case 'h': unit = 3600.0; break;
        case 'm': unit = 60.0; break;
        case 's': unit = 1.0; break;
        default: unit = 0.0;
    }
    if (unit != 0.0) num.pop_back();
    else unit = 1.0;
    const auto v = parse_double(num);
    if (!v || !(*v > 0.0)) throw ConfigError("invalid duration '" + text + "'");
    return *v * unit;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Record-progression modelling: ingest, fit, benchmark, forecast, simulate.", "recordlaw"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.allow_config_extras(CLI::config_extras_mode::ignore);
    app.set_version_flag("--version", kVersion);
    std::string log_level = "info", manifest_path;
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
        ->default_val("info")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
    app.add_option("--manifest", manifest_path, "Where to write run-manifest.json (default: next to --out)");
    auto* cfg = app.set_config("--config", "", "TOML or JSON configuration; flags override it");

    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config" && is_json_path(args[i + 1])) app.config_formatter(std::make_shared<JsonConfig>());
    for (const auto& a : args)
        if (a.rfind("--config=", 0) == 0 && is_json_path(a.substr(9))) app.config_formatter(std::make_shared<JsonConfig>());

    FetchCmd fetch_cmd;
    ValidateCmd validate_cmd;
    TransformCmd transform_cmd;
    FitCmd fit_cmd;
    BaselineCmd baseline_cmd;
    BenchmarkCmd benchmark_cmd;
    ForecastCmd forecast_cmd;
    SimulateCmd simulate_cmd;
    ReportCmd report_cmd;
    std::string replay_path;

    struct Entry {
        CLI::App* app;
        std::function<void(RunContext&)> run;
        std::string* out;
    };
    std::vector<Entry> entries;
    auto add = [&](auto& cmd, const char* name, const char* help, std::string* out_path) {
        auto* sub = app.add_subcommand(name, help);
        cmd.setup(sub);
        entries.push_back({sub, [&cmd](RunContext& ctx) { cmd.run(ctx); }, out_path});
    };
    add(fetch_cmd, "fetch", "Download speedrun record histories", &fetch_cmd.out);
    add(validate_cmd, "validate", "Check a record-series CSV", nullptr);
    add(transform_cmd, "transform", "Emit regression rows (response, regressor)", &transform_cmd.out);
    add(fit_cmd, "fit", "Fit the random-effects improvement model", &fit_cmd.out);
    add(baseline_cmd, "baseline", "Per-row predictions of a comparison model", &baseline_cmd.out);
    add(benchmark_cmd, "benchmark", "Out-of-sample benchmark with paired bootstrap tests", &benchmark_cmd.out);
    add(forecast_cmd, "forecast", "Horizon forecasts by trajectory simulation", &forecast_cmd.out);
    add(simulate_cmd, "simulate", "Record-process experiments", &simulate_cmd.out);
    add(report_cmd, "report", "Plot-ready CSV tables from corpora and reports", &report_cmd.out);
    auto* replay_app = app.add_subcommand("replay", "Re-run a recorded run-manifest.json and compare outputs");
    replay_app->add_option("manifest", replay_path, "run-manifest.json")->required()->check(CLI::ExistingFile);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    auto log = make_logger(err, log_level);
    try {
        if (replay_app->parsed()) return replay(replay_path, out, err, log);
        for (const auto& e : entries) {
            if (!e.app->parsed()) continue;
            RunContext ctx;
            ctx.log = log;
            ctx.out = &out;
            if (!cfg->empty()) ctx.input(cfg->as<std::string>());
            e.run(ctx);

            fs::path mpath = manifest_path;
            if (mpath.empty() && e.out && !e.out->empty() && *e.out != "-")
                mpath = fs::path(*e.out).parent_path() / "run-manifest.json";
            if (!mpath.empty()) {
                std::vector<std::string> replay_argv = args;
                if (ctx.seed_generated) {
                    replay_argv.push_back("--seed");
                    replay_argv.push_back(std::to_string(*ctx.seed));
                }
                Json config{{"global", option_values(&app)}, {e.app->get_name(), option_values(e.app)}};
                Json m{{"format", "recordlaw.manifest"},
                       {"tool", "recordlaw"},
                       {"version", kVersion},
                       {"subcommand", e.app->get_name()},
                       {"argv", args},
                       {"replay_argv", replay_argv},
                       {"cwd", fs::current_path().generic_string()},
                       {"config", config},
                       {"seed", ctx.seed ? Json(*ctx.seed) : Json(nullptr)},
                       {"seed_generated", ctx.seed_generated},
                       {"inputs", file_digests(ctx.inputs)},
                       {"outputs", file_digests(ctx.outputs)}};
                io::write_json(mpath, m);
                log->debug("manifest written to {}", mpath.string());
            }
        }
        return kOk;
    } catch (const ConfigError& e) {
        log->error("{}", e.what());
        return kUsageError;
    } catch (const std::exception& e) {
        log->error("{}", e.what());
        return kDomainError;
    }
}

}  // namespace recordlaw::cli
