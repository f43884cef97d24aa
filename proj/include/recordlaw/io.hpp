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

#pragma once

// JSON documents for fits, benchmark reports, cutoff sweeps and horizon evaluations.
// Requires nlohmann/json. Field names are stable; see docs/fit-format.md and
// docs/report-format.md.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "recordlaw/bench.hpp"
#include "recordlaw/error.hpp"
#include "recordlaw/mixed_model.hpp"

namespace recordlaw::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFitFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

/// NaN and infinities become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double number_from(const Json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline Json to_json(const MixedModelSpec& s) {
    return Json{{"model_form", std::string(to_string(s.model_form))},
                {"mask",
                 {{"fix_var_alpha", s.mask.fix_var_alpha},
                  {"fix_var_beta", s.mask.fix_var_beta},
                  {"fix_cov", s.mask.fix_cov}}},
                {"variance_floor", s.variance_floor}};
}

inline MixedModelSpec spec_from_json(const Json& j) {
    MixedModelSpec s;
    s.model_form = parse_model_form(j.at("model_form").get<std::string>());
    const auto& m = j.at("mask");
    s.mask = {m.at("fix_var_alpha").get<bool>(), m.at("fix_var_beta").get<bool>(), m.at("fix_cov").get<bool>()};
    s.variance_floor = j.at("variance_floor").get<double>();
    return s;
}

inline Json to_json(const MixedModelFit& f) {
    Json effects = Json::object();
    for (const auto& [id, e] : f.group_effects) effects[id] = {{"alpha", e.alpha}, {"beta", e.beta}};
    return Json{{"format", "recordlaw.fit"},
                {"version", kFitFormatVersion},
                {"spec", to_json(f.spec)},
                {"mean_alpha", f.mean_alpha},
                {"mean_beta", f.mean_beta},
                {"var_alpha", f.var_alpha},
                {"var_beta", f.var_beta},
                {"cov_ab", f.cov_ab},
                {"scale", f.scale},
                {"loglik", number(f.loglik)},
                {"se",
                 {{"mean_alpha", number(f.se_mean_alpha)},
                  {"mean_beta", number(f.se_mean_beta)},
                  {"var_alpha", number(f.se_var_alpha)},
                  {"var_beta", number(f.se_var_beta)},
                  {"cov_ab", number(f.se_cov_ab)}}},
                {"n_obs", f.n_obs},
                {"n_groups", f.n_groups},
                {"min_group_size", f.min_group_size},
                {"max_group_size", f.max_group_size},
                {"converged", f.converged},
                {"iterations", f.iterations},
                {"gradient_norm", number(f.gradient_norm)},
                {"theta", f.theta},
                {"group_effects", effects}};
}

inline MixedModelFit fit_from_json(const Json& j) {
    try {
        if (j.at("format").get<std::string>() != "recordlaw.fit") throw ParseError("not a recordlaw fit document");
        if (j.at("version").get<int>() != kFitFormatVersion)
            throw ParseError("unsupported fit format version " + j.at("version").dump());
        MixedModelFit f;
        f.spec = spec_from_json(j.at("spec"));
        f.mean_alpha = j.at("mean_alpha").get<double>();
        f.mean_beta = j.at("mean_beta").get<double>();
        f.var_alpha = j.at("var_alpha").get<double>();
        f.var_beta = j.at("var_beta").get<double>();
        f.cov_ab = j.at("cov_ab").get<double>();
        f.scale = j.at("scale").get<double>();
        f.loglik = number_from(j.at("loglik"));
        const auto& se = j.at("se");
        f.se_mean_alpha = number_from(se.at("mean_alpha"));
        f.se_mean_beta = number_from(se.at("mean_beta"));
        f.se_var_alpha = number_from(se.at("var_alpha"));
        f.se_var_beta = number_from(se.at("var_beta"));
        f.se_cov_ab = number_from(se.at("cov_ab"));
        f.n_obs = j.at("n_obs").get<std::size_t>();
        f.n_groups = j.at("n_groups").get<std::size_t>();
        f.min_group_size = j.at("min_group_size").get<std::size_t>();
        f.max_group_size = j.at("max_group_size").get<std::size_t>();
        f.converged = j.at("converged").get<bool>();
        f.iterations = j.at("iterations").get<int>();
        f.gradient_norm = number_from(j.at("gradient_norm"));
        f.theta = j.at("theta").get<std::vector<double>>();
        for (const auto& [id, e] : j.at("group_effects").items())
            f.group_effects[id] = {e.at("alpha").get<double>(), e.at("beta").get<double>()};
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fit document: ") + e.what());
    }
}

inline Json to_json(const ModelMetrics& m) {
    return Json{{"l2", number(m.l2)}, {"l1", number(m.l1)}, {"l2_secondary", number(m.l2_secondary)},
                {"l1_secondary", number(m.l1_secondary)}};
}

inline Json to_json(const BenchmarkReport& r) {
    Json summary = Json::array();
    for (const auto& m : r.models) {
        Json row{{"model", m}};
        row.update(to_json(r.metrics.at(m)));
        summary.push_back(row);
    }
    Json p_values = Json::object();
    for (const auto& [k, v] : r.p_values) p_values[k] = number(v);
    Json fits = Json::object();
    for (const auto& [k, f] : r.fits) fits[k] = to_json(f);
    Json rows = Json::array();
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        Json pred = Json::object(), err = Json::object(), err2 = Json::object();
        for (std::size_t m = 0; m < r.models.size(); ++m) {
            pred[r.models[m]] = number(row.predicted[m]);
            err[r.models[m]] = number(r.errors[m][i]);
            err2[r.models[m]] = number(r.secondary_errors[m][i]);
        }
        rows.push_back(Json{{"series_id", row.series_id},
                            {"t", row.t},
                            {"current", row.current},
                            {"actual", row.actual},
                            {"fallback", row.fallback},
                            {"predicted", pred},
                            {"error", err},
                            {"error_secondary", err2}});
    }
    return Json{{"format", "recordlaw.report"},
                {"version", kReportFormatVersion},
                {"protocol", r.protocol},
                {"kind", std::string(to_string(r.kind))},
                {"seed", r.seed},
                {"n_resamples", r.n_resamples},
                {"n_rows", r.n_rows()},
                {"n_excluded", r.n_excluded},
                {"models", r.models},
                {"summary", summary},
                {"p_values", p_values},
                {"ema_decay", r.ema_decay ? Json(*r.ema_decay) : Json(nullptr)},
                {"fits", fits},
                {"rows", rows}};
}

/// Inverse of to_json(BenchmarkReport) for everything except the embedded fits.
inline BenchmarkReport report_from_json(const Json& j) {
    try {
        if (j.at("format").get<std::string>() != "recordlaw.report") throw ParseError("not a recordlaw report document");
        if (j.at("version").get<int>() != kReportFormatVersion)
            throw ParseError("unsupported report format version " + j.at("version").dump());
        BenchmarkReport r;
        r.protocol = j.at("protocol").get<std::string>();
        r.kind = parse_series_kind(j.at("kind").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        r.n_resamples = j.at("n_resamples").get<std::size_t>();
        r.n_excluded = j.at("n_excluded").get<std::size_t>();
        r.models = j.at("models").get<std::vector<std::string>>();
        for (const auto& m : j.at("summary"))
            r.metrics[m.at("model").get<std::string>()] = {number_from(m.at("l2")), number_from(m.at("l1")),
                                                           number_from(m.at("l2_secondary")),
                                                           number_from(m.at("l1_secondary"))};
        for (const auto& [k, v] : j.at("p_values").items()) r.p_values[k] = number_from(v);
        if (!j.at("ema_decay").is_null()) r.ema_decay = j.at("ema_decay").get<double>();
        r.errors.assign(r.models.size(), {});
        r.secondary_errors.assign(r.models.size(), {});
        for (const auto& row : j.at("rows")) {
            ReportRow rr{row.at("series_id").get<std::string>(), row.at("t").get<int>(), row.at("current").get<double>(),
                         row.at("actual").get<double>(), {}, row.at("fallback").get<bool>()};
            for (std::size_t m = 0; m < r.models.size(); ++m) {
                rr.predicted.push_back(number_from(row.at("predicted").at(r.models[m])));
                r.errors[m].push_back(number_from(row.at("error").at(r.models[m])));
                r.secondary_errors[m].push_back(number_from(row.at("error_secondary").at(r.models[m])));
            }
            r.rows.push_back(std::move(rr));
        }
        if (j.at("n_rows").get<std::size_t>() != r.rows.size()) throw ParseError("n_rows does not match rows");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report document: ") + e.what());
    }
}

inline Json to_json(const std::vector<SweepRow>& sweep) {
    Json rows = Json::array();
    for (const auto& s : sweep) {
        Json metrics = Json::object();
        for (const auto& [m, v] : s.metrics) metrics[m] = to_json(v);
        rows.push_back(Json{{"K", s.K},
                            {"n_rows", s.n_rows},
                            {"ema_decay", s.ema_decay ? Json(*s.ema_decay) : Json(nullptr)},
                            {"metrics", metrics}});
    }
    return Json{{"format", "recordlaw.sweep"}, {"version", kReportFormatVersion}, {"rows", rows}};
}

inline Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

/// Pretty-printed with a trailing newline; output is byte-stable for equal inputs.
inline void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

}  // namespace recordlaw::io
