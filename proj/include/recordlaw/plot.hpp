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

// Plot-ready CSV tables. Rendering is left to external tools.

#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "recordlaw/bench.hpp"
#include "recordlaw/csv.hpp"
#include "recordlaw/error.hpp"
#include "recordlaw/series.hpp"
#include "recordlaw/transform.hpp"

namespace recordlaw {

enum class PlotKind { series, mean_loglog, error_scatter };

inline std::string_view to_string(PlotKind k) {
    switch (k) {
        case PlotKind::series: return "series";
        case PlotKind::mean_loglog: return "mean_loglog";
        default: return "error_scatter";
    }
}

inline PlotKind parse_plot_kind(std::string_view s) {
    if (s == "series") return PlotKind::series;
    if (s == "mean_loglog") return PlotKind::mean_loglog;
    if (s == "error_scatter") return PlotKind::error_scatter;
    throw ConfigError("unknown plot kind '" + std::string(s) + "'");
}

/// Cross-series summary of the transformed response at one improvement index t.
struct LogLogPoint {
    int t = 0;
    std::size_t n_series = 0;
    double mean = 0.0;
    double sd = 0.0;  ///< population standard deviation across series
};

inline std::vector<LogLogPoint> mean_loglog(const Corpus& corpus) {
    std::map<int, std::vector<double>> by_t;
    for (const auto& s : corpus)
        for (std::size_t i = 0; i + 1 < s.size(); ++i)
            by_t[static_cast<int>(i) + 1].push_back(response(s.kind, s.records[i].value, s.records[i + 1].value));
    std::vector<LogLogPoint> out;
    for (const auto& [t, ys] : by_t) {
        double m = 0.0;
        for (double y : ys) m += y;
        m /= static_cast<double>(ys.size());
        double ss = 0.0;
        for (double y : ys) ss += (y - m) * (y - m);
        out.push_back({t, ys.size(), m, std::sqrt(ss / static_cast<double>(ys.size()))});
    }
    return out;
}

/// series: series_id,timestamp_utc,t,value
/// mean_loglog: t,log_t,n_series,mean,sd,lower,upper (bands are mean -/+ sd)
inline void emit_plot_data(std::ostream& out, const Corpus& corpus, PlotKind kind) {
    switch (kind) {
        case PlotKind::series:
            out << "series_id,timestamp_utc,t,value\n";
            for (const auto& s : corpus)
                for (std::size_t i = 0; i < s.size(); ++i)
                    out << quote_csv_field(s.series_id) << ',' << format_rfc3339_utc(s.records[i].timestamp) << ','
                        << i + 1 << ',' << format_double(s.records[i].value) << '\n';
            return;
        case PlotKind::mean_loglog:
            out << "t,log_t,n_series,mean,sd,lower,upper\n";
            for (const auto& p : mean_loglog(corpus))
                out << p.t << ',' << format_double(std::log(static_cast<double>(p.t))) << ',' << p.n_series << ','
                    << format_double(p.mean) << ',' << format_double(p.sd) << ',' << format_double(p.mean - p.sd) << ','
                    << format_double(p.mean + p.sd) << '\n';
            return;
        default:
            throw ConfigError("error_scatter plots need a benchmark report");
    }
}

/// error_scatter: series_id,t,abs_error_a,abs_error_b with x = model a, y = model b.
inline void emit_plot_data(std::ostream& out, const BenchmarkReport& report, const std::string& model_a,
                           const std::string& model_b) {
    const auto d = error_scatter(report, model_a, model_b);
    out << "series_id,t,abs_error_" << model_a << ",abs_error_" << model_b << '\n';
    for (std::size_t i = 0; i < d.points.size(); ++i)
        out << quote_csv_field(report.rows[i].series_id) << ',' << report.rows[i].t << ','
            << format_double(d.points[i].first) << ',' << format_double(d.points[i].second) << '\n';
}

}  // namespace recordlaw
