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

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "recordlaw/error.hpp"
#include "recordlaw/series.hpp"

namespace recordlaw {

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

/// Parses an RFC 3339 timestamp that must denote UTC ("Z", "+00:00" or "-00:00").
/// Fractional seconds are truncated. A bare date (YYYY-MM-DD) is read as midnight UTC.
inline UtcSeconds parse_rfc3339_utc(std::string_view s) {
    using namespace std::chrono;
    int y, mo, d, h = 0, mi = 0, sec = 0;
    auto bad = [&](const char* why) { return ParseError(std::string(why) + ": '" + std::string(s) + "'"); };
    if (!detail::parse_fixed_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || s[7] != '-' ||
        !detail::parse_fixed_int(s, 5, 2, mo) || !detail::parse_fixed_int(s, 8, 2, d))
        throw bad("malformed date");
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw bad("invalid calendar date");
    std::int64_t total = static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count()) * 86400;
    if (s.size() == 10) return total;

    if ((s[10] != 'T' && s[10] != 't' && s[10] != ' ') || s.size() < 19 || s[13] != ':' || s[16] != ':' ||
        !detail::parse_fixed_int(s, 11, 2, h) || !detail::parse_fixed_int(s, 14, 2, mi) ||
        !detail::parse_fixed_int(s, 17, 2, sec))
        throw bad("malformed time");
    if (h > 23 || mi > 59 || sec > 60) throw bad("time out of range");
    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) throw bad("malformed fractional seconds");
    }
    const std::string_view zone = s.substr(pos);
    if (zone != "Z" && zone != "z" && zone != "+00:00" && zone != "-00:00")
        throw bad(zone.empty() ? "missing UTC designator" : "non-UTC timestamp");
    return total + h * 3600 + mi * 60 + sec;
}

inline std::string format_rfc3339_utc(UtcSeconds t) {
    using namespace std::chrono;
    std::int64_t days_since = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
    std::int64_t rem = t - days_since * 86400;
    const year_month_day ymd{sys_days{days{days_since}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
    return buf;
}

/// Shortest decimal representation that round-trips exactly.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field");
    out.push_back(std::move(cur));
    return out;
}

inline std::string quote_csv_field(std::string_view f) {
    if (f.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(f);
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline constexpr std::array<std::string_view, 5> kCsvColumns{"series_id", "kind", "metric_name",
                                                             "timestamp_utc", "value"};

/// Reads the corpus CSV (`series_id,kind,metric_name,timestamp_utc,value`).
///
/// Rows must be grouped by series and ordered by time. Every series must be a strict
/// frontier: a tie or regression is an error naming the row (line number, header = 1).
/// When `expected_kind` is set, rows of another kind are rejected.
inline Corpus load_csv(std::istream& in, std::optional<SeriesKind> expected_kind = std::nullopt) {
    std::string line;
    long row = 0;
    std::array<std::size_t, 5> col{};
    std::size_t n_cols = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    if (row == 0 || line.empty()) throw ParseError("empty file: missing header row");
    {
        auto header = split_csv_line(line);
        if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
        n_cols = header.size();
        for (std::size_t k = 0; k < kCsvColumns.size(); ++k) {
            auto it = std::find(header.begin(), header.end(), kCsvColumns[k]);
            if (it == header.end()) throw ParseError("missing column", row, std::string(kCsvColumns[k]));
            col[k] = static_cast<std::size_t>(it - header.begin());
        }
    }

    Corpus corpus;
    std::set<std::string> closed;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> f;
        try {
            f = split_csv_line(line);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), row);
        }
        if (f.size() != n_cols)
            throw ParseError("expected " + std::to_string(n_cols) + " fields, got " + std::to_string(f.size()),
                             row);
        const std::string& id = f[col[0]];
        if (id.empty()) throw ParseError("empty series id", row, "series_id");
        SeriesKind kind;
        try {
            kind = parse_series_kind(f[col[1]]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), row, "kind");
        }
        if (expected_kind && kind != *expected_kind)
            throw ParseError("kind '" + std::string(to_string(kind)) + "' where '" +
                                 std::string(to_string(*expected_kind)) + "' expected",
                             row, "kind");
        UtcSeconds ts;
        try {
            ts = parse_rfc3339_utc(f[col[3]]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), row, "timestamp_utc");
        }
        auto value = parse_double(f[col[4]]);
        if (!value) throw ParseError("not a decimal number: '" + f[col[4]] + "'", row, "value");
        if (!value_in_domain(kind, *value))
            throw ParseError("value " + f[col[4]] + " out of domain for " + std::string(to_string(kind)), row,
                             "value");

        if (corpus.empty() || corpus.back().series_id != id) {
            if (!corpus.empty()) closed.insert(corpus.back().series_id);
            if (closed.count(id)) throw ParseError("rows of series '" + id + "' are not contiguous", row, "series_id");
            corpus.push_back(RecordSeries{id, kind, f[col[2]], {}});
        }
        RecordSeries& s = corpus.back();
        if (s.kind != kind) throw ParseError("kind changes within series '" + id + "'", row, "kind");
        if (s.metric_name != f[col[2]])
            throw ParseError("metric name changes within series '" + id + "'", row, "metric_name");
        if (!s.records.empty()) {
            const Record& prev = s.records.back();
            if (ts <= prev.timestamp) throw ParseError("timestamp not after previous record", row, "timestamp_utc");
            if (*value == prev.value) throw ParseError("tie with previous record", row, "value");
            if (*value > prev.value) throw ParseError("value does not improve on previous record", row, "value");
        }
        s.records.push_back(Record{ts, *value});
    }
    return corpus;
}

inline Corpus load_csv(const std::filesystem::path& path, std::optional<SeriesKind> expected_kind = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return load_csv(in, expected_kind);
}

inline void write_csv(std::ostream& out, const Corpus& corpus) {
    out << "series_id,kind,metric_name,timestamp_utc,value\n";
    for (const auto& s : corpus)
        for (const auto& r : s.records)
            out << quote_csv_field(s.series_id) << ',' << to_string(s.kind) << ','
                << quote_csv_field(s.metric_name) << ',' << format_rfc3339_utc(r.timestamp) << ','
                << format_double(r.value) << '\n';
}

inline void write_csv(const std::filesystem::path& path, const Corpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    write_csv(out, corpus);
}

}  // namespace recordlaw
