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
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "recordlaw/error.hpp"

namespace recordlaw {

enum class SeriesKind { speedrun, ml_benchmark };

inline std::string_view to_string(SeriesKind k) {
    return k == SeriesKind::speedrun ? "speedrun" : "ml_benchmark";
}

inline SeriesKind parse_series_kind(std::string_view s) {
    if (s == "speedrun") return SeriesKind::speedrun;
    if (s == "ml_benchmark" || s == "ml") return SeriesKind::ml_benchmark;
    throw ParseError("unknown series kind '" + std::string(s) + "'");
}

/// UTC seconds since the Unix epoch.
using UtcSeconds = std::int64_t;

struct Record {
    UtcSeconds timestamp = 0;
    double value = 0.0;

    friend bool operator==(const Record&, const Record&) = default;
};

/// One category or benchmark. Records are the strictly improving frontier.
struct RecordSeries {
    std::string series_id;
    SeriesKind kind = SeriesKind::speedrun;
    std::string metric_name;
    std::vector<Record> records;

    std::size_t size() const noexcept { return records.size(); }

    friend bool operator==(const RecordSeries&, const RecordSeries&) = default;
};

using Corpus = std::vector<RecordSeries>;

inline bool value_in_domain(SeriesKind kind, double v) {
    if (!std::isfinite(v)) return false;
    return kind == SeriesKind::speedrun ? v > 0.0 : (v > 0.0 && v < 1.0);
}

/// Index (0-based) of the first record that breaks the series invariants, or size() if none.
inline std::size_t first_invalid_record(const RecordSeries& s) {
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        const Record& r = s.records[i];
        if (!value_in_domain(s.kind, r.value)) return i;
        if (i > 0) {
            const Record& prev = s.records[i - 1];
            if (r.timestamp <= prev.timestamp || r.value >= prev.value) return i;
        }
    }
    return s.records.size();
}

inline bool is_valid(const RecordSeries& s) { return first_invalid_record(s) == s.records.size(); }

/// Throws DataError naming the offending record when the series is not a clean frontier.
inline void validate(const RecordSeries& s) {
    const std::size_t bad = first_invalid_record(s);
    if (bad == s.records.size()) return;
    const Record& r = s.records[bad];
    std::string why;
    if (!value_in_domain(s.kind, r.value))
        why = "value out of domain for " + std::string(to_string(s.kind));
    else if (r.timestamp <= s.records[bad - 1].timestamp)
        why = "timestamps not strictly increasing";
    else
        why = "value does not strictly improve on the previous record";
    throw DataError("series '" + s.series_id + "' record " + std::to_string(bad + 1) + ": " + why);
}

/// Reduces a raw attempt history (any order) to its strictly decreasing record frontier.
///
/// Attempts are ordered by timestamp (stable, so equal timestamps keep input order).
/// An attempt is a record when it beats the running minimum; ties and regressions are
/// dropped. An improvement sharing its timestamp with the current record replaces it,
/// which keeps timestamps strictly increasing. Out-of-domain values are skipped.
inline std::vector<Record> record_frontier(std::vector<Record> attempts, SeriesKind kind) {
    std::stable_sort(attempts.begin(), attempts.end(),
                     [](const Record& a, const Record& b) { return a.timestamp < b.timestamp; });
    std::vector<Record> out;
    for (const Record& a : attempts) {
        if (!value_in_domain(kind, a.value)) continue;
        if (out.empty()) {
            out.push_back(a);
        } else if (a.value < out.back().value) {
            if (a.timestamp == out.back().timestamp)
                out.back().value = a.value;
            else
                out.push_back(a);
        }
    }
    return out;
}

/// Inclusion rules for a corpus.
struct CorpusFilter {
    std::size_t min_records = 2;
    /// Speedrun only: series whose popularity rank (1-based) exceeds this are dropped.
    /// Zero disables the cut.
    std::size_t popularity_rank_cutoff = 0;
    /// ML only: when non-empty, only these metric names are kept.
    std::vector<std::string> allowed_metrics;
};

inline void check(const CorpusFilter& f) {
    if (f.min_records < 2) throw ConfigError("CorpusFilter.min_records must be >= 2");
}

/// Keeps series that meet the filter, preserving order. `ranks`, when given, is the
/// popularity rank of each series (parallel to `corpus`).
inline Corpus apply_filter(const Corpus& corpus, const CorpusFilter& filter,
                           const std::vector<std::size_t>& ranks = {}) {
    check(filter);
    Corpus out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const RecordSeries& s = corpus[i];
        if (s.size() < filter.min_records) continue;
        if (s.kind == SeriesKind::speedrun && filter.popularity_rank_cutoff > 0 && i < ranks.size() &&
            ranks[i] > filter.popularity_rank_cutoff)
            continue;
        if (s.kind == SeriesKind::ml_benchmark && !filter.allowed_metrics.empty() &&
            std::find(filter.allowed_metrics.begin(), filter.allowed_metrics.end(), s.metric_name) ==
                filter.allowed_metrics.end())
            continue;
        out.push_back(s);
    }
    return out;
}

inline std::size_t total_records(const Corpus& c) {
    std::size_t n = 0;
    for (const auto& s : c) n += s.size();
    return n;
}

}  // namespace recordlaw
