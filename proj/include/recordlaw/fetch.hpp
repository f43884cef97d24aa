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

// Client for the speedrun.com REST API (v1). Requires cpp-httplib and nlohmann/json;
// define CPPHTTPLIB_OPENSSL_SUPPORT and link OpenSSL for https endpoints.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

// httplib pulls in <resolv.h>, whose `_res` macro breaks Eigen headers included later.
#include <Eigen/Core>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "recordlaw/csv.hpp"
#include "recordlaw/error.hpp"
#include "recordlaw/series.hpp"

namespace recordlaw::fetch {

inline constexpr const char* kDefaultApiBase = "https://www.speedrun.com/api/v1";

/// RECORDLAW_API_BASE when set, the public API otherwise.
inline std::string api_base_from_env() {
    const char* v = std::getenv("RECORDLAW_API_BASE");
    return v && *v ? std::string(v) : std::string(kDefaultApiBase);
}

struct HttpResponse {
    int status = 0;  ///< 0: no response (connection failure, timeout)
    std::string body;
};

/// GET of a target (path + query) relative to the API base.
using HttpGet = std::function<HttpResponse(const std::string& target)>;

struct Endpoint {
    std::string origin;       ///< scheme://host[:port]
    std::string path_prefix;  ///< e.g. /api/v1, no trailing slash
};

inline Endpoint parse_endpoint(std::string url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("API base '" + url + "' lacks a scheme");
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ConfigError("unsupported scheme '" + scheme + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    e.origin = url.substr(0, path_start);
    e.path_prefix = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!e.path_prefix.empty() && e.path_prefix.back() == '/') e.path_prefix.pop_back();
    if (e.origin.size() <= scheme_end + 3) throw ConfigError("API base '" + url + "' lacks a host");
    return e;
}

/// httplib-backed transport.
inline HttpGet make_http_client(const std::string& base_url, std::chrono::seconds timeout = std::chrono::seconds(30)) {
    const Endpoint ep = parse_endpoint(base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (ep.origin.rfind("https://", 0) == 0) throw ConfigError("https endpoints need a build with OpenSSL support");
#endif
    auto client = std::make_shared<httplib::Client>(ep.origin);
    client->set_connection_timeout(timeout);
    client->set_read_timeout(timeout);
    client->set_follow_location(true);
    client->set_default_headers({{"Accept", "application/json"}, {"User-Agent", "recordlaw"}});
    return [client, prefix = ep.path_prefix](const std::string& target) {
        HttpResponse out;
        if (auto res = client->Get(prefix + target)) {
            out.status = res->status;
            out.body = res->body;
        }
        return out;
    };
}

struct FetchOptions {
    double rate_limit = 1.0;  ///< requests per second
    int max_retries = 5;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{16000};
    int page_size = 200;
    /// Injected for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::nanoseconds)> sleep;
};

inline std::string url_encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

struct Category {
    std::string id;
    std::string name;
};

/// Rate-limited, retrying JSON client.
class ApiClient {
public:
    ApiClient(HttpGet get, FetchOptions options) : get_(std::move(get)), opt_(std::move(options)) {
        if (!(opt_.rate_limit > 0.0)) throw ConfigError("rate limit must be positive");
        if (opt_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
        if (opt_.page_size < 1) throw ConfigError("page size must be >= 1");
        if (!opt_.sleep) opt_.sleep = [](std::chrono::nanoseconds d) { std::this_thread::sleep_for(d); };
    }

    /// GET with pacing and bounded exponential backoff on 429, 5xx and connection failures.
    nlohmann::json get_json(const std::string& target) {
        int last_status = 0;
        auto backoff = opt_.initial_backoff;
        for (int attempt = 0; attempt <= opt_.max_retries; ++attempt) {
            if (attempt > 0) {
                opt_.sleep(backoff);
                backoff = std::min(backoff * 2, opt_.max_backoff);
            }
            pace();
            const HttpResponse res = get_(target);
            ++requests_;
            last_status = res.status;
            if (res.status >= 200 && res.status < 300) {
                try {
                    return nlohmann::json::parse(res.body);
                } catch (const nlohmann::json::parse_error& e) {
                    throw ParseError("malformed JSON from " + target + ": " + e.what());
                }
            }
            const bool transient = res.status == 0 || res.status == 429 || res.status >= 500;
            if (!transient) throw TransportError("GET " + target + " failed", last_status);
        }
        throw TransportError("GET " + target + " failed after " + std::to_string(opt_.max_retries) + " retries",
                             last_status);
    }

    std::vector<Category> categories(const std::string& game) {
        const auto j = get_json("/games/" + url_encode(game) + "/categories");
        const auto& data = field(j, "data", "data");
        if (!data.is_array()) throw ParseError::for_field("data", "expected an array");
        std::vector<Category> out;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto path = "data[" + std::to_string(i) + "]";
            const auto& c = data[i];
            // Per-level categories need a level id as well; they are not series on their own.
            if (c.contains("type") && c["type"].is_string() && c["type"] != "per-game") continue;
            out.push_back({string_field(c, "id", path + ".id"), c.value("name", std::string())});
        }
        return out;
    }

    /// Every verified run of (game, category) as (date, seconds), oldest first.
    std::vector<Record> runs(const std::string& game, const std::string& category) {
        std::vector<Record> out;
        for (std::size_t offset = 0;;) {
            const auto target = "/runs?game=" + url_encode(game) + "&category=" + url_encode(category) +
                                "&status=verified&orderby=date&direction=asc&max=" + std::to_string(opt_.page_size) +
                                "&offset=" + std::to_string(offset);
            const auto j = get_json(target);
            const auto& data = field(j, "data", "data");
            if (!data.is_array()) throw ParseError::for_field("data", "expected an array");
            for (std::size_t i = 0; i < data.size(); ++i) {
                const auto path = "data[" + std::to_string(offset + i) + "]";
                if (auto r = parse_run(data[i], path)) out.push_back(*r);
            }
            if (data.size() < static_cast<std::size_t>(opt_.page_size)) break;
            offset += data.size();
        }
        return out;
    }

    std::size_t requests() const noexcept { return requests_; }

private:
    static const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& path) {
        if (!j.is_object() || !j.contains(key)) throw ParseError::for_field(path, "missing");
        return j[key];
    }

    static std::string string_field(const nlohmann::json& j, const char* key, const std::string& path) {
        const auto& v = field(j, key, path);
        if (!v.is_string()) throw ParseError::for_field(path, "expected a string");
        return v.get<std::string>();
    }

    /// Runs without any date are skipped; the date falls back to the submission time.
    static std::optional<Record> parse_run(const nlohmann::json& run, const std::string& path) {
        const auto& times = field(run, "times", path + ".times");
        const auto& t = field(times, "primary_t", path + ".times.primary_t");
        if (!t.is_number()) throw ParseError::for_field(path + ".times.primary_t", "expected a number");
        for (const char* key : {"date", "submitted"}) {
            if (!run.contains(key) || run[key].is_null()) continue;
            if (!run[key].is_string()) throw ParseError::for_field(path + "." + key, "expected a string");
            try {
                return Record{parse_rfc3339_utc(run[key].get<std::string>()), t.get<double>()};
            } catch (const ParseError& e) {
                throw ParseError::for_field(path + "." + key, e.what());
            }
        }
        return std::nullopt;
    }

    void pace() {
        const auto interval = std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::duration<double>(1.0 / opt_.rate_limit));
        const auto now = std::chrono::steady_clock::now();
        if (requests_ > 0 && now < last_ + interval) opt_.sleep(last_ + interval - now);
        last_ = std::chrono::steady_clock::now();
    }

    HttpGet get_;
    FetchOptions opt_;
    std::chrono::steady_clock::time_point last_{};
    std::size_t requests_ = 0;
};

/// One series per (game, per-game category), id "game/category", reduced to its record
/// frontier. Categories without runs yield empty series.
inline Corpus fetch_speedrun_series(const std::vector<std::string>& games, HttpGet get, const FetchOptions& options) {
    ApiClient client(std::move(get), options);
    Corpus out;
    for (const auto& game : games) {
        for (const auto& cat : client.categories(game)) {
            RecordSeries s{game + "/" + cat.id, SeriesKind::speedrun, "", {}};
            s.records = record_frontier(client.runs(game, cat.id), SeriesKind::speedrun);
            out.push_back(std::move(s));
        }
    }
    return out;
}

inline Corpus fetch_speedrun_series(const std::vector<std::string>& games, const std::string& endpoint,
                                    double rate_limit) {
    FetchOptions opt;
    opt.rate_limit = rate_limit;
    return fetch_speedrun_series(games, make_http_client(endpoint), opt);
}

/// One game id per line in popularity order; blank lines and '#' comments are ignored.
inline std::vector<std::string> read_game_list(std::istream& in) {
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        out.push_back(line.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace recordlaw::fetch
