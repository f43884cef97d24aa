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

#include <optional>
#include <stdexcept>
#include <string>

namespace recordlaw {

/// Base of every error raised by the library. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a transform or density.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed CSV row or API payload. Row/column are 1-based when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::optional<long> row = std::nullopt,
               std::optional<std::string> column = std::nullopt)
        : Error(decorate(what, row, column)), row_(row), column_(std::move(column)) {}

    /// Payload error tied to a named field rather than a CSV cell; column() holds the field.
    static ParseError for_field(const std::string& field, const std::string& what) {
        ParseError e("field '" + field + "': " + what);
        e.column_ = field;
        return e;
    }

    std::optional<long> row() const noexcept { return row_; }
    const std::optional<std::string>& column() const noexcept { return column_; }

private:
    static std::string decorate(const std::string& what, std::optional<long> row,
                                const std::optional<std::string>& column) {
        std::string out;
        if (row) out += "row " + std::to_string(*row);
        if (column) out += (out.empty() ? "" : ", ") + std::string("column '") + *column + "'";
        return out.empty() ? what : out + ": " + what;
    }

    std::optional<long> row_;
    std::optional<std::string> column_;
};

/// HTTP failure after retries were exhausted.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int last_status)
        : Error(what + " (last HTTP status " + std::to_string(last_status) + ")"),
          last_status_(last_status) {}

    /// 0 when no response was ever received.
    int last_status() const noexcept { return last_status_; }

private:
    int last_status_;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raw data that breaks a modelling assumption (e.g. duplicate timestamps).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace recordlaw
