#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace injurycast {

/// Invalid user configuration (bad knob values, unusable paths).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg), messages_{msg} {}
    explicit ConfigError(std::vector<std::string> msgs)
        : std::runtime_error(join(msgs)), messages_(std::move(msgs)) {}

    const std::vector<std::string>& messages() const { return messages_; }

private:
    static std::string join(const std::vector<std::string>& msgs) {
        std::string out;
        for (const auto& m : msgs) {
            if (!out.empty()) out += "; ";
            out += m;
        }
        return out;
    }
    std::vector<std::string> messages_;
};

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Schema-level problem with an input file (e.g. missing mandatory column).
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

/// A single bad row; `row()` is the zero-based data row index (header excluded).
class RowError : public DataError {
public:
    RowError(std::size_t row, const std::string& msg)
        : DataError("row " + std::to_string(row) + ": " + msg), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Model fitting could not proceed (e.g. no events for the ranking loss).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace injurycast
