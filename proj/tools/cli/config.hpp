#pragma once

#include <json.hpp>

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace besovwf::cli {

using json = nlohmann::json;

/// A configuration value is missing, malformed or unknown. The message names the key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strict reader over one JSON object. Every accessed key is recorded and
/// finish() rejects the rest.
class Reader {
public:
    Reader(const json& j, std::string path);

    bool has(const std::string& key) const { return j_->contains(key); }
    const std::string& path() const { return path_; }
    std::string key_path(const std::string& key) const;

    const json& raw(const std::string& key);
    std::optional<json> optional_raw(const std::string& key);

    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    int integer(const std::string& key);
    int integer(const std::string& key, int fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string string(const std::string& key);
    std::string string(const std::string& key, const std::string& fallback);
    std::vector<double> numbers(const std::string& key);
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback);

    Reader child(const std::string& key);
    /// Throws ConfigError naming the first unread key.
    void finish() const;

private:
    const json* j_;
    std::string path_;
    std::set<std::string> used_;
};

/// Number, or "inf" / "infinity".
double extended_number(const json& j, const std::string& where);
std::vector<double> number_array(const json& j, const std::string& where);

}  // namespace besovwf::cli
