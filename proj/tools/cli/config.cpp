#include "config.hpp"

#include <cmath>
#include <limits>

namespace besovwf::cli {

Reader::Reader(const json& j, std::string path) : j_(&j), path_(std::move(path))
{
    if (!j.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
}

std::string Reader::key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

const json& Reader::raw(const std::string& key)
{
    if (!j_->contains(key)) throw ConfigError(key_path(key) + ": missing required key");
    used_.insert(key);
    return j_->at(key);
}

std::optional<json> Reader::optional_raw(const std::string& key)
{
    if (!j_->contains(key)) return std::nullopt;
    used_.insert(key);
    return j_->at(key);
}

double Reader::number(const std::string& key)
{
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
    return v.get<double>();
}

double Reader::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

int Reader::integer(const std::string& key)
{
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
    return v.get<int>();
}

int Reader::integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

bool Reader::boolean(const std::string& key, bool fallback)
{
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
    return v.get<bool>();
}

std::string Reader::string(const std::string& key)
{
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string");
    return v.get<std::string>();
}

std::string Reader::string(const std::string& key, const std::string& fallback)
{
    return has(key) ? string(key) : fallback;
}

std::vector<double> Reader::numbers(const std::string& key) { return number_array(raw(key), key_path(key)); }

std::vector<double> Reader::numbers(const std::string& key, std::vector<double> fallback)
{
    return has(key) ? numbers(key) : fallback;
}

Reader Reader::child(const std::string& key) { return Reader(raw(key), key_path(key)); }

void Reader::finish() const
{
    for (const auto& [key, _] : j_->items())
        if (!used_.contains(key)) throw ConfigError(key_path(key) + ": unknown key");
}

double extended_number(const json& j, const std::string& where)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity"))
        return std::numeric_limits<double>::infinity();
    throw ConfigError(where + ": expected a number or \"inf\"");
}

std::vector<double> number_array(const json& j, const std::string& where)
{
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const json& v : j) {
        if (!v.is_number()) throw ConfigError(where + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace besovwf::cli
