#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hase/errors.hpp"

namespace hase::detail {

// Strict reader over one JSON object: every lookup is typed, errors name the
// full key path, and finish() rejects keys nobody asked for.
class ObjectReader {
public:
    using json = nlohmann::ordered_json;

    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "config root" : path_, "must be an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail(key_path(key), "is required");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(key_path(key), "must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key_path(key), "must be finite");
        return d;
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            // allow 1e7-style literals when they are exact integers
            if (v.is_number_float()) {
                const double d = v.get<double>();
                if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
            }
            fail(key_path(key), "must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        return has(key) ? unsigned_integer(key) : fallback;
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) fail(key_path(key), "must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(key_path(key), "must be a string");
        return v.get<std::string>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }

    std::string choice(const std::string& key, const std::vector<std::string>& allowed, const std::string& fallback) {
        const std::string s = string(key, fallback);
        for (const auto& a : allowed)
            if (a == s) return s;
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(key_path(key), "must be one of {" + list + "}, got '" + s + "'");
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) fail(key_path(key), "must be an array of numbers");
        std::vector<double> out;
        out.reserve(v.size());
        for (const auto& e : v) {
            if (!e.is_number()) fail(key_path(key), "must contain only numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    ObjectReader object(const std::string& key) { return ObjectReader(raw(key), key_path(key)); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(key_path(it.key()), "is not a recognised key");
    }

    [[noreturn]] static void fail(const std::string& key, const std::string& msg) {
        throw Error(ErrorKind::ConfigError, "'" + key + "' " + msg);
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace hase::detail
