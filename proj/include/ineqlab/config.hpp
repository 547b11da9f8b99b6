#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ineqlab/core.hpp"

namespace ineqlab {

// Experiment configuration: plain "key = value" lines, '#' comments.
// The canonical form (sorted keys, one per line) feeds the config hash, so
// identical configurations hash identically regardless of file layout.

class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config: " + path);
        std::stringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigParse("line " + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigParse("line " + std::to_string(lineno) +
                                  ": empty key or value");
            cfg.entries_[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    double get_double(const std::string& key, double fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::exception&) {
            throw ConfigParse("key '" + key + "': not a number: " + it->second);
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::exception&) {
            throw ConfigParse("key '" + key + "': not an integer: " + it->second);
        }
    }

    unsigned get_unsigned(const std::string& key, unsigned fallback) const {
        return static_cast<unsigned>(get_u64(key, fallback));
    }

    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : entries_) {  // std::map iterates sorted
            out += k;
            out += '=';
            out += v;
            out += '\n';
        }
        return out;
    }

    std::uint64_t hash() const { return fnv1a(canonical()); }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> entries_;
};

}  // namespace ineqlab
