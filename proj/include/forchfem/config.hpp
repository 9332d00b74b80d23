#pragma once

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace forchfem {

/// Flat key=value configuration text. `#` starts a comment; list values may be
/// written as `[a, b, c]` or `a,b,c`.
class Config {
public:
    Config() = default;

    static Config parse(std::istream& in) {
        Config cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
            cfg.kv_[key] = value;
        }
        return cfg;
    }

    static Config parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw std::invalid_argument("config: missing key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key) const { return to_double(get_string(key), key); }

    int get_int(const std::string& key) const {
        const double d = get_double(key);
        const int i = static_cast<int>(d);
        if (static_cast<double>(i) != d)
            throw std::invalid_argument("config: key '" + key + "' is not an integer");
        return i;
    }

    std::vector<double> get_list(const std::string& key) const {
        std::string v = get_string(key);
        if (!v.empty() && v.front() == '[') {
            if (v.back() != ']')
                throw std::invalid_argument("config: unterminated list for key '" + key + "'");
            v = v.substr(1, v.size() - 2);
        }
        std::vector<double> out;
        std::string item;
        std::istringstream in(v);
        while (std::getline(in, item, ',')) {
            const std::string s = trim(item);
            if (s.empty())
                throw std::invalid_argument("config: empty list element for key '" + key + "'");
            out.push_back(to_double(s, key));
        }
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static double to_double(const std::string& s, const std::string& key) {
        std::size_t pos = 0;
        double d = 0.0;
        try {
            d = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: key '" + key + "' has non-numeric value '" + s + "'");
        }
        if (pos != s.size())
            throw std::invalid_argument("config: key '" + key + "' has trailing junk in '" + s + "'");
        return d;
    }

    std::map<std::string, std::string> kv_;
};

} // namespace forchfem
