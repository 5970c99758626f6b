#pragma once

// Run artifacts: RFC-4180 CSV with 17 significant digits, JSON with stable
// key order, a content hash over inputs, and the flat key = value config
// format whose function-valued entries are expression strings.

#include "hampert/rational.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <thread>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hampert::io {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// FNV-1a, 64-bit: the content hash used in manifests (documented as such).
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::string_view s) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

inline std::string iso_utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180: CRLF line endings, comma separated; all our fields are
// numeric or plain identifiers, so quoting never triggers)

inline void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
    if (!columns.empty())
        for (const auto& c : columns)
            if (c.size() != columns[0].size())
                throw std::invalid_argument("write_csv: ragged columns");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + file.string());
    for (std::size_t j = 0; j < header.size(); ++j)
        out << (j ? "," : "") << header[j];
    out << "\r\n";
    std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            out << (j ? "," : "") << format_double(columns[j][i]);
        out << "\r\n";
    }
}

inline std::string file_contents(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Flat config: [section] headers, key = value lines, '#' comments.

class Config {
public:
    static Config from_string(const std::string& text) {
        Config cfg;
        cfg.raw_ = text;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": unterminated section header");
                section = strip(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            std::string key = strip(s.substr(0, eq));
            std::string val = strip(s.substr(eq + 1));
            cfg.values_[section + "." + key] = val;
        }
        return cfg;
    }

    static Config from_file(const std::filesystem::path& file) {
        return from_string(file_contents(file));
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) > 0;
    }

    std::string get(const std::string& section, const std::string& key) const {
        auto it = values_.find(section + "." + key);
        if (it == values_.end())
            throw ConfigError("missing config key [" + section + "] " + key);
        return it->second;
    }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const {
        auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse_double(section, key, get(section, key));
    }
    double get_double(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        return parse_double(section, key, get(section, key));
    }
    int get_int(const std::string& section, const std::string& key, int fallback) const {
        if (!has(section, key)) return fallback;
        return static_cast<int>(parse_double(section, key, get(section, key)));
    }
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        std::string v = get(section, key);
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        throw ConfigError("config key [" + section + "] " + key + ": expected a boolean");
    }
    std::vector<double> get_list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        std::string v = get(section, key);
        std::istringstream in(v);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            tok = strip(tok);
            if (!tok.empty()) out.push_back(parse_double(section, key, tok));
        }
        return out;
    }

    const std::string& raw() const { return raw_; }

    nlohmann::json echo() const {
        nlohmann::json j;
        for (const auto& [k, v] : values_) j[k] = v;
        return j;
    }

private:
    static std::string strip(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }
    static double parse_double(const std::string& section, const std::string& key,
                               const std::string& v) {
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (...) {
            throw ConfigError("config key [" + section + "] " + key + ": bad number '" + v + "'");
        }
    }

    std::string raw_;
    std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Run manifest

class RunManifest {
public:
    RunManifest(std::string command, const Config* cfg) : command_(std::move(command)) {
        started_ = iso_utc_now();
        if (cfg) {
            config_echo_ = cfg->echo();
            inputs_hash_ = hash_hex(cfg->raw());
        }
    }

    void add_output(const std::filesystem::path& file) {
        outputs_.emplace_back(file.string(), hash_hex(file_contents(file)));
    }
    void set_pass(bool ok) { pass_ = ok; }
    void add_note(const std::string& key, const nlohmann::json& value) { notes_[key] = value; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["command"] = command_;
        j["config"] = config_echo_;
        j["inputs_hash_fnv1a64"] = inputs_hash_;
        j["started"] = started_;
        j["finished"] = iso_utc_now();
        j["outputs"] = nlohmann::json::array();
        for (const auto& [f, h] : outputs_) {
            j["outputs"].push_back({{"file", f}, {"hash_fnv1a64", h}});
        }
        j["pass"] = pass_;
        if (!notes_.empty()) j["notes"] = notes_;
        return j;
    }

    void write(const std::filesystem::path& dir) const {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << to_json().dump(2) << "\n";
    }

private:
    std::string command_;
    nlohmann::json config_echo_;
    std::string inputs_hash_;
    std::string started_;
    std::vector<std::pair<std::string, std::string>> outputs_;
    nlohmann::json notes_;
    bool pass_ = false;
};

// Parallelism cap for batch sweeps.
inline unsigned max_threads() {
    if (const char* env = std::getenv("HAMPERT_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

}  // namespace hampert::io
