#pragma once
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lorenz/params.hpp"

// Flat key=value run configuration: one key per line, '#' comments, blank
// lines ignored.  Unknown keys are rejected against the caller's allow-list
// so a typo cannot silently fall back to a default.

namespace lzl {

class RunConfig {
  public:
    RunConfig() = default;

    static RunConfig from_file(const std::string& path,
                               const std::set<std::string>& allowed) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("config: cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_text(ss.str(), allowed);
    }

    static RunConfig from_text(const std::string& text,
                               const std::set<std::string>& allowed) {
        RunConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto last = line.find_last_not_of(" \t\r");
            line = line.substr(first, last - first + 1);
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(
                    "config: line " + std::to_string(lineno) +
                    " is not key=value");
            std::string key = line.substr(0, eq);
            std::string val = line.substr(eq + 1);
            auto strip = [](std::string& s) {
                const auto a = s.find_first_not_of(" \t");
                const auto b = s.find_last_not_of(" \t");
                s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
            };
            strip(key);
            strip(val);
            if (key.empty())
                throw std::invalid_argument(
                    "config: empty key on line " + std::to_string(lineno));
            if (!allowed.count(key))
                throw std::invalid_argument("config: unknown key '" + key +
                                            "'");
            cfg.values_[key] = val;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key,
                           const std::string& def) const {
        const auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: key '" + key +
                                        "' is not a number");
        }
        if (pos != it->second.size())
            throw std::invalid_argument("config: key '" + key +
                                        "' has trailing characters");
        return v;
    }

    long get_int(const std::string& key, long def) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        std::size_t pos = 0;
        long v;
        try {
            v = std::stol(it->second, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: key '" + key +
                                        "' is not an integer");
        }
        if (pos != it->second.size())
            throw std::invalid_argument("config: key '" + key +
                                        "' has trailing characters");
        return v;
    }

    void set(const std::string& key, const std::string& val) {
        values_[key] = val;
    }

    const std::map<std::string, std::string>& values() const {
        return values_;
    }

    // Model-parameter keys shared by every subcommand.
    static const std::set<std::string>& model_keys() {
        static const std::set<std::string> keys{
            "mu", "rho", "c", "b", "nu", "lambda1", "lambda2", "lambda3",
            "r0", "eps_ext"};
        return keys;
    }

    ModelParams model_params() const {
        ModelParams p;
        p.mu = get_double("mu", p.mu);
        p.rho = get_double("rho", p.rho);
        p.c = get_double("c", p.c);
        p.b = get_double("b", p.b);
        p.nu = get_double("nu", p.nu);
        p.lambda1 = get_double("lambda1", p.lambda1);
        p.lambda2 = get_double("lambda2", p.lambda2);
        p.lambda3 = get_double("lambda3", p.lambda3);
        p.r0 = get_double("r0", p.r0);
        p.eps_ext = get_double("eps_ext", p.eps_ext);
        return p;
    }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace lzl
