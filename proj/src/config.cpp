#include "mlpmc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mlpmc/errors.hpp"

namespace mlpmc::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' has malformed number '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' has malformed integer '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' has malformed integer '" + value + "'");
    }
}

template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& key, const std::string& value, Fn&& one) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("config: key '" + key + "' has an empty element");
        out.push_back(one(key, item));
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' is empty");
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    bool saw_version = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not a key = value pair");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config: line " + std::to_string(lineno) + " has an empty side");
        }

        if (key == "version") {
            cfg.version = static_cast<int>(parse_int(key, value));
            if (cfg.version != 1) throw ConfigError("config: unsupported version " + value);
            saw_version = true;
        } else if (key == "mode") {
            cfg.mode = value;
        } else if (key == "problem") {
            if (value != "exp_euler") {
                throw ConfigError("config: key 'problem' has unknown kind '" + value + "'");
            }
            cfg.problem_kind = value;
        } else if (key == "d") {
            cfg.d = static_cast<int>(parse_int(key, value));
        } else if (key == "K") {
            cfg.K = static_cast<int>(parse_int(key, value));
        } else if (key == "T") {
            cfg.T = parse_double(key, value);
        } else if (key == "nonlinearity") {
            cfg.nonlinearity.kind = value;
        } else if (key == "alpha") {
            cfg.nonlinearity.alpha = parse_double(key, value);
        } else if (key == "beta") {
            cfg.nonlinearity.beta = parse_double(key, value);
        } else if (key == "scale") {
            cfg.nonlinearity.scale = parse_double(key, value);
        } else if (key == "terminal") {
            cfg.terminal.kind = value;
        } else if (key == "terminal_value") {
            cfg.terminal.value = parse_double(key, value);
        } else if (key == "eval_point") {
            cfg.eval_point = parse_list<double>(key, value, parse_double);
        } else if (key == "M") {
            cfg.m_list = parse_list<int>(key, value, [](const auto& k, const auto& v) {
                return static_cast<int>(parse_int(k, v));
            });
        } else if (key == "N") {
            cfg.n_list = parse_list<int>(key, value, [](const auto& k, const auto& v) {
                return static_cast<int>(parse_int(k, v));
            });
        } else if (key == "runs") {
            cfg.runs = static_cast<int>(parse_int(key, value));
        } else if (key == "seed") {
            cfg.seed = parse_u64(key, value);
        } else if (key == "max_samples") {
            cfg.max_samples = parse_u64(key, value);
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(parse_int(key, value));
        } else if (key == "quadrature_points") {
            cfg.quadrature_points = static_cast<int>(parse_int(key, value));
        } else if (key == "hermite_nodes") {
            cfg.hermite_nodes = static_cast<int>(parse_int(key, value));
        } else if (key == "nested_m") {
            cfg.nested_m = static_cast<int>(parse_int(key, value));
        } else if (key == "eps_list") {
            cfg.eps_list = parse_list<double>(key, value, parse_double);
        } else if (key == "d_list") {
            cfg.d_list = parse_list<int>(key, value, [](const auto& k, const auto& v) {
                return static_cast<int>(parse_int(k, v));
            });
        } else if (key == "delta") {
            cfg.delta = parse_double(key, value);
        } else if (key == "out") {
            cfg.out_path = value;
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    if (!saw_version) throw ConfigError("config: missing required key 'version'");
    if (cfg.mode.empty()) throw ConfigError("config: missing required key 'mode'");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

model::ExpEulerProblem ExperimentConfig::build_problem() const {
    return model::make_registry_problem(d, K, T, nonlinearity, terminal, eval_point);
}

}  // namespace mlpmc::cli
