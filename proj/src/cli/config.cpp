#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "comolife/cli.hpp"
#include "comolife/errors.hpp"

namespace comolife::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(std::string_view s) {
    std::istringstream is{std::string(s)};
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc{} || r.ptr != end) return std::nullopt;
    return v;
}

struct Entry {
    std::string value;
    std::size_t line;
};

// section.key -> value, in file order.
struct ConfigFile {
    fs::path path;
    std::map<std::string, Entry> entries;
    std::vector<std::string> order;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"", {"command"}},
        {"copula", {"family", "theta", "tau"}},
        {"group", {"lives", "causes", "status", "mode"}},
        {"grid", {"step", "horizon", "newton_tol", "newton_max_iter", "fd_step"}},
        {"query", {"times", "status_cdfs"}},
        {"input", {"crude", "remainder"}},
        {"simulate", {"seed", "scenarios"}},
        {"output", {"path", "format", "timestamp"}},
    };
    return keys;
}

ConfigFile read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    ConfigFile cfg{path, {}, {}};
    std::string section;
    std::string raw;
    for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const auto where = path.filename().string() + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header '" + line + "'");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section != "marginals" && !known_keys().count(section))
                throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
        const std::string full = section.empty() ? key : section + "." + key;
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (section != "marginals" && !known_keys().at(section).count(key))
            throw ConfigError(full + " (" + where + "): unknown key");
        if (cfg.entries.count(full))
            throw ConfigError(full + " (" + where + "): duplicate key, first set on line " +
                              std::to_string(cfg.entries.at(full).line));
        cfg.entries.emplace(full, Entry{value, line_no});
        cfg.order.push_back(full);
    }
    return cfg;
}

// Resolves values by key, tracking origin for error messages.
class Sources {
public:
    Sources(const ConfigFile* file, RunConfig& rc) : file_(file), rc_(rc) {}

    std::optional<std::string> get(const std::string& key) {
        if (!file_) return std::nullopt;
        const auto it = file_->entries.find(key);
        if (it == file_->entries.end()) return std::nullopt;
        rc_.origin[key] = file_->path.filename().string() + ":" + std::to_string(it->second.line);
        return it->second.value;
    }

    void set_flag(const std::string& key, const std::string& flag) { rc_.origin[key] = flag; }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        const auto it = rc_.origin.find(key);
        const std::string where = it == rc_.origin.end() ? "" : " (" + it->second + ")";
        throw ConfigError(key + where + ": " + message);
    }

    double number(const std::string& key, const std::string& text) const {
        const auto v = to_double(trim(text));
        if (!v) fail(key, "expected a number, got '" + text + "'");
        return *v;
    }

    std::vector<double> numbers(const std::string& key, const std::string& text) const {
        std::vector<double> out;
        std::string cleaned = text;
        std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
        for (const auto& tok : split_ws(cleaned)) out.push_back(number(key, tok));
        return out;
    }

private:
    const ConfigFile* file_;
    RunConfig& rc_;
};

NetSurvival parse_law(Sources& src, const std::string& key, const std::string& text, const fs::path& base,
                      const std::string& life, const std::string& cause) {
    const auto tok = split_ws(text);
    if (tok.empty()) src.fail(key, "empty marginal specification");
    const std::string label = life.empty() ? cause : life + "." + cause;
    auto arg = [&](std::size_t i) { return src.number(key, tok[i]); };
    auto arity = [&](std::size_t n) {
        if (tok.size() != n + 1)
            src.fail(key, tok[0] + " takes " + std::to_string(n) + " parameter(s), got " +
                              std::to_string(tok.size() - 1));
    };
    try {
        if (tok[0] == "exponential") {
            arity(1);
            return NetSurvival::exponential(arg(1), label);
        }
        if (tok[0] == "weibull") {
            arity(2);
            return NetSurvival::weibull(arg(1), arg(2), label);
        }
        if (tok[0] == "gompertz") {
            arity(2);
            return NetSurvival::gompertz(arg(1), arg(2), label);
        }
        if (tok[0] == "table") {
            arity(1);
            fs::path p = tok[1];
            if (p.is_relative()) p = base / p;
            const auto records = read_life_table(p);
            return from_life_table(records, life, cause);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        src.fail(key, std::string(e.kind()) + ": " + e.what());
    }
    src.fail(key, "unknown law '" + tok[0] + "' (expected exponential, weibull, gompertz or table)");
}

void require(Sources& src, bool ok, const std::string& key, const std::string& message) {
    if (!ok) src.fail(key, message);
}

} // namespace

std::string_view to_string(Command command) {
    switch (command) {
    case Command::tau: return "tau";
    case Command::theta: return "theta";
    case Command::qtotal: return "qtotal";
    case Command::crude: return "crude";
    case Command::nets: return "nets";
    case Command::simulate: return "simulate";
    case Command::check: return "check";
    }
    return "?";
}

Command parse_command(std::string_view name) {
    for (auto c : {Command::tau, Command::theta, Command::qtotal, Command::crude, Command::nets,
                   Command::simulate, Command::check}) {
        if (to_string(c) == name) return c;
    }
    throw ConfigError("command: unknown command '" + std::string(name) +
                      "' (expected tau, theta, qtotal, crude, nets, simulate or check)");
}

CopulaSpec RunConfig::copula(std::size_t dimension) const {
    if (!family) throw ConfigError("copula.family: not set");
    const bool parametric = *family == CopulaFamily::clayton || *family == CopulaFamily::gumbel;
    if (!parametric) return CopulaSpec(*family, std::nullopt, dimension);
    if (theta) return CopulaSpec(*family, theta, dimension);
    if (tau) return CopulaSpec(*family, theta_from_tau(*family, *tau), dimension);
    throw ConfigError("copula.theta: " + std::string(to_string(*family)) + " needs theta or tau");
}

GroupStatus RunConfig::group() const {
    std::vector<Life> out;
    for (const auto& life : lives) {
        Life l{life, {}};
        for (const auto& cause : causes) {
            const auto it = std::find_if(marginals.begin(), marginals.end(),
                                         [&](const auto& e) { return e.life == life && e.cause == cause; });
            l.causes.push_back(it->net);
        }
        out.push_back(std::move(l));
    }
    return GroupStatus(std::move(out), status);
}

std::vector<NetSurvival> RunConfig::nets_of_single_life() const {
    if (lives.size() != 1) throw ConfigError("marginals: command needs exactly one life, got " +
                                             std::to_string(lives.size()));
    const auto g = group();
    std::vector<NetSurvival> nets;
    for (std::size_t i = 0; i < causes.size(); ++i) nets.push_back(g.marginal(0, i));
    return nets;
}

std::vector<LifeTableRecord> read_life_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read life table '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "life,cause,t,q")
        throw ValidationError(path.filename().string() + ":1: header must be exactly 'life,cause,t,q'");
    std::vector<LifeTableRecord> records;
    for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(trim(line));
        const auto where = path.filename().string() + ":" + std::to_string(line_no);
        if (cells.size() != 4) throw ValidationError(where + ": expected 4 fields");
        const auto t = to_double(cells[2]);
        const auto q = to_double(cells[3]);
        if (!t || !q) throw ValidationError(where + ": t and q must be numbers");
        records.push_back({cells[0], cells[1], *t, *q});
    }
    return records;
}

CrudeCurveSet read_crude_curves(const fs::path& path, double truncation_remainder) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read crude curves '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "cause,t,crude_survival")
        throw ValidationError(path.filename().string() + ":1: header must be exactly 'cause,t,crude_survival'");
    std::vector<std::string> causes;
    std::vector<std::vector<double>> times, values;
    for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(trim(line));
        const auto where = path.filename().string() + ":" + std::to_string(line_no);
        if (cells.size() != 3) throw ValidationError(where + ": expected 3 fields");
        const auto t = to_double(cells[1]);
        const auto s = to_double(cells[2]);
        if (!t || !s) throw ValidationError(where + ": t and crude_survival must be numbers");
        auto it = std::find(causes.begin(), causes.end(), cells[0]);
        if (it == causes.end()) {
            causes.push_back(cells[0]);
            times.emplace_back();
            values.emplace_back();
            it = causes.end() - 1;
        }
        const auto j = static_cast<std::size_t>(it - causes.begin());
        times[j].push_back(*t);
        values[j].push_back(*s);
    }
    if (causes.empty()) throw ValidationError(path.filename().string() + ": no crude rows");
    for (std::size_t j = 1; j < causes.size(); ++j) {
        if (times[j] != times[0])
            throw ValidationError(path.filename().string() + ": cause '" + causes[j] +
                                  "' uses a different time grid from cause '" + causes[0] + "'");
    }
    return CrudeCurveSet(times[0], std::move(values), std::move(causes), truncation_remainder);
}

RunConfig parse_inputs(const std::optional<fs::path>& config_path, const Overrides& ov) {
    RunConfig rc;
    std::optional<ConfigFile> file;
    fs::path base = fs::current_path();
    if (config_path) {
        file = read_config(*config_path);
        base = config_path->parent_path().empty() ? fs::path(".") : config_path->parent_path();
    }
    Sources src(file ? &*file : nullptr, rc);

    // command
    std::optional<std::string> command = src.get("command");
    if (ov.command) {
        command = ov.command;
        src.set_flag("command", "command line");
    }
    if (!command) throw ConfigError("command: no command given (positional argument or 'command =' in the config)");
    try {
        rc.command = parse_command(*command);
    } catch (const ConfigError&) {
        src.fail("command", "unknown command '" + *command + "'");
    }

    // copula
    std::optional<std::string> family = src.get("copula.family");
    if (ov.copula) {
        family = ov.copula;
        src.set_flag("copula.family", "--copula");
    }
    if (family) {
        try {
            rc.family = parse_copula_family(*family);
        } catch (const Error& e) {
            src.fail("copula.family", e.what());
        }
    }
    if (auto v = src.get("copula.theta")) rc.theta = src.number("copula.theta", *v);
    if (auto v = src.get("copula.tau")) rc.tau = src.number("copula.tau", *v);
    if (ov.theta) {
        rc.theta = ov.theta;
        src.set_flag("copula.theta", "--theta");
    }
    if (ov.tau) {
        rc.tau = ov.tau;
        src.set_flag("copula.tau", "--tau");
        if (!ov.theta) rc.theta.reset();  // a tau flag recalibrates over a file theta
    }
    if (rc.family) {
        const bool parametric = *rc.family == CopulaFamily::clayton || *rc.family == CopulaFamily::gumbel;
        if (!parametric && (rc.theta || rc.tau))
            src.fail(rc.theta ? "copula.theta" : "copula.tau",
                     std::string(to_string(*rc.family)) + " copula takes no parameter");
        if (rc.tau) {
            try {
                const double implied = theta_from_tau(*rc.family, *rc.tau);
                if (rc.theta && std::abs(*rc.theta - implied) > 1e-9 * std::max(1.0, implied))
                    src.fail("copula.tau", "tau " + std::to_string(*rc.tau) + " implies theta " +
                                               std::to_string(implied) + ", which contradicts copula.theta");
            } catch (const DomainError& e) {
                src.fail("copula.tau", e.what());
            }
        }
        if (rc.theta) {
            try {
                (void)CopulaSpec(*rc.family, rc.theta, 2);
            } catch (const DomainError& e) {
                src.fail("copula.theta", e.what());
            }
        }
    } else if (rc.theta || rc.tau) {
        src.fail(rc.theta ? "copula.theta" : "copula.tau", "copula.family is not set");
    }

    // group and marginals
    if (auto v = src.get("group.status")) {
        try {
            rc.status = parse_status(*v);
        } catch (const Error& e) {
            src.fail("group.status", e.what());
        }
    }
    std::optional<std::string> mode = src.get("group.mode");
    if (ov.mode) {
        mode = ov.mode;
        src.set_flag("group.mode", "--mode");
    }
    if (mode) {
        try {
            rc.mode = parse_composition(*mode);
        } catch (const Error& e) {
            src.fail("group.mode", e.what());
        }
    }
    if (file) {
        for (const auto& key : file->order) {
            if (key.rfind("marginals.", 0) != 0) continue;
            const auto value = *src.get(key);
            const std::string name = key.substr(std::string("marginals.").size());
            const auto dot = name.find('.');
            std::string life = dot == std::string::npos ? "x" : name.substr(0, dot);
            std::string cause = dot == std::string::npos ? name : name.substr(dot + 1);
            if (life.empty() || cause.empty()) src.fail(key, "key must be <cause> or <life>.<cause>");
            rc.marginals.push_back({life, cause, value, parse_law(src, key, value, base, life, cause)});
            if (std::find(rc.lives.begin(), rc.lives.end(), life) == rc.lives.end()) rc.lives.push_back(life);
            if (std::find(rc.causes.begin(), rc.causes.end(), cause) == rc.causes.end())
                rc.causes.push_back(cause);
        }
    }
    if (auto v = src.get("group.lives")) {
        const auto listed = split_ws(*v);
        std::set<std::string> a(listed.begin(), listed.end()), b(rc.lives.begin(), rc.lives.end());
        if (a != b || listed.size() != a.size())
            src.fail("group.lives", "must list each life in [marginals] exactly once");
        rc.lives = listed;
    }
    if (auto v = src.get("group.causes")) {
        const auto listed = split_ws(*v);
        std::set<std::string> a(listed.begin(), listed.end()), b(rc.causes.begin(), rc.causes.end());
        if (a != b || listed.size() != a.size())
            src.fail("group.causes", "must list each cause in [marginals] exactly once");
        rc.causes = listed;
    }
    for (const auto& life : rc.lives) {
        for (const auto& cause : rc.causes) {
            const bool found = std::any_of(rc.marginals.begin(), rc.marginals.end(),
                                           [&](const auto& e) { return e.life == life && e.cause == cause; });
            if (!found) throw ConfigError("marginals." + life + "." + cause + ": missing (every life needs every cause)");
        }
    }

    // grid
    auto grid_value = [&](const std::string& key, double& field, const std::optional<double>& flag,
                          const std::string& flag_name) {
        if (auto v = src.get(key)) field = src.number(key, *v);
        if (flag) {
            field = *flag;
            src.set_flag(key, flag_name);
        }
        if (!(field > 0.0) || !std::isfinite(field)) src.fail(key, "must be a positive number");
    };
    grid_value("grid.step", rc.solver.step, ov.grid_step, "--grid-step");
    grid_value("grid.horizon", rc.solver.horizon, ov.horizon, "--horizon");
    grid_value("grid.newton_tol", rc.solver.newton_tol, std::nullopt, "");
    grid_value("grid.fd_step", rc.solver.fd_step, std::nullopt, "");
    if (auto v = src.get("grid.newton_max_iter")) {
        const double it = src.number("grid.newton_max_iter", *v);
        if (!(it >= 1.0) || it != std::floor(it)) src.fail("grid.newton_max_iter", "must be a positive integer");
        rc.solver.newton_max_iter = static_cast<int>(it);
    }
    try {
        rc.solver.validate();
    } catch (const DomainError& e) {
        src.fail("grid.horizon", e.what());
    }

    // query
    if (auto v = src.get("query.times")) {
        rc.times = src.numbers("query.times", *v);
        for (double t : rc.times)
            if (!(t >= 0.0)) src.fail("query.times", "times must be nonnegative");
    }
    if (auto v = src.get("query.status_cdfs")) {
        rc.status_cdfs = src.numbers("query.status_cdfs", *v);
        for (double p : rc.status_cdfs)
            if (!(p >= 0.0 && p <= 1.0)) src.fail("query.status_cdfs", "probabilities must lie in [0, 1]");
    }

    // input
    if (auto v = src.get("input.crude")) {
        fs::path p = *v;
        if (p.is_relative()) p = base / p;
        rc.crude_path = *v;
        double remainder = 0.0;
        if (auto r = src.get("input.remainder")) {
            remainder = src.number("input.remainder", *r);
            if (!(remainder >= 0.0 && remainder <= 1.0)) src.fail("input.remainder", "must lie in [0, 1]");
        }
        try {
            rc.crude = read_crude_curves(p, remainder);
        } catch (const IoError&) {
            throw;
        } catch (const Error& e) {
            src.fail("input.crude", std::string(e.kind()) + ": " + e.what());
        }
    }

    // simulate
    if (auto v = src.get("simulate.seed")) {
        std::uint64_t seed = 0;
        const auto s = trim(*v);
        const auto r = std::from_chars(s.data(), s.data() + s.size(), seed);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
            src.fail("simulate.seed", "expected a nonnegative integer, got '" + *v + "'");
        rc.seed = seed;
    }
    if (ov.seed) {
        rc.seed = ov.seed;
        src.set_flag("simulate.seed", "--seed");
    }
    if (auto v = src.get("simulate.scenarios")) {
        const double n = src.number("simulate.scenarios", *v);
        if (!(n >= 1.0) || n != std::floor(n) || n > 1e8)
            src.fail("simulate.scenarios", "must be an integer in [1, 1e8]");
        rc.scenarios = static_cast<std::size_t>(n);
    }

    // output
    if (auto v = src.get("output.path")) rc.out_path = *v;
    if (ov.out) {
        rc.out_path = *ov.out;
        src.set_flag("output.path", "--out");
    }
    std::optional<std::string> format = src.get("output.format");
    if (ov.format) {
        format = ov.format;
        src.set_flag("output.format", "--format");
    }
    if (format) {
        if (*format == "csv") rc.format = Format::csv;
        else if (*format == "json") rc.format = Format::json;
        else src.fail("output.format", "expected csv or json, got '" + *format + "'");
    }
    if (auto v = src.get("output.timestamp")) {
        if (*v == "true") rc.timestamp = true;
        else if (*v == "false") rc.timestamp = false;
        else src.fail("output.timestamp", "expected true or false");
    }
    if (ov.no_timestamp) rc.timestamp = false;

    // per-command requirements
    const bool parametric =
        rc.family && (*rc.family == CopulaFamily::clayton || *rc.family == CopulaFamily::gumbel);
    switch (rc.command) {
    case Command::tau:
        require(src, rc.family.has_value(), "copula.family", "tau needs a copula family");
        require(src, !parametric || rc.theta || rc.tau, "copula.theta", "tau needs theta");
        break;
    case Command::theta:
        require(src, rc.family.has_value(), "copula.family", "theta needs a copula family");
        require(src, parametric, "copula.family", "theta needs clayton or gumbel");
        require(src, rc.tau.has_value(), "copula.tau", "theta needs tau");
        break;
    case Command::qtotal:
        require(src, rc.family.has_value(), "copula.family", "qtotal needs a copula family");
        require(src, !parametric || rc.theta || rc.tau, "copula.theta", "qtotal needs theta or tau");
        if (rc.status_cdfs.empty()) {
            require(src, rc.has_group(), "marginals", "qtotal needs query.status_cdfs or [marginals]");
            require(src, !rc.times.empty(), "query.times", "qtotal with [marginals] needs query times");
        } else {
            require(src, !rc.has_group(), "query.status_cdfs", "give either status_cdfs or [marginals], not both");
            require(src, rc.status_cdfs.size() >= 2, "query.status_cdfs", "need one status CDF per cause (at least 2)");
        }
        break;
    case Command::crude:
    case Command::simulate:
        require(src, rc.family.has_value(), "copula.family", "command needs a copula family");
        require(src, !parametric || rc.theta || rc.tau, "copula.theta", "command needs theta or tau");
        require(src, rc.has_group(), "marginals", "command needs [marginals]");
        require(src, rc.causes.size() >= 2, "marginals", "command needs at least two causes");
        if (rc.command == Command::crude)
            require(src, rc.lives.size() == 1, "marginals", "crude needs a single life");
        else
            require(src, rc.seed.has_value(), "simulate.seed", "simulate needs an explicit seed");
        break;
    case Command::nets:
        require(src, rc.family.has_value(), "copula.family", "nets needs a copula family");
        require(src, !parametric || rc.theta || rc.tau, "copula.theta", "nets needs theta or tau");
        require(src, rc.crude.has_value(), "input.crude", "nets needs a crude curve CSV");
        if (rc.has_group()) {
            require(src, rc.lives.size() == 1, "marginals", "nets compares against a single life");
            require(src, rc.causes == rc.crude->causes(), "marginals",
                    "causes must match the crude CSV causes in order");
        }
        break;
    case Command::check:
        break;
    }
    if (rc.family && rc.command != Command::theta && rc.command != Command::tau && rc.command != Command::check) {
        std::size_t m = rc.causes.size();
        if (rc.command == Command::qtotal && !rc.status_cdfs.empty()) m = rc.status_cdfs.size();
        if (rc.command == Command::nets) m = rc.crude->cause_count();
        try {
            (void)rc.copula(m);
        } catch (const CapacityError& e) {
            src.fail("marginals", e.what());
        } catch (const DomainError& e) {
            src.fail("copula.family", e.what());
        }
    }
    return rc;
}

} // namespace comolife::cli
