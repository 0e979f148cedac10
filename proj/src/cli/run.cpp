#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "comolife/cli.hpp"
#include "comolife/errors.hpp"
#include "comolife/simulate.hpp"

namespace comolife::cli {

using nlohmann::ordered_json;

namespace {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level() {
    const char* env = std::getenv("COMOLIFE_LOG");
    if (!env) return LogLevel::warn;
    const std::string v = env;
    if (v == "error") return LogLevel::error;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

void log(std::ostream& err, LogLevel level, const std::string& message) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (level <= log_level()) err << "comolife " << names[static_cast<int>(level)] << ": " << message << "\n";
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); }

ordered_json echo_inputs(const RunConfig& rc) {
    ordered_json in = ordered_json::object();
    in["copula"] = {{"family", rc.family ? ordered_json(std::string(to_string(*rc.family))) : ordered_json()},
                    {"theta", optional_number(rc.theta)},
                    {"tau", optional_number(rc.tau)}};
    ordered_json marginals = ordered_json::array();
    for (const auto& m : rc.marginals) marginals.push_back({{"life", m.life}, {"cause", m.cause}, {"law", m.spec}});
    in["marginals"] = std::move(marginals);
    in["group"] = {{"lives", rc.lives},
                   {"causes", rc.causes},
                   {"status", std::string(to_string(rc.status))},
                   {"mode", std::string(to_string(rc.mode))}};
    in["grid"] = {{"step", rc.solver.step},
                  {"horizon", rc.solver.horizon},
                  {"newton_tol", rc.solver.newton_tol},
                  {"newton_max_iter", rc.solver.newton_max_iter},
                  {"fd_step", rc.solver.fd_step}};
    in["query"] = {{"times", rc.times}, {"status_cdfs", rc.status_cdfs}};
    in["input"] = {{"crude", rc.crude_path.empty() ? ordered_json() : ordered_json(rc.crude_path)},
                   {"remainder", rc.crude ? ordered_json(rc.crude->truncation_remainder()) : ordered_json()}};
    in["simulate"] = {{"seed", rc.seed ? ordered_json(*rc.seed) : ordered_json()}, {"scenarios", rc.scenarios}};
    in["output"] = {{"format", rc.format == Format::csv ? "csv" : "json"}};
    return in;
}

void run_tau(const RunConfig& rc, Report& rep) {
    const auto spec = rc.copula(2);
    rep.tables.push_back({"kendall_tau", "kendall_tau", {"family", "theta", "tau"},
                          {{std::string(to_string(spec.family())), optional_number(spec.theta()),
                            kendall_tau(spec)}}});
}

void run_theta(const RunConfig& rc, Report& rep) {
    const double theta = theta_from_tau(*rc.family, *rc.tau);
    const double back = kendall_tau(CopulaSpec(*rc.family, theta, 2));
    rep.tables.push_back({"theta", "theta_from_tau", {"family", "tau", "theta"},
                          {{std::string(to_string(*rc.family)), *rc.tau, theta}}});
    rep.diagnostics["round_trip_error"] = std::abs(back - *rc.tau);
}

void run_qtotal(const RunConfig& rc, Report& rep) {
    if (!rc.status_cdfs.empty()) {
        const auto spec = rc.copula(rc.status_cdfs.size());
        Table t{"total_decrement", "total_decrement_from_status_cdfs", {}, {}};
        std::vector<ordered_json> row;
        for (std::size_t i = 0; i < rc.status_cdfs.size(); ++i) {
            t.columns.push_back("status_cdf_" + std::to_string(i + 1));
            row.emplace_back(rc.status_cdfs[i]);
        }
        t.columns.push_back("total_decrement");
        row.emplace_back(total_decrement_from_status_cdfs(spec, rc.status_cdfs));
        t.rows.push_back(std::move(row));
        rep.tables.push_back(std::move(t));
        return;
    }
    const auto group = rc.group();
    const auto spec = rc.copula(group.causes());
    Table t{"total_decrement", "status_total_decrement", {"t"}, {}};
    for (const auto& c : rc.causes) t.columns.push_back("status_cdf_" + c);
    t.columns.push_back("total_decrement");
    for (double time : rc.times) {
        std::vector<ordered_json> row{time};
        for (std::size_t i = 0; i < group.causes(); ++i) row.emplace_back(status_cause_cdf(group, i, time));
        row.emplace_back(status_total_decrement(group, spec, time));
        t.rows.push_back(std::move(row));
    }
    rep.tables.push_back(std::move(t));
}

void run_crude(const RunConfig& rc, Report& rep) {
    const auto nets = rc.nets_of_single_life();
    const auto spec = rc.copula(nets.size());
    const auto crude = crude_from_nets(spec, nets, rc.solver);
    Table t{"crude", "crude_from_nets", {"cause", "t", "crude_survival"}, {}};
    for (std::size_t j = 0; j < crude.cause_count(); ++j)
        for (std::size_t k = 0; k < crude.grid().size(); ++k)
            t.rows.push_back({rc.causes[j], crude.grid()[k], crude.curve(j)[k]});
    Table overall{"overall_survival", "overall_survival", {"t", "overall_survival"}, {}};
    double worst = 0.0;
    for (std::size_t k = 0; k < crude.grid().size(); ++k) {
        const double s = overall_survival(spec, nets, crude.grid()[k]);
        double total = crude.truncation_remainder();
        for (const auto& curve : crude.curves()) total += curve[k];
        worst = std::max(worst, std::abs(total - s));
        overall.rows.push_back({crude.grid()[k], s});
    }
    rep.tables.push_back(std::move(t));
    rep.tables.push_back(std::move(overall));
    rep.diagnostics["truncation_remainder"] = crude.truncation_remainder();
    rep.diagnostics["partition_residual"] = worst;
}

void run_nets(const RunConfig& rc, Report& rep) {
    const auto& crude = *rc.crude;
    const auto spec = rc.copula(crude.cause_count());
    const auto rec = nets_from_crude(spec, crude, rc.solver);
    Table t{"nets", "nets_from_crude", {"cause", "t", "net_survival"}, {}};
    for (std::size_t j = 0; j < rec.nets.size(); ++j)
        for (double time : crude.grid()) t.rows.push_back({crude.causes()[j], time, rec.nets[j].survival(time)});
    rep.tables.push_back(std::move(t));
    rep.diagnostics["max_newton_residual"] = rec.max_residual;
    rep.diagnostics["max_newton_iterations"] = rec.max_iterations;
    if (rc.has_group()) {
        const auto given = rc.nets_of_single_life();
        double worst = 0.0;
        for (std::size_t j = 0; j < given.size(); ++j)
            for (double time : crude.grid())
                worst = std::max(worst, std::abs(rec.nets[j].survival(time) - given[j].survival(time)));
        const bool ok = worst <= 1e-3;
        rep.diagnostics["max_abs_error_vs_marginals"] = worst;
        rep.diagnostics["round_trip_tolerance"] = 1e-3;
        rep.diagnostics["round_trip_success"] = ok;
        if (!ok) rep.warnings.push_back("recovered nets differ from the given marginals by more than 1e-3");
    }
}

void run_simulate(const RunConfig& rc, Report& rep) {
    const auto group = rc.group();
    const auto spec = rc.copula(group.causes());
    const bool single = group.lives() == 1;
    const auto samples = single ? sample_dependent_causes(spec, rc.nets_of_single_life(), rc.scenarios, *rc.seed)
                                : sample_group_model(group, spec, rc.scenarios, *rc.seed);
    Table t{"samples", single ? "sample_dependent_causes" : "sample_group_model", {"scenario", "cause", "lifetime"},
            {}};
    for (std::size_t r = 0; r < samples.scenarios(); ++r) {
        for (std::size_t i = 0; i < samples.causes(); ++i) {
            for (std::size_t l = 0; l < samples.lives(); ++l) {
                const std::string label = single ? rc.causes[i] : rc.lives[l] + "." + rc.causes[i];
                t.rows.push_back({r, label, samples.at(r, i, l)});
            }
        }
    }
    rep.tables.push_back(std::move(t));
    if (single && samples.scenarios() >= 2 && samples.causes() == 2) {
        const auto tau = empirical_kendall_tau(samples, 0, 1);
        rep.diagnostics["empirical_tau"] = tau.value;
        rep.diagnostics["empirical_tau_std_error"] = tau.std_error;
        rep.diagnostics["model_tau"] = kendall_tau(spec);
    }
    if (single && !rc.times.empty()) {
        const auto nets = rc.nets_of_single_life();
        Table check{"overall_survival_check", "empirical_overall_survival",
                    {"t", "empirical", "std_error", "model"}, {}};
        for (double time : rc.times) {
            const auto e = empirical_overall_survival(samples, time);
            check.rows.push_back({time, e.value, e.std_error, overall_survival(spec, nets, time)});
        }
        rep.tables.push_back(std::move(check));
    }
}

ordered_json error_object(const std::string& kind, const std::string& message, int code) {
    return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
}

int exit_code_for(const Error& e) {
    const std::string kind = e.kind();
    if (kind == "ConfigError") return 2;
    if (kind == "IoError") return 3;
    return 1;
}

} // namespace

Report run(const RunConfig& rc) {
    Report rep;
    rep.command = std::string(to_string(rc.command));
    rep.inputs = echo_inputs(rc);
    switch (rc.command) {
    case Command::tau: run_tau(rc, rep); break;
    case Command::theta: run_theta(rc, rep); break;
    case Command::qtotal: run_qtotal(rc, rep); break;
    case Command::crude: run_crude(rc, rep); break;
    case Command::nets: run_nets(rc, rep); break;
    case Command::simulate: run_simulate(rc, rep); break;
    case Command::check: {
        auto checks = run_checks(rc);
        checks.inputs = rep.inputs;
        return checks;
    }
    }
    return rep;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Comonotonic group decrement under dependent causes"};
    app.name("comolife");
    std::string command, config, copula, out_path, format, mode;
    double theta = 0, tau = 0, grid_step = 0, horizon = 0;
    std::uint64_t seed = 0;
    bool no_timestamp = false;
    app.add_option("command", command, "tau | theta | qtotal | crude | nets | simulate | check");
    app.add_option("--config", config, "Key-value config file");
    app.add_option("--copula", copula, "clayton | gumbel | independence | comonotone");
    app.add_option("--theta", theta, "Copula parameter");
    app.add_option("--tau", tau, "Kendall's tau (calibrates theta)");
    app.add_option("--grid-step", grid_step, "Grid spacing in years");
    app.add_option("--horizon", horizon, "Last grid time in years");
    app.add_option("--seed", seed, "Simulation seed");
    app.add_option("--out", out_path, "Output path (default: standard output)");
    app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--mode", mode, "literal | consistent group survival composition")
        ->check(CLI::IsMember({"literal", "consistent"}));
    app.add_flag("--no-timestamp", no_timestamp, "Omit the report timestamp");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_object("UsageError", e.what(), 2).dump() << "\n";
        return 2;
    }

    Overrides ov;
    if (!command.empty()) ov.command = command;
    if (app.count("--copula")) ov.copula = copula;
    if (app.count("--theta")) ov.theta = theta;
    if (app.count("--tau")) ov.tau = tau;
    if (app.count("--grid-step")) ov.grid_step = grid_step;
    if (app.count("--horizon")) ov.horizon = horizon;
    if (app.count("--seed")) ov.seed = seed;
    if (app.count("--out")) ov.out = out_path;
    if (app.count("--format")) ov.format = format;
    if (app.count("--mode")) ov.mode = mode;
    ov.no_timestamp = no_timestamp;

    try {
        const auto rc = parse_inputs(config.empty() ? std::nullopt : std::optional<std::filesystem::path>(config), ov);
        log(err, LogLevel::info, "running " + std::string(to_string(rc.command)));
        const auto rep = run(rc);
        for (const auto& w : rep.warnings) log(err, LogLevel::warn, w);
        std::string text;
        if (rc.format == Format::csv) {
            if (rep.tables.empty()) throw ConfigError("output.format: command produced no table for CSV output");
            text = render_csv(rep.tables.front());
        } else {
            text = render_json(rep, rc.timestamp);
        }
        if (rc.out_path.empty()) {
            out << text;
        } else {
            write_atomic(rc.out_path, text);
            log(err, LogLevel::info, "wrote " + rc.out_path);
        }
        return rep.success ? 0 : 1;
    } catch (const Error& e) {
        err << error_object(e.kind(), e.what(), exit_code_for(e)).dump() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << error_object("InternalError", e.what(), 1).dump() << "\n";
        return 1;
    }
}

} // namespace comolife::cli
