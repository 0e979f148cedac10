#ifndef COMOLIFE_CLI_HPP
#define COMOLIFE_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "comolife/copulas.hpp"
#include "comolife/decrement.hpp"
#include "comolife/group.hpp"
#include "comolife/marginals.hpp"

namespace comolife::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { tau, theta, qtotal, crude, nets, simulate, check };
enum class Format { csv, json };

std::string_view to_string(Command command);
Command parse_command(std::string_view name);

// One `[marginals]` entry, already resolved to a net law.
struct MarginalEntry {
    std::string life;
    std::string cause;
    std::string spec;  // text as written, e.g. "exponential 1" or "table lives.csv"
    NetSurvival net;
};

// Values given on the command line; each one set overrides the file.
struct Overrides {
    std::optional<std::string> command;
    std::optional<std::string> copula;
    std::optional<double> theta;
    std::optional<double> tau;
    std::optional<double> grid_step;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> mode;
    bool no_timestamp = false;
};

struct RunConfig {
    Command command = Command::check;

    std::optional<CopulaFamily> family;
    std::optional<double> theta;
    std::optional<double> tau;

    std::vector<MarginalEntry> marginals;
    std::vector<std::string> lives;   // group order
    std::vector<std::string> causes;  // cause order
    Status status = Status::joint_survival;
    SurvivalComposition mode = SurvivalComposition::consistent;

    SolverConfig solver;
    std::vector<double> times;        // [query] times
    std::vector<double> status_cdfs;  // [query] status_cdfs

    std::string crude_path;
    std::optional<CrudeCurveSet> crude;

    std::optional<std::uint64_t> seed;
    std::size_t scenarios = 10000;

    std::string out_path;  // empty: standard output
    Format format = Format::json;
    bool timestamp = true;

    // Where each key was set ("config.ini:4" or "--theta"), for error messages.
    std::map<std::string, std::string> origin;

    bool has_copula() const { return family.has_value(); }
    // Copula of the given dimension; theta falls back to theta_from_tau.
    CopulaSpec copula(std::size_t dimension) const;
    bool has_group() const { return !marginals.empty(); }
    GroupStatus group() const;
    std::vector<NetSurvival> nets_of_single_life() const;
};

// Reads the key-value config (if a path is given), applies overrides, loads
// referenced CSV files and validates everything the command needs. Errors
// name the key and where it was set.
RunConfig parse_inputs(const std::optional<std::filesystem::path>& config_path, const Overrides& overrides);

struct Table {
    std::string name;
    std::string provenance;  // library operation that produced the rows
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::ordered_json>> rows;
};

struct Report {
    std::string command;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    std::vector<Table> tables;
    nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
    std::vector<std::string> warnings;
    bool success = true;
};

Report run(const RunConfig& config);

// Invariant suite behind the `check` command.
Report run_checks(const RunConfig& config);

// Serialization; doubles are written with 17 significant digits.
std::string to_json_text(const nlohmann::ordered_json& value);
std::string render_json(const Report& report, bool with_timestamp);
std::string render_csv(const Table& table);

// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// CSV readers with the fixed headers `life,cause,t,q` and
// `cause,t,crude_survival`. The crude file cannot carry the probability of
// surviving every cause past the horizon; it is passed in (config key
// `[input] remainder`).
std::vector<LifeTableRecord> read_life_table(const std::filesystem::path& path);
CrudeCurveSet read_crude_curves(const std::filesystem::path& path, double truncation_remainder = 0.0);

// Whole command-line program. Returns the process exit code: 0 success,
// 1 failed checks or library error, 2 usage or config error, 3 I/O error.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace comolife::cli

#endif // COMOLIFE_CLI_HPP
