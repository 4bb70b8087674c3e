#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sramyield/json_io.hpp"
#include "sramyield/mc_engine.hpp"
#include "sramyield/transient_oracle.hpp"
#include "sramyield/yield_analytics.hpp"

namespace sramyield {

// ---------------------------------------------------------------------------
// Characterization helpers shared by the commands and the test suites
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kAccessCharacterizationSamples = 200;
inline constexpr std::uint64_t kWriteCharacterizationSamples = 1600;

/// Log-spaced read times whose nominal dV runs from mu_vos + 0.5 sigma_vos
/// to min(mu_vos + 12 sigma_vos, 0.8 vdd).
std::vector<double> default_access_grid(const CellConfig& cell, const VariationSpec& var, std::size_t points = 16);

/// One (mu, sigma) row per read time from `n` samples each. All grid points
/// reuse the same threshold draws.
AccessCharacterization characterize_access(const CellConfig& cell, const VariationSpec& var,
                                           const std::vector<double>& grid, std::uint64_t n, OracleMode oracle,
                                           unsigned threads = 1);

struct WriteCharacterization {
    WriteTimeDistribution dist;
    std::string t0_source;  // "auto" or "fixed"
};

/// Without `t0` the reference time comes from WriteTimeModel::reference_time.
WriteCharacterization characterize_write(const CellConfig& cell, const VariationSpec& var, std::uint64_t n,
                                         OracleMode oracle, std::optional<double> t0 = std::nullopt,
                                         unsigned threads = 1);

// ---------------------------------------------------------------------------
// Command plumbing
// ---------------------------------------------------------------------------

enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitParse = 2,
    kExitFit = 3,
    kExitDegenerate = 4,
    kExitRange = 5,
};

/// Maps a caught exception onto the stable exit-code contract.
int exit_code_for(const std::exception& e);

struct RunContext {
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;  // overrides the variation seed
    bool json_logs = false;
    std::vector<std::string> command_line;
    std::ostream* out = nullptr;  // result summary; defaults to std::cout
    std::ostream* log = nullptr;  // diagnostics; defaults to std::cerr

    void info(const std::string& msg) const;
    void warn(const std::string& msg) const;
    void error(const std::string& msg) const;
    std::ostream& stdout_stream() const;
};

/// Collects inputs and outputs of one command and writes manifest.json.
class Manifest {
public:
    static constexpr const char* kFileName = "manifest.json";

    Manifest(const RunContext& ctx, std::string command);

    void add_input(const std::string& role, const std::string& path);
    void set_seed(std::uint64_t seed) { seed_ = seed; }
    void add_note(const std::string& note) { notes_.push_back(note); }

    /// Writes `content` under out_dir and records its digest.
    std::filesystem::path write_output(const std::string& name, std::string_view content);
    /// JSON outputs get a "manifest" key before being written.
    std::filesystem::path write_output(const std::string& name, Json content);

    void record_wall_time(const std::string& label, double seconds);

    /// Writes manifest.json; returns its path.
    std::filesystem::path finish();

private:
    const RunContext& ctx_;
    std::string command_;
    std::optional<std::uint64_t> seed_;
    Json inputs_ = Json::array();
    Json outputs_ = Json::array();
    Json timings_ = Json::object();
    std::vector<std::string> notes_;
    std::chrono::system_clock::time_point started_;
    std::chrono::steady_clock::time_point steady_start_;
};

CellConfig load_cell(const std::optional<std::string>& path);
VariationSpec load_variation(const std::optional<std::string>& path, const RunContext& ctx);

struct FitCommand {
    std::string iv_csv;
    std::optional<std::string> init_json;
    bool fit_n = false;
    bool emit_iv = false;
    int max_iterations = 500;
};

struct CharacterizeCommand {
    std::optional<std::string> cell_json;
    std::optional<std::string> variation_json;
    AccessMode mode = AccessMode::read;
    std::optional<std::uint64_t> n;
    std::vector<double> grid;               // read times; empty selects default_access_grid
    OracleMode oracle = OracleMode::closed;
    std::optional<double> t0;
};

struct YieldCommand {
    std::string characterization_json;
    std::optional<std::string> offset_json;
    std::vector<double> constraints;
    std::optional<double> target_pf;
};

struct CompareCommand {
    std::optional<std::string> cell_json;
    std::optional<std::string> variation_json;
    std::optional<std::string> characterization_json;
    AccessMode mode = AccessMode::read;
    std::vector<double> constraints;
    std::vector<double> pf_targets;         // converted to constraints through the analytical model
    std::uint64_t n = 1'000'000;
    OracleMode oracle = OracleMode::closed;
};

enum class SweepAxis { vdd, vwl, temperature };
SweepAxis sweep_axis_from_string(std::string_view text);
std::string_view to_string(SweepAxis axis);

struct SweepCommand {
    std::optional<std::string> cell_json;
    std::optional<std::string> variation_json;
    AccessMode mode = AccessMode::read;
    SweepAxis axis = SweepAxis::vdd;
    std::vector<double> values;
    double target_pf = 3.17e-5;
    OracleMode oracle = OracleMode::closed;
};

struct SweepPoint {
    double axis_value = 0.0;
    double constraint = 0.0;
    double normalized = 0.0;
};

/// Effective cell at one sweep point. vdd moves vwl and vddc with it; vwl
/// maps onto a wordline underdrive for reads and a boost for writes.
/// Throws RangeError naming the point on assist-invariant violations.
CellConfig sweep_cell(const CellConfig& base, SweepAxis axis, double value, AccessMode mode);

/// Constraint at `target_pf` for each axis value, normalized to the first.
std::vector<SweepPoint> run_sweep(const CellConfig& base, const VariationSpec& var, AccessMode mode, SweepAxis axis,
                                  const std::vector<double>& values, double target_pf, OracleMode oracle,
                                  unsigned threads = 1);

struct QQCommand {
    std::optional<std::string> cell_json;
    std::optional<std::string> variation_json;
    AccessMode mode = AccessMode::read;
    std::uint64_t n = 10'000;
    std::optional<double> t_read;           // access; defaults to the grid midpoint
    OracleMode oracle = OracleMode::closed;
    QQTail tail = QQTail::none;
    double tail_fraction = 0.01;
};

struct McCommand {
    std::optional<std::string> cell_json;
    std::optional<std::string> variation_json;
    AccessMode mode = AccessMode::read;
    std::uint64_t n = 100'000;
    double constraint = 0.0;
    OracleMode oracle = OracleMode::closed;
    bool export_samples = false;
    double t_max = 0.0;
};

int cmd_fit(const FitCommand& cmd, const RunContext& ctx);
int cmd_characterize(const CharacterizeCommand& cmd, const RunContext& ctx);
int cmd_yield(const YieldCommand& cmd, const RunContext& ctx);
int cmd_compare(const CompareCommand& cmd, const RunContext& ctx);
int cmd_sweep(const SweepCommand& cmd, const RunContext& ctx);
int cmd_qq(const QQCommand& cmd, const RunContext& ctx);
int cmd_mc(const McCommand& cmd, const RunContext& ctx);

AccessMode access_mode_from_string(std::string_view text);
std::string_view to_string(AccessMode mode);

}  // namespace sramyield
