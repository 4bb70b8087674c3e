#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sramyield/rng.hpp"
#include "sramyield/transient_oracle.hpp"
#include "sramyield/yield_analytics.hpp"

namespace sramyield {

/// Independent Gaussian threshold variation of the pull-down/access NMOS and
/// the pull-up PMOS, plus the sense-amplifier offset.
struct VariationSpec {
    double vth_n_mean = 0.35;
    double vth_n_sigma = 0.03;
    double vth_p_mean = 0.30;
    double vth_p_sigma = 0.03;
    OffsetVoltageDist offset{0.0, 0.025};
    std::uint64_t seed = 1;
};

void validate(const VariationSpec& var);

enum class OracleMode { closed, ode };

std::string_view to_string(OracleMode mode);
OracleMode oracle_mode_from_string(std::string_view text);

struct McOptions {
    unsigned threads = 1;
    bool keep_samples = false;
    /// Write-simulation horizon; 0 selects 100x the nominal closed-form time.
    double t_max = 0.0;
    /// Substream for threshold draws. Characterization uses its own stream so
    /// that its samples are independent of validation runs with the same seed.
    Stream device_stream = Stream::devices;
};

struct SampleRecord {
    std::uint64_t index = 0;
    double vth_n = 0.0;
    double vth_p = 0.0;
    double v_os = 0.0;
    double metric = 0.0;  // dV (V) for reads, write time (s) for writes; inf when censored
    bool fail = false;
};

struct McResult {
    std::uint64_t n = 0;
    std::uint64_t failures = 0;
    double pf = 0.0;
    std::pair<double, double> ci95{0.0, 1.0};
    std::optional<std::string> samples_path;
    double wall_time = 0.0;
    std::vector<SampleRecord> samples;  // filled when McOptions::keep_samples
};

/// Wilson score interval for `failures` out of `n` trials.
std::pair<double, double> wilson_ci(std::uint64_t failures, std::uint64_t n, double confidence = 0.95);

/// Access failure: v_os > 0 and dV(t_read) < v_os, with v_os drawn per sample.
McResult run_access_mc(const CellConfig& cell, const VariationSpec& var, std::uint64_t n, double t_read,
                       OracleMode mode, const McOptions& options = {});

/// Write failure: write time > t_write; censored samples always fail.
/// Throws RangeError when t_write exceeds the simulation horizon.
McResult run_write_mc(const CellConfig& cell, const VariationSpec& var, std::uint64_t n, double t_write,
                      OracleMode mode, const McOptions& options = {});

/// Raw dV samples at one read time (index order).
std::vector<double> sample_delta_v(const CellConfig& cell, const VariationSpec& var, std::uint64_t n, double t_read,
                                   OracleMode mode, const McOptions& options = {});

/// Raw write-time samples (index order); nullopt marks a censored sample.
std::vector<std::optional<double>> sample_write_times(const CellConfig& cell, const VariationSpec& var,
                                                      std::uint64_t n, OracleMode mode,
                                                      const McOptions& options = {});

/// Horizon used by write simulations for `options`.
double write_horizon(const CellConfig& cell, const VariationSpec& var, const McOptions& options);

/// CSV with header `i,vth_n,vth_p,v_os,metric,fail`.
void export_samples(const std::vector<SampleRecord>& samples, std::ostream& out);
void export_samples(const std::vector<SampleRecord>& samples, const std::string& path);

}  // namespace sramyield
