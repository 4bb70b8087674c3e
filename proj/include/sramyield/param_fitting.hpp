#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sramyield/device_model.hpp"

namespace sramyield {

struct IVPoint {
    double vgs = 0.0;
    double vds = 0.0;
    double ids = 0.0;
    double temperature = 25.0;
};

struct IVDataset {
    std::vector<IVPoint> points;
    std::string description;
};

inline constexpr std::size_t kMinSweepPoints = 20;

/// Throws ParseError unless all currents are non-negative, all biases lie in
/// [0, 1] V, and the set holds at least one Vgs sweep and one Vds sweep of
/// kMinSweepPoints values each.
void validate(const IVDataset& data);

/// CSV with header `vgs,vds,ids,temp_c`.
IVDataset read_iv_csv(std::istream& in, std::string description = {});
IVDataset read_iv_csv(const std::string& path);
void write_iv_csv(const IVDataset& data, std::ostream& out);

/// Dataset on the standard characterization grid: a Vgs sweep 0..0.7 V at
/// Vds = 0.7 V and Vds sweeps 0..0.7 V at Vgs = 0.4, 0.5, 0.6 V, all in
/// 10 mV steps. `multiplier(vgs, vds)` scales each current when given.
IVDataset generate_iv_dataset(const DeviceParams& params, double temperature = 25.0,
                              const std::function<double(double, double)>& multiplier = {});

struct FitOptions {
    int max_iterations = 500;
    bool fit_n = false;
    double ids_floor = 1e-15;     // A; smaller currents are dropped before taking logs
    double fd_step = 1e-6;        // relative forward-difference step
    double initial_damping = 1e-3;
};

struct FitReport {
    DeviceParams params;
    double max_rel_error_sat = 0.0;
    double avg_rel_error_sat = 0.0;
    int iterations = 0;
    bool converged = false;
    double residual_norm = 0.0;            // RMS log-current residual
    std::vector<double> accepted_costs;    // sum of squared residuals after each accepted step
    std::size_t dropped_points = 0;        // below the current floor
};

/// Levenberg-Marquardt fit of (i0, k1, k2, lambda[, n]) in log-current space.
/// n and vth_nominal of `init` are held fixed unless FitOptions::fit_n.
/// Throws FitError when the initial residual is not finite; running out of
/// iterations returns converged = false.
FitReport fit_device(const IVDataset& data, const DeviceParams& init, const FitOptions& options = {});

/// Starting point centered in the fitted-constant cloud: k1 = 0.3,
/// k2 = -0.01, lambda = 0.02 and i0 from the median current at the largest
/// gate bias. n, vth and polarity come from `shape`.
DeviceParams default_fit_init(const IVDataset& data, const DeviceParams& shape);

/// Points biased in saturation: vds > max(vgs - vth, 3 vt). Throws
/// DomainError when none qualify.
std::vector<IVPoint> saturation_mask(const IVDataset& data, const DeviceParams& params);

struct ErrorStats {
    double max_rel = 0.0;
    double avg_rel = 0.0;
    std::size_t excluded = 0;  // zero-current points inside the mask
};

/// Max and mean of |I_model - I_data| / I_data over the saturation mask.
ErrorStats error_stats(const IVDataset& data, const DeviceParams& params);

}  // namespace sramyield
