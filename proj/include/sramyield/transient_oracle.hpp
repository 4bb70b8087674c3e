#pragma once

#include <optional>

#include "sramyield/device_model.hpp"

namespace sramyield {

/// Electrical view of one 6T cell plus its column load.
///
/// Reads discharge BLB through the access NMOS (gate at vwl, drain on the
/// bitline precharged to vdd, source at QB = 0). Writes pull node Q from the
/// cell supply towards ground through the access NMOS while the PMOS
/// pull-up (gate at QB = 0) fights back.
struct CellConfig {
    double vdd = 0.5;
    double vwl = 0.5;
    double vddc = 0.5;
    double c_blb = 50e-15;
    double c_q = 1e-15;
    double v_trip = 0.25;
    double temperature = 25.0;
    DeviceParams nmos = reference_device("nch_lvt");
    DeviceParams pmos = reference_device("pch_svt").with_vth(0.30);

    double vt() const;
};

inline constexpr double kTripBandLo = 0.40;
inline constexpr double kTripBandHi = 0.62;
inline constexpr double kBoostHeadroom = 0.2;

/// Throws ConfigError on violated invariants. With `strict_trip_band` the
/// ratio v_trip / vddc must also lie in [0.40, 0.62].
void validate(const CellConfig& cell, bool strict_trip_band = true);

struct AssistConfig {
    double wl_underdrive = 0.0;  // V, subtracted from vdd on reads
    double wl_boost = 0.0;       // V, added to vdd on writes
    double cell_vdd_delta = 0.0; // V, positive part boosts reads, negative part collapses writes
};

enum class AccessMode { read, write };

/// Derives the effective cell for one access. Read: vwl = vdd - underdrive,
/// vddc = vdd + max(delta, 0). Write: vwl = vdd + boost,
/// vddc = vdd + min(delta, 0). v_trip follows vddc proportionally.
CellConfig apply_assist(const CellConfig& base, const AssistConfig& assist, AccessMode mode);

// ---------------------------------------------------------------------------
// Read path
// ---------------------------------------------------------------------------

/// Exact solution of the integrated discharge equation with the
/// transregional factor dropped. Clamped to vdd once the bitline is fully
/// discharged; continuous through lambda = 0.
double delta_v_closed(const CellConfig& cell, double vth_n, double t_read);

/// RK4 integration of the full discharge equation (transregional factor
/// kept) with `steps` fixed steps.
double delta_v_ode(const CellConfig& cell, double vth_n, double t_read, int steps = 4096);

/// Linearized form with the inner gate polynomial frozen at `p0`:
/// (n vt / lambda) * p(vwl, vth_n) + g(t_read). Requires lambda != 0.
double delta_v_linearized(const CellConfig& cell, double vth_n, double t_read, double p0);

/// g(t) of the linearized form.
double delta_v_offset_term(const CellConfig& cell, double t_read, double p0);

/// Inverse of delta_v_closed in time: the read time after which the
/// bitline differential reaches `delta_v`.
double read_time_for_delta_v(const CellConfig& cell, double vth_n, double delta_v);

// ---------------------------------------------------------------------------
// Write path
// ---------------------------------------------------------------------------

/// Closed-form write time with the pull-up/pull-down ratio frozen at its
/// nominal value. The ratio and the voltage integral w(v_trip) are computed
/// once at construction, after which evaluation is read-only.
class WriteTimeModel {
public:
    /// Throws ModelInapplicable when the frozen pull-up overpowers the
    /// pull-down anywhere on [v_trip, vddc].
    explicit WriteTimeModel(const CellConfig& cell);

    const CellConfig& cell() const { return cell_; }
    double beta0() const { return beta0_; }
    double w() const { return w_; }

    double time(double vth_n) const;

    /// Time unit that turns ln(t / t0) into an exact scaled square of the
    /// normalized NMOS overdrive: C_Q * w * exp(K1^2 / (4 K2)). Only defined
    /// for K2 < 0; otherwise returns `fallback`.
    double reference_time(double fallback = 1e-12) const;

private:
    CellConfig cell_;
    double vt_;
    double beta0_;
    double w_;
};

double write_time_closed(const CellConfig& cell, double vth_n);

/// Write time from RK4 integration of the node-Q current balance with both
/// devices at their sampled thresholds. nullopt means censored: no crossing
/// of v_trip by t_max.
std::optional<double> write_time_ode(const CellConfig& cell, double vth_n, double vth_p, double t_max,
                                     int steps = 8192);

/// Starting voltage of node Q during a write.
double write_start_voltage(const CellConfig& cell);

}  // namespace sramyield
