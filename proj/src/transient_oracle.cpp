#include "sramyield/transient_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sramyield/errors.hpp"
#include "sramyield/numerics.hpp"

namespace sramyield {

double CellConfig::vt() const { return thermal_voltage(temperature); }

void validate(const CellConfig& c, bool strict_trip_band) {
    std::ostringstream msg;
    if (!(c.vdd > 0.0)) msg << "vdd must be positive; ";
    if (!(c.vddc > 0.0)) msg << "vddc must be positive; ";
    if (!(c.vwl >= 0.0)) msg << "vwl must be non-negative; ";
    if (!(c.vwl <= c.vdd + kBoostHeadroom + 1e-12)) msg << "vwl exceeds vdd + " << kBoostHeadroom << " V; ";
    if (!(c.c_blb > 0.0)) msg << "c_blb must be positive; ";
    if (!(c.c_q > 0.0)) msg << "c_q must be positive; ";
    if (!(c.v_trip > 0.0 && c.v_trip < c.vddc)) msg << "v_trip must lie in (0, vddc); ";
    if (strict_trip_band && c.vddc > 0.0) {
        const double ratio = c.v_trip / c.vddc;
        if (ratio < kTripBandLo - 1e-12 || ratio > kTripBandHi + 1e-12) {
            msg << "v_trip/vddc = " << ratio << " outside [" << kTripBandLo << ", " << kTripBandHi << "]; ";
        }
    }
    std::string problems = msg.str();
    if (!problems.empty()) throw ConfigError("invalid cell: " + problems.substr(0, problems.size() - 2));

    const VgsRange range{0.0, std::max(c.vwl, c.vddc), c.temperature};
    validate(c.nmos, range);
    validate(c.pmos, range);
    if (c.nmos.polarity != Polarity::nmos || c.pmos.polarity != Polarity::pmos) {
        throw ConfigError("invalid cell: nmos/pmos slots hold the wrong polarity");
    }
}

CellConfig apply_assist(const CellConfig& base, const AssistConfig& assist, AccessMode mode) {
    if (assist.wl_underdrive < 0.0 || assist.wl_boost < 0.0) {
        throw ConfigError("assist voltages wl_underdrive and wl_boost must be non-negative");
    }
    CellConfig out = base;
    if (mode == AccessMode::read) {
        out.vwl = base.vdd - assist.wl_underdrive;
        out.vddc = base.vdd + std::max(assist.cell_vdd_delta, 0.0);
    } else {
        out.vwl = base.vdd + assist.wl_boost;
        out.vddc = base.vdd + std::min(assist.cell_vdd_delta, 0.0);
    }
    if (out.vwl < 0.0) throw ConfigError("assist drives the wordline below ground");
    if (!(out.vddc > 0.0)) throw ConfigError("assist collapses the cell supply to zero");
    out.v_trip = base.v_trip * out.vddc / base.vddc;
    if (!(out.vddc > out.v_trip)) throw ConfigError("assisted cell supply does not exceed the trip point");
    validate(out);
    return out;
}

// ---------------------------------------------------------------------------
// Read path
// ---------------------------------------------------------------------------

double delta_v_closed(const CellConfig& cell, double vth_n, double t_read) {
    if (!(t_read >= 0.0)) throw DomainError("t_read must be non-negative");
    if (t_read == 0.0) return 0.0;
    const DeviceParams& nm = cell.nmos;
    const double vt = cell.vt();
    const double nvt = nm.n * vt;
    const double p = gate_polynomial(nm.with_vth(vth_n), cell.vwl, vt);
    const double p_clamped = std::clamp(p, -kExponentClamp, kExponentClamp);
    // Charge-equivalent swing the bitline would see without DIBL, in volts.
    const double swing = nm.i0 * std::exp(p_clamped + nm.lambda * cell.vdd / nvt) * t_read / cell.c_blb;
    const double u = nm.lambda * swing / nvt;
    double dv;
    if (u == 0.0) {
        dv = swing;
    } else if (u <= -1.0) {
        return cell.vdd;
    } else {
        dv = swing * (std::log1p(u) / u);
    }
    return std::min(dv, cell.vdd);
}

double delta_v_ode(const CellConfig& cell, double vth_n, double t_read, int steps) {
    if (!(t_read >= 0.0)) throw DomainError("t_read must be non-negative");
    if (steps < 1) throw DomainError("delta_v_ode needs at least one step");
    if (t_read == 0.0) return 0.0;
    const DeviceParams nm = cell.nmos.with_vth(vth_n);
    const double vt = cell.vt();
    const double vdd = cell.vdd;
    const double inv_c = 1.0 / cell.c_blb;
    auto rate = [&](double dv) { return ids_proposed(nm, cell.vwl, std::max(vdd - dv, 0.0), vt) * inv_c; };

    const double h = t_read / steps;
    double dv = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double k1 = rate(dv);
        const double k2 = rate(dv + 0.5 * h * k1);
        const double k3 = rate(dv + 0.5 * h * k2);
        const double k4 = rate(dv + h * k3);
        dv += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (dv >= vdd) return vdd;
    }
    return dv;
}

double delta_v_offset_term(const CellConfig& cell, double t_read, double p0) {
    const DeviceParams& nm = cell.nmos;
    if (nm.lambda == 0.0) throw DomainError("linearized discharge form needs lambda != 0");
    const double nvt = nm.n * cell.vt();
    const double alpha = nm.lambda * nm.i0 / (nvt * cell.c_blb);
    const double arg = alpha * t_read + std::exp(-nm.lambda * cell.vdd / nvt - p0);
    if (!(arg > 0.0)) throw DomainError("linearized discharge form undefined: bitline fully discharged");
    return nvt / nm.lambda * std::log(arg) + cell.vdd;
}

double delta_v_linearized(const CellConfig& cell, double vth_n, double t_read, double p0) {
    const DeviceParams& nm = cell.nmos;
    const double vt = cell.vt();
    const double p = gate_polynomial(nm.with_vth(vth_n), cell.vwl, vt);
    return nm.n * vt / nm.lambda * p + delta_v_offset_term(cell, t_read, p0);
}

double read_time_for_delta_v(const CellConfig& cell, double vth_n, double delta_v) {
    if (!(delta_v >= 0.0 && delta_v < cell.vdd)) throw DomainError("delta_v must lie in [0, vdd)");
    if (delta_v == 0.0) return 0.0;
    const DeviceParams& nm = cell.nmos;
    const double vt = cell.vt();
    const double nvt = nm.n * vt;
    const double p = std::clamp(gate_polynomial(nm.with_vth(vth_n), cell.vwl, vt), -kExponentClamp, kExponentClamp);
    const double a = nm.lambda * delta_v / nvt;
    const double growth = a == 0.0 ? 1.0 : std::expm1(a) / a;
    return cell.c_blb * delta_v * growth * std::exp(-p - nm.lambda * cell.vdd / nvt) / nm.i0;
}

// ---------------------------------------------------------------------------
// Write path
// ---------------------------------------------------------------------------

double write_start_voltage(const CellConfig& cell) { return cell.vddc; }

WriteTimeModel::WriteTimeModel(const CellConfig& cell) : cell_(cell), vt_(cell.vt()) {
    const DeviceParams& nm = cell_.nmos;
    const DeviceParams& pm = cell_.pmos;
    const double p_n0 = gate_polynomial(nm, cell_.vwl, vt_);
    const double p_p0 = gate_polynomial(pm, cell_.vddc, vt_);
    beta0_ = std::exp(p_p0 - p_n0);

    const double nvt_n = nm.n * vt_;
    const double nvt_p = pm.n * vt_;
    const double v_start = write_start_voltage(cell_);
    auto denominator = [&](double v) {
        return nm.i0 * std::exp(nm.lambda * v / nvt_n) - beta0_ * pm.i0 * std::exp(pm.lambda * (v_start - v) / nvt_p);
    };
    // Both exponentials are monotone in v, so the denominator is monotone
    // unless the two DIBL terms pull in the same direction; check both ends
    // and a fine interior grid.
    constexpr int kProbe = 64;
    for (int i = 0; i <= kProbe; ++i) {
        const double v = cell_.v_trip + (v_start - cell_.v_trip) * i / kProbe;
        if (!(denominator(v) > 0.0)) {
            std::ostringstream msg;
            msg << "closed-form write model inapplicable: frozen pull-up overpowers pull-down at V_Q = " << v;
            throw ModelInapplicable(msg.str());
        }
    }
    w_ = numerics::adaptive_simpson([&](double v) { return 1.0 / denominator(v); }, cell_.v_trip, v_start, 1e-10);
}

double WriteTimeModel::time(double vth_n) const {
    const double p_n = gate_polynomial(cell_.nmos.with_vth(vth_n), cell_.vwl, vt_);
    return cell_.c_q * std::exp(-std::clamp(p_n, -kExponentClamp, kExponentClamp)) * w_;
}

double WriteTimeModel::reference_time(double fallback) const {
    const DeviceParams& nm = cell_.nmos;
    if (!(nm.k2 < 0.0)) return fallback;
    return cell_.c_q * w_ * std::exp(nm.k1 * nm.k1 / (4.0 * nm.k2));
}

double write_time_closed(const CellConfig& cell, double vth_n) { return WriteTimeModel(cell).time(vth_n); }

std::optional<double> write_time_ode(const CellConfig& cell, double vth_n, double vth_p, double t_max, int steps) {
    if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
    if (steps < 1) throw DomainError("write_time_ode needs at least one step");
    const DeviceParams nm = cell.nmos.with_vth(vth_n);
    const DeviceParams pm = cell.pmos.with_vth(vth_p);
    const double vt = cell.vt();
    const double vddc = cell.vddc;
    const double inv_c = 1.0 / cell.c_q;
    auto rate = [&](double vq) {
        const double pull_down = ids_proposed(nm, cell.vwl, std::max(vq, 0.0), vt);
        const double pull_up = ids_proposed(pm, vddc, std::max(vddc - vq, 0.0), vt);
        return (pull_up - pull_down) * inv_c;
    };

    double vq = write_start_voltage(cell);
    if (rate(vq) >= 0.0) return std::nullopt;
    if (vq <= cell.v_trip) return 0.0;

    const double h = t_max / steps;
    double t = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double k1 = rate(vq);
        const double k2 = rate(vq + 0.5 * h * k1);
        const double k3 = rate(vq + 0.5 * h * k2);
        const double k4 = rate(vq + h * k3);
        const double next = vq + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (next <= cell.v_trip) return t + h * (vq - cell.v_trip) / (vq - next);
        vq = next;
        t += h;
    }
    return std::nullopt;
}

}  // namespace sramyield
