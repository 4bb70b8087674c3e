#include "sramyield/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sramyield/errors.hpp"

namespace sramyield {

namespace {

constexpr double kBoltzmann = 1.380649e-23;       // J/K (exact, SI 2019)
constexpr double kElementaryCharge = 1.602176634e-19;  // C (exact)
constexpr double kZeroCelsius = 273.15;

double clamped_exp(double arg) {
    return std::exp(std::clamp(arg, -kExponentClamp, kExponentClamp));
}

// 1 - exp(-a) without cancellation for small a.
double transregional_factor(double a) { return -std::expm1(-a); }

void check_bias(const OperatingPoint& op) {
    if (!(op.vgs >= 0.0) || !(op.vds >= 0.0)) {
        std::ostringstream msg;
        msg << "bias magnitudes must be non-negative (vgs=" << op.vgs << ", vds=" << op.vds << ")";
        throw DomainError(msg.str());
    }
}

}  // namespace

double thermal_voltage(double temperature_c) {
    const double kelvin = temperature_c + kZeroCelsius;
    if (!(kelvin > 0.0)) {
        throw DomainError("temperature at or below absolute zero: " + std::to_string(temperature_c) + " degC");
    }
    return kBoltzmann * kelvin / kElementaryCharge;
}

void validate(const DeviceParams& p, const VgsRange& range) {
    std::ostringstream msg;
    if (!(p.i0 > 0.0)) msg << "i0 must be positive; ";
    if (!(p.n >= 1.0)) msg << "n must be >= 1; ";
    if (!(p.k1 > 0.0)) msg << "k1 must be positive; ";
    if (!(std::abs(p.k2) < p.k1)) msg << "|k2| must be smaller than k1; ";
    if (!std::isfinite(p.lambda)) msg << "lambda must be finite; ";
    if (!std::isfinite(p.vth_nominal)) msg << "vth_nominal must be finite; ";
    if (msg.tellp() == 0) {
        // k1 + 2 k2 x is linear in x, so checking both range ends suffices.
        const double nvt = p.n * thermal_voltage(range.temperature);
        for (double vgs : {range.lo, range.hi}) {
            const double x = (vgs - p.vth_nominal) / nvt;
            if (!(p.k1 + 2.0 * p.k2 * x > 0.0)) {
                msg << "Ids(Vgs) not monotone at vgs=" << vgs << " (k1 + 2 k2 x = " << p.k1 + 2.0 * p.k2 * x
                    << "); ";
            }
        }
    }
    const std::string problems = msg.str();
    if (!problems.empty()) {
        throw ConfigError("invalid device parameters: " + problems.substr(0, problems.size() - 2));
    }
}

double gate_polynomial(const DeviceParams& p, double vgs, double vt) {
    const double x = (vgs - p.vth_nominal) / (p.n * vt);
    return p.k1 * x + p.k2 * x * x;
}

double ids_transregional(const DeviceParams& p, double vgs, double vds, double vt) {
    if (vds <= 0.0) return 0.0;
    return p.i0 * clamped_exp(gate_polynomial(p, vgs, vt)) * transregional_factor(p.k1 * vds / vt);
}

double ids_proposed(const DeviceParams& p, double vgs, double vds, double vt) {
    if (vds <= 0.0) return 0.0;
    const double dibl = std::exp(p.lambda * vds / (p.n * vt));
    return p.i0 * clamped_exp(gate_polynomial(p, vgs, vt)) * dibl * transregional_factor(p.k1 * vds / vt);
}

double ids_proposed(const DeviceParams& p, const OperatingPoint& op) {
    check_bias(op);
    return ids_proposed(p, op.vgs, op.vds, thermal_voltage(op.temperature));
}

double ids_transregional(const DeviceParams& p, const OperatingPoint& op) {
    check_bias(op);
    return ids_transregional(p, op.vgs, op.vds, thermal_voltage(op.temperature));
}

double ids_classic(const DeviceParams& p, const OperatingPoint& op) {
    check_bias(op);
    if (op.vds <= 0.0) return 0.0;
    const double vt = thermal_voltage(op.temperature);
    const double nvt = p.n * vt;
    return p.i0 * clamped_exp((op.vgs - p.vth_nominal) / nvt) * std::exp(p.lambda * op.vds / nvt) *
           transregional_factor(op.vds / vt);
}

const std::array<NamedDevice, 6>& reference_devices() {
    // i0, k1, k2, lambda as fitted at TTG 25 degC.
    static const std::array<NamedDevice, 6> table{{
        {"nch_hvt", {5.3796e-6, 0.3981, -0.0296, 0.0201, 1.5, 0.45, Polarity::nmos}},
        {"pch_hvt", {1.3225e-6, 0.5068, -0.0360, 0.0315, 1.5, 0.45, Polarity::pmos}},
        {"nch_svt", {2.29e-5, 0.1414, -0.0028, -0.0012, 1.5, 0.40, Polarity::nmos}},
        {"pch_svt", {7.9742e-6, 0.3102, -0.0093, 0.0014, 1.5, 0.40, Polarity::pmos}},
        {"nch_lvt", {1.4854e-5, 0.3157, -0.0118, 0.0161, 1.5, 0.35, Polarity::nmos}},
        {"pch_lvt", {1.5647e-5, 0.2547, -0.0082, 0.0135, 1.5, 0.35, Polarity::pmos}},
    }};
    return table;
}

DeviceParams reference_device(std::string_view name) {
    for (const auto& row : reference_devices()) {
        if (row.name == name) return row.params;
    }
    throw ConfigError("unknown reference device '" + std::string(name) + "'");
}

std::string_view to_string(Polarity polarity) { return polarity == Polarity::nmos ? "nmos" : "pmos"; }

Polarity polarity_from_string(std::string_view text) {
    if (text == "nmos" || text == "NMOS" || text == "n") return Polarity::nmos;
    if (text == "pmos" || text == "PMOS" || text == "p") return Polarity::pmos;
    throw ParseError("unknown polarity '" + std::string(text) + "'");
}

}  // namespace sramyield
