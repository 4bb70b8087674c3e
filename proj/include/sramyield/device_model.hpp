#pragma once

#include <array>
#include <string>
#include <string_view>

namespace sramyield {

enum class Polarity { nmos, pmos };

/// Fitted constants of the DIBL-aware compact drain-current model for one
/// transistor flavor.
///
/// PMOS devices use the same form as NMOS: callers pass source-referenced
/// magnitudes |Vgs|, |Vds| and a positive |Vth|.
struct DeviceParams {
    double i0 = 1e-5;            // current scale (A)
    double k1 = 0.3;             // linear gate coefficient
    double k2 = -0.01;           // quadratic gate coefficient
    double lambda = 0.02;        // DIBL coefficient
    double n = 1.5;              // subthreshold swing factor
    double vth_nominal = 0.35;   // threshold magnitude (V)
    Polarity polarity = Polarity::nmos;

    DeviceParams with_vth(double vth) const {
        DeviceParams copy = *this;
        copy.vth_nominal = vth;
        return copy;
    }
};

/// Gate-voltage range over which a parameter set must produce a monotone
/// Ids(Vgs) characteristic.
struct VgsRange {
    double lo = 0.0;
    double hi = 0.7;
    double temperature = 25.0;
};

/// Throws ConfigError when `params` violates the model invariants:
/// i0 > 0, n >= 1, k1 > 0, |k2| < k1, and k1 + 2*k2*x > 0 for every
/// normalized overdrive x reachable inside `range`.
void validate(const DeviceParams& params, const VgsRange& range = {});

struct OperatingPoint {
    double vgs = 0.0;          // V, magnitude
    double vds = 0.0;          // V, magnitude
    double temperature = 25.0; // degC
};

/// kT/q in volts. Throws DomainError at or below absolute zero.
double thermal_voltage(double temperature_c);

/// K1*x + K2*x^2 with x = (vgs - vth_nominal) / (n * vt).
double gate_polynomial(const DeviceParams& params, double vgs, double vt);

/// Exponent arguments are clamped to this magnitude before exp().
inline constexpr double kExponentClamp = 60.0;

double ids_proposed(const DeviceParams& params, const OperatingPoint& op);
double ids_classic(const DeviceParams& params, const OperatingPoint& op);
double ids_transregional(const DeviceParams& params, const OperatingPoint& op);

// Unchecked hot-path variants with the thermal voltage precomputed.
double ids_proposed(const DeviceParams& params, double vgs, double vds, double vt);
double ids_transregional(const DeviceParams& params, double vgs, double vds, double vt);

/// A named row of the bundled device table.
struct NamedDevice {
    std::string_view name;
    DeviceParams params;
};

/// The six fitted rows (nch/pch x hvt/svt/lvt) at TTG 25 degC. The table does
/// not carry n or Vth; those get the defaults n = 1.5 and Vth = 0.45/0.40/0.35
/// for hvt/svt/lvt.
const std::array<NamedDevice, 6>& reference_devices();

/// Lookup by row name ("nch_svt", ...). Throws ConfigError on unknown names.
DeviceParams reference_device(std::string_view name);

std::string_view to_string(Polarity polarity);
Polarity polarity_from_string(std::string_view text);

}  // namespace sramyield
