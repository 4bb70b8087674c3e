#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "sramyield/errors.hpp"
#include "sramyield/json_io.hpp"
#include "sramyield/transient_oracle.hpp"

using namespace sramyield;

namespace {

/// The example desk cell built around the nch_svt row.
CellConfig svt_cell() {
    CellConfig c;
    c.nmos = reference_device("nch_svt").with_vth(0.35);
    return c;
}

/// Integrated discharge equation without the transregional factor, solved
/// for dV by bracketing root search.
double discharge_root(const CellConfig& c, double vth_n, double t) {
    const DeviceParams& nm = c.nmos;
    const double vt = c.vt();
    const double nvt = nm.n * vt;
    const double p = gate_polynomial(nm.with_vth(vth_n), c.vwl, vt);
    auto f = [&](double dv) {
        const double a = nm.lambda * dv / nvt;
        const double charge = c.c_blb * dv * (a == 0.0 ? 1.0 : std::expm1(a) / a) * std::exp(-nm.lambda * c.vdd / nvt);
        return charge - nm.i0 * std::exp(p) * t;
    };
    if (f(c.vdd) <= 0.0) return c.vdd;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, 0.0, c.vdd, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

/// Write time as the quadrature of C dV / (I_pull_down - I_pull_up).
double write_time_quadrature(const CellConfig& c, double vth_n, double vth_p) {
    const DeviceParams nm = c.nmos.with_vth(vth_n);
    const DeviceParams pm = c.pmos.with_vth(vth_p);
    const double vt = c.vt();
    auto integrand = [&](double v) {
        return c.c_q / (ids_proposed(nm, c.vwl, v, vt) - ids_proposed(pm, c.vddc, c.vddc - v, vt));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, c.v_trip, c.vddc, 20, 1e-13);
}

}  // namespace

TEST_CASE("default cell validates") {
    CHECK_NOTHROW(validate(CellConfig{}));
    CHECK_NOTHROW(validate(svt_cell()));
    CellConfig c;
    c.v_trip = 0.35;
    CHECK_THROWS_AS(validate(c), ConfigError);
    CHECK_NOTHROW(validate(c, false));
    c = CellConfig{};
    c.c_blb = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = CellConfig{};
    c.vwl = 0.75;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = CellConfig{};
    std::swap(c.nmos, c.pmos);
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("bundled default cell matches the built-in cell") {
    const CellConfig file = cell_from_json(read_json_file(std::string(SRAMYIELD_DATA_DIR) + "/default_cell.json"));
    const CellConfig built;
    CHECK(file.vdd == built.vdd);
    CHECK(file.c_blb == built.c_blb);
    CHECK(file.nmos.i0 == built.nmos.i0);
    CHECK(file.pmos.vth_nominal == built.pmos.vth_nominal);
    CHECK(file.pmos.k1 == built.pmos.k1);
}

TEST_CASE("assist mapping") {
    CellConfig base;
    const CellConfig same = apply_assist(base, {}, AccessMode::read);
    CHECK(same.vwl == base.vwl);
    CHECK(same.vddc == base.vddc);
    CHECK(same.v_trip == base.v_trip);
    CHECK(apply_assist(base, {}, AccessMode::write).vwl == base.vwl);

    base.vdd = base.vwl = base.vddc = 0.6;
    base.v_trip = 0.3;
    CHECK(apply_assist(base, {0.1, 0.0, 0.0}, AccessMode::read).vwl == doctest::Approx(0.5));

    CellConfig half;
    const CellConfig boosted = apply_assist(half, {0.0, 0.025, 0.0}, AccessMode::write);
    CHECK(boosted.vwl == doctest::Approx(0.525));
    const CellConfig collapsed = apply_assist(half, {0.0, 0.0, -0.05}, AccessMode::write);
    CHECK(collapsed.vddc == doctest::Approx(0.45));
    CHECK(collapsed.v_trip == doctest::Approx(0.225));
    CHECK(apply_assist(half, {0.0, 0.0, 0.05}, AccessMode::read).vddc == doctest::Approx(0.55));

    CHECK_THROWS_AS(apply_assist(half, {-0.1, 0.0, 0.0}, AccessMode::read), ConfigError);
    CHECK_THROWS_AS(apply_assist(half, {0.6, 0.0, 0.0}, AccessMode::read), ConfigError);
    CHECK_THROWS_AS(apply_assist(half, {0.0, 0.0, -0.5}, AccessMode::write), ConfigError);
}

TEST_CASE("closed-form discharge golden values") {
    const CellConfig c = svt_cell();
    // 40-digit solutions of the integrated discharge equation.
    CHECK(delta_v_closed(c, 0.35, 2e-10) == doctest::Approx(0.15022537724760549).epsilon(1e-12));
    CHECK(delta_v_closed(c, 0.35, 1.3323737437125910e-10) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(delta_v_closed(c, 0.35, 0.0) == 0.0);
}

TEST_CASE("closed form agrees with the root-finder oracle") {
    for (const CellConfig& c : {svt_cell(), CellConfig{}}) {
        for (double vth : {0.25, 0.3, 0.35, 0.4, 0.45}) {
            for (double t : {1e-12, 3e-11, 1e-10, 4e-10, 2e-9}) {
                const double want = discharge_root(c, vth, t);
                if (want >= c.vdd * (1 - 1e-9)) continue;
                CHECK(delta_v_closed(c, vth, t) == doctest::Approx(want).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("lambda to zero is continuous") {
    CellConfig c = svt_cell();
    c.nmos.lambda = 0.0;
    const double at_zero = delta_v_closed(c, 0.35, 1e-10);
    const double x = (0.5 - 0.35) / (1.5 * c.vt());
    CHECK(at_zero == doctest::Approx(c.nmos.i0 * std::exp(0.1414 * x - 0.0028 * x * x) * 1e-10 / c.c_blb).epsilon(1e-13));
    for (double lam : {1e-6, -1e-6, 1e-9}) {
        c.nmos.lambda = lam;
        CHECK(delta_v_closed(c, 0.35, 1e-10) == doctest::Approx(at_zero).epsilon(1e-4));
    }
    c.nmos.lambda = 0.0;
    CHECK(delta_v_closed(c, 0.35, 1.0) == c.vdd);
}

TEST_CASE("read time inverts the closed form") {
    const CellConfig c;
    for (double dv : {0.001, 0.05, 0.1, 0.3}) {
        const double t = read_time_for_delta_v(c, 0.36, dv);
        CHECK(delta_v_closed(c, 0.36, t) == doctest::Approx(dv).epsilon(1e-12));
    }
    CHECK(read_time_for_delta_v(c, 0.36, 0.0) == 0.0);
    CHECK_THROWS_AS(read_time_for_delta_v(c, 0.36, 0.5), DomainError);
}

TEST_CASE("discharge is monotone in time and threshold") {
    const CellConfig c;
    double prev = 0.0;
    for (double t = 1e-12; t < 1e-9; t *= 2) {
        const double dv = delta_v_closed(c, 0.35, t);
        CHECK(dv > prev);
        CHECK(delta_v_closed(c, 0.35, 2 * t) > dv);
        prev = dv;
    }
    double prev_closed = 1.0, prev_ode = 1.0;
    for (int i = 0; i < 100; ++i) {
        const double vth = 0.25 + 0.002 * i;
        const double closed = delta_v_closed(c, vth, 8e-11);
        const double ode = delta_v_ode(c, vth, 8e-11, 512);
        CHECK(closed < prev_closed);
        CHECK(ode < prev_ode);
        prev_closed = closed;
        prev_ode = ode;
    }
}

TEST_CASE("discharge integrator converges") {
    const CellConfig c = svt_cell();
    CHECK(delta_v_ode(c, 0.35, 0.0) == 0.0);
    const double fine = delta_v_ode(c, 0.35, 1e-10, 8192);
    const double coarse = delta_v_ode(c, 0.35, 1e-10, 4096);
    CHECK(std::abs(fine - coarse) / fine < 1e-6);
    CHECK(delta_v_ode(c, 0.35, 1e-10) == delta_v_ode(c, 0.35, 1e-10));
    CHECK(delta_v_ode(c, 0.2, 1e-6) == c.vdd);
}

TEST_CASE("linearized form separates threshold and time") {
    const CellConfig c;
    const double vt = c.vt();
    const double p0 = gate_polynomial(c.nmos, c.vwl, vt);
    const double coeff = c.nmos.n * vt / c.nmos.lambda;
    const double t = 1e-10;
    const double g1 = delta_v_linearized(c, 0.33, t, p0) - coeff * gate_polynomial(c.nmos.with_vth(0.33), c.vwl, vt);
    const double g2 = delta_v_linearized(c, 0.38, t, p0) - coeff * gate_polynomial(c.nmos.with_vth(0.38), c.vwl, vt);
    CHECK(std::abs(g1 - g2) <= 1e-9 * std::abs(g1));
    CHECK(g1 == doctest::Approx(delta_v_offset_term(c, t, p0)).epsilon(1e-12));
    // At the nominal threshold the linearized and exact forms coincide.
    CHECK(delta_v_linearized(c, c.nmos.vth_nominal, t, p0) == doctest::Approx(delta_v_closed(c, c.nmos.vth_nominal, t)).epsilon(1e-9));
    CellConfig flat = c;
    flat.nmos.lambda = 0.0;
    CHECK_THROWS_AS(delta_v_offset_term(flat, t, p0), DomainError);
}

TEST_CASE("underdrive slows the read, boost speeds the write") {
    CellConfig base;
    base.vdd = base.vwl = base.vddc = 0.6;
    base.v_trip = 0.3;
    const CellConfig under = apply_assist(base, {0.05, 0.0, 0.0}, AccessMode::read);
    for (double vth : {0.3, 0.35, 0.4}) CHECK(delta_v_closed(under, vth, 1e-10) < delta_v_closed(base, vth, 1e-10));

    const CellConfig half;
    const CellConfig boosted = apply_assist(half, {0.0, 0.025, 0.0}, AccessMode::write);
    for (double vth : {0.3, 0.35, 0.4}) {
        CHECK(write_time_closed(boosted, vth) < write_time_closed(half, vth));
        CHECK(*write_time_ode(boosted, vth, 0.3, 1e-9) < *write_time_ode(half, vth, 0.3, 1e-9));
    }
}

TEST_CASE("write integrator matches quadrature of the node equation") {
    CellConfig weak_pull_up = svt_cell();
    weak_pull_up.pmos = reference_device("pch_hvt");
    for (const CellConfig& c : {CellConfig{}, weak_pull_up}) {
        for (auto [vn, vp] : {std::pair{0.35, 0.30}, std::pair{0.32, 0.34}, std::pair{0.38, 0.33}, std::pair{0.30, 0.28}}) {
            const double want = write_time_quadrature(c, vn, vp);
            const auto got = write_time_ode(c, vn, vp, 4 * want);
            REQUIRE(got.has_value());
            CHECK(std::abs(*got - want) / want <= 0.005);
        }
    }
}

TEST_CASE("write time golden value for the desk cell") {
    const CellConfig c;
    const double want = write_time_quadrature(c, 0.35, 0.30);
    // 30-digit quadrature of the same integral.
    CHECK(want == doctest::Approx(1.0195009325560173e-11).epsilon(1e-10));
    CHECK(std::abs(*write_time_ode(c, 0.35, 0.30, 1e-10) - want) / want <= 0.005);
}

TEST_CASE("write times are monotone in threshold and wordline") {
    const CellConfig c;
    const WriteTimeModel model(c);
    double prev_closed = 0.0, prev_ode = 0.0;
    // Past about 0.41 V the pull-up wins and the write stalls.
    for (int i = 0; i < 30; ++i) {
        const double vth = 0.28 + 0.004 * i;
        const double closed = model.time(vth);
        const double ode = *write_time_ode(c, vth, 0.30, 1e-9, 4096);
        CHECK(closed > prev_closed);
        CHECK(ode > prev_ode);
        prev_closed = closed;
        prev_ode = ode;
    }
    CellConfig hi = c;
    hi.vwl = 0.55;
    CHECK(write_time_closed(hi, 0.35) < write_time_closed(c, 0.35));
    CHECK(*write_time_ode(hi, 0.35, 0.3, 1e-9) < *write_time_ode(c, 0.35, 0.3, 1e-9));
}

TEST_CASE("closed write time scales with the gate polynomial only") {
    const CellConfig c;
    const WriteTimeModel model(c);
    const double vt = c.vt();
    for (double d : {-0.05, 0.02, 0.07}) {
        const double base = model.time(0.35);
        const double ratio = std::exp(gate_polynomial(c.nmos.with_vth(0.35), c.vwl, vt) -
                                      gate_polynomial(c.nmos.with_vth(0.35 + d), c.vwl, vt));
        CHECK(model.time(0.35 + d) == doctest::Approx(base * ratio).epsilon(1e-13));
    }
}

TEST_CASE("write time vanishes as the trip point approaches the supply") {
    CellConfig c;
    double prev = write_time_closed(c, 0.35);
    for (double frac : {0.55, 0.6, 0.62}) {
        c.v_trip = frac * c.vddc;
        const double t = write_time_closed(c, 0.35);
        CHECK(t < prev);
        prev = t;
    }
    c.v_trip = c.vddc * (1 - 1e-9);
    CHECK(WriteTimeModel(c).w() < 1e-9 * 1e6);
    CHECK(write_time_closed(c, 0.35) < 1e-18);
}

TEST_CASE("write censoring") {
    const CellConfig c;
    CHECK_FALSE(write_time_ode(c, 5.0, 0.3, 1e-9).has_value());
    CHECK_FALSE(write_time_ode(c, 0.35, 0.30, 1e-13).has_value());
    CHECK_THROWS_AS(write_time_ode(c, 0.35, 0.3, 0.0), DomainError);
}

TEST_CASE("closed write model rejects a dominant pull-up") {
    CellConfig c;
    c.pmos = reference_device("pch_lvt").with_vth(0.2);
    c.nmos = reference_device("nch_hvt");
    CHECK_THROWS_AS(WriteTimeModel{c}, ModelInapplicable);
}

TEST_CASE("reference time sits at the vertex of the gate polynomial") {
    const CellConfig c;
    const WriteTimeModel model(c);
    const double t0 = model.reference_time();
    const double vt = c.vt();
    const DeviceParams& nm = c.nmos;
    const double x_star = -nm.k1 / (2 * nm.k2);
    const double vth_star = c.vwl - x_star * nm.n * vt;
    CHECK(model.time(vth_star) == doctest::Approx(t0).epsilon(1e-12));
    for (double vth : {0.25, 0.35, 0.45}) {
        const double x = (c.vwl - vth) / (nm.n * vt);
        CHECK(std::log(model.time(vth) / t0) == doctest::Approx(-nm.k2 * (x - x_star) * (x - x_star)).epsilon(1e-10));
    }
    CellConfig flat = c;
    flat.nmos.k2 = 0.0;
    CHECK(WriteTimeModel(flat).reference_time(2e-12) == 2e-12);
}
