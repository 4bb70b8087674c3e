#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sramyield/errors.hpp"
#include "sramyield/workbench.hpp"

using namespace sramyield;

namespace {

struct ModeArgs {
    std::string mode = "access";
    std::string oracle = "closed";
};

void add_config_flags(CLI::App* sub, std::optional<std::string>& cell, std::optional<std::string>& var) {
    sub->add_option("--cell", cell, "cell configuration JSON (built-in desk cell when omitted)")->check(CLI::ExistingFile);
    sub->add_option("--variation", var, "variation JSON (built-in defaults when omitted)")->check(CLI::ExistingFile);
}

void add_mode_flags(CLI::App* sub, ModeArgs& m) {
    sub->add_option("--mode", m.mode, "access|write")->check(CLI::IsMember({"access", "write"}));
    sub->add_option("--oracle", m.oracle, "closed|ode")->check(CLI::IsMember({"closed", "ode"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SRAM access/write yield workbench"};
    app.set_version_flag("--version", SRAMYIELD_VERSION);
    app.require_subcommand(1);

    RunContext ctx;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "override the variation seed");
    app.add_option("--threads", ctx.threads, "worker threads for Monte Carlo")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", out_dir, "directory for outputs and manifest.json");
    app.add_flag("--json-logs", ctx.json_logs, "emit diagnostics as JSON lines");

    FitCommand fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit device constants to I-V data");
    fit_cmd->add_option("iv_csv", fit.iv_csv, "I-V CSV (vgs,vds,ids,temp_c)")->required();
    fit_cmd->add_option("--init", fit.init_json, "initial DeviceParams JSON")->check(CLI::ExistingFile);
    fit_cmd->add_flag("--fit-n", fit.fit_n, "also fit the swing factor n");
    fit_cmd->add_flag("--emit-iv", fit.emit_iv, "write model-vs-data curves");
    fit_cmd->add_option("--max-iterations", fit.max_iterations, "Levenberg-Marquardt iteration cap")
        ->check(CLI::PositiveNumber);

    CharacterizeCommand ch;
    ModeArgs ch_mode;
    std::uint64_t ch_n = 0;
    double ch_t0 = 0.0;
    auto* ch_cmd = app.add_subcommand("characterize", "estimate distribution parameters from small-n Monte Carlo");
    add_config_flags(ch_cmd, ch.cell_json, ch.variation_json);
    add_mode_flags(ch_cmd, ch_mode);
    ch_cmd->add_option("-n,--samples", ch_n, "samples per grid point (200 access / 1600 write)");
    ch_cmd->add_option("--grid", ch.grid, "read times in s (automatic when omitted)");
    ch_cmd->add_option("--t0", ch_t0, "fixed write reference time in s (automatic when omitted)");

    YieldCommand yc;
    double target = 0.0;
    auto* y_cmd = app.add_subcommand("yield", "analytical failure probability from a characterization");
    y_cmd->add_option("characterization", yc.characterization_json, "characterization JSON")
        ->required()
        ->check(CLI::ExistingFile);
    y_cmd->add_option("--offset", yc.offset_json, "sense-amplifier offset JSON")->check(CLI::ExistingFile);
    y_cmd->add_option("--constraint", yc.constraints, "timing constraints in s");
    y_cmd->add_option("--target", target, "invert for the constraint at this pf (e.g. 3.17e-5)");

    CompareCommand cc;
    ModeArgs cc_mode;
    auto* c_cmd = app.add_subcommand("compare", "analytical vs Monte Carlo failure probability");
    add_config_flags(c_cmd, cc.cell_json, cc.variation_json);
    add_mode_flags(c_cmd, cc_mode);
    c_cmd->add_option("--characterization", cc.characterization_json, "reuse a characterization JSON")
        ->check(CLI::ExistingFile);
    c_cmd->add_option("--constraint", cc.constraints, "timing constraints in s");
    c_cmd->add_option("--pf-target", cc.pf_targets, "constraints from analytical inversion at these pf");
    c_cmd->add_option("-n,--samples", cc.n, "Monte Carlo samples per constraint");

    SweepCommand sc;
    ModeArgs sc_mode;
    std::string axis = "vdd";
    auto* s_cmd = app.add_subcommand("sweep", "constraint at target pf across an operating-condition axis");
    add_config_flags(s_cmd, sc.cell_json, sc.variation_json);
    add_mode_flags(s_cmd, sc_mode);
    s_cmd->add_option("--axis", axis, "vdd|vwl|temperature")->check(CLI::IsMember({"vdd", "vwl", "temperature"}));
    s_cmd->add_option("--values", sc.values, "axis values")->required();
    s_cmd->add_option("--target", sc.target_pf, "target failure probability");

    QQCommand qc;
    ModeArgs qc_mode;
    std::string tail = "none";
    double qq_t = 0.0;
    auto* q_cmd = app.add_subcommand("qq", "Q-Q data of Monte Carlo samples against the fitted model");
    add_config_flags(q_cmd, qc.cell_json, qc.variation_json);
    add_mode_flags(q_cmd, qc_mode);
    q_cmd->add_option("-n,--samples", qc.n, "Monte Carlo samples");
    q_cmd->add_option("--t-read", qq_t, "read time in s for access mode");
    q_cmd->add_option("--tail", tail, "none|lower|upper")->check(CLI::IsMember({"none", "lower", "upper"}));
    q_cmd->add_option("--tail-fraction", qc.tail_fraction, "fraction kept by a tail selection");

    McCommand mc;
    ModeArgs mc_mode;
    auto* m_cmd = app.add_subcommand("mc", "plain Monte Carlo failure probability");
    add_config_flags(m_cmd, mc.cell_json, mc.variation_json);
    add_mode_flags(m_cmd, mc_mode);
    m_cmd->add_option("-n,--samples", mc.n, "Monte Carlo samples");
    m_cmd->add_option("--constraint", mc.constraint, "read or write time constraint in s")->required();
    m_cmd->add_flag("--export-samples", mc.export_samples, "write samples.csv");
    m_cmd->add_option("--t-max", mc.t_max, "write simulation horizon in s");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    ctx.out_dir = out_dir;
    ctx.command_line.assign(argv, argv + argc);
    if (app.count("--seed")) ctx.seed = seed;

    try {
        if (*fit_cmd) return cmd_fit(fit, ctx);
        if (*ch_cmd) {
            ch.mode = access_mode_from_string(ch_mode.mode);
            ch.oracle = oracle_mode_from_string(ch_mode.oracle);
            if (ch_cmd->count("--samples")) ch.n = ch_n;
            if (ch_cmd->count("--t0")) ch.t0 = ch_t0;
            return cmd_characterize(ch, ctx);
        }
        if (*y_cmd) {
            if (y_cmd->count("--target")) yc.target_pf = target;
            return cmd_yield(yc, ctx);
        }
        if (*c_cmd) {
            cc.mode = access_mode_from_string(cc_mode.mode);
            cc.oracle = oracle_mode_from_string(cc_mode.oracle);
            return cmd_compare(cc, ctx);
        }
        if (*s_cmd) {
            sc.mode = access_mode_from_string(sc_mode.mode);
            sc.oracle = oracle_mode_from_string(sc_mode.oracle);
            sc.axis = sweep_axis_from_string(axis);
            return cmd_sweep(sc, ctx);
        }
        if (*q_cmd) {
            qc.mode = access_mode_from_string(qc_mode.mode);
            qc.oracle = oracle_mode_from_string(qc_mode.oracle);
            qc.tail = tail == "lower" ? QQTail::lower : tail == "upper" ? QQTail::upper : QQTail::none;
            if (q_cmd->count("--t-read")) qc.t_read = qq_t;
            return cmd_qq(qc, ctx);
        }
        if (*m_cmd) {
            mc.mode = access_mode_from_string(mc_mode.mode);
            mc.oracle = oracle_mode_from_string(mc_mode.oracle);
            return cmd_mc(mc, ctx);
        }
    } catch (const std::exception& e) {
        ctx.error(e.what());
        return exit_code_for(e);
    }
    return kExitOther;
}
