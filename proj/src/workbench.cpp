#include "sramyield/workbench.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <iostream>
#include <sstream>

#include "sramyield/errors.hpp"
#include "sramyield/param_fitting.hpp"

namespace sramyield {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Characterization
// ---------------------------------------------------------------------------

std::vector<double> default_access_grid(const CellConfig& cell, const VariationSpec& var, std::size_t points) {
    if (points < 1) throw DomainError("access grid needs at least one point");
    validate(cell);
    const OffsetVoltageDist& os = var.offset;
    const double dv_hi = std::min(os.mu_vos + 12.0 * os.sigma_vos, 0.8 * cell.vdd);
    double dv_lo = std::max(os.mu_vos + 0.5 * os.sigma_vos, 1e-3);
    if (!(dv_lo < dv_hi)) dv_lo = dv_hi / 20.0;
    const double t_lo = read_time_for_delta_v(cell, var.vth_n_mean, dv_lo);
    const double t_hi = read_time_for_delta_v(cell, var.vth_n_mean, dv_hi);
    if (points == 1) return {t_hi};
    std::vector<double> grid(points);
    const double step = std::log(t_hi / t_lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = t_lo * std::exp(step * static_cast<double>(i));
    grid.back() = t_hi;
    return grid;
}

AccessCharacterization characterize_access(const CellConfig& cell, const VariationSpec& var,
                                           const std::vector<double>& grid, std::uint64_t n, OracleMode oracle,
                                           unsigned threads) {
    if (grid.empty()) throw DomainError("characterization grid is empty");
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DomainError("characterization grid has duplicate read times");
    }
    McOptions opts;
    opts.threads = threads;
    opts.device_stream = Stream::characterization;
    std::vector<AccessCharacterizationRow> rows;
    for (double t : sorted) {
        if (!(t > 0.0)) throw DomainError("characterization read times must be positive");
        const auto dv = sample_delta_v(cell, var, n, t, oracle, opts);
        rows.push_back({t, estimate_delta_params(dv)});
    }
    return AccessCharacterization(std::move(rows));
}

WriteCharacterization characterize_write(const CellConfig& cell, const VariationSpec& var, std::uint64_t n,
                                         OracleMode oracle, std::optional<double> t0, unsigned threads) {
    McOptions opts;
    opts.threads = threads;
    opts.device_stream = Stream::characterization;
    const auto raw = sample_write_times(cell, var, n, oracle, opts);
    std::vector<double> times;
    times.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!raw[i]) {
            throw DegenerateStatistics("write sample " + std::to_string(i) +
                                       " did not complete within the simulation horizon");
        }
        times.push_back(*raw[i]);
    }
    WriteCharacterization out;
    if (t0) {
        out.t0_source = "fixed";
        out.dist = estimate_write_params(times, *t0);
        return out;
    }
    double ref = 1e-12;
    out.t0_source = "fixed";
    try {
        const WriteTimeModel model(cell);
        if (model.cell().nmos.k2 < 0.0) {
            ref = model.reference_time();
            out.t0_source = "auto";
        }
    } catch (const ModelInapplicable&) {
    }
    const double fastest = *std::min_element(times.begin(), times.end());
    if (fastest <= ref) ref = 0.5 * fastest;
    out.dist = estimate_write_params(times, ref);
    return out;
}

// ---------------------------------------------------------------------------
// Plumbing
// ---------------------------------------------------------------------------

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const IoError*>(&e)) return kExitParse;
    if (dynamic_cast<const FitError*>(&e)) return kExitFit;
    if (dynamic_cast<const DegenerateStatistics*>(&e)) return kExitDegenerate;
    if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const RangeError*>(&e) ||
        dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ModelInapplicable*>(&e)) {
        return kExitRange;
    }
    return kExitOther;
}

std::ostream& RunContext::stdout_stream() const { return out ? *out : std::cout; }

namespace {

void emit_log(const RunContext& ctx, const char* level, const std::string& msg) {
    std::ostream& os = ctx.log ? *ctx.log : std::cerr;
    if (ctx.json_logs) {
        os << Json{{"level", level}, {"msg", msg}}.dump() << '\n';
    } else {
        os << level << ": " << msg << '\n';
    }
}

std::string iso_time(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void RunContext::info(const std::string& msg) const { emit_log(*this, "info", msg); }
void RunContext::warn(const std::string& msg) const { emit_log(*this, "warning", msg); }
void RunContext::error(const std::string& msg) const { emit_log(*this, "error", msg); }

Manifest::Manifest(const RunContext& ctx, std::string command)
    : ctx_(ctx), command_(std::move(command)), started_(std::chrono::system_clock::now()),
      steady_start_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    fs::create_directories(ctx_.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + ctx_.out_dir.string() + "': " + ec.message());
}

void Manifest::add_input(const std::string& role, const std::string& path) {
    inputs_.push_back(Json{{"role", role}, {"path", path}, {"digest", digest(read_text_file(path))}});
}

fs::path Manifest::write_output(const std::string& name, std::string_view content) {
    const fs::path path = ctx_.out_dir / name;
    write_text_file(path.string(), content);
    outputs_.push_back(Json{{"path", name}, {"digest", digest(content)}});
    return path;
}

fs::path Manifest::write_output(const std::string& name, Json content) {
    content["manifest"] = kFileName;
    return write_output(name, std::string_view(dump_json(content)));
}

void Manifest::record_wall_time(const std::string& label, double seconds) { timings_[label] = seconds; }

fs::path Manifest::finish() {
    Json j;
    j["schema"] = kSchemaVersion;
    j["tool"] = "sramyield";
    j["version"] = SRAMYIELD_VERSION;
    j["command"] = command_;
    j["command_line"] = ctx_.command_line;
    j["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["notes"] = notes_;
    j["started_at"] = iso_time(started_);
    j["finished_at"] = iso_time(std::chrono::system_clock::now());
    timings_["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - steady_start_).count();
    j["wall_time_s"] = timings_;
    const fs::path path = ctx_.out_dir / kFileName;
    write_text_file(path.string(), dump_json(j));
    return path;
}

CellConfig load_cell(const std::optional<std::string>& path) {
    CellConfig cell = path ? cell_from_json(read_json_file(*path)) : CellConfig{};
    validate(cell);
    return cell;
}

VariationSpec load_variation(const std::optional<std::string>& path, const RunContext& ctx) {
    VariationSpec var = path ? variation_from_json(read_json_file(*path)) : VariationSpec{};
    if (ctx.seed) var.seed = *ctx.seed;
    validate(var);
    return var;
}

AccessMode access_mode_from_string(std::string_view text) {
    if (text == "access" || text == "read") return AccessMode::read;
    if (text == "write") return AccessMode::write;
    throw ParseError("unknown mode '" + std::string(text) + "' (expected access|write)");
}

std::string_view to_string(AccessMode mode) { return mode == AccessMode::read ? "access" : "write"; }

SweepAxis sweep_axis_from_string(std::string_view text) {
    if (text == "vdd") return SweepAxis::vdd;
    if (text == "vwl") return SweepAxis::vwl;
    if (text == "temperature") return SweepAxis::temperature;
    throw ParseError("unknown sweep axis '" + std::string(text) + "' (expected vdd|vwl|temperature)");
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::vdd: return "vdd";
    case SweepAxis::vwl: return "vwl";
    case SweepAxis::temperature: return "temperature";
    }
    return "?";
}

namespace {

void add_config_inputs(Manifest& m, const std::optional<std::string>& cell, const std::optional<std::string>& var) {
    if (cell) m.add_input("cell", *cell);
    if (var) m.add_input("variation", *var);
}

std::string csv_number(double v) { return format_number(v); }

Json characterization_json(const CellConfig& cell, const VariationSpec& var, AccessMode mode, std::uint64_t n,
                           OracleMode oracle) {
    return Json{{"schema", kSchemaVersion},
                {"kind", std::string(to_string(mode))},
                {"n", n},
                {"oracle", std::string(to_string(oracle))},
                {"cell", to_json(cell)},
                {"variation", to_json(var)}};
}

Json access_table_json(const AccessCharacterization& table) {
    Json rows = Json::array();
    for (const auto& r : table.rows()) {
        rows.push_back(Json{{"t_read", r.t_read}, {"mu_delta", r.dist.mu_delta}, {"sigma_delta", r.dist.sigma_delta}});
    }
    return rows;
}

AccessCharacterization access_table_from_json(const Json& j) {
    if (!j.contains("table") || !j.at("table").is_array()) throw ParseError("access characterization lacks 'table'");
    std::vector<AccessCharacterizationRow> rows;
    for (const auto& r : j.at("table")) {
        if (!r.contains("t_read") || !r.at("t_read").is_number()) throw ParseError("table row lacks 't_read'");
        rows.push_back({r.at("t_read").get<double>(), delta_dist_from_json(r)});
    }
    return AccessCharacterization(std::move(rows));
}

struct LoadedCharacterization {
    AccessMode mode = AccessMode::read;
    AccessCharacterization access;
    WriteTimeDistribution write;
    OffsetVoltageDist offset;
};

LoadedCharacterization load_characterization(const std::string& path) {
    const Json j = read_json_file(path);
    if (!j.is_object() || !j.contains("kind")) throw ParseError(path + ": not a characterization file");
    if (j.contains("schema") && j.at("schema") != kSchemaVersion) throw ParseError(path + ": unsupported schema");
    LoadedCharacterization out;
    out.mode = access_mode_from_string(j.at("kind").get<std::string>());
    if (j.contains("variation")) out.offset = variation_from_json(j.at("variation")).offset;
    if (out.mode == AccessMode::read) {
        out.access = access_table_from_json(j);
    } else {
        if (!j.contains("dist")) throw ParseError(path + ": write characterization lacks 'dist'");
        out.write = write_dist_from_json(j.at("dist"));
    }
    return out;
}

std::string write_time_label(const WriteCharacterization& w) {
    std::ostringstream s;
    s << "mu_w=" << w.dist.mu_w << " sigma_w=" << w.dist.sigma_w << " t0=" << w.dist.t0 << " s (" << w.t0_source
      << ")";
    return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_fit(const FitCommand& cmd, const RunContext& ctx) {
    Manifest manifest(ctx, "fit");
    manifest.add_input("iv_csv", cmd.iv_csv);
    const IVDataset data = read_iv_csv(cmd.iv_csv);
    DeviceParams init;
    if (cmd.init_json) {
        manifest.add_input("init", *cmd.init_json);
        const Json j = read_json_file(*cmd.init_json);
        init = device_params_from_json(j.is_object() && j.contains("params") ? j.at("params") : j);
    } else {
        init = default_fit_init(data, DeviceParams{});
    }
    FitOptions options;
    options.fit_n = cmd.fit_n;
    options.max_iterations = cmd.max_iterations;
    const FitReport report = fit_device(data, init, options);

    Json out = to_json(report);
    out["source"] = cmd.iv_csv;
    manifest.write_output("fit.json", out);
    if (cmd.emit_iv) {
        std::ostringstream csv;
        csv << "vgs,vds,ids_data,ids_model\n";
        for (const auto& p : data.points) {
            csv << csv_number(p.vgs) << ',' << csv_number(p.vds) << ',' << csv_number(p.ids) << ','
                << csv_number(ids_proposed(report.params, {p.vgs, p.vds, p.temperature})) << '\n';
        }
        manifest.write_output("iv_curves.csv", std::string_view(csv.str()));
    }
    manifest.finish();

    std::ostream& os = ctx.stdout_stream();
    const auto& p = report.params;
    os << "K1        K2         lambda     I0          max_err  avg_err\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-9.4f %-10.4f %-10.4f %-11.4e %6.1f%%  %6.1f%%\n", p.k1, p.k2, p.lambda, p.i0,
                  100.0 * report.max_rel_error_sat, 100.0 * report.avg_rel_error_sat);
    os << line;
    if (!report.converged) {
        ctx.warn("fit did not converge after " + std::to_string(report.iterations) + " iterations");
        return kExitFit;
    }
    return kExitOk;
}

int cmd_characterize(const CharacterizeCommand& cmd, const RunContext& ctx) {
    Manifest manifest(ctx, "characterize");
    add_config_inputs(manifest, cmd.cell_json, cmd.variation_json);
    const CellConfig cell = load_cell(cmd.cell_json);
    const VariationSpec var = load_variation(cmd.variation_json, ctx);
    manifest.set_seed(var.seed);
    const auto t_start = std::chrono::steady_clock::now();

    Json out;
    if (cmd.mode == AccessMode::read) {
        const std::uint64_t n = cmd.n.value_or(kAccessCharacterizationSamples);
        const auto grid = cmd.grid.empty() ? default_access_grid(cell, var) : cmd.grid;
        const auto table = characterize_access(cell, var, grid, n, cmd.oracle, ctx.threads);
        out = characterization_json(cell, var, cmd.mode, n, cmd.oracle);
        out["table"] = access_table_json(table);
        for (const auto& r : table.rows()) {
            if (!r.dist.single_branch_ok()) {
                std::ostringstream msg;
                msg << "mu_delta/sigma_delta below " << DeltaVDistribution::kSingleBranchRatio << " at t_read = "
                    << r.t_read << " s";
                ctx.warn(msg.str());
            }
        }
        ctx.stdout_stream() << "characterized " << table.rows().size() << " read times with n = " << n << '\n';
    } else {
        const std::uint64_t n = cmd.n.value_or(kWriteCharacterizationSamples);
        const auto w = characterize_write(cell, var, n, cmd.oracle, cmd.t0, ctx.threads);
        out = characterization_json(cell, var, cmd.mode, n, cmd.oracle);
        out["dist"] = to_json(w.dist);
        out["t0_source"] = w.t0_source;
        if (!w.dist.single_branch_ok()) ctx.warn("mu_w/sigma_w below the single-branch ratio");
        ctx.stdout_stream() << "write distribution: " << write_time_label(w) << '\n';
    }
    manifest.record_wall_time("characterization",
                              std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count());
    manifest.write_output("characterization.json", out);
    manifest.finish();
    return kExitOk;
}

int cmd_yield(const YieldCommand& cmd, const RunContext& ctx) {
    Manifest manifest(ctx, "yield");
    manifest.add_input("characterization", cmd.characterization_json);
    const LoadedCharacterization ch = load_characterization(cmd.characterization_json);
    OffsetVoltageDist offset = ch.offset;
    if (cmd.offset_json) {
        manifest.add_input("offset", *cmd.offset_json);
        offset = offset_from_json(read_json_file(*cmd.offset_json));
    }
    validate(offset);

    auto pf_at = [&](double constraint) {
        return ch.mode == AccessMode::read ? ch.access.ber(constraint, offset) : write_fail_prob(ch.write, constraint);
    };
    std::vector<double> constraints = cmd.constraints;
    std::optional<double> solved;
    if (cmd.target_pf) {
        solved = ch.mode == AccessMode::read ? ch.access.read_time_for_pf(*cmd.target_pf, offset)
                                             : write_time_for_pf(ch.write, *cmd.target_pf);
        constraints.push_back(*solved);
    }
    if (constraints.empty()) {
        if (ch.mode == AccessMode::read) {
            for (const auto& r : ch.access.rows()) constraints.push_back(r.t_read);
        } else {
            for (int k = 0; k <= 12; ++k) constraints.push_back(write_time_for_pf(ch.write, 0.5 * std::pow(10.0, -0.5 * k)));
        }
    }
    std::ostringstream csv;
    csv << "constraint,pf_analytical,pf_mc,mc_lo,mc_hi\n";
    for (double c : constraints) csv << csv_number(c) << ',' << csv_number(pf_at(c)) << ",,,\n";
    manifest.write_output("yield.csv", std::string_view(csv.str()));
    manifest.finish();
    if (solved) {
        ctx.stdout_stream() << (ch.mode == AccessMode::read ? "T_READ" : "T_WRITE") << " at pf " << *cmd.target_pf
                            << ": " << *solved << " s\n";
    }
    return kExitOk;
}

int cmd_compare(const CompareCommand& cmd, const RunContext& ctx) {
    Manifest manifest(ctx, "compare");
    add_config_inputs(manifest, cmd.cell_json, cmd.variation_json);
    const CellConfig cell = load_cell(cmd.cell_json);
    const VariationSpec var = load_variation(cmd.variation_json, ctx);
    manifest.set_seed(var.seed);

    LoadedCharacterization ch;
    ch.mode = cmd.mode;
    ch.offset = var.offset;
    if (cmd.characterization_json) {
        manifest.add_input("characterization", *cmd.characterization_json);
        ch = load_characterization(*cmd.characterization_json);
        if (ch.mode != cmd.mode) throw ParseError("characterization kind does not match --mode");
        ch.offset = var.offset;
    } else if (cmd.mode == AccessMode::read) {
        ch.access = characterize_access(cell, var, default_access_grid(cell, var), kAccessCharacterizationSamples,
                                        OracleMode::closed, ctx.threads);
    } else {
        ch.write = characterize_write(cell, var, kWriteCharacterizationSamples, OracleMode::closed, std::nullopt,
                                      ctx.threads)
                       .dist;
    }
    std::vector<double> constraints = cmd.constraints;
    for (double pf : cmd.pf_targets) {
        constraints.push_back(cmd.mode == AccessMode::read ? ch.access.read_time_for_pf(pf, ch.offset)
                                                           : write_time_for_pf(ch.write, pf));
    }
    if (constraints.empty()) throw DomainError("compare needs at least one constraint or target pf");

    McOptions opts;
    opts.threads = ctx.threads;
    std::ostringstream csv;
    csv << "constraint,pf_analytical,pf_mc,mc_lo,mc_hi,rel_error,mode\n";
    Json rows = Json::array();
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const double c = constraints[i];
        const double pf_model =
            cmd.mode == AccessMode::read ? ch.access.ber(c, ch.offset) : write_fail_prob(ch.write, c);
        const McResult mc = cmd.mode == AccessMode::read ? run_access_mc(cell, var, cmd.n, c, cmd.oracle, opts)
                                                         : run_write_mc(cell, var, cmd.n, c, cmd.oracle, opts);
        manifest.record_wall_time("mc_" + std::to_string(i), mc.wall_time);
        csv << csv_number(c) << ',' << csv_number(pf_model) << ',' << csv_number(mc.pf) << ','
            << csv_number(mc.ci95.first) << ',' << csv_number(mc.ci95.second) << ',';
        Json row{{"constraint", c}, {"pf_analytical", pf_model}, {"mc", to_json(mc)}};
        if (mc.failures > 0) {
            const double err = relative_error(mc.pf, pf_model);
            csv << csv_number(err);
            row["rel_error"] = err;
        } else {
            row["rel_error"] = nullptr;
            ctx.warn("no Monte Carlo failures at constraint " + csv_number(c) + "; relative error omitted");
        }
        csv << ',' << to_string(cmd.oracle) << '\n';
        rows.push_back(row);
    }
    manifest.write_output("compare.csv", std::string_view(csv.str()));
    manifest.write_output("compare.json", Json{{"schema", kSchemaVersion},
                                               {"kind", std::string(to_string(cmd.mode))},
                                               {"n", cmd.n},
                                               {"oracle", std::string(to_string(cmd.oracle))},
                                               {"rows", rows}});
    manifest.finish();
    ctx.stdout_stream() << "compared " << constraints.size() << " constraints with n = " << cmd.n << '\n';
    return kExitOk;
}

CellConfig sweep_cell(const CellConfig& base, SweepAxis axis, double value, AccessMode mode) {
    const std::string point = std::string(to_string(axis)) + " = " + format_number(value);
    try {
        CellConfig c = base;
        switch (axis) {
        case SweepAxis::vdd:
            c.vdd = value;
            c.vwl = value + (base.vwl - base.vdd);
            c.vddc = value + (base.vddc - base.vdd);
            c.v_trip = base.v_trip * c.vddc / base.vddc;
            validate(c);
            return c;
        case SweepAxis::temperature:
            c.temperature = value;
            validate(c);
            return c;
        case SweepAxis::vwl: {
            AssistConfig assist;
            if (mode == AccessMode::read) {
                assist.wl_underdrive = base.vdd - value;
                if (assist.wl_underdrive < 0.0) {
                    throw ConfigError("read wordline above vdd is not an underdrive");
                }
            } else {
                assist.wl_boost = value - base.vdd;
                if (assist.wl_boost < 0.0) throw ConfigError("write wordline below vdd is not a boost");
            }
            return apply_assist(base, assist, mode);
        }
        }
    } catch (const ConfigError& e) {
        throw RangeError("sweep point " + point + ": " + e.what());
    } catch (const DomainError& e) {
        throw RangeError("sweep point " + point + ": " + e.what());
    }
    return base;
}

std::vector<SweepPoint> run_sweep(const CellConfig& base, const VariationSpec& var, AccessMode mode, SweepAxis axis,
                                  const std::vector<double>& values, double target_pf, OracleMode oracle,
                                  unsigned threads) {
    if (values.empty()) throw DomainError("sweep needs at least one axis value");
    std::vector<SweepPoint> out;
    for (double v : values) {
        const CellConfig cell = sweep_cell(base, axis, v, mode);
        double constraint = 0.0;
        try {
            if (mode == AccessMode::read) {
                const auto table = characterize_access(cell, var, default_access_grid(cell, var),
                                                       kAccessCharacterizationSamples, oracle, threads);
                constraint = table.read_time_for_pf(target_pf, var.offset);
            } else {
                const auto w = characterize_write(cell, var, kWriteCharacterizationSamples, oracle, std::nullopt,
                                                  threads);
                constraint = write_time_for_pf(w.dist, target_pf);
            }
        } catch (const RangeError& e) {
            throw RangeError(std::string("sweep point ") + std::string(to_string(axis)) + " = " + format_number(v) +
                             ": " + e.what());
        }
        out.push_back({v, constraint, 0.0});
    }
    for (auto& p : out) p.normalized = p.constraint / out.front().constraint;
    return out;
}

int cmd_sweep(const SweepCommand& cmd, const RunContext& ctx) {
    Manifest manifest(ctx, "sweep");
    add_config_inputs(manifest, cmd.cell_json, cmd.variation_json);
    const CellConfig cell = load_cell(cmd.cell_json);
    const VariationSpec var = load_variation(cmd.variation_json, ctx);
    manifest.set_seed(var.seed);
    if (cmd.axis == SweepAxis::temperature) {
        const std::string note =
            "temperature sweep re-evaluates the thermal voltage only; fitted constants are held at their reference "
            "values";
        ctx.warn(note);
        manifest.add_note(note);
    }
    const auto points = run_sweep(cell, var, cmd.mode, cmd.axis, cmd.values, cmd.target_pf, cmd.oracle, ctx.threads);
    std::ostringstream csv;
    csv << "axis,axis_value,constraint,normalized\n";
    for (const auto& p : points) {
        csv << to_string(cmd.axis) << ',' << csv_number(p.axis_value) << ',' << csv_number(p.constraint) << ','
            << csv_number(p.normalized) << '\n';
    }
    manifest.write_output("sweep.csv", std::string_view(csv.str()));
    manifest.finish();
    ctx.stdout_stream() << csv.str();
    return kExitOk;
}

int cmd_qq(const QQCommand& cmd, const RunContext& ctx) {
    Manifest manifest(ctx, "qq");
    add_config_inputs(manifest, cmd.cell_json, cmd.variation_json);
    const CellConfig cell = load_cell(cmd.cell_json);
    const VariationSpec var = load_variation(cmd.variation_json, ctx);
    manifest.set_seed(var.seed);
    McOptions opts;
    opts.threads = ctx.threads;

    QQResult qq;
    Json out{{"schema", kSchemaVersion}, {"kind", std::string(to_string(cmd.mode))}, {"n", cmd.n}};
    if (cmd.mode == AccessMode::read) {
        double t_read = 0.0;
        if (cmd.t_read) {
            t_read = *cmd.t_read;
        } else {
            const auto grid = default_access_grid(cell, var, 3);
            t_read = grid[1];
        }
        const auto dv = sample_delta_v(cell, var, cmd.n, t_read, cmd.oracle, opts);
        const auto dist = estimate_delta_params(dv);
        qq = qq_points(dv, dist, cmd.tail, cmd.tail_fraction);
        out["t_read"] = t_read;
        out["dist"] = to_json(dist);
    } else {
        const auto raw = sample_write_times(cell, var, cmd.n, cmd.oracle, opts);
        std::vector<double> times;
        for (const auto& t : raw) {
            if (!t) throw DegenerateStatistics("censored write samples; raise t_max");
            times.push_back(*t);
        }
        const double t0 = WriteTimeModel(cell).reference_time();
        const auto dist = estimate_write_params(times, std::min(t0, 0.5 * *std::min_element(times.begin(), times.end())));
        qq = qq_points(times, dist, cmd.tail, cmd.tail_fraction);
        out["dist"] = to_json(dist);
    }
    const char* tail = cmd.tail == QQTail::none ? "none" : cmd.tail == QQTail::lower ? "lower" : "upper";
    out["tail"] = tail;
    out["tail_fraction"] = cmd.tail == QQTail::none ? 1.0 : cmd.tail_fraction;
    out["points"] = qq.points.size();
    out["correlation"] = qq.correlation;

    std::ostringstream csv;
    csv << "theoretical,empirical\n";
    for (const auto& [x, y] : qq.points) csv << csv_number(x) << ',' << csv_number(y) << '\n';
    manifest.write_output("qq.csv", std::string_view(csv.str()));
    manifest.write_output("qq.json", out);
    manifest.finish();
    ctx.stdout_stream() << "Q-Q correlation (" << tail << " tail, " << qq.points.size() << " points): "
                        << qq.correlation << '\n';
    return kExitOk;
}

int cmd_mc(const McCommand& cmd, const RunContext& ctx) {
    Manifest manifest(ctx, "mc");
    add_config_inputs(manifest, cmd.cell_json, cmd.variation_json);
    const CellConfig cell = load_cell(cmd.cell_json);
    const VariationSpec var = load_variation(cmd.variation_json, ctx);
    manifest.set_seed(var.seed);
    McOptions opts;
    opts.threads = ctx.threads;
    opts.keep_samples = cmd.export_samples;
    opts.t_max = cmd.t_max;

    McResult r = cmd.mode == AccessMode::read ? run_access_mc(cell, var, cmd.n, cmd.constraint, cmd.oracle, opts)
                                              : run_write_mc(cell, var, cmd.n, cmd.constraint, cmd.oracle, opts);
    manifest.record_wall_time("mc", r.wall_time);
    if (cmd.export_samples) {
        std::ostringstream csv;
        export_samples(r.samples, csv);
        manifest.write_output("samples.csv", std::string_view(csv.str()));
        r.samples_path = "samples.csv";
    }
    Json out = to_json(r);
    out["schema"] = kSchemaVersion;
    out["kind"] = std::string(to_string(cmd.mode));
    out["oracle"] = std::string(to_string(cmd.oracle));
    out["constraint"] = cmd.constraint;
    out["variation"] = to_json(var);
    manifest.write_output("mc.json", out);
    manifest.finish();
    ctx.stdout_stream() << "pf = " << r.pf << " (" << r.failures << "/" << r.n << "), 95% CI [" << r.ci95.first
                        << ", " << r.ci95.second << "]\n";
    return kExitOk;
}

}  // namespace sramyield
