#include "sramyield/mc_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "sramyield/errors.hpp"
#include "sramyield/json_io.hpp"
#include "sramyield/numerics.hpp"

namespace sramyield {

namespace {

struct Draw {
    double vth_n, vth_p, v_os;
};

Draw draw(const VariationSpec& var, Stream device_stream, std::uint64_t i) {
    const auto [zn, zp] = normal_pair(var.seed, device_stream, i);
    const double zo = normal_pair(var.seed, Stream::offset, i).first;
    return {var.vth_n_mean + var.vth_n_sigma * zn, var.vth_p_mean + var.vth_p_sigma * zp,
            var.offset.mu_vos + var.offset.sigma_vos * zo};
}

/// Runs body(begin, end, chunk) over contiguous index chunks. Chunk
/// boundaries depend only on n, so any per-chunk reduction combined in chunk
/// order is independent of the thread count.
template <typename Body>
void parallel_chunks(std::uint64_t n, unsigned threads, Body&& body) {
    constexpr std::uint64_t kChunk = 4096;
    const std::uint64_t chunks = (n + kChunk - 1) / kChunk;
    auto run_chunk = [&](std::uint64_t c) { body(c * kChunk, std::min(n, (c + 1) * kChunk), c); };
    threads = std::max(1u, threads);
    if (threads == 1 || chunks <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::uint64_t c = t; c < chunks; c += threads) run_chunk(c);
        });
    }
}

std::uint64_t chunk_count(std::uint64_t n) { return (n + 4095) / 4096; }

McResult finish(std::uint64_t n, std::uint64_t failures, std::chrono::steady_clock::time_point start) {
    McResult r;
    r.n = n;
    r.failures = failures;
    r.pf = static_cast<double>(failures) / static_cast<double>(n);
    r.ci95 = wilson_ci(failures, n, 0.95);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void require_samples(std::uint64_t n) {
    if (n < 1) throw DomainError("Monte Carlo needs at least one sample");
}

}  // namespace

void validate(const VariationSpec& v) {
    if (!(v.vth_n_sigma > 0.0) || !(v.vth_p_sigma > 0.0)) throw ConfigError("variation sigmas must be positive");
    if (!std::isfinite(v.vth_n_mean) || !std::isfinite(v.vth_p_mean)) throw ConfigError("variation means must be finite");
    validate(v.offset);
}

std::string_view to_string(OracleMode mode) { return mode == OracleMode::closed ? "closed" : "ode"; }

OracleMode oracle_mode_from_string(std::string_view text) {
    if (text == "closed") return OracleMode::closed;
    if (text == "ode") return OracleMode::ode;
    throw ParseError("unknown oracle mode '" + std::string(text) + "' (expected closed|ode)");
}

std::pair<double, double> wilson_ci(std::uint64_t failures, std::uint64_t n, double confidence) {
    if (n < 1 || failures > n) throw DomainError("Wilson interval needs 0 <= failures <= n, n >= 1");
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
    const double z = numerics::normal_quantile(0.5 + 0.5 * confidence);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(failures) / nn;
    const double z2n = z * z / nn;
    const double center = (p + 0.5 * z2n) / (1.0 + z2n);
    const double half = z / (1.0 + z2n) * std::sqrt(p * (1.0 - p) / nn + 0.25 * z2n / nn);
    double lo = std::max(0.0, center - half);
    double hi = std::min(1.0, center + half);
    if (failures == 0) lo = 0.0;
    if (failures == n) hi = 1.0;
    return {lo, hi};
}

McResult run_access_mc(const CellConfig& cell, const VariationSpec& var, std::uint64_t n, double t_read,
                       OracleMode mode, const McOptions& options) {
    require_samples(n);
    validate(cell);
    validate(var);
    if (!(t_read >= 0.0)) throw DomainError("t_read must be non-negative");
    const auto start = std::chrono::steady_clock::now();

    std::vector<std::uint64_t> chunk_failures(chunk_count(n), 0);
    std::vector<SampleRecord> records(options.keep_samples ? n : 0);
    parallel_chunks(n, options.threads, [&](std::uint64_t begin, std::uint64_t end, std::uint64_t chunk) {
        std::uint64_t fails = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            const Draw d = draw(var, options.device_stream, i);
            const double dv = mode == OracleMode::closed ? delta_v_closed(cell, d.vth_n, t_read)
                                                         : delta_v_ode(cell, d.vth_n, t_read);
            const bool fail = d.v_os > 0.0 && dv < d.v_os;
            fails += fail;
            if (options.keep_samples) records[i] = {i, d.vth_n, d.vth_p, d.v_os, dv, fail};
        }
        chunk_failures[chunk] = fails;
    });
    std::uint64_t failures = 0;
    for (auto f : chunk_failures) failures += f;
    McResult r = finish(n, failures, start);
    r.samples = std::move(records);
    return r;
}

double write_horizon(const CellConfig& cell, const VariationSpec& var, const McOptions& options) {
    if (options.t_max > 0.0) return options.t_max;
    try {
        return 100.0 * write_time_closed(cell, var.vth_n_mean);
    } catch (const ModelInapplicable& e) {
        throw ModelInapplicable(std::string(e.what()) + "; pass an explicit t_max for the write simulation");
    }
}

std::vector<std::optional<double>> sample_write_times(const CellConfig& cell, const VariationSpec& var,
                                                      std::uint64_t n, OracleMode mode, const McOptions& options) {
    require_samples(n);
    validate(cell);
    validate(var);
    std::vector<std::optional<double>> times(n);
    if (mode == OracleMode::closed) {
        const WriteTimeModel model(cell);
        parallel_chunks(n, options.threads, [&](std::uint64_t begin, std::uint64_t end, std::uint64_t) {
            for (std::uint64_t i = begin; i < end; ++i) times[i] = model.time(draw(var, options.device_stream, i).vth_n);
        });
    } else {
        const double t_max = write_horizon(cell, var, options);
        parallel_chunks(n, options.threads, [&](std::uint64_t begin, std::uint64_t end, std::uint64_t) {
            for (std::uint64_t i = begin; i < end; ++i) {
                const Draw d = draw(var, options.device_stream, i);
                times[i] = write_time_ode(cell, d.vth_n, d.vth_p, t_max);
            }
        });
    }
    return times;
}

McResult run_write_mc(const CellConfig& cell, const VariationSpec& var, std::uint64_t n, double t_write,
                      OracleMode mode, const McOptions& options) {
    require_samples(n);
    if (!(t_write > 0.0)) throw DomainError("t_write must be positive");
    if (mode == OracleMode::ode) {
        const double t_max = write_horizon(cell, var, options);
        if (t_write > t_max) {
            std::ostringstream msg;
            msg << "write constraint " << t_write << " s exceeds the simulation horizon t_max = " << t_max << " s";
            throw RangeError(msg.str());
        }
    }
    const auto start = std::chrono::steady_clock::now();
    const auto times = sample_write_times(cell, var, n, mode, options);

    std::uint64_t failures = 0;
    std::vector<SampleRecord> records;
    if (options.keep_samples) records.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const bool fail = !times[i] || *times[i] > t_write;
        failures += fail;
        if (options.keep_samples) {
            const Draw d = draw(var, options.device_stream, i);
            records.push_back({i, d.vth_n, d.vth_p, std::numeric_limits<double>::quiet_NaN(),
                               times[i].value_or(std::numeric_limits<double>::infinity()), fail});
        }
    }
    McResult r = finish(n, failures, start);
    r.samples = std::move(records);
    return r;
}

std::vector<double> sample_delta_v(const CellConfig& cell, const VariationSpec& var, std::uint64_t n, double t_read,
                                   OracleMode mode, const McOptions& options) {
    require_samples(n);
    validate(cell);
    validate(var);
    std::vector<double> out(n);
    parallel_chunks(n, options.threads, [&](std::uint64_t begin, std::uint64_t end, std::uint64_t) {
        for (std::uint64_t i = begin; i < end; ++i) {
            const double vth_n = draw(var, options.device_stream, i).vth_n;
            out[i] = mode == OracleMode::closed ? delta_v_closed(cell, vth_n, t_read) : delta_v_ode(cell, vth_n, t_read);
        }
    });
    return out;
}

void export_samples(const std::vector<SampleRecord>& samples, std::ostream& out) {
    out << "i,vth_n,vth_p,v_os,metric,fail\n";
    for (const auto& s : samples) {
        out << s.index << ',' << format_number(s.vth_n) << ',' << format_number(s.vth_p) << ','
            << (std::isnan(s.v_os) ? std::string() : format_number(s.v_os)) << ',' << format_number(s.metric) << ','
            << (s.fail ? 1 : 0) << '\n';
    }
}

void export_samples(const std::vector<SampleRecord>& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open sample export '" + path + "' for writing");
    export_samples(samples, out);
    if (!out) throw IoError("failed writing sample export '" + path + "'");
}

}  // namespace sramyield
