#include "sramyield/param_fitting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "sramyield/errors.hpp"
#include "sramyield/json_io.hpp"

namespace sramyield {

namespace {

double parse_field(std::string_view text, std::size_t line) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("line " + std::to_string(line) + ": cannot parse number '" + std::string(text) + "'");
    }
    return value;
}

// Snap to the 10 uV grid so that sweeps written with rounding noise group.
double bias_key(double v) { return std::round(v * 1e5) / 1e5; }

// Free parameters: ln(i0), k1, k2, lambda and optionally n.
struct Box {
    double lo, hi;
};

constexpr Box kK1{1e-9, 2.0};
constexpr Box kK2{-0.2, 0.0};
constexpr Box kLambda{-0.1, 0.2};
constexpr Box kN{1.0, 3.0};

Eigen::VectorXd pack(const DeviceParams& p, bool fit_n) {
    Eigen::VectorXd theta(fit_n ? 5 : 4);
    theta << std::log(p.i0), p.k1, p.k2, p.lambda;
    if (fit_n) theta(4) = p.n;
    return theta;
}

DeviceParams unpack(const Eigen::VectorXd& theta, DeviceParams base) {
    base.i0 = std::exp(theta(0));
    base.k1 = theta(1);
    base.k2 = theta(2);
    base.lambda = theta(3);
    if (theta.size() > 4) base.n = theta(4);
    return base;
}

void project(Eigen::VectorXd& theta) {
    theta(1) = std::clamp(theta(1), kK1.lo, kK1.hi);
    theta(2) = std::clamp(theta(2), kK2.lo, kK2.hi);
    theta(3) = std::clamp(theta(3), kLambda.lo, kLambda.hi);
    if (theta.size() > 4) theta(4) = std::clamp(theta(4), kN.lo, kN.hi);
}

struct Problem {
    std::vector<IVPoint> points;
    std::vector<double> vt;
    std::vector<double> log_ids;
    DeviceParams base;

    Eigen::VectorXd residuals(const Eigen::VectorXd& theta) const {
        const DeviceParams p = unpack(theta, base);
        Eigen::VectorXd r(points.size());
        for (std::size_t j = 0; j < points.size(); ++j) {
            r(static_cast<Eigen::Index>(j)) =
                std::log(ids_proposed(p, points[j].vgs, points[j].vds, vt[j])) - log_ids[j];
        }
        return r;
    }
};

}  // namespace

void validate(const IVDataset& data) {
    if (data.points.empty()) throw ParseError("I-V dataset is empty");
    std::map<double, std::set<double>> vgs_by_vds, vds_by_vgs;
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        const IVPoint& pt = data.points[i];
        if (!(pt.ids >= 0.0)) throw ParseError("point " + std::to_string(i) + ": negative or non-finite current");
        if (!(pt.vgs >= 0.0 && pt.vgs <= 1.0 && pt.vds >= 0.0 && pt.vds <= 1.0)) {
            throw ParseError("point " + std::to_string(i) + ": bias outside [0, 1] V");
        }
        if (!(pt.temperature > -273.15)) throw ParseError("point " + std::to_string(i) + ": non-physical temperature");
        vgs_by_vds[bias_key(pt.vds)].insert(bias_key(pt.vgs));
        vds_by_vgs[bias_key(pt.vgs)].insert(bias_key(pt.vds));
    }
    auto has_sweep = [](const auto& groups) {
        return std::any_of(groups.begin(), groups.end(),
                           [](const auto& kv) { return kv.second.size() >= kMinSweepPoints; });
    };
    if (!has_sweep(vgs_by_vds)) throw ParseError("I-V dataset lacks a Vgs sweep of at least 20 points");
    if (!has_sweep(vds_by_vgs)) throw ParseError("I-V dataset lacks a Vds sweep of at least 20 points");
}

IVDataset read_iv_csv(std::istream& in, std::string description) {
    IVDataset data;
    data.description = std::move(description);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            std::string compact;
            std::copy_if(line.begin(), line.end(), std::back_inserter(compact), [](char c) { return c != ' '; });
            if (compact != "vgs,vds,ids,temp_c") {
                throw ParseError("expected CSV header 'vgs,vds,ids,temp_c', got '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        fields.push_back(rest);
        if (fields.size() != 4) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        }
        data.points.push_back({parse_field(fields[0], line_no), parse_field(fields[1], line_no),
                               parse_field(fields[2], line_no), parse_field(fields[3], line_no)});
    }
    if (!header_seen) throw ParseError("I-V CSV is empty");
    validate(data);
    return data;
}

IVDataset read_iv_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open I-V file '" + path + "'");
    return read_iv_csv(in, path);
}

void write_iv_csv(const IVDataset& data, std::ostream& out) {
    out << "vgs,vds,ids,temp_c\n";
    for (const auto& p : data.points) {
        out << format_number(p.vgs) << ',' << format_number(p.vds) << ',' << format_number(p.ids) << ','
            << format_number(p.temperature) << '\n';
    }
}

IVDataset generate_iv_dataset(const DeviceParams& params, double temperature,
                              const std::function<double(double, double)>& multiplier) {
    IVDataset data;
    data.description = "synthetic grid";
    auto add = [&](double vgs, double vds) {
        double ids = ids_proposed(params, {vgs, vds, temperature});
        if (multiplier) ids *= multiplier(vgs, vds);
        data.points.push_back({vgs, vds, ids, temperature});
    };
    constexpr int kSteps = 70;  // 0..0.7 V in 10 mV steps
    for (int i = 0; i <= kSteps; ++i) add(i * 0.01, 0.7);
    for (double vgs : {0.4, 0.5, 0.6}) {
        for (int i = 0; i <= kSteps; ++i) add(vgs, i * 0.01);
    }
    return data;
}

DeviceParams default_fit_init(const IVDataset& data, const DeviceParams& shape) {
    validate(data);
    DeviceParams init = shape;
    init.k1 = 0.3;
    init.k2 = -0.01;
    init.lambda = 0.02;
    double top_vgs = 0.0, top_vds = 0.0;
    for (const auto& p : data.points) top_vgs = std::max(top_vgs, bias_key(p.vgs));
    for (const auto& p : data.points) {
        if (bias_key(p.vgs) == top_vgs) top_vds = std::max(top_vds, p.vds);
    }
    std::vector<double> top;
    for (const auto& p : data.points) {
        if (bias_key(p.vgs) == top_vgs && p.vds >= 0.5 * top_vds && p.ids > 0.0) top.push_back(p.ids);
    }
    if (top.empty()) throw FitError("no positive currents at the largest gate bias");
    std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(top.size() / 2), top.end());
    init.i0 = top[top.size() / 2];
    return init;
}

FitReport fit_device(const IVDataset& data, const DeviceParams& init, const FitOptions& options) {
    validate(data);
    if (!(init.i0 > 0.0) || !(init.n >= 1.0) || !(init.k1 > 0.0)) throw FitError("initial parameters are invalid");

    Problem problem;
    problem.base = init;
    FitReport report;
    for (const auto& pt : data.points) {
        if (pt.ids < options.ids_floor) {
            ++report.dropped_points;
            continue;
        }
        problem.points.push_back(pt);
        problem.vt.push_back(thermal_voltage(pt.temperature));
        problem.log_ids.push_back(std::log(pt.ids));
    }
    const std::size_t m = problem.points.size();
    Eigen::VectorXd theta = pack(init, options.fit_n);
    project(theta);
    const auto k = theta.size();
    if (m < static_cast<std::size_t>(k)) throw FitError("fewer usable points than free parameters");

    Eigen::VectorXd r = problem.residuals(theta);
    double cost = r.squaredNorm();
    if (!std::isfinite(cost)) throw FitError("residual is not finite at the initial parameters");

    double damping = options.initial_damping;
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(m), k);
    bool converged = cost == 0.0;
    int iter = 0;
    while (!converged && iter < options.max_iterations) {
        ++iter;
        for (Eigen::Index c = 0; c < k; ++c) {
            Eigen::VectorXd shifted = theta;
            const double step = options.fd_step * std::max(std::abs(theta(c)), 1e-3);
            shifted(c) += step;
            jac.col(c) = (problem.residuals(shifted) - r) / step;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;

        // Inner loop: raise damping until a step lowers the cost.
        bool accepted = false;
        while (!accepted && damping < 1e16) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += damping * jtj.diagonal().cwiseMax(1e-12);
            Eigen::VectorXd delta = lhs.ldlt().solve(-grad);
            Eigen::VectorXd candidate = theta + delta;
            project(candidate);
            const Eigen::VectorXd applied = candidate - theta;
            const Eigen::VectorXd r_new = problem.residuals(candidate);
            const double cost_new = r_new.squaredNorm();
            if (std::isfinite(cost_new) && cost_new < cost) {
                const double rel_change = (cost - cost_new) / cost;
                theta = candidate;
                r = r_new;
                cost = cost_new;
                report.accepted_costs.push_back(cost);
                damping = std::max(damping / 10.0, 1e-12);
                accepted = true;
                if (rel_change < 1e-9 || applied.norm() < 1e-10 || cost == 0.0) converged = true;
            } else {
                damping *= 10.0;
                if (applied.norm() < 1e-10) {
                    // No representable downhill step remains.
                    converged = true;
                    break;
                }
            }
        }
        if (!accepted && !converged) break;
    }

    report.params = unpack(theta, init);
    report.iterations = iter;
    report.converged = converged;
    report.residual_norm = std::sqrt(cost / static_cast<double>(m));
    const ErrorStats stats = error_stats(data, report.params);
    report.max_rel_error_sat = stats.max_rel;
    report.avg_rel_error_sat = stats.avg_rel;
    return report;
}

std::vector<IVPoint> saturation_mask(const IVDataset& data, const DeviceParams& params) {
    std::vector<IVPoint> out;
    for (const auto& pt : data.points) {
        const double threshold = std::max(pt.vgs - params.vth_nominal, 3.0 * thermal_voltage(pt.temperature));
        if (pt.vds > threshold) out.push_back(pt);
    }
    if (out.empty()) throw DomainError("saturation mask is empty; widen the Vds sweep");
    return out;
}

ErrorStats error_stats(const IVDataset& data, const DeviceParams& params) {
    ErrorStats stats;
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& pt : saturation_mask(data, params)) {
        if (!(pt.ids > 0.0)) {
            ++stats.excluded;
            continue;
        }
        const double rel = std::abs(ids_proposed(params, {pt.vgs, pt.vds, pt.temperature}) - pt.ids) / pt.ids;
        stats.max_rel = std::max(stats.max_rel, rel);
        sum += rel;
        ++used;
    }
    if (used == 0) throw DomainError("saturation mask holds no positive currents");
    stats.avg_rel = sum / static_cast<double>(used);
    return stats;
}

}  // namespace sramyield
