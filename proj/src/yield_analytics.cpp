#include "sramyield/yield_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sramyield/errors.hpp"
#include "sramyield/numerics.hpp"

namespace sramyield {

using numerics::normal_cdf;
using numerics::normal_quantile;
using numerics::normal_sf;

namespace {

std::pair<double, double> mean_and_sd(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    // Spread at rounding level means the samples are all equal.
    return {mean, sd <= 1e-12 * std::abs(mean) ? 0.0 : sd};
}

void require_sample_count(std::size_t n) {
    if (n < kMinEstimationSamples) {
        throw DegenerateStatistics("distribution estimation needs at least " + std::to_string(kMinEstimationSamples) +
                                   " samples, got " + std::to_string(n));
    }
}

// Phi(hi) - Phi(lo) for hi >= lo, evaluated on the side that keeps precision.
double normal_interval(double lo, double hi) {
    if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
    if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
    return 1.0 - normal_cdf(lo) - normal_sf(hi);
}

double pearson(const std::vector<std::pair<double, double>>& pts) {
    const double n = static_cast<double>(pts.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateStatistics("Q-Q correlation undefined for constant quantiles");
    return sxy / std::sqrt(sxx * syy);
}

template <typename Quantile>
QQResult build_qq(std::span<const double> samples, Quantile&& quantile, QQTail tail, double tail_fraction) {
    if (samples.size() < kMinQQSamples) {
        throw DegenerateStatistics("Q-Q analysis needs at least " + std::to_string(kMinQQSamples) + " samples");
    }
    if (tail != QQTail::none && !(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw DomainError("tail fraction must lie in (0, 1]");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) throw DegenerateStatistics("Q-Q correlation undefined for constant samples");
    const std::size_t n = sorted.size();
    std::size_t first = 0, last = n;
    if (tail != QQTail::none) {
        const auto keep = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(tail_fraction * n)));
        if (tail == QQTail::lower) last = std::min(n, keep);
        else first = n - std::min(n, keep);
    }
    QQResult out;
    out.points.reserve(last - first);
    for (std::size_t i = first; i < last; ++i) {
        const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        out.points.emplace_back(quantile(q), sorted[i]);
    }
    out.correlation = pearson(out.points);
    return out;
}

}  // namespace

void validate(const DeltaVDistribution& d) {
    if (!(d.sigma_delta > 0.0) || !(d.mu_delta > 0.0) || !std::isfinite(d.mu_delta) || !std::isfinite(d.sigma_delta)) {
        throw ConfigError("delta-V distribution needs mu_delta > 0 and sigma_delta > 0");
    }
}

void validate(const WriteTimeDistribution& d) {
    if (!(d.sigma_w > 0.0) || !(d.mu_w > 0.0) || !(d.t0 > 0.0) || !std::isfinite(d.mu_w) || !std::isfinite(d.sigma_w)) {
        throw ConfigError("write-time distribution needs mu_w > 0, sigma_w > 0 and t0 > 0");
    }
}

void validate(const OffsetVoltageDist& d) {
    if (!(d.sigma_vos > 0.0) || !std::isfinite(d.mu_vos)) throw ConfigError("offset distribution needs sigma_vos > 0");
}

DeltaVDistribution estimate_delta_params(std::span<const double> delta_v) {
    require_sample_count(delta_v.size());
    std::vector<double> roots;
    roots.reserve(delta_v.size());
    for (std::size_t i = 0; i < delta_v.size(); ++i) {
        if (!(delta_v[i] > 0.0)) {
            std::ostringstream msg;
            msg << "delta-V sample " << i << " is not positive (" << delta_v[i] << ")";
            throw DomainError(msg.str());
        }
        roots.push_back(std::sqrt(delta_v[i]));
    }
    const auto [mu, sigma] = mean_and_sd(roots);
    if (!(sigma > 0.0)) throw DegenerateStatistics("delta-V samples have zero variance");
    return {mu, sigma};
}

WriteTimeDistribution estimate_write_params(std::span<const double> times, double t0) {
    if (!(t0 > 0.0)) throw DomainError("t0 must be positive");
    require_sample_count(times.size());
    std::vector<double> roots;
    roots.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > t0)) {
            std::ostringstream msg;
            msg << "write-time sample " << i << " (" << times[i] << " s) does not exceed t0 = " << t0
                << " s; choose a smaller t0";
            throw DomainError(msg.str());
        }
        roots.push_back(std::sqrt(std::log(times[i] / t0)));
    }
    const auto [mu, sigma] = mean_and_sd(roots);
    if (!(sigma > 0.0)) throw DegenerateStatistics("write-time samples have zero variance");
    return {mu, sigma, t0};
}

double pdf_delta(const DeltaVDistribution& d, double dv) {
    if (!(dv > 0.0)) return 0.0;
    const double root = std::sqrt(dv);
    const double z = (root - d.mu_delta) / d.sigma_delta;
    return std::exp(-0.5 * z * z) / (2.0 * d.sigma_delta * std::sqrt(2.0 * M_PI * dv));
}

double access_fail_prob_fixed(const DeltaVDistribution& d, double v_os) {
    if (!(v_os > 0.0)) return 0.0;
    return normal_interval(-d.mu_delta / d.sigma_delta, (std::sqrt(v_os) - d.mu_delta) / d.sigma_delta);
}

double access_fail_prob_ber(const DeltaVDistribution& d, const OffsetVoltageDist& offset) {
    validate(offset);
    constexpr double kSpan = 8.0;
    if (offset.mu_vos + kSpan * offset.sigma_vos <= 0.0) return 0.0;
    // Integrate in standard-normal units; the fixed-offset probability has a
    // kink at zero, so start at the z where the offset turns positive.
    const double z_lo = std::max(-kSpan, -offset.mu_vos / offset.sigma_vos);
    auto integrand = [&](double z) {
        return numerics::normal_pdf(z) * access_fail_prob_fixed(d, offset.mu_vos + offset.sigma_vos * z);
    };
    return numerics::integrate_gk(integrand, z_lo, kSpan, 1e-10);
}

double pdf_write(const WriteTimeDistribution& d, double t) {
    if (!(t > d.t0)) return 0.0;
    const double ratio = t / d.t0;
    const double log_ratio = std::log(ratio);
    const double z = (std::sqrt(log_ratio) - d.mu_w) / d.sigma_w;
    return std::exp(-0.5 * z * z) / (2.0 * d.sigma_w * ratio * std::sqrt(2.0 * M_PI * log_ratio)) / d.t0;
}

double write_fail_prob(const WriteTimeDistribution& d, double t_write) {
    if (!(t_write > 0.0)) throw DomainError("t_write must be positive");
    if (t_write <= d.t0) return 1.0;
    return normal_sf((std::sqrt(std::log(t_write / d.t0)) - d.mu_w) / d.sigma_w);
}

double write_time_for_pf(const WriteTimeDistribution& d, double target_pf) {
    if (!(target_pf > 0.0 && target_pf < 1.0)) throw DomainError("target failure probability must lie in (0, 1)");
    const double root = d.mu_w + d.sigma_w * normal_quantile(1.0 - target_pf);
    if (!(root > 0.0)) {
        std::ostringstream msg;
        msg << "target pf " << target_pf << " exceeds the largest achievable write failure probability "
            << normal_sf(-d.mu_w / d.sigma_w);
        throw RangeError(msg.str());
    }
    return d.t0 * std::exp(root * root);
}

double relative_error(double pf_ref, double pf_hat) {
    if (!(pf_ref > 0.0)) throw DomainError("relative error needs a positive reference probability");
    return std::abs(pf_ref - pf_hat) / pf_ref;
}

// ---------------------------------------------------------------------------

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.empty() || x_.size() != y_.size()) throw DomainError("interpolation needs matching, non-empty knots");
    for (std::size_t i = 1; i < x_.size(); ++i) {
        if (!(x_[i] > x_[i - 1])) throw DomainError("interpolation knots must be strictly increasing");
    }
    const std::size_t n = x_.size();
    slope_.assign(n, 0.0);
    if (n < 2) return;
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x_[k + 1] - x_[k];
        delta[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    slope_.front() = delta.front();
    slope_.back() = delta.back();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) continue;
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        slope_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
}

double MonotoneCubic::operator()(double x) const {
    const std::size_t n = x_.size();
    if (n == 1) return y_.front();
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    k = std::min(k, n - 2);
    const double h = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * slope_[k] + (-2 * s3 + 3 * s2) * y_[k + 1] +
           (s3 - s2) * h * slope_[k + 1];
}

AccessCharacterization::AccessCharacterization(std::vector<AccessCharacterizationRow> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw DomainError("access characterization needs at least one row");
    std::vector<double> log_t, mu, sigma;
    for (const auto& row : rows_) {
        if (!(row.t_read > 0.0)) throw DomainError("characterized read times must be positive");
        validate(row.dist);
        log_t.push_back(std::log(row.t_read));
        mu.push_back(row.dist.mu_delta);
        sigma.push_back(row.dist.sigma_delta);
    }
    mu_ = MonotoneCubic(log_t, mu);
    sigma_ = MonotoneCubic(std::move(log_t), sigma);
}

DeltaVDistribution AccessCharacterization::at(double t_read) const {
    const double lo = t_min(), hi = t_max();
    // Relative slack so that grid values survive a log/exp round trip.
    if (!(t_read >= lo * (1 - 1e-12) && t_read <= hi * (1 + 1e-12))) {
        std::ostringstream msg;
        msg << "read time " << t_read << " s outside characterized range [" << lo << ", " << hi << "] s";
        throw RangeError(msg.str());
    }
    if (rows_.size() == 1) return rows_.front().dist;
    const double x = std::log(std::clamp(t_read, lo, hi));
    return {mu_(x), sigma_(x)};
}

double AccessCharacterization::ber(double t_read, const OffsetVoltageDist& offset) const {
    return access_fail_prob_ber(at(t_read), offset);
}

double AccessCharacterization::read_time_for_pf(double target_pf, const OffsetVoltageDist& offset) const {
    if (!(target_pf > 0.0 && target_pf < 1.0)) throw DomainError("target failure probability must lie in (0, 1)");
    const double pf_lo_t = ber(t_min(), offset);
    const double pf_hi_t = ber(t_max(), offset);
    const double achievable_max = std::max(pf_lo_t, pf_hi_t);
    const double achievable_min = std::min(pf_lo_t, pf_hi_t);
    if (!(target_pf <= achievable_max && target_pf >= achievable_min) || rows_.size() == 1) {
        if (rows_.size() == 1 && target_pf == pf_lo_t) return t_min();
        std::ostringstream msg;
        msg << "target pf " << target_pf << " outside achievable range [" << achievable_min << ", " << achievable_max
            << "] of the characterized read times [" << t_min() << ", " << t_max() << "] s";
        throw RangeError(msg.str());
    }
    const double log_target = std::log(target_pf);
    auto f = [&](double log_t) {
        const double pf = ber(std::exp(log_t), offset);
        return (pf > 0.0 ? std::log(pf) : -745.0) - log_target;
    };
    const double log_t = numerics::find_root(f, std::log(t_min()), std::log(t_max()), 1e-13);
    return std::clamp(std::exp(log_t), t_min(), t_max());
}

// ---------------------------------------------------------------------------

double quantile_delta(const DeltaVDistribution& d, double q) {
    const double deficit = normal_cdf(-d.mu_delta / d.sigma_delta);
    const double root = d.mu_delta + d.sigma_delta * normal_quantile(std::min(q + deficit, 1.0 - 1e-16));
    return root > 0.0 ? root * root : 0.0;
}

double quantile_write(const WriteTimeDistribution& d, double q) {
    const double root = d.mu_w + d.sigma_w * normal_quantile(q);
    return root > 0.0 ? d.t0 * std::exp(root * root) : d.t0;
}

QQResult qq_points(std::span<const double> samples, const DeltaVDistribution& dist, QQTail tail, double tail_fraction) {
    validate(dist);
    return build_qq(samples, [&](double q) { return quantile_delta(dist, q); }, tail, tail_fraction);
}

QQResult qq_points(std::span<const double> samples, const WriteTimeDistribution& dist, QQTail tail,
                   double tail_fraction) {
    validate(dist);
    return build_qq(samples, [&](double q) { return quantile_write(dist, q); }, tail, tail_fraction);
}

double four_sigma_probability() { return normal_sf(4.0); }

}  // namespace sramyield
