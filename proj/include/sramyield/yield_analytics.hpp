#pragma once

#include <span>
#include <utility>
#include <vector>

namespace sramyield {

/// sqrt(dV) ~ N(mu_delta, sigma_delta^2), both in V^(1/2).
struct DeltaVDistribution {
    double mu_delta = 0.0;
    double sigma_delta = 0.0;

    /// The density keeps only the positive branch of the square; its
    /// normalization deficit Phi(-mu/sigma) is negligible above this ratio.
    static constexpr double kSingleBranchRatio = 4.0;
    bool single_branch_ok() const { return mu_delta >= kSingleBranchRatio * sigma_delta; }
};

/// sqrt(ln(t / t0)) ~ N(mu_w, sigma_w^2), supported on t > t0.
struct WriteTimeDistribution {
    double mu_w = 0.0;
    double sigma_w = 0.0;
    double t0 = 1e-12;

    bool single_branch_ok() const { return mu_w >= DeltaVDistribution::kSingleBranchRatio * sigma_w; }
};

/// Gaussian input-referred sense-amplifier offset.
struct OffsetVoltageDist {
    double mu_vos = 0.0;
    double sigma_vos = 0.02;
};

void validate(const DeltaVDistribution& dist);
void validate(const WriteTimeDistribution& dist);
void validate(const OffsetVoltageDist& dist);

inline constexpr std::size_t kMinEstimationSamples = 30;

/// Sample mean and (n-1) standard deviation of sqrt(dV).
DeltaVDistribution estimate_delta_params(std::span<const double> delta_v);

/// Sample mean and (n-1) standard deviation of sqrt(ln(t / t0)).
WriteTimeDistribution estimate_write_params(std::span<const double> times, double t0);

double pdf_delta(const DeltaVDistribution& dist, double dv);

/// P(dV < v_os) under the single-branch density, i.e. its exact integral
/// from 0 to v_os: Phi((sqrt(v_os) - mu)/sigma) - Phi(-mu/sigma). Zero for
/// v_os <= 0.
double access_fail_prob_fixed(const DeltaVDistribution& dist, double v_os);

/// Bit error rate: the fixed-offset failure probability averaged over a
/// Gaussian offset by adaptive Gauss-Kronrod on mu +- 8 sigma.
double access_fail_prob_ber(const DeltaVDistribution& dist, const OffsetVoltageDist& offset);

double pdf_write(const WriteTimeDistribution& dist, double t);

/// P(T_write > t_write). One for t_write <= t0.
double write_fail_prob(const WriteTimeDistribution& dist, double t_write);

/// Write-time constraint whose failure probability equals `target_pf`.
double write_time_for_pf(const WriteTimeDistribution& dist, double target_pf);

/// |pf_ref - pf_hat| / pf_ref.
double relative_error(double pf_ref, double pf_hat);

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Falls back to linear for two knots and to a constant for one.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::vector<double> x_, y_, slope_;
};

struct AccessCharacterizationRow {
    double t_read = 0.0;
    DeltaVDistribution dist;
};

/// mu_delta(T), sigma_delta(T) tabulated at discrete read times and
/// interpolated in log(T) between them.
class AccessCharacterization {
public:
    AccessCharacterization() = default;
    explicit AccessCharacterization(std::vector<AccessCharacterizationRow> rows);

    const std::vector<AccessCharacterizationRow>& rows() const { return rows_; }
    double t_min() const { return rows_.front().t_read; }
    double t_max() const { return rows_.back().t_read; }

    /// Throws RangeError outside [t_min, t_max].
    DeltaVDistribution at(double t_read) const;

    double ber(double t_read, const OffsetVoltageDist& offset) const;

    /// Read time whose bit error rate equals `target_pf`. Throws RangeError
    /// naming the achievable range when the target is not bracketed.
    double read_time_for_pf(double target_pf, const OffsetVoltageDist& offset) const;

private:
    std::vector<AccessCharacterizationRow> rows_;
    MonotoneCubic mu_, sigma_;
};

enum class QQTail { none, lower, upper };

struct QQResult {
    std::vector<std::pair<double, double>> points;  // (theoretical, empirical)
    double correlation = 0.0;
};

inline constexpr std::size_t kMinQQSamples = 100;

/// Order statistics against model quantiles at plotting positions
/// (i - 0.5)/n, with the Pearson correlation of the retained pairs. A tail
/// selection keeps only the lowest / highest `tail_fraction` of the pairs.
QQResult qq_points(std::span<const double> samples, const DeltaVDistribution& dist, QQTail tail = QQTail::none,
                   double tail_fraction = 0.01);
QQResult qq_points(std::span<const double> samples, const WriteTimeDistribution& dist, QQTail tail = QQTail::none,
                   double tail_fraction = 0.01);

/// Model quantile functions used by qq_points.
double quantile_delta(const DeltaVDistribution& dist, double q);
double quantile_write(const WriteTimeDistribution& dist, double q);

/// Probability mass beyond 4 sigma of a standard normal, 3.17e-5.
double four_sigma_probability();

}  // namespace sramyield
