#include "dpre/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>

#include "dpre/errors.hpp"
#include "dpre/stats.hpp"

namespace dpre {

namespace {

constexpr std::uint64_t kBootstrapDomain = 0xB0075712A9E3D1C5ull;

double binomial(int n, int k)
{
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

// Statistics from power sums of d = W - 1: sums[j] = sum d^j, j = 0..m_max.
std::vector<double> statistics_from_power_sums(const std::vector<double>& sums, int m_max)
{
    const double count = sums[0];
    std::vector<double> e(sums.size());
    for (std::size_t j = 0; j < sums.size(); ++j) {
        e[j] = sums[j] / count;
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(2 * m_max - 1));
    out.push_back(1.0 + e[1]);
    for (int m = 2; m <= m_max; ++m) {
        double raw = 0.0;
        for (int j = 0; j <= m; ++j) {
            raw += binomial(m, j) * e[static_cast<std::size_t>(j)];
        }
        out.push_back(raw);
    }
    for (int m = 2; m <= m_max; ++m) {
        double central = 0.0;
        for (int j = 0; j <= m; ++j) {
            central += binomial(m, j) * std::pow(-e[1], m - j) * e[static_cast<std::size_t>(j)];
        }
        out.push_back(central);
    }
    return out;
}

template <class IndexFn>
std::vector<double> statistics_over(std::size_t count, IndexFn&& value_at, int m_max)
{
    std::vector<NeumaierSum> acc(static_cast<std::size_t>(m_max) + 1);
    for (std::size_t i = 0; i < count; ++i) {
        const double d = value_at(i) - 1.0;
        double power = 1.0;
        for (int j = 0; j <= m_max; ++j) {
            acc[static_cast<std::size_t>(j)].add(power);
            power *= d;
        }
    }
    std::vector<double> sums;
    sums.reserve(acc.size());
    for (const auto& a : acc) {
        sums.push_back(a.value());
    }
    return statistics_from_power_sums(sums, m_max);
}

std::vector<double> resample_statistics(const std::vector<double>& values, const McConfig& config,
                                        std::int64_t resample)
{
    RngStream stream(mix64(config.master_seed ^ kBootstrapDomain),
                     static_cast<std::uint32_t>(resample));
    const auto n = static_cast<std::uint64_t>(values.size());
    return statistics_over(
        values.size(), [&](std::size_t) { return values[stream.next_below(n)]; }, config.m_max);
}

double evaluate_replicate(const McConfig& config, double bt, std::int64_t i, bool log_output)
{
    const KeyedDisorder omega(config.law, config.master_seed, static_cast<std::uint32_t>(i));
    if (log_output) {
        if (config.arithmetic == Arithmetic::Log) {
            return evaluate_exact_log(config.params, bt, config.law, omega);
        }
        return std::log(evaluate_exact(config.params, bt, config.law, omega));
    }
    return evaluate_exact(config.params, bt, config.law, omega, config.arithmetic);
}

Estimate make_estimate(double value, std::vector<double> draws)
{
    std::sort(draws.begin(), draws.end());
    NeumaierSum sum;
    for (double x : draws) {
        sum.add(x);
    }
    const double mean = sum.value() / static_cast<double>(draws.size());
    NeumaierSum sq;
    for (double x : draws) {
        sq.add((x - mean) * (x - mean));
    }
    Estimate e;
    e.value = value;
    e.se = draws.size() > 1 ? std::sqrt(sq.value() / static_cast<double>(draws.size() - 1)) : 0.0;
    e.ci95 = {quantile_sorted(draws, 0.025), quantile_sorted(draws, 0.975)};
    e.ci99 = {quantile_sorted(draws, 0.005), quantile_sorted(draws, 0.995)};
    return e;
}

} // namespace

void McConfig::validate() const
{
    params.validate();
    if (replicates < 100) {
        throw ArgumentError("Monte Carlo needs at least 100 replicates");
    }
    if (replicates > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max())) {
        throw ArgumentError("replicate index must fit the 32-bit stream field");
    }
    if (m_max < 2 || m_max > kMaxMomentOrder) {
        throw ArgumentError("m_max must lie in [2, 10]");
    }
    if (bootstrap_resamples < 1) {
        throw ArgumentError("bootstrap needs at least one resample");
    }
    check_recursion_budget(params);
    const double work = static_cast<double>(replicates) * static_cast<double>(edge_count(params));
    if (work > kMcWorkBudget) {
        throw ResourceError("replicates x (bs)^n exceeds the 1e11 work budget");
    }
}

double McConfig::beta() const
{
    if (schedule) {
        return dpre::beta(*schedule, params.b, params.n);
    }
    if (!(fixed_beta >= 0.0)) {
        throw ArgumentError("beta must be >= 0");
    }
    return fixed_beta;
}

std::vector<double> sample_replicates_serial(const McConfig& config, bool log_output)
{
    config.validate();
    const double bt = config.beta();
    std::vector<double> out(static_cast<std::size_t>(config.replicates));
    for (std::int64_t i = 0; i < config.replicates; ++i) {
        out[static_cast<std::size_t>(i)] = evaluate_replicate(config, bt, i, log_output);
    }
    return out;
}

std::vector<double> sample_replicates(const McConfig& config, int threads, bool log_output)
{
    config.validate();
    const double bt = config.beta();
    std::vector<double> out(static_cast<std::size_t>(config.replicates));
    std::exception_ptr failure;
    std::mutex failure_lock;
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
    for (std::int64_t i = 0; i < config.replicates; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = evaluate_replicate(config, bt, i, log_output);
        } catch (...) {
            const std::lock_guard<std::mutex> guard(failure_lock);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

std::vector<double> moment_statistics(const std::vector<double>& values, int m_max)
{
    if (values.empty()) {
        throw ArgumentError("no replicate values");
    }
    return statistics_over(
        values.size(), [&](std::size_t i) { return values[i]; }, m_max);
}

std::vector<std::vector<double>> bootstrap_serial(const std::vector<double>& values,
                                                  const McConfig& config)
{
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(config.bootstrap_resamples));
    for (std::int64_t r = 0; r < config.bootstrap_resamples; ++r) {
        rows[static_cast<std::size_t>(r)] = resample_statistics(values, config, r);
    }
    return rows;
}

std::vector<std::vector<double>> bootstrap(const std::vector<double>& values, const McConfig& config,
                                           int threads)
{
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(config.bootstrap_resamples));
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
    for (std::int64_t r = 0; r < config.bootstrap_resamples; ++r) {
        rows[static_cast<std::size_t>(r)] = resample_statistics(values, config, r);
    }
    return rows;
}

namespace {

McSummary assemble(const std::vector<double>& values, const McConfig& config,
                   const std::vector<std::vector<double>>& rows)
{
    const auto point = moment_statistics(values, config.m_max);
    auto column = [&](std::size_t q) {
        std::vector<double> draws;
        draws.reserve(rows.size());
        for (const auto& row : rows) {
            draws.push_back(row[q]);
        }
        return make_estimate(point[q], std::move(draws));
    };
    McSummary s;
    s.params = config.params;
    s.law = config.law;
    s.beta = config.beta();
    s.replicates = config.replicates;
    s.mean = column(0);
    const auto m_max = static_cast<std::size_t>(config.m_max);
    for (std::size_t m = 2; m <= m_max; ++m) {
        s.raw.push_back(column(m - 1));
    }
    for (std::size_t m = 2; m <= m_max; ++m) {
        s.central.push_back(column(m_max + m - 2));
    }
    // point[m_max] is the plug-in central second moment.
    const double n = static_cast<double>(values.size());
    s.mean_se = std::sqrt(point[m_max] * n / (n - 1.0) / n);
    return s;
}

} // namespace

McSummary summarize(const std::vector<double>& values, const McConfig& config, int threads)
{
    return assemble(values, config, bootstrap(values, config, threads));
}

McSummary run(const McConfig& config, int threads)
{
    const auto start = std::chrono::steady_clock::now();
    const auto values = sample_replicates(config, threads);
    auto summary = summarize(values, config, threads);
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summary;
}

McSummary run_serial(const McConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    const auto values = sample_replicates_serial(config);
    auto summary = assemble(values, config, bootstrap_serial(values, config));
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summary;
}

FreeEnergyEstimate free_energy_estimate(const McConfig& config, int threads)
{
    const auto logs = sample_replicates(config, threads, true);
    NeumaierSum sum;
    for (double x : logs) {
        if (!std::isfinite(x)) {
            throw NumericError("log W is not finite");
        }
        sum.add(x);
    }
    const double n = static_cast<double>(logs.size());
    const double mean = sum.value() / n;
    NeumaierSum sq;
    for (double x : logs) {
        sq.add((x - mean) * (x - mean));
    }
    const double scale = std::pow(static_cast<double>(config.params.b), -config.params.n);
    return {scale * mean, scale * std::sqrt(sq.value() / (n - 1.0) / n)};
}

namespace {

ComparisonEntry entry(std::string name, double exact, const Estimate& est, double se)
{
    ComparisonEntry e;
    e.quantity = std::move(name);
    e.exact = exact;
    e.estimate = est.value;
    e.se = se;
    e.z = exact == est.value ? 0.0 : (est.value - exact) / se;
    e.ci99 = est.ci99;
    e.inside = est.ci99.contains(exact);
    return e;
}

void finish(ComparisonReport& report)
{
    report.pass = std::all_of(report.entries.begin(), report.entries.end(),
                              [](const ComparisonEntry& e) { return e.inside; });
}

bool same_beta(double a, double b)
{
    return std::abs(a - b) <= 1e-15 * std::max(std::abs(a), std::abs(b));
}

} // namespace

ComparisonReport compare(const McSummary& summary, const MomentTable& exact)
{
    const int n = summary.params.n;
    if (exact.b != summary.params.b || summary.params.s != summary.params.b ||
        !(exact.law == summary.law) || !same_beta(exact.beta, summary.beta) || exact.steps() < n) {
        throw ArgumentError("moment table does not match the Monte Carlo configuration");
    }
    ComparisonReport report;
    report.entries.push_back(entry("mean", 1.0, summary.mean, summary.mean_se));
    report.entries.push_back(
        entry("variance", exact.raw_excess(2, n), summary.central_moment(2), summary.central_moment(2).se));
    const int top = std::min(exact.max_order, static_cast<int>(summary.raw.size()) + 1);
    for (int m = 3; m <= top; ++m) {
        report.entries.push_back(entry("raw_moment_" + std::to_string(m), exact.raw(m, n),
                                       summary.raw_moment(m), summary.raw_moment(m).se));
    }
    finish(report);
    return report;
}

ComparisonReport compare(const McSummary& summary, const FlowTrace& exact)
{
    const int n = summary.params.n;
    const double v = tilt_variance(summary.law, summary.beta);
    if (exact.b != summary.params.b || exact.s != summary.params.s ||
        std::abs(exact.v - v) > 1e-12 * std::max(v, 1e-300) ||
        static_cast<int>(exact.values.size()) <= n) {
        throw ArgumentError("variance trace does not match the Monte Carlo configuration");
    }
    ComparisonReport report;
    report.entries.push_back(entry("mean", 1.0, summary.mean, summary.mean_se));
    report.entries.push_back(entry("variance", exact.values[static_cast<std::size_t>(n)],
                                   summary.central_moment(2), summary.central_moment(2).se));
    finish(report);
    return report;
}

} // namespace dpre
