#pragma once

// Reproducible Monte Carlo over disorder realizations.
//
// Replicate i uses the disorder stream keyed by (master_seed, i), so the
// per-replicate values are fixed by the configuration alone. The OpenMP
// kernels and the serial reference kernels therefore produce identical
// buffers, and every reduction runs serially in replicate order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpre/disorder.hpp"
#include "dpre/hierarchy.hpp"
#include "dpre/moments.hpp"
#include "dpre/partition.hpp"
#include "dpre/scaling.hpp"
#include "dpre/variance_flow.hpp"

namespace dpre {

inline constexpr double kMcWorkBudget = 1e11;

struct McConfig {
    GraphParams params;
    DisorderLaw law = DisorderLaw::gaussian();
    // When set, beta comes from the schedule at (b, n); otherwise fixed_beta.
    std::optional<TemperatureSchedule> schedule;
    double fixed_beta = 0.0;
    std::int64_t replicates = 1000;
    std::uint64_t master_seed = 1;
    int bootstrap_resamples = 2000;
    int m_max = 4;
    Arithmetic arithmetic = Arithmetic::Linear;

    // Throws ArgumentError / ResourceError.
    void validate() const;
    double beta() const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

struct Estimate {
    double value = 0.0;
    double se = 0.0; // bootstrap standard deviation
    Interval ci95;
    Interval ci99;
};

struct McSummary {
    GraphParams params;
    DisorderLaw law = DisorderLaw::gaussian();
    double beta = 0.0;
    std::int64_t replicates = 0;
    Estimate mean;
    double mean_se = 0.0;         // sample sd / sqrt(replicates)
    std::vector<Estimate> raw;     // E[W^m], m = 2..m_max
    std::vector<Estimate> central; // E[(W - mean)^m], m = 2..m_max
    double wall_seconds = 0.0;     // not part of the serialized summary

    const Estimate& raw_moment(int m) const { return raw.at(static_cast<std::size_t>(m - 2)); }
    const Estimate& central_moment(int m) const { return central.at(static_cast<std::size_t>(m - 2)); }
};

/// W (or log W) for every replicate, in replicate order.
std::vector<double> sample_replicates(const McConfig& config, int threads, bool log_output = false);
std::vector<double> sample_replicates_serial(const McConfig& config, bool log_output = false);

/// Bootstrap distribution: row r holds the statistics of resample r, laid
/// out as [mean, raw_2..raw_m, central_2..central_m].
std::vector<std::vector<double>> bootstrap(const std::vector<double>& values, const McConfig& config,
                                           int threads);
std::vector<std::vector<double>> bootstrap_serial(const std::vector<double>& values,
                                                  const McConfig& config);

// Point statistics in the same layout as a bootstrap row.
std::vector<double> moment_statistics(const std::vector<double>& values, int m_max);

McSummary summarize(const std::vector<double>& values, const McConfig& config, int threads);

McSummary run(const McConfig& config, int threads);
McSummary run_serial(const McConfig& config);

struct FreeEnergyEstimate {
    double estimate;
    double standard_error;
};

/// b^{-n} times the sample mean of log W_n: a finite-n proxy for the free
/// energy.
FreeEnergyEstimate free_energy_estimate(const McConfig& config, int threads);

struct ComparisonEntry {
    std::string quantity;
    double exact = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
    Interval ci99;
    bool inside = false;
};

struct ComparisonReport {
    std::vector<ComparisonEntry> entries;
    bool pass = false;
};

/// Mean (exact 1), variance and raw moments against an exact moment table
/// evaluated at k = n.
ComparisonReport compare(const McSummary& summary, const MomentTable& exact);
/// Mean and variance against an exact variance trace at k = n.
ComparisonReport compare(const McSummary& summary, const FlowTrace& exact);

} // namespace dpre
