#include "dpre/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "dpre/errors.hpp"
#include "dpre/hierarchy.hpp"
#include "dpre/moments.hpp"
#include "dpre/montecarlo.hpp"
#include "dpre/partition.hpp"
#include "dpre/scaling.hpp"
#include "dpre/variance_flow.hpp"

namespace dpre::cli {

const char* version() { return DPRE_VERSION; }

namespace {

using json = nlohmann::ordered_json;

enum class Kind { Value, Flag };

struct ParamDef {
    std::string name; // snake_case; flag is --name with '-' for '_'
    std::string help;
    std::optional<std::string> fallback;
    Kind kind = Kind::Value;
    bool recorded = true; // part of the manifest parameter set
};

std::string flag_name(const std::string& name)
{
    std::string f = "--" + name;
    std::replace(f.begin(), f.end(), '_', '-');
    return f;
}

ParamDef out_def(const std::string& name, const std::string& help)
{
    return {name, help, std::nullopt, Kind::Value, false};
}

// Parameter lookup with flag > config > default precedence. Every value
// read is recorded in canonical form for the manifest.
class Resolved {
public:
    Resolved(const std::vector<ParamDef>& defs, std::map<std::string, std::string> values,
             Manifest& manifest)
        : defs_(defs), values_(std::move(values)), manifest_(manifest)
    {
    }

    bool has(const std::string& name) const { return values_.count(name) > 0; }

    std::string text(const std::string& name)
    {
        const auto& v = require(name);
        record(name, v);
        return v;
    }

    std::optional<std::string> optional_text(const std::string& name)
    {
        if (!has(name)) {
            return std::nullopt;
        }
        return text(name);
    }

    std::int64_t integer(const std::string& name, std::int64_t lo, std::int64_t hi)
    {
        const auto value = parse_integer(name, require(name));
        if (value < lo || value > hi) {
            throw UsageError(flag_name(name) + " must lie in [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
        }
        record(name, std::to_string(value));
        return value;
    }

    std::uint64_t unsigned64(const std::string& name)
    {
        const auto& raw = require(name);
        std::uint64_t value = 0;
        const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), value);
        if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size()) {
            throw UsageError("invalid value for " + flag_name(name) + ": '" + raw + "'");
        }
        record(name, std::to_string(value));
        return value;
    }

    double real(const std::string& name)
    {
        const auto value = parse_real(name, require(name));
        record(name, format_real(value));
        return value;
    }

    bool flag(const std::string& name)
    {
        if (!has(name)) {
            return false;
        }
        const auto& raw = values_.at(name);
        bool value = false;
        if (raw == "true" || raw == "1") {
            value = true;
        } else if (raw != "false" && raw != "0") {
            throw UsageError("invalid value for " + flag_name(name) + ": '" + raw + "'");
        }
        record(name, value ? "true" : "false");
        return value;
    }

    std::vector<std::int64_t> integer_list(const std::string& name, std::int64_t lo)
    {
        std::vector<std::int64_t> out;
        std::string canonical;
        for (const auto& item : split(require(name))) {
            const auto value = parse_integer(name, item);
            if (value < lo) {
                throw UsageError(flag_name(name) + " entries must be >= " + std::to_string(lo));
            }
            out.push_back(value);
            canonical += (canonical.empty() ? "" : ",") + std::to_string(value);
        }
        record(name, canonical);
        return out;
    }

    std::vector<double> real_list(const std::string& name)
    {
        std::vector<double> out;
        std::string canonical;
        for (const auto& item : split(require(name))) {
            out.push_back(parse_real(name, item));
            canonical += (canonical.empty() ? "" : ",") + format_real(out.back());
        }
        record(name, canonical);
        return out;
    }

    DisorderLaw law()
    {
        const auto& raw = require("law");
        DisorderLaw law = DisorderLaw::gaussian();
        try {
            law = DisorderLaw::parse(raw);
        } catch (const ArgumentError& e) {
            throw UsageError(std::string("invalid --law: ") + e.what());
        }
        record("law", law.to_string());
        return law;
    }

    void record(const std::string& name, const std::string& canonical)
    {
        for (const auto& def : defs_) {
            if (def.name == name && def.recorded) {
                manifest_.parameters[name] = canonical;
            }
        }
    }

private:
    const std::string& require(const std::string& name) const
    {
        const auto it = values_.find(name);
        if (it == values_.end()) {
            throw UsageError("missing required parameter " + flag_name(name));
        }
        return it->second;
    }

    static std::vector<std::string> split(const std::string& raw)
    {
        std::vector<std::string> items;
        std::string current;
        for (char c : raw + ",") {
            if (c == ',') {
                if (!current.empty()) {
                    items.push_back(current);
                }
                current.clear();
            } else if (c != ' ') {
                current += c;
            }
        }
        return items;
    }

    static std::int64_t parse_integer(const std::string& name, const std::string& raw)
    {
        std::int64_t value = 0;
        const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), value);
        if (res.ec == std::errc{} && res.ptr == raw.data() + raw.size()) {
            return value;
        }
        // Accept integral scientific notation such as 1e6.
        const double d = parse_real(name, raw);
        if (d == std::floor(d) && std::abs(d) < 9.0e15) {
            return static_cast<std::int64_t>(d);
        }
        throw UsageError("invalid integer for " + flag_name(name) + ": '" + raw + "'");
    }

    static double parse_real(const std::string& name, const std::string& raw)
    {
        double value = 0.0;
        const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), value);
        if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size() || !std::isfinite(value)) {
            throw UsageError("invalid number for " + flag_name(name) + ": '" + raw + "'");
        }
        return value;
    }

    const std::vector<ParamDef>& defs_;
    std::map<std::string, std::string> values_;
    Manifest& manifest_;
};

// Where a command writes: files are opened lazily and listed in the
// manifest; an empty path means the command's stdout.
class Context {
public:
    Context(std::ostream& out, std::ostream& err, int threads, Manifest& manifest)
        : out_(out), err_(err), threads_(threads), manifest_(manifest)
    {
    }

    std::ostream& open(const std::optional<std::string>& path)
    {
        if (!path || path->empty() || *path == "-") {
            return out_;
        }
        auto file = std::make_unique<std::ofstream>(*path, std::ios::binary);
        if (!*file) {
            throw ResourceError("cannot open output file '" + *path + "'");
        }
        manifest_.outputs.push_back(*path);
        files_.push_back(std::move(file));
        return *files_.back();
    }

    void close()
    {
        for (auto& f : files_) {
            f->close();
            if (!*f) {
                throw ResourceError("failed writing an output file");
            }
        }
    }

    std::ostream& err() { return err_; }
    int threads() const { return threads_; }
    Manifest& manifest() { return manifest_; }

private:
    std::ostream& out_;
    std::ostream& err_;
    int threads_;
    Manifest& manifest_;
    std::vector<std::unique_ptr<std::ofstream>> files_;
};

class Csv {
public:
    Csv(std::ostream& os, const std::vector<std::string>& header) : os_(os) { row(header); }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os_ << (i ? "," : "") << cells[i];
        }
        os_ << '\n';
    }

private:
    std::ostream& os_;
};

std::string num(double x) { return format_real(x); }
std::string num(std::int64_t x) { return std::to_string(x); }

json interval_json(const Interval& ci) { return json::array({ci.lo, ci.hi}); }

json estimate_json(const Estimate& e)
{
    return json{{"value", e.value},
                {"se", e.se},
                {"ci95", interval_json(e.ci95)},
                {"ci99", interval_json(e.ci99)}};
}

json comparison_json(const ComparisonReport& report)
{
    json entries = json::array();
    for (const auto& e : report.entries) {
        entries.push_back(json{{"quantity", e.quantity},
                               {"exact", e.exact},
                               {"estimate", e.estimate},
                               {"se", e.se},
                               {"z", e.z},
                               {"ci99", interval_json(e.ci99)},
                               {"inside", e.inside}});
    }
    return json{{"pass", report.pass}, {"entries", entries}};
}

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

json header_json(const Manifest& m)
{
    json params = json::object();
    for (const auto& [k, v] : m.parameters) {
        params[k] = v;
    }
    return json{{"subcommand", m.subcommand},
                {"version", m.version},
                {"manifest_digest", m.digest()},
                {"parameters", params}};
}

// s defaults to b.
int sides(Resolved& p, int b)
{
    if (p.has("s")) {
        return static_cast<int>(p.integer("s", 2, 64));
    }
    p.record("s", std::to_string(b));
    return b;
}

GraphParams graph(Resolved& p, int n_lo = 0)
{
    GraphParams g;
    g.b = static_cast<int>(p.integer("b", 2, 64));
    g.s = sides(p, g.b);
    g.n = static_cast<int>(p.integer("n", n_lo, 1 << 20));
    return g;
}

// --beta, or --schedule with --r at (b, n).
double resolve_beta(Resolved& p, const DisorderLaw& law, int b, int s, std::int64_t n)
{
    const bool fixed = p.has("beta");
    const bool scheduled = p.has("schedule");
    if (fixed == scheduled) {
        throw UsageError("give exactly one of --beta and --schedule");
    }
    if (fixed) {
        const double beta = p.real("beta");
        if (beta < 0.0) {
            throw UsageError("--beta must be >= 0");
        }
        return beta;
    }
    if (b != s) {
        throw UsageError("--schedule needs b = s");
    }
    TemperatureSchedule schedule;
    const auto mode = p.text("schedule");
    if (mode == "closed") {
        schedule.mode = ScheduleMode::ClosedForm;
    } else if (mode == "exactv") {
        schedule.mode = ScheduleMode::ExactVariance;
    } else {
        throw UsageError("--schedule must be closed or exactv");
    }
    schedule.r = p.real("r");
    schedule.law = law;
    return beta(schedule, b, n);
}

Arithmetic resolve_arithmetic(Resolved& p)
{
    const auto a = p.text("arithmetic");
    if (a == "linear") {
        return Arithmetic::Linear;
    }
    if (a == "log") {
        return Arithmetic::Log;
    }
    throw UsageError("--arithmetic must be linear or log");
}

// ---------------------------------------------------------------- commands

int cmd_graph_info(Resolved& p, Context& ctx)
{
    const auto g = graph(p);
    g.validate();
    std::ostringstream os;
    os << "b " << g.b << "\ns " << g.s << "\nn " << g.n << '\n';
    os << "edge_count " << edge_count(g) << '\n';
    for (int k = 1; k <= g.n; ++k) {
        os << "new_vertices_generation_" << k << ' ' << new_vertex_count(g, k) << '\n';
    }
    os << "vertex_count_nonroot " << total_vertex_count(g) << '\n';
    os << "vertex_count " << checked_add(total_vertex_count(g), 2) << '\n';
    // |Gamma_n| = b^{(s^n - 1)/(s - 1)}
    const double exponent = (std::pow(static_cast<double>(g.s), g.n) - 1.0) / (g.s - 1);
    try {
        os << "path_count " << path_count(g) << '\n';
    } catch (const OutOfRangeError&) {
        os << "path_count overflow\n";
    }
    os << "log_path_count " << num(exponent * std::log(static_cast<double>(g.b))) << '\n';
    ctx.open(std::nullopt) << os.str();
    return kExitOk;
}

McConfig mc_config(Resolved& p, bool with_schedule)
{
    McConfig c;
    c.params = graph(p);
    c.params.validate();
    check_recursion_budget(c.params);
    c.law = p.law();
    if (with_schedule) {
        c.fixed_beta = resolve_beta(p, c.law, c.params.b, c.params.s, c.params.n);
    } else {
        c.fixed_beta = p.real("beta");
        if (c.fixed_beta < 0.0) {
            throw UsageError("--beta must be >= 0");
        }
    }
    c.replicates = p.integer("replicates", 100, 4294967295LL);
    c.master_seed = p.unsigned64("seed");
    c.arithmetic = resolve_arithmetic(p);
    return c;
}

int cmd_sample(Resolved& p, Context& ctx)
{
    auto c = mc_config(p, true);
    c.bootstrap_resamples = static_cast<int>(p.integer("resamples", 1, 1000000));
    c.m_max = static_cast<int>(p.integer("m_max", 2, kMaxMomentOrder));
    const bool check = p.flag("check");
    const auto csv_path = p.optional_text("out");
    const auto json_path = p.optional_text("summary");
    c.validate();

    const auto values = sample_replicates(c, ctx.threads());
    const auto s = summarize(values, c, ctx.threads());

    std::optional<ComparisonReport> report;
    if (check) {
        if (c.params.b == c.params.s) {
            report = compare(s, moment_recursion(c.params.b, s.beta, c.law, c.m_max, c.params.n));
        } else {
            report = compare(s, iterate_variance(c.params.b, c.params.s,
                                                 tilt_variance(c.law, s.beta), c.params.n));
        }
    }

    if (csv_path) {
        Csv csv(ctx.open(csv_path), {"replicate", "w"});
        for (std::size_t i = 0; i < values.size(); ++i) {
            csv.row({num(static_cast<std::int64_t>(i)), num(values[i])});
        }
    }
    json j = header_json(ctx.manifest());
    j["beta"] = s.beta;
    j["replicates"] = s.replicates;
    j["mean"] = estimate_json(s.mean);
    j["mean_se"] = s.mean_se;
    json raw = json::array();
    json central = json::array();
    for (int m = 2; m <= c.m_max; ++m) {
        json r = estimate_json(s.raw_moment(m));
        r["m"] = m;
        raw.push_back(r);
        json q = estimate_json(s.central_moment(m));
        q["m"] = m;
        central.push_back(q);
    }
    j["raw_moments"] = raw;
    j["central_moments"] = central;
    if (report) {
        j["comparison"] = comparison_json(*report);
    }
    write_json(ctx.open(json_path), j);
    if (report && !report->pass) {
        ctx.err() << "check failed: exact value outside a 99% bootstrap interval\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

int cmd_free_energy(Resolved& p, Context& ctx)
{
    const auto c = mc_config(p, false);
    const auto json_path = p.optional_text("summary");
    c.validate();
    const auto fe = free_energy_estimate(c, ctx.threads());
    json j = header_json(ctx.manifest());
    j["beta"] = c.fixed_beta;
    j["replicates"] = c.replicates;
    j["estimate"] = fe.estimate;
    j["standard_error"] = fe.standard_error;
    write_json(ctx.open(json_path), j);
    return kExitOk;
}

int cmd_variance_flow(Resolved& p, Context& ctx)
{
    const int b = static_cast<int>(p.integer("b", 2, 64));
    const int s = sides(p, b);
    const auto n = p.integer("n", 0, std::int64_t{1} << 40);
    const auto steps = p.has("steps") ? p.integer("steps", 0, std::int64_t{1} << 40) : n;
    const auto stride = p.integer("stride", 1, std::int64_t{1} << 40);
    if (p.has("v") && p.has("beta")) {
        throw UsageError("give at most one of --v and --beta");
    }
    double v = 0.0;
    double r = 0.0;
    if (p.has("v")) {
        v = p.real("v");
        if (v < 0.0) {
            throw UsageError("--v must be >= 0");
        }
    } else if (p.has("beta")) {
        v = tilt_variance(p.law(), p.real("beta"));
    } else {
        if (b != s) {
            throw UsageError("the critical window needs b = s; give --v or --beta otherwise");
        }
        r = p.real("r");
        const auto ne = n_eff(b, n, r);
        v = constants(b).kappa_hat * constants(b).kappa_hat / (ne * ne);
    }
    const auto out_path = p.optional_text("out");
    Csv csv(ctx.open(out_path), {"n", "r", "value", "residual"});
    double x = 0.0;
    csv.row({"0", num(r), num(0.0), num(0.0)});
    for (std::int64_t k = 1; k <= steps; ++k) {
        const double next = iterate_map(b, s, v, x, 1);
        if (k % stride == 0 || k == steps) {
            csv.row({num(k), num(r), num(next), num(next - map_m(b, s, x))});
        }
        x = next;
    }
    return kExitOk;
}

int cmd_rfunc(Resolved& p, Context& ctx)
{
    const int b = static_cast<int>(p.integer("b", 2, 64));
    const int s = sides(p, b);
    const auto rs = p.real_list("r");
    const auto out_path = p.optional_text("out");
    if (b > s) {
        throw UsageError("rfunc needs b <= s");
    }
    if (b == s) {
        const auto grid = p.integer_list("grid", 1);
        Csv csv(ctx.open(out_path), {"n", "r", "value", "residual"});
        for (double r : rs) {
            const auto here = r_function(b, r, grid);
            std::optional<RFunctionResult> next;
            try {
                next = r_function(b, r + 1.0, grid);
            } catch (const NumericError&) {
            }
            for (std::size_t i = 0; i < here.sequence.size(); ++i) {
                const auto [N, value] = here.sequence[i];
                double residual = std::nan("");
                if (next) {
                    const double target = next->sequence[i].second;
                    residual = (map_m(b, b, value) - target) / target;
                }
                csv.row({num(N), num(r), num(value), num(residual)});
            }
        }
        return kExitOk;
    }
    const auto K = static_cast<int>(p.integer("depth", 1, 1000));
    Csv csv(ctx.open(out_path), {"n", "r", "value", "residual"});
    for (double r : rs) {
        if (r < 0.0) {
            throw UsageError("--r must be >= 0 when b < s");
        }
        const double value = r_function_subcritical(b, s, r, K);
        const double scaled = r_function_subcritical(b, s, static_cast<double>(s) / b * r, K);
        csv.row({num(static_cast<std::int64_t>(K)), num(r), num(value),
                 num(scaled - map_m(b, s, value))});
    }
    return kExitOk;
}

bool strictly_decreasing(const std::vector<double>& xs)
{
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] < xs[i - 1])) {
            return false;
        }
    }
    return true;
}

int cmd_asymptotics(Resolved& p, Context& ctx)
{
    const auto kind = p.text("kind");
    const int b = static_cast<int>(p.integer("b", 2, 64));
    const auto grid = p.integer_list("grid", 3);
    const bool check = p.flag("check");
    std::vector<std::array<double, 4>> rows;
    std::vector<double> tracked; // the quantity that should shrink along the grid
    if (kind == "lemma32" || kind == "l2gap") {
        const double r = p.real("r");
        for (const auto n : grid) {
            const auto w = critical_window(b, n, r);
            const double L = static_cast<double>(w.L);
            if (kind == "lemma32") {
                const double delta = lemma32_residual(b, n, r);
                const double lhs = delta + 1.0 + constants(b).eta * std::log(L) / L + r / L;
                rows.push_back({static_cast<double>(n), r, lhs, delta});
                tracked.push_back(L * std::abs(delta));
            } else {
                const double gap = l2_gap(b, n, r);
                rows.push_back({static_cast<double>(n), r, iterate_map(b, b, w.v, 0.0, n), gap});
                tracked.push_back(gap);
            }
        }
    } else if (kind == "prop22") {
        const double beta_hat = p.real("beta_hat");
        const auto law = p.law();
        const double kappa_hat = constants(b).kappa_hat;
        const bool critical = std::abs(beta_hat - kappa_hat) <= 1e-12 * kappa_hat;
        double limit = std::nan("");
        if (critical) {
            limit = 6.0 / (b + 1);
        } else if (beta_hat < kappa_hat) {
            limit = upsilon(b, beta_hat);
        }
        for (const auto& [n, value] : prop22_check(b, beta_hat, grid, law)) {
            rows.push_back({static_cast<double>(n), beta_hat, value, value - limit});
            tracked.push_back(std::abs(value - limit));
        }
    } else if (kind == "lemma36") {
        const double r = p.real("r");
        const int m = static_cast<int>(p.integer("m", 2, 8));
        for (const auto& [n, value] : lemma36_profile(b, r, m, grid, p.law())) {
            rows.push_back({static_cast<double>(n), r, value, value});
            tracked.push_back(std::abs(value));
        }
    } else {
        throw UsageError("--kind must be lemma32, l2gap, prop22 or lemma36");
    }
    Csv csv(ctx.open(p.optional_text("out")), {"n", "r", "value", "residual"});
    for (const auto& row : rows) {
        csv.row({num(static_cast<std::int64_t>(row[0])), num(row[1]), num(row[2]), num(row[3])});
    }
    if (check && !strictly_decreasing(tracked)) {
        ctx.err() << "check failed: " << kind << " residual is not strictly decreasing\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

int cmd_moments(Resolved& p, Context& ctx)
{
    const int b = static_cast<int>(p.integer("b", 2, 64));
    const auto n = p.integer("n", 0, std::int64_t{1} << 40);
    const auto law = p.law();
    const double bt = resolve_beta(p, law, b, b, n);
    const auto steps = p.has("steps") ? p.integer("steps", 0, std::int64_t{1} << 40) : n;
    const int m_max = static_cast<int>(p.integer("m_max", 2, kMaxMomentOrder));
    const auto stride = p.integer("stride", 1, std::int64_t{1} << 40);
    const auto table = moment_recursion(b, bt, law, m_max, steps);
    Csv csv(ctx.open(p.optional_text("out")), {"n", "k", "m", "raw_moment", "centered_moment"});
    for (std::int64_t k = 0; k <= steps; ++k) {
        if (k % stride != 0 && k != steps) {
            continue;
        }
        const auto centered = centered_moments(table, k);
        for (int m = 2; m <= m_max; ++m) {
            csv.row({num(n), num(k), num(static_cast<std::int64_t>(m)), num(table.raw(m, k)),
                     num(centered[static_cast<std::size_t>(m - 2)])});
        }
    }
    return kExitOk;
}

int cmd_identity_check(Resolved& p, Context& ctx)
{
    const auto g = graph(p, 1);
    const int N = static_cast<int>(p.integer("level", 0, g.n));
    const auto law = p.law();
    const double bt = p.real("beta");
    const auto seeds = p.integer("seeds", 1, 1000000);
    const auto seed = p.unsigned64("seed");
    const double tol = p.real("tol");
    g.validate();
    check_recursion_budget(g);
    bool oracle = false;
    try {
        oracle = checked_mul(path_count(g), total_vertex_count(g)) <= 10'000'000;
    } catch (const OutOfRangeError&) {
    }
    Csv csv(ctx.open(p.optional_text("out")),
            {"replicate", "exact", "pathsum", "conditional", "identity_rhs", "rel_error"});
    double worst = 0.0;
    for (std::int64_t i = 0; i < seeds; ++i) {
        const KeyedDisorder omega(law, seed, static_cast<std::uint32_t>(i));
        const double exact = evaluate_exact(g, bt, law, omega);
        double pathsum = std::nan("");
        if (oracle) {
            pathsum = evaluate_pathsum(g, bt, law, omega);
            worst = std::max(worst, std::abs(exact - pathsum) / exact);
        }
        const double lhs = evaluate_conditional(g, bt, law, omega, N);
        auto local = local_partition_functions(g, bt, law, omega, N);
        for (double& w : local.values) {
            w -= 1.0;
        }
        const double rhs = 1.0 + q_map_power(local, N, g.b, g.s);
        const double rel = std::abs(lhs - rhs) / std::abs(lhs);
        worst = std::max(worst, rel);
        csv.row({num(i), num(exact), num(pathsum), num(lhs), num(rhs), num(rel)});
    }
    if (!(worst <= tol)) {
        ctx.err() << "check failed: worst relative error " << num(worst) << " exceeds "
                  << num(tol) << '\n';
        return kExitCheckFailed;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- table

struct Command {
    std::string name;
    std::string description;
    std::string schema;
    std::vector<ParamDef> defs;
    std::function<int(Resolved&, Context&)> run;
};

std::vector<Command> commands()
{
    const ParamDef b{"b", "branching number", "2"};
    const ParamDef s{"s", "segmenting number (defaults to b)", std::nullopt};
    const ParamDef law{"law", "gaussian | rademacher | twopoint:<p>", "gaussian"};
    const ParamDef beta{"beta", "inverse temperature", std::nullopt};
    const ParamDef schedule{"schedule", "closed | exactv: beta_{n,r} instead of --beta", std::nullopt};
    const ParamDef r{"r", "window parameter", "0"};
    const ParamDef replicates{"replicates", "disorder replicates", "1000"};
    const ParamDef seed{"seed", "master seed", "1"};
    const ParamDef arithmetic{"arithmetic", "linear | log", "linear"};
    const ParamDef out = out_def("out", "CSV output file (default stdout)");
    const ParamDef stride{"stride", "emit every stride-th step", "1"};
    const ParamDef check{"check", "compare against exact values; exit 3 on failure", std::nullopt,
                         Kind::Flag};

    return {
        {"graph-info", "Counts for the diamond graph D_n^{b,s}", "",
         {b, s, {"n", "generation", std::nullopt}}, cmd_graph_info},
        {"sample", "Monte Carlo moments of W_n with bootstrap intervals",
         "CSV: replicate,w. JSON summary: mean, raw_moments, central_moments (95% and 99% "
         "percentile intervals), manifest_digest.",
         {b, s, {"n", "generation", std::nullopt}, law, beta, schedule, r, replicates, seed,
          {"resamples", "bootstrap resamples", "2000"}, {"m_max", "highest moment", "4"},
          arithmetic, check, out, out_def("summary", "JSON summary file (default stdout)")},
         cmd_sample},
        {"variance-flow", "Iterate the variance map M_V from 0",
         "CSV: n,r,value,residual with n = step k, value = rho_k and residual = "
         "rho_k - M(rho_{k-1}). Without --v or --beta, V is the critical-window value at (n, r).",
         {b, s, {"n", "window generation (and default step count)", std::nullopt},
          {"steps", "number of steps (defaults to n)", std::nullopt}, r, {"v", "per-vertex variance V", std::nullopt},
          {"beta", "inverse temperature; V = tilt variance", std::nullopt}, law, stride, out},
         cmd_variance_flow},
        {"rfunc", "Limiting variance function R(r)",
         "CSV: n,r,value,residual. For b = s: n = N, value = M^N(V_{N,r}), residual = "
         "(M(value) - next)/next with next the value at r+1. For b < s: n = K, residual = "
         "R(s r/b) - M(R(r)).",
         {b, s, {"r", "comma-separated r values", "0"},
          {"grid", "comma-separated N values", "10000,100000,1000000"},
          {"depth", "seed depth K for b < s", "50"}, out},
         cmd_rfunc},
        {"asymptotics", "Desk-scale checks of the critical-window asymptotics",
         "CSV: n,r,value,residual. lemma32: value = L rho*/kappa^2, residual = Delta. l2gap: "
         "value = M_v^n(0), residual = gap. prop22: r holds beta_hat, value = scaled variance, "
         "residual = value - limit. lemma36: value = residual = centered moment. With --check "
         "the tracked residual must strictly decrease along the grid.",
         {{"kind", "lemma32 | l2gap | prop22 | lemma36", std::nullopt}, b,
          {"grid", "comma-separated n values", "1000,10000,100000,1000000"}, r,
          {"beta_hat", "beta_hat for prop22", "2"}, {"m", "moment order for lemma36", "4"}, law,
          check, out},
         cmd_asymptotics},
        {"moments", "Exact integer moments from the multinomial recursion",
         "CSV: n,k,m,raw_moment,centered_moment.",
         {b, {"n", "generation (schedule and default step count)", std::nullopt}, law, beta,
          schedule, r, {"steps", "number of steps (defaults to n)", std::nullopt},
          {"m_max", "highest moment", "4"}, stride, out},
         cmd_moments},
        {"identity-check", "Recursion vs path sum and the conditional-expectation identity",
         "CSV: replicate,exact,pathsum,conditional,identity_rhs,rel_error. Exit 3 when the "
         "worst relative error exceeds --tol.",
         {b, s, {"n", "generation", std::nullopt}, {"level", "conditioning generation N", "1"},
          law, {"beta", "inverse temperature", "0.5"}, {"seeds", "replicates", "20"}, seed,
          {"tol", "relative tolerance", "1e-12"}, out},
         cmd_identity_check},
        {"free-energy", "b^{-n} E[log W_n] by Monte Carlo",
         "JSON: estimate, standard_error, manifest_digest.",
         {b, s, {"n", "generation", std::nullopt}, law, {"beta", "inverse temperature", std::nullopt},
          replicates, seed, arithmetic, out_def("summary", "JSON output file (default stdout)")},
         cmd_free_energy},
    };
}

int default_threads()
{
    if (const char* env = std::getenv("DPRE_THREADS"); env && *env) {
        int value = 0;
        const std::string_view text(env);
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || value < 1) {
            throw UsageError("DPRE_THREADS must be a positive integer");
        }
        return value;
    }
    return omp_get_max_threads();
}

} // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    const auto table = commands();
    CLI::App app{"dpre: directed polymers on diamond hierarchical graphs"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    struct Bound {
        CLI::App* sub;
        std::map<std::string, std::string> values;
        std::map<std::string, bool> flags;
        std::map<std::string, CLI::Option*> options;
        std::string config;
        std::string manifest;
        int threads = 0;
        CLI::Option* threads_opt = nullptr;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    for (const auto& cmd : table) {
        auto bnd = std::make_unique<Bound>();
        bnd->sub = app.add_subcommand(cmd.name, cmd.description);
        if (!cmd.schema.empty()) {
            bnd->sub->footer(cmd.schema);
        }
        for (const auto& def : cmd.defs) {
            std::string help = def.help;
            if (def.fallback) {
                help += " [" + *def.fallback + "]";
            }
            if (def.kind == Kind::Flag) {
                bnd->options[def.name] = bnd->sub->add_flag(flag_name(def.name), bnd->flags[def.name], help);
            } else {
                bnd->options[def.name] = bnd->sub->add_option(flag_name(def.name), bnd->values[def.name], help);
            }
        }
        bnd->sub->add_option("--config", bnd->config, "key = value file; flags override it");
        bnd->threads_opt = bnd->sub->add_option("--threads", bnd->threads, "worker threads [DPRE_THREADS]")
                               ->check(CLI::PositiveNumber);
        if (std::any_of(cmd.defs.begin(), cmd.defs.end(), [](const ParamDef& d) { return !d.recorded; })) {
            bnd->sub->add_option("--manifest", bnd->manifest, "manifest path [<first output>.manifest]");
        }
        bound.push_back(std::move(bnd));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    for (std::size_t c = 0; c < table.size(); ++c) {
        auto& bnd = *bound[c];
        if (!bnd.sub->parsed()) {
            continue;
        }
        const auto& cmd = table[c];
        Manifest manifest{cmd.name, version(), {}, {}};
        try {
            std::map<std::string, std::string> values;
            if (!bnd.config.empty()) {
                std::set<std::string> known;
                for (const auto& d : cmd.defs) {
                    known.insert(d.name);
                }
                for (const auto& e : load_config(bnd.config)) {
                    if (!known.count(e.key)) {
                        throw UsageError(bnd.config + ":" + std::to_string(e.line) +
                                         ": unknown key '" + e.key + "'");
                    }
                    values[e.key] = e.value;
                }
            }
            for (const auto& d : cmd.defs) {
                if (bnd.options.at(d.name)->count() > 0) {
                    values[d.name] = d.kind == Kind::Flag ? (bnd.flags[d.name] ? "true" : "false")
                                                          : bnd.values[d.name];
                } else if (!values.count(d.name) && d.fallback) {
                    values[d.name] = *d.fallback;
                }
            }
            const int threads = bnd.threads_opt->count() > 0 ? bnd.threads : default_threads();
            Resolved resolved(cmd.defs, std::move(values), manifest);
            Context ctx(out, err, threads, manifest);
            const int code = cmd.run(resolved, ctx);
            ctx.close();
            if (!manifest.outputs.empty()) {
                const std::string path =
                    bnd.manifest.empty() ? manifest.outputs.front() + ".manifest" : bnd.manifest;
                std::ofstream mf(path, std::ios::binary);
                mf << manifest.render();
                if (!mf) {
                    throw ResourceError("cannot write manifest '" + path + "'");
                }
            }
            return code;
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n\n" << bnd.sub->help();
            return kExitUsage;
        } catch (const ArgumentError& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::exception& e) {
            // Numeric, resource and range failures.
            err << "error: " << e.what() << '\n';
            return kExitNumeric;
        }
    }
    return kExitUsage;
}

} // namespace dpre::cli
