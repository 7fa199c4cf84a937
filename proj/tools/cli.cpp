#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifr/bounds.hpp"
#include "ifr/distortion.hpp"
#include "ifr/errors.hpp"
#include "ifr/oracle.hpp"
#include "ifr/risk_spec.hpp"
#include "ifr/serialization.hpp"

namespace ifr::cli {

namespace {

using nlohmann::json;

struct RunConfig {
    std::string command;

    std::optional<double> mean;
    std::optional<double> mu2;
    std::optional<double> r;
    std::optional<double> mu_r;

    std::string measure;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> retention;
    std::optional<std::string> distortion;
    std::optional<std::string> distortion_table;
    bool sup = false;
    bool inf = false;

    std::size_t grid_size = 256;
    double refine_tol = 1e-10;

    std::string format;
    std::optional<std::string> output;
    int precision = 9;

    std::string sweep_var;
    double from = 0.0;
    double to = 0.0;
    double step = 0.0;

    std::optional<std::size_t> seeds;
    std::uint64_t first_seed = 0;
    std::optional<std::string> corpus;
};

// ---------------------------------------------------------------------------------------------
// Formatting

std::string format_number(double v, int precision) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

json json_number(double v, int precision) {
    if (!std::isfinite(v)) return format_number(v, precision);
    return std::stod(format_number(v, precision));
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string join_named(const std::vector<NamedValue>& values, int precision) {
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ';';
        out += v.name + "=" + format_number(v.value, precision);
    }
    return out;
}

json named_object(const std::vector<NamedValue>& values, int precision) {
    json j = json::object();
    for (const auto& v : values) j[v.name] = json_number(v.value, precision);
    return j;
}

// ---------------------------------------------------------------------------------------------
// Validation

[[noreturn]] void flag_error(const std::string& message) { throw InvalidArgument(message); }

void require_unset(const std::optional<double>& v, const char* flag, const std::string& measure) {
    if (v) flag_error(std::string(flag) + " does not apply to --measure " + measure);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',' || c == ' ' || c == '\t' || c == ';') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

Distortion load_distortion_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) flag_error("--distortion-table: cannot open " + path);
    std::vector<double> u;
    std::vector<double> h;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        try {
            if (fields.size() != 2) throw std::invalid_argument("expected two columns");
            u.push_back(std::stod(fields[0]));
            h.push_back(std::stod(fields[1]));
        } catch (const std::exception&) {
            flag_error("--distortion-table: malformed line " + std::to_string(lineno) + " in " +
                       path);
        }
    }
    return Distortion::tabulated(std::move(u), std::move(h));
}

RiskSpec build_spec(const RunConfig& c) {
    const std::string& m = c.measure;
    if (m.empty()) flag_error("--measure is required");
    const bool level_measure = m == "var" || m == "var-plus" || m == "rvar" || m == "tvar";
    if (c.beta && !c.alpha) flag_error("--beta requires --alpha");
    if (level_measure) {
        if (!c.alpha) flag_error("--alpha is required for --measure " + m);
        require_unset(c.retention, "--retention", m);
        if (c.distortion || c.distortion_table) {
            flag_error("--distortion does not apply to --measure " + m);
        }
    }
    RiskSpec spec;
    if (m == "var" || m == "var-plus") {
        require_unset(c.beta, "--beta", m);
        spec = RiskSpec::value_at_risk(*c.alpha, m == "var" ? Side::left : Side::right);
    } else if (m == "rvar") {
        if (!c.beta) flag_error("--beta is required for --measure rvar");
        spec = RiskSpec::range_value_at_risk(*c.alpha, *c.beta);
    } else if (m == "tvar") {
        require_unset(c.beta, "--beta", m);
        spec = RiskSpec::tail_value_at_risk(*c.alpha);
    } else if (m == "distortion") {
        require_unset(c.alpha, "--alpha", m);
        require_unset(c.retention, "--retention", m);
        if (c.distortion.has_value() == c.distortion_table.has_value()) {
            flag_error("--measure distortion needs exactly one of --distortion, --distortion-table");
        }
        spec = RiskSpec::distortion_measure(c.distortion ? parse_distortion(*c.distortion)
                                                         : load_distortion_table(*c.distortion_table));
    } else if (m == "stoploss" || m == "limitedloss") {
        require_unset(c.alpha, "--alpha", m);
        if (c.distortion || c.distortion_table) {
            flag_error("--distortion does not apply to --measure " + m);
        }
        if (!c.retention) flag_error("--retention is required for --measure " + m);
        spec = m == "stoploss" ? RiskSpec::stop_loss_premium(*c.retention)
                               : RiskSpec::limited_loss_premium(*c.retention);
    } else {
        flag_error("--measure: unknown measure '" + m + "'");
    }
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        flag_error(std::string("--alpha/--beta/--retention: ") + e.what());
    }
    return spec;
}

MomentConstraint build_constraint(const RunConfig& c) {
    if (c.r || c.mu_r) {
        if (!c.r || !c.mu_r) flag_error("--r and --mu-r must be given together");
        if (c.mean || c.mu2) flag_error("--r/--mu-r cannot be combined with --mean or --mu2");
        auto rc = MomentConstraint::rth_moment(*c.r, *c.mu_r);
        rc.validate();
        return rc;
    }
    if (!c.mean) flag_error(c.mu2 ? "--mu2 requires --mean" : "--mean is required");
    if (!(*c.mean > 0.0)) flag_error("--mean must be positive");
    if (c.mu2) {
        if (!(*c.mu2 > 0.0)) flag_error("--mu2 must be positive");
        return MomentConstraint::mean_variance(*c.mean, *c.mu2);
    }
    return MomentConstraint::mean_only(*c.mean);
}

SearchOptions build_search(const RunConfig& c) {
    if (c.grid_size < 2) flag_error("--grid-size must be at least 2");
    if (!(c.refine_tol > 0.0)) flag_error("--refine-tol must be positive");
    return {c.grid_size, c.refine_tol};
}

std::vector<Direction> directions(const RunConfig& c) {
    if (c.sup && !c.inf) return {Direction::sup};
    if (c.inf && !c.sup) return {Direction::inf};
    return {Direction::sup, Direction::inf};
}

// ---------------------------------------------------------------------------------------------
// Output sink

class Sink {
public:
    Sink(const RunConfig& c, std::ostream& out) : out_(&out) {
        if (!c.output) return;
        std::filesystem::path path(*c.output);
        if (path.is_relative()) {
            if (const char* dir = std::getenv("IFR_BOUNDS_OUTPUT_DIR"); dir && *dir) {
                path = std::filesystem::path(dir) / path;
            }
        }
        if (path.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(path.parent_path(), ec);
        }
        file_.open(path, std::ios::binary | std::ios::trunc);
        if (!file_) flag_error("--output: cannot open " + path.string());
        out_ = &file_;
    }

    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

// ---------------------------------------------------------------------------------------------
// Commands

int cmd_bound(const RunConfig& c, std::ostream& out) {
    const auto spec = build_spec(c);
    const auto constraint = build_constraint(c);
    const auto opts = build_search(c);
    std::vector<BoundResult> results;
    for (auto dir : directions(c)) results.push_back(bound(spec, constraint, dir, opts));

    Sink sink(c, out);
    auto& os = sink.stream();
    const int p = c.precision;
    if (c.format == "csv") {
        os << "measure,direction,value,attaining_family,scale,parameters,residuals,tolerance\n";
        for (const auto& r : results) {
            os << c.measure << ',' << to_string(r.direction) << ',' << format_number(r.value, p)
               << ',' << to_string(r.member.tag) << ',' << format_number(r.scale, p) << ','
               << csv_field(join_named(r.member.parameters, p)) << ','
               << csv_field(join_named(r.member.residuals, p)) << ','
               << format_number(r.tolerance, p) << '\n';
        }
    } else {
        for (const auto& r : results) {
            json j;
            j["measure"] = c.measure;
            j["direction"] = to_string(r.direction);
            j["value"] = json_number(r.value, p);
            j["attaining_family"] = to_string(r.member.tag);
            j["scale"] = json_number(r.scale, p);
            j["parameters"] = named_object(r.member.parameters, p);
            j["residuals"] = named_object(r.member.residuals, p);
            j["tolerance"] = json_number(r.tolerance, p);
            os << j.dump() << '\n';
        }
    }
    return kOk;
}

struct SweepRow {
    double x = 0.0;
    BoundResult sup;
    BoundResult inf;
    std::exception_ptr error;
};

std::optional<double>& swept_field(RunConfig& c, const std::string& var) {
    if (var == "alpha") return c.alpha;
    if (var == "beta") return c.beta;
    if (var == "mu2") return c.mu2;
    if (var == "retention") return c.retention;
    flag_error("--sweep-var must be one of alpha, beta, mu2, retention");
}

// Runs body(i) for i in [0, n) on a small thread pool.
template <class Body>
void parallel_for(std::size_t n, Body body) {
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
    if (c.sweep_var.empty()) flag_error("--sweep-var is required");
    RunConfig base = c;
    auto& field = swept_field(base, c.sweep_var);
    if (field) flag_error("--" + c.sweep_var + " conflicts with --sweep-var " + c.sweep_var);
    if (!(c.step > 0.0) || !(c.to >= c.from) || !std::isfinite(c.to - c.from)) {
        flag_error("--from/--to/--step: empty range");
    }
    const auto n = static_cast<std::size_t>(std::floor((c.to - c.from) / c.step + 1e-9)) + 1;
    if (n > 1000000) flag_error("--from/--to/--step: more than 10^6 rows");

    // Validate the flag combination once before fanning out.
    field = c.from;
    (void)build_spec(base);
    (void)build_constraint(base);
    const auto opts = build_search(base);

    std::vector<SweepRow> rows(n);
    parallel_for(n, [&](std::size_t i) {
        RunConfig rc = base;
        const double x = c.from + static_cast<double>(i) * c.step;
        swept_field(rc, c.sweep_var) = x;
        rows[i].x = x;
        try {
            const auto spec = build_spec(rc);
            const auto constraint = build_constraint(rc);
            rows[i].sup = bound(spec, constraint, Direction::sup, opts);
            rows[i].inf = bound(spec, constraint, Direction::inf, opts);
        } catch (...) {
            rows[i].error = std::current_exception();
        }
    });
    for (const auto& row : rows) {
        if (row.error) std::rethrow_exception(row.error);
    }

    Sink sink(c, out);
    auto& os = sink.stream();
    const int p = c.precision;
    if (c.format == "csv") {
        os << c.sweep_var << ",sup,inf,sup_family,inf_family\n";
        for (const auto& row : rows) {
            os << format_number(row.x, p) << ',' << format_number(row.sup.value, p) << ','
               << format_number(row.inf.value, p) << ',' << to_string(row.sup.member.tag) << ','
               << to_string(row.inf.member.tag) << '\n';
        }
    } else {
        for (const auto& row : rows) {
            json j;
            j[c.sweep_var] = json_number(row.x, p);
            j["sup"] = json_number(row.sup.value, p);
            j["inf"] = json_number(row.inf.value, p);
            j["sup_family"] = to_string(row.sup.member.tag);
            j["inf_family"] = to_string(row.inf.member.tag);
            os << j.dump() << '\n';
        }
    }
    return kOk;
}

json sample_record(const oracle::IfrSample& s) {
    json j;
    j["seed"] = s.seed;
    j["n_segments"] = s.n_segments;
    j["mu2"] = s.mu2;
    j["hazard"] = hazard_to_json(s.distribution);
    return j;
}

std::vector<oracle::IfrSample> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) flag_error("--corpus: cannot open " + path);
    std::vector<oracle::IfrSample> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            auto d = hazard_from_json(j.at("hazard"));
            const auto seed = j.at("seed").get<std::uint64_t>();
            const double mu2 = moment(d, 2.0);
            samples.push_back({seed, d.segment_count(), std::move(d), mu2});
        } catch (const std::exception& e) {
            flag_error("--corpus: line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return samples;
}

std::vector<oracle::SuiteResult> run_suites_parallel(const std::vector<oracle::IfrSample>& samples,
                                                     const oracle::EnvelopeConfig& cfg) {
    constexpr std::size_t kChunk = 16;
    const std::size_t chunks = (samples.size() + kChunk - 1) / kChunk;
    std::vector<std::vector<oracle::SuiteResult>> partial(chunks);
    std::vector<std::exception_ptr> errors(chunks);
    parallel_for(chunks, [&](std::size_t k) {
        const std::size_t lo = k * kChunk;
        const std::size_t hi = std::min(samples.size(), lo + kChunk);
        try {
            partial[k] = oracle::run_envelope_suites(
                std::span<const oracle::IfrSample>(samples.data() + lo, hi - lo), cfg);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    });
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<oracle::SuiteResult> merged = partial.front();
    for (std::size_t k = 1; k < chunks; ++k) {
        for (std::size_t s = 0; s < merged.size(); ++s) {
            const auto& part = partial[k][s];
            merged[s].checks += part.checks;
            merged[s].violations += part.violations;
            merged[s].worst_margin = std::min(merged[s].worst_margin, part.worst_margin);
            if (!merged[s].first_offending_seed) {
                merged[s].first_offending_seed = part.first_offending_seed;
            }
        }
    }
    return merged;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
    oracle::EnvelopeConfig cfg;
    cfg.search = build_search(c);

    std::vector<oracle::IfrSample> samples;
    if (c.corpus) {
        if (c.seeds) flag_error("--seeds cannot be combined with --corpus");
        samples = load_corpus(*c.corpus);
        if (samples.empty()) flag_error("--corpus: no samples in " + *c.corpus);
    } else {
        const std::size_t n = c.seeds.value_or(500);
        if (n == 0) flag_error("--seeds must be positive");
        samples.resize(n, oracle::random_ifr(0, 1));
        parallel_for(n, [&](std::size_t i) {
            const std::uint64_t seed = c.first_seed + i;
            samples[i] = oracle::random_interior_ifr(seed, oracle::default_segment_count(seed));
        });
    }

    const auto results = run_suites_parallel(samples, cfg);
    Sink sink(c, out);
    auto& os = sink.stream();
    const int p = c.precision;
    bool all_passed = true;
    if (c.format == "json") {
        for (const auto& r : results) {
            json j;
            j["suite"] = r.name;
            j["checks"] = r.checks;
            j["violations"] = r.violations;
            j["worst_margin"] = json_number(r.worst_margin, p);
            j["status"] = r.passed() ? "PASS" : "FAIL";
            os << j.dump() << '\n';
        }
    } else {
        os << "suite,checks,violations,worst_margin,status\n";
        for (const auto& r : results) {
            os << r.name << ',' << r.checks << ',' << r.violations << ','
               << format_number(r.worst_margin, p) << ',' << (r.passed() ? "PASS" : "FAIL")
               << '\n';
        }
    }
    for (const auto& r : results) {
        if (r.passed()) continue;
        all_passed = false;
        const auto it = std::find_if(samples.begin(), samples.end(), [&](const auto& s) {
            return s.seed == *r.first_offending_seed;
        });
        err << "envelope violation in " << r.name << "; offending sample:\n"
            << (it != samples.end() ? sample_record(*it).dump() : "{}") << '\n';
    }
    return all_passed ? kOk : kEnvelopeViolation;
}

int cmd_corpus(const RunConfig& c, std::ostream& out) {
    const std::size_t n = c.seeds.value_or(500);
    if (n == 0) flag_error("--seeds must be positive");
    std::vector<oracle::IfrSample> samples(n, oracle::random_ifr(0, 1));
    parallel_for(n, [&](std::size_t i) {
        const std::uint64_t seed = c.first_seed + i;
        samples[i] = oracle::random_ifr(seed, oracle::default_segment_count(seed));
    });
    Sink sink(c, out);
    // Full precision so that other implementations can reproduce the corpus bit for bit.
    for (const auto& s : samples) sink.stream() << sample_record(s).dump() << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------------------------
// Argument wiring

void add_output_options(CLI::App* app, RunConfig& c, const char* default_format) {
    app->add_option("--format", c.format, std::string("Output format [") + default_format + "]")
        ->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--output", c.output,
                    "Output file; relative paths resolve against $IFR_BOUNDS_OUTPUT_DIR");
    app->add_option("--precision", c.precision, "Significant digits")
        ->check(CLI::Range(6, 17))
        ->capture_default_str();
}

void add_search_options(CLI::App* app, RunConfig& c) {
    app->add_option("--grid-size", c.grid_size, "Grid points per family sweep")
        ->capture_default_str();
    app->add_option("--refine-tol", c.refine_tol, "Parameter tolerance of the local refinement")
        ->capture_default_str();
}

void add_problem_options(CLI::App* app, RunConfig& c) {
    app->add_option("--measure", c.measure, "Risk measure")
        ->check(CLI::IsMember(
            {"var", "var-plus", "rvar", "tvar", "distortion", "stoploss", "limitedloss"}));
    app->add_option("--alpha", c.alpha, "Lower level");
    app->add_option("--beta", c.beta, "Upper level (rvar)");
    app->add_option("--retention", c.retention, "Retention t (stoploss, limitedloss)");
    auto* dist = app->add_option("--distortion", c.distortion,
                                 "tvar:<alpha> | proportional-hazard:<c> | power:<c> | identity");
    auto* table = app->add_option("--distortion-table", c.distortion_table,
                                  "File of 'u h' rows for a tabulated distortion");
    dist->excludes(table);
    app->add_option("--mean", c.mean, "Mean");
    app->add_option("--mu2", c.mu2, "Second moment E[X^2]");
    app->add_option("--r", c.r, "Moment order for an r-th moment constraint");
    app->add_option("--mu-r", c.mu_r, "Value of E[X^r]");
    auto* sup = app->add_flag("--sup", c.sup, "Worst case only");
    auto* inf = app->add_flag("--inf", c.inf, "Best case only");
    sup->excludes(inf);
    add_search_options(app, c);
}

int dispatch(RunConfig c, std::ostream& out, std::ostream& err) {
    if (c.format.empty()) c.format = c.command == "bound" ? "json" : "csv";
    if (c.command == "bound") return cmd_bound(c, out);
    if (c.command == "sweep") return cmd_sweep(c, out);
    if (c.command == "verify") return cmd_verify(c, out, err);
    return cmd_corpus(c, out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Worst- and best-case risk bounds over IFR distributions with moment constraints",
                 "ifr-bounds"};
    app.require_subcommand(1);

    auto* bound_cmd = app.add_subcommand("bound", "Compute one bound");
    add_problem_options(bound_cmd, c);
    add_output_options(bound_cmd, c, "json");

    auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate sup and inf over one variable");
    add_problem_options(sweep_cmd, c);
    add_output_options(sweep_cmd, c, "csv");
    sweep_cmd->add_option("--sweep-var", c.sweep_var, "alpha | beta | mu2 | retention")
        ->required();
    sweep_cmd->add_option("--from", c.from, "First value")->required();
    sweep_cmd->add_option("--to", c.to, "Last value")->required();
    sweep_cmd->add_option("--step", c.step, "Increment")->required();

    auto* verify_cmd = app.add_subcommand("verify", "Run the oracle envelope suites");
    verify_cmd->add_option("--seeds", c.seeds, "Number of generated samples (default 500)");
    verify_cmd->add_option("--first-seed", c.first_seed, "First seed")->capture_default_str();
    verify_cmd->add_option("--corpus", c.corpus, "Newline-delimited sample records to check");
    add_search_options(verify_cmd, c);
    add_output_options(verify_cmd, c, "csv");

    auto* corpus_cmd = app.add_subcommand("corpus", "Write seeded sample records");
    corpus_cmd->add_option("--seeds", c.seeds, "Number of samples (default 500)");
    corpus_cmd->add_option("--first-seed", c.first_seed, "First seed")->capture_default_str();
    corpus_cmd->add_option("--output", c.output,
                           "Output file; relative paths resolve against $IFR_BOUNDS_OUTPUT_DIR");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    for (auto* sub : app.get_subcommands()) c.command = sub->get_name();

    try {
        return dispatch(c, out, err);
    } catch (const Infeasible& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const NonConvergence& e) {
        err << "no convergence: " << e.what() << " (residual " << e.residual() << ")\n";
        return kNonConvergence;
    } catch (const DivergentIntegral& e) {
        err << "divergent: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace ifr::cli
