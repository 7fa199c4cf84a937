#include "ifr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ifr/errors.hpp"

namespace ifr::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// Composite Simpson for f over [a, b] with an even number of panels.
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
    panels += panels % 2;
    const double h = (b - a) / static_cast<double>(panels);
    double sum = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) {
        sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    }
    return sum * h / 3.0;
}

// Integral of Q(v)^r e^{-v} over [v_lo, v_hi] with Q the left inverse of the cumulative hazard,
// split where Q changes formula. An infinite upper limit is cut 60 units past the last break.
double quantile_power_integral(const PiecewiseLinearHazard& d, double v_lo, double v_hi, double r,
                               std::size_t panels) {
    std::vector<double> breaks;
    for (std::size_t i = 0; i < d.segment_count(); ++i) breaks.push_back(d.hazard_at_knot(i));
    if (d.terminal()) breaks.push_back(d.hazard_at_segment_end(d.segment_count() - 1));
    if (std::isinf(v_hi)) v_hi = std::max(v_lo, breaks.back()) + 60.0;
    std::vector<double> cuts{v_lo};
    for (double b : breaks) {
        if (b > v_lo && b < v_hi) cuts.push_back(b);
    }
    cuts.push_back(v_hi);
    std::sort(cuts.begin(), cuts.end());

    const auto integrand = [&](double v) {
        const double q = inverse_cumulative_hazard(d, v, Side::left);
        return std::pow(q, r) * std::exp(-v);
    };
    const double total_length = v_hi - v_lo;
    // The fine pass doubles every piece so the Richardson estimate is never vacuous.
    const auto run = [&](std::size_t refine) {
        double sum = 0.0;
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            const double len = cuts[j + 1] - cuts[j];
            if (!(len > 0.0)) continue;
            const auto share = static_cast<std::size_t>(std::ceil(panels * len / total_length));
            // Shift the nodes off the break so Q uses the formula of this piece.
            const double eps = 1e-14 * std::max(1.0, std::abs(cuts[j]));
            sum += simpson(integrand, cuts[j] + eps, cuts[j + 1] - eps,
                           refine * std::max<std::size_t>(share, 8));
        }
        return sum;
    };
    const double coarse = run(1);
    const double fine = run(2);
    const double estimate = std::abs(fine - coarse) / 15.0;
    if (estimate > 1e-9 * (1.0 + std::abs(fine))) {
        throw NonConvergence("quadrature oracle: Richardson check failed", estimate);
    }
    return fine + (fine - coarse) / 15.0;
}

struct Curve {
    std::vector<double> breaks;
    double terminal;
    std::function<double(double)> hazard;  // cumulative hazard, valid below the terminal
    std::function<double(double)> slope;   // hazard rate on the segment starting at x
};

Curve curve_of(const PiecewiseLinearHazard& d) {
    Curve c;
    c.breaks.assign(d.knots().begin(), d.knots().end());
    c.terminal = d.terminal().value_or(kInf);
    if (std::isfinite(c.terminal)) c.breaks.push_back(c.terminal);
    c.hazard = [&d](double x) { return d.cumulative_hazard(x); };
    c.slope = [&d](double x) {
        const auto k = d.knots();
        const auto i = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), x) - k.begin()) - 1;
        return d.rates()[i];
    };
    return c;
}

Curve curve_of(const ScaledExponential& e) {
    if (!(e.c > 0.0) || !(e.a >= 0.0)) throw InvalidArgument("scaled exponential: c > 0, a >= 0");
    Curve c;
    c.breaks = {0.0};
    c.terminal = kInf;
    c.hazard = [e](double x) { return -std::log(e.c) + e.a * x; };
    c.slope = [e](double) { return e.a; };
    return c;
}

int sign_of(double g, double tol) {
    if (g > tol) return 1;
    if (g < -tol) return -1;
    return 0;
}

CrossingPattern crossing(const Curve& f, const Curve& g) {
    std::vector<double> points = f.breaks;
    points.insert(points.end(), g.breaks.begin(), g.breaks.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    CrossingPattern out;
    std::vector<int> raw;
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double x0 = points[j];
        const double x1 = j + 1 < points.size() ? points[j + 1] : kInf;
        const bool f_alive = x0 < f.terminal;
        const bool g_alive = x0 < g.terminal;
        if (!f_alive && !g_alive) break;
        if (f_alive != g_alive) {
            raw.push_back(f_alive ? 1 : -1);
            continue;
        }
        // sign(S_f - S_g) = sign(Lambda_g - Lambda_f), linear on [x0, x1).
        const double hf = f.hazard(x0);
        const double hg = g.hazard(x0);
        const double tol = 1e-12 * (1.0 + std::abs(hf) + std::abs(hg));
        const double g0 = hg - hf;
        const double ds = g.slope(x0) - f.slope(x0);
        double g1;
        if (std::isinf(x1)) {
            g1 = ds == 0.0 ? g0 : std::copysign(kInf, ds);
        } else {
            g1 = g0 + ds * (x1 - x0);
        }
        const int s0 = sign_of(g0, tol);
        const int s1 = sign_of(g1, tol);
        if (s0 == 0 && s1 == 0) {
            out.equality_interval = true;
            continue;
        }
        if (s0 != 0) raw.push_back(s0);
        if (s1 != 0) raw.push_back(s1);
    }
    for (int s : raw) {
        if (out.signs.empty() || out.signs.back() != s) out.signs.push_back(s);
    }
    return out;
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
    std::uint64_t z = seed_ + (counter + 1) * kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

IfrSample random_ifr(std::uint64_t seed, std::size_t n_segments) {
    if (n_segments == 0) throw InvalidArgument("random_ifr: need at least one segment");
    const CounterRng rng(seed);
    const bool has_terminal = rng.uniform(0) < 0.5;
    const bool zero_start = (n_segments > 1 || has_terminal) && rng.uniform(1) < 0.25;
    std::vector<double> knots(n_segments, 0.0);
    std::vector<double> rates(n_segments, 0.0);
    double x = 0.0;
    double rate = 0.0;
    for (std::size_t i = 0; i < n_segments; ++i) {
        knots[i] = x;
        x += 0.05 + rng.uniform(2 + 2 * i);
        rate += (i == 0 && zero_start) ? 0.0 : 0.001 + 2.0 * rng.uniform(3 + 2 * i);
        rates[i] = rate;
    }
    std::optional<double> terminal;
    if (has_terminal) terminal = x;
    const PiecewiseLinearHazard raw(std::move(knots), std::move(rates), terminal);
    auto d = scale(raw, 1.0 / mean(raw));
    const double mu2 = moment(d, 2.0);
    return {seed, n_segments, std::move(d), mu2};
}

IfrSample random_interior_ifr(std::uint64_t seed, std::size_t n_segments, double margin) {
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        auto s = random_ifr(seed + attempt * kGamma, n_segments);
        if (s.mu2 >= 1.0 + margin && s.mu2 <= 2.0 - margin) return s;
    }
    throw NonConvergence("random_interior_ifr: no interior draw in 64 attempts", 0.0);
}

double rvar_by_quadrature(const PiecewiseLinearHazard& d, double alpha, double beta,
                          std::size_t panels) {
    if (!(alpha >= 0.0 && beta <= 1.0 && alpha < beta)) {
        throw InvalidArgument("rvar_by_quadrature: requires 0 <= alpha < beta <= 1");
    }
    const double v_lo = -std::log1p(-alpha);
    const double v_hi = beta == 1.0 ? kInf : -std::log1p(-beta);
    return quantile_power_integral(d, v_lo, v_hi, 1.0, panels) / (beta - alpha);
}

double moment_by_quadrature(const PiecewiseLinearHazard& d, double r, std::size_t panels) {
    if (!(r > 0.0)) throw InvalidArgument("moment_by_quadrature: order must be positive");
    return quantile_power_integral(d, 0.0, kInf, r, panels);
}

CrossingPattern crossing_pattern(const PiecewiseLinearHazard& f, const PiecewiseLinearHazard& g) {
    return crossing(curve_of(f), curve_of(g));
}

CrossingPattern crossing_pattern(const PiecewiseLinearHazard& f, const ScaledExponential& g) {
    return crossing(curve_of(f), curve_of(g));
}

namespace {

SuiteResult named_suite(std::string name) {
    SuiteResult s;
    s.name = std::move(name);
    return s;
}

void record(SuiteResult& s, double margin, double slack, std::uint64_t seed) {
    ++s.checks;
    s.worst_margin = std::min(s.worst_margin, margin);
    if (margin < -slack || std::isnan(margin)) {
        ++s.violations;
        if (!s.first_offending_seed) s.first_offending_seed = seed;
    }
}

}  // namespace

std::vector<SuiteResult> run_envelope_suites(std::span<const IfrSample> samples,
                                             const EnvelopeConfig& cfg) {
    SuiteResult gate = named_suite("ifr_gate");
    SuiteResult surv = named_suite("survival_envelope");
    SuiteResult mean_rvar = named_suite("rvar_mean_envelope");
    SuiteResult mv_rvar = named_suite("rvar_meanvar_envelope");
    SuiteResult stop = named_suite("stoploss_envelope");
    SuiteResult quad = named_suite("quadrature_agreement");

    std::vector<std::pair<double, double>> pairs;
    for (double a : cfg.alphas) {
        for (double b : cfg.betas) {
            if (a < b) pairs.emplace_back(a, b);
        }
    }

    for (const auto& s : samples) {
        const auto& d = s.distribution;
        const double m1 = mean(d);
        const bool ok = is_ifr(d) && std::abs(m1 - 1.0) <= 1e-9;
        record(gate, ok ? 0.0 : -1.0, 0.0, s.seed);
        if (!ok) continue;

        for (std::size_t i = 1; i <= cfg.survival_points; ++i) {
            const double t = 5.0 * static_cast<double>(i) / static_cast<double>(cfg.survival_points);
            record(surv, survival(d, t) - lower_survival_bound(t), cfg.survival_slack, s.seed);
            record(surv, upper_survival_bound(t) - survival_left(d, t), cfg.survival_slack, s.seed);
        }

        for (const auto& [a, b] : pairs) {
            const double v = rvar(d, a, b);
            record(mean_rvar, sup_rvar_mean(a, b, 1.0, cfg.search).value - v, cfg.mean_slack, s.seed);
            record(mean_rvar, v - inf_rvar_mean(a, b).value, cfg.mean_slack, s.seed);
        }

        const auto degeneracy = classify_second_moment(s.mu2);
        if (degeneracy == Degeneracy::none) {
            const auto fam = cached_families(s.mu2, cfg.search.grid_points);
            for (const auto& [a, b] : pairs) {
                const double v = rvar(d, a, b);
                record(mv_rvar, sup_rvar_meanvar(a, b, *fam, cfg.search).value - v,
                       cfg.meanvar_slack, s.seed);
                record(mv_rvar, v - inf_rvar_meanvar(a, b, *fam, cfg.search).value,
                       cfg.meanvar_slack, s.seed);
            }
        }

        for (double t : cfg.retentions) {
            const double v = stop_loss(d, t);
            const auto sl = stoploss_bounds_mean(t);
            record(stop, sl.sup.value - v, cfg.mean_slack, s.seed);
            record(stop, v - sl.inf.value, cfg.mean_slack, s.seed);
        }

        for (const auto& [a, b] : {std::pair{0.1, 0.5}, std::pair{0.5, 0.95}, std::pair{0.9, 1.0}}) {
            const double err = std::abs(rvar(d, a, b) - rvar_by_quadrature(d, a, b));
            record(quad, cfg.quadrature_tolerance - err, 0.0, s.seed);
        }
        for (double r : {1.0, 2.0}) {
            const double err = std::abs(moment(d, r) - moment_by_quadrature(d, r));
            record(quad, cfg.quadrature_tolerance - err, 0.0, s.seed);
        }
    }
    return {gate, surv, mean_rvar, mv_rvar, stop, quad};
}

}  // namespace ifr::oracle
