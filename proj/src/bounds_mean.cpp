#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "bounds_detail.hpp"
#include "ifr/bounds.hpp"
#include "ifr/errors.hpp"
#include "ifr/numerics.hpp"

namespace ifr {

using detail::bracket_spread;
using detail::exact;

namespace {

void require_open_level(double alpha, const char* who) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument(std::string(who) + ": alpha must lie in (0, 1)");
    }
}

void require_levels(double alpha, double beta, const char* who) {
    if (!(alpha >= 0.0 && beta <= 1.0 && alpha < beta)) {
        throw InvalidArgument(std::string(who) + ": requires 0 <= alpha < beta <= 1");
    }
}

void require_mean(double mean) {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw InvalidArgument("mean must be positive");
}

// Mean-one r-th moment analogue of the upper survival envelope: the rate w of the truncated
// exponential on [0, t) whose r-th moment is one.
double rth_truncated_rate(double t, double r) {
    if (t <= 1.0) return 0.0;
    const double g = boost::math::tgamma(r + 1.0);
    const auto moment_at = [&](double w) {
        if (w == 0.0) return std::pow(t, r);
        return g * boost::math::gamma_p(r, w * t) / std::pow(w, r);
    };
    return numerics::bisect_root([&](double w) { return moment_at(w) - 1.0; }, 0.0,
                                 std::pow(g, 1.0 / r))
        .x;
}

}  // namespace

PiecewiseLinearHazard BoundResult::attaining_distribution() const {
    return scale == 1.0 ? member.distribution : ifr::scale(member.distribution, scale);
}

double upper_survival_bound(double t) {
    if (std::isnan(t)) throw InvalidArgument("upper_survival_bound: NaN");
    if (t <= 1.0) return 1.0;
    return 1.0 - solve_w_for_t(t);
}

double lower_survival_bound(double t) {
    if (std::isnan(t)) throw InvalidArgument("lower_survival_bound: NaN");
    if (t < 0.0) return 1.0;
    return t < 1.0 ? std::exp(-t) : 0.0;
}

BoundResult sup_var_mean(double alpha, const MomentConstraint& c) {
    require_open_level(alpha, "sup_var_mean");
    c.validate();
    if (!c.moment_order) {
        const auto m = fstar_member(alpha);
        return exact(Direction::sup, m.parameter("t"), m, c.mean);
    }
    const double r = *c.moment_order;
    const double scale = std::pow(*c.moment_value, 1.0 / r);
    // Solve e^{-w(t) t} = 1 - alpha for t > 1.
    const double target = -std::log1p(-alpha);
    const auto excess = [&](double t) { return rth_truncated_rate(t, r) * t - target; };
    double hi = 2.0;
    while (excess(hi) < 0.0) hi *= 2.0;
    const auto root = numerics::bisect_root(excess, 1.0, hi);
    const double t = root.x;
    const double w = rth_truncated_rate(t, r);
    CalibratedMember m{FamilyTag::fstar,
                       {{"w", w}, {"t", t}, {"r", r}},
                       PiecewiseLinearHazard::truncated_exponential(w, t),
                       {}};
    m.residuals.push_back({"rth_moment", moment(m.distribution, r) - 1.0});
    BoundResult res = exact(Direction::sup, t, std::move(m), scale);
    res.trace.iterations = root.iterations;
    res.trace.bracket_width = root.bracket_width;
    res.tolerance = std::max(res.tolerance, scale * 4.0 * root.bracket_width);
    return res;
}

BoundResult inf_var_mean(double alpha, const MomentConstraint& c) {
    require_open_level(alpha, "inf_var_mean");
    c.validate();
    const double v = -std::log1p(-alpha);
    if (!c.moment_order) {
        if (v < 1.0) return exact(Direction::inf, v, exp1_member(), c.mean);
        return exact(Direction::inf, 1.0, dirac1_member(), c.mean);
    }
    const double r = *c.moment_order;
    if (r < 1.0) throw InvalidArgument("inf_var_mean: the lower bound needs r >= 1");
    const double scale = std::pow(*c.moment_value, 1.0 / r);
    // Exponential with E[X^r] = 1 has scale theta = Gamma(r + 1)^{-1/r}.
    const double theta = std::pow(boost::math::tgamma(r + 1.0), -1.0 / r);
    if (theta * v < 1.0) {
        CalibratedMember m{FamilyTag::exp1,
                           {{"rate", 1.0 / theta}, {"r", r}},
                           PiecewiseLinearHazard::exponential(1.0 / theta),
                           {}};
        m.residuals.push_back({"rth_moment", moment(m.distribution, r) - 1.0});
        return exact(Direction::inf, theta * v, std::move(m), scale);
    }
    CalibratedMember m{FamilyTag::dirac1, {{"r", r}}, PiecewiseLinearHazard::dirac(1.0), {}};
    m.residuals.push_back({"rth_moment", 0.0});
    return exact(Direction::inf, 1.0, std::move(m), scale);
}

VarBounds var_bounds_mean(double alpha, const MomentConstraint& c) {
    auto sup = sup_var_mean(alpha, c);
    auto inf = inf_var_mean(alpha, c);
    return {inf, sup, inf, sup};
}

BoundPair coherent_bounds_mean(const Distortion& h, double mean) {
    require_mean(mean);
    if (!h.is_concave()) {
        throw InvalidArgument("coherent_bounds_mean: distortion " + h.name() + " is not concave");
    }
    const auto e = exp1_member();
    BoundResult sup = exact(Direction::sup, distortion_value(e.distribution, h), e, mean);
    sup.tolerance = 1e-10 * std::max(1.0, std::abs(sup.value));
    return {exact(Direction::inf, 1.0, dirac1_member(), mean), sup};
}

BoundResult sup_rvar_mean(double alpha, double beta, double mean, const SearchOptions& opts) {
    require_levels(alpha, beta, "sup_rvar_mean");
    require_mean(mean);
    if (beta == 1.0) {
        if (alpha == 1.0) throw InvalidArgument("sup_rvar_mean: alpha must be below 1");
        return exact(Direction::sup, 1.0 - std::log1p(-alpha), fstar_member(1.0), mean);
    }
    // RVaR of the truncated exponential with rate w, for w in [alpha, beta].
    const auto g = [alpha, beta](double w) {
        if (w == 0.0) return 1.0;
        const double num =
            (1.0 - beta) * std::log1p(-w) - (1.0 - alpha) * std::log1p(-alpha) + w - alpha;
        return num / (w * (beta - alpha));
    };
    const std::size_t points = std::clamp<std::size_t>(opts.grid_points / 4, 8, 1024);
    const auto best = numerics::grid_extremum(g, alpha, beta, points, Direction::sup,
                                              opts.refine_tol);
    BoundResult r = exact(Direction::sup, best.value, fstar_member(best.x), mean);
    r.trace = {points, best.iterations, best.bracket_width};
    r.tolerance = mean * (bracket_spread(g, best, alpha, beta) + 1e-14);
    return r;
}

BoundResult inf_rvar_mean(double alpha, double beta, double mean) {
    require_levels(alpha, beta, "inf_rvar_mean");
    require_mean(mean);
    if (beta == 1.0) return exact(Direction::inf, 1.0, dirac1_member(), mean);
    const auto xlog = [](double p) { return p == 0.0 ? 0.0 : (1.0 - p) * std::log1p(-p); };
    const double expo = 1.0 + (xlog(beta) - xlog(alpha)) / (beta - alpha);
    if (expo < 1.0) return exact(Direction::inf, expo, exp1_member(), mean);
    return exact(Direction::inf, 1.0, dirac1_member(), mean);
}

BoundPair stoploss_bounds_mean(double retention, double mean) {
    require_mean(mean);
    if (!(retention >= 0.0)) throw InvalidArgument("stop-loss retention must be nonnegative");
    const double t = retention / mean;
    return {exact(Direction::inf, std::max(1.0 - t, 0.0), dirac1_member(), mean),
            exact(Direction::sup, std::exp(-t), exp1_member(), mean)};
}

BoundResult sup_stoploss_via_tvar_mean(double retention, double mean, const SearchOptions& opts) {
    require_mean(mean);
    if (!(retention >= 0.0)) throw InvalidArgument("stop-loss retention must be nonnegative");
    const double t = retention / mean;
    const auto f = [t](double a) {
        return a < 1.0 ? (1.0 - a) * (1.0 - std::log1p(-a) - t) : 0.0;
    };
    const std::size_t points = std::clamp<std::size_t>(opts.grid_points / 4, 8, 1024);
    const auto best = numerics::grid_extremum(f, 0.0, 1.0, points, Direction::sup,
                                              opts.refine_tol);
    BoundResult r = exact(Direction::sup, best.value, exp1_member(), mean);
    r.member.parameters.push_back({"alpha", best.x});
    r.trace = {points, best.iterations, best.bracket_width};
    r.tolerance = mean * (bracket_spread(f, best, 0.0, 1.0) + 1e-14);
    return r;
}

BoundPair limited_loss_bounds_mean(double retention, double mean) {
    auto sl = stoploss_bounds_mean(retention, mean);
    BoundResult sup = sl.inf;
    BoundResult inf = sl.sup;
    sup.direction = Direction::sup;
    sup.value = mean - sl.inf.value;
    inf.direction = Direction::inf;
    inf.value = mean - sl.sup.value;
    return {inf, sup};
}

}  // namespace ifr
