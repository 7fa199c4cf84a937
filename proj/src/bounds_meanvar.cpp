#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "bounds_detail.hpp"
#include "ifr/bounds.hpp"
#include "ifr/errors.hpp"
#include "ifr/numerics.hpp"

namespace ifr {

using detail::exact;

namespace {

using Functional = std::function<double(const PiecewiseLinearHazard&)>;

BoundResult search_family(const MeanVarianceFamilies& fam, const Functional& f, Direction dir,
                          bool use_g1, const SearchOptions& opts) {
    const auto& grid = use_g1 ? fam.g1_grid() : fam.g2_grid();
    const auto param = [&](std::size_t i) {
        return use_g1 ? fam.g1_grid_parameter(i) : fam.g2_grid_parameter(i);
    };
    const auto member_at = [&](double p) { return use_g1 ? fam.g1_at(p) : fam.g2_at(p); };

    std::size_t best = 0;
    double best_value = f(grid[0].distribution);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = f(grid[i].distribution);
        if (numerics::better(v, best_value, dir)) {
            best = i;
            best_value = v;
        }
    }
    const double lo = param(best == 0 ? 0 : best - 1);
    const double hi = param(std::min(best + 1, grid.size() - 1));
    const auto objective = [&](double p) { return f(member_at(p).distribution); };
    const auto refined = numerics::refine_extremum(objective, lo, hi, dir, opts.refine_tol);

    BoundResult r;
    r.direction = dir;
    r.trace = {grid.size(), refined.iterations, refined.bracket_width};
    if (numerics::better(refined.value, best_value, dir)) {
        r.value = refined.value;
        r.member = member_at(refined.x);
        r.tolerance = detail::bracket_spread(objective, refined, lo, hi);
    } else {
        r.value = best_value;
        r.member = grid[best];
        r.tolerance = std::abs(refined.value - best_value);
    }
    r.tolerance += r.member.max_abs_residual() + 1e-14 * std::max(1.0, std::abs(r.value));
    return r;
}

// Normalizes the constraint, short-circuits the degenerate endpoints and rescales the result.
template <class OnFamilies>
BoundResult with_mean_variance(const MomentConstraint& c, Direction dir, const SearchOptions& opts,
                               const Functional& normalized, OnFamilies&& on_families) {
    c.validate();
    if (!c.second_moment) throw InvalidArgument("a second-moment constraint is required");
    if (c.moment_order) throw InvalidArgument("r-th moment constraints support VaR bounds only");
    const double mu2 = *c.normalized_second_moment();
    switch (classify_second_moment(mu2)) {
        case Degeneracy::dirac: {
            auto m = dirac1_member();
            const double v = normalized(m.distribution);
            return exact(dir, v, std::move(m), c.mean);
        }
        case Degeneracy::exponential: {
            auto m = exp1_member();
            const double v = normalized(m.distribution);
            return exact(dir, v, std::move(m), c.mean);
        }
        case Degeneracy::none: break;
    }
    const auto fam = cached_families(mu2, opts.grid_points);
    BoundResult r = on_families(*fam);
    r.value *= c.mean;
    r.tolerance *= c.mean;
    r.scale = c.mean;
    return r;
}

void require_levels(double alpha, double beta, const char* who) {
    if (!(alpha >= 0.0 && beta <= 1.0 && alpha < beta)) {
        throw InvalidArgument(std::string(who) + ": requires 0 <= alpha < beta <= 1");
    }
}

void require_tail_level(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw InvalidArgument("sup_tvar_meanvar: alpha must lie in [0, 1)");
    }
}

BoundResult sup_stoploss_on_families(double t, const MeanVarianceFamilies& fam,
                                     const SearchOptions& opts) {
    // E[(X - t)_+] = max over a of (1 - a)(TVaR_a - t), so the sup over IFR laws follows
    // from the TVaR supremum.
    const auto f = [&](double a) {
        if (a >= 1.0) return 0.0;
        return (1.0 - a) * (sup_tvar_meanvar(a, fam, opts).value - t);
    };
    constexpr std::size_t points = 33;
    const auto best = numerics::grid_extremum(f, 0.0, 1.0, points, Direction::sup,
                                              std::max(opts.refine_tol, 1e-9));
    BoundResult r;
    r.direction = Direction::sup;
    r.value = best.value;
    if (best.x < 1.0) {
        r.member = sup_tvar_meanvar(best.x, fam, opts).member;
    } else {
        r.member = fam.g1_at(0.0);
    }
    r.member.parameters.push_back({"alpha", best.x});
    r.trace = {points, best.iterations, best.bracket_width};
    r.tolerance = detail::bracket_spread(f, best, 0.0, 1.0) + r.member.max_abs_residual();
    return r;
}

BoundResult inf_stoploss_on_families(double t, const MeanVarianceFamilies& fam,
                                     const SearchOptions& opts) {
    return optimize_over_families(
        fam, [t](const PiecewiseLinearHazard& d) { return stop_loss(d, t); }, Direction::inf,
        FamilySet::both, opts);
}

}  // namespace

BoundResult optimize_over_families(const MeanVarianceFamilies& families, const Functional& f,
                                   Direction dir, FamilySet set, const SearchOptions& opts) {
    if (set == FamilySet::g1) return search_family(families, f, dir, true, opts);
    if (set == FamilySet::g2) return search_family(families, f, dir, false, opts);
    BoundResult a = search_family(families, f, dir, true, opts);
    BoundResult b = search_family(families, f, dir, false, opts);
    const std::size_t grid = a.trace.grid_points + b.trace.grid_points;
    const auto iterations = a.trace.iterations + b.trace.iterations;
    BoundResult& winner = numerics::better(b.value, a.value, dir) ? b : a;
    winner.trace.grid_points = grid;
    winner.trace.iterations = iterations;
    return winner;
}

std::shared_ptr<const MeanVarianceFamilies> cached_families(double mu2, std::size_t grid_points) {
    static std::mutex mutex;
    static std::map<std::pair<double, std::size_t>, std::shared_ptr<const MeanVarianceFamilies>>
        cache;
    const auto key = std::make_pair(mu2, grid_points);
    {
        std::lock_guard lock(mutex);
        if (const auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto fam = std::make_shared<const MeanVarianceFamilies>(mu2, grid_points);
    std::lock_guard lock(mutex);
    if (cache.size() >= 64) cache.clear();
    return cache.emplace(key, std::move(fam)).first->second;
}

BoundResult sup_tvar_meanvar(double alpha, const MeanVarianceFamilies& families,
                             const SearchOptions& opts) {
    require_tail_level(alpha);
    return optimize_over_families(
        families, [alpha](const PiecewiseLinearHazard& d) { return tvar(d, alpha); },
        Direction::sup, FamilySet::g1, opts);
}

BoundResult sup_rvar_meanvar(double alpha, double beta, const MeanVarianceFamilies& families,
                             const SearchOptions& opts) {
    require_levels(alpha, beta, "sup_rvar_meanvar");
    if (beta == 1.0) return sup_tvar_meanvar(alpha, families, opts);
    return optimize_over_families(
        families, [=](const PiecewiseLinearHazard& d) { return rvar(d, alpha, beta); },
        Direction::sup, FamilySet::both, opts);
}

BoundResult inf_rvar_meanvar(double alpha, double beta, const MeanVarianceFamilies& families,
                             const SearchOptions& opts) {
    require_levels(alpha, beta, "inf_rvar_meanvar");
    return optimize_over_families(
        families, [=](const PiecewiseLinearHazard& d) { return rvar(d, alpha, beta); },
        Direction::inf, FamilySet::both, opts);
}

VarBounds var_bounds_meanvar(double alpha, const MomentConstraint& c, const SearchOptions& opts) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("var_bounds_meanvar: alpha must lie in (0, 1)");
    }
    const auto one = [&](Direction dir, Side side) {
        const Functional f = [=](const PiecewiseLinearHazard& d) { return quantile(d, alpha, side); };
        return with_mean_variance(c, dir, opts, f, [&](const MeanVarianceFamilies& fam) {
            return optimize_over_families(fam, f, dir, FamilySet::both, opts);
        });
    };
    return {one(Direction::inf, Side::left), one(Direction::sup, Side::left),
            one(Direction::inf, Side::right), one(Direction::sup, Side::right)};
}

BoundResult sup_tvar_meanvar(double alpha, const MomentConstraint& c, const SearchOptions& opts) {
    require_tail_level(alpha);
    return with_mean_variance(
        c, Direction::sup, opts, [alpha](const PiecewiseLinearHazard& d) { return tvar(d, alpha); },
        [&](const MeanVarianceFamilies& fam) { return sup_tvar_meanvar(alpha, fam, opts); });
}

BoundResult sup_rvar_meanvar(double alpha, double beta, const MomentConstraint& c,
                             const SearchOptions& opts) {
    require_levels(alpha, beta, "sup_rvar_meanvar");
    return with_mean_variance(
        c, Direction::sup, opts, [=](const PiecewiseLinearHazard& d) { return rvar(d, alpha, beta); },
        [&](const MeanVarianceFamilies& fam) { return sup_rvar_meanvar(alpha, beta, fam, opts); });
}

BoundResult inf_rvar_meanvar(double alpha, double beta, const MomentConstraint& c,
                             const SearchOptions& opts) {
    require_levels(alpha, beta, "inf_rvar_meanvar");
    return with_mean_variance(
        c, Direction::inf, opts, [=](const PiecewiseLinearHazard& d) { return rvar(d, alpha, beta); },
        [&](const MeanVarianceFamilies& fam) { return inf_rvar_meanvar(alpha, beta, fam, opts); });
}

BoundPair stoploss_bounds_meanvar(double retention, const MomentConstraint& c,
                                  const SearchOptions& opts) {
    c.validate();
    if (!(retention >= 0.0) || std::isinf(retention)) {
        throw InvalidArgument("stop-loss retention must be finite and nonnegative");
    }
    const double t = retention / c.mean;
    const Functional f = [t](const PiecewiseLinearHazard& d) { return stop_loss(d, t); };
    return {with_mean_variance(c, Direction::inf, opts, f,
                               [&](const MeanVarianceFamilies& fam) {
                                   return inf_stoploss_on_families(t, fam, opts);
                               }),
            with_mean_variance(c, Direction::sup, opts, f, [&](const MeanVarianceFamilies& fam) {
                return sup_stoploss_on_families(t, fam, opts);
            })};
}

BoundPair limited_loss_bounds_meanvar(double retention, const MomentConstraint& c,
                                      const SearchOptions& opts) {
    auto sl = stoploss_bounds_meanvar(retention, c, opts);
    BoundResult sup = sl.inf;
    BoundResult inf = sl.sup;
    sup.direction = Direction::sup;
    sup.value = c.mean - sl.inf.value;
    inf.direction = Direction::inf;
    inf.value = c.mean - sl.sup.value;
    return {inf, sup};
}

BoundResult bound(const RiskSpec& spec, const MomentConstraint& c, Direction dir,
                  const SearchOptions& opts) {
    spec.validate();
    c.validate();
    const bool sup = dir == Direction::sup;
    if (c.moment_order && spec.kind != MeasureKind::var) {
        throw InvalidArgument("an r-th moment constraint supports VaR bounds only");
    }
    if (!c.second_moment) {
        switch (spec.kind) {
            case MeasureKind::var:
                return sup ? sup_var_mean(spec.alpha, c) : inf_var_mean(spec.alpha, c);
            case MeasureKind::rvar:
                return sup ? sup_rvar_mean(spec.alpha, spec.beta, c.mean, opts)
                           : inf_rvar_mean(spec.alpha, spec.beta, c.mean);
            case MeasureKind::distortion: {
                auto pair = coherent_bounds_mean(*spec.distortion, c.mean);
                return sup ? pair.sup : pair.inf;
            }
            case MeasureKind::stop_loss: {
                auto pair = stoploss_bounds_mean(spec.retention, c.mean);
                return sup ? pair.sup : pair.inf;
            }
            case MeasureKind::limited_loss: {
                auto pair = limited_loss_bounds_mean(spec.retention, c.mean);
                return sup ? pair.sup : pair.inf;
            }
        }
    }
    switch (spec.kind) {
        case MeasureKind::var: {
            const auto f = [&](const PiecewiseLinearHazard& d) {
                return quantile(d, spec.alpha, spec.side);
            };
            return with_mean_variance(c, dir, opts, f, [&](const MeanVarianceFamilies& fam) {
                return optimize_over_families(fam, f, dir, FamilySet::both, opts);
            });
        }
        case MeasureKind::rvar:
            return sup ? sup_rvar_meanvar(spec.alpha, spec.beta, c, opts)
                       : inf_rvar_meanvar(spec.alpha, spec.beta, c, opts);
        case MeasureKind::distortion:
            throw InvalidArgument("distortion bounds are available under a mean constraint only");
        case MeasureKind::stop_loss: {
            const double t = spec.retention / c.mean;
            return with_mean_variance(
                c, dir, opts, [t](const PiecewiseLinearHazard& d) { return stop_loss(d, t); },
                [&](const MeanVarianceFamilies& fam) {
                    return sup ? sup_stoploss_on_families(t, fam, opts)
                               : inf_stoploss_on_families(t, fam, opts);
                });
        }
        case MeasureKind::limited_loss: {
            const Direction opposite = sup ? Direction::inf : Direction::sup;
            BoundResult r = bound(RiskSpec::stop_loss_premium(spec.retention), c, opposite, opts);
            r.direction = dir;
            r.value = c.mean - r.value;
            return r;
        }
    }
    throw InvalidArgument("bound: unknown measure");
}

}  // namespace ifr
