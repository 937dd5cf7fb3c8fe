#include "tailmix/calibration.hpp"
#include "tailmix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tailmix {

std::vector<double> calibration_grid(std::size_t n_atoms, double grid_factor) {
    if (n_atoms < 1) throw CalibrationError("calibration: need at least one atom");
    if (!(grid_factor > 0.0 && grid_factor < 1.0))
        throw CalibrationError("calibration: grid factor must lie in (0,1)");
    std::vector<double> x(n_atoms);
    double f = 1.0;
    for (std::size_t k = 0; k < n_atoms; ++k) {
        x[k] = 1.0 - f;
        f *= grid_factor;
    }
    return x;
}

std::vector<double> calibrate_discrete_weights(const DiagonalObjective& psi,
                                               const Copula* copula_for_rejection,
                                               std::size_t n_atoms, double grid_factor) {
    auto x = calibration_grid(n_atoms, grid_factor);
    std::vector<double> psi_vals(n_atoms);
    for (std::size_t k = 0; k < n_atoms; ++k) {
        psi_vals[k] = psi(x[k]);
        if (!std::isfinite(psi_vals[k]))
            throw CalibrationError("calibration: psi does not attain a finite value at grid point " +
                                   std::to_string(k + 1));
    }
    std::vector<double> pt(n_atoms);
    pt[0] = psi_vals[0];
    if (pt[0] < 0.0) throw CalibrationError("calibration: psi negative at 0");
    for (std::size_t k = 1; k < n_atoms; ++k) {
        double increment = psi_vals[k] - psi_vals[k - 1];
        if (increment < 0.0)
            throw CalibrationError("calibration: psi decreases between grid points, negative weight at k=" +
                                   std::to_string(k + 1));
        double gap = copula_for_rejection ? 1.0 - copula_for_rejection->diagonal(x[k])
                                          : 1.0 - x[k];
        pt[k] = increment * gap;
    }
    double total = std::accumulate(pt.begin(), pt.end(), 0.0);
    if (!(total > 0.0))
        throw CalibrationError("calibration: psi is identically zero on the grid");
    for (double& p : pt) p /= total;
    return pt;
}

namespace {

MixingDistribution floor_and_build(std::vector<double> x, std::vector<double> p,
                                   double zero_floor) {
    if (!(zero_floor > 0.0 && zero_floor < 1.0))
        throw CalibrationError("calibration: zero-atom floor must lie in (0,1)");
    if (p[0] < zero_floor) {
        double scale = (1.0 - zero_floor) / (1.0 - p[0]);
        for (std::size_t k = 1; k < p.size(); ++k) p[k] *= scale;
        p[0] = zero_floor;
    }
    return MixingDistribution::discrete(std::move(x), std::move(p));
}

} // namespace

MixingDistribution calibrate_discrete_rejection(const DiagonalObjective& psi,
                                                const Copula& copula, std::size_t n_atoms,
                                                double grid_factor, double zero_floor) {
    auto p = calibrate_discrete_weights(psi, &copula, n_atoms, grid_factor);
    return floor_and_build(calibration_grid(n_atoms, grid_factor), std::move(p), zero_floor);
}

MixingDistribution calibrate_discrete_direct(const DiagonalObjective& psi, std::size_t n_atoms,
                                             double grid_factor, double zero_floor) {
    auto p = calibrate_discrete_weights(psi, nullptr, n_atoms, grid_factor);
    return floor_and_build(calibration_grid(n_atoms, grid_factor), std::move(p), zero_floor);
}

// ---------------------------------------------------------------------------
// Continuous fit
// ---------------------------------------------------------------------------

namespace {

struct FitContext {
    std::vector<double> t, psi;
    double alpha;
    std::optional<double> cap;
};

double gamma_ceiling(const FitContext& ctx, double beta) {
    double g = 1.0 - 1e-12;
    if (ctx.cap) g = std::min(g, (*ctx.cap - 1.0) * (beta - 1.0));
    return g;
}

// Residual with K profiled out by linear least squares.
double fit_residual(const FitContext& ctx, double beta, double gamma, double* k_out) {
    double sgg = 0.0, sgp = 0.0;
    std::vector<double> g(ctx.t.size());
    for (std::size_t i = 0; i < ctx.t.size(); ++i) {
        double ta = std::pow(ctx.t[i], ctx.alpha);
        g[i] = 1.0 + gamma * (1.0 - beta * std::pow(1.0 - ta, beta - 1.0)) / (beta - 1.0);
        sgg += g[i] * g[i];
        sgp += g[i] * ctx.psi[i];
    }
    double k = sgp / sgg;
    double r = 0.0;
    for (std::size_t i = 0; i < ctx.t.size(); ++i) {
        double e = k * g[i] - ctx.psi[i];
        r += e * e;
    }
    if (k_out) *k_out = k;
    return r;
}

double objective(const FitContext& ctx, double y0, double y1) {
    double beta = 1.0 + std::exp(y0);
    double gamma = gamma_ceiling(ctx, beta) / (1.0 + std::exp(-y1));
    return fit_residual(ctx, beta, gamma, nullptr);
}

// Plain Nelder-Mead in two unconstrained coordinates.
void nelder_mead(const FitContext& ctx, double& y0, double& y1) {
    struct Point {
        double a, b, f;
    };
    auto eval = [&](double a, double b) { return Point{a, b, objective(ctx, a, b)}; };
    std::array<Point, 3> s = {eval(y0, y1), eval(y0 + 0.8, y1), eval(y0, y1 + 0.8)};
    for (int it = 0; it < 600; ++it) {
        std::sort(s.begin(), s.end(), [](const Point& x, const Point& y) { return x.f < y.f; });
        if (std::abs(s[2].f - s[0].f) <= 1e-15 * (1.0 + std::abs(s[0].f)) &&
            std::abs(s[2].a - s[0].a) + std::abs(s[2].b - s[0].b) < 1e-10)
            break;
        double ca = 0.5 * (s[0].a + s[1].a), cb = 0.5 * (s[0].b + s[1].b);
        Point refl = eval(ca + (ca - s[2].a), cb + (cb - s[2].b));
        if (refl.f < s[0].f) {
            Point exp_ = eval(ca + 2.0 * (ca - s[2].a), cb + 2.0 * (cb - s[2].b));
            s[2] = exp_.f < refl.f ? exp_ : refl;
        } else if (refl.f < s[1].f) {
            s[2] = refl;
        } else {
            Point con = eval(ca + 0.5 * (s[2].a - ca), cb + 0.5 * (s[2].b - cb));
            if (con.f < s[2].f) {
                s[2] = con;
            } else {
                s[1] = eval(s[0].a + 0.5 * (s[1].a - s[0].a), s[0].b + 0.5 * (s[1].b - s[0].b));
                s[2] = eval(s[0].a + 0.5 * (s[2].a - s[0].a), s[0].b + 0.5 * (s[2].b - s[0].b));
            }
        }
    }
    std::sort(s.begin(), s.end(), [](const Point& x, const Point& y) { return x.f < y.f; });
    y0 = s[0].a;
    y1 = s[0].b;
}

} // namespace

ContinuousFit calibrate_continuous(const DiagonalObjective& psi, ProposalFlavor flavor,
                                   double alpha, std::optional<double> expected_draws_cap) {
    if (flavor == ProposalFlavor::Direct) alpha = 1.0;
    if (!(alpha >= 1.0)) throw CalibrationError("calibrate_continuous: alpha must be >= 1");
    if (expected_draws_cap && !(*expected_draws_cap > 1.0))
        throw CalibrationError("calibrate_continuous: waiting-time cap must exceed 1");

    FitContext ctx;
    ctx.alpha = alpha;
    ctx.cap = expected_draws_cap;
    const std::size_t grid_n = 512;
    ctx.t.resize(grid_n);
    ctx.psi.resize(grid_n);
    const double hi = 1.0 - 1e-6;
    for (std::size_t i = 0; i < grid_n; ++i) {
        ctx.t[i] = hi * static_cast<double>(i) / static_cast<double>(grid_n - 1);
        ctx.psi[i] = psi(ctx.t[i]);
        if (!std::isfinite(ctx.psi[i]))
            throw CalibrationError("calibrate_continuous: psi not finite on the fit grid");
    }

    double best_f = std::numeric_limits<double>::infinity();
    double best0 = 0.0, best1 = 0.0;
    const double starts[3][2] = {{std::log(2.0 - 1.0), 0.0}, {std::log(4.0 - 1.0), 1.0},
                                 {std::log(1.5 - 1.0), -2.0}};
    for (const auto& st : starts) {
        double y0 = st[0], y1 = st[1];
        nelder_mead(ctx, y0, y1);
        double f = objective(ctx, y0, y1);
        if (f < best_f) {
            best_f = f;
            best0 = y0;
            best1 = y1;
        }
    }
    ContinuousFit fit;
    fit.beta = 1.0 + std::exp(best0);
    fit.gamma = gamma_ceiling(ctx, fit.beta) / (1.0 + std::exp(-best1));
    fit.residual = fit_residual(ctx, fit.beta, fit.gamma, &fit.scale);
    return fit;
}

// ---------------------------------------------------------------------------
// Rare-event machinery
// ---------------------------------------------------------------------------

MixingDistribution ensure_atom(const MixingDistribution& mix, double s, double eps) {
    if (!mix.is_discrete())
        throw std::domain_error("ensure_atom: mix must be discrete");
    if (!(s > 0.0 && s < 1.0)) throw std::domain_error("ensure_atom: s outside (0,1)");
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("ensure_atom: eps outside (0,1)");

    auto x = mix.atoms();
    auto p = mix.probs();
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (std::abs(x[k] - s) <= 1e-12) {
            if (p[k] >= eps) return mix;
            double scale = (1.0 - eps) / (1.0 - p[k]);
            for (double& q : p) q *= scale;
            p[k] = eps;
            return MixingDistribution::discrete(std::move(x), std::move(p));
        }
    }
    for (double& q : p) q *= 1.0 - eps;
    auto pos = std::upper_bound(x.begin(), x.end(), s);
    p.insert(p.begin() + (pos - x.begin()), eps);
    x.insert(pos, s);
    return MixingDistribution::discrete(std::move(x), std::move(p));
}

RareEventIdentity rare_event_second_moment(const Copula& copula, const MixingDistribution& mix,
                                           double s) {
    if (!mix.is_discrete())
        throw std::domain_error("rare_event_second_moment: mix must be discrete");
    const auto& x = mix.atoms();
    bool atom_at_s = false;
    for (std::size_t k = 0; k < x.size(); ++k)
        if (std::abs(x[k] - s) <= 1e-12 && mix.probs()[k] > 0.0) atom_at_s = true;
    if (!atom_at_s)
        throw std::domain_error("rare_event_second_moment: grid must carry an atom at s (Condition 2)");

    RareEventIdentity out;
    out.p_s = 1.0 - copula.diagonal(s);
    double sum = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double ck = copula.diagonal(x[k]);
        if (x[k] > s) sum += ck - prev;
        prev = ck;
    }
    out.second_moment = sum * out.p_s;
    out.closed_form = (copula.diagonal(x.back()) - copula.diagonal(s)) * out.p_s;
    return out;
}

} // namespace tailmix
