#include "tailmix/shock.hpp"
#include "tailmix/errors.hpp"
#include "tailmix/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tailmix {

double Shock::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (family) {
    case Family::Frechet: return std::exp(-param / x);
    case Family::Exponential: return -std::expm1(-param * x);
    }
    return 0.0;
}

double Shock::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("shock quantile: p outside (0,1)");
    switch (family) {
    case Family::Frechet: return -param / std::log(p);
    case Family::Exponential: return -std::log1p(-p) / param;
    }
    return 0.0;
}

ShockModel::ShockModel(std::vector<Shock> shocks,
                       std::vector<std::vector<std::size_t>> exposures)
    : shocks_(std::move(shocks)), exposures_(std::move(exposures)) {
    if (shocks_.empty()) throw std::domain_error("shock model: no shocks");
    if (exposures_.size() < 2) throw std::domain_error("shock model: dimension must be >= 2");
    std::vector<bool> referenced(shocks_.size(), false);
    for (const auto& ex : exposures_) {
        if (ex.empty()) throw std::domain_error("shock model: empty exposure set");
        for (std::size_t k : ex) {
            if (k >= shocks_.size()) throw std::domain_error("shock model: exposure index out of range");
            referenced[k] = true;
        }
    }
    if (!std::all_of(referenced.begin(), referenced.end(), [](bool b) { return b; }))
        throw std::domain_error("shock model: every shock must be referenced by some component");
    for (const Shock& s : shocks_)
        if (!(s.param > 0.0)) throw std::domain_error("shock model: shock parameter must be positive");

    all_frechet_ = std::all_of(shocks_.begin(), shocks_.end(), [](const Shock& s) {
        return s.family == Shock::Family::Frechet;
    });
    if (all_frechet_) {
        frechet_scale_sum_.resize(exposures_.size());
        for (std::size_t j = 0; j < exposures_.size(); ++j) {
            double sum = 0.0;
            for (std::size_t k : exposures_[j]) sum += shocks_[k].param;
            frechet_scale_sum_[j] = sum;
        }
    }
}

double ShockModel::margin_cdf(std::size_t k, double x) const {
    double p = 1.0;
    for (std::size_t j : exposures_[k]) p *= shocks_[j].cdf(x);
    return p;
}

double ShockModel::margin_quantile(std::size_t k, double u) const {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("shock margin quantile: u outside (0,1)");
    if (all_frechet_)
        return -frechet_scale_sum_[k] / std::log(u);
    // Bracket then bisection+secant; relative tolerance 1e-12 on x.
    double hi = 1.0;
    while (margin_cdf(k, hi) < u) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw std::domain_error("shock margin quantile: no bracket");
    }
    double lo = 0.0;
    auto f = [&](double x) { return margin_cdf(k, x); };
    return solve_increasing(f, u, lo, hi, 1e-12 * std::max(1.0, hi));
}

ShockCopula::ShockCopula(ShockModel model) : model_(std::move(model)) {}

double ShockCopula::cdf(std::span<const double> u) const {
    check_point(u);
    const std::size_t d = dim(), m = model_.shock_count();
    for (double v : u)
        if (v == 0.0) return 0.0;
    // phi_j = min over components exposed to shock j of F_{X_k}^{-1}(u_k)
    std::vector<double> phi(m, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < d; ++k) {
        double q = (u[k] >= 1.0) ? std::numeric_limits<double>::infinity()
                                 : model_.margin_quantile(k, u[k]);
        for (std::size_t j : model_.exposure(k)) phi[j] = std::min(phi[j], q);
    }
    double c = 1.0;
    for (std::size_t j = 0; j < m; ++j)
        if (std::isfinite(phi[j])) c *= model_.shock(j).cdf(phi[j]);
    return c;
}

std::optional<double> ShockCopula::diagonal_exponent() const {
    // Monomial diagonal only in the Frechet (Marshall-Olkin) case:
    // alpha = sum_j s_j / min_{i: j in I_i} s-hat_i.
    if (!model_.all_frechet()) return std::nullopt;
    const std::size_t d = dim(), m = model_.shock_count();
    std::vector<double> min_sum(m, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < d; ++k) {
        double shat = 0.0;
        for (std::size_t j : model_.exposure(k)) shat += model_.shock(j).param;
        for (std::size_t j : model_.exposure(k)) min_sum[j] = std::min(min_sum[j], shat);
    }
    double alpha = 0.0;
    for (std::size_t j = 0; j < m; ++j) alpha += model_.shock(j).param / min_sum[j];
    return alpha;
}

void ShockCopula::sample(RngStream& rng, std::span<double> out) const {
    const std::size_t d = dim(), m = model_.shock_count();
    std::vector<double> z(m);
    for (std::size_t j = 0; j < m; ++j) z[j] = model_.shock(j).quantile(rng.uniform01());
    for (std::size_t k = 0; k < d; ++k) {
        double x = -std::numeric_limits<double>::infinity();
        for (std::size_t j : model_.exposure(k)) x = std::max(x, z[j]);
        out[k] = model_.margin_cdf(k, x);
    }
}

long ShockCopula::sample_exceeding(double lambda, RngStream& rng, std::span<double> out,
                                   long) const {
    if (lambda <= 0.0) {
        sample(rng, out);
        return 1;
    }
    auto v = shock_conditional_sample(model_, lambda, rng);
    std::copy(v.begin(), v.end(), out.begin());
    return 1;
}

std::vector<double> shock_conditional_sample(const ShockModel& model, double lambda,
                                             RngStream& rng) {
    const std::size_t d = model.dim(), m = model.shock_count();
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw std::domain_error("shock conditional: lambda outside [0,1)");

    // Exceedance thresholds per shock and Bernoulli parameters p_j = P[Z_j > phi_j].
    std::vector<double> phi(m, std::numeric_limits<double>::infinity());
    if (lambda > 0.0) {
        for (std::size_t k = 0; k < d; ++k) {
            double q = model.margin_quantile(k, lambda);
            for (std::size_t j : model.exposure(k)) phi[j] = std::min(phi[j], q);
        }
    } else {
        std::fill(phi.begin(), phi.end(), 0.0);
    }
    std::vector<double> p(m);
    double max_p = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        p[j] = 1.0 - model.shock(j).cdf(phi[j]);
        max_p = std::max(max_p, p[j]);
    }
    if (max_p == 0.0)
        throw std::domain_error("shock conditional: degenerate conditioning, all p_j = 0");

    // Suffix products prod_{l>=k}(1-p_l) for the chain.
    std::vector<double> suffix(m + 1, 1.0);
    for (std::size_t k = m; k-- > 0;) suffix[k] = suffix[k + 1] * (1.0 - p[k]);

    // Draw (B_1..B_m) conditioned on max B = 1 by iterative conditioning.
    std::vector<bool> b(m, false);
    bool success = false;
    for (std::size_t k = 0; k < m; ++k) {
        double pk = success ? p[k] : p[k] / (1.0 - suffix[k]);
        b[k] = rng.uniform01() < pk;
        success = success || b[k];
    }

    // Shocks by inverse cdf restricted below/above phi_j per B_j.
    std::vector<double> z(m);
    for (std::size_t k = 0; k < m; ++k) {
        double ut = rng.uniform01();
        double q = b[k] ? (1.0 - p[k]) + p[k] * ut : (1.0 - p[k]) * ut;
        z[k] = model.shock(k).quantile(std::min(std::max(q, 1e-300), 1.0 - 1e-16));
    }

    std::vector<double> out(d);
    for (std::size_t k = 0; k < d; ++k) {
        double x = -std::numeric_limits<double>::infinity();
        for (std::size_t j : model.exposure(k)) x = std::max(x, z[j]);
        out[k] = model.margin_cdf(k, x);
    }
    return out;
}

std::unique_ptr<Copula> marshall_olkin_copula(std::vector<double> scales,
                                              std::vector<std::vector<std::size_t>> exposures) {
    std::vector<Shock> shocks;
    shocks.reserve(scales.size());
    for (double s : scales) shocks.push_back({Shock::Family::Frechet, s});
    return std::make_unique<ShockCopula>(ShockModel(std::move(shocks), std::move(exposures)));
}

} // namespace tailmix
