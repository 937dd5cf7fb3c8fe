#include "tailmix/margins.hpp"
#include "tailmix/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace tailmix {

Margin Margin::lognormal(double mu, double sigma2) {
    if (!(sigma2 > 0.0))
        throw std::domain_error("lognormal: sigma2 must be positive");
    return Margin(Family::Lognormal, mu, std::sqrt(sigma2));
}

Margin Margin::pareto(double scale, double shape) {
    if (!(scale > 0.0) || !(shape > 0.0))
        throw std::domain_error("pareto: scale and shape must be positive");
    return Margin(Family::Pareto, scale, shape);
}

double Margin::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("quantile: p outside [0,1]");
    if (p >= 1.0)
        throw std::domain_error("quantile: unbounded at p=1");
    if (p == 0.0) return 0.0;
    switch (family_) {
    case Family::Lognormal:
        return std::exp(a_ + b_ * normal_quantile(p));
    case Family::Pareto:
        return a_ * (std::pow(1.0 - p, -1.0 / b_) - 1.0);
    }
    return 0.0;
}

double Margin::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (family_) {
    case Family::Lognormal:
        return normal_cdf((std::log(x) - a_) / b_);
    case Family::Pareto:
        return 1.0 - std::pow(1.0 + x / a_, -b_);
    }
    return 0.0;
}

std::vector<Margin> case_study_margins(std::size_t d) {
    std::vector<Margin> out;
    out.reserve(d);
    for (std::size_t j = 1; j <= d; ++j)
        out.push_back(Margin::lognormal(10.0 - 0.1 * static_cast<double>(j),
                                        1.0 + 0.2 * static_cast<double>(j)));
    return out;
}

double case_study_deductible(std::size_t d) {
    return 1e5 * static_cast<double>(d);
}

} // namespace tailmix
