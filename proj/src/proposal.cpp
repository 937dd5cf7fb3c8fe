#include "tailmix/proposal.hpp"
#include "tailmix/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tailmix {

namespace {

void check_beta_gamma(double beta, double gamma) {
    if (!(beta > 1.0)) throw std::domain_error("mixing: beta must be > 1");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::domain_error("mixing: gamma must lie in [0,1); gamma = 1 gives infinite weight variance");
}

} // namespace

MixingDistribution MixingDistribution::discrete(std::vector<double> atoms,
                                                std::vector<double> probs) {
    if (atoms.empty() || atoms.size() != probs.size())
        throw std::domain_error("mixing: atoms/probs size mismatch");
    if (atoms.front() != 0.0)
        throw std::domain_error("mixing: first atom must be 0");
    if (!(probs.front() > 0.0))
        throw std::domain_error("mixing: P[Lambda=0] must be positive");
    double total = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (k > 0 && !(atoms[k] > atoms[k - 1]))
            throw std::domain_error("mixing: atoms must be strictly increasing");
        if (!(atoms[k] < 1.0))
            throw std::domain_error("mixing: atoms must be < 1");
        if (!(probs[k] >= 0.0))
            throw std::domain_error("mixing: negative probability");
        total += probs[k];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::domain_error("mixing: probabilities must sum to 1");

    MixingDistribution m;
    m.kind_ = Kind::Discrete;
    m.atoms_ = std::move(atoms);
    m.probs_ = std::move(probs);
    m.cum_.resize(m.probs_.size());
    double c = 0.0;
    for (std::size_t k = 0; k < m.probs_.size(); ++k) {
        c += m.probs_[k];
        m.cum_[k] = c;
    }
    m.cum_.back() = 1.0;
    return m;
}

MixingDistribution MixingDistribution::continuous_rejection(const Copula& copula, double beta,
                                                            double gamma) {
    auto alpha = copula.diagonal_exponent();
    if (!alpha)
        throw std::domain_error("mixing: continuous rejection flavor needs a monomial copula diagonal");
    return continuous_rejection(*alpha, beta, gamma);
}

MixingDistribution MixingDistribution::continuous_rejection(double alpha, double beta,
                                                            double gamma) {
    if (!(alpha >= 1.0)) throw std::domain_error("mixing: alpha must be >= 1");
    check_beta_gamma(beta, gamma);
    MixingDistribution m;
    m.kind_ = Kind::ContinuousRejection;
    m.alpha_ = alpha;
    m.beta_ = beta;
    m.gamma_ = gamma;
    return m;
}

MixingDistribution MixingDistribution::continuous_direct(double beta, double gamma) {
    check_beta_gamma(beta, gamma);
    MixingDistribution m;
    m.kind_ = Kind::ContinuousDirect;
    m.beta_ = beta;
    m.gamma_ = gamma;
    return m;
}

double MixingDistribution::sample_lambda(RngStream& rng) const {
    if (kind_ == Kind::Discrete) {
        double u = rng.uniform01();
        auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
        return atoms_[static_cast<std::size_t>(it - cum_.begin())];
    }
    if (rng.uniform01() < 1.0 - gamma_) return 0.0;
    double u = rng.uniform01();
    double l = 1.0 - std::pow(1.0 - u, 1.0 / beta_);
    if (kind_ == Kind::ContinuousRejection) l = std::pow(l, 1.0 / alpha_);
    return l;
}

double MixingDistribution::prob_lambda_zero() const {
    return kind_ == Kind::Discrete ? probs_.front() : 1.0 - gamma_;
}

double MixingDistribution::expected_inverse_gap() const {
    if (kind_ == Kind::Discrete) {
        double s = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) s += probs_[k] / (1.0 - atoms_[k]);
        return s;
    }
    if (kind_ == Kind::ContinuousDirect)
        return 1.0 + gamma_ / (beta_ - 1.0);
    // density gamma * beta * alpha * l^(alpha-1) (1-l^alpha)^(beta-1) on (0,1)
    double integral = gauss_legendre(
        [&](double l) {
            return alpha_ * std::pow(l, alpha_ - 1.0) * std::pow(1.0 - std::pow(l, alpha_), beta_ - 1.0) /
                   (1.0 - l);
        },
        0.0, 1.0);
    return (1.0 - gamma_) + gamma_ * beta_ * integral;
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

RejectionWeight::RejectionWeight(const MixingDistribution& mix, const Copula& copula)
    : mix_(&mix) {
    bound_ = 1.0 / mix.prob_lambda_zero();
    if (mix.kind() == MixingDistribution::Kind::ContinuousDirect)
        throw std::domain_error("rejection weight: mix is direct-flavored");
    if (mix.kind() == MixingDistribution::Kind::ContinuousRejection) {
        discrete_ = false;
        alpha_ = mix.alpha();
        beta_ = mix.beta();
        gamma_ = mix.gamma();
        auto exponent = copula.diagonal_exponent();
        if (!exponent || std::abs(*exponent - alpha_) > 1e-9)
            throw std::domain_error("rejection weight: copula diagonal exponent does not match mix alpha");
        expected_draws_ = 1.0 + gamma_ / (beta_ - 1.0);
        return;
    }
    atoms_ = mix.atoms();
    prefix_.resize(atoms_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
        acc += mix.probs()[k] / (1.0 - copula.diagonal(atoms_[k]));
        prefix_[k] = acc;
    }
    expected_draws_ = acc;
}

double RejectionWeight::from_max(double t) const {
    if (!discrete_) {
        double ta = std::pow(t, alpha_);
        return (beta_ - 1.0) /
               (beta_ - 1.0 + gamma_ * (1.0 - beta_ * std::pow(1.0 - ta, beta_ - 1.0)));
    }
    // last atom <= t
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - atoms_.begin());
    return 1.0 / prefix_[k - 1]; // x_1 = 0 <= t always
}

double RejectionWeight::operator()(std::span<const double> u) const {
    return from_max(*std::max_element(u.begin(), u.end()));
}

DirectWeight::DirectWeight(const MixingDistribution& mix, std::size_t dimension) : d_(dimension) {
    bound_ = 1.0 / mix.prob_lambda_zero();
    if (mix.kind() == MixingDistribution::Kind::ContinuousRejection)
        throw std::domain_error("direct weight: mix is rejection-flavored");
    if (mix.kind() == MixingDistribution::Kind::ContinuousDirect) {
        discrete_ = false;
        beta_ = mix.beta();
        gamma_ = mix.gamma();
        return;
    }
    atoms_ = mix.atoms();
    prefix_.resize(atoms_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
        acc += mix.probs()[k] / (1.0 - atoms_[k]);
        prefix_[k] = acc;
    }
}

double DirectWeight::operator()(std::span<const double> u) const {
    if (!discrete_) {
        double s = 0.0;
        for (double v : u) s += std::pow(1.0 - v, beta_ - 1.0);
        double dd = static_cast<double>(d_);
        return (beta_ - 1.0) / (beta_ - 1.0 + gamma_ - gamma_ * beta_ * s / dd);
    }
    double s = 0.0;
    for (double v : u) {
        auto it = std::upper_bound(atoms_.begin(), atoms_.end(), v);
        s += prefix_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }
    return static_cast<double>(d_) / s;
}

double weight_rejection(const MixingDistribution& mix, const Copula& copula,
                        std::span<const double> u) {
    return RejectionWeight(mix, copula)(u);
}

double weight_direct(const MixingDistribution& mix, std::span<const double> u, std::size_t d) {
    return DirectWeight(mix, d)(u);
}

double expected_draws(const MixingDistribution& mix, const Copula& copula) {
    return RejectionWeight(mix, copula).expected_draws();
}

} // namespace tailmix
