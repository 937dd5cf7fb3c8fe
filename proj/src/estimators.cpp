#include "tailmix/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tailmix {

Functional Functional::stop_loss(double deductible, std::vector<Margin> margins) {
    if (margins.empty()) throw std::invalid_argument("stop_loss: margins required");
    return Functional(Kind::StopLoss, deductible, std::move(margins));
}

Functional Functional::indicator_sum_leq(double x, std::vector<Margin> margins) {
    if (margins.empty()) throw std::invalid_argument("indicator_sum_leq: margins required");
    return Functional(Kind::IndicatorSumLeq, x, std::move(margins));
}

Functional Functional::rare_max_indicator(double s) {
    if (!(s > 0.0 && s < 1.0)) throw std::domain_error("rare_max_indicator: s outside (0,1)");
    return Functional(Kind::RareMaxIndicator, s, {});
}

Functional Functional::product_moment(std::vector<Margin> margins) {
    if (margins.empty()) throw std::invalid_argument("product_moment: margins required");
    return Functional(Kind::ProductMoment, 0.0, std::move(margins));
}

double Functional::operator()(std::span<const double> u) const {
    switch (kind_) {
    case Kind::StopLoss: {
        double s = 0.0;
        for (std::size_t j = 0; j < margins_.size(); ++j) s += margins_[j].quantile(u[j]);
        return std::max(s - param_, 0.0);
    }
    case Kind::IndicatorSumLeq: {
        double s = 0.0;
        for (std::size_t j = 0; j < margins_.size(); ++j) s += margins_[j].quantile(u[j]);
        return s <= param_ ? 1.0 : 0.0;
    }
    case Kind::RareMaxIndicator:
        return *std::max_element(u.begin(), u.end()) > param_ ? 1.0 : 0.0;
    case Kind::ProductMoment: {
        double p = 1.0;
        for (std::size_t j = 0; j < margins_.size(); ++j) p *= margins_[j].quantile(u[j]);
        return p;
    }
    }
    return 0.0;
}

double Functional::diagonal(double t) const {
    if (kind_ == Kind::RareMaxIndicator) return t > param_ ? 1.0 : 0.0;
    std::vector<double> u(margins_.size(), t);
    return (*this)(u);
}

Estimate estimate_mean(std::span<const double> psi, std::span<const double> weights,
                       bool normalize) {
    const std::size_t n = psi.size();
    if (n < 2) throw std::invalid_argument("estimate_mean: need n >= 2");
    Estimate e;
    e.n = n;
    const double dn = static_cast<double>(n);
    if (weights.empty()) {
        e.tag = EstimatorTag::Mc;
        double mean = std::accumulate(psi.begin(), psi.end(), 0.0) / dn;
        double ss = 0.0;
        for (double v : psi) ss += (v - mean) * (v - mean);
        e.value = mean;
        e.se = std::sqrt(ss / (dn - 1.0)) / std::sqrt(dn);
        return e;
    }
    if (weights.size() != n) throw std::invalid_argument("estimate_mean: weight size mismatch");
    if (!normalize) {
        e.tag = EstimatorTag::IsRaw;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += psi[i] * weights[i];
        mean /= dn;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double v = psi[i] * weights[i] - mean;
            ss += v * v;
        }
        e.value = mean;
        e.se = std::sqrt(ss / (dn - 1.0)) / std::sqrt(dn);
        return e;
    }
    e.tag = EstimatorTag::IsSelfNormalized;
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += psi[i] * weights[i];
    mean /= wsum;
    // Delta-method variance of the ratio estimator.
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = weights[i] * (psi[i] - mean);
        ss += v * v;
    }
    e.value = mean;
    e.se = std::sqrt(ss) / wsum;
    return e;
}

std::vector<double> normalize_weights(std::span<const double> weights) {
    double s = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(s > 0.0)) throw std::invalid_argument("normalize_weights: nonpositive total weight");
    std::vector<double> out(weights.begin(), weights.end());
    for (double& w : out) w /= s;
    return out;
}

namespace {

void check_weighted_sample(std::span<const double> losses, std::span<const double> weights,
                           double alpha) {
    if (losses.empty()) throw std::invalid_argument("weighted sample is empty");
    if (losses.size() != weights.size())
        throw std::invalid_argument("losses/weights size mismatch");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha outside (0,1)");
    double s = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-6)
        throw std::invalid_argument("weights must be normalized to sum to 1");
}

std::vector<std::size_t> order_by_loss(std::span<const double> losses) {
    std::vector<std::size_t> idx(losses.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
    return idx;
}

} // namespace

double weighted_var(std::span<const double> losses, std::span<const double> weights,
                    double alpha) {
    check_weighted_sample(losses, weights, alpha);
    auto idx = order_by_loss(losses);
    double cum = 0.0;
    for (std::size_t i : idx) {
        cum += weights[i];
        if (cum >= alpha) return losses[i];
    }
    return losses[idx.back()]; // cumulative rounding fell just short of alpha
}

double weighted_es(std::span<const double> losses, std::span<const double> weights, double alpha) {
    double q = weighted_var(losses, weights, alpha);
    double excess = 0.0;
    for (std::size_t i = 0; i < losses.size(); ++i)
        excess += weights[i] * std::max(losses[i] - q, 0.0);
    return q + excess / (1.0 - alpha);
}

double euler_allocation(std::span<const double> x, std::size_t n, std::size_t d,
                        std::span<const double> weights, std::size_t margin_index, double alpha) {
    if (x.size() != n * d) throw std::invalid_argument("euler_allocation: matrix size mismatch");
    if (margin_index >= d) throw std::invalid_argument("euler_allocation: margin index out of range");
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) s[i] += x[i * d + j];
    double q = weighted_var(s, weights, alpha);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (s[i] > q) {
            num += weights[i] * x[i * d + margin_index];
            den += weights[i];
        }
    }
    if (!(den > 0.0)) throw std::runtime_error("euler_allocation: empty tail beyond VaR");
    return num / den;
}

} // namespace tailmix
