#include "tailmix/samplers.hpp"

#include <numeric>
#include <stdexcept>

namespace tailmix {

double SampleBatch::draws_mean() const {
    if (draws.empty()) return 1.0;
    double s = std::accumulate(draws.begin(), draws.end(), 0.0);
    return s / static_cast<double>(draws.size());
}

SampleBatch sample_plain(const Copula& copula, std::size_t n, RngStream& model_rng) {
    SampleBatch b;
    b.n = n;
    b.d = copula.dim();
    b.v.resize(n * b.d);
    b.weight.assign(n, 1.0);
    b.draws.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i)
        copula.sample(model_rng, {b.v.data() + i * b.d, b.d});
    return b;
}

RejectionSampler::RejectionSampler(const Copula& copula, const MixingDistribution& mix,
                                   long max_attempts)
    : copula_(&copula), mix_(&mix), weight_(mix, copula), max_attempts_(max_attempts) {}

WeightedSample RejectionSampler::sample(RngStream& model_rng, RngStream& proposal_rng) const {
    WeightedSample s;
    s.v.resize(copula_->dim());
    s.lambda = mix_->sample_lambda(proposal_rng);
    s.draws_used = copula_->sample_exceeding(s.lambda, model_rng, s.v, max_attempts_);
    s.weight = weight_(s.v);
    return s;
}

SampleBatch RejectionSampler::run(std::size_t n, RngStream& model_rng,
                                  RngStream& proposal_rng) const {
    SampleBatch b;
    b.n = n;
    b.d = copula_->dim();
    b.v.resize(n * b.d);
    b.weight.resize(n);
    b.draws.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<double> row{b.v.data() + i * b.d, b.d};
        double lambda = mix_->sample_lambda(proposal_rng);
        b.draws[i] = copula_->sample_exceeding(lambda, model_rng, row, max_attempts_);
        b.weight[i] = weight_(row);
    }
    return b;
}

DirectSampler::DirectSampler(const Copula& copula, const MixingDistribution& mix)
    : copula_(&copula), mix_(&mix), weight_(mix, copula.dim()) {
    if (!copula.has_conditional())
        throw std::domain_error("direct sampler: copula does not support conditional sampling");
    if (mix.kind() == MixingDistribution::Kind::ContinuousRejection)
        throw std::domain_error("direct sampler: mix is rejection-flavored");
}

WeightedSample DirectSampler::sample(RngStream& model_rng, RngStream& proposal_rng) const {
    const std::size_t d = copula_->dim();
    WeightedSample s;
    s.v.resize(d);
    s.lambda = mix_->sample_lambda(proposal_rng);
    // Branch before V_I, then the conditional fill.
    s.branch = proposal_rng.uniform_int(static_cast<int>(d));
    double vi = proposal_rng.uniform(s.lambda, 1.0);
    auto cond = copula_->condition_on(static_cast<std::size_t>(s.branch), vi);
    std::vector<double> rest(d - 1);
    cond->sample(model_rng, rest);
    std::size_t r = 0;
    for (std::size_t j = 0; j < d; ++j)
        s.v[j] = (j == static_cast<std::size_t>(s.branch)) ? vi : rest[r++];
    s.weight = weight_(s.v);
    s.draws_used = 1;
    return s;
}

SampleBatch DirectSampler::run(std::size_t n, RngStream& model_rng,
                               RngStream& proposal_rng) const {
    const std::size_t d = copula_->dim();
    SampleBatch b;
    b.n = n;
    b.d = d;
    b.v.resize(n * d);
    b.weight.resize(n);
    b.draws.assign(n, 1);
    std::vector<double> rest(d - 1);
    for (std::size_t i = 0; i < n; ++i) {
        double lambda = mix_->sample_lambda(proposal_rng);
        int branch = proposal_rng.uniform_int(static_cast<int>(d));
        double vi = proposal_rng.uniform(lambda, 1.0);
        auto cond = copula_->condition_on(static_cast<std::size_t>(branch), vi);
        cond->sample(model_rng, rest);
        double* row = b.v.data() + i * d;
        std::size_t r = 0;
        for (std::size_t j = 0; j < d; ++j)
            row[j] = (j == static_cast<std::size_t>(branch)) ? vi : rest[r++];
        b.weight[i] = weight_({row, d});
    }
    return b;
}

} // namespace tailmix
