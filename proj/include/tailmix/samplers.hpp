#pragma once

#include <span>
#include <vector>

#include "tailmix/copula.hpp"
#include "tailmix/proposal.hpp"

namespace tailmix {

// One proposal draw with its Radon-Nikodym weight and bookkeeping.
struct WeightedSample {
    std::vector<double> v;
    double weight = 1.0;
    double lambda = 0.0;
    long draws_used = 1;
    int branch = -1; // direct sampler only
};

// Column-compressed batch of n draws (row-major n x d) for the harness.
struct SampleBatch {
    std::size_t n = 0, d = 0;
    std::vector<double> v;       // n*d
    std::vector<double> weight;  // n (all 1 for plain MC)
    std::vector<long> draws;     // n

    std::span<const double> row(std::size_t i) const { return {v.data() + i * d, d}; }
    double draws_mean() const;
};

// Plain copula sampling (the Monte Carlo baseline).
SampleBatch sample_plain(const Copula& copula, std::size_t n, RngStream& model_rng);

// Algorithm: draw Lambda, then retry copula draws until max exceeds it; the
// weight is the cached step/closed form. Model-level and proposal-level
// randomness flow through separate streams so degenerate mixes reproduce the
// plain sampler draw-for-draw.
class RejectionSampler {
public:
    RejectionSampler(const Copula& copula, const MixingDistribution& mix,
                     long max_attempts = 10'000'000);

    WeightedSample sample(RngStream& model_rng, RngStream& proposal_rng) const;
    SampleBatch run(std::size_t n, RngStream& model_rng, RngStream& proposal_rng) const;

    const RejectionWeight& weight() const { return weight_; }

private:
    const Copula* copula_;
    const MixingDistribution* mix_;
    RejectionWeight weight_;
    long max_attempts_;
};

// Algorithm: draw Lambda, a uniform branch I, V_I ~ U(Lambda,1), and the other
// coordinates from the conditional copula C_{V_I}; always one copula draw.
class DirectSampler {
public:
    DirectSampler(const Copula& copula, const MixingDistribution& mix);

    WeightedSample sample(RngStream& model_rng, RngStream& proposal_rng) const;
    SampleBatch run(std::size_t n, RngStream& model_rng, RngStream& proposal_rng) const;

    const DirectWeight& weight() const { return weight_; }

private:
    const Copula* copula_;
    const MixingDistribution* mix_;
    DirectWeight weight_;
};

} // namespace tailmix
