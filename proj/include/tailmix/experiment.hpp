#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tailmix/calibration.hpp"
#include "tailmix/config.hpp"
#include "tailmix/copula.hpp"
#include "tailmix/estimators.hpp"
#include "tailmix/margins.hpp"
#include "tailmix/proposal.hpp"
#include "tailmix/samplers.hpp"
#include "tailmix/shock.hpp"

namespace tailmix {

enum class Algorithm { Mc, Rejection, Direct };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct FunctionalSpec {
    enum class Kind { StopLoss, VaR, Es, Allocation, ProductMoment };
    Kind kind = Kind::StopLoss;
    double param = 0.0;      // deductible for StopLoss, level for VaR/Es/Allocation
    std::size_t margin = 0;  // allocation target (0-based)

    std::string name() const;
};

struct CopulaSpec {
    CopulaFamily family = CopulaFamily::Independence;
    double param = 0.0;
    std::size_t dimension = 2;
    std::vector<Shock> shocks; // shock family only
    std::vector<std::vector<std::size_t>> exposures;

    std::unique_ptr<Copula> build() const;
};

struct MixingSpec {
    enum class Mode { Explicit, CalibrateDiscrete, CalibrateContinuous };
    Mode mode = Mode::CalibrateDiscrete;

    // explicit
    MixingDistribution::Kind kind = MixingDistribution::Kind::Discrete;
    std::vector<double> atoms, probs;
    double beta = 2.0, gamma = 0.5;

    // calibration directives
    std::size_t n_atoms = 10;
    double grid_factor = 0.5;
    double zero_floor = 0.1;
    std::optional<double> draws_cap;
};

struct ExperimentConfig {
    CopulaSpec copula;
    std::vector<Margin> margins;
    double deductible = 0.0; // stop-loss T
    std::vector<FunctionalSpec> functionals;
    Algorithm algorithm = Algorithm::Mc;
    MixingSpec mixing;
    std::size_t n = 10'000;
    std::size_t reps = 200;
    std::uint64_t seed = 1;
    std::string out;
    unsigned threads = 1;
};

// Schema: top-level n/reps/seed/algorithm/threads/out, [copula], [margins],
// [functionals], [mixing]; documented in the README.
ExperimentConfig config_from_table(const ConfigTable& table);

// The paper-style case study: Gumbel/Clayton copula, lognormal margins,
// stop-loss + VaR + ES + first/last allocations.
ExperimentConfig case_study_config(CopulaFamily family, std::size_t d, Algorithm algorithm);

// Resolves the mixing spec, running the calibration directives against the
// stop-loss diagonal when asked.
MixingDistribution build_mixing(const ExperimentConfig& cfg, const Copula& copula);

// Emits a mix as config-embeddable text ([mixing] section).
std::string mixing_to_config(const MixingDistribution& mix);

struct FunctionalResult {
    std::string name;
    std::vector<double> estimates; // one per repetition
    std::vector<double> ses;
};

struct ExperimentReport {
    Algorithm algorithm = Algorithm::Mc;
    std::size_t n = 0, reps = 0;
    std::vector<FunctionalResult> functionals;
    std::vector<double> draws_mean; // per repetition
    double wall_seconds = 0.0;
};

// Runs the repetition battery. Deterministic given the master seed: repetition
// i draws from streams keyed by (seed, i), so reports do not depend on the
// worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Sample variance of the plain-MC estimates divided by the IS one.
double reduction_factor(const ExperimentReport& mc, const ExperimentReport& is,
                        const std::string& functional);

std::string report_csv(const ExperimentReport& report);
void write_report_csv(const ExperimentReport& report, const std::string& path);

// Human-readable summary with reference deltas where the case study provides them.
std::string summarize(const ExperimentConfig& cfg, const ExperimentReport& is,
                      const ExperimentReport* mc);

// ---------------------------------------------------------------------------
// Published case-study fixtures (reference values, reduction factors, waiting
// times, calibrated mixes) used by `verify` and the acceptance suite.
// ---------------------------------------------------------------------------

struct CaseStudyReference {
    std::size_t d;
    // stop-loss, VaR 0.995, ES 0.99, allocation to X_1, allocation to X_d
    std::array<double, 5> values;
    std::array<double, 5> factors_rejection;
    std::array<double, 5> factors_direct;
    double expected_waiting; // rejection sampler E[N_V]
};

const CaseStudyReference* case_study_reference(CopulaFamily family, std::size_t d);

// Published calibrated probabilities (Gumbel, rejection flavor); the d=2 row
// carries the literature's p_9 entry as printed.
const std::array<double, 10>* calibration_reference_row(std::size_t d);

} // namespace tailmix
