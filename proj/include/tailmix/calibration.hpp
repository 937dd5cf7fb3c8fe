#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tailmix/copula.hpp"
#include "tailmix/proposal.hpp"

namespace tailmix {

// psi evaluated on the diagonal, t -> Psi(t,...,t).
using DiagonalObjective = std::function<double(double)>;

// Raw Algorithm-3/6 masses on the grid x_k = 1 - r^(k-1), normalized but not
// yet floored (the k=1 mass may be zero). `diag` supplies C(x_k 1) for the
// rejection flavor; pass the identity complement (1-x) weighting via
// rejection=false for the direct flavor. Throws CalibrationError when psi is
// not finite at 0 or decreases between grid points (naming the offending k).
std::vector<double> calibrate_discrete_weights(const DiagonalObjective& psi,
                                               const Copula* copula_for_rejection,
                                               std::size_t n_atoms, double grid_factor);

std::vector<double> calibration_grid(std::size_t n_atoms, double grid_factor);

// Algorithm-3 calibration for the rejection sampler; the zero atom is floored
// to `zero_floor` with the other masses rescaled proportionally.
MixingDistribution calibrate_discrete_rejection(const DiagonalObjective& psi,
                                                const Copula& copula, std::size_t n_atoms,
                                                double grid_factor = 0.5,
                                                double zero_floor = 0.1);

// Same for the direct sampler (no copula needed; increments weighted by 1-x_k).
MixingDistribution calibrate_discrete_direct(const DiagonalObjective& psi, std::size_t n_atoms,
                                             double grid_factor = 0.5, double zero_floor = 0.1);

enum class ProposalFlavor { Rejection, Direct };

struct ContinuousFit {
    double beta;
    double gamma;
    double scale;    // the profiled-out proportionality constant
    double residual; // quadratic-norm discrepancy at the optimum
};

// Least-squares fit of K(1 + gamma(1 - beta(1-t^alpha)^(beta-1))/(beta-1)) to
// psi on a 512-point uniform grid over [0, 1-1e-6]; alpha = 1 for the direct
// flavor. K is profiled out in closed form, (beta,gamma) found by simplex
// search over (log(beta-1), logit(gamma)). An optional cap keeps
// 1 + gamma/(beta-1) <= cap.
ContinuousFit calibrate_continuous(const DiagonalObjective& psi, ProposalFlavor flavor,
                                   double alpha = 1.0,
                                   std::optional<double> expected_draws_cap = std::nullopt);

// Guarantees an atom at s with mass >= eps (Condition 2), rescaling the other
// masses proportionally; a no-op when the atom already carries enough mass.
MixingDistribution ensure_atom(const MixingDistribution& mix, double s, double eps);

// The rare-event second-moment identity for Psi(u) = 1{max u > s} under a
// discrete rejection mix whose grid contains s: E_{F_V}[Psi^2 w^2] evaluated
// through the proof-chain representation (term-by-term telescoping sum of
// diagonal-cdf increments above s, times p_s), its closed form
// (C(x_n 1) - C(s 1)) p_s, and the bound p_s^2. All copula-cdf evaluations,
// no simulation.
struct RareEventIdentity {
    double second_moment; // term-by-term proof-chain value
    double closed_form;   // (C(x_n 1) - C(s 1)) * p_s
    double p_s;           // 1 - C(s 1)
};
RareEventIdentity rare_event_second_moment(const Copula& copula, const MixingDistribution& mix,
                                           double s);

} // namespace tailmix
