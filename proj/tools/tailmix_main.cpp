#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "tailmix/experiment.hpp"
#include "tailmix/rng.hpp"

using namespace tailmix;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<double> seed, reps, n;
    std::string algorithm, out;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "experiment config file")->required();
    cmd->add_option("--seed", o.seed, "master seed override");
    cmd->add_option("--reps", o.reps, "repetition count override");
    cmd->add_option("--n", o.n, "sample size override");
    cmd->add_option("--algorithm", o.algorithm, "mc | rejection | direct");
    cmd->add_option("--out", o.out, "output path override");
}

ExperimentConfig load(const CommonOpts& o) {
    ExperimentConfig cfg = config_from_table(parse_config_file(o.config_path));
    if (o.seed) cfg.seed = static_cast<std::uint64_t>(*o.seed);
    if (o.reps) cfg.reps = static_cast<std::size_t>(*o.reps);
    if (o.n) cfg.n = static_cast<std::size_t>(*o.n);
    if (!o.algorithm.empty()) cfg.algorithm = algorithm_from_name(o.algorithm);
    if (!o.out.empty()) cfg.out = o.out;
    return cfg;
}

int cmd_calibrate(const CommonOpts& o) {
    ExperimentConfig cfg = load(o);
    if (cfg.algorithm == Algorithm::Mc) cfg.algorithm = Algorithm::Rejection;
    auto copula = cfg.copula.build();
    MixingDistribution mix = build_mixing(cfg, *copula);
    std::string text = mixing_to_config(mix);
    if (!cfg.out.empty()) {
        std::ofstream f(cfg.out, std::ios::binary);
        f << text;
        std::cout << "wrote " << cfg.out << "\n";
    } else {
        std::cout << text;
    }
    if (cfg.algorithm == Algorithm::Rejection)
        std::cout << "# expected waiting time E[N_V] = " << expected_draws(mix, *copula) << "\n";
    return 0;
}

int cmd_sample(const CommonOpts& o) {
    ExperimentConfig cfg = load(o);
    auto copula = cfg.copula.build();
    RngStream model = derive_stream(cfg.seed, 0, 0);
    RngStream proposal = derive_stream(cfg.seed, 0, 1);
    SampleBatch batch;
    switch (cfg.algorithm) {
    case Algorithm::Mc: batch = sample_plain(*copula, cfg.n, model); break;
    case Algorithm::Rejection: {
        MixingDistribution mix = build_mixing(cfg, *copula);
        batch = RejectionSampler(*copula, mix).run(cfg.n, model, proposal);
        break;
    }
    case Algorithm::Direct: {
        MixingDistribution mix = build_mixing(cfg, *copula);
        batch = DirectSampler(*copula, mix).run(cfg.n, model, proposal);
        break;
    }
    }
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!cfg.out.empty()) {
        file.open(cfg.out, std::ios::binary);
        os = &file;
    }
    for (std::size_t j = 0; j < batch.d; ++j) *os << "v" << j + 1 << ",";
    *os << "weight,draws_used\n";
    char buf[40];
    for (std::size_t i = 0; i < batch.n; ++i) {
        for (std::size_t j = 0; j < batch.d; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", batch.v[i * batch.d + j]);
            *os << buf << ",";
        }
        std::snprintf(buf, sizeof(buf), "%.17g", batch.weight[i]);
        *os << buf << "," << batch.draws[i] << "\n";
    }
    return 0;
}

int cmd_estimate(const CommonOpts& o) {
    ExperimentConfig cfg = load(o);
    cfg.reps = 1;
    ExperimentReport rep = run_experiment(cfg);
    for (const auto& f : rep.functionals)
        std::cout << f.name << " = " << f.estimates[0]
                  << (f.ses[0] > 0 ? " (se " + std::to_string(f.ses[0]) + ")" : "") << "\n";
    return 0;
}

int cmd_benchmark(const CommonOpts& o) {
    ExperimentConfig cfg = load(o);
    if (cfg.algorithm == Algorithm::Mc) {
        ExperimentReport rep = run_experiment(cfg);
        if (!cfg.out.empty()) write_report_csv(rep, cfg.out);
        std::cout << summarize(cfg, rep, nullptr);
        return 0;
    }
    ExperimentReport is = run_experiment(cfg);
    ExperimentConfig mc_cfg = cfg;
    mc_cfg.algorithm = Algorithm::Mc;
    ExperimentReport mc = run_experiment(mc_cfg);
    if (!cfg.out.empty()) {
        write_report_csv(is, cfg.out);
        write_report_csv(mc, cfg.out + ".mc");
    }
    std::cout << summarize(cfg, is, &mc);
    return 0;
}

int cmd_verify(const CommonOpts& o, double tolerance) {
    ExperimentConfig cfg = load(o);
    const CaseStudyReference* ref = case_study_reference(cfg.copula.family, cfg.copula.dimension);
    if (!ref) {
        std::cerr << "verify: no published reference for this copula/dimension\n";
        return 2;
    }
    if (cfg.algorithm == Algorithm::Mc) cfg.algorithm = Algorithm::Rejection;
    cfg.reps = 1;
    ExperimentReport rep = run_experiment(cfg);

    auto copula = cfg.copula.build();
    int failures = 0;
    if (cfg.algorithm == Algorithm::Rejection) {
        MixingDistribution mix = build_mixing(cfg, *copula);
        double env = expected_draws(mix, *copula);
        double delta = std::abs(env - ref->expected_waiting) / ref->expected_waiting;
        bool ok = delta <= 0.01;
        failures += !ok;
        std::printf("%s expected draws: got %.2f, ref %.2f (%.2f%%)\n", ok ? "PASS" : "FAIL",
                    env, ref->expected_waiting, 100.0 * delta);
    }
    for (std::size_t f = 0; f < rep.functionals.size() && f < 5; ++f) {
        double got = rep.functionals[f].estimates[0];
        double want = ref->values[f];
        double delta = std::abs(got - want) / want;
        bool ok = delta <= tolerance;
        failures += !ok;
        std::printf("%s %s: got %.1f, ref %.1f (%.2f%%)\n", ok ? "PASS" : "FAIL",
                    rep.functionals[f].name.c_str(), got, want, 100.0 * delta);
    }
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Importance-sampling estimators for copula models"};
    app.require_subcommand(1);

    CommonOpts calibrate_o, sample_o, estimate_o, benchmark_o, verify_o;
    double verify_tol = 0.05;

    add_common(app.add_subcommand("calibrate", "calibrate a mixing distribution"), calibrate_o);
    add_common(app.add_subcommand("sample", "emit weighted proposal samples"), sample_o);
    add_common(app.add_subcommand("estimate", "single-run estimates"), estimate_o);
    add_common(app.add_subcommand("benchmark", "repetition battery vs plain MC"), benchmark_o);
    auto* verify = app.add_subcommand("verify", "compare against the published case study");
    add_common(verify, verify_o);
    verify->add_option("--tolerance", verify_tol, "relative tolerance (default 0.05)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("calibrate")) return cmd_calibrate(calibrate_o);
        if (app.got_subcommand("sample")) return cmd_sample(sample_o);
        if (app.got_subcommand("estimate")) return cmd_estimate(estimate_o);
        if (app.got_subcommand("benchmark")) return cmd_benchmark(benchmark_o);
        if (app.got_subcommand("verify")) return cmd_verify(verify_o, verify_tol);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
