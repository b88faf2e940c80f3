// qexp: run named check pipelines on a model described in JSON.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include <qexp/pipeline.hpp>

namespace
{

void print_table(const qexp::Report &rep)
{
    std::printf("%-34s %-22s %-11s %s\n", "check", "tag", "status", "max residual");
    for (const auto &c : rep.checks)
        std::printf("%-34s %-22s %-11s %.3e\n", c.name.c_str(), c.tag.c_str(), qexp::to_string(c.status).c_str(),
                    c.max_residual);
    std::printf("runtime %.2fs, seed %llu\n", rep.runtime, static_cast<unsigned long long>(rep.seed));
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Universal operators of XXX and Gaudin models: pencils, Bethe ansatz, kernels"};
    app.require_subcommand(1);
    auto *run = app.add_subcommand("run", "run a pipeline on a JSON model config");
    std::string config, pipeline, out;
    long long seed = -1;
    double tol = -1.0;
    run->add_option("--config", config, "config file")->required();
    run->add_option("--pipeline", pipeline, "pencil | bae | kernel | census | compare | all");
    run->add_option("--seed", seed, "rng seed");
    run->add_option("--tol-residual", tol, "residual tolerance override");
    run->add_option("--out", out, "report path");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    qexp::RunConfig cfg;
    try {
        cfg = qexp::load_config(config);
        if (!pipeline.empty()) {
            if (!qexp::pipeline_names().count(pipeline))
                throw qexp::invalid_input_error("unknown pipeline " + pipeline);
            cfg.pipeline = pipeline;
        }
        if (seed >= 0)
            cfg.options.seed = static_cast<std::uint64_t>(seed);
        if (tol >= 0.0) {
            if (tol < std::numeric_limits<double>::epsilon())
                throw qexp::invalid_input_error("tolerance override below machine epsilon");
            cfg.options.tol_residual = tol;
        }
        if (!out.empty())
            cfg.output = out;
    } catch (const qexp::error &e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    }

    qexp::Report rep;
    try {
        rep = qexp::run(cfg);
    } catch (const qexp::numerical_failure &e) {
        std::cerr << "numerical failure in stage " << e.stage() << ": " << e.what() << "\n";
        return 3;
    } catch (const qexp::invalid_input_error &e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    }

    const std::string text = rep.to_json().dump(2);
    if (!cfg.output.empty()) {
        std::ofstream f(cfg.output);
        if (!f) {
            std::cerr << "cannot write " << cfg.output << "\n";
            return 2;
        }
        f << text << "\n";
    } else {
        std::cout << text << "\n";
    }
    print_table(rep);
    return rep.passed() ? 0 : 1;
}
