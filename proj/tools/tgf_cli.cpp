#include "tgf/tgf.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic third-grade fluid Galerkin simulator and verification harness"};
    std::string config_path;
    tgf::Overrides ov;
    std::uint64_t seed = 0;
    int paths = 0, workers = 0;
    std::string out, kind;

    app.add_option("--config", config_path, "INI experiment config")->required()->envname("TGF_CONFIG");
    auto* o_seed = app.add_option("--seed", seed, "master seed")->envname("TGF_SEED");
    auto* o_paths = app.add_option("--paths", paths, "ensemble size")->envname("TGF_PATHS");
    auto* o_workers = app.add_option("--workers", workers, "worker threads")->envname("TGF_WORKERS");
    auto* o_out = app.add_option("--out", out, "output directory")->envname("TGF_OUT");
    auto* o_kind = app.add_option("--kind", kind, "simulate|identities|monotonicity|apriori|stability|holder")
                       ->envname("TGF_KIND");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : tgf::kExitConfig;
    }
    if (o_seed->count())
        ov.seed = seed;
    if (o_paths->count())
        ov.paths = paths;
    if (o_workers->count())
        ov.workers = workers;
    if (o_out->count())
        ov.out = out;
    if (o_kind->count())
        ov.kind = kind;

    try {
        std::filesystem::path cp(config_path);
        auto result = tgf::validate_config(tgf::read_text_file(cp), ov, cp.parent_path());
        if (!result.ok()) {
            std::cerr << "configuration error (" << result.errors.size() << " violation"
                      << (result.errors.size() == 1 ? "" : "s") << "):\n";
            for (const auto& e : result.errors)
                std::cerr << "  - " << e << '\n';
            return tgf::kExitConfig;
        }
        auto outcome = tgf::run(*result.config, std::cout);
        return outcome.exit_code;
    } catch (const tgf::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return tgf::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tgf::kExitConfig;
    }
}
