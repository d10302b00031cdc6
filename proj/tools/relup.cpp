#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "relup/cli.hpp"
#include "relup/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Random shallow ReLU networks: sampling, moment oracles and statistical checks"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::vector<std::string> suites;
    std::string mutate = "none";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed, overrides the config");
        sub->add_option("--out", out_dir, "output directory, overrides the config");
    };
    auto* sample = app.add_subcommand("sample", "draw realizations and write grid CSVs");
    auto* oracle = app.add_subcommand("oracle", "closed-form and quadrature moments");
    auto* ensemble = app.add_subcommand("ensemble", "Monte Carlo ensemble summaries");
    auto* verify = app.add_subcommand("verify", "run verification suites; exit 0 iff all pass");
    auto* limit = app.add_subcommand("limit-study", "limit ladder for the configured law");
    for (auto* sub : {sample, oracle, ensemble, verify, limit}) add_common(sub);
    verify->add_option("--suite", suites, "suite to run (repeatable)")->check(CLI::IsMember(relup::suite_names()));
    verify->add_option("--mutate", mutate, "negative control")
        ->check(CLI::IsMember({"none", "h1", "directions", "hurst", "variance"}));

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = config_path.empty() ? relup::parse_run_config(relup::Json::object())
                                       : relup::load_run_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        relup::CommandResult res;
        if (*sample) {
            res = relup::cmd_sample(cfg);
        } else if (*oracle) {
            res = relup::cmd_oracle(cfg);
        } else if (*ensemble) {
            res = relup::cmd_ensemble(cfg);
        } else if (*verify) {
            res = relup::cmd_verify(cfg, suites, relup::parse_mutation(mutate));
        } else {
            res = relup::cmd_limit_study(cfg);
        }
        for (const auto& f : res.files) std::cout << f.string() << "\n";
        if (*verify || *limit) std::cout << (res.exit_code == 0 ? "PASS" : "FAIL") << "\n";
        return res.exit_code;
    } catch (const relup::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const relup::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
