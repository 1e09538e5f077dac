// Benchmark harness CLI. Links only the C API of the shared library.

#include "cbas/cbas.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

int report_failure(int status) {
    std::fprintf(stderr, "error: %s\n", cbas_last_error());
    return status;
}

struct ConfigGuard {
    cbas_config* ptr = nullptr;
    ~ConfigGuard() { cbas_config_free(ptr); }
};

int load_config(const std::string& path, const std::string& scenario, bool has_seed,
                unsigned long long seed, const std::string& out_dir, cbas_config** out) {
    int status = cbas_config_load(path.c_str(), out);
    if (status != CBAS_OK) return status;
    if (!scenario.empty()) {
        status = cbas_config_set_scenario(*out, scenario.c_str());
        if (status != CBAS_OK) return status;
    }
    if (has_seed) {
        status = cbas_config_set_seed(*out, seed);
        if (status != CBAS_OK) return status;
    }
    if (!out_dir.empty()) {
        status = cbas_config_set_out_dir(*out, out_dir.c_str());
        if (status != CBAS_OK) return status;
    }
    return cbas_config_validate(*out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive-sampling design benchmark"};
    app.require_subcommand(1);

    std::string config_path, scenario, out_dir, report_dir;
    unsigned long long seed = 0;

    auto* run = app.add_subcommand("run", "run a scenario and write its artifacts");
    run->add_option("--config", config_path, "config file (JSON)")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the master seed");
    run->add_option("--scenario", scenario, "override the scenario");
    run->add_option("--out", out_dir, "override the output directory");

    auto* validate = app.add_subcommand("validate", "check a config file");
    validate->add_option("--config", config_path, "config file (JSON)")->required();

    auto* report = app.add_subcommand("report", "recompute aggregates from per-run CSVs");
    report->add_option("--in", report_dir, "directory with manifest.json and runs/")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        ConfigGuard config;
        int status = load_config(config_path, scenario, seed_opt->count() > 0, seed, out_dir,
                                 &config.ptr);
        if (status != CBAS_OK) return report_failure(status);
        char* summary = nullptr;
        status = cbas_run(config.ptr, &summary);
        if (status != CBAS_OK) return report_failure(status);
        std::printf("%s\n", summary);
        cbas_string_free(summary);
        return 0;
    }
    if (validate->parsed()) {
        ConfigGuard config;
        const int status = cbas_config_load(config_path.c_str(), &config.ptr);
        if (status != CBAS_OK) return report_failure(status);
        std::printf("ok\n");
        return 0;
    }
    if (report->parsed()) {
        char* summary = nullptr;
        const int status = cbas_report(report_dir.c_str(), &summary);
        if (status != CBAS_OK) return report_failure(status);
        std::printf("%s\n", summary);
        cbas_string_free(summary);
        return 0;
    }
    return 0;
}
