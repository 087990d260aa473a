// kitaev-lab <task> --config <path> [--set key=value]... [--workers K] [--out DIR]
#include "kitaev_lab/kitaev_lab.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

int fail(kl_status status) {
    std::fprintf(stderr, "kitaev-lab: error: %s\n", kl_last_error());
    return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kitaev chain spectra, topology, GBZ and Lindblad checks"};
    app.set_version_flag("--version", std::string(kl_version()));

    std::string task, config_path, out_dir = ".";
    std::vector<std::string> overrides;
    int workers = 0;
    app.add_option("task", task,
                   "spectrum | sweep | gap | phase-diagram | gbz | populations | lindblad-check | circuit-map")
        ->required();
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--set", overrides, "override a config value, e.g. model.mu=0.5")->allow_extra_args(false);
    auto* workers_opt = app.add_option("--workers", workers, "worker threads (default: KITAEV_LAB_WORKERS or all cores)")
                            ->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return KL_ERR_CONFIG;
    }

    kl_config* raw = nullptr;
    if (kl_status s = kl_config_load(config_path.c_str(), &raw); s != KL_OK) return fail(s);
    std::unique_ptr<kl_config, decltype(&kl_config_free)> config(raw, kl_config_free);

    if (kl_status s = kl_config_set_task(config.get(), task.c_str()); s != KL_OK) return fail(s);
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "kitaev-lab: error: --set expects key=value, got '%s'\n", o.c_str());
            return KL_ERR_CONFIG;
        }
        const std::string key = o.substr(0, eq), value = o.substr(eq + 1);
        if (kl_status s = kl_config_set(config.get(), key.c_str(), value.c_str()); s != KL_OK) return fail(s);
    }
    if (*workers_opt)
        if (kl_status s = kl_config_set_workers(config.get(), workers); s != KL_OK) return fail(s);

    auto diag = [](const char* message, void*) { std::fprintf(stderr, "kitaev-lab: %s\n", message); };
    if (kl_status s = kl_run(config.get(), out_dir.c_str(), diag, nullptr); s != KL_OK) return fail(s);
    return 0;
}
