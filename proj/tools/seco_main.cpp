// Command-line front end. Talks to the engine exclusively through the C API
// in seco.h; exit codes are the seco_status values (0 ok, 1 I/O, 2
// config/format, 3 divergence, 4 gradcheck failure).
#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "seco.h"

namespace {

struct ConfigHandle {
    seco_config* cfg = nullptr;
    ConfigHandle() : cfg(seco_config_create()) {}
    ~ConfigHandle() { seco_config_destroy(cfg); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle& operator=(const ConfigHandle&) = delete;
};

int report_failure(seco_status status) {
    std::fprintf(stderr, "error: %s\n", seco_last_error());
    return static_cast<int>(status);
}

int load_and_print_config(const ConfigHandle& handle, const std::string& config_path) {
    if (!handle.cfg) {
        std::fprintf(stderr, "error: out of memory\n");
        return static_cast<int>(SECO_ERR_INTERNAL);
    }
    if (!config_path.empty()) {
        const seco_status status = seco_config_load_file(handle.cfg, config_path.c_str());
        if (status != SECO_OK) return report_failure(status);
    }
    char* rendered = nullptr;
    const seco_status status = seco_config_render(handle.cfg, &rendered);
    if (status != SECO_OK) return report_failure(status);
    std::printf("# resolved configuration\n%s#\n", rendered);
    seco_string_free(rendered);
    return -1;  // keep going
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seco: sequence contrastive learning at desk scale"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path, data_path, out_dir;
    std::string checkpoint_path, train_data_path, eval_data_path;
    bool inject_fault = false;

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic sequence dataset");
    gen->add_option("--config", config_path, "config file (key = value lines)");
    gen->add_option("--out", out_path, "output dataset path")->required();

    CLI::App* train = app.add_subcommand("train", "pre-train the encoders on a dataset");
    train->add_option("--config", config_path, "config file (key = value lines)");
    train->add_option("--data", data_path, "dataset path")->required();
    train->add_option("--out-dir", out_dir, "directory for checkpoint.seck and metrics.csv")
        ->required();

    CLI::App* probe = app.add_subcommand("probe", "linear probe + order accuracy of a checkpoint");
    probe->add_option("--config", config_path, "config file (key = value lines)");
    probe->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();
    probe->add_option("--train-data", train_data_path, "probe training split")->required();
    probe->add_option("--eval-data", eval_data_path, "probe evaluation split")->required();

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient validation");
    gradcheck->add_option("--config", config_path, "config file (accepted for uniformity)");
    gradcheck->add_flag("--inject-fault", inject_fault,
                        "corrupt one backward rule to prove the checker catches it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(SECO_ERR_CONFIG);
    }

    ConfigHandle handle;
    const int early = load_and_print_config(handle, config_path);
    if (early >= 0) return early;

    if (gen->parsed()) {
        uint32_t sequences = 0;
        uint64_t bytes = 0;
        const seco_status status =
            seco_generate_data(handle.cfg, out_path.c_str(), &sequences, &bytes);
        if (status != SECO_OK) return report_failure(status);
        std::printf("wrote %u sequences to %s (%llu bytes)\n", sequences, out_path.c_str(),
                    static_cast<unsigned long long>(bytes));
        return 0;
    }

    if (train->parsed()) {
        const seco_status status = seco_train(handle.cfg, data_path.c_str(), out_dir.c_str());
        if (status != SECO_OK) return report_failure(status);
        std::printf("wrote %s/checkpoint.seck and %s/metrics.csv\n", out_dir.c_str(),
                    out_dir.c_str());
        return 0;
    }

    if (probe->parsed()) {
        char* report = nullptr;
        const seco_status status =
            seco_probe(handle.cfg, checkpoint_path.c_str(), train_data_path.c_str(),
                       eval_data_path.c_str(), &report);
        if (status != SECO_OK) return report_failure(status);
        std::printf("%s", report);
        seco_string_free(report);
        return 0;
    }

    char* report = nullptr;
    const seco_status status = seco_grad_check(inject_fault ? 1 : 0, &report);
    if (report) {
        std::printf("%s", report);
        seco_string_free(report);
    }
    if (status != SECO_OK) return report_failure(status);
    return 0;
}
