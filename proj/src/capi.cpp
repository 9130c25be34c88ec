#include "seco.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "seco/config.hpp"
#include "seco/errors.hpp"
#include "seco/evaluation.hpp"
#include "seco/gradcheck_suite.hpp"
#include "seco/trainer.hpp"
#include "wire.hpp"

struct seco_config {
    seco::KeyValueConfig values;
};

namespace {

thread_local std::string g_last_error = "";

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

seco_status fail(seco_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs the body, translating exceptions into status codes.
template <typename Fn>
seco_status guarded(Fn&& body) {
    try {
        return body();
    } catch (const seco::IoError& e) {
        return fail(SECO_ERR_IO, e.what());
    } catch (const seco::FormatError& e) {
        return fail(SECO_ERR_CONFIG, e.what());
    } catch (const seco::ConfigError& e) {
        return fail(SECO_ERR_CONFIG, e.what());
    } catch (const seco::DivergenceError& e) {
        return fail(SECO_ERR_DIVERGED, e.what());
    } catch (const seco::ArgumentError& e) {
        return fail(SECO_ERR_INVALID, e.what());
    } catch (const seco::ContractError& e) {
        return fail(SECO_ERR_INVALID, e.what());
    } catch (const std::exception& e) {
        return fail(SECO_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SECO_ERR_INTERNAL, "unknown error");
    }
}

seco_status require(bool ok, const char* what) {
    return ok ? SECO_OK : fail(SECO_ERR_INVALID, std::string("null argument: ") + what);
}

}  // namespace

extern "C" {

seco_config* seco_config_create(void) {
    try {
        return new seco_config();
    } catch (...) {
        return nullptr;
    }
}

void seco_config_destroy(seco_config* cfg) { delete cfg; }

seco_status seco_config_load_file(seco_config* cfg, const char* path) {
    if (require(cfg && path, "config/path") != SECO_OK) return SECO_ERR_INVALID;
    return guarded([&] {
        cfg->values.load_file(path);
        return SECO_OK;
    });
}

seco_status seco_config_set(seco_config* cfg, const char* key, const char* value) {
    if (require(cfg && key && value, "config/key/value") != SECO_OK) return SECO_ERR_INVALID;
    return guarded([&] {
        cfg->values.set(key, value);
        return SECO_OK;
    });
}

seco_status seco_config_render(const seco_config* cfg, char** out) {
    if (require(cfg && out, "config/out") != SECO_OK) return SECO_ERR_INVALID;
    return guarded([&] {
        *out = dup_string(cfg->values.render());
        return *out ? SECO_OK : fail(SECO_ERR_INTERNAL, "allocation failed");
    });
}

seco_status seco_generate_data(const seco_config* cfg, const char* out_path,
                               uint32_t* num_sequences, uint64_t* file_bytes) {
    if (require(cfg && out_path, "config/out_path") != SECO_OK) return SECO_ERR_INVALID;
    return guarded([&] {
        const seco::GenConfig gen = cfg->values.gen_config();
        const auto records = seco::generate_dataset(gen);
        seco::write_dataset(records, out_path);
        if (num_sequences) *num_sequences = static_cast<uint32_t>(records.size());
        if (file_bytes) *file_bytes = std::filesystem::file_size(out_path);
        return SECO_OK;
    });
}

seco_status seco_train(const seco_config* cfg, const char* data_path, const char* out_dir) {
    if (require(cfg && data_path && out_dir, "config/data_path/out_dir") != SECO_OK) {
        return SECO_ERR_INVALID;
    }
    return guarded([&] {
        const seco::TrainConfig train_cfg = cfg->values.train_config();
        const auto records = seco::read_dataset(data_path);
        const seco::TrainResult result = seco::train(train_cfg, records);

        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw seco::IoError("cannot create output directory " + std::string(out_dir));
        const std::string metrics_path = std::string(out_dir) + "/metrics.csv";
        const std::string ckpt_path = std::string(out_dir) + "/checkpoint.seck";
        const std::string metrics = seco::format_metrics(result.metrics);
        seco::detail::write_file(metrics_path,
                                 std::vector<std::uint8_t>(metrics.begin(), metrics.end()));
        seco::save_checkpoint(result.state, ckpt_path);
        return SECO_OK;
    });
}

seco_status seco_probe(const seco_config* cfg, const char* checkpoint_path,
                       const char* train_data_path, const char* eval_data_path, char** report) {
    if (require(cfg && checkpoint_path && train_data_path && eval_data_path && report,
                "config/paths/report") != SECO_OK) {
        return SECO_ERR_INVALID;
    }
    return guarded([&] {
        const seco::ProbeConfig probe_cfg = cfg->values.probe_config();
        const seco::Checkpoint ckpt = seco::load_checkpoint(checkpoint_path);
        const auto train_records = seco::read_dataset(train_data_path);
        const auto eval_records = seco::read_dataset(eval_data_path);

        const std::size_t data_dim = train_records.front().frames.front().size();
        if (data_dim != ckpt.query_encoder.raw_dim()) {
            throw seco::ConfigError("checkpoint expects raw_dim " +
                                    std::to_string(ckpt.query_encoder.raw_dim()) +
                                    " but dataset has " + std::to_string(data_dim));
        }

        const seco::FeatureMatrix train_features =
            seco::extract_features(ckpt.query_encoder, train_records);
        const seco::FeatureMatrix eval_features =
            seco::extract_features(ckpt.query_encoder, eval_records);
        const seco::ProbeResult probe =
            seco::linear_probe(train_features, eval_features, probe_cfg);

        seco::AugmentConfig eval_augment;  // identity: held-out triplets are clean
        if (probe_cfg.eval_augment) {
            eval_augment = cfg->values.train_config().augment;
        } else {
            eval_augment.noise_sigma = 0.0;
            eval_augment.drop_prob = 0.0;
            eval_augment.scale_jitter = 0.0;
        }
        const double order = seco::order_accuracy(
            ckpt.query_encoder, ckpt.key_encoder, ckpt.order_classifier, eval_records,
            eval_augment, probe_cfg.order_samples, probe_cfg.seed);

        *report = dup_string(seco::format_probe_report(probe, order));
        return *report ? SECO_OK : fail(SECO_ERR_INTERNAL, "allocation failed");
    });
}

seco_status seco_grad_check(int inject_fault, char** report) {
    if (require(report != nullptr, "report") != SECO_OK) return SECO_ERR_INVALID;
    return guarded([&] {
        const seco::GradCheckSuiteResult result = seco::run_gradcheck_suite(inject_fault != 0);
        *report = dup_string(result.report);
        if (!*report) return fail(SECO_ERR_INTERNAL, "allocation failed");
        if (!result.pass) {
            return fail(SECO_ERR_CHECK_FAILED, std::to_string(result.failed) + " of " +
                                                   std::to_string(result.targets) +
                                                   " gradcheck targets failed");
        }
        return SECO_OK;
    });
}

const char* seco_last_error(void) { return g_last_error.c_str(); }

void seco_string_free(char* s) { std::free(s); }

const char* seco_version(void) { return "0.1.0"; }

}  // extern "C"
