#include "seco/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <vector>

#include "seco/errors.hpp"

namespace seco {

namespace {

enum class ValueKind { kU32, kU64, kReal, kRealList3, kU32List };

struct KeySpec {
    const char* key;
    const char* default_value;
    ValueKind kind;
};

// Single source of truth for keys, defaults, and value shapes.
constexpr std::array<KeySpec, 29> kRegistry = {{
    {"gen.num_classes", "10", ValueKind::kU32},
    {"gen.sequences_per_class", "30", ValueKind::kU32},
    {"gen.frames", "16", ValueKind::kU32},
    {"gen.raw_dim", "64", ValueKind::kU32},
    {"gen.prototype_scale", "1.0", ValueKind::kReal},
    {"gen.drift_scale", "2.0", ValueKind::kReal},
    {"gen.frame_noise_sigma", "0.1", ValueKind::kReal},
    {"gen.seed", "1", ValueKind::kU64},
    {"gen.video_id_base", "0", ValueKind::kU32},
    {"train.epochs", "200", ValueKind::kU32},
    {"train.batch_size", "32", ValueKind::kU32},
    {"train.lr0", "0.05", ValueKind::kReal},
    {"train.sgd_momentum", "0.9", ValueKind::kReal},
    {"train.tau", "0.1", ValueKind::kReal},
    {"train.alpha", "0.999", ValueKind::kReal},
    {"train.queue_capacity", "1024", ValueKind::kU32},
    {"train.loss_weights", "1,1,1", ValueKind::kRealList3},
    {"train.seed", "1", ValueKind::kU64},
    {"train.backbone_widths", "64,64", ValueKind::kU32List},
    {"train.head_hidden_width", "64", ValueKind::kU32},
    {"train.embed_dim", "16", ValueKind::kU32},
    {"train.aug_noise", "0.1", ValueKind::kReal},
    {"train.aug_drop_prob", "0.2", ValueKind::kReal},
    {"train.aug_scale_jitter", "0.1", ValueKind::kReal},
    {"probe.iterations", "500", ValueKind::kU32},
    {"probe.lr", "0.5", ValueKind::kReal},
    {"probe.order_samples", "2000", ValueKind::kU32},
    {"probe.seed", "1", ValueKind::kU64},
    {"probe.eval_augment", "0", ValueKind::kU32},
}};

const KeySpec* find_key(const std::string& key) {
    for (const KeySpec& spec : kRegistry) {
        if (key == spec.key) return &spec;
    }
    return nullptr;
}

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t at = 0;
    while (true) {
        const std::size_t comma = s.find(',', at);
        if (comma == std::string::npos) {
            parts.push_back(trim(s.substr(at)));
            return parts;
        }
        parts.push_back(trim(s.substr(at, comma - at)));
        at = comma + 1;
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(key + ": cannot parse \"" + value + "\" as an unsigned integer");
    }
    return out;
}

std::uint32_t parse_u32(const std::string& key, const std::string& value) {
    const std::uint64_t v = parse_u64(key, value);
    if (v > 0xffffffffULL) throw ConfigError(key + ": value " + value + " is out of range");
    return static_cast<std::uint32_t>(v);
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse \"" + value + "\" as a real number");
    }
}

void validate_value(const std::string& key, const std::string& value, ValueKind kind) {
    switch (kind) {
        case ValueKind::kU32:
            parse_u32(key, value);
            break;
        case ValueKind::kU64:
            parse_u64(key, value);
            break;
        case ValueKind::kReal:
            parse_real(key, value);
            break;
        case ValueKind::kRealList3: {
            const auto parts = split_commas(value);
            if (parts.size() != 3) {
                throw ConfigError(key + ": expected 3 comma-separated reals, got \"" + value + "\"");
            }
            for (const std::string& p : parts) parse_real(key, p);
            break;
        }
        case ValueKind::kU32List: {
            const auto parts = split_commas(value);
            if (parts.empty()) throw ConfigError(key + ": expected a comma-separated list");
            for (const std::string& p : parts) parse_u32(key, p);
            break;
        }
    }
}

}  // namespace

KeyValueConfig::KeyValueConfig() {
    for (const KeySpec& spec : kRegistry) values_[spec.key] = spec.default_value;
}

void KeyValueConfig::parse_line(const std::string& raw, const std::string& where,
                                std::size_t line_no) {
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
        throw ConfigError(where + ":" + std::to_string(line_no) + ": expected `key = value`, got \"" +
                          trim(raw) + "\"");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
}

void KeyValueConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        parse_line(line, path, line_no);
    }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError("unknown config key \"" + key + "\"");
    validate_value(key, value, spec->kind);
    values_[key] = value;
}

const std::string& KeyValueConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key \"" + key + "\"");
    return it->second;
}

GenConfig KeyValueConfig::gen_config() const {
    GenConfig cfg;
    cfg.num_classes = parse_u32("gen.num_classes", get("gen.num_classes"));
    cfg.sequences_per_class = parse_u32("gen.sequences_per_class", get("gen.sequences_per_class"));
    cfg.frames = parse_u32("gen.frames", get("gen.frames"));
    cfg.raw_dim = parse_u32("gen.raw_dim", get("gen.raw_dim"));
    cfg.prototype_scale = parse_real("gen.prototype_scale", get("gen.prototype_scale"));
    cfg.drift_scale = parse_real("gen.drift_scale", get("gen.drift_scale"));
    cfg.frame_noise_sigma = parse_real("gen.frame_noise_sigma", get("gen.frame_noise_sigma"));
    cfg.seed = parse_u64("gen.seed", get("gen.seed"));
    cfg.video_id_base = parse_u32("gen.video_id_base", get("gen.video_id_base"));
    cfg.validate();
    return cfg;
}

TrainConfig KeyValueConfig::train_config() const {
    TrainConfig cfg;
    cfg.epochs = parse_u32("train.epochs", get("train.epochs"));
    cfg.batch_size = parse_u32("train.batch_size", get("train.batch_size"));
    cfg.lr0 = parse_real("train.lr0", get("train.lr0"));
    cfg.sgd_momentum = parse_real("train.sgd_momentum", get("train.sgd_momentum"));
    cfg.tau = parse_real("train.tau", get("train.tau"));
    cfg.alpha = parse_real("train.alpha", get("train.alpha"));
    cfg.queue_capacity = parse_u32("train.queue_capacity", get("train.queue_capacity"));
    const auto weights = split_commas(get("train.loss_weights"));
    for (std::size_t i = 0; i < 3; ++i) {
        cfg.loss_weights[i] = parse_real("train.loss_weights", weights[i]);
    }
    cfg.seed = parse_u64("train.seed", get("train.seed"));
    cfg.backbone_widths.clear();
    for (const std::string& w : split_commas(get("train.backbone_widths"))) {
        cfg.backbone_widths.push_back(parse_u32("train.backbone_widths", w));
    }
    cfg.head_hidden_width = parse_u32("train.head_hidden_width", get("train.head_hidden_width"));
    cfg.embed_dim = parse_u32("train.embed_dim", get("train.embed_dim"));
    cfg.augment.noise_sigma = parse_real("train.aug_noise", get("train.aug_noise"));
    cfg.augment.drop_prob = parse_real("train.aug_drop_prob", get("train.aug_drop_prob"));
    cfg.augment.scale_jitter = parse_real("train.aug_scale_jitter", get("train.aug_scale_jitter"));
    cfg.validate();
    return cfg;
}

ProbeConfig KeyValueConfig::probe_config() const {
    ProbeConfig cfg;
    cfg.iterations = parse_u32("probe.iterations", get("probe.iterations"));
    cfg.lr = parse_real("probe.lr", get("probe.lr"));
    cfg.order_samples = parse_u32("probe.order_samples", get("probe.order_samples"));
    cfg.seed = parse_u64("probe.seed", get("probe.seed"));
    cfg.eval_augment = parse_u32("probe.eval_augment", get("probe.eval_augment")) != 0;
    if (!(cfg.lr > 0.0)) throw ConfigError("probe.lr must be positive");
    if (cfg.iterations == 0) throw ConfigError("probe.iterations must be positive");
    if (cfg.order_samples == 0) throw ConfigError("probe.order_samples must be positive");
    return cfg;
}

std::string KeyValueConfig::render() const {
    std::string out;
    for (const KeySpec& spec : kRegistry) {
        out += spec.key;
        out += " = ";
        out += get(spec.key);
        out += "\n";
    }
    return out;
}

}  // namespace seco
