#include "seco/dataset.hpp"

#include <cmath>

#include "seco/errors.hpp"
#include "wire.hpp"

namespace seco {

namespace {

constexpr char kDatasetMagic[4] = {'S', 'E', 'C', 'O'};
constexpr std::uint32_t kDatasetVersion = 1;

std::vector<double> normal_vector(Rng& rng, std::size_t n, double sigma) {
    std::vector<double> v(n);
    for (double& x : v) x = sigma * rng.normal();
    return v;
}

}  // namespace

void GenConfig::validate() const {
    if (num_classes == 0 || sequences_per_class == 0 || raw_dim == 0) {
        throw ConfigError("generator counts must be positive");
    }
    if (frames < 3) {
        throw ConfigError("generator needs at least 3 frames per sequence, got " +
                          std::to_string(frames));
    }
    if (!(prototype_scale > 0.0)) throw ConfigError("prototype_scale must be positive");
    if (drift_scale < 0.0 || frame_noise_sigma < 0.0) {
        throw ConfigError("drift_scale and frame_noise_sigma must be nonnegative");
    }
}

void AugmentConfig::validate() const {
    if (noise_sigma < 0.0) throw ConfigError("augment noise_sigma must be nonnegative");
    if (drop_prob < 0.0 || drop_prob > 1.0) throw ConfigError("augment drop_prob must be in [0, 1]");
    if (scale_jitter < 0.0 || scale_jitter > 1.0) {
        throw ConfigError("augment scale_jitter must be in [0, 1]");
    }
}

std::vector<SequenceRecord> generate_dataset(const GenConfig& cfg) {
    cfg.validate();
    Rng master(cfg.seed);

    // Class prototypes and unit drift directions come from the master stream.
    std::vector<std::vector<double>> prototypes(cfg.num_classes);
    std::vector<std::vector<double>> drift_dirs(cfg.num_classes);
    for (std::uint32_t c = 0; c < cfg.num_classes; ++c) {
        prototypes[c] = normal_vector(master, cfg.raw_dim, cfg.prototype_scale);
        std::vector<double> dir = normal_vector(master, cfg.raw_dim, 1.0);
        const double norm = detail::l2_norm(dir);
        for (double& x : dir) x /= norm;
        drift_dirs[c] = std::move(dir);
    }

    std::vector<SequenceRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.num_classes) * cfg.sequences_per_class);
    std::uint32_t video_id = cfg.video_id_base;
    for (std::uint32_t c = 0; c < cfg.num_classes; ++c) {
        for (std::uint32_t s = 0; s < cfg.sequences_per_class; ++s, ++video_id) {
            Rng sub = Rng::stream(cfg.seed, video_id);
            const std::vector<double> offset =
                normal_vector(sub, cfg.raw_dim, cfg.prototype_scale / 4.0);
            SequenceRecord rec;
            rec.video_id = video_id;
            rec.class_id = c;
            rec.frames.reserve(cfg.frames);
            for (std::uint32_t t = 0; t < cfg.frames; ++t) {
                const double progress =
                    static_cast<double>(t) / static_cast<double>(cfg.frames - 1);
                FrameVector frame(cfg.raw_dim);
                for (std::uint32_t i = 0; i < cfg.raw_dim; ++i) {
                    frame[i] = prototypes[c][i] + offset[i] +
                               progress * cfg.drift_scale * drift_dirs[c][i] +
                               cfg.frame_noise_sigma * sub.normal();
                }
                rec.frames.push_back(std::move(frame));
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

FrameVector augment(const FrameVector& frame, Rng& rng, const AugmentConfig& cfg) {
    cfg.validate();
    FrameVector out = frame;
    for (double& v : out) v += cfg.noise_sigma * rng.normal();
    for (double& v : out) {
        if (rng.uniform() < cfg.drop_prob) v = 0.0;
    }
    const double factor = rng.uniform(1.0 - cfg.scale_jitter, 1.0 + cfg.scale_jitter);
    for (double& v : out) v *= factor;
    return out;
}

TripletSample sample_triplet(const SequenceRecord& seq, Rng& rng, const AugmentConfig& cfg) {
    const std::size_t frame_count = seq.frames.size();
    if (frame_count < 3) {
        throw ArgumentError("sample_triplet: sequence " + std::to_string(seq.video_id) +
                            " has only " + std::to_string(frame_count) + " frames, need 3");
    }
    // Rejection keeps the choice uniform over distinct triples; sorting
    // afterwards makes it uniform over the C(L,3) ordered combinations.
    std::size_t t1, t2, t3;
    do {
        t1 = static_cast<std::size_t>(rng.below(frame_count));
        t2 = static_cast<std::size_t>(rng.below(frame_count));
        t3 = static_cast<std::size_t>(rng.below(frame_count));
    } while (t1 == t2 || t1 == t3 || t2 == t3);
    if (t1 > t2) std::swap(t1, t2);
    if (t2 > t3) std::swap(t2, t3);
    if (t1 > t2) std::swap(t1, t2);

    TripletSample sample;
    sample.frame_indices = {t1, t2, t3};
    sample.anchor_is_first = rng.uniform() < 0.5;
    sample.label = sample.anchor_is_first ? 1 : 0;

    const FrameVector& anchor = seq.frames[sample.anchor_is_first ? t1 : t3];
    sample.query = augment(anchor, rng, cfg);
    sample.key1 = augment(anchor, rng, cfg);
    if (sample.anchor_is_first) {
        sample.key2 = augment(seq.frames[t2], rng, cfg);
        sample.key3 = augment(seq.frames[t3], rng, cfg);
    } else {
        sample.key2 = augment(seq.frames[t1], rng, cfg);
        sample.key3 = augment(seq.frames[t2], rng, cfg);
    }
    return sample;
}

void write_dataset(const std::vector<SequenceRecord>& records, const std::string& path) {
    if (records.empty()) throw ArgumentError("write_dataset: no records");
    const std::size_t frames = records.front().frames.size();
    const std::size_t raw_dim = records.front().frames.front().size();

    std::vector<std::uint8_t> bytes;
    bytes.reserve(20 + records.size() * (8 + frames * raw_dim * 4));
    bytes.insert(bytes.end(), kDatasetMagic, kDatasetMagic + 4);
    detail::put_u32(bytes, kDatasetVersion);
    detail::put_u32(bytes, static_cast<std::uint32_t>(records.size()));
    detail::put_u32(bytes, static_cast<std::uint32_t>(frames));
    detail::put_u32(bytes, static_cast<std::uint32_t>(raw_dim));
    for (const SequenceRecord& rec : records) {
        if (rec.frames.size() != frames) {
            throw ArgumentError("write_dataset: sequence " + std::to_string(rec.video_id) +
                                " has " + std::to_string(rec.frames.size()) + " frames, expected " +
                                std::to_string(frames));
        }
        detail::put_u32(bytes, rec.video_id);
        detail::put_u32(bytes, rec.class_id);
        for (const FrameVector& frame : rec.frames) {
            if (frame.size() != raw_dim) {
                throw ArgumentError("write_dataset: frame length " + std::to_string(frame.size()) +
                                    " does not match raw_dim " + std::to_string(raw_dim));
            }
            for (double v : frame) detail::put_f32(bytes, static_cast<float>(v));
        }
    }
    detail::write_file(path, bytes);
}

std::vector<SequenceRecord> read_dataset(const std::string& path) {
    const std::vector<std::uint8_t> bytes = detail::read_file(path);
    detail::ByteReader reader(bytes.data(), bytes.size(), path);
    reader.expect_magic(kDatasetMagic);
    const std::uint32_t version = reader.u32("version");
    if (version != kDatasetVersion) {
        throw FormatError(path + ": unsupported dataset version " + std::to_string(version) +
                          ", expected " + std::to_string(kDatasetVersion));
    }
    const std::uint32_t count = reader.u32("sequence count");
    const std::uint32_t frames = reader.u32("frames per sequence");
    const std::uint32_t raw_dim = reader.u32("raw dim");
    if (count == 0 || frames == 0 || raw_dim == 0) {
        throw FormatError(path + ": zero-sized dataset header");
    }

    std::vector<SequenceRecord> records;
    records.reserve(count);
    for (std::uint32_t r = 0; r < count; ++r) {
        SequenceRecord rec;
        rec.video_id = reader.u32("video id");
        rec.class_id = reader.u32("class id");
        rec.frames.reserve(frames);
        for (std::uint32_t t = 0; t < frames; ++t) {
            FrameVector frame(raw_dim);
            for (std::uint32_t i = 0; i < raw_dim; ++i) {
                frame[i] = static_cast<double>(reader.f32("frame value"));
            }
            rec.frames.push_back(std::move(frame));
        }
        records.push_back(std::move(rec));
    }
    reader.expect_consumed();
    return records;
}

}  // namespace seco
