#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "seco/embedding.hpp"
#include "seco/rng.hpp"

namespace seco {

// One synthetic video-like sequence: L frames of raw_dim values. Frames of a
// class share a prototype; frames of a sequence drift monotonically along
// the class drift direction, so temporal direction is recoverable.
struct SequenceRecord {
    std::uint32_t video_id = 0;
    std::uint32_t class_id = 0;
    std::vector<FrameVector> frames;
};

struct GenConfig {
    std::uint32_t num_classes = 10;
    std::uint32_t sequences_per_class = 30;
    std::uint32_t frames = 16;  // L
    std::uint32_t raw_dim = 64;
    double prototype_scale = 1.0;
    double drift_scale = 2.0;
    double frame_noise_sigma = 0.1;
    std::uint64_t seed = 1;
    // First video_id to assign. Generating a second file with the same seed
    // and a disjoint id range yields fresh sequences drawn from the same
    // class prototypes, which is how train/eval splits are produced.
    std::uint32_t video_id_base = 0;

    void validate() const;
};

struct AugmentConfig {
    double noise_sigma = 0.1;   // additive gaussian noise per coordinate
    double drop_prob = 0.2;     // independent coordinate dropout
    double scale_jitter = 0.1;  // global scaling in [1 - s, 1 + s]

    void validate() const;
};

// One training example. The anchor is the temporally first or last of the
// three sampled frames; query and key1 are independent augmentations of it.
// Keys 2 and 3 are augmentations of the two non-anchor frames in temporal
// order. label == 1 iff the anchor (hence the query) precedes both keys.
struct TripletSample {
    FrameVector query;
    FrameVector key1;
    FrameVector key2;
    FrameVector key3;
    int label = 0;
    std::array<std::size_t, 3> frame_indices = {0, 0, 0};  // t1 < t2 < t3
    bool anchor_is_first = false;
};

// Deterministic in cfg (including seed); per-sequence draws use independent
// sub-streams keyed by (seed, video_id).
std::vector<SequenceRecord> generate_dataset(const GenConfig& cfg);

FrameVector augment(const FrameVector& frame, Rng& rng, const AugmentConfig& cfg);

// Uniform choice among the C(L,3) ordered index triples, anchor first or
// last with probability 1/2 each, then augmentation of all four patches.
TripletSample sample_triplet(const SequenceRecord& seq, Rng& rng, const AugmentConfig& cfg);

// Binary dataset file, little-endian: magic "SECO", u32 version (= 1),
// u32 num_sequences, u32 frames_per_sequence, u32 raw_dim, then per sequence
// u32 video_id, u32 class_id and L * raw_dim f32 values row-major by frame.
void write_dataset(const std::vector<SequenceRecord>& records, const std::string& path);
std::vector<SequenceRecord> read_dataset(const std::string& path);

}  // namespace seco
