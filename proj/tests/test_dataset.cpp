#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "seco/dataset.hpp"
#include "seco/errors.hpp"
#include "seco/kernels.hpp"

using namespace seco;

namespace {

GenConfig tiny_config() {
    GenConfig cfg;
    cfg.num_classes = 3;
    cfg.sequences_per_class = 4;
    cfg.frames = 6;
    cfg.raw_dim = 8;
    cfg.seed = 42;
    return cfg;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("degenerate generator: no drift, no noise, identical frames") {
    GenConfig cfg = tiny_config();
    cfg.drift_scale = 0.0;
    cfg.frame_noise_sigma = 0.0;
    auto records = generate_dataset(cfg);
    REQUIRE(records.size() == 12);
    for (const SequenceRecord& rec : records) {
        for (const FrameVector& frame : rec.frames) {
            for (std::size_t i = 0; i < frame.size(); ++i) CHECK(frame[i] == rec.frames[0][i]);
        }
    }
}

TEST_CASE("generator is a pure function of its config") {
    auto a = generate_dataset(tiny_config());
    auto b = generate_dataset(tiny_config());
    REQUIRE(a.size() == b.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        CHECK(a[r].video_id == b[r].video_id);
        CHECK(a[r].class_id == b[r].class_id);
        for (std::size_t t = 0; t < a[r].frames.size(); ++t) {
            for (std::size_t i = 0; i < a[r].frames[t].size(); ++i) {
                CHECK(a[r].frames[t][i] == b[r].frames[t][i]);  // bitwise
            }
        }
    }

    GenConfig other = tiny_config();
    other.seed = 43;
    auto c = generate_dataset(other);
    bool identical = true;
    for (std::size_t i = 0; i < a[0].frames[0].size(); ++i) {
        if (a[0].frames[0][i] != c[0].frames[0][i]) identical = false;
    }
    CHECK_FALSE(identical);
}

TEST_CASE("noise-free drift gives constant inter-frame step drift/(L-1)") {
    GenConfig cfg = tiny_config();
    cfg.frame_noise_sigma = 0.0;
    cfg.drift_scale = 2.0;
    auto records = generate_dataset(cfg);
    const double expected = cfg.drift_scale / static_cast<double>(cfg.frames - 1);
    for (const SequenceRecord& rec : records) {
        for (std::size_t t = 0; t + 1 < rec.frames.size(); ++t) {
            double step2 = 0.0;
            for (std::size_t i = 0; i < rec.frames[t].size(); ++i) {
                const double diff = rec.frames[t + 1][i] - rec.frames[t][i];
                step2 += diff * diff;
            }
            CHECK(std::fabs(std::sqrt(step2) - expected) < 1e-9);
        }
    }
}

TEST_CASE("same seed with disjoint video_id ranges shares prototypes, not sequences") {
    GenConfig train = tiny_config();
    GenConfig eval = tiny_config();
    eval.sequences_per_class = 2;
    eval.video_id_base = 1000;
    auto a = generate_dataset(train);
    auto b = generate_dataset(eval);
    // Same class structure (noise-free check of prototype sharing would need
    // zero drift and offsets; here just check ids are disjoint and classes align).
    CHECK(b.front().video_id == 1000);
    CHECK(a.back().video_id < 1000);
    CHECK(b.front().class_id == 0);
}

TEST_CASE("generator sanity: classes are nearest-mean separable without noise") {
    GenConfig cfg = tiny_config();
    cfg.frame_noise_sigma = 0.0;
    cfg.sequences_per_class = 10;
    auto records = generate_dataset(cfg);

    // Per-class mean frame as the prototype estimate.
    std::map<std::uint32_t, std::vector<double>> means;
    std::map<std::uint32_t, std::size_t> counts;
    for (const SequenceRecord& rec : records) {
        auto& m = means[rec.class_id];
        if (m.empty()) m.assign(cfg.raw_dim, 0.0);
        for (const FrameVector& f : rec.frames) {
            for (std::size_t i = 0; i < f.size(); ++i) m[i] += f[i];
            counts[rec.class_id]++;
        }
    }
    for (auto& [c, m] : means) {
        for (double& v : m) v /= static_cast<double>(counts[c]);
    }

    for (const SequenceRecord& rec : records) {
        for (const FrameVector& f : rec.frames) {
            double best = 1e300;
            std::uint32_t best_class = 0;
            for (const auto& [c, m] : means) {
                double d2 = 0.0;
                for (std::size_t i = 0; i < f.size(); ++i) d2 += (f[i] - m[i]) * (f[i] - m[i]);
                if (d2 < best) {
                    best = d2;
                    best_class = c;
                }
            }
            CHECK(best_class == rec.class_id);
        }
    }
}

TEST_CASE("augment: identity, full dropout, perturbation") {
    Rng rng(1);
    FrameVector frame = {1.0, -2.0, 3.0, 0.5};

    AugmentConfig identity;
    identity.noise_sigma = 0.0;
    identity.drop_prob = 0.0;
    identity.scale_jitter = 0.0;
    FrameVector same = augment(frame, rng, identity);
    for (std::size_t i = 0; i < frame.size(); ++i) CHECK(same[i] == frame[i]);

    AugmentConfig drop_all;
    drop_all.drop_prob = 1.0;
    FrameVector zeroed = augment(frame, rng, drop_all);
    for (double v : zeroed) CHECK(v == 0.0);

    AugmentConfig noisy;
    noisy.noise_sigma = 0.1;
    noisy.drop_prob = 0.0;
    noisy.scale_jitter = 0.0;
    Rng r1(100), r2(200);
    FrameVector a = augment(frame, r1, noisy);
    FrameVector b = augment(frame, r2, noisy);
    bool differ = false;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        if (a[i] != b[i]) differ = true;
    }
    CHECK(differ);
}

TEST_CASE("sample_triplet forced triple at L=3 and the label rule") {
    GenConfig cfg = tiny_config();
    cfg.frames = 3;
    auto records = generate_dataset(cfg);
    Rng rng(7);
    AugmentConfig aug;
    for (int rep = 0; rep < 200; ++rep) {
        TripletSample s = sample_triplet(records[0], rng, aug);
        CHECK(s.frame_indices[0] == 0);
        CHECK(s.frame_indices[1] == 1);
        CHECK(s.frame_indices[2] == 2);
        CHECK(s.label == (s.anchor_is_first ? 1 : 0));
    }
}

TEST_CASE("sample_triplet rejects too-short sequences") {
    SequenceRecord rec;
    rec.frames = {FrameVector{1.0}, FrameVector{2.0}};
    Rng rng(1);
    AugmentConfig aug;
    CHECK_THROWS_AS(sample_triplet(rec, rng, aug), ArgumentError);
}

TEST_CASE("sample_triplet anchor and triple frequencies over 100k draws") {
    GenConfig cfg = tiny_config();
    cfg.frames = 6;  // C(6,3) = 20 ordered triples
    auto records = generate_dataset(cfg);
    Rng rng(99);
    AugmentConfig aug;
    aug.noise_sigma = 0.0;
    aug.drop_prob = 0.0;
    aug.scale_jitter = 0.0;

    const int n = 100000;
    int anchor_first = 0;
    std::map<std::array<std::size_t, 3>, int> triple_counts;
    for (int i = 0; i < n; ++i) {
        TripletSample s = sample_triplet(records[0], rng, aug);
        anchor_first += s.anchor_is_first ? 1 : 0;
        triple_counts[s.frame_indices]++;
        CHECK(s.frame_indices[0] < s.frame_indices[1]);
        CHECK(s.frame_indices[1] < s.frame_indices[2]);
    }

    const double first_freq = static_cast<double>(anchor_first) / n;
    CHECK(first_freq > 0.49);
    CHECK(first_freq < 0.51);

    const double p = 1.0 / 20.0;
    const double sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(triple_counts.size() == 20);
    for (const auto& [triple, count] : triple_counts) {
        CHECK(std::fabs(count - n * p) <= 3.0 * sigma);
    }
}

TEST_CASE("triplet label consistency: query source strictly precedes or follows both keys") {
    GenConfig cfg = tiny_config();
    cfg.frame_noise_sigma = 0.0;
    auto records = generate_dataset(cfg);
    Rng rng(5);
    AugmentConfig aug;
    aug.noise_sigma = 0.0;
    aug.drop_prob = 0.0;
    aug.scale_jitter = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        const SequenceRecord& seq = records[rep % records.size()];
        TripletSample s = sample_triplet(seq, rng, aug);
        const auto [t1, t2, t3] = s.frame_indices;
        // With identity augmentation the patches equal their source frames.
        const FrameVector& anchor_frame = seq.frames[s.anchor_is_first ? t1 : t3];
        for (std::size_t i = 0; i < anchor_frame.size(); ++i) {
            CHECK(s.query[i] == anchor_frame[i]);
            CHECK(s.key1[i] == anchor_frame[i]);
        }
        const std::size_t query_src = s.anchor_is_first ? t1 : t3;
        const std::size_t key2_src = s.anchor_is_first ? t2 : t1;
        const std::size_t key3_src = s.anchor_is_first ? t3 : t2;
        if (s.label == 1) {
            CHECK(query_src < key2_src);
            CHECK(query_src < key3_src);
        } else {
            CHECK(query_src > key2_src);
            CHECK(query_src > key3_src);
        }
        for (std::size_t i = 0; i < s.key2.size(); ++i) {
            CHECK(s.key2[i] == seq.frames[key2_src][i]);
            CHECK(s.key3[i] == seq.frames[key3_src][i]);
        }
    }
}

TEST_CASE("dataset file round trip is lossless at 32-bit precision") {
    auto records = generate_dataset(tiny_config());
    const std::string path = temp_path("seco_test_roundtrip.seco");
    write_dataset(records, path);
    auto loaded = read_dataset(path);

    REQUIRE(loaded.size() == records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        CHECK(loaded[r].video_id == records[r].video_id);
        CHECK(loaded[r].class_id == records[r].class_id);
        for (std::size_t t = 0; t < records[r].frames.size(); ++t) {
            for (std::size_t i = 0; i < records[r].frames[t].size(); ++i) {
                CHECK(loaded[r].frames[t][i] ==
                      static_cast<double>(static_cast<float>(records[r].frames[t][i])));
            }
        }
    }

    // Write-read-write gives byte-identical files.
    const std::string path2 = temp_path("seco_test_roundtrip2.seco");
    write_dataset(loaded, path2);
    CHECK(slurp(path) == slurp(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("corrupted magic, bad version, truncation are rejected") {
    auto records = generate_dataset(tiny_config());
    const std::string path = temp_path("seco_test_corrupt.seco");
    write_dataset(records, path);
    const std::vector<std::uint8_t> good = slurp(path);

    std::vector<std::uint8_t> bad_magic = good;
    bad_magic[0] = 'X';
    spit(path, bad_magic);
    CHECK_THROWS_AS(read_dataset(path), FormatError);

    std::vector<std::uint8_t> bad_version = good;
    bad_version[4] = 9;
    spit(path, bad_version);
    CHECK_THROWS_AS(read_dataset(path), FormatError);

    std::vector<std::uint8_t> truncated(good.begin(), good.end() - 7);
    spit(path, truncated);
    try {
        read_dataset(path);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }

    std::vector<std::uint8_t> padded = good;
    padded.push_back(0);
    spit(path, padded);
    CHECK_THROWS_AS(read_dataset(path), FormatError);

    std::remove(path.c_str());
    CHECK_THROWS_AS(read_dataset(path), IoError);
}
