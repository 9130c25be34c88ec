#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "seco/errors.hpp"
#include "seco/evaluation.hpp"
#include "seco/rng.hpp"
#include "seco/trainer.hpp"

using namespace seco;

namespace {

EncoderArch small_arch() {
    EncoderArch arch;
    arch.raw_dim = 8;
    arch.backbone_widths = {10, 6};
    arch.head_hidden_width = 6;
    arch.embed_dim = 4;
    return arch;
}

GenConfig small_gen(std::uint64_t seed = 3, std::uint32_t per_class = 8) {
    GenConfig cfg;
    cfg.num_classes = 4;
    cfg.sequences_per_class = per_class;
    cfg.frames = 6;
    cfg.raw_dim = 8;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("extract_features: identical frames give the single-frame feature") {
    Rng rng(1);
    EncoderParams enc = init_encoder(small_arch(), rng);
    SequenceRecord rec;
    rec.video_id = 0;
    rec.class_id = 2;
    FrameVector frame(8);
    for (double& v : frame) v = rng.normal();
    for (int t = 0; t < 5; ++t) rec.frames.push_back(frame);

    FeatureMatrix fm = extract_features(enc, {rec});
    const std::vector<double> single = backbone_features(enc, frame);
    REQUIRE(fm.rows.size() == 1);
    CHECK(fm.labels[0] == 2);
    for (std::size_t i = 0; i < single.size(); ++i) {
        CHECK(std::fabs(fm.rows[0][i] - single[i]) < 1e-15);
    }
}

TEST_CASE("extract_features: zero backbone weights give zero features") {
    Rng rng(2);
    EncoderParams enc = init_encoder(small_arch(), rng);
    for (DenseLayer& layer : enc.backbone) {
        layer.weight.fill(0.0);
        layer.bias.fill(0.0);
    }
    auto records = generate_dataset(small_gen());
    FeatureMatrix fm = extract_features(enc, records);
    for (const auto& row : fm.rows) {
        for (double v : row) CHECK(v == 0.0);
    }
}

TEST_CASE("extract_features matches hand-averaged per-frame encodings") {
    Rng rng(3);
    EncoderParams enc = init_encoder(small_arch(), rng);
    auto records = generate_dataset(small_gen());
    FeatureMatrix fm = extract_features(enc, records);
    for (std::size_t r = 0; r < records.size(); ++r) {
        std::vector<double> mean(enc.feature_dim(), 0.0);
        for (const FrameVector& frame : records[r].frames) {
            const std::vector<double> f = backbone_features(enc, frame);
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += f[i];
        }
        for (double& v : mean) v /= static_cast<double>(records[r].frames.size());
        for (std::size_t i = 0; i < mean.size(); ++i) {
            CHECK(std::fabs(fm.rows[r][i] - mean[i]) < 1e-12);
        }
    }
}

TEST_CASE("extract_features row i depends only on sequence i (order invariance)") {
    Rng rng(4);
    EncoderParams enc = init_encoder(small_arch(), rng);
    auto records = generate_dataset(small_gen());
    FeatureMatrix forward = extract_features(enc, records);
    std::vector<SequenceRecord> reversed(records.rbegin(), records.rend());
    FeatureMatrix backward = extract_features(enc, reversed);
    const std::size_t n = records.size();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < forward.width(); ++i) {
            CHECK(forward.rows[r][i] == backward.rows[n - 1 - r][i]);
        }
    }
}

TEST_CASE("linear_probe: perfect score when eval equals separable train") {
    // Noise-free generator keeps classes linearly separable in raw space,
    // and the backbone is a fixed transform of it.
    GenConfig gen = small_gen();
    gen.frame_noise_sigma = 0.0;
    auto records = generate_dataset(gen);
    Rng rng(5);
    EncoderParams enc = init_encoder(small_arch(), rng);
    FeatureMatrix fm = extract_features(enc, records);
    ProbeConfig cfg;
    ProbeResult result = linear_probe(fm, fm, cfg);
    CHECK(result.top1 == 1.0);
    for (double acc : result.per_class) CHECK(acc == 1.0);
    CHECK(result.train_rows == records.size());
}

TEST_CASE("linear_probe determinism") {
    auto records = generate_dataset(small_gen());
    Rng rng(6);
    EncoderParams enc = init_encoder(small_arch(), rng);
    FeatureMatrix fm = extract_features(enc, records);
    ProbeConfig cfg;
    CHECK(linear_probe(fm, fm, cfg).top1 == linear_probe(fm, fm, cfg).top1);
}

TEST_CASE("linear_probe: pure-noise features score near chance") {
    ProbeConfig cfg;
    double total = 0.0;
    const int seeds = 5;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(100 + s);
        FeatureMatrix train, eval;
        const std::size_t per_class = 40, classes = 10, width = 16;
        for (std::uint32_t c = 0; c < classes; ++c) {
            for (std::size_t i = 0; i < per_class; ++i) {
                std::vector<double> row(width);
                for (double& v : row) v = rng.normal();
                train.rows.push_back(row);
                train.labels.push_back(c);
                for (double& v : row) v = rng.normal();
                eval.rows.push_back(row);
                eval.labels.push_back(c);
            }
        }
        total += linear_probe(train, eval, cfg).top1;
    }
    const double mean_top1 = total / seeds;
    CHECK(mean_top1 > 0.05);
    CHECK(mean_top1 < 0.15);
}

TEST_CASE("linear_probe: constant features predict the majority class") {
    ProbeConfig cfg;
    FeatureMatrix train, eval;
    // Class 1 is the majority (3 of 5 rows).
    for (int i = 0; i < 5; ++i) {
        train.rows.push_back({1.0, 1.0});
        train.labels.push_back(i < 3 ? 1 : (i == 3 ? 0 : 2));
    }
    for (int i = 0; i < 10; ++i) {
        eval.rows.push_back({1.0, 1.0});
        eval.labels.push_back(i < 4 ? 1 : (i < 7 ? 0 : 2));
    }
    ProbeResult result = linear_probe(train, eval, cfg);
    CHECK(result.top1 == doctest::Approx(0.4));  // majority-class frequency in eval
}

TEST_CASE("linear_probe rejects a class missing from the train split") {
    FeatureMatrix train, eval;
    train.rows = {{0.0, 1.0}, {1.0, 0.0}};
    train.labels = {0, 2};  // class 1 missing
    eval.rows = {{0.5, 0.5}};
    eval.labels = {1};
    ProbeConfig cfg;
    CHECK_THROWS_AS(linear_probe(train, eval, cfg), ConfigError);
}

TEST_CASE("linear_probe standardizes with train statistics only") {
    // Scale-shifted eval rows: if eval stats were used, standardized eval
    // would equal standardized train and the score would be perfect; with
    // train stats the shifted rows land far from every class.
    ProbeConfig cfg;
    FeatureMatrix train;
    Rng rng(7);
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < 20; ++i) {
            train.rows.push_back({c + 0.01 * rng.normal(), c + 0.01 * rng.normal()});
            train.labels.push_back(c);
        }
    }
    FeatureMatrix eval_same = train;
    ProbeResult same = linear_probe(train, eval_same, cfg);
    CHECK(same.top1 == 1.0);

    FeatureMatrix eval_shifted = train;
    for (auto& row : eval_shifted.rows) {
        for (double& v : row) v = v * 1000.0 + 500.0;
    }
    ProbeResult shifted = linear_probe(train, eval_shifted, cfg);
    // Shifted rows standardized by train stats are enormous and all land on
    // one side: at most one class can stay fully correct.
    CHECK(shifted.top1 < 0.75);
}

TEST_CASE("order_accuracy: zero classifier sits at the label frequency") {
    auto records = generate_dataset(small_gen());
    Rng rng(8);
    EncoderParams enc = init_encoder(small_arch(), rng);
    // Positive biases rule out an all-zero hidden layer at this tiny width.
    for (Tensor* t : enc.tensors()) {
        if (t->rank() == 1) t->fill(0.05);
    }
    OrderClassifierParams phi = zero_order_classifier(4);
    AugmentConfig aug;
    const double acc = order_accuracy(enc, enc, phi, records, aug, 4000, 9);
    // Probability is exactly 0.5 everywhere, predicting label 1 always.
    CHECK(acc > 0.45);
    CHECK(acc < 0.55);
}

TEST_CASE("order_accuracy: negating the classifier complements the accuracy") {
    auto records = generate_dataset(small_gen());
    Rng rng(10);
    EncoderParams enc = init_encoder(small_arch(), rng);
    for (Tensor* t : enc.tensors()) {
        if (t->rank() == 1) t->fill(0.05);
    }
    OrderClassifierParams phi = zero_order_classifier(4);
    for (std::size_t i = 0; i < phi.weight.size(); ++i) phi.weight[i] = rng.uniform(-1, 1);
    phi.bias[0] = 0.3;
    OrderClassifierParams negated = phi;
    for (std::size_t i = 0; i < negated.weight.size(); ++i) negated.weight[i] = -negated.weight[i];
    negated.bias[0] = -negated.bias[0];
    AugmentConfig aug;
    const double acc = order_accuracy(enc, enc, phi, records, aug, 2000, 11);
    const double flipped = order_accuracy(enc, enc, negated, records, aug, 2000, 11);
    // Same seed, same triplets; predictions flip except at exact ties (p == 0.5
    // maps to 1 under both signs), which random weights make improbable.
    CHECK(std::fabs((1.0 - acc) - flipped) < 1e-9);
}

TEST_CASE("probe report format") {
    ProbeResult probe;
    probe.top1 = 0.8125;
    probe.per_class = {1.0, 0.625};
    std::string report = format_probe_report(probe, 0.75);
    CHECK(report == "top1,0.812500\nacc_c0,1.000000\nacc_c1,0.625000\norder_acc,0.750000\n");
}
