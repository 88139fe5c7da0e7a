#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "djsr/resample.hpp"
#include "djsr/self_similarity.hpp"
#include "djsr/synthetic.hpp"
#include "oracles.hpp"

using namespace djsr;
namespace fs = std::filesystem;

namespace {

SelfExampleParams small_params() {
    SelfExampleParams p;
    p.patch = 7;
    p.stride = 2;
    p.search_half_extent = 3;
    return p;
}

}  // namespace

TEST(Pyramid, LevelDimsFollowRelativeScale) {
    const Image y(100, 80, 0.5);
    const ScalePyramid pyr = build_pyramid(y, 1.2, 5);
    ASSERT_EQ(pyr.count(), 5);
    EXPECT_EQ(pyr.half(), 2);
    EXPECT_EQ(pyr.levels[2], y);
    const std::vector<double> scales{1 / 1.44, 1 / 1.2, 1.0, 1.2, 1.44};
    for (int k = 0; k < 5; ++k) {
        EXPECT_NEAR(pyr.relative_scale(k), scales[k], 1e-12);
        EXPECT_EQ(pyr.levels[k].dims(), scaled_dims(y.dims(), scales[k]));
    }
    EXPECT_EQ(pyr.levels[0].dims(), (Dims{69, 56}));
    EXPECT_EQ(pyr.levels[4].dims(), (Dims{144, 115}));
    EXPECT_THROW(build_pyramid(y, 1.2, 4), Error);
    EXPECT_THROW(build_pyramid(y, 1.0, 5), Error);
}

TEST(SmoothPair, ConstantLevelStaysConstant) {
    const SmoothPair sp = smooth_pair(Image(20, 30, 0.7), 1.2);
    EXPECT_EQ(sp.upsampled.dims(), (Dims{24, 36}));
    EXPECT_EQ(sp.smoothed.dims(), (Dims{20, 30}));
    for (double v : sp.smoothed.pixels()) EXPECT_NEAR(v, 0.7, 1e-12);
}

TEST(NnMatch, AgreesWithBruteForce) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> dim(8, 20), qd(2, 6), half(-1, 6), cnt(1, 10);
    for (int trial = 0; trial < 100; ++trial) {
        const Image search = oracle::random_image(dim(rng), dim(rng), rng);
        const int qr = std::min(qd(rng), search.rows()), qc = std::min(qd(rng), search.cols());
        const Image query = oracle::random_image(qr, qc, rng);
        MatchWindow w;
        w.half_extent = half(rng);
        w.row = std::uniform_int_distribution<int>(0, search.rows() - qr)(rng);
        w.col = std::uniform_int_distribution<int>(0, search.cols() - qc)(rng);
        const int count = cnt(rng);
        const MatchResult got = nn_match(query, search, w, count);
        const auto expect = oracle::brute_force_match(query, search, w, count);
        ASSERT_EQ(got.matches.size(), expect.size()) << "trial " << trial;
        EXPECT_EQ(got.short_list, static_cast<int>(expect.size()) < count);
        for (std::size_t k = 0; k < expect.size(); ++k) {
            EXPECT_EQ(got.matches[k].row, expect[k].row);
            EXPECT_EQ(got.matches[k].col, expect[k].col);
            EXPECT_EQ(got.matches[k].error, expect[k].error);
        }
    }
}

TEST(NnMatch, TiesBreakRowMajor) {
    const Image search(6, 6, 0.5);
    const Image query(2, 2, 0.5);
    const MatchResult res = nn_match(query, search, MatchWindow{0, 0, -1}, 4);
    ASSERT_EQ(res.matches.size(), 4u);
    const int expect[4][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}};
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(res.matches[k].row, expect[k][0]);
        EXPECT_EQ(res.matches[k].col, expect[k][1]);
        EXPECT_EQ(res.matches[k].error, 0.0);
    }
}

TEST(NnMatch, FindsPlantedPatch) {
    std::mt19937_64 rng(8);
    const Image search = oracle::random_image(30, 30, rng);
    const Image query = search.crop(11, 17, 5, 5);
    const MatchResult res = nn_match(query, search, MatchWindow{9, 15, 4}, 1);
    EXPECT_EQ(res.matches[0].row, 11);
    EXPECT_EQ(res.matches[0].col, 17);
    EXPECT_EQ(res.matches[0].error, 0.0);
}

TEST(NnMatch, ShortListWhenWindowIsSmall) {
    const MatchResult res = nn_match(Image(3, 3), Image(4, 4), MatchWindow{0, 0, -1}, 8);
    EXPECT_EQ(res.matches.size(), 4u);
    EXPECT_TRUE(res.short_list);
    EXPECT_THROW(nn_match(Image(5, 5), Image(4, 4), MatchWindow{}, 1), Error);
    EXPECT_THROW(nn_match(Image(2, 2), Image(4, 4), MatchWindow{}, 0), Error);
}

TEST(HfTransfer, Identities) {
    std::mt19937_64 rng(3);
    const Image a = oracle::random_image(5, 5, rng), b = oracle::random_image(5, 5, rng);
    EXPECT_EQ(hf_transfer(a, b, b), a);
    const Image c = hf_transfer(a, b, a);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.pixels()[i], b.pixels()[i], 1e-15);
    EXPECT_THROW(hf_transfer(a, Image(4, 5), b), Error);
}

TEST(SelfExamples, BasePatchCount) {
    EXPECT_EQ(base_patch_count({256, 256}, 15, 1), 58564u);
    EXPECT_EQ(base_patch_count({14, 100}, 15, 1), 0u);
    EXPECT_EQ(base_patch_count({20, 20}, 7, 2), 49u);
}

TEST(SelfExamples, DefaultParameters) {
    const SelfExampleParams p;
    EXPECT_EQ(p.scale, 1.2);
    EXPECT_EQ(p.levels, 5);
    EXPECT_EQ(p.matches, 8);
    EXPECT_EQ(p.patch, 15);
    const SelfExampleSet set = prepare_self_examples(Image(40, 40, 0.5), p);
    EXPECT_EQ(set.hr_size(), 18);
    EXPECT_EQ(set.per_level, 2);
    EXPECT_FALSE(set.uneven_split);
}

TEST(SelfExamples, PairCountAndGeometry) {
    std::mt19937_64 rng(5);
    const Image y = oracle::random_image(30, 34, rng);
    const SelfExampleParams p = small_params();
    const SelfExampleSet set = generate_self_examples(y, p);
    EXPECT_EQ(set.base_patches, base_patch_count(y.dims(), p.patch, p.stride));
    EXPECT_EQ(set.short_lists, 0u);
    EXPECT_EQ(set.pairs.size(), set.base_patches * 8);
    const int hr = set.hr_size();
    for (const SelfExamplePair& pair : set.pairs) {
        ASSERT_GE(pair.level, 0);
        ASSERT_LT(pair.level, 4);
        EXPECT_EQ(set.lr_patch(pair).dims(), (Dims{p.patch, p.patch}));
        EXPECT_EQ(set.hr_patch(pair).dims(), (Dims{hr, hr}));
        EXPECT_LE(std::abs(pair.hr_row - pair.query_row), p.search_half_extent);
        EXPECT_LE(std::abs(pair.hr_col - pair.query_col), p.search_half_extent);
        EXPECT_GE(pair.weight, 0.0);
        EXPECT_LE(pair.weight, 1.0);
    }
    // Matches per (patch, level) arrive in ascending error.
    for (std::size_t k = 0; k + 1 < set.pairs.size(); ++k)
        if (set.pairs[k].level == set.pairs[k + 1].level && set.pairs[k].lr_row == set.pairs[k + 1].lr_row &&
            set.pairs[k].lr_col == set.pairs[k + 1].lr_col) {
            EXPECT_LE(set.pairs[k].error, set.pairs[k + 1].error);
        }
}

TEST(SelfExamples, ErrorsRecomputeFromImages) {
    std::mt19937_64 rng(6);
    const SelfExampleSet set = generate_self_examples(oracle::random_image(26, 26, rng), small_params());
    const int n = set.hr_size();
    for (std::size_t k = 0; k < set.pairs.size(); k += 7) {
        const SelfExamplePair& p = set.pairs[k];
        const Image q = set.query_patch(p);
        const Image s = set.smoothed[p.level].crop(p.hr_row, p.hr_col, n, n);
        double e = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) e += (q.pixels()[i] - s.pixels()[i]) * (q.pixels()[i] - s.pixels()[i]);
        EXPECT_NEAR(p.error, e, 1e-9);
    }
}

TEST(SelfExamples, UnevenSplitFlagged) {
    SelfExampleParams p = small_params();
    p.matches = 10;
    const SelfExampleSet set = prepare_self_examples(Image(30, 30, 0.5), p);
    EXPECT_EQ(set.per_level, 2);
    EXPECT_TRUE(set.uneven_split);
    p.matches = 3;
    EXPECT_THROW(validate(p), Error);
}

TEST(SelfExamples, ConstantImageGivesUnitWeights) {
    const SelfExampleSet set = generate_self_examples(Image(24, 24, 0.4), small_params());
    ASSERT_FALSE(set.pairs.empty());
    for (const SelfExamplePair& p : set.pairs) {
        EXPECT_NEAR(p.error, 0.0, 1e-20);
        EXPECT_EQ(p.weight, 1.0);
    }
    const Image hr = set.hr_patch(set.pairs.front());
    for (double v : hr.pixels()) EXPECT_NEAR(v, 0.4, 1e-12);
}

TEST(SelfExamples, TooSmallImageRejected) {
    EXPECT_THROW(prepare_self_examples(Image(15, 15, 0.5), SelfExampleParams{}), Error);
}

TEST(SelfExamples, ThreadCountDoesNotChangePairs) {
    const Image y = synth::bricks({40, 40});
    const SelfExampleSet a = generate_self_examples(y, small_params(), 1);
    const SelfExampleSet b = generate_self_examples(y, small_params(), 4);
    EXPECT_EQ(a.pairs, b.pairs);
    EXPECT_EQ(encode_pairs(a), encode_pairs(b));
}

TEST(Weights, EndpointsOfTemperatureRange) {
    const std::vector<double> errors{0.0, 2.0, 1.0};
    const auto w = normalize_weights(errors, 2.0);
    EXPECT_EQ(w[0], 1.0);
    EXPECT_NEAR(w[1], std::exp(-1.0), 1e-15);
    EXPECT_NEAR(w[2], std::exp(-0.5), 1e-15);
    // Temperature <= 0 uses the median, here 1.0.
    const auto m = normalize_weights(errors, 0.0);
    EXPECT_NEAR(m[1], std::exp(-2.0), 1e-15);
    EXPECT_NEAR(m[2], std::exp(-1.0), 1e-15);
}

TEST(Weights, DegenerateInputs) {
    EXPECT_EQ(normalize_weights(std::vector<double>{3.5}), std::vector<double>{1.0});
    EXPECT_EQ(normalize_weights(std::vector<double>(4, 2.0)), std::vector<double>(4, 1.0));
    EXPECT_EQ(normalize_weights(std::vector<double>(4, 0.0)), std::vector<double>(4, 1.0));
    EXPECT_THROW(normalize_weights(std::vector<double>{}), Error);
    EXPECT_THROW(normalize_weights(std::vector<double>{-1.0}), Error);
    EXPECT_THROW(normalize_weights(std::vector<double>{NAN}), Error);
}

TEST(Weights, PropertyBoundsAndOrder) {
    std::mt19937_64 rng(77);
    std::exponential_distribution<double> ex(0.3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> e(1 + trial * 3);
        for (double& v : e) v = ex(rng);
        for (double tau : {0.0, 0.5, 4.0}) {
            const auto w = normalize_weights(e, tau);
            double best = 0.0;
            for (std::size_t i = 0; i < e.size(); ++i) {
                ASSERT_GT(w[i], 0.0);
                ASSERT_LE(w[i], 1.0);
                best = std::max(best, w[i]);
                for (std::size_t j = 0; j < e.size(); ++j)
                    if (e[i] < e[j]) {
                        ASSERT_GE(w[i], w[j]);
                    }
            }
            EXPECT_EQ(best, 1.0);
        }
    }
}

TEST(Volume, EffectiveCountRounds) {
    std::vector<SelfExamplePair> pairs(4);
    const double w[4] = {1.0, 0.5, 0.3, 0.1};
    for (int k = 0; k < 4; ++k) pairs[k].weight = w[k];
    const EffectiveVolume v = effective_volume(pairs);
    EXPECT_EQ(v.total, 4u);
    EXPECT_EQ(v.effective, 2u);
    EXPECT_DOUBLE_EQ(v.average, 0.5);
    EXPECT_THROW(effective_volume({}), Error);
}

TEST(Histogram, CountsSumToPairsAndTopBinIsClosed) {
    std::vector<SelfExamplePair> pairs(5);
    const double w[5] = {0.0, 0.019, 0.02, 0.999, 1.0};
    for (int k = 0; k < 5; ++k) pairs[k].weight = w[k];
    const auto h = weight_histogram(pairs, 50);
    ASSERT_EQ(h.size(), 50u);
    EXPECT_EQ(h[0].count, 2u);
    EXPECT_EQ(h[1].count, 1u);
    EXPECT_EQ(h[49].count, 2u);
    std::size_t sum = 0;
    for (const auto& b : h) sum += b.count;
    EXPECT_EQ(sum, 5u);
    EXPECT_DOUBLE_EQ(h[49].end, 1.0);

    const fs::path path = fs::temp_directory_path() / "djsr_hist.csv";
    write_histogram_csv(path, h);
    std::ifstream f(path);
    std::string header, first;
    std::getline(f, header);
    std::getline(f, first);
    EXPECT_EQ(header, "bin_start,bin_end,count");
    EXPECT_EQ(first, "0.00,0.02,2");
}

TEST(Mismatch, PaddingReachesRequestedShare) {
    const Image y = synth::bricks({40, 40});
    SelfExampleSet set = generate_self_examples(y, small_params());
    const std::size_t original = set.pairs.size();
    add_mismatched_pairs(set, 0.3, 9);
    std::size_t bad = 0;
    for (const SelfExamplePair& p : set.pairs) bad += p.mismatched;
    EXPECT_EQ(set.pairs.size(), original + bad);
    EXPECT_NEAR(static_cast<double>(bad) / set.pairs.size(), 0.3, 1.0 / set.pairs.size());
    // Errors of padded pairs are honest distances.
    const int n = set.hr_size();
    for (std::size_t k = original; k < set.pairs.size(); k += 11) {
        const SelfExamplePair& p = set.pairs[k];
        const Image q = set.query_patch(p);
        const Image s = set.smoothed[p.level].crop(p.hr_row, p.hr_col, n, n);
        double e = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) e += (q.pixels()[i] - s.pixels()[i]) * (q.pixels()[i] - s.pixels()[i]);
        EXPECT_NEAR(p.error, e, 1e-9);
    }
    EXPECT_THROW(add_mismatched_pairs(set, 1.0, 1), Error);
}

TEST(PairFile, RoundTripAndRejection) {
    const Image y = synth::bricks({30, 30});
    SelfExampleSet set = generate_self_examples(y, small_params());
    add_mismatched_pairs(set, 0.2, 1);
    const auto bytes = encode_pairs(set);
    const SelfExampleSet back = decode_pairs(bytes, "mem");
    EXPECT_EQ(back.pairs, set.pairs);
    EXPECT_EQ(back.params, set.params);
    EXPECT_EQ(back.source, set.source);
    EXPECT_EQ(back.base_patches, set.base_patches);
    EXPECT_EQ(encode_pairs(back), bytes);
    EXPECT_EQ(back.hr_patch(back.pairs[3]), set.hr_patch(set.pairs[3]));

    const fs::path path = fs::temp_directory_path() / "djsr_pairs.bin";
    save_pairs(path, set);
    EXPECT_EQ(load_pairs(path).pairs, set.pairs);

    SelfExampleSet bad = set;
    bad.pairs[0].weight = 1.5;
    EXPECT_THROW(decode_pairs(encode_pairs(bad), "mem"), Error);
    bad = set;
    bad.pairs[0].hr_row = 1000;
    EXPECT_THROW(decode_pairs(encode_pairs(bad), "mem"), Error);
    auto trailing = bytes;
    trailing.push_back(1);
    EXPECT_THROW(decode_pairs(trailing, "mem"), Error);
    auto truncated = bytes;
    truncated.resize(truncated.size() / 2);
    EXPECT_THROW(decode_pairs(truncated, "mem"), Error);
}
