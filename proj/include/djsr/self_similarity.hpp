#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "djsr/image.hpp"

namespace djsr {

// Levels at relative scales s^k, k = -(N-1)/2 .. (N-1)/2. levels[half()] is
// the original image.
struct ScalePyramid {
    std::vector<Image> levels;
    double scale = 1.2;

    int count() const { return static_cast<int>(levels.size()); }
    int half() const { return count() / 2; }
    double relative_scale(int index) const;
};

ScalePyramid build_pyramid(const Image& y, double s, int n);

// X' = U(level) by s and Y' = D(X') back onto the level's grid.
struct SmoothPair {
    Image upsampled;
    Image smoothed;
};

SmoothPair smooth_pair(const Image& level, double s);

// Candidate positions are patch top-left corners. A negative half extent
// searches the whole image.
struct MatchWindow {
    int row = 0;
    int col = 0;
    int half_extent = 10;
};

struct Match {
    int row = 0;
    int col = 0;
    double error = 0.0;  // squared Frobenius distance
};

struct MatchResult {
    std::vector<Match> matches;  // ascending error, row-major order on ties
    bool short_list = false;     // fewer candidates than requested
};

MatchResult nn_match(const Image& query, const Image& search, const MatchWindow& window, int count);

// X = X' + Y - Y'.
Image hf_transfer(const Image& x_smooth, const Image& y_patch, const Image& y_smooth);

struct SelfExampleParams {
    double scale = 1.2;
    int levels = 5;   // N
    int matches = 8;  // m, split evenly over the N-1 source levels
    int patch = 15;
    int stride = 1;
    int search_half_extent = 10;
    bool full_search = false;
    // Temperature of the confidence weights, in squared-intensity units.
    // Values <= 0 select the median matching error.
    double weight_temperature = 1.0;

    bool operator==(const SelfExampleParams&) const = default;
};

void validate(const SelfExampleParams& params);

// Coordinates of one pair. `level` is the source pyramid index; the HR side
// lives on level + 1. Query and HR positions are on the level + 1 grid.
struct SelfExamplePair {
    int level = 0;
    int lr_row = 0, lr_col = 0;
    int query_row = 0, query_col = 0;
    int hr_row = 0, hr_col = 0;
    double error = 0.0;
    double weight = 1.0;
    bool mismatched = false;  // added by add_mismatched_pairs

    bool operator==(const SelfExamplePair&) const = default;
};

// Pair pool together with the images needed to materialize any pair.
struct SelfExampleSet {
    SelfExampleParams params;
    Image source;
    ScalePyramid pyramid;
    std::vector<Image> upsampled;  // [l]: U(level l) on the grid of level l + 1
    std::vector<Image> smoothed;   // [l]: D(U(level l + 1)), for l + 1 = 1..N-1
    std::vector<SelfExamplePair> pairs;
    std::size_t base_patches = 0;
    int per_level = 0;
    bool uneven_split = false;  // m not divisible by N - 1
    std::size_t short_lists = 0;

    int lr_size() const { return params.patch; }
    int hr_size() const;

    Image lr_patch(const SelfExamplePair& p) const;
    Image query_patch(const SelfExamplePair& p) const;  // X'_ij
    Image hr_patch(const SelfExamplePair& p) const;     // X_ij after detail transfer
    // Query region widened by `margin` on every side; reflected at borders.
    Image query_context(const SelfExamplePair& p, int margin) const;
};

// Base patch count on an image: windows of `patch` at `stride` per axis.
std::size_t base_patch_count(Dims dims, int patch, int stride);

// Builds the pyramid and the derived images without matching.
SelfExampleSet prepare_self_examples(const Image& y, const SelfExampleParams& params);

SelfExampleSet generate_self_examples(const Image& y, const SelfExampleParams& params,
                                      int threads = 1);

// exp(-(e - e_min) / tau), so the best match gets 1. A temperature <= 0
// uses the median error as tau.
std::vector<double> normalize_weights(std::span<const double> errors, double temperature = 0.0);
void renormalize_weights(SelfExampleSet& set);

struct EffectiveVolume {
    std::size_t total = 0;          // V
    std::uint64_t effective = 0;    // V_e = round(sum of weights)
    double average = 0.0;           // V_e / V
};

EffectiveVolume effective_volume(std::span<const SelfExamplePair> pairs);

struct HistogramBin {
    double start = 0.0;
    double end = 0.0;
    std::size_t count = 0;
};

std::vector<HistogramBin> weight_histogram(std::span<const SelfExamplePair> pairs, int bins = 50);
void write_histogram_csv(const std::filesystem::path& path, const std::vector<HistogramBin>& bins);

// Appends pairs whose HR side is taken from a random location, so that the
// padded pool holds `fraction` of mismatched pairs. Weights are renormalized.
void add_mismatched_pairs(SelfExampleSet& set, double fraction, std::uint64_t seed);

std::vector<std::uint8_t> encode_pairs(const SelfExampleSet& set);
SelfExampleSet decode_pairs(const std::vector<std::uint8_t>& bytes, const std::string& source);
void save_pairs(const std::filesystem::path& path, const SelfExampleSet& set);
SelfExampleSet load_pairs(const std::filesystem::path& path);

}  // namespace djsr
