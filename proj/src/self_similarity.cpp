#include "djsr/self_similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "djsr/binary_io.hpp"
#include "djsr/parallel.hpp"
#include "djsr/random.hpp"
#include "djsr/resample.hpp"

namespace djsr {

double ScalePyramid::relative_scale(int index) const {
    return std::pow(scale, index - half());
}

ScalePyramid build_pyramid(const Image& y, double s, int n) {
    if (n < 3 || n % 2 == 0)
        fail(ErrorKind::invalid_argument, "pyramid level count must be odd and >= 3, got " + std::to_string(n));
    if (!(s > 1.0)) fail(ErrorKind::invalid_argument, "pyramid scale must be > 1");
    if (y.empty()) fail(ErrorKind::invalid_argument, "pyramid of an empty image");
    ScalePyramid pyr;
    pyr.scale = s;
    const int h = (n - 1) / 2;
    for (int k = -h; k <= h; ++k) {
        if (k == 0)
            pyr.levels.push_back(y);
        else
            pyr.levels.push_back(resize_bicubic(y, scaled_dims(y.dims(), std::pow(s, k))));
    }
    return pyr;
}

SmoothPair smooth_pair(const Image& level, double s) {
    SmoothPair out;
    out.upsampled = resize_bicubic(level, scaled_dims(level.dims(), s));
    out.smoothed = resize_bicubic(out.upsampled, level.dims());
    return out;
}

namespace {

struct Box {
    int r0, r1, c0, c1;  // inclusive top-left ranges
};

Box clip_window(const MatchWindow& w, int qrows, int qcols, Dims search) {
    Box b{0, search.rows - qrows, 0, search.cols - qcols};
    if (w.half_extent >= 0) {
        b.r0 = std::max(b.r0, w.row - w.half_extent);
        b.r1 = std::min(b.r1, w.row + w.half_extent);
        b.c0 = std::max(b.c0, w.col - w.half_extent);
        b.c1 = std::min(b.c1, w.col + w.half_extent);
    }
    return b;
}

// Keeps the `count` best candidates. A candidate is rejected as soon as its
// partial error reaches the current worst kept one, which cannot change the
// result because later equal errors lose the tie anyway.
MatchResult match_core(const double* query, int qstride, int qrows, int qcols, const Image& search,
                       const Box& box, int count) {
    MatchResult res;
    res.matches.reserve(count);
    for (int r = box.r0; r <= box.r1; ++r) {
        for (int c = box.c0; c <= box.c1; ++c) {
            const bool full = static_cast<int>(res.matches.size()) == count;
            const double cutoff = full ? res.matches.back().error : INFINITY;
            double err = 0.0;
            bool rejected = false;
            for (int i = 0; i < qrows; ++i) {
                const double* q = query + static_cast<std::size_t>(i) * qstride;
                const double* s = search.row(r + i) + c;
                for (int j = 0; j < qcols; ++j) {
                    const double d = s[j] - q[j];
                    err += d * d;
                }
                if (err >= cutoff) {
                    rejected = true;
                    break;
                }
            }
            if (rejected) continue;
            const Match m{r, c, err};
            auto pos = std::upper_bound(res.matches.begin(), res.matches.end(), err,
                                        [](double e, const Match& x) { return e < x.error; });
            if (full) res.matches.pop_back();
            res.matches.insert(pos, m);
        }
    }
    res.short_list = static_cast<int>(res.matches.size()) < count;
    return res;
}

}  // namespace

MatchResult nn_match(const Image& query, const Image& search, const MatchWindow& window, int count) {
    if (count < 1) fail(ErrorKind::invalid_argument, "nn_match: count must be >= 1");
    if (query.empty() || query.rows() > search.rows() || query.cols() > search.cols())
        fail(ErrorKind::shape_mismatch, "nn_match: query " + query.dims().str() +
                                            " does not fit search image " + search.dims().str());
    const Box box = clip_window(window, query.rows(), query.cols(), search.dims());
    if (box.r0 > box.r1 || box.c0 > box.c1)
        fail(ErrorKind::invalid_argument, "nn_match: window is empty after clipping");
    return match_core(query.row(0), query.cols(), query.rows(), query.cols(), search, box, count);
}

Image hf_transfer(const Image& x_smooth, const Image& y_patch, const Image& y_smooth) {
    if (x_smooth.dims() != y_patch.dims() || y_patch.dims() != y_smooth.dims())
        fail(ErrorKind::shape_mismatch, "hf_transfer: patch dims " + x_smooth.dims().str() + ", " +
                                            y_patch.dims().str() + ", " + y_smooth.dims().str());
    Image out = x_smooth;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.pixels()[i] += y_patch.pixels()[i] - y_smooth.pixels()[i];
    return out;
}

void validate(const SelfExampleParams& p) {
    if (!(p.scale > 1.0)) fail(ErrorKind::invalid_argument, "self-example scale must be > 1");
    if (p.levels < 3 || p.levels % 2 == 0)
        fail(ErrorKind::invalid_argument, "level count N must be odd and >= 3");
    if (p.matches < p.levels - 1)
        fail(ErrorKind::invalid_argument, "m = " + std::to_string(p.matches) +
                                              " leaves no match per level for N = " + std::to_string(p.levels));
    if (p.patch < 1 || p.stride < 1) fail(ErrorKind::invalid_argument, "patch size and stride must be positive");
}

int SelfExampleSet::hr_size() const { return scaled_extent(params.patch, params.scale); }

Image SelfExampleSet::lr_patch(const SelfExamplePair& p) const {
    return pyramid.levels.at(p.level).crop(p.lr_row, p.lr_col, lr_size(), lr_size());
}

Image SelfExampleSet::query_patch(const SelfExamplePair& p) const {
    return upsampled.at(p.level).crop(p.query_row, p.query_col, hr_size(), hr_size());
}

Image SelfExampleSet::hr_patch(const SelfExamplePair& p) const {
    const int n = hr_size();
    return hf_transfer(query_patch(p), pyramid.levels.at(p.level + 1).crop(p.hr_row, p.hr_col, n, n),
                       smoothed.at(p.level).crop(p.hr_row, p.hr_col, n, n));
}

Image SelfExampleSet::query_context(const SelfExamplePair& p, int margin) const {
    const int n = hr_size() + 2 * margin;
    return crop_reflect(upsampled.at(p.level), p.query_row - margin, p.query_col - margin, n, n);
}

std::size_t base_patch_count(Dims dims, int patch, int stride) {
    if (dims.rows < patch || dims.cols < patch) return 0;
    return static_cast<std::size_t>((dims.rows - patch) / stride + 1) *
           static_cast<std::size_t>((dims.cols - patch) / stride + 1);
}

SelfExampleSet prepare_self_examples(const Image& y, const SelfExampleParams& params) {
    validate(params);
    SelfExampleSet set;
    set.params = params;
    set.source = y;
    set.pyramid = build_pyramid(y, params.scale, params.levels);
    const int hr = set.hr_size();
    for (int l = 0; l < params.levels; ++l) {
        const Dims d = set.pyramid.levels[l].dims();
        const int need = l + 1 < params.levels ? params.patch : hr;
        if (d.rows < need || d.cols < need || d.rows < hr || d.cols < hr)
            fail(ErrorKind::invalid_argument,
                 "pyramid level " + std::to_string(l - set.pyramid.half()) + " (" + d.str() +
                     ") is smaller than the patch size");
    }
    for (int l = 0; l + 1 < params.levels; ++l) {
        const Image& next = set.pyramid.levels[l + 1];
        set.upsampled.push_back(resize_bicubic(set.pyramid.levels[l], next.dims()));
        set.smoothed.push_back(smooth_pair(next, params.scale).smoothed);
    }
    set.per_level = params.matches / (params.levels - 1);
    set.uneven_split = params.matches % (params.levels - 1) != 0;
    set.base_patches = base_patch_count(y.dims(), params.patch, params.stride);
    return set;
}

namespace {

int colocate(int pos, int patch, int out_patch, double ratio, int limit) {
    const double center = (pos + patch / 2.0) * ratio;
    const int p = static_cast<int>(std::floor(center - out_patch / 2.0 + 0.5));
    return std::clamp(p, 0, limit - out_patch);
}

}  // namespace

SelfExampleSet generate_self_examples(const Image& y, const SelfExampleParams& params, int threads) {
    SelfExampleSet set = prepare_self_examples(y, params);
    const int p = params.patch;
    const int hr = set.hr_size();
    const int per_row = (y.cols() - p) / params.stride + 1;
    const int n_src = params.levels - 1;

    std::vector<std::vector<SelfExamplePair>> per_patch(set.base_patches);
    std::vector<std::size_t> shorts(set.base_patches, 0);
    parallel_for(set.base_patches, threads, [&](std::size_t b) {
        const int i = static_cast<int>(b / per_row) * params.stride;
        const int j = static_cast<int>(b % per_row) * params.stride;
        auto& out = per_patch[b];
        out.reserve(static_cast<std::size_t>(n_src) * set.per_level);
        for (int l = 0; l < n_src; ++l) {
            const Image& lr = set.pyramid.levels[l];
            const Image& up = set.upsampled[l];
            SelfExamplePair base;
            base.level = l;
            base.lr_row = colocate(i, p, p, static_cast<double>(lr.rows()) / y.rows(), lr.rows());
            base.lr_col = colocate(j, p, p, static_cast<double>(lr.cols()) / y.cols(), lr.cols());
            base.query_row = colocate(i, p, hr, static_cast<double>(up.rows()) / y.rows(), up.rows());
            base.query_col = colocate(j, p, hr, static_cast<double>(up.cols()) / y.cols(), up.cols());
            MatchWindow window{base.query_row, base.query_col,
                               params.full_search ? -1 : params.search_half_extent};
            const Box box = clip_window(window, hr, hr, up.dims());
            const double* q = up.row(base.query_row) + base.query_col;
            MatchResult res = match_core(q, up.cols(), hr, hr, set.smoothed[l], box, set.per_level);
            if (res.short_list) ++shorts[b];
            for (const Match& m : res.matches) {
                SelfExamplePair pair = base;
                pair.hr_row = m.row;
                pair.hr_col = m.col;
                pair.error = m.error;
                out.push_back(pair);
            }
        }
    });
    std::size_t total = 0;
    for (const auto& v : per_patch) total += v.size();
    set.pairs.reserve(total);
    for (std::size_t b = 0; b < per_patch.size(); ++b) {
        set.pairs.insert(set.pairs.end(), per_patch[b].begin(), per_patch[b].end());
        set.short_lists += shorts[b];
    }
    renormalize_weights(set);
    return set;
}

std::vector<double> normalize_weights(std::span<const double> errors, double temperature) {
    if (errors.empty()) fail(ErrorKind::invalid_argument, "normalize_weights: no errors");
    for (double e : errors)
        if (!(e >= 0.0) || !std::isfinite(e))
            fail(ErrorKind::numeric, "normalize_weights: matching errors must be finite and >= 0");
    const double lo = *std::min_element(errors.begin(), errors.end());
    double tau = temperature;
    if (!std::isfinite(tau)) fail(ErrorKind::invalid_argument, "normalize_weights: temperature must be finite");
    if (tau <= 0.0) {
        std::vector<double> sorted(errors.begin(), errors.end());
        const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
        std::nth_element(sorted.begin(), mid, sorted.end());
        tau = *mid;
    }
    if (tau <= 0.0) {
        double sum = 0.0;
        for (double e : errors) sum += e;
        tau = sum / static_cast<double>(errors.size());
    }
    std::vector<double> w(errors.size(), 1.0);
    if (tau <= 0.0) return w;
    for (std::size_t i = 0; i < errors.size(); ++i) w[i] = std::exp(-(errors[i] - lo) / tau);
    return w;
}

void renormalize_weights(SelfExampleSet& set) {
    if (set.pairs.empty()) return;
    std::vector<double> errors(set.pairs.size());
    for (std::size_t i = 0; i < errors.size(); ++i) errors[i] = set.pairs[i].error;
    const std::vector<double> w = normalize_weights(errors, set.params.weight_temperature);
    for (std::size_t i = 0; i < w.size(); ++i) set.pairs[i].weight = w[i];
}

EffectiveVolume effective_volume(std::span<const SelfExamplePair> pairs) {
    if (pairs.empty()) fail(ErrorKind::invalid_argument, "effective_volume: no pairs");
    double sum = 0.0;
    for (const SelfExamplePair& p : pairs) sum += p.weight;
    EffectiveVolume v;
    v.total = pairs.size();
    v.effective = static_cast<std::uint64_t>(std::llround(sum));
    v.average = static_cast<double>(v.effective) / static_cast<double>(v.total);
    return v;
}

std::vector<HistogramBin> weight_histogram(std::span<const SelfExamplePair> pairs, int bins) {
    if (bins < 1) fail(ErrorKind::invalid_argument, "histogram needs at least one bin");
    std::vector<HistogramBin> out(bins);
    for (int b = 0; b < bins; ++b) {
        out[b].start = static_cast<double>(b) / bins;
        out[b].end = static_cast<double>(b + 1) / bins;
    }
    for (const SelfExamplePair& p : pairs) {
        const int b = std::clamp(static_cast<int>(std::floor(p.weight * bins)), 0, bins - 1);
        ++out[b].count;
    }
    return out;
}

void write_histogram_csv(const std::filesystem::path& path, const std::vector<HistogramBin>& bins) {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::io, "cannot write " + path.string());
    f << "bin_start,bin_end,count\n";
    char line[96];
    for (const HistogramBin& b : bins) {
        std::snprintf(line, sizeof line, "%.2f,%.2f,%zu\n", b.start, b.end, b.count);
        f << line;
    }
    if (!f) fail(ErrorKind::io, "error writing " + path.string());
}

void add_mismatched_pairs(SelfExampleSet& set, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        fail(ErrorKind::invalid_argument, "mismatch fraction must be in [0, 1)");
    if (set.pairs.empty()) fail(ErrorKind::invalid_argument, "cannot pad an empty pair pool");
    const std::size_t original = set.pairs.size();
    const auto extra = static_cast<std::size_t>(
        std::llround(static_cast<double>(original) * fraction / (1.0 - fraction)));
    std::mt19937_64 rng = substream(seed, 0xbad, 0);
    std::uniform_int_distribution<std::size_t> pick(0, original - 1);
    const int n = set.hr_size();
    for (std::size_t k = 0; k < extra; ++k) {
        SelfExamplePair p = set.pairs[pick(rng)];
        const Image& search = set.smoothed[p.level];
        std::uniform_int_distribution<int> rr(0, search.rows() - n), cc(0, search.cols() - n);
        p.hr_row = rr(rng);
        p.hr_col = cc(rng);
        const Image q = set.query_patch(p);
        double err = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double d = search(p.hr_row + i, p.hr_col + j) - q(i, j);
                err += d * d;
            }
        p.error = err;
        p.mismatched = true;
        set.pairs.push_back(p);
    }
    renormalize_weights(set);
}

namespace {

constexpr char kPairMagic[4] = {'D', 'J', 'S', 'P'};
constexpr std::uint32_t kPairVersion = 1;

}  // namespace

std::vector<std::uint8_t> encode_pairs(const SelfExampleSet& set) {
    ByteWriter w;
    w.bytes(kPairMagic, 4);
    w.u32(kPairVersion);
    const SelfExampleParams& p = set.params;
    w.f64(p.scale);
    w.i32(p.levels);
    w.i32(p.matches);
    w.i32(p.patch);
    w.i32(p.stride);
    w.i32(p.search_half_extent);
    w.u8(p.full_search ? 1 : 0);
    w.f64(p.weight_temperature);
    w.i32(set.hr_size());
    w.u64(set.pairs.size());
    w.u64(set.base_patches);
    w.u64(set.short_lists);
    w.i32(set.source.rows());
    w.i32(set.source.cols());
    for (double v : set.source.pixels()) w.f64(v);
    for (const SelfExamplePair& q : set.pairs) {
        w.u8(static_cast<std::uint8_t>(q.level));
        w.i32(q.lr_row);
        w.i32(q.lr_col);
        w.i32(q.query_row);
        w.i32(q.query_col);
        w.i32(q.hr_row);
        w.i32(q.hr_col);
        w.f64(q.error);
        w.f64(q.weight);
        w.u8(q.mismatched ? 1 : 0);
    }
    return w.buffer();
}

SelfExampleSet decode_pairs(const std::vector<std::uint8_t>& bytes, const std::string& source) {
    ByteReader r(bytes, source);
    char magic[4];
    r.bytes(magic, 4);
    if (!std::equal(magic, magic + 4, kPairMagic)) fail(ErrorKind::format, source + ": not a pair file");
    const std::uint32_t version = r.u32();
    if (version != kPairVersion)
        fail(ErrorKind::format, source + ": unsupported pair file version " + std::to_string(version));
    SelfExampleParams p;
    p.scale = r.f64();
    p.levels = r.i32();
    p.matches = r.i32();
    p.patch = r.i32();
    p.stride = r.i32();
    p.search_half_extent = r.i32();
    p.full_search = r.u8() != 0;
    p.weight_temperature = r.f64();
    const int hr = r.i32();
    const std::uint64_t count = r.u64();
    const std::uint64_t base = r.u64();
    const std::uint64_t shorts = r.u64();
    const int rows = r.i32();
    const int cols = r.i32();
    if (rows <= 0 || cols <= 0 || static_cast<std::uint64_t>(rows) * cols > (1ull << 28))
        fail(ErrorKind::format, source + ": bad source image dims");
    std::vector<double> px(static_cast<std::size_t>(rows) * cols);
    for (double& v : px) v = r.f64();
    SelfExampleSet set;
    try {
        set = prepare_self_examples(Image(rows, cols, std::move(px)), p);
    } catch (const Error& e) {
        fail(ErrorKind::format, source + ": " + e.what());
    }
    if (set.hr_size() != hr) fail(ErrorKind::format, source + ": inconsistent HR patch size");
    set.base_patches = base;
    set.short_lists = shorts;
    if (count > bytes.size()) fail(ErrorKind::format, source + ": implausible pair count");
    set.pairs.resize(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        SelfExamplePair& q = set.pairs[k];
        q.level = r.u8();
        q.lr_row = r.i32();
        q.lr_col = r.i32();
        q.query_row = r.i32();
        q.query_col = r.i32();
        q.hr_row = r.i32();
        q.hr_col = r.i32();
        q.error = r.f64();
        q.weight = r.f64();
        q.mismatched = r.u8() != 0;
        const std::string where = source + ": pair " + std::to_string(k);
        if (!(q.weight >= 0.0 && q.weight <= 1.0))
            fail(ErrorKind::format, where + " has weight " + std::to_string(q.weight) + " outside [0, 1]");
        if (!(q.error >= 0.0) || !std::isfinite(q.error))
            fail(ErrorKind::format, where + " has an invalid matching error");
        if (q.level < 0 || q.level + 1 >= p.levels) fail(ErrorKind::format, where + " has a bad level");
        const Image& lr = set.pyramid.levels[q.level];
        const Image& up = set.upsampled[q.level];
        auto inside = [](int r0, int c0, int n, const Image& img) {
            return r0 >= 0 && c0 >= 0 && r0 + n <= img.rows() && c0 + n <= img.cols();
        };
        if (!inside(q.lr_row, q.lr_col, p.patch, lr) || !inside(q.query_row, q.query_col, hr, up) ||
            !inside(q.hr_row, q.hr_col, hr, up))
            fail(ErrorKind::format, where + " has coordinates outside its level");
    }
    if (!r.at_end()) fail(ErrorKind::format, source + ": trailing bytes after pairs");
    return set;
}

void save_pairs(const std::filesystem::path& path, const SelfExampleSet& set) {
    ByteWriter w;
    const auto bytes = encode_pairs(set);
    w.bytes(bytes.data(), bytes.size());
    w.save(path);
}

SelfExampleSet load_pairs(const std::filesystem::path& path) {
    return decode_pairs(read_file(path), path.string());
}

}  // namespace djsr
