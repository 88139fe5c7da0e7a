#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "djsr/checkpoint.hpp"
#include "djsr/config_json.hpp"
#include "djsr/image_io.hpp"
#include "djsr/parallel.hpp"
#include "djsr/pipeline.hpp"
#include "djsr/run_config.hpp"

namespace fs = std::filesystem;
using namespace djsr;
using nlohmann::json;

namespace {

constexpr int kUsageExit = 64;
constexpr int kInternalExit = 1;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return 2;
        case ErrorKind::shape_mismatch: return 3;
        case ErrorKind::io: return 4;
        case ErrorKind::format: return 5;
        case ErrorKind::numeric: return 6;
    }
    return kInternalExit;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

void require(const std::string& value, const char* what) {
    if (value.empty()) fail(ErrorKind::invalid_argument, std::string("missing ") + what);
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
    return path.parent_path() / (path.filename().string() + suffix);
}

// Provenance record next to each output. Threads are left out on purpose:
// they never change results.
void write_effective_config(const fs::path& output, const char* command, const json& section) {
    save_json(sibling(output, ".config.json"), json{{"command", command}, {command, section}});
}

std::string volume_line(const EffectiveVolume& v) {
    char line[128];
    std::snprintf(line, sizeof line, "V=%zu V_e=%llu V_e^a=%.6f", v.total,
                  static_cast<unsigned long long>(v.effective), v.average);
    return line;
}

// Readable corpus images in name order; unreadable files are reported and skipped.
std::vector<Image> load_corpus(const std::string& dir, std::uint64_t* hash) {
    require(dir, "corpus directory");
    if (!fs::is_directory(dir)) fail(ErrorKind::io, "corpus directory " + dir + " does not exist");
    std::vector<Image> images;
    std::uint64_t h = 1469598103934665603ull;
    for (const fs::path& p : list_images(dir)) {
        try {
            images.push_back(read_luma(p));
            h = image_hash(images.back(), h);
        } catch (const Error& e) {
            warn("skipping " + p.string() + ": " + e.what());
        }
    }
    if (images.empty()) fail(ErrorKind::invalid_argument, "corpus " + dir + " has no readable images");
    if (hash) *hash = h;
    return images;
}

void cmd_pretrain(const PretrainSection& s, int threads) {
    require(s.output, "--out");
    std::uint64_t corpus_hash = 0;
    const std::vector<Image> corpus = load_corpus(s.corpus, &corpus_hash);
    const ModelParams layout = init_model(s.sdcae);
    const TrainingSet set = make_training_pairs(corpus, s.sdcae, layout.border_trim(), threads);
    if (set.skipped_images > 0) warn(std::to_string(set.skipped_images) + " images smaller than a sub-image were skipped");
    if (set.pairs.empty()) fail(ErrorKind::invalid_argument, "corpus yields no training pairs");
    std::cout << "pretrain: " << corpus.size() << " images, " << set.pairs.size() << " pairs\n";
    const PretrainResult r = pretrain(set.pairs, s.sdcae, corpus_hash, threads);
    save_checkpoint(s.output, r.model);

    const fs::path csv = s.loss_csv.empty() ? sibling(s.output, ".loss.csv") : fs::path(s.loss_csv);
    std::ofstream f(csv);
    if (!f) fail(ErrorKind::io, "cannot write " + csv.string());
    f << "epoch,loss\n";
    char line[64];
    for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
        std::snprintf(line, sizeof line, "%zu,%.10g\n", e + 1, r.epoch_loss[e]);
        f << line;
        std::cout << "epoch " << e + 1 << " loss " << r.epoch_loss[e] << '\n';
    }
    write_effective_config(s.output, "pretrain", s);
}

void cmd_self_examples(const SelfExamplesSection& s, int threads) {
    require(s.input, "--input");
    require(s.output, "--out");
    const Image y = read_luma(s.input);
    SelfExampleSet set = generate_self_examples(y, s.params, threads);
    if (set.uneven_split)
        warn("m = " + std::to_string(s.params.matches) + " is not a multiple of N - 1; using " +
             std::to_string(set.per_level) + " matches per level");
    if (set.short_lists > 0) warn(std::to_string(set.short_lists) + " searches returned fewer matches than requested");
    if (s.mismatch_fraction > 0.0) add_mismatched_pairs(set, s.mismatch_fraction, s.seed);
    save_pairs(s.output, set);
    const auto hist = weight_histogram(set.pairs, 50);
    write_histogram_csv(s.histogram.empty() ? sibling(s.output, ".hist.csv") : fs::path(s.histogram), hist);
    std::cout << "self-examples: base patches " << set.base_patches << ", " << volume_line(effective_volume(set.pairs))
              << '\n';
    write_effective_config(s.output, "self_examples", s);
}

void cmd_finetune(const FinetuneSection& s) {
    require(s.model, "--model");
    require(s.pairs, "--pairs");
    require(s.output, "--out");
    const ModelParams model = load_checkpoint(s.model);
    const SelfExampleSet set = load_pairs(s.pairs);
    const FinetuneResult r = finetune(model, set, s.finetune);
    for (const std::string& w : r.log.warnings) warn(w);
    save_checkpoint(s.output, r.model);

    std::ofstream log(sibling(s.output, ".log"));
    if (!log) fail(ErrorKind::io, "cannot write the fine-tune log");
    auto emit = [&log](const std::string& line) {
        std::cout << line << '\n';
        log << line << '\n';
    };
    emit(set.pairs.empty() ? "V=0 V_e=0" : volume_line(effective_volume(set.pairs)));
    emit(std::string("weights ") + (s.finetune.use_weights ? "on" : "off") + ", mode " + to_string(s.finetune.mode));
    emit("steps " + std::to_string(r.log.steps) + ", skipped " + std::to_string(r.log.skipped));
    char line[64];
    for (std::size_t e = 0; e < r.log.epoch_loss.size(); ++e) {
        std::snprintf(line, sizeof line, "epoch %zu loss %.10g", e + 1, r.log.epoch_loss[e]);
        emit(line);
    }
    if (!log) fail(ErrorKind::io, "error writing the fine-tune log");
    write_effective_config(s.output, "finetune", s);
}

void cmd_cluster(const ClusterSection& s, int threads) {
    require(s.output, "--out");
    std::uint64_t corpus_hash = 0;
    const std::vector<Image> corpus = load_corpus(s.corpus, &corpus_hash);
    const ModelParams layout = init_model(s.sdcae);
    const TrainingSet set = make_training_pairs(corpus, s.sdcae, layout.border_trim(), threads);
    if (set.pairs.empty()) fail(ErrorKind::invalid_argument, "corpus yields no training pairs");
    ClusterModel cm = s.train ? train_submodels(set.pairs, s.cluster, s.sdcae, corpus_hash, threads)
                              : cluster_pairs(set.pairs, s.cluster, nullptr, threads);
    if (cm.k() < s.cluster.initial_k)
        std::cout << "cluster: " << s.cluster.initial_k << " initial clusters merged down to " << cm.k() << '\n';
    std::cout << "cluster: K=" << cm.k() << ", PCA dims " << cm.basis_dims() << ", " << set.pairs.size()
              << " samples\n";
    save_cluster_manifest(s.output, cm);
    write_effective_config(s.output, "cluster", s);
}

void cmd_sr(const SrSection& s, int threads) {
    SrJob job;
    job.input = s.input;
    job.output = s.output;
    job.model = s.model;
    job.clusters = s.clusters;
    job.target_scale = s.target_scale;
    job.tune.enabled = s.self_tune;
    job.tune.examples = s.examples;
    job.tune.finetune = s.finetune;
    const SrReport r = run_sr(job, threads);
    for (const std::string& w : r.warnings) warn(w);
    std::cout << "sr: " << r.passes << " passes, output " << r.output.str() << '\n';
    if (s.self_tune && r.self_pairs > 0) std::cout << "sr: self-tuned on " << volume_line(r.volume) << '\n';
    write_effective_config(s.output, "sr", s);
}

void cmd_eval(const EvalSection& s) {
    require(s.reference, "--reference");
    require(s.test, "--test");
    std::vector<EvalRow> rows;
    auto add = [&](const fs::path& ref, const fs::path& test) {
        const Image a = read_luma(ref), b = read_luma(test);
        rows.push_back(evaluate(a, b, s.border, ref.filename().string(), s.method, s.target_scale));
    };
    if (fs::is_directory(s.reference) != fs::is_directory(s.test))
        fail(ErrorKind::invalid_argument, "reference and test must both be files or both be directories");
    if (fs::is_directory(s.reference)) {
        std::map<std::string, fs::path> tests;
        for (const fs::path& p : list_images(s.test)) tests[p.stem().string()] = p;
        for (const fs::path& ref : list_images(s.reference)) {
            const auto it = tests.find(ref.stem().string());
            if (it == tests.end()) fail(ErrorKind::io, "no test image for " + ref.filename().string());
            add(ref, it->second);
        }
        if (rows.empty()) fail(ErrorKind::invalid_argument, "reference directory has no images");
    } else {
        add(s.reference, s.test);
    }
    if (s.output.empty()) {
        write_eval_csv(std::cout, rows);
    } else {
        write_eval_csv(s.output, rows);
        write_effective_config(s.output, "eval", s);
    }
}

// Flags override the config file, so the file is read before the parser is
// built and its values become the flag defaults.
std::string find_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

void add_examples_options(CLI::App* cmd, SelfExampleParams& p, const std::string& prefix = "") {
    cmd->add_option("--" + prefix + "scale", p.scale, "Per-level scale factor s");
    cmd->add_option("--" + prefix + "levels", p.levels, "Pyramid levels N (odd)");
    cmd->add_option("--" + prefix + "matches", p.matches, "Matches per patch m");
    cmd->add_option("--" + prefix + "patch", p.patch, "LR patch size");
    cmd->add_option("--" + prefix + "stride", p.stride, "Patch stride");
    cmd->add_option("--" + prefix + "window", p.search_half_extent, "Search window half extent");
    cmd->add_flag("--" + prefix + "full-search", p.full_search, "Search the whole level");
    cmd->add_option("--" + prefix + "temperature", p.weight_temperature, "Weight temperature (<= 0: median error)");
}

void add_finetune_options(CLI::App* cmd, FinetuneConfig& c, std::string& mode, const std::string& prefix = "") {
    cmd->add_option("--" + prefix + "lr", c.learning_rate, "Fine-tune learning rate eta_f");
    cmd->add_option("--" + prefix + "momentum", c.momentum, "Momentum");
    cmd->add_option("--" + prefix + "epochs", c.epochs, "Passes over the pairs");
    cmd->add_flag("--" + prefix + "weights,!--" + prefix + "no-weights", c.use_weights, "Scale updates by pair weights");
    cmd->add_option("--" + prefix + "weight-mode", mode, "full | gradient")->check(CLI::IsMember({"full", "gradient"}));
    cmd->add_option("--" + prefix + "max-pairs", c.max_pairs, "Random subset size (0: all)");
}

void add_sdcae_options(CLI::App* cmd, SdcaeConfig& c, std::string& layers, std::string& init) {
    cmd->add_option("--layers", layers, "Layer list, e.g. 9x9x64,5x5x32,5x5x32,5x5x1");
    cmd->add_option("--scale", c.scale, "Network scale factor s");
    cmd->add_option("--epochs", c.epochs, "Training epochs");
    cmd->add_option("--batch", c.batch_size, "Mini-batch size");
    cmd->add_option("--lr", c.learning_rate, "Pre-training learning rate eta_p");
    cmd->add_option("--momentum", c.momentum, "Momentum");
    cmd->add_option("--sigma", c.corruption_sigma, "Input corruption sigma");
    cmd->add_option("--sub-image", c.sub_image, "Training sub-image size");
    cmd->add_option("--sub-stride", c.sub_image_stride, "Training sub-image stride");
    cmd->add_option("--augment", c.augmentations, "Augmented copies per image");
    cmd->add_option("--init", init, "identity | random")->check(CLI::IsMember({"identity", "random"}));
    cmd->add_option("--init-noise", c.init_noise, "Init noise relative to the He scale");
}

int run(int argc, char** argv) {
    RunConfig cfg;
    const std::string config_path = find_config_path(argc, argv);
    if (!config_path.empty()) cfg = load_run_config(config_path);

    CLI::App app{"Super-resolution with deep self-example fine-tuning"};
    app.require_subcommand(1);
    std::string config_unused;
    app.add_option("--config", config_unused, "JSON run configuration; flags override it");
    int threads = default_thread_count();
    app.add_option("--threads", threads, "Worker threads (default: DJSR_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    std::string layers, init;
    std::string ft_mode = to_string(cfg.finetune.finetune.mode);
    std::string sr_mode = to_string(cfg.sr.finetune.mode);
    std::string cl_layers, cl_init;

    auto* pre = app.add_subcommand("pretrain", "Train an SDCAE on an external corpus");
    pre->add_option("--corpus", cfg.pretrain.corpus, "Directory of training images");
    pre->add_option("--out", cfg.pretrain.output, "Checkpoint to write");
    pre->add_option("--loss-csv", cfg.pretrain.loss_csv, "Per-epoch loss CSV");
    pre->add_option("--seed", cfg.pretrain.seed, "Random seed");
    add_sdcae_options(pre, cfg.pretrain.sdcae, layers, init);

    auto* se = app.add_subcommand("self-examples", "Mine weighted self-example pairs from one image");
    se->add_option("--input", cfg.self_examples.input, "Input image");
    se->add_option("--out", cfg.self_examples.output, "Pair file to write");
    se->add_option("--histogram", cfg.self_examples.histogram, "Weight histogram CSV");
    se->add_option("--seed", cfg.self_examples.seed, "Random seed");
    se->add_option("--mismatch", cfg.self_examples.mismatch_fraction, "Share of deliberately mismatched pairs");
    add_examples_options(se, cfg.self_examples.params);

    auto* ft = app.add_subcommand("finetune", "Adapt a checkpoint with weighted back-propagation");
    ft->add_option("--model", cfg.finetune.model, "Input checkpoint");
    ft->add_option("--pairs", cfg.finetune.pairs, "Pair file");
    ft->add_option("--out", cfg.finetune.output, "Checkpoint to write");
    ft->add_option("--seed", cfg.finetune.seed, "Random seed");
    add_finetune_options(ft, cfg.finetune.finetune, ft_mode);

    auto* cl = app.add_subcommand("cluster", "Cluster the corpus and train one sub-model per cluster");
    cl->add_option("--corpus", cfg.cluster.corpus, "Directory of training images");
    cl->add_option("--out", cfg.cluster.output, "Manifest to write");
    cl->add_option("--seed", cfg.cluster.seed, "Random seed");
    cl->add_option("-k,--clusters", cfg.cluster.cluster.initial_k, "Initial K");
    cl->add_option("--min-size", cfg.cluster.cluster.min_size, "Smallest allowed cluster");
    cl->add_option("--max-iters", cfg.cluster.cluster.max_iters, "Lloyd iterations");
    cl->add_option("--variance", cfg.cluster.cluster.variance_kept, "PCA variance kept");
    cl->add_option("--pca-dims", cfg.cluster.cluster.fixed_dims, "Fixed PCA dims (0: by variance)");
    cl->add_flag("--train,!--no-train", cfg.cluster.train, "Pre-train a sub-model per cluster");
    add_sdcae_options(cl, cfg.cluster.sdcae, cl_layers, cl_init);

    auto* sr = app.add_subcommand("sr", "Super-resolve an image");
    sr->add_option("--input", cfg.sr.input, "Input image");
    sr->add_option("--out", cfg.sr.output, "Output image");
    sr->add_option("--model", cfg.sr.model, "Checkpoint");
    sr->add_option("--clusters", cfg.sr.clusters, "Cluster manifest (instead of --model)");
    sr->add_option("--target-scale", cfg.sr.target_scale, "Target factor s_t");
    sr->add_option("--seed", cfg.sr.seed, "Random seed");
    sr->add_flag("--self-tune", cfg.sr.self_tune, "Fine-tune on the input's self-examples first");
    add_examples_options(sr, cfg.sr.examples, "se-");
    add_finetune_options(sr, cfg.sr.finetune, sr_mode, "ft-");

    auto* ev = app.add_subcommand("eval", "PSNR and SSIM against ground truth");
    ev->add_option("--reference", cfg.eval.reference, "Ground-truth image or directory");
    ev->add_option("--test", cfg.eval.test, "Test image or directory");
    ev->add_option("--out", cfg.eval.output, "CSV to write (default: stdout)");
    ev->add_option("--method", cfg.eval.method, "Method label");
    ev->add_option("--target-scale", cfg.eval.target_scale, "s_t label");
    ev->add_option("--border", cfg.eval.border, "Pixels cropped on every side");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << e.what() << '\n';
        return kUsageExit;
    }

    // Seeds given on the command line reach the nested configs here.
    cfg.pretrain.sdcae.seed = cfg.pretrain.seed;
    cfg.finetune.finetune.seed = cfg.finetune.seed;
    cfg.cluster.cluster.seed = cfg.cluster.sdcae.seed = cfg.cluster.seed;
    cfg.sr.finetune.seed = cfg.sr.seed;
    if (!layers.empty()) cfg.pretrain.sdcae.layers = parse_layer_specs(layers);
    if (!init.empty()) cfg.pretrain.sdcae.init = init_scheme_from_string(init);
    if (!cl_layers.empty()) cfg.cluster.sdcae.layers = parse_layer_specs(cl_layers);
    if (!cl_init.empty()) cfg.cluster.sdcae.init = init_scheme_from_string(cl_init);
    cfg.finetune.finetune.mode = weight_mode_from_string(ft_mode);
    cfg.sr.finetune.mode = weight_mode_from_string(sr_mode);

    if (pre->parsed()) cmd_pretrain(cfg.pretrain, threads);
    if (se->parsed()) cmd_self_examples(cfg.self_examples, threads);
    if (ft->parsed()) cmd_finetune(cfg.finetune);
    if (cl->parsed()) cmd_cluster(cfg.cluster, threads);
    if (sr->parsed()) cmd_sr(cfg.sr, threads);
    if (ev->parsed()) cmd_eval(cfg.eval);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return kInternalExit;
    }
}
