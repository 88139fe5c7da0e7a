#include "djsr/run_config.hpp"

#include <fstream>
#include <sstream>

#include "djsr/config_json.hpp"

namespace djsr {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const SelfExampleParams& p) {
    j = json{{"scale", p.scale},
             {"levels", p.levels},
             {"matches", p.matches},
             {"patch", p.patch},
             {"stride", p.stride},
             {"search_half_extent", p.search_half_extent},
             {"full_search", p.full_search},
             {"weight_temperature", p.weight_temperature}};
}

void from_json(const json& j, SelfExampleParams& p) {
    check_known_keys(j, {"scale", "levels", "matches", "patch", "stride", "search_half_extent", "full_search",
                         "weight_temperature"},
                     "self-example params");
    read(j, "scale", p.scale);
    read(j, "levels", p.levels);
    read(j, "matches", p.matches);
    read(j, "patch", p.patch);
    read(j, "stride", p.stride);
    read(j, "search_half_extent", p.search_half_extent);
    read(j, "full_search", p.full_search);
    read(j, "weight_temperature", p.weight_temperature);
}

void to_json(json& j, const FinetuneConfig& c) {
    j = json{{"learning_rate", c.learning_rate}, {"momentum", c.momentum},
             {"epochs", c.epochs},               {"use_weights", c.use_weights},
             {"weight_mode", to_string(c.mode)}, {"reset_momentum", c.reset_momentum},
             {"max_pairs", c.max_pairs}};
}

void from_json(const json& j, FinetuneConfig& c) {
    check_known_keys(j, {"learning_rate", "momentum", "epochs", "use_weights", "weight_mode", "reset_momentum",
                         "max_pairs"},
                     "finetune params");
    read(j, "learning_rate", c.learning_rate);
    read(j, "momentum", c.momentum);
    read(j, "epochs", c.epochs);
    read(j, "use_weights", c.use_weights);
    if (j.contains("weight_mode")) c.mode = weight_mode_from_string(j.at("weight_mode").get<std::string>());
    read(j, "reset_momentum", c.reset_momentum);
    read(j, "max_pairs", c.max_pairs);
}

void to_json(json& j, const FeatureParams& p) {
    j = json{{"size", p.size}, {"sigma", p.sigma}, {"norm_floor", p.norm_floor}};
}

void from_json(const json& j, FeatureParams& p) {
    check_known_keys(j, {"size", "sigma", "norm_floor"}, "feature params");
    read(j, "size", p.size);
    read(j, "sigma", p.sigma);
    read(j, "norm_floor", p.norm_floor);
}

void to_json(json& j, const ClusterConfig& c) {
    j = json{{"initial_k", c.initial_k},         {"min_size", c.min_size},     {"max_iters", c.max_iters},
             {"features", c.features},           {"variance_kept", c.variance_kept},
             {"fixed_dims", c.fixed_dims}};
}

void from_json(const json& j, ClusterConfig& c) {
    check_known_keys(j, {"initial_k", "min_size", "max_iters", "features", "variance_kept", "fixed_dims"},
                     "cluster params");
    read(j, "initial_k", c.initial_k);
    read(j, "min_size", c.min_size);
    read(j, "max_iters", c.max_iters);
    read(j, "features", c.features);
    read(j, "variance_kept", c.variance_kept);
    read(j, "fixed_dims", c.fixed_dims);
}

// Nested seeds are not serialized; the section seed is the only one.
void to_json(json& j, const PretrainSection& s) {
    json sd = s.sdcae;
    sd.erase("seed");
    j = json{{"corpus", s.corpus}, {"output", s.output}, {"loss_csv", s.loss_csv}, {"seed", s.seed}, {"sdcae", sd}};
}

void from_json(const json& j, PretrainSection& s) {
    check_known_keys(j, {"corpus", "output", "loss_csv", "seed", "sdcae"}, "pretrain");
    read(j, "corpus", s.corpus);
    read(j, "output", s.output);
    read(j, "loss_csv", s.loss_csv);
    read(j, "seed", s.seed);
    if (j.contains("sdcae")) {
        if (j.at("sdcae").contains("seed")) fail(ErrorKind::format, "pretrain.sdcae: use the section seed");
        from_json(j.at("sdcae"), s.sdcae);
    }
    s.sdcae.seed = s.seed;
}

void to_json(json& j, const SelfExamplesSection& s) {
    j = json{{"input", s.input},   {"output", s.output}, {"histogram", s.histogram},
             {"seed", s.seed},     {"params", s.params}, {"mismatch_fraction", s.mismatch_fraction}};
}

void from_json(const json& j, SelfExamplesSection& s) {
    check_known_keys(j, {"input", "output", "histogram", "seed", "params", "mismatch_fraction"}, "self_examples");
    read(j, "input", s.input);
    read(j, "output", s.output);
    read(j, "histogram", s.histogram);
    read(j, "seed", s.seed);
    read(j, "params", s.params);
    read(j, "mismatch_fraction", s.mismatch_fraction);
}

void to_json(json& j, const FinetuneSection& s) {
    j = json{{"model", s.model}, {"pairs", s.pairs}, {"output", s.output}, {"seed", s.seed},
             {"params", s.finetune}};
}

void from_json(const json& j, FinetuneSection& s) {
    check_known_keys(j, {"model", "pairs", "output", "seed", "params"}, "finetune");
    read(j, "model", s.model);
    read(j, "pairs", s.pairs);
    read(j, "output", s.output);
    read(j, "seed", s.seed);
    read(j, "params", s.finetune);
    s.finetune.seed = s.seed;
}

void to_json(json& j, const ClusterSection& s) {
    json sd = s.sdcae;
    sd.erase("seed");
    j = json{{"corpus", s.corpus}, {"output", s.output}, {"seed", s.seed},
             {"train", s.train},   {"params", s.cluster}, {"sdcae", sd}};
}

void from_json(const json& j, ClusterSection& s) {
    check_known_keys(j, {"corpus", "output", "seed", "train", "params", "sdcae"}, "cluster");
    read(j, "corpus", s.corpus);
    read(j, "output", s.output);
    read(j, "seed", s.seed);
    read(j, "train", s.train);
    read(j, "params", s.cluster);
    if (j.contains("sdcae")) {
        if (j.at("sdcae").contains("seed")) fail(ErrorKind::format, "cluster.sdcae: use the section seed");
        from_json(j.at("sdcae"), s.sdcae);
    }
    s.cluster.seed = s.seed;
    s.sdcae.seed = s.seed;
}

void to_json(json& j, const SrSection& s) {
    j = json{{"input", s.input},
             {"output", s.output},
             {"model", s.model},
             {"clusters", s.clusters},
             {"target_scale", s.target_scale},
             {"seed", s.seed},
             {"self_tune", s.self_tune},
             {"examples", s.examples},
             {"finetune", s.finetune}};
}

void from_json(const json& j, SrSection& s) {
    check_known_keys(j, {"input", "output", "model", "clusters", "target_scale", "seed", "self_tune", "examples",
                         "finetune"},
                     "sr");
    read(j, "input", s.input);
    read(j, "output", s.output);
    read(j, "model", s.model);
    read(j, "clusters", s.clusters);
    read(j, "target_scale", s.target_scale);
    read(j, "seed", s.seed);
    read(j, "self_tune", s.self_tune);
    read(j, "examples", s.examples);
    read(j, "finetune", s.finetune);
    s.finetune.seed = s.seed;
}

void to_json(json& j, const EvalSection& s) {
    j = json{{"reference", s.reference}, {"test", s.test},
             {"output", s.output},       {"method", s.method},
             {"target_scale", s.target_scale}, {"border", s.border}};
}

void from_json(const json& j, EvalSection& s) {
    check_known_keys(j, {"reference", "test", "output", "method", "target_scale", "border"}, "eval");
    read(j, "reference", s.reference);
    read(j, "test", s.test);
    read(j, "output", s.output);
    read(j, "method", s.method);
    read(j, "target_scale", s.target_scale);
    read(j, "border", s.border);
}

void to_json(json& j, const RunConfig& c) {
    j = json{{"pretrain", c.pretrain}, {"self_examples", c.self_examples}, {"finetune", c.finetune},
             {"cluster", c.cluster},   {"sr", c.sr},                       {"eval", c.eval}};
}

void from_json(const json& j, RunConfig& c) {
    // "command" is written by the CLI's provenance sidecars; it is informational.
    check_known_keys(j, {"command", "pretrain", "self_examples", "finetune", "cluster", "sr", "eval"}, "config");
    read(j, "pretrain", c.pretrain);
    read(j, "self_examples", c.self_examples);
    read(j, "finetune", c.finetune);
    read(j, "cluster", c.cluster);
    read(j, "sr", c.sr);
    read(j, "eval", c.eval);
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
    try {
        return json::parse(text).get<RunConfig>();
    } catch (const json::exception& e) {
        fail(ErrorKind::format, source + ": " + e.what());
    } catch (const Error& e) {
        fail(e.kind(), source + ": " + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::io, "cannot open config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str(), path.string());
}

void save_json(const std::filesystem::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::io, "cannot write " + path.string());
    f << j.dump(2) << '\n';
    if (!f) fail(ErrorKind::io, "error writing " + path.string());
}

}  // namespace djsr
