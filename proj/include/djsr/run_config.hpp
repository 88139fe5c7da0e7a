#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "djsr/sdcae.hpp"
#include "djsr/self_similarity.hpp"
#include "djsr/submodels.hpp"
#include "djsr/wbp.hpp"

namespace djsr {

// One section per CLI command. Each command draws all of its randomness
// from its section's seed, which overrides the seeds of nested configs.
struct PretrainSection {
    std::string corpus;
    std::string output;
    std::string loss_csv;  // empty: next to the checkpoint
    std::uint64_t seed = 1;
    SdcaeConfig sdcae;
    bool operator==(const PretrainSection&) const = default;
};

struct SelfExamplesSection {
    std::string input;
    std::string output;
    std::string histogram;  // empty: next to the pair file
    std::uint64_t seed = 1;
    SelfExampleParams params;
    double mismatch_fraction = 0.0;
    bool operator==(const SelfExamplesSection&) const = default;
};

struct FinetuneSection {
    std::string model;
    std::string pairs;
    std::string output;
    std::uint64_t seed = 1;
    FinetuneConfig finetune;
    bool operator==(const FinetuneSection&) const = default;
};

struct ClusterSection {
    std::string corpus;
    std::string output;
    std::uint64_t seed = 1;
    bool train = true;  // false writes the partition only
    ClusterConfig cluster;
    SdcaeConfig sdcae;
    bool operator==(const ClusterSection&) const = default;
};

struct SrSection {
    std::string input;
    std::string output;
    std::string model;
    std::string clusters;
    double target_scale = 2.0;
    std::uint64_t seed = 1;
    bool self_tune = false;
    SelfExampleParams examples;
    FinetuneConfig finetune;
    bool operator==(const SrSection&) const = default;
};

// Pairwise when reference and test are files, dataset mode when both are
// directories (images matched by file name).
struct EvalSection {
    std::string reference;
    std::string test;
    std::string output;
    std::string method = "sr";
    double target_scale = 1.0;
    int border = 0;
    bool operator==(const EvalSection&) const = default;
};

struct RunConfig {
    PretrainSection pretrain;
    SelfExamplesSection self_examples;
    FinetuneSection finetune;
    ClusterSection cluster;
    SrSection sr;
    EvalSection eval;
    bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const SelfExampleParams& p);
void from_json(const nlohmann::json& j, SelfExampleParams& p);
void to_json(nlohmann::json& j, const FinetuneConfig& c);
void from_json(const nlohmann::json& j, FinetuneConfig& c);
void to_json(nlohmann::json& j, const FeatureParams& p);
void from_json(const nlohmann::json& j, FeatureParams& p);
void to_json(nlohmann::json& j, const ClusterConfig& c);
void from_json(const nlohmann::json& j, ClusterConfig& c);

void to_json(nlohmann::json& j, const PretrainSection& s);
void from_json(const nlohmann::json& j, PretrainSection& s);
void to_json(nlohmann::json& j, const SelfExamplesSection& s);
void from_json(const nlohmann::json& j, SelfExamplesSection& s);
void to_json(nlohmann::json& j, const FinetuneSection& s);
void from_json(const nlohmann::json& j, FinetuneSection& s);
void to_json(nlohmann::json& j, const ClusterSection& s);
void from_json(const nlohmann::json& j, ClusterSection& s);
void to_json(nlohmann::json& j, const SrSection& s);
void from_json(const nlohmann::json& j, SrSection& s);
void to_json(nlohmann::json& j, const EvalSection& s);
void from_json(const nlohmann::json& j, EvalSection& s);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// Unknown keys are rejected so that typos do not fall back to defaults.
RunConfig parse_run_config(const std::string& text, const std::string& source = "config");
RunConfig load_run_config(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace djsr
