#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "djsr/sdcae.hpp"
#include "djsr/self_similarity.hpp"
#include "djsr/wbp.hpp"

namespace djsr {

// Row-major sample-by-dimension matrix.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t d) : rows(r), dim(d), data(r * d, 0.0) {}
    double* row(std::size_t i) { return data.data() + i * dim; }
    const double* row(std::size_t i) const { return data.data() + i * dim; }
    void push_back(const std::vector<double>& v);
    bool operator==(const FeatureMatrix&) const = default;
};

double squared_distance(const double* a, const double* b, std::size_t n);

// patch - gaussian_blur(patch, sigma), flattened row-major.
std::vector<double> highpass_feature(const Image& patch, double sigma = 1.0);

struct FeatureParams {
    int size = 18;        // central crop edge
    double sigma = 1.0;
    double norm_floor = 1e-2;
    bool operator==(const FeatureParams&) const = default;
};

// Feature of the central crop of a patch after mean/magnitude normalization.
std::vector<double> cluster_feature(const Image& patch, const FeatureParams& params);

struct KMeansResult {
    FeatureMatrix centroids;
    std::vector<int> assignments;
    std::vector<std::size_t> sizes;
    std::vector<double> objective;  // sum of squared distances after each assignment step
    int iterations = 0;
};

KMeansResult kmeans(const FeatureMatrix& features, int k, int max_iters, std::uint64_t seed,
                    int threads = 1);

struct Clusters {
    FeatureMatrix centroids;
    std::vector<std::size_t> sizes;
    std::vector<int> assignments;
};

// Folds the smallest under-size cluster into its nearest centroid until every
// cluster has at least min_size members or one cluster is left.
Clusters merge_small_clusters(Clusters clusters, std::size_t min_size);

struct ClusterModel {
    FeatureParams features;
    FeatureMatrix centroids;
    std::vector<std::vector<double>> basis;  // d orthonormal vectors
    std::vector<std::size_t> sizes;
    std::vector<double> objective;
    std::vector<std::string> checkpoints;  // relative to the manifest
    std::vector<ModelParams> models;
    std::vector<std::vector<double>> projected;  // centroids in the basis; see update_projection

    int k() const { return static_cast<int>(centroids.rows); }
    int basis_dims() const { return static_cast<int>(basis.size()); }
    std::vector<double> project(const std::vector<double>& feature) const;
    void update_projection();
};

// Eigenvectors of the centroid covariance. With fixed_dims > 0 that many are
// kept, otherwise the fewest whose eigenvalues reach `variance_kept`.
std::vector<std::vector<double>> pca_basis(const FeatureMatrix& centroids, double variance_kept = 0.99,
                                           int fixed_dims = 0);

int select_submodel(const Image& patch, const ClusterModel& cm);
int select_by_feature(const std::vector<double>& feature, const ClusterModel& cm);

struct ClusterConfig {
    int initial_k = 100;
    std::size_t min_size = 500;
    int max_iters = 100;
    std::uint64_t seed = 1;
    FeatureParams features;
    double variance_kept = 0.99;
    int fixed_dims = 0;
    bool operator==(const ClusterConfig&) const = default;
};

// Clusters the training inputs and returns the partition only (no models).
ClusterModel cluster_pairs(const std::vector<TrainingPair>& pairs, const ClusterConfig& config,
                           std::vector<int>* assignments = nullptr, int threads = 1);

// Clusters then pre-trains one SDCAE per surviving cluster.
ClusterModel train_submodels(const std::vector<TrainingPair>& pairs, const ClusterConfig& config,
                             const SdcaeConfig& sdcae, std::uint64_t corpus_hash = 0, int threads = 1);

// Routes every tile to its selected sub-model; overlaps are averaged.
Image apply_submodels(const ClusterModel& cm, const Image& upsampled);

// Fine-tunes each sub-model on the pairs whose query selects it.
struct RoutedFinetune {
    ClusterModel model;
    std::vector<std::size_t> pairs_per_cluster;
    std::vector<FinetuneLog> logs;
};

RoutedFinetune finetune_submodels(ClusterModel cm, const SelfExampleSet& set, const FinetuneConfig& config);

void save_cluster_manifest(const std::filesystem::path& path, const ClusterModel& cm);
// Loads the manifest and every referenced checkpoint.
ClusterModel load_cluster_manifest(const std::filesystem::path& path);

}  // namespace djsr
