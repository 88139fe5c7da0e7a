#include "djsr/submodels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "djsr/checkpoint.hpp"
#include "djsr/config_json.hpp"
#include "djsr/parallel.hpp"
#include "djsr/random.hpp"
#include "djsr/resample.hpp"

namespace djsr {

void FeatureMatrix::push_back(const std::vector<double>& v) {
    if (rows == 0 && dim == 0) dim = v.size();
    if (v.size() != dim)
        fail(ErrorKind::shape_mismatch, "feature of length " + std::to_string(v.size()) +
                                            " in a matrix of dim " + std::to_string(dim));
    data.insert(data.end(), v.begin(), v.end());
    ++rows;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<double> highpass_feature(const Image& patch, double sigma) {
    const Image blurred = gaussian_blur(patch, sigma);
    std::vector<double> f(patch.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = patch.pixels()[i] - blurred.pixels()[i];
    return f;
}

std::vector<double> cluster_feature(const Image& patch, const FeatureParams& params) {
    if (patch.rows() < params.size || patch.cols() < params.size)
        fail(ErrorKind::shape_mismatch, "patch " + patch.dims().str() + " smaller than the feature size " +
                                            std::to_string(params.size));
    const Image center = patch.crop_center(params.size, params.size);
    return highpass_feature(normalize_patch(center, params.norm_floor).data, params.sigma);
}

namespace {

// Nearest centroid per sample; ties go to the lowest index.
void assign(const FeatureMatrix& x, const FeatureMatrix& c, std::vector<int>& labels,
            std::vector<double>& dist, int threads) {
    parallel_for(x.rows, threads, [&](std::size_t i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c.rows; ++j) {
            const double d = squared_distance(x.row(i), c.row(j), x.dim);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(j);
            }
        }
        labels[i] = best;
        dist[i] = best_d;
    });
}

}  // namespace

KMeansResult kmeans(const FeatureMatrix& x, int k, int max_iters, std::uint64_t seed, int threads) {
    if (k < 1) fail(ErrorKind::invalid_argument, "kmeans: K must be >= 1");
    if (x.rows < static_cast<std::size_t>(k))
        fail(ErrorKind::invalid_argument, "kmeans: K = " + std::to_string(k) + " exceeds sample count " +
                                              std::to_string(x.rows));
    if (max_iters < 1) fail(ErrorKind::invalid_argument, "kmeans: max_iters must be >= 1");
    const std::size_t n = x.rows, dim = x.dim;
    std::mt19937_64 rng = substream(seed, 0xc1, 0);

    // k-means++ seeding.
    KMeansResult res;
    res.centroids = FeatureMatrix(k, dim);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::copy_n(x.row(first(rng)), dim, res.centroids.row(0));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), res.centroids.row(0), dim);
    for (int j = 1; j < k; ++j) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                if (u < d2[i]) {
                    pick = i;
                    break;
                }
                u -= d2[i];
            }
        } else {
            pick = first(rng);
        }
        std::copy_n(x.row(pick), dim, res.centroids.row(j));
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], squared_distance(x.row(i), res.centroids.row(j), dim));
    }

    std::vector<int> labels(n, -1), prev;
    std::vector<double> dist(n);
    for (int it = 0; it < max_iters; ++it) {
        prev = labels;
        assign(x, res.centroids, labels, dist, threads);
        res.objective.push_back(std::accumulate(dist.begin(), dist.end(), 0.0));
        res.iterations = it + 1;
        if (labels == prev) break;

        FeatureMatrix sums(k, dim);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            double* s = sums.row(labels[i]);
            const double* v = x.row(i);
            for (std::size_t t = 0; t < dim; ++t) s[t] += v[t];
            ++counts[labels[i]];
        }
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) {
                for (std::size_t t = 0; t < dim; ++t)
                    res.centroids.row(j)[t] = sums.row(j)[t] / static_cast<double>(counts[j]);
                continue;
            }
            // Empty cluster: move it onto the sample farthest from its centroid.
            const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            std::copy_n(x.row(far), dim, res.centroids.row(j));
            dist[far] = 0.0;
        }
    }
    res.assignments = labels;
    res.sizes.assign(k, 0);
    for (int l : labels) ++res.sizes[l];
    return res;
}

Clusters merge_small_clusters(Clusters cl, std::size_t min_size) {
    if (min_size < 1) fail(ErrorKind::invalid_argument, "min_size must be >= 1");
    if (cl.sizes.size() != cl.centroids.rows)
        fail(ErrorKind::shape_mismatch, "cluster sizes do not match the centroid count");
    const std::size_t dim = cl.centroids.dim;
    while (cl.sizes.size() > 1) {
        std::size_t small = cl.sizes.size();
        for (std::size_t j = 0; j < cl.sizes.size(); ++j)
            if (cl.sizes[j] < min_size && (small == cl.sizes.size() || cl.sizes[j] < cl.sizes[small]))
                small = j;
        if (small == cl.sizes.size()) break;
        std::size_t near = small == 0 ? 1 : 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cl.sizes.size(); ++j) {
            if (j == small) continue;
            const double d = squared_distance(cl.centroids.row(small), cl.centroids.row(j), dim);
            if (d < best) {
                best = d;
                near = j;
            }
        }
        const double ns = static_cast<double>(cl.sizes[small]), nn = static_cast<double>(cl.sizes[near]);
        if (ns + nn > 0.0)
            for (std::size_t t = 0; t < dim; ++t)
                cl.centroids.row(near)[t] =
                    (ns * cl.centroids.row(small)[t] + nn * cl.centroids.row(near)[t]) / (ns + nn);
        cl.sizes[near] += cl.sizes[small];
        cl.sizes.erase(cl.sizes.begin() + static_cast<std::ptrdiff_t>(small));
        cl.centroids.data.erase(cl.centroids.data.begin() + static_cast<std::ptrdiff_t>(small * dim),
                                cl.centroids.data.begin() + static_cast<std::ptrdiff_t>((small + 1) * dim));
        --cl.centroids.rows;
        for (int& a : cl.assignments) {
            if (a == static_cast<int>(small)) a = static_cast<int>(near);
            if (a > static_cast<int>(small)) --a;
        }
    }
    return cl;
}

std::vector<std::vector<double>> pca_basis(const FeatureMatrix& c, double variance_kept, int fixed_dims) {
    if (c.rows == 0) fail(ErrorKind::invalid_argument, "pca_basis: no centroids");
    const auto k = static_cast<Eigen::Index>(c.rows), d = static_cast<Eigen::Index>(c.dim);
    if (fixed_dims > d) fail(ErrorKind::invalid_argument, "pca_basis: more dimensions than features");
    Eigen::MatrixXd u(k, d);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < d; ++j) u(i, j) = c.row(i)[j];
    const Eigen::RowVectorXd mean = u.colwise().mean();
    u.rowwise() -= mean;
    const Eigen::MatrixXd cov = (u.transpose() * u) / static_cast<double>(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) fail(ErrorKind::numeric, "pca_basis: eigen-decomposition failed");
    const Eigen::VectorXd values = solver.eigenvalues().reverse();
    const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
    int keep = fixed_dims;
    if (keep <= 0) {
        const double total = values.cwiseMax(0.0).sum();
        keep = 0;
        if (total > 0.0) {
            double acc = 0.0;
            while (keep < d && acc < variance_kept * total) acc += std::max(values(keep++), 0.0);
        }
    }
    std::vector<std::vector<double>> basis(keep, std::vector<double>(c.dim));
    for (int b = 0; b < keep; ++b)
        for (Eigen::Index j = 0; j < d; ++j) basis[b][j] = vectors(j, b);
    return basis;
}

std::vector<double> ClusterModel::project(const std::vector<double>& f) const {
    std::vector<double> out(basis.size(), 0.0);
    for (std::size_t b = 0; b < basis.size(); ++b)
        for (std::size_t j = 0; j < f.size(); ++j) out[b] += basis[b][j] * f[j];
    return out;
}

void ClusterModel::update_projection() {
    projected.clear();
    for (std::size_t j = 0; j < centroids.rows; ++j)
        projected.push_back(project(std::vector<double>(centroids.row(j), centroids.row(j) + centroids.dim)));
}

int select_by_feature(const std::vector<double>& feature, const ClusterModel& cm) {
    if (feature.size() != cm.centroids.dim)
        fail(ErrorKind::shape_mismatch, "feature length " + std::to_string(feature.size()) +
                                            " does not match centroid dim " + std::to_string(cm.centroids.dim));
    if (cm.k() == 0) fail(ErrorKind::invalid_argument, "cluster model has no centroids");
    const std::vector<double> p = cm.project(feature);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    const bool cached = cm.projected.size() == static_cast<std::size_t>(cm.k());
    for (int j = 0; j < cm.k(); ++j) {
        const std::vector<double> q =
            cached ? cm.projected[j]
                   : cm.project(std::vector<double>(cm.centroids.row(j), cm.centroids.row(j) + cm.centroids.dim));
        const double d = squared_distance(p.data(), q.data(), p.size());
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

int select_submodel(const Image& patch, const ClusterModel& cm) {
    return select_by_feature(cluster_feature(patch, cm.features), cm);
}

ClusterModel cluster_pairs(const std::vector<TrainingPair>& pairs, const ClusterConfig& config,
                           std::vector<int>* assignments, int threads) {
    if (pairs.empty()) fail(ErrorKind::invalid_argument, "cluster: no training pairs");
    std::vector<std::vector<double>> feats(pairs.size());
    parallel_for(pairs.size(), threads,
                 [&](std::size_t i) { feats[i] = cluster_feature(pairs[i].input, config.features); });
    FeatureMatrix x;
    for (const auto& f : feats) x.push_back(f);
    const int k = std::min<int>(config.initial_k, static_cast<int>(x.rows));
    KMeansResult km = kmeans(x, k, config.max_iters, config.seed, threads);
    Clusters cl = merge_small_clusters({km.centroids, km.sizes, km.assignments}, config.min_size);
    ClusterModel cm;
    cm.features = config.features;
    cm.centroids = std::move(cl.centroids);
    cm.sizes = std::move(cl.sizes);
    cm.objective = std::move(km.objective);
    cm.basis = pca_basis(cm.centroids, config.variance_kept, config.fixed_dims);
    cm.update_projection();
    if (assignments) *assignments = std::move(cl.assignments);
    return cm;
}

ClusterModel train_submodels(const std::vector<TrainingPair>& pairs, const ClusterConfig& config,
                             const SdcaeConfig& sdcae, std::uint64_t corpus_hash, int threads) {
    std::vector<int> labels;
    ClusterModel cm = cluster_pairs(pairs, config, &labels, threads);
    if (cm.k() > 1)
        for (std::size_t s : cm.sizes)
            if (s < config.min_size)
                fail(ErrorKind::invalid_argument, "cluster of size " + std::to_string(s) +
                                                      " is below min_size after merging");
    for (int j = 0; j < cm.k(); ++j) {
        std::vector<TrainingPair> members;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (labels[i] == j) members.push_back(pairs[i]);
        cm.models.push_back(pretrain(members, sdcae, corpus_hash, threads).model);
    }
    return cm;
}

Image apply_submodels(const ClusterModel& cm, const Image& upsampled) {
    if (cm.models.size() != static_cast<std::size_t>(cm.k()))
        fail(ErrorKind::invalid_argument, "cluster model has no trained sub-models");
    return apply_network_with(cm.models.front(), upsampled, [&cm](const Image& tile) -> const ModelParams& {
        return cm.models[select_submodel(tile, cm)];
    });
}

RoutedFinetune finetune_submodels(ClusterModel cm, const SelfExampleSet& set, const FinetuneConfig& config) {
    if (cm.models.size() != static_cast<std::size_t>(cm.k()))
        fail(ErrorKind::invalid_argument, "cluster model has no trained sub-models");
    const int margin = cm.models.front().border_trim() / 2;
    std::vector<std::vector<std::size_t>> groups(cm.k());
    for (std::size_t i = 0; i < set.pairs.size(); ++i)
        groups[select_submodel(set.query_context(set.pairs[i], margin), cm)].push_back(i);
    RoutedFinetune out;
    for (int j = 0; j < cm.k(); ++j) {
        FinetuneResult r = finetune(std::move(cm.models[j]), set, groups[j], config);
        cm.models[j] = std::move(r.model);
        out.pairs_per_cluster.push_back(groups[j].size());
        out.logs.push_back(std::move(r.log));
    }
    out.model = std::move(cm);
    return out;
}

void save_cluster_manifest(const std::filesystem::path& path, const ClusterModel& cm) {
    using nlohmann::json;
    ClusterModel copy = cm;
    if (copy.checkpoints.size() != copy.models.size()) {
        copy.checkpoints.clear();
        const std::string stem = path.stem().string();
        for (std::size_t j = 0; j < copy.models.size(); ++j) {
            char name[32];
            std::snprintf(name, sizeof name, "_%02zu.djsr", j);
            copy.checkpoints.push_back(stem + name);
        }
    }
    json j;
    j["K"] = copy.k();
    j["feature"] = {{"size", copy.features.size}, {"sigma", copy.features.sigma},
                    {"norm_floor", copy.features.norm_floor}};
    json centroids = json::array();
    for (std::size_t i = 0; i < copy.centroids.rows; ++i)
        centroids.push_back(std::vector<double>(copy.centroids.row(i), copy.centroids.row(i) + copy.centroids.dim));
    j["centroids"] = centroids;
    j["pca_basis"] = copy.basis;
    j["sizes"] = copy.sizes;
    j["objective"] = copy.objective;
    j["checkpoints"] = copy.checkpoints;
    std::ofstream f(path);
    if (!f) fail(ErrorKind::io, "cannot write " + path.string());
    f << j.dump(2) << '\n';
    if (!f) fail(ErrorKind::io, "error writing " + path.string());
    for (std::size_t m = 0; m < copy.models.size(); ++m)
        save_checkpoint(path.parent_path() / copy.checkpoints[m], copy.models[m]);
}

ClusterModel load_cluster_manifest(const std::filesystem::path& path) {
    using nlohmann::json;
    std::ifstream f(path);
    if (!f) fail(ErrorKind::io, "cannot open " + path.string());
    ClusterModel cm;
    try {
        const json j = json::parse(f);
        cm.features.size = j.at("feature").at("size").get<int>();
        cm.features.sigma = j.at("feature").at("sigma").get<double>();
        cm.features.norm_floor = j.at("feature").at("norm_floor").get<double>();
        for (const auto& row : j.at("centroids")) cm.centroids.push_back(row.get<std::vector<double>>());
        cm.basis = j.at("pca_basis").get<std::vector<std::vector<double>>>();
        cm.sizes = j.at("sizes").get<std::vector<std::size_t>>();
        cm.objective = j.value("objective", std::vector<double>{});
        cm.checkpoints = j.at("checkpoints").get<std::vector<std::string>>();
        if (j.at("K").get<int>() != cm.k()) fail(ErrorKind::format, path.string() + ": K does not match centroids");
    } catch (const json::exception& e) {
        fail(ErrorKind::format, path.string() + ": " + e.what());
    }
    if (cm.sizes.size() != static_cast<std::size_t>(cm.k()))
        fail(ErrorKind::format, path.string() + ": sizes do not match K");
    for (const auto& b : cm.basis)
        if (b.size() != cm.centroids.dim) fail(ErrorKind::format, path.string() + ": basis dim mismatch");
    cm.update_projection();
    for (const std::string& c : cm.checkpoints) cm.models.push_back(load_checkpoint(path.parent_path() / c));
    if (!cm.models.empty() && cm.models.size() != static_cast<std::size_t>(cm.k()))
        fail(ErrorKind::format, path.string() + ": checkpoint count does not match K");
    return cm;
}

}  // namespace djsr
