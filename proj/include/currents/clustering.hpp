#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "currents/rkhs.hpp"

namespace currents {

enum class InitMethod { KMeansPP, Random, Provided };

std::string to_string(InitMethod init);
InitMethod init_method_from_string(const std::string& s);

struct KMeansOptions {
    std::uint64_t seed = 0;
    InitMethod init = InitMethod::KMeansPP;
    int max_iter = 100;
    int restarts = 10;
    double tol = 0.0;  // 0 = run to an assignment fixed point
    std::vector<int> initial_assignment;  // used by InitMethod::Provided
};

/// Result of one kernel k-means fit. Clusters in the returned model are all
/// nonempty and the objective trace is non-increasing.
struct ClusterModel {
    int k = 0;
    std::vector<int> assignment;
    std::vector<double> objective_trace;
    std::uint64_t seed = 0;
    InitMethod init = InitMethod::KMeansPP;
    int restarts_used = 0;
    bool converged = false;

    double final_objective() const { return objective_trace.back(); }
};

struct ValidationReport {
    std::vector<double> per_shape_silhouette;
    double mean_silhouette = 0.0;
    double objective = 0.0;
    int k = 0;
};

struct SweepRow {
    int k = 0;
    double objective = 0.0;
    std::optional<double> mean_silhouette;  // absent for k = 1
};

/// Squared RKHS distance from shape l to the implicit mean of the cluster
/// with member indices `members`:
///   G_ll - (2/|C|) sum G_lm + (1/|C|^2) sum sum G_mm'
/// clamped to be nonnegative.
double point_to_centroid_sq(const GramMatrix& gram, int l, const std::vector<int>& members);

/// Within-cluster sum of squared distances to the implicit cluster means.
/// Assignment values must cover 0..k-1 with every cluster nonempty.
double objective(const GramMatrix& gram, const std::vector<int>& assignment);

/// Lloyd iterations in the RKHS: assign each shape to the nearest implicit
/// centroid (ties to the lowest cluster index), recompute centroids as index
/// sets, stop at an assignment fixed point or max_iter. Empty clusters are
/// reseeded with the point farthest from its own centroid. Best of
/// opts.restarts independent starts by final objective.
ClusterModel kernel_kmeans(const GramMatrix& gram, int k, const KMeansOptions& opts = {});

/// Standard silhouette over RKHS distances; singleton clusters score 0.
ValidationReport silhouette(const GramMatrix& gram, const std::vector<int>& assignment);

/// Runs kernel_kmeans for each k in [k_min, k_max] with shared options.
std::vector<SweepRow> sweep_k(const GramMatrix& gram, int k_min, int k_max,
                              const KMeansOptions& opts = {});

/// Chance-corrected agreement between two labelings, in [-1, 1].
double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);
double adjusted_rand_index(const std::vector<std::string>& labels_a,
                           const std::vector<std::string>& labels_b);

/// JSON for ClusterModel ({k, seed, assignment, objective_trace, converged,
/// init, restarts_used}).
std::string cluster_model_to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const std::string& text);

}  // namespace currents
