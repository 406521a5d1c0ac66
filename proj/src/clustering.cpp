#include "currents/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "currents/util.hpp"

namespace currents {

namespace {

using nlohmann::json;

// Per-cluster sums that make point-to-centroid distances O(1):
//   member_sum(l, i) = sum_{m in C_i} G(l, m)
//   pair_sum(i)      = sum_{m, m' in C_i} G(m, m')
// All sums run over members in ascending index order; results are therefore
// identical at any thread count.
struct ClusterStats {
    std::vector<int> sizes;
    std::vector<double> pair_sums;
    Eigen::MatrixXd member_sums;  // m x k
};

std::vector<std::vector<int>> members_by_cluster(const std::vector<int>& assignment, int k) {
    std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
    for (std::size_t l = 0; l < assignment.size(); ++l) {
        members[static_cast<std::size_t>(assignment[l])].push_back(static_cast<int>(l));
    }
    return members;
}

ClusterStats compute_stats(const GramMatrix& gram, const std::vector<int>& assignment, int k) {
    const Eigen::Index m = gram.entries.rows();
    ClusterStats stats;
    stats.sizes.assign(static_cast<std::size_t>(k), 0);
    stats.pair_sums.assign(static_cast<std::size_t>(k), 0.0);
    stats.member_sums.setZero(m, k);
    const auto members = members_by_cluster(assignment, k);
    for (int i = 0; i < k; ++i) {
        const auto& cluster = members[static_cast<std::size_t>(i)];
        stats.sizes[static_cast<std::size_t>(i)] = static_cast<int>(cluster.size());
        for (Eigen::Index l = 0; l < m; ++l) {
            util::KahanSum row;
            for (int mem : cluster) row.add(gram.entries(l, mem));
            stats.member_sums(l, i) = row.value();
        }
        util::KahanSum pair;
        for (int mem : cluster) pair.add(stats.member_sums(mem, i));
        stats.pair_sums[static_cast<std::size_t>(i)] = pair.value();
    }
    return stats;
}

double dist_sq_to_cluster(const GramMatrix& gram, const ClusterStats& stats, int l, int i) {
    const double size = static_cast<double>(stats.sizes[static_cast<std::size_t>(i)]);
    const double v = gram.entries(l, l) - 2.0 * stats.member_sums(l, i) / size +
                     stats.pair_sums[static_cast<std::size_t>(i)] / (size * size);
    return std::max(0.0, v);
}

double partition_objective(const GramMatrix& gram, const std::vector<int>& assignment,
                           const ClusterStats& stats) {
    util::KahanSum w;
    for (std::size_t l = 0; l < assignment.size(); ++l) {
        w.add(dist_sq_to_cluster(gram, stats, static_cast<int>(l), assignment[l]));
    }
    return w.value();
}

void check_assignment(const GramMatrix& gram, const std::vector<int>& assignment, int k) {
    if (assignment.size() != static_cast<std::size_t>(gram.entries.rows()))
        throw LengthMismatch("assignment length does not match gram size");
    for (int a : assignment) {
        if (a < 0 || a >= k) throw ValidationError("assignment value out of range");
    }
}

// Moves the point farthest from its own centroid into each empty cluster.
// Points that are the sole member of their cluster stay put. Repairing can
// only lower the objective: removing a point from a cluster of size s
// reduces that cluster's contribution by s/(s-1) times its squared distance,
// and a singleton contributes nothing.
void repair_empty_clusters(const GramMatrix& gram, std::vector<int>& assignment, int k) {
    while (true) {
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
        int empty = -1;
        for (int i = 0; i < k; ++i) {
            if (sizes[static_cast<std::size_t>(i)] == 0) {
                empty = i;
                break;
            }
        }
        if (empty < 0) return;
        const ClusterStats stats = compute_stats(gram, assignment, k);
        // Some cluster has >= 2 members whenever an empty one exists (k <= m).
        int farthest = -1;
        double farthest_d = -1.0;
        for (std::size_t l = 0; l < assignment.size(); ++l) {
            if (sizes[static_cast<std::size_t>(assignment[l])] < 2) continue;
            const double d = dist_sq_to_cluster(gram, stats, static_cast<int>(l), assignment[l]);
            if (d > farthest_d) {
                farthest_d = d;
                farthest = static_cast<int>(l);
            }
        }
        if (farthest < 0) return;
        assignment[static_cast<std::size_t>(farthest)] = empty;
    }
}

std::vector<int> kmeanspp_assignment(const GramMatrix& gram, int k, util::Rng& rng) {
    const int m = gram.size();
    std::vector<int> seeds;
    seeds.reserve(static_cast<std::size_t>(k));
    seeds.push_back(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m))));

    auto seed_dist_sq = [&](int l, int s) {
        return std::max(0.0,
                        gram.entries(l, l) - 2.0 * gram.entries(l, s) + gram.entries(s, s));
    };

    std::vector<double> d2min(static_cast<std::size_t>(m));
    for (int l = 0; l < m; ++l) d2min[static_cast<std::size_t>(l)] = seed_dist_sq(l, seeds[0]);

    while (static_cast<int>(seeds.size()) < k) {
        util::KahanSum total;
        for (double d : d2min) total.add(d);
        int pick = -1;
        if (total.value() > 0.0) {
            const double r = rng.uniform() * total.value();
            double cum = 0.0;
            for (int l = 0; l < m; ++l) {
                cum += d2min[static_cast<std::size_t>(l)];
                if (cum > r) {
                    pick = l;
                    break;
                }
            }
            if (pick < 0) {  // fell off the end through round-off
                for (int l = m - 1; l >= 0; --l) {
                    if (d2min[static_cast<std::size_t>(l)] > 0.0) {
                        pick = l;
                        break;
                    }
                }
            }
        }
        if (pick < 0) {
            // All remaining mass is zero (duplicate shapes); take the lowest
            // index that is not already a seed.
            for (int l = 0; l < m; ++l) {
                if (std::find(seeds.begin(), seeds.end(), l) == seeds.end()) {
                    pick = l;
                    break;
                }
            }
        }
        seeds.push_back(pick);
        for (int l = 0; l < m; ++l) {
            d2min[static_cast<std::size_t>(l)] =
                std::min(d2min[static_cast<std::size_t>(l)], seed_dist_sq(l, pick));
        }
    }

    std::vector<int> assignment(static_cast<std::size_t>(m), 0);
    for (int l = 0; l < m; ++l) {
        int best = 0;
        double best_d = seed_dist_sq(l, seeds[0]);
        for (int j = 1; j < k; ++j) {
            const double d = seed_dist_sq(l, seeds[static_cast<std::size_t>(j)]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        assignment[static_cast<std::size_t>(l)] = best;
    }
    return assignment;
}

ClusterModel run_single(const GramMatrix& gram, int k, const KMeansOptions& opts,
                        std::uint64_t stream_seed) {
    const int m = gram.size();
    util::Rng rng(stream_seed);

    std::vector<int> assignment;
    switch (opts.init) {
        case InitMethod::KMeansPP:
            assignment = kmeanspp_assignment(gram, k, rng);
            break;
        case InitMethod::Random:
            assignment.resize(static_cast<std::size_t>(m));
            for (auto& a : assignment) a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
            break;
        case InitMethod::Provided:
            assignment = opts.initial_assignment;
            check_assignment(gram, assignment, k);
            break;
    }
    repair_empty_clusters(gram, assignment, k);

    ClusterModel model;
    model.k = k;
    model.seed = opts.seed;
    model.init = opts.init;
    model.converged = false;

    for (int iter = 0;; ++iter) {
        const ClusterStats stats = compute_stats(gram, assignment, k);
        const double w = partition_objective(gram, assignment, stats);
        model.objective_trace.push_back(w);
        if (opts.tol > 0.0 && model.objective_trace.size() >= 2) {
            const double prev = model.objective_trace[model.objective_trace.size() - 2];
            if (prev - w <= opts.tol) {
                model.converged = true;
                break;
            }
        }
        if (iter >= opts.max_iter) break;

        std::vector<int> next(static_cast<std::size_t>(m));
        for (int l = 0; l < m; ++l) {
            int best = 0;
            double best_d = dist_sq_to_cluster(gram, stats, l, 0);
            for (int i = 1; i < k; ++i) {
                const double d = dist_sq_to_cluster(gram, stats, l, i);
                if (d < best_d) {  // ties keep the lowest cluster index
                    best_d = d;
                    best = i;
                }
            }
            next[static_cast<std::size_t>(l)] = best;
        }
        repair_empty_clusters(gram, next, k);
        if (next == assignment) {
            model.converged = true;
            break;
        }
        assignment = std::move(next);
    }

    model.assignment = std::move(assignment);
    return model;
}

}  // namespace

std::string to_string(InitMethod init) {
    switch (init) {
        case InitMethod::KMeansPP: return "kmeans++";
        case InitMethod::Random: return "random";
        case InitMethod::Provided: return "provided";
    }
    return "kmeans++";
}

InitMethod init_method_from_string(const std::string& s) {
    if (s == "kmeans++" || s == "kmeanspp") return InitMethod::KMeansPP;
    if (s == "random") return InitMethod::Random;
    if (s == "provided") return InitMethod::Provided;
    throw ValidationError("unknown init method '" + s + "'");
}

double point_to_centroid_sq(const GramMatrix& gram, int l, const std::vector<int>& members) {
    if (members.empty()) throw EmptyCluster("point_to_centroid_sq with empty cluster");
    const Eigen::Index m = gram.entries.rows();
    if (l < 0 || l >= m) throw IndexOutOfRange("shape index out of range");
    for (int mem : members) {
        if (mem < 0 || mem >= m) throw IndexOutOfRange("cluster member index out of range");
    }
    const double size = static_cast<double>(members.size());
    util::KahanSum cross;
    for (int mem : members) cross.add(gram.entries(l, mem));
    util::KahanSum pair;
    for (int mem : members) {
        util::KahanSum row;
        for (int mem2 : members) row.add(gram.entries(mem, mem2));
        pair.add(row.value());
    }
    const double v =
        gram.entries(l, l) - 2.0 * cross.value() / size + pair.value() / (size * size);
    return std::max(0.0, v);
}

double objective(const GramMatrix& gram, const std::vector<int>& assignment) {
    if (assignment.empty()) throw EmptyGram("objective of empty assignment");
    const int k = *std::max_element(assignment.begin(), assignment.end()) + 1;
    check_assignment(gram, assignment, k);
    const ClusterStats stats = compute_stats(gram, assignment, k);
    for (int i = 0; i < k; ++i) {
        if (stats.sizes[static_cast<std::size_t>(i)] == 0)
            throw EmptyCluster("cluster " + std::to_string(i) + " is empty");
    }
    return partition_objective(gram, assignment, stats);
}

ClusterModel kernel_kmeans(const GramMatrix& gram, int k, const KMeansOptions& opts) {
    const int m = gram.size();
    if (m == 0) throw EmptyGram("kernel_kmeans on an empty gram matrix");
    if (k < 1 || k > m) throw InvalidK("k must be in [1, " + std::to_string(m) + "]");
    validate_gram(gram);
    if (opts.max_iter < 1) throw ValidationError("max_iter must be at least 1");
    if (opts.restarts < 1) throw ValidationError("restarts must be at least 1");
    if (opts.init == InitMethod::Provided) {
        ClusterModel model = run_single(gram, k, opts, opts.seed);
        model.restarts_used = 1;
        return model;
    }

    const int restarts = opts.restarts;
    std::vector<ClusterModel> results(static_cast<std::size_t>(restarts));
    util::parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
        results[r] = run_single(gram, k, opts, util::derive_seed(opts.seed, r));
    });
    // Lowest final objective wins; ties keep the earliest restart, so the
    // reduction is independent of scheduling.
    std::size_t best = 0;
    for (std::size_t r = 1; r < results.size(); ++r) {
        if (results[r].final_objective() < results[best].final_objective()) best = r;
    }
    ClusterModel model = std::move(results[best]);
    model.restarts_used = restarts;
    return model;
}

ValidationReport silhouette(const GramMatrix& gram, const std::vector<int>& assignment) {
    if (assignment.empty()) throw EmptyGram("silhouette of empty assignment");
    const int k = *std::max_element(assignment.begin(), assignment.end()) + 1;
    if (k < 2) throw SingleCluster("silhouette needs at least 2 clusters");
    check_assignment(gram, assignment, k);
    const int m = gram.size();
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
    for (int i = 0; i < k; ++i) {
        if (sizes[static_cast<std::size_t>(i)] == 0)
            throw EmptyCluster("cluster " + std::to_string(i) + " is empty");
    }

    auto dist = [&](int a, int b) {
        return std::sqrt(std::max(
            0.0, gram.entries(a, a) - 2.0 * gram.entries(a, b) + gram.entries(b, b)));
    };

    ValidationReport report;
    report.k = k;
    report.per_shape_silhouette.assign(static_cast<std::size_t>(m), 0.0);
    for (int l = 0; l < m; ++l) {
        const int own = assignment[static_cast<std::size_t>(l)];
        if (sizes[static_cast<std::size_t>(own)] == 1) continue;  // singleton convention: 0
        std::vector<util::KahanSum> sums(static_cast<std::size_t>(k));
        for (int mm = 0; mm < m; ++mm) {
            if (mm == l) continue;
            sums[static_cast<std::size_t>(assignment[static_cast<std::size_t>(mm)])].add(dist(l, mm));
        }
        const double a =
            sums[static_cast<std::size_t>(own)].value() / (sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i) {
            if (i == own) continue;
            b = std::min(b, sums[static_cast<std::size_t>(i)].value() /
                                sizes[static_cast<std::size_t>(i)]);
        }
        const double denom = std::max(a, b);
        report.per_shape_silhouette[static_cast<std::size_t>(l)] =
            denom > 0.0 ? (b - a) / denom : 0.0;
    }
    util::KahanSum mean;
    for (double s : report.per_shape_silhouette) mean.add(s);
    report.mean_silhouette = mean.value() / static_cast<double>(m);
    report.objective = objective(gram, assignment);
    return report;
}

std::vector<SweepRow> sweep_k(const GramMatrix& gram, int k_min, int k_max,
                              const KMeansOptions& opts) {
    if (k_min < 1 || k_max < k_min || k_max > gram.size())
        throw InvalidK("k range must satisfy 1 <= k_min <= k_max <= m");
    std::vector<SweepRow> rows;
    for (int k = k_min; k <= k_max; ++k) {
        const ClusterModel model = kernel_kmeans(gram, k, opts);
        SweepRow row;
        row.k = k;
        row.objective = model.final_objective();
        if (k >= 2) row.mean_silhouette = silhouette(gram, model.assignment).mean_silhouette;
        rows.push_back(row);
    }
    return rows;
}

double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw LengthMismatch("labelings must have equal length");
    const std::size_t n = labels_a.size();
    if (n < 2) throw LengthMismatch("labelings need at least 2 items");

    std::map<std::pair<int, int>, long long> contingency;
    std::map<int, long long> row_sums, col_sums;
    for (std::size_t i = 0; i < n; ++i) {
        ++contingency[{labels_a[i], labels_b[i]}];
        ++row_sums[labels_a[i]];
        ++col_sums[labels_b[i]];
    }
    auto comb2 = [](long long v) { return 0.5 * static_cast<double>(v) * static_cast<double>(v - 1); };
    double index = 0.0;
    for (const auto& [cell, count] : contingency) index += comb2(count);
    double row_comb = 0.0, col_comb = 0.0;
    for (const auto& [label, count] : row_sums) row_comb += comb2(count);
    for (const auto& [label, count] : col_sums) col_comb += comb2(count);
    const double total_comb = comb2(static_cast<long long>(n));
    const double expected = row_comb * col_comb / total_comb;
    const double max_index = 0.5 * (row_comb + col_comb);
    if (max_index == expected) return 1.0;  // both labelings trivial
    return (index - expected) / (max_index - expected);
}

double adjusted_rand_index(const std::vector<std::string>& labels_a,
                           const std::vector<std::string>& labels_b) {
    auto encode = [](const std::vector<std::string>& labels) {
        std::map<std::string, int> ids;
        std::vector<int> out;
        out.reserve(labels.size());
        for (const auto& s : labels) {
            auto [it, inserted] = ids.emplace(s, static_cast<int>(ids.size()));
            out.push_back(it->second);
        }
        return out;
    };
    return adjusted_rand_index(encode(labels_a), encode(labels_b));
}

std::string cluster_model_to_json(const ClusterModel& model) {
    json doc;
    doc["k"] = model.k;
    doc["seed"] = model.seed;
    doc["assignment"] = model.assignment;
    doc["objective_trace"] = model.objective_trace;
    doc["converged"] = model.converged;
    doc["init"] = to_string(model.init);
    doc["restarts_used"] = model.restarts_used;
    return doc.dump(2) + "\n";
}

ClusterModel cluster_model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("cluster model JSON: ") + e.what());
    }
    ClusterModel model;
    model.k = doc.at("k").get<int>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.assignment = doc.at("assignment").get<std::vector<int>>();
    model.objective_trace = doc.at("objective_trace").get<std::vector<double>>();
    model.converged = doc.at("converged").get<bool>();
    if (doc.contains("init")) model.init = init_method_from_string(doc["init"].get<std::string>());
    if (doc.contains("restarts_used")) model.restarts_used = doc["restarts_used"].get<int>();
    return model;
}

}  // namespace currents
