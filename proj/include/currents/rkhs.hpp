#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "currents/geometry.hpp"

namespace currents {

/// Gaussian bandwidth and ambient dimension; together they fix the RKHS the
/// shapes are embedded in. lambda is in the same length unit as the input
/// coordinates. approx_cutoff_mult is an evaluation policy, not part of the
/// metric: 0 means exact; a value >= 8 enables skipping atom pairs farther
/// apart than mult * lambda.
struct KernelConfig {
    double lambda = 1.0;
    int dim = 2;
    double approx_cutoff_mult = 0.0;
};

/// A shape field scaled by a weight; sample means are represented this way
/// (concatenated member atoms, weight 1/m) and are never densified.
struct WeightedAtoms {
    ShapeAtoms atoms;
    double weight = 1.0;
};

/// Symmetric PSD matrix of pairwise RKHS inner products.
struct GramMatrix {
    Eigen::MatrixXd entries;
    double lambda = 0.0;
    int dim = 0;
    std::vector<std::string> shape_ids;

    int size() const { return static_cast<int>(entries.rows()); }
};

/// exp(-|x - y|^2 / lambda^2), in (0, 1]. Arguments past exp(-700) are
/// flushed to zero.
double kernel_scalar(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg);

/// sum_i sum_j k(x^a_i, x^b_j) (tau^a_i . tau^b_j), accumulated in fixed
/// i-major order with compensated summation, so entries are bitwise
/// reproducible at any thread count.
double inner_product(const ShapeAtoms& a, const ShapeAtoms& b, const KernelConfig& cfg);
double inner_product(const WeightedAtoms& a, const WeightedAtoms& b, const KernelConfig& cfg);
double inner_product(const WeightedAtoms& a, const ShapeAtoms& b, const KernelConfig& cfg);

/// sqrt(max(0, <a,a> - 2<a,b> + <b,b>)); the clamp guards round-off.
double distance(const ShapeAtoms& a, const ShapeAtoms& b, const KernelConfig& cfg);
double distance(const WeightedAtoms& a, const WeightedAtoms& b, const KernelConfig& cfg);

double norm(const ShapeAtoms& a, const KernelConfig& cfg);

/// Pairwise inner products; entries (i,j) and (j,i) come from one sequential
/// double-sum per unordered pair, computed in parallel over pairs.
GramMatrix gram_matrix(std::span<const ShapeAtoms> shapes, const KernelConfig& cfg,
                       std::vector<std::string> shape_ids = {});

/// Checks symmetry (1e-10 relative), nonnegative diagonal and positive
/// semi-definiteness (lambda_min >= -1e-8 * lambda_max).
void validate_gram(const GramMatrix& gram);

/// Sample mean in the RKHS: member atoms concatenated with weight 1/m.
WeightedAtoms mean_field(std::span<const ShapeAtoms> shapes);

enum class LambdaMode {
    RmsToCentroid,   // sqrt(mean squared distance of pooled centers to their mean)
    MeanPerAxisStd,  // average per-coordinate standard deviation
};

/// Bandwidth heuristic over the pooled atom centers of all shapes.
double lambda_heuristic(std::span<const ShapeAtoms> shapes,
                        LambdaMode mode = LambdaMode::RmsToCentroid);

/// CSV: header row of shape ids, then full-precision rows.
void save_gram_csv(const GramMatrix& gram, const std::string& path);
GramMatrix load_gram_csv(const std::string& path);

/// Binary: magic "GRAM1", u32 dim, f64 lambda, u64 m, then m*m row-major
/// f64 entries, little-endian.
void save_gram_binary(const GramMatrix& gram, const std::string& path);
GramMatrix load_gram_binary(const std::string& path);

/// Dispatches on extension: ".csv" text, anything else binary.
void save_gram(const GramMatrix& gram, const std::string& path);
GramMatrix load_gram(const std::string& path);

}  // namespace currents
