#include "currents/rkhs.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "currents/util.hpp"

namespace currents {

namespace {

void check_config(const KernelConfig& cfg) {
    if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda))
        throw ValidationError("kernel lambda must be positive and finite");
    if (cfg.dim != 2 && cfg.dim != 3) throw ValidationError("kernel dim must be 2 or 3");
    if (cfg.approx_cutoff_mult != 0.0 && cfg.approx_cutoff_mult < 8.0)
        throw ValidationError("approximate cutoff must be at least 8 lambda");
}

void check_pair(const ShapeAtoms& a, const ShapeAtoms& b, const KernelConfig& cfg) {
    check_config(cfg);
    if (a.dim != cfg.dim || b.dim != cfg.dim)
        throw DimensionMismatch("shape dim does not match kernel dim");
    if (a.centers.empty() || b.centers.empty()) throw ValidationError("atoms must be nonempty");
}

// Arguments beyond this flush the kernel to exactly zero.
constexpr double kExpUnderflow = 700.0;

template <int Dim>
double accumulate_pairs(const double* ac, const double* at, std::size_t na, const double* bc,
                        const double* bt, std::size_t nb, double inv_l2, double cutoff2) {
    util::KahanSum sum;
    for (std::size_t i = 0; i < na; ++i) {
        const double* xi = ac + i * Dim;
        const double* ti = at + i * Dim;
        for (std::size_t j = 0; j < nb; ++j) {
            const double* yj = bc + j * Dim;
            const double* sj = bt + j * Dim;
            double d2 = 0.0;
            for (int d = 0; d < Dim; ++d) {
                const double diff = xi[d] - yj[d];
                d2 += diff * diff;
            }
            if (cutoff2 > 0.0 && d2 > cutoff2) continue;
            const double arg = d2 * inv_l2;
            if (arg > kExpUnderflow) continue;
            double dot = 0.0;
            for (int d = 0; d < Dim; ++d) dot += ti[d] * sj[d];
            sum.add(std::exp(-arg) * dot);
        }
    }
    return sum.value();
}

}  // namespace

double kernel_scalar(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg) {
    check_config(cfg);
    if (x.size() != static_cast<std::size_t>(cfg.dim) || y.size() != static_cast<std::size_t>(cfg.dim))
        throw DimensionMismatch("point dim does not match kernel dim");
    double d2 = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (!std::isfinite(x[d]) || !std::isfinite(y[d]))
            throw ValidationError("kernel input must be finite");
        const double diff = x[d] - y[d];
        d2 += diff * diff;
    }
    const double arg = d2 / (cfg.lambda * cfg.lambda);
    return arg > kExpUnderflow ? 0.0 : std::exp(-arg);
}

double inner_product(const ShapeAtoms& a, const ShapeAtoms& b, const KernelConfig& cfg) {
    check_pair(a, b, cfg);
    const double inv_l2 = 1.0 / (cfg.lambda * cfg.lambda);
    const double cutoff = cfg.approx_cutoff_mult * cfg.lambda;
    const double cutoff2 = cutoff * cutoff;
    if (cfg.dim == 2) {
        return accumulate_pairs<2>(a.centers.data(), a.taus.data(), a.size(), b.centers.data(),
                                   b.taus.data(), b.size(), inv_l2, cutoff2);
    }
    return accumulate_pairs<3>(a.centers.data(), a.taus.data(), a.size(), b.centers.data(),
                               b.taus.data(), b.size(), inv_l2, cutoff2);
}

double inner_product(const WeightedAtoms& a, const WeightedAtoms& b, const KernelConfig& cfg) {
    return a.weight * b.weight * inner_product(a.atoms, b.atoms, cfg);
}

double inner_product(const WeightedAtoms& a, const ShapeAtoms& b, const KernelConfig& cfg) {
    return a.weight * inner_product(a.atoms, b, cfg);
}

double norm(const ShapeAtoms& a, const KernelConfig& cfg) {
    return std::sqrt(std::max(0.0, inner_product(a, a, cfg)));
}

double distance(const ShapeAtoms& a, const ShapeAtoms& b, const KernelConfig& cfg) {
    const double aa = inner_product(a, a, cfg);
    const double ab = inner_product(a, b, cfg);
    const double bb = inner_product(b, b, cfg);
    return std::sqrt(std::max(0.0, aa - 2.0 * ab + bb));
}

double distance(const WeightedAtoms& a, const WeightedAtoms& b, const KernelConfig& cfg) {
    const double aa = inner_product(a, a, cfg);
    const double ab = inner_product(a, b, cfg);
    const double bb = inner_product(b, b, cfg);
    return std::sqrt(std::max(0.0, aa - 2.0 * ab + bb));
}

GramMatrix gram_matrix(std::span<const ShapeAtoms> shapes, const KernelConfig& cfg,
                       std::vector<std::string> shape_ids) {
    check_config(cfg);
    if (shapes.empty()) throw EmptySample("gram_matrix needs at least one shape");
    for (const auto& s : shapes) {
        if (s.dim != cfg.dim) throw DimensionMismatch("shape dim does not match kernel dim");
    }
    if (!shape_ids.empty() && shape_ids.size() != shapes.size())
        throw LengthMismatch("shape_ids length does not match shape count");

    const std::size_t m = shapes.size();
    GramMatrix gram;
    gram.lambda = cfg.lambda;
    gram.dim = cfg.dim;
    gram.entries.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    if (shape_ids.empty()) {
        for (std::size_t i = 0; i < m; ++i) gram.shape_ids.push_back("shape_" + std::to_string(i));
    } else {
        gram.shape_ids = std::move(shape_ids);
    }

    // Unordered pairs (i <= j), flattened; each entry is one sequential sum.
    const std::size_t n_pairs = m * (m + 1) / 2;
    util::parallel_for(n_pairs, [&](std::size_t p) {
        // Invert p = i*m - i*(i-1)/2 + (j - i) by scanning rows.
        std::size_t i = 0;
        std::size_t offset = 0;
        while (offset + (m - i) <= p) {
            offset += m - i;
            ++i;
        }
        const std::size_t j = i + (p - offset);
        const double v = inner_product(shapes[i], shapes[j], cfg);
        gram.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        gram.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    });
    return gram;
}

void validate_gram(const GramMatrix& gram) {
    const Eigen::Index m = gram.entries.rows();
    if (m == 0) throw EmptyGram("gram matrix is empty");
    if (gram.entries.cols() != m) throw ValidationError("gram matrix is not square");
    const double scale = gram.entries.cwiseAbs().maxCoeff();
    const double sym_err = (gram.entries - gram.entries.transpose()).cwiseAbs().maxCoeff();
    if (sym_err > 1e-10 * std::max(scale, 1e-300))
        throw ValidationError("gram matrix is not symmetric within 1e-10 relative");
    for (Eigen::Index i = 0; i < m; ++i) {
        if (gram.entries(i, i) < 0.0) throw ValidationError("gram diagonal has a negative entry");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram.entries,
                                                          Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo < -1e-8 * std::max(hi, 0.0))
        throw ValidationError("gram matrix is not positive semi-definite");
}

WeightedAtoms mean_field(std::span<const ShapeAtoms> shapes) {
    if (shapes.empty()) throw EmptySample("mean of an empty sample");
    WeightedAtoms mean;
    mean.atoms.dim = shapes.front().dim;
    for (const auto& s : shapes) {
        if (s.dim != mean.atoms.dim) throw DimensionMismatch("mixed dims in sample mean");
        mean.atoms.centers.insert(mean.atoms.centers.end(), s.centers.begin(), s.centers.end());
        mean.atoms.taus.insert(mean.atoms.taus.end(), s.taus.begin(), s.taus.end());
    }
    mean.weight = 1.0 / static_cast<double>(shapes.size());
    return mean;
}

double lambda_heuristic(std::span<const ShapeAtoms> shapes, LambdaMode mode) {
    std::size_t n = 0;
    int dim = 0;
    for (const auto& s : shapes) {
        if (dim == 0) dim = s.dim;
        if (s.dim != dim) throw DimensionMismatch("mixed dims in lambda heuristic");
        n += s.size();
    }
    if (n < 2) throw DegeneratePointCloud("need at least 2 pooled atom centers");

    double mean[3] = {0.0, 0.0, 0.0};
    for (const auto& s : shapes) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double* x = s.center(j);
            for (int d = 0; d < dim; ++d) mean[d] += x[d];
        }
    }
    for (int d = 0; d < dim; ++d) mean[d] /= static_cast<double>(n);

    double ss[3] = {0.0, 0.0, 0.0};
    for (const auto& s : shapes) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double* x = s.center(j);
            for (int d = 0; d < dim; ++d) {
                const double diff = x[d] - mean[d];
                ss[d] += diff * diff;
            }
        }
    }
    const double total = ss[0] + ss[1] + ss[2];
    if (total == 0.0) throw DegeneratePointCloud("all pooled atom centers are identical");

    if (mode == LambdaMode::RmsToCentroid) {
        return std::sqrt(total / static_cast<double>(n));
    }
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) acc += std::sqrt(ss[d] / static_cast<double>(n));
    return acc / static_cast<double>(dim);
}

void save_gram_csv(const GramMatrix& gram, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (std::size_t i = 0; i < gram.shape_ids.size(); ++i) {
        if (i > 0) out << ",";
        out << gram.shape_ids[i];
    }
    out << "\n";
    const Eigen::Index m = gram.entries.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j > 0) out << ",";
            out << util::format_double(gram.entries(i, j));
        }
        out << "\n";
    }
}

GramMatrix load_gram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ":1: missing header row");
    GramMatrix gram;
    {
        std::stringstream ss(line);
        std::string id;
        while (std::getline(ss, id, ',')) gram.shape_ids.push_back(id);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(gram.shape_ids.size());
    if (m == 0) throw ParseError(path + ":1: empty header row");
    gram.entries.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!std::getline(in, line))
            throw ParseError(path + ":" + std::to_string(i + 2) + ": missing matrix row");
        std::stringstream ss(line);
        std::string cell;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (!std::getline(ss, cell, ','))
                throw ParseError(path + ":" + std::to_string(i + 2) + ": short matrix row");
            char* end = nullptr;
            gram.entries(i, j) = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw ParseError(path + ":" + std::to_string(i + 2) + ": bad number '" + cell + "'");
        }
    }
    return gram;
}

namespace {
constexpr char kGramMagic[5] = {'G', 'R', 'A', 'M', '1'};
}

void save_gram_binary(const GramMatrix& gram, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out.write(kGramMagic, sizeof(kGramMagic));
    const std::uint32_t dim = static_cast<std::uint32_t>(gram.dim);
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&gram.lambda), sizeof(double));
    const std::uint64_t m = static_cast<std::uint64_t>(gram.entries.rows());
    out.write(reinterpret_cast<const char*>(&m), sizeof(m));
    for (Eigen::Index i = 0; i < gram.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < gram.entries.cols(); ++j) {
            const double v = gram.entries(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
    if (!out) throw Error("short write to " + path);
}

GramMatrix load_gram_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kGramMagic, sizeof(magic)) != 0)
        throw ParseError(path + ": not a GRAM1 file");
    GramMatrix gram;
    std::uint32_t dim = 0;
    std::uint64_t m = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&gram.lambda), sizeof(double));
    in.read(reinterpret_cast<char*>(&m), sizeof(m));
    if (!in || m == 0 || m > (1u << 24)) throw ParseError(path + ": bad GRAM1 header");
    gram.dim = static_cast<int>(dim);
    gram.entries.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::uint64_t i = 0; i < m; ++i) {
        for (std::uint64_t j = 0; j < m; ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            gram.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    if (!in) throw ParseError(path + ": truncated GRAM1 payload");
    for (std::uint64_t i = 0; i < m; ++i) gram.shape_ids.push_back("shape_" + std::to_string(i));
    return gram;
}

namespace {
bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

void save_gram(const GramMatrix& gram, const std::string& path) {
    if (has_suffix(path, ".csv")) {
        save_gram_csv(gram, path);
    } else {
        save_gram_binary(gram, path);
    }
}

GramMatrix load_gram(const std::string& path) {
    return has_suffix(path, ".csv") ? load_gram_csv(path) : load_gram_binary(path);
}

}  // namespace currents
