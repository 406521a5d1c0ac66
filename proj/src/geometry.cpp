#include "currents/geometry.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace currents {

namespace {

double dist2d(const Vec2& a, const Vec2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

template <typename Pt>
double bbox_diag_impl(const std::vector<Pt>& pts) {
    if (pts.size() < 2) return 0.0;
    Pt lo = pts.front(), hi = pts.front();
    for (const auto& p : pts) {
        for (std::size_t d = 0; d < p.size(); ++d) {
            lo[d] = std::min(lo[d], p[d]);
            hi[d] = std::max(hi[d], p[d]);
        }
    }
    double s = 0.0;
    for (std::size_t d = 0; d < lo.size(); ++d) s += (hi[d] - lo[d]) * (hi[d] - lo[d]);
    return std::sqrt(s);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

double bbox_diagonal(const std::vector<Vec2>& pts) { return bbox_diag_impl(pts); }
double bbox_diagonal(const std::vector<Vec3>& pts) { return bbox_diag_impl(pts); }

double bbox_diagonal(const ShapeAtoms& atoms) {
    const int dim = atoms.dim;
    const std::size_t n = atoms.size();
    if (n < 2) return 0.0;
    double lo[3], hi[3];
    for (int d = 0; d < dim; ++d) lo[d] = hi[d] = atoms.centers[d];
    for (std::size_t j = 1; j < n; ++j) {
        const double* x = atoms.center(j);
        for (int d = 0; d < dim; ++d) {
            lo[d] = std::min(lo[d], x[d]);
            hi[d] = std::max(hi[d], x[d]);
        }
    }
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += (hi[d] - lo[d]) * (hi[d] - lo[d]);
    return std::sqrt(s);
}

void validate(const Polyline2D& poly) {
    if (poly.points.size() < 2) throw TooFewPoints("polyline needs at least 2 points");
    for (const auto& p : poly.points) {
        if (!finite(p[0]) || !finite(p[1])) throw ValidationError("polyline has non-finite coordinates");
    }
    const double tol = kDegenerateRel * bbox_diagonal(poly.points);
    for (std::size_t i = 1; i < poly.points.size(); ++i) {
        if (dist2d(poly.points[i - 1], poly.points[i]) <= tol) {
            throw DegenerateSegment("zero-length segment at point " + std::to_string(i));
        }
    }
}

bool is_closed(const Polyline2D& poly) {
    if (poly.closed) return true;
    if (poly.points.size() < 3) return false;
    return dist2d(poly.points.front(), poly.points.back()) <= kClosureTol;
}

void validate(const TriMesh& mesh) {
    const int nv = static_cast<int>(mesh.vertices.size());
    for (const auto& v : mesh.vertices) {
        if (!finite(v[0]) || !finite(v[1]) || !finite(v[2]))
            throw ValidationError("mesh has non-finite coordinates");
    }
    const double area_tol = kDegenerateRel * bbox_diagonal(mesh.vertices) * bbox_diagonal(mesh.vertices);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        for (int i : face) {
            if (i < 0 || i >= nv)
                throw IndexOutOfRange("face " + std::to_string(f) + " references vertex " + std::to_string(i));
        }
        const Vec3& a = mesh.vertices[face[0]];
        const Vec3& b = mesh.vertices[face[1]];
        const Vec3& c = mesh.vertices[face[2]];
        const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
        const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
        const double cx = uy * vz - uz * vy;
        const double cy = uz * vx - ux * vz;
        const double cz = ux * vy - uy * vx;
        const double area = 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
        if (area <= area_tol) throw DegenerateFace("face " + std::to_string(f) + " has zero area");
    }
}

bool is_closed_oriented(const TriMesh& mesh) {
    if (mesh.faces.empty()) return false;
    // Per undirected edge: occurrences as (lo,hi) and as (hi,lo).
    std::map<std::pair<int, int>, std::pair<int, int>> edges;
    for (const auto& face : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            const int u = face[e];
            const int v = face[(e + 1) % 3];
            if (u == v) return false;
            auto& slot = edges[{std::min(u, v), std::max(u, v)}];
            (u < v ? slot.first : slot.second) += 1;
        }
    }
    for (const auto& [edge, counts] : edges) {
        if (counts.first != 1 || counts.second != 1) return false;
    }
    return true;
}

void validate(const ShapeAtoms& atoms) {
    if (atoms.dim != 2 && atoms.dim != 3) throw ValidationError("atoms dim must be 2 or 3");
    if (atoms.centers.empty()) throw ValidationError("atoms must be nonempty");
    if (atoms.centers.size() != atoms.taus.size())
        throw ValidationError("centers and taus must have equal length");
    if (atoms.centers.size() % static_cast<std::size_t>(atoms.dim) != 0)
        throw ValidationError("atom array length is not a multiple of dim");
    for (double v : atoms.centers)
        if (!finite(v)) throw ValidationError("atom centers contain non-finite values");
    for (double v : atoms.taus)
        if (!finite(v)) throw ValidationError("atom taus contain non-finite values");
}

ShapeAtoms curve_to_atoms(const Polyline2D& poly) {
    validate(poly);
    const bool closed = is_closed(poly);
    std::vector<Vec2> pts = poly.points;
    if (closed && dist2d(pts.front(), pts.back()) <= kClosureTol) pts.pop_back();
    if (closed && pts.size() < 2) throw TooFewPoints("closed polyline needs at least 2 distinct points");
    if (closed) {
        const double tol = kDegenerateRel * bbox_diagonal(pts);
        if (dist2d(pts.back(), pts.front()) <= tol)
            throw DegenerateSegment("closing segment has zero length");
    }

    const std::size_t n_atoms = closed ? pts.size() : pts.size() - 1;
    ShapeAtoms atoms;
    atoms.dim = 2;
    atoms.centers.reserve(2 * n_atoms);
    atoms.taus.reserve(2 * n_atoms);
    for (std::size_t j = 0; j < n_atoms; ++j) {
        const Vec2& a = pts[j];
        const Vec2& b = pts[(j + 1) % pts.size()];
        atoms.centers.push_back(0.5 * (a[0] + b[0]));
        atoms.centers.push_back(0.5 * (a[1] + b[1]));
        atoms.taus.push_back(b[0] - a[0]);
        atoms.taus.push_back(b[1] - a[1]);
    }
    return atoms;
}

ShapeAtoms mesh_to_atoms(const TriMesh& mesh) {
    validate(mesh);
    if (mesh.faces.empty()) throw ValidationError("mesh has no faces");
    ShapeAtoms atoms;
    atoms.dim = 3;
    atoms.centers.reserve(3 * mesh.faces.size());
    atoms.taus.reserve(3 * mesh.faces.size());
    for (const auto& face : mesh.faces) {
        const Vec3& a = mesh.vertices[face[0]];
        const Vec3& b = mesh.vertices[face[1]];
        const Vec3& c = mesh.vertices[face[2]];
        atoms.centers.push_back((a[0] + b[0] + c[0]) / 3.0);
        atoms.centers.push_back((a[1] + b[1] + c[1]) / 3.0);
        atoms.centers.push_back((a[2] + b[2] + c[2]) / 3.0);
        const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
        const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
        atoms.taus.push_back(0.5 * (uy * vz - uz * vy));
        atoms.taus.push_back(0.5 * (uz * vx - ux * vz));
        atoms.taus.push_back(0.5 * (ux * vy - uy * vx));
    }
    return atoms;
}

namespace {

void check_transform(int dim, const Eigen::MatrixXd& rotation, const Eigen::VectorXd& translation,
                     double scale) {
    if (rotation.rows() != dim || rotation.cols() != dim)
        throw ValidationError("rotation matrix must be dim x dim");
    if (translation.size() != dim) throw ValidationError("translation must have length dim");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("scale must be positive");
    const Eigen::MatrixXd err =
        rotation.transpose() * rotation - Eigen::MatrixXd::Identity(dim, dim);
    if (err.cwiseAbs().maxCoeff() > 1e-9)
        throw NonOrthogonalRotation("rotation is not orthogonal within 1e-9");
}

}  // namespace

ShapeAtoms transform_shape(const ShapeAtoms& atoms, const Eigen::MatrixXd& rotation,
                           const Eigen::VectorXd& translation, double scale) {
    validate(atoms);
    const int dim = atoms.dim;
    check_transform(dim, rotation, translation, scale);
    const double tau_scale = dim == 2 ? scale : scale * scale;
    ShapeAtoms out = atoms;
    Eigen::VectorXd x(dim), t(dim);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        for (int d = 0; d < dim; ++d) x[d] = atoms.centers[j * dim + d];
        x = scale * (rotation * x) + translation;
        for (int d = 0; d < dim; ++d) t[d] = atoms.taus[j * dim + d];
        t = tau_scale * (rotation * t);
        for (int d = 0; d < dim; ++d) {
            out.centers[j * dim + d] = x[d];
            out.taus[j * dim + d] = t[d];
        }
    }
    return out;
}

Polyline2D transform_shape(const Polyline2D& poly, const Eigen::MatrixXd& rotation,
                           const Eigen::VectorXd& translation, double scale) {
    check_transform(2, rotation, translation, scale);
    Polyline2D out = poly;
    Eigen::Vector2d x;
    for (auto& p : out.points) {
        x << p[0], p[1];
        x = scale * (rotation * x) + translation;
        p = {x[0], x[1]};
    }
    return out;
}

TriMesh transform_shape(const TriMesh& mesh, const Eigen::MatrixXd& rotation,
                        const Eigen::VectorXd& translation, double scale) {
    check_transform(3, rotation, translation, scale);
    TriMesh out = mesh;
    Eigen::Vector3d x;
    for (auto& v : out.vertices) {
        x << v[0], v[1], v[2];
        x = scale * (rotation * x) + translation;
        v = {x[0], x[1], x[2]};
    }
    return out;
}

ShapeAtoms flip_orientation(ShapeAtoms atoms) {
    for (double& v : atoms.taus) v = -v;
    return atoms;
}

}  // namespace currents
