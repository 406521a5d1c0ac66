#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "currents/errors.hpp"

namespace currents {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Closed or open polygonal chain in the plane. Point coordinates share one
/// length unit across a dataset. A polyline is treated as closed when the
/// `closed` flag is set or when first == last within 1e-9 (absolute).
struct Polyline2D {
    std::vector<Vec2> points;
    bool closed = false;
};

/// Triangle mesh with orientation-bearing faces (ordered vertex triples).
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
};

/// A shape as a discrete current: a list of (center, weighted direction)
/// atoms. For curves tau is the chord vector (units of length); for surfaces
/// it is the area-weighted triangle normal (units of length squared).
/// Coordinates are stored flat, dim-strided.
struct ShapeAtoms {
    int dim = 0;
    std::vector<double> centers;
    std::vector<double> taus;
    std::string label;
    std::map<std::string, double> meta;

    std::size_t size() const { return dim == 0 ? 0 : centers.size() / static_cast<std::size_t>(dim); }
    const double* center(std::size_t j) const { return centers.data() + j * static_cast<std::size_t>(dim); }
    const double* tau(std::size_t j) const { return taus.data() + j * static_cast<std::size_t>(dim); }
};

/// Relative degeneracy threshold: lengths below 1e-12 x (bounding-box
/// diagonal) count as zero, keeping the check unit-agnostic.
inline constexpr double kDegenerateRel = 1e-12;
/// Absolute tolerance for detecting an explicit closing point.
inline constexpr double kClosureTol = 1e-9;

/// Bounding-box diagonal of a point set; 0 for fewer than 2 points.
double bbox_diagonal(const std::vector<Vec2>& pts);
double bbox_diagonal(const std::vector<Vec3>& pts);
double bbox_diagonal(const ShapeAtoms& atoms);

/// Throws TooFewPoints / DegenerateSegment on invariant violations.
void validate(const Polyline2D& poly);

/// Throws IndexOutOfRange / DegenerateFace on invariant violations.
void validate(const TriMesh& mesh);

/// True iff first == last within the closure tolerance or the flag is set.
bool is_closed(const Polyline2D& poly);

/// True iff every undirected edge is shared by exactly two faces traversed
/// in opposite directions (closed, consistently oriented surface).
bool is_closed_oriented(const TriMesh& mesh);

/// Throws ValidationError on nonempty/mismatched/nonfinite atom data.
void validate(const ShapeAtoms& atoms);

/// One atom per distinct edge: x_j = midpoint of [y_j, y_{j+1}],
/// tau_j = y_{j+1} - y_j. A closed polyline with p distinct points yields p
/// atoms (the closing segment included); an open one yields p - 1.
ShapeAtoms curve_to_atoms(const Polyline2D& poly);

/// One atom per face: x_j = (v1+v2+v3)/3 and
/// tau_j = (1/2) (v2-v1) x (v3-v1), the normal whose norm is the face area.
ShapeAtoms mesh_to_atoms(const TriMesh& mesh);

/// centers -> scale*R*x + t, taus -> scale^(dim-1)*R*tau (chords scale
/// linearly, face normals with area). R must be orthogonal within 1e-9.
ShapeAtoms transform_shape(const ShapeAtoms& atoms, const Eigen::MatrixXd& rotation,
                           const Eigen::VectorXd& translation, double scale);

/// Same transform applied to raw geometry.
Polyline2D transform_shape(const Polyline2D& poly, const Eigen::MatrixXd& rotation,
                           const Eigen::VectorXd& translation, double scale);
TriMesh transform_shape(const TriMesh& mesh, const Eigen::MatrixXd& rotation,
                        const Eigen::VectorXd& translation, double scale);

/// Reverses orientation: every tau negated, centers untouched.
ShapeAtoms flip_orientation(ShapeAtoms atoms);

}  // namespace currents
