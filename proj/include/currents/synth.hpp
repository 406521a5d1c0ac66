#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "currents/geometry.hpp"

namespace currents {

/// One synthetic class: a parametric family plus its parameters.
/// 2D families: "ellipse" (a, b), "rounded-rect" (width, height, corner),
/// "star" (radius, depth, lobes). 3D families: "sphere" (radius),
/// "ellipsoid" (a, b, c), "pear" (size, neck). Every family accepts "noise",
/// the relative amplitude of the seeded radial perturbation that makes
/// same-class members differ (default 0.02).
struct ClassSpec {
    std::string family;
    int count = 1;
    std::map<std::string, double> params;
};

/// Experimental design for one synthetic dataset. "common-height" rescales
/// every shape to a common extent along the designated axis. "two-heights"
/// additionally enlarges the first half of each class (rounded up) by
/// scale_factor and multiplies every shape by an independent uniform draw
/// from jitter_range; true labels then split each class into two height
/// groups.
struct ScenarioSpec {
    enum class Kind { CommonHeight, TwoHeights };

    std::vector<ClassSpec> classes;
    Kind scenario = Kind::CommonHeight;
    double scale_factor = 1.5;
    std::array<double, 2> jitter_range{1.0, 1.1};
    int resolution = 0;  // 0 = default: 100 points (2D), 1000 triangles (3D)
    std::uint64_t seed = 0;
    int axis = -1;  // -1 = default: x for 2D, y for 3D
    double common_extent = 2.0;
};

ScenarioSpec scenario_spec_from_json(const std::string& text);
std::string scenario_spec_to_json(const ScenarioSpec& spec);

/// Closed contour with n_points points (first repeated as the last),
/// counter-clockwise, centered at the origin.
Polyline2D gen_contour(const std::string& family, const std::map<std::string, double>& params,
                       int n_points, std::uint64_t seed);

/// Closed, outward-oriented triangulation with approximately n_triangles
/// faces. Counts of exactly 20*4^d produce a subdivided icosahedron for the
/// sphere/ellipsoid families; other counts use a latitude-band construction.
/// The pear is a surface of revolution of r(v) = sin(pi v) (1 - neck v).
TriMesh gen_mesh(const std::string& family, const std::map<std::string, double>& params,
                 int n_triangles, std::uint64_t seed);

/// Unit-sphere icosahedron subdivision with 20*4^depth faces.
TriMesh icosphere(double radius, int depth);

/// 2 for contour families, 3 for mesh families.
int family_dim(const std::string& family);

struct GeneratedShape {
    std::variant<Polyline2D, TriMesh> geometry;
    ShapeAtoms atoms;  // label and meta ("height", ...) filled in
    std::string label;
};

/// Builds the full scenario: generate, center, normalize extents, apply the
/// height-group scaling and jitter, and convert to atoms. Identical specs
/// (including seed) reproduce bitwise-identical shapes.
std::vector<GeneratedShape> build_scenario(const ScenarioSpec& spec);

}  // namespace currents
