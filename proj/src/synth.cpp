#include "currents/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <json.hpp>

#include "currents/util.hpp"

namespace currents {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw BadFamilyParams(msg);
}

// ---- 2D families ----

Polyline2D ellipse_contour(double a, double b, int n) {
    Polyline2D poly;
    for (int i = 0; i < n - 1; ++i) {
        const double t = 2.0 * kPi * i / (n - 1);
        poly.points.push_back({a * std::cos(t), b * std::sin(t)});
    }
    return poly;
}

Polyline2D star_contour(double radius, double depth, int lobes, int n) {
    Polyline2D poly;
    for (int i = 0; i < n - 1; ++i) {
        const double t = 2.0 * kPi * i / (n - 1);
        const double r = radius * (1.0 + depth * std::cos(lobes * t));
        poly.points.push_back({r * std::cos(t), r * std::sin(t)});
    }
    return poly;
}

// Axis-aligned rectangle with quarter-circle corners, walked CCW by arc
// length from the start of the bottom edge.
Polyline2D rounded_rect_contour(double w, double h, double r, int n) {
    const double sx = w - 2.0 * r;  // straight run along x
    const double sy = h - 2.0 * r;
    const double arc = 0.5 * kPi * r;
    const double perimeter = 2.0 * sx + 2.0 * sy + 4.0 * arc;

    auto point_at = [&](double s) -> Vec2 {
        // bottom edge, BR corner, right edge, TR corner, top edge, TL
        // corner, left edge, BL corner
        if (s < sx) return {-w / 2 + r + s, -h / 2};
        s -= sx;
        if (s < arc) {
            const double t = -kPi / 2 + s / r;
            return {w / 2 - r + r * std::cos(t), -h / 2 + r + r * std::sin(t)};
        }
        s -= arc;
        if (s < sy) return {w / 2, -h / 2 + r + s};
        s -= sy;
        if (s < arc) {
            const double t = s / r;
            return {w / 2 - r + r * std::cos(t), h / 2 - r + r * std::sin(t)};
        }
        s -= arc;
        if (s < sx) return {w / 2 - r - s, h / 2};
        s -= sx;
        if (s < arc) {
            const double t = kPi / 2 + s / r;
            return {-w / 2 + r + r * std::cos(t), h / 2 - r + r * std::sin(t)};
        }
        s -= arc;
        if (s < sy) return {-w / 2, h / 2 - r - s};
        s -= sy;
        const double t = kPi + s / r;
        return {-w / 2 + r + r * std::cos(t), -h / 2 + r + r * std::sin(t)};
    };

    Polyline2D poly;
    for (int i = 0; i < n - 1; ++i) {
        poly.points.push_back(point_at(perimeter * i / (n - 1)));
    }
    return poly;
}

// ---- 3D builders ----

TriMesh icosahedron() {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    TriMesh mesh;
    mesh.vertices = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                     {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                     {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                  {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                  {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return mesh;
}

void project_to_sphere(TriMesh& mesh, double radius) {
    for (auto& v : mesh.vertices) {
        const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        for (double& c : v) c *= radius / len;
    }
}

// Signed volume via the divergence theorem; negative means inward faces.
double signed_volume(const TriMesh& mesh) {
    util::KahanSum vol;
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        vol.add(a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                a[2] * (b[0] * c[1] - b[1] * c[0]));
    }
    return vol.value() / 6.0;
}

void orient_outward(TriMesh& mesh) {
    if (signed_volume(mesh) < 0.0) {
        for (auto& f : mesh.faces) std::swap(f[1], f[2]);
    }
}

// Surface of revolution about the y axis. yfun maps v in [0,1] to height;
// rx/rz give the cross-section semi-axes (0 at both ends -> poles).
TriMesh revolve_mesh(int n_triangles, const std::function<double(double)>& yfun,
                     const std::function<double(double)>& rxfun,
                     const std::function<double(double)>& rzfun) {
    int nlon = std::max(8, static_cast<int>(std::lround(std::sqrt(n_triangles / 2.0))));
    int bands = std::max(3, static_cast<int>(std::lround(n_triangles / (2.0 * nlon))) + 1);
    // faces = 2 * nlon * (bands - 1)

    TriMesh mesh;
    const int south = 0;
    mesh.vertices.push_back({0.0, yfun(0.0), 0.0});
    for (int t = 1; t < bands; ++t) {
        const double v = static_cast<double>(t) / bands;
        const double y = yfun(v);
        const double rx = rxfun(v);
        const double rz = rzfun(v);
        for (int s = 0; s < nlon; ++s) {
            const double th = 2.0 * kPi * s / nlon;
            mesh.vertices.push_back({rx * std::cos(th), y, rz * std::sin(th)});
        }
    }
    const int north = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back({0.0, yfun(1.0), 0.0});

    auto ring = [&](int t, int s) { return 1 + (t - 1) * nlon + (s % nlon); };
    for (int s = 0; s < nlon; ++s) mesh.faces.push_back({south, ring(1, s), ring(1, s + 1)});
    for (int t = 1; t + 1 < bands; ++t) {
        for (int s = 0; s < nlon; ++s) {
            mesh.faces.push_back({ring(t, s), ring(t + 1, s), ring(t + 1, s + 1)});
            mesh.faces.push_back({ring(t, s), ring(t + 1, s + 1), ring(t, s + 1)});
        }
    }
    for (int s = 0; s < nlon; ++s)
        mesh.faces.push_back({north, ring(bands - 1, s + 1), ring(bands - 1, s)});

    orient_outward(mesh);
    return mesh;
}

// -1 when n is not an exact icosphere face count 20*4^d.
int icosphere_depth_for(int n) {
    int count = 20;
    for (int d = 0; d <= 8; ++d) {
        if (n == count) return d;
        count *= 4;
    }
    return -1;
}

TriMesh ellipsoid_mesh(double a, double b, double c, int n_triangles) {
    const int depth = icosphere_depth_for(n_triangles);
    TriMesh mesh;
    if (depth >= 0) {
        mesh = icosphere(1.0, depth);
    } else {
        mesh = revolve_mesh(
            n_triangles, [](double v) { return -std::cos(kPi * v); },
            [](double v) { return std::sin(kPi * v); }, [](double v) { return std::sin(kPi * v); });
    }
    for (auto& v : mesh.vertices) {
        v[0] *= a;
        v[1] *= b;
        v[2] *= c;
    }
    return mesh;
}

void perturb_radially(std::vector<Vec2>& pts, double noise, util::Rng& rng) {
    if (noise == 0.0) return;
    for (auto& p : pts) {
        const double f = 1.0 + noise * rng.uniform(-1.0, 1.0);
        p[0] *= f;
        p[1] *= f;
    }
}

void perturb_radially(std::vector<Vec3>& pts, double noise, util::Rng& rng) {
    if (noise == 0.0) return;
    for (auto& p : pts) {
        const double f = 1.0 + noise * rng.uniform(-1.0, 1.0);
        p[0] *= f;
        p[1] *= f;
        p[2] *= f;
    }
}

}  // namespace

TriMesh icosphere(double radius, int depth) {
    require(depth >= 0 && depth <= 8, "icosphere depth must be in [0, 8]");
    TriMesh mesh = icosahedron();
    for (int level = 0; level < depth; ++level) {
        std::map<std::pair<int, int>, int> midpoints;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            const Vec3& va = mesh.vertices[a];
            const Vec3& vb = mesh.vertices[b];
            mesh.vertices.push_back(
                {0.5 * (va[0] + vb[0]), 0.5 * (va[1] + vb[1]), 0.5 * (va[2] + vb[2])});
            const int idx = static_cast<int>(mesh.vertices.size()) - 1;
            midpoints.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> faces;
        faces.reserve(mesh.faces.size() * 4);
        for (const auto& f : mesh.faces) {
            const int ab = midpoint(f[0], f[1]);
            const int bc = midpoint(f[1], f[2]);
            const int ca = midpoint(f[2], f[0]);
            faces.push_back({f[0], ab, ca});
            faces.push_back({f[1], bc, ab});
            faces.push_back({f[2], ca, bc});
            faces.push_back({ab, bc, ca});
        }
        mesh.faces = std::move(faces);
    }
    project_to_sphere(mesh, radius);
    orient_outward(mesh);
    return mesh;
}

int family_dim(const std::string& family) {
    if (family == "ellipse" || family == "rounded-rect" || family == "star") return 2;
    if (family == "sphere" || family == "ellipsoid" || family == "pear") return 3;
    throw BadFamilyParams("unknown family '" + family + "'");
}

Polyline2D gen_contour(const std::string& family, const std::map<std::string, double>& params,
                       int n_points, std::uint64_t seed) {
    require(n_points >= 8, "contour needs at least 8 points");
    const double noise = get_param(params, "noise", 0.02);
    require(noise >= 0.0 && noise < 0.5, "noise must be in [0, 0.5)");

    Polyline2D poly;
    if (family == "ellipse") {
        const double a = get_param(params, "a", 2.0);
        const double b = get_param(params, "b", 1.0);
        require(a > 0.0 && b > 0.0, "ellipse semi-axes must be positive");
        poly = ellipse_contour(a, b, n_points);
    } else if (family == "rounded-rect") {
        const double w = get_param(params, "width", 2.0);
        const double h = get_param(params, "height", 1.0);
        const double r = get_param(params, "corner", 0.25);
        require(w > 0.0 && h > 0.0, "rect sides must be positive");
        require(r > 0.0 && r <= 0.5 * std::min(w, h), "corner radius must be in (0, min(w,h)/2]");
        poly = rounded_rect_contour(w, h, r, n_points);
    } else if (family == "star") {
        const double radius = get_param(params, "radius", 1.0);
        const double depth = get_param(params, "depth", 0.3);
        const double lobes_d = get_param(params, "lobes", 5.0);
        const int lobes = static_cast<int>(lobes_d);
        require(radius > 0.0, "star radius must be positive");
        require(depth >= 0.0 && depth < 1.0, "star depth must be in [0, 1)");
        require(lobes >= 2 && lobes == lobes_d, "lobes must be an integer >= 2");
        poly = star_contour(radius, depth, lobes, n_points);
    } else {
        throw BadFamilyParams(family_dim(family) == 2 ? "bad contour family"
                                                      : "'" + family + "' is a mesh family");
    }

    util::Rng rng(seed);
    perturb_radially(poly.points, noise, rng);
    poly.points.push_back(poly.points.front());  // explicit closure
    poly.closed = true;
    return poly;
}

TriMesh gen_mesh(const std::string& family, const std::map<std::string, double>& params,
                 int n_triangles, std::uint64_t seed) {
    require(n_triangles >= 100, "mesh needs at least 100 triangles");
    const double noise = get_param(params, "noise", 0.02);
    require(noise >= 0.0 && noise < 0.5, "noise must be in [0, 0.5)");

    TriMesh mesh;
    if (family == "sphere") {
        const double r = get_param(params, "radius", 1.0);
        require(r > 0.0, "sphere radius must be positive");
        mesh = ellipsoid_mesh(r, r, r, n_triangles);
    } else if (family == "ellipsoid") {
        const double a = get_param(params, "a", 1.0);
        const double b = get_param(params, "b", 1.6);
        const double c = get_param(params, "c", 1.0);
        require(a > 0.0 && b > 0.0 && c > 0.0, "ellipsoid semi-axes must be positive");
        mesh = ellipsoid_mesh(a, b, c, n_triangles);
    } else if (family == "pear") {
        const double size = get_param(params, "size", 1.0);
        const double neck = get_param(params, "neck", 0.35);
        require(size > 0.0, "pear size must be positive");
        require(neck >= 0.0 && neck < 1.0, "pear neck must be in [0, 1)");
        mesh = revolve_mesh(
            n_triangles, [size](double v) { return size * (v - 0.5); },
            [size, neck](double v) { return 0.5 * size * std::sin(kPi * v) * (1.0 - neck * v); },
            [size, neck](double v) { return 0.5 * size * std::sin(kPi * v) * (1.0 - neck * v); });
    } else {
        throw BadFamilyParams(family_dim(family) == 3 ? "bad mesh family"
                                                      : "'" + family + "' is a contour family");
    }

    util::Rng rng(seed);
    perturb_radially(mesh.vertices, noise, rng);
    return mesh;
}

namespace {

template <typename Pt>
void center_points(std::vector<Pt>& pts) {
    Pt lo = pts.front(), hi = pts.front();
    for (const auto& p : pts) {
        for (std::size_t d = 0; d < p.size(); ++d) {
            lo[d] = std::min(lo[d], p[d]);
            hi[d] = std::max(hi[d], p[d]);
        }
    }
    Pt mid;
    for (std::size_t d = 0; d < mid.size(); ++d) mid[d] = 0.5 * (lo[d] + hi[d]);
    for (auto& p : pts) {
        for (std::size_t d = 0; d < p.size(); ++d) p[d] -= mid[d];
    }
}

template <typename Pt>
double extent_along(const std::vector<Pt>& pts, int axis) {
    double lo = pts.front()[static_cast<std::size_t>(axis)];
    double hi = lo;
    for (const auto& p : pts) {
        lo = std::min(lo, p[static_cast<std::size_t>(axis)]);
        hi = std::max(hi, p[static_cast<std::size_t>(axis)]);
    }
    return hi - lo;
}

template <typename Pt>
void scale_points(std::vector<Pt>& pts, double s) {
    for (auto& p : pts) {
        for (double& c : p) c *= s;
    }
}

}  // namespace

std::vector<GeneratedShape> build_scenario(const ScenarioSpec& spec) {
    require(!spec.classes.empty(), "scenario needs at least one class");
    require(spec.scale_factor > 0.0, "scale_factor must be positive");
    require(spec.jitter_range[0] > 0.0 && spec.jitter_range[0] <= spec.jitter_range[1],
            "jitter range must satisfy 0 < lo <= hi");
    require(spec.common_extent > 0.0, "common_extent must be positive");

    const int dim = family_dim(spec.classes.front().family);
    for (const auto& cls : spec.classes) {
        require(cls.count >= 1, "class count must be >= 1");
        require(family_dim(cls.family) == dim, "all classes must share one dimension");
    }
    const int resolution = spec.resolution > 0 ? spec.resolution : (dim == 2 ? 100 : 1000);
    const int axis = spec.axis >= 0 ? spec.axis : (dim == 2 ? 0 : 1);
    require(axis < dim, "axis out of range for dimension");

    std::vector<GeneratedShape> out;
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const auto& cls = spec.classes[c];
        const int enlarged = (cls.count + 1) / 2;  // first half, rounded up
        for (int member = 0; member < cls.count; ++member) {
            const std::uint64_t shape_seed = util::derive_seed(spec.seed, c, static_cast<std::uint64_t>(member));
            util::Rng jitter_rng(util::derive_seed(shape_seed, 0x6a69747465721ULL));

            GeneratedShape shape;
            std::string label = "c" + std::to_string(c) + "_" + cls.family;
            double height_group = 0.0;

            auto finish = [&](auto& geom) {
                auto& pts = [&]() -> auto& {
                    if constexpr (std::is_same_v<std::decay_t<decltype(geom)>, Polyline2D>) {
                        return geom.points;
                    } else {
                        return geom.vertices;
                    }
                }();
                center_points(pts);
                const double extent = extent_along(pts, axis);
                require(extent > 0.0, "generated shape has zero extent along the axis");
                double s = spec.common_extent / extent;
                if (spec.scenario == ScenarioSpec::Kind::TwoHeights) {
                    if (member < enlarged) {
                        s *= spec.scale_factor;
                        height_group = 1.0;
                    }
                    s *= jitter_rng.uniform(spec.jitter_range[0], spec.jitter_range[1]);
                    label += height_group > 0.0 ? "_h1" : "_h0";
                }
                scale_points(pts, s);
                shape.atoms = [&] {
                    if constexpr (std::is_same_v<std::decay_t<decltype(geom)>, Polyline2D>) {
                        return curve_to_atoms(geom);
                    } else {
                        return mesh_to_atoms(geom);
                    }
                }();
                shape.atoms.meta["height"] = extent_along(pts, axis);
                shape.atoms.meta["class_index"] = static_cast<double>(c);
                if (spec.scenario == ScenarioSpec::Kind::TwoHeights) {
                    shape.atoms.meta["height_group"] = height_group;
                }
                shape.atoms.label = label;
                shape.label = label;
                shape.geometry = geom;
            };

            if (dim == 2) {
                Polyline2D poly = gen_contour(cls.family, cls.params, resolution, shape_seed);
                finish(poly);
            } else {
                TriMesh mesh = gen_mesh(cls.family, cls.params, resolution, shape_seed);
                finish(mesh);
            }
            out.push_back(std::move(shape));
        }
    }
    return out;
}

namespace {

ScenarioSpec::Kind kind_from_string(const std::string& s) {
    if (s == "common-height") return ScenarioSpec::Kind::CommonHeight;
    if (s == "two-heights") return ScenarioSpec::Kind::TwoHeights;
    throw BadFamilyParams("unknown scenario '" + s + "' (common-height | two-heights)");
}

std::string kind_to_string(ScenarioSpec::Kind kind) {
    return kind == ScenarioSpec::Kind::CommonHeight ? "common-height" : "two-heights";
}

}  // namespace

ScenarioSpec scenario_spec_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario spec: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("classes") || !doc["classes"].is_array())
        throw ParseError("scenario spec must be an object with a \"classes\" array");
    ScenarioSpec spec;
    for (const auto& entry : doc["classes"]) {
        ClassSpec cls;
        cls.family = entry.at("family").get<std::string>();
        cls.count = entry.value("count", 1);
        if (entry.contains("params")) {
            for (const auto& [key, value] : entry["params"].items()) {
                if (!value.is_number()) throw ParseError("family params must be numeric");
                cls.params[key] = value.get<double>();
            }
        }
        spec.classes.push_back(std::move(cls));
    }
    spec.scenario = kind_from_string(doc.value("scenario", std::string("common-height")));
    spec.scale_factor = doc.value("scale_factor", 1.5);
    if (doc.contains("jitter_range")) {
        const auto& j = doc["jitter_range"];
        if (!j.is_array() || j.size() != 2) throw ParseError("jitter_range must be [lo, hi]");
        spec.jitter_range = {j[0].get<double>(), j[1].get<double>()};
    }
    spec.resolution = doc.value("resolution", 0);
    spec.seed = doc.value("seed", 0ULL);
    spec.axis = doc.value("axis", -1);
    spec.common_extent = doc.value("common_extent", 2.0);
    return spec;
}

std::string scenario_spec_to_json(const ScenarioSpec& spec) {
    json doc;
    doc["classes"] = json::array();
    for (const auto& cls : spec.classes) {
        json entry;
        entry["family"] = cls.family;
        entry["count"] = cls.count;
        entry["params"] = cls.params;
        doc["classes"].push_back(entry);
    }
    doc["scenario"] = kind_to_string(spec.scenario);
    doc["scale_factor"] = spec.scale_factor;
    doc["jitter_range"] = {spec.jitter_range[0], spec.jitter_range[1]};
    doc["resolution"] = spec.resolution;
    doc["seed"] = spec.seed;
    doc["axis"] = spec.axis;
    doc["common_extent"] = spec.common_extent;
    return doc.dump(2) + "\n";
}

}  // namespace currents
