#include "currents/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "currents/util.hpp"

namespace currents {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& name, std::size_t line, const std::string& msg) {
    throw ParseError(name + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& tok, double& out) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

Polyline2D load_csv_polyline(std::istream& in, const std::string& name) {
    Polyline2D poly;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv(line);
        if (cells.size() < 2) parse_fail(name, lineno, "expected x,y");
        double x, y;
        if (!parse_number(cells[0], x) || !parse_number(cells[1], y)) {
            if (poly.points.empty() && lineno <= 1) continue;  // header row
            parse_fail(name, lineno, "not a number: '" + cells[0] + "," + cells[1] + "'");
        } else {
            poly.points.push_back({x, y});
        }
    }
    if (poly.points.empty()) parse_fail(name, lineno, "no points found");
    return poly;
}

Polyline2D load_json_polyline(std::istream& in, const std::string& name) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(name + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array())
        throw ParseError(name + ": expected object with a \"points\" array");
    Polyline2D poly;
    poly.closed = doc.value("closed", false);
    for (const auto& p : doc["points"]) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ParseError(name + ": each point must be [x, y]");
        poly.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (poly.points.empty()) throw ParseError(name + ": no points found");
    return poly;
}

// Reads whitespace-separated tokens, skipping blank lines and '#' comments,
// tracking the current line for error messages.
class TokenReader {
  public:
    TokenReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

    std::string next() {
        while (true) {
            if (pos_ >= tokens_.size()) {
                if (!std::getline(in_, line_)) parse_fail(name_, lineno_, "unexpected end of file");
                ++lineno_;
                std::size_t hash = line_.find('#');
                if (hash != std::string::npos) line_ = line_.substr(0, hash);
                tokens_.clear();
                pos_ = 0;
                std::stringstream ss(line_);
                std::string tok;
                while (ss >> tok) tokens_.push_back(tok);
                continue;
            }
            return tokens_[pos_++];
        }
    }

    double next_number() {
        std::string tok = next();
        double v;
        if (!parse_number(tok, v)) parse_fail(name_, lineno_, "not a number: '" + tok + "'");
        return v;
    }

    long next_int() {
        std::string tok = next();
        const char* begin = tok.c_str();
        char* end = nullptr;
        long v = std::strtol(begin, &end, 10);
        if (end == begin || *end != '\0') parse_fail(name_, lineno_, "not an integer: '" + tok + "'");
        return v;
    }

    std::size_t line() const { return lineno_; }
    const std::string& name() const { return name_; }

  private:
    std::istream& in_;
    std::string name_;
    std::string line_;
    std::vector<std::string> tokens_;
    std::size_t pos_ = 0;
    std::size_t lineno_ = 0;
};

void fan_triangulate(const std::vector<int>& polygon, std::vector<std::array<int, 3>>& faces) {
    for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
        faces.push_back({polygon[0], polygon[i], polygon[i + 1]});
    }
}

TriMesh load_off(std::istream& in, const std::string& name) {
    TokenReader tok(in, name);
    std::string header = tok.next();
    if (header != "OFF") parse_fail(name, tok.line(), "missing OFF header");
    const long nv = tok.next_int();
    const long nf = tok.next_int();
    tok.next_int();  // edge count, unused
    if (nv < 0 || nf < 0) parse_fail(name, tok.line(), "negative counts in OFF header");
    TriMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(nv));
    for (long i = 0; i < nv; ++i) {
        double x = tok.next_number();
        double y = tok.next_number();
        double z = tok.next_number();
        mesh.vertices.push_back({x, y, z});
    }
    for (long f = 0; f < nf; ++f) {
        const long n = tok.next_int();
        if (n < 3) parse_fail(name, tok.line(), "face with fewer than 3 vertices");
        std::vector<int> polygon(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) polygon[static_cast<std::size_t>(i)] = static_cast<int>(tok.next_int());
        fan_triangulate(polygon, mesh.faces);
    }
    return mesh;
}

TriMesh load_obj(std::istream& in, const std::string& name) {
    TriMesh mesh;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::stringstream ss(line);
        std::string kind;
        if (!(ss >> kind)) continue;
        if (kind == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) parse_fail(name, lineno, "bad vertex record");
            mesh.vertices.push_back({x, y, z});
        } else if (kind == "f") {
            std::vector<int> polygon;
            std::string ref;
            while (ss >> ref) {
                // Only the position index matters; vt/vn references are ignored.
                std::size_t slash = ref.find('/');
                if (slash != std::string::npos) ref = ref.substr(0, slash);
                double v;
                if (!parse_number(ref, v) || v != static_cast<long>(v))
                    parse_fail(name, lineno, "bad face index '" + ref + "'");
                long idx = static_cast<long>(v);
                if (idx < 0) idx = static_cast<long>(mesh.vertices.size()) + idx + 1;
                if (idx < 1) parse_fail(name, lineno, "face index out of range");
                polygon.push_back(static_cast<int>(idx - 1));
            }
            if (polygon.size() < 3) parse_fail(name, lineno, "face with fewer than 3 vertices");
            fan_triangulate(polygon, mesh.faces);
        }
        // vn, vt, usemtl, o, g, s... are ignored.
    }
    if (mesh.vertices.empty()) parse_fail(name, lineno, "no vertices found");
    return mesh;
}

}  // namespace

ShapeFormat shape_format_from_string(const std::string& s) {
    if (s == "csv-polyline" || s == "csv") return ShapeFormat::CsvPolyline;
    if (s == "json-polyline" || s == "json") return ShapeFormat::JsonPolyline;
    if (s == "off") return ShapeFormat::Off;
    if (s == "obj") return ShapeFormat::Obj;
    throw ParseError("unknown shape format '" + s + "'");
}

ShapeFormat shape_format_from_path(const std::string& path) {
    std::size_t dot = path.rfind('.');
    if (dot == std::string::npos) throw ParseError("cannot infer format of '" + path + "'");
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return shape_format_from_string(ext);
}

LoadedShape load_shape(std::istream& in, ShapeFormat format, const std::string& name) {
    switch (format) {
        case ShapeFormat::CsvPolyline: {
            Polyline2D poly = load_csv_polyline(in, name);
            validate(poly);
            return poly;
        }
        case ShapeFormat::JsonPolyline: {
            Polyline2D poly = load_json_polyline(in, name);
            validate(poly);
            return poly;
        }
        case ShapeFormat::Off: {
            TriMesh mesh = load_off(in, name);
            validate(mesh);
            return mesh;
        }
        case ShapeFormat::Obj: {
            TriMesh mesh = load_obj(in, name);
            validate(mesh);
            return mesh;
        }
    }
    throw ParseError("unreachable format");
}

LoadedShape load_shape(const std::string& path, ShapeFormat format) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    return load_shape(in, format, path);
}

void save_polyline_csv(const Polyline2D& poly, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "x,y\n";
    for (const auto& p : poly.points)
        out << util::format_double(p[0]) << "," << util::format_double(p[1]) << "\n";
}

void save_polyline_json(const Polyline2D& poly, const std::string& path) {
    json doc;
    doc["closed"] = poly.closed;
    doc["points"] = json::array();
    for (const auto& p : poly.points) doc["points"].push_back({p[0], p[1]});
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << doc.dump(2) << "\n";
}

void save_mesh_off(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "OFF\n" << mesh.vertices.size() << " " << mesh.faces.size() << " 0\n";
    for (const auto& v : mesh.vertices)
        out << util::format_double(v[0]) << " " << util::format_double(v[1]) << " "
            << util::format_double(v[2]) << "\n";
    for (const auto& f : mesh.faces) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
}

void save_mesh_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const auto& v : mesh.vertices)
        out << "v " << util::format_double(v[0]) << " " << util::format_double(v[1]) << " "
            << util::format_double(v[2]) << "\n";
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

}  // namespace currents
