#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "currents/geometry.hpp"

namespace currents {

enum class ShapeFormat { CsvPolyline, JsonPolyline, Off, Obj };

/// Parses "csv-polyline" | "json-polyline" | "off" | "obj".
ShapeFormat shape_format_from_string(const std::string& s);

/// Guesses the format from a file extension; throws ParseError if unknown.
ShapeFormat shape_format_from_path(const std::string& path);

using LoadedShape = std::variant<Polyline2D, TriMesh>;

/// Loads and validates one shape. Polygonal OFF/OBJ faces are triangulated
/// fan-wise from the first vertex; vertex order is preserved. Parse errors
/// carry the file path and line number.
LoadedShape load_shape(const std::string& path, ShapeFormat format);
LoadedShape load_shape(std::istream& in, ShapeFormat format, const std::string& name);

/// Writers for the same formats (used when exporting generated datasets).
void save_polyline_csv(const Polyline2D& poly, const std::string& path);
void save_polyline_json(const Polyline2D& poly, const std::string& path);
void save_mesh_off(const TriMesh& mesh, const std::string& path);
void save_mesh_obj(const TriMesh& mesh, const std::string& path);

}  // namespace currents
