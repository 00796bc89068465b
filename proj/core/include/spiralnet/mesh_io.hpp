#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "spiralnet/mesh.hpp"

namespace spiralnet {

enum class MeshFormat { obj, ply_ascii, ply_binary_le };

/// Guess from the extension (.obj / .ply); PLY encoding is read from the
/// header, so both PLY variants map to ply_ascii here and are refined on load.
MeshFormat guess_mesh_format(const std::filesystem::path& path);
std::optional<MeshFormat> parse_mesh_format(std::string_view name);

/// Reads positions and triangles without topology checks. Vertex order is
/// the file order.
/// OBJ: `v x y z` and `f i j k` lines, 1-based or negative indices, texture
/// and normal slots ignored. PLY: ascii or binary_little_endian, vertex
/// element with x/y/z, face element with a `vertex_indices` list.
/// Throws IoError/ParseError for unreadable or malformed files and
/// ValidationError for non-triangle faces or out-of-range indices.
TriangleSoup load_triangles(const std::filesystem::path& path,
                            std::optional<MeshFormat> format = std::nullopt);

/// load_triangles followed by HalfEdgeMesh::build.
HalfEdgeMesh load_mesh(const std::filesystem::path& path,
                       std::optional<MeshFormat> format = std::nullopt);

void save_obj(const TriangleSoup& soup, const std::filesystem::path& path);
void save_ply(const TriangleSoup& soup, const std::filesystem::path& path, bool binary);

}  // namespace spiralnet
