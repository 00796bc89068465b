#pragma once

#include <cstddef>

#include "spiralnet/mesh.hpp"

namespace spiralnet {

// Closed convex primitives are wound counter-clockwise seen from outside.

/// Regular tetrahedron with vertices (1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1).
TriangleSoup make_tetrahedron();

/// Regular icosahedron (12 vertices, 20 faces), circumradius 1.
TriangleSoup make_icosahedron();

/// Icosahedron subdivided `levels` times with vertices projected onto the
/// unit sphere.
TriangleSoup make_icosphere(std::size_t levels);

/// rows x cols vertex lattice in the z=0 plane, vertex (i, j) at
/// (j*spacing, i*spacing, 0) with id i*cols + j. Each cell is split along
/// the same diagonal so interior vertices have valence 6. Normal is +z.
TriangleSoup make_grid(std::size_t rows, std::size_t cols, double spacing = 1.0);

/// Two-row grid: every vertex is a boundary vertex.
TriangleSoup make_strip(std::size_t length);

/// A single triangle (0,0,0), (1,0,0), (0,1,0).
TriangleSoup make_triangle();

}  // namespace spiralnet
