#pragma once

#include "fracfv/mesh.hpp"

#include <iosfwd>
#include <string>

namespace fracfv {

/// Text mesh document, version 1. Tokens are whitespace separated and '#'
/// starts a comment running to the end of the line.
///
///   fracfv-mesh 1
///   ambient_dim <N>
///   subdomains <S>
///   subdomain <dim> <name>             (repeated S times)
///     nodes <n>      then n lines "x y z"
///     cells <c>      then c lines "aperture k n_1 ... n_k"
///     faces derived  | faces <F> then F lines "owner neighbour kind k n_1 ... n_k"
///   interfaces <I>
///   interface <higher> <lower> <P>    (repeated I times)
///     then P lines "face cell"
///
/// In derived mode cells must be simplices; face j of a cell omits its j-th
/// node and faces are numbered by first appearance. An interface pair naming
/// a face shared by two cells splits it into one face per side, both paired
/// with the lower cell. Unpaired single-cell faces become domain boundary
/// faces when they lie on the bounding box of the highest-dimensional
/// subdomain and tips otherwise. Explicit faces use the kinds interior,
/// boundary, interface and tip, with neighbour -1 for single-cell faces, and
/// admit axis-aligned box cells.
MixedDimensionalMesh read_mesh(std::istream& in);
MixedDimensionalMesh import_conforming_mesh(const std::string& path);

/// Writes explicit faces with 17 significant digits.
void write_mesh(const MixedDimensionalMesh& mesh, std::ostream& out);
void export_mesh(const MixedDimensionalMesh& mesh, const std::string& path);

}  // namespace fracfv
