#pragma once

#include "isoflow/field.hpp"

#include <iosfwd>
#include <string>

namespace isoflow {

/// Text format:
///   plvf 1
///   verts N      then N lines "x y vx vy"
///   tris M       then M lines "i j k" (0-based)
PLVectorField read_field(std::istream& in);
PLVectorField load_field(const std::string& path);

void write_field(std::ostream& out, const PLVectorField& field);
void save_field(const std::string& path, const PLVectorField& field);

}  // namespace isoflow
