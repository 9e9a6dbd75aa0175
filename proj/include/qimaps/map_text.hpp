#pragma once

// Canonical text form of map expressions: nested constructor calls with
// numeric arguments, numbers printed with 17 significant digits, no
// whitespace. The grammar is documented in docs/map_format.md.
// parse(to_text(m)) reproduces m exactly, and to_text is a fixed point.

#include <string>
#include <string_view>

#include "qimaps/maps.hpp"

namespace qimaps {

std::string to_text(const MapExpr& m);
std::string to_text(const SphereMap& s);
std::string to_text(const DiskMap& d);
std::string to_text(const SpiralProfile& p);
std::string to_text(const PLMap& f);

/// Whitespace between tokens is ignored. Throws parse_error with the offset of
/// the first bad token; constructor errors propagate with their own codes.
MapExpr parse_map(std::string_view text);
SphereMap parse_sphere_map(std::string_view text);
DiskMap parse_disk_map(std::string_view text);

}  // namespace qimaps
