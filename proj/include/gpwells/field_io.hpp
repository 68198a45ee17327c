#pragma once

#include <string>

#include "gpwells/field.hpp"

namespace gpwells {

/// Binary field file: "GPF1", u32 n, f64 L, then n*n f64 row-major, all
/// little-endian. The stencil is not stored; loads use `stencil`.
void save_field(const std::string& path, const FieldD& u);
FieldD load_field(const std::string& path, Stencil stencil = Stencil::fourth_order);

std::string encode_field(const FieldD& u);
FieldD decode_field(const std::string& bytes, Stencil stencil = Stencil::fourth_order);

}  // namespace gpwells
