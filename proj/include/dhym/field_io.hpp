#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dhym/torus.hpp"

namespace dhym {

/// Binary field files, little-endian:
///   "DHYM" | u32 version = 1 | u8 kind (0 scalar, 1 hermitian form) | u8 n | u32 N | payload
/// Scalar payload is N^{2n} float64; form payload is n^2 complex128 per point,
/// (re, im) interleaved, row-major in (i, j).
using FieldVariant = std::variant<ScalarField, HermitianFormField>;

std::vector<std::uint8_t> encode_field(const ScalarField& f);
std::vector<std::uint8_t> encode_field(const HermitianFormField& f);
/// Throws Io on a malformed buffer.
FieldVariant decode_field(const std::vector<std::uint8_t>& bytes);

void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const HermitianFormField& f);
FieldVariant read_field(const std::string& path);
ScalarField read_scalar_field(const std::string& path);
HermitianFormField read_form_field(const std::string& path);

} // namespace dhym
