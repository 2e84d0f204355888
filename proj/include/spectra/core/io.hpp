#pragma once

#include <cstdint>
#include <string>

#include "spectra/core/model.hpp"

namespace spectra {

using Json = nlohmann::ordered_json;

/// Serializes with every floating-point value printed as %.16e (17
/// significant digits). Objects are indented one key per line; arrays of
/// scalars stay on one line. Output is byte-stable for equal input.
std::string dump_json(const Json& j);

Json vector_json(const Vector& v);
Json matrix_json(const Matrix& m);  // array of rows
Vector json_vector(const Json& j);
Matrix json_matrix(const Json& j);

Json instance_to_json(const BapInstance& inst);
/// Throws Parse on malformed structure and DimensionMismatch on inconsistent sizes.
BapInstance instance_from_json(const Json& j);

std::string instance_to_string(const BapInstance& inst);
BapInstance instance_from_string(const std::string& text);

BapInstance load_instance(const std::string& path);
void save_instance(const BapInstance& inst, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

const char* library_version() noexcept;

}  // namespace spectra
