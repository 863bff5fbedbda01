#pragma once

#include "hjpoisson/genfunc_net.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace hjpoisson {

inline constexpr int kWeightFormatVersion = 1;

/// JSON weight document; reals written with shortest round-trip precision.
std::string weights_to_string(const GeneratingFunctionNet& net);

/// Throws FormatError (malformed / missing fields) or DimensionError (shape mismatch).
GeneratingFunctionNet weights_from_string(std::string_view text);

/// Throws std::runtime_error on I/O failure.
void save_weights(const GeneratingFunctionNet& net, const std::filesystem::path& path);
GeneratingFunctionNet load_weights(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace hjpoisson
