#pragma once

// Atomic file output and binary snapshots of field histories.
//
// Snapshot layout: one line of JSON (lattice descriptor, generator orders,
// shape), a newline, then rows * cols * dim little-endian float64 values,
// time outermost and Weil coefficient innermost.

#include <filesystem>
#include <string>
#include <string_view>

#include "weilfield/dynamics.hpp"

namespace weilfield {

/// Write to a temporary file in the same directory and rename over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

/// %.16e formatting (17 significant digits, round-trips float64).
std::string format_double(double v);

std::string encode_history(const FieldHistory& h);
FieldHistory decode_history(std::string_view bytes);

void write_history(const std::filesystem::path& path, const FieldHistory& h);
FieldHistory read_history(const std::filesystem::path& path);

}  // namespace weilfield
