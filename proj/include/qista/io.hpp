#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "qista/types.hpp"

namespace qista {

/// Writes through a sibling temporary file and renames it over `path` only
/// after `body` returns and the stream is flushed, so a failure never leaves
/// a partial file behind. I/O failures throw std::runtime_error naming the path.
void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

/// "%.17g"; round-trips every finite double.
std::string format_double(double v);

/// Parses a full token as a double; nullopt on trailing garbage or overflow.
std::optional<double> parse_double(std::string_view token);

/// Plain-text instance format:
///
///   m n k noise_snr_db seed      header; noise_snr_db is a number or `none`
///   a_11 ... a_1n                m rows of the sensing matrix
///   ...
///   y_1 ... y_m
///   x0_1 ... x0_n                or the single token `none`
///
/// Values are space-separated decimals with 17 significant digits.
void write_instance(std::ostream& os, const ProblemInstance<double>& inst);
void save_instance(const std::filesystem::path& path, const ProblemInstance<double>& inst);

/// Throws FormatError (with 1-based line number) on malformed input.
ProblemInstance<double> read_instance(std::istream& is);
ProblemInstance<double> load_instance(const std::filesystem::path& path);

}  // namespace qista
