#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "efs/dataset.hpp"

namespace efs {

// Comma-separated text with a header row. Fields may be double-quoted; an
// empty field is a missing cell. The metadata sidecar is YAML:
//
//   target: os_months
//   censored: censored
//   features:
//     age: {kind: numeric, block: p}
//     who_ps: {kind: ordinal, block: p, levels: ["0", "1", "2", "3"]}
//
// Throws Error{FileNotFound | SchemaMismatch | InvalidLevel}.
Dataset load_dataset(const std::filesystem::path& data_path, const std::filesystem::path& meta_path);
void save_dataset(const Dataset& ds, const std::filesystem::path& data_path, const std::filesystem::path& meta_path);

namespace csv {

using Row = std::vector<std::string>;

std::vector<Row> parse(std::istream& in);
std::vector<Row> read_file(const std::filesystem::path& path);

// Quotes a field only when it contains a delimiter, quote or newline.
std::string escape(const std::string& field);
void write_row(std::ostream& out, const Row& row);

} // namespace csv

// Shortest round-trip decimal representation.
std::string format_double(double v);

} // namespace efs
