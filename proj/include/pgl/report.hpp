#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pgl/decomposition.hpp"
#include "pgl/detection.hpp"
#include "pgl/extremal.hpp"

namespace pgl::report {

using Json = nlohmann::json;  // std::map-backed, so keys serialize sorted

/// Exit codes shared by every command.
enum class Status : int { ok = 0, fail = 2, budget = 3, input = 4 };

/// One command run. Only `command`, `inputs`, `results` and `provenance` are
/// serialized; wall time and search statistics go to the log so that equal
/// inputs give byte-identical documents.
struct Report {
    std::string command;
    Json inputs = Json::object();
    Json results = Json::object();
    Json provenance = Json::object();
    Status status = Status::ok;
    double wall_seconds = 0;
    std::uint64_t nodes = 0;
};

/// Two-space indented JSON with sorted keys and a trailing LF.
std::string to_json(const Report& report);
/// The report's table (`results.rows`, or the scalar results as one row) as
/// CSV: sorted header, nested values as compact JSON.
std::string to_csv(const Report& report);

std::string fnv1a_hex(std::string_view bytes);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

// ---- parsing and serialization --------------------------------------------

/// "2,3,4" -> [2] x [3] x [4]. Throws InputError on malformed text.
GridShape parse_shape(std::string_view text);
std::string shape_text(const GridShape& shape);

/// {"elements": [labels], "relations": [[a, b], ...]} with a < b by label.
Poset poset_from_json(const Json& doc);
Json poset_to_json(const Poset& poset);

Json point_to_json(const Point& x);
Point point_from_json(const Json& doc);

/// {"shape": [sides], "points": [[coords], ...]}.
Family family_from_json(const Json& doc);
Json family_to_json(const Family& family);

/// Binary family: magic "PGLFAM01", u64 n, n u64 sides, the bitset words
/// (u64, little-endian) of the mixed-radix membership vector.
std::string family_to_binary(const Family& family);
Family family_from_binary(std::string_view bytes);
/// Sniffs JSON ('{' first) versus binary.
Family load_family(const std::string& path);

Json partition_to_json(const ChainPartition& partition);
Json partition_to_json(const GridPartition& partition);

/// {"mode": ..., "image": {label: point}}.
Json embedding_to_json(const Poset& poset, const Embedding& embedding);
Json extremal_to_json(const ExtremalResult& result);
/// Appends one compact JSON line per result.
void append_archive(const std::string& path, const ExtremalResult& result);

// ---- commands ---------------------------------------------------------------

struct CommonOptions {
    std::uint64_t budget = 50'000'000;
};

Report cmd_width(const GridShape& shape);

enum class PartitionMode { chains, grids };
/// `partition_out` receives the partition document when set.
Report cmd_partition(const GridShape& shape, PartitionMode mode, int d, const CommonOptions& options,
                     Json* partition_out = nullptr);

/// Structure to search for in `extremal` and `detect`.
struct StructureSpec {
    enum class Kind { poset, boolean_algebra, join } kind = Kind::poset;
    Poset poset;
    std::string poset_name = "P";
    std::string poset_hash;
    CopyMode mode = CopyMode::weak;
    int d = 1;
};

Report cmd_extremal(const GridShape& shape, const StructureSpec& spec, const CommonOptions& options,
                    std::optional<std::string> archive = std::nullopt);

/// Suite: {"checks": [{"check": id, params: [values] or value, "goldens":
/// [{params..., "value": v}]}]}. Every parameter combination is one row.
Report cmd_verify_bounds(const Json& suite, const std::string& suite_hash, const CommonOptions& options);

Report cmd_detect(const Family& family, const std::string& family_hash, const StructureSpec& spec,
                  const CommonOptions& options);

/// Check ids understood by verify-bounds.
std::vector<std::string> known_checks();

}  // namespace pgl::report
