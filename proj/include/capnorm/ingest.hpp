#pragma once

#include "capnorm/tower.hpp"

#include <string>
#include <vector>

namespace capnorm {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseResult {
    TowerData tower;
    std::vector<std::string> warnings;
};

// Parses the transcript text printed by the class-group CAS scripts: header
// key=value tokens, per-layer "CKn=[...]" (optionally "=[p-part]") structure
// lines, "h_j^[(S-1)^i]=[...]" action rows, "norm in Kn/K of the component j
// of CKn:[...]" norm lines, and free-text verdict lines.  Interleaved prose
// is skipped.  Modules are rebuilt from the i=1 action rows; a layer that
// prints i=1 rows for some but not all nontrivial generators is rejected
// (sigma would be underdetermined).  Layers with no action rows at all are
// kept as order-only records.
ParseResult parse_transcript(const std::string& text);

// Canonical tower format (versioned, line-oriented; grammar in README).
ParseResult parse_canonical(const std::string& text);
std::string to_canonical(const TowerData& tower);

// Sniffs the canonical header, else falls back to the transcript grammar.
ParseResult parse_tower_auto(const std::string& text);

ParseResult parse_tower_file(const std::string& path);

} // namespace capnorm
