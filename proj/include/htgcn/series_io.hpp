#pragma once

#include <filesystem>
#include <iosfwd>

#include "htgcn/hetero_graph.hpp"

namespace htgcn {

// JSON-lines series file, one snapshot per line:
//   {"t": 1, "node_type_count": 3, "edge_type_count": 3,
//    "nodes": [{"id": 0, "type": 0, "features": [...], "label": 2}, ...],
//    "edges": [{"src": 0, "dst": 5, "etype": 0}, ...]}
// "label" is null for unlabeled nodes. The two count keys are optional on
// read; when absent they are inferred from the largest tags present.
// Doubles are written in shortest round-trip form, so read(write(s)) == s.
void write_series(const TemporalSeries& series, std::ostream& out);
void write_series(const TemporalSeries& series, const std::filesystem::path& path);

// Throws ParseError with the 1-based line number and offending field.
TemporalSeries read_series(std::istream& in);
TemporalSeries read_series(const std::filesystem::path& path);

}  // namespace htgcn
