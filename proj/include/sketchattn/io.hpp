#pragma once
// Plain-text matrix files and CSV report emission.
//
// Matrix files hold comma-separated doubles, one row per line. '#' starts a
// comment that runs to the end of the line; save_matrix writes a leading
// "# rows cols" comment, and load_matrix cross-checks that header against
// the parsed shape when present. Values are printed with %.17g, which
// round-trips doubles exactly.
//
// CSV output is sorted by every column before writing, so emitting the same
// reports twice produces byte-identical files regardless of the order the
// cells were computed in.

#include <iosfwd>
#include <span>
#include <string>

#include "sketchattn/evalbench.hpp"
#include "sketchattn/matrix.hpp"

namespace sketchattn {

/// Shortest decimal form that parses back to the same double.
std::string format_g17(double v);

/// Column header shared by every emitted CSV.
extern const char* const kCsvHeader;

/// Throws ParseError naming the offending line on malformed input.
DenseMatrix load_matrix(const std::string& path);

void save_matrix(const std::string& path, const DenseMatrix& m);

void emit_csv(std::ostream& out, std::span<const ApproxReport> reports);
void emit_csv(const std::string& path, std::span<const ApproxReport> reports);

}  // namespace sketchattn
