#pragma once

#include <string>

#include "ringml/table.hpp"

namespace ringml {

/// Parses a line-oriented schema file: `name,kind[,role]` per line with
/// kind in {continuous, categorical} and role in {feature, join-key, id}
/// (default feature). Blank lines and lines starting with '#' are skipped.
Schema load_schema(const std::string& path);

struct CsvOptions {
  /// Remap dictionary codes to lexicographic label order after loading, so
  /// model output does not depend on input row order.
  bool sorted_dictionaries = false;
  /// Reject any missing feature value (used for dimension tables).
  bool require_complete = false;
};

/// Loads an RFC-4180-style CSV (UTF-8, header row required, empty field =
/// missing, '.' decimal separator) against a schema. Categorical labels are
/// dictionary-encoded in first-seen order.
Table load_csv(const std::string& path, const Schema& schema, const CsvOptions& opts = {});

/// Canonical shortest round-trip formatting of a double.
std::string format_double(double v);

/// Writes the table back to CSV with dictionaries applied and canonical
/// float formatting. With emit_mask, writes a sidecar `<path>.mask.csv` of
/// 0/1 flags marking originally-missing cells. With blank_missing, masked
/// cells are written as empty fields instead of their stored values (for
/// tables whose missing cells have not been imputed).
void write_csv(const Table& t, const std::string& path, bool emit_mask = false,
               bool blank_missing = false);

/// In-memory variant of write_csv (used by tests and round-trip checks).
std::string csv_to_string(const Table& t, bool blank_missing = false);

}  // namespace ringml
