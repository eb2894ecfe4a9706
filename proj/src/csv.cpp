#include "ringml/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "ringml/errors.hpp"

namespace ringml {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  return s.substr(i);
}

// One CSV record; handles quoted fields, embedded quotes and newlines.
bool next_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool quoted = false;
  for (;;) {
    if (pos >= text.size()) {
      fields.push_back(std::move(field));
      return true;
    }
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field.push_back('"');
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        break;
      case '\n':
        fields.push_back(std::move(field));
        return true;
      default:
        field.push_back(c);
    }
  }
}

double parse_double(const std::string& field, std::size_t row, const std::string& col) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("row " + std::to_string(row) + ", column '" + col +
                    "': cannot parse '" + field + "' as a number");
  }
  return value;
}

std::int64_t parse_int64(const std::string& field, std::size_t row, const std::string& col) {
  std::int64_t value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("row " + std::to_string(row) + ", column '" + col +
                    "': cannot parse '" + field + "' as an integer key");
  }
  return value;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

void append_field(std::string& out, const std::string& s) {
  if (!needs_quoting(s)) {
    out += s;
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

Schema load_schema(const std::string& path) {
  const std::string text = read_file(path);
  Schema schema;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> parts;
    std::istringstream fields(line);
    std::string part;
    while (std::getline(fields, part, ',')) parts.push_back(trim(part));
    if (parts.size() < 2 || parts.size() > 3) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 'name,kind[,role]'");
    }
    ColumnSpec spec;
    spec.name = parts[0];
    if (parts[1] == "continuous") {
      spec.kind = ColumnKind::kContinuous;
    } else if (parts[1] == "categorical") {
      spec.kind = ColumnKind::kCategorical;
    } else {
      throw DataError(path + ":" + std::to_string(line_no) + ": unknown kind '" + parts[1] +
                      "' (use continuous or categorical)");
    }
    if (parts.size() == 3) {
      if (parts[2] == "feature") {
        spec.role = ColumnRole::kFeature;
      } else if (parts[2] == "join-key") {
        spec.role = ColumnRole::kJoinKey;
      } else if (parts[2] == "id") {
        spec.role = ColumnRole::kId;
      } else {
        throw DataError(path + ":" + std::to_string(line_no) + ": unknown role '" + parts[2] +
                        "' (use feature, join-key, or id)");
      }
    }
    if (schema.index_of(spec.name) >= 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate column '" +
                      spec.name + "'");
    }
    schema.columns.push_back(std::move(spec));
  }
  if (schema.columns.empty()) throw DataError(path + ": schema has no columns");
  return schema;
}

Table load_csv(const std::string& path, const Schema& schema, const CsvOptions& opts) {
  const std::string text = read_file(path);
  std::size_t pos = 0;
  std::vector<std::string> fields;
  if (!next_record(text, pos, fields)) throw DataError(path + ": empty file, header required");
  if (static_cast<int>(fields.size()) != schema.size()) {
    throw DataError(path + ": header has " + std::to_string(fields.size()) +
                    " columns, schema has " + std::to_string(schema.size()));
  }
  for (int c = 0; c < schema.size(); ++c) {
    if (fields[c] != schema.columns[c].name) {
      throw DataError(path + ": header column " + std::to_string(c + 1) + " is '" + fields[c] +
                      "', schema says '" + schema.columns[c].name + "'");
    }
  }

  // Two passes keep the column storage dense: collect rows, then scatter.
  std::vector<std::vector<std::string>> records;
  while (next_record(text, pos, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
    if (static_cast<int>(fields.size()) != schema.size()) {
      throw DataError(path + ": row " + std::to_string(records.size() + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(schema.size()));
    }
    records.push_back(fields);
  }

  Table t;
  t.schema = schema;
  t.rows = static_cast<std::int64_t>(records.size());
  t.init_storage();

  for (int c = 0; c < schema.size(); ++c) {
    const ColumnSpec& spec = schema.columns[c];
    const std::string& name = spec.name;
    switch (spec.role) {
      case ColumnRole::kFeature: {
        if (spec.kind == ColumnKind::kContinuous) {
          for (std::int64_t r = 0; r < t.rows; ++r) {
            const std::string& f = records[r][c];
            if (f.empty()) {
              t.miss[c][r] = 1;
            } else {
              t.cont[c][r] = parse_double(f, r + 1, name);
            }
          }
        } else {
          std::unordered_map<std::string, std::int32_t> lookup;
          for (std::int64_t r = 0; r < t.rows; ++r) {
            const std::string& f = records[r][c];
            if (f.empty()) {
              t.miss[c][r] = 1;
              continue;
            }
            auto [it, inserted] = lookup.try_emplace(f, static_cast<std::int32_t>(t.dict[c].size()));
            if (inserted) t.dict[c].push_back(f);
            t.codes[c][r] = it->second;
          }
        }
        if (opts.require_complete) {
          for (std::int64_t r = 0; r < t.rows; ++r) {
            if (t.miss[c][r]) {
              throw DataError(path + ": row " + std::to_string(r + 1) + ", column '" + name +
                              "': missing value not allowed in this table");
            }
          }
        }
        break;
      }
      case ColumnRole::kJoinKey:
        for (std::int64_t r = 0; r < t.rows; ++r) {
          const std::string& f = records[r][c];
          if (f.empty()) {
            throw DataError(path + ": row " + std::to_string(r + 1) + ", column '" + name +
                            "': join-key values must not be missing");
          }
          t.keys[c][r] = parse_int64(f, r + 1, name);
        }
        break;
      case ColumnRole::kId:
        for (std::int64_t r = 0; r < t.rows; ++r) t.ids[c][r] = records[r][c];
        break;
    }
  }

  if (opts.sorted_dictionaries) {
    for (int c = 0; c < schema.size(); ++c) {
      if (schema.columns[c].role != ColumnRole::kFeature ||
          schema.columns[c].kind != ColumnKind::kCategorical || t.dict[c].empty()) {
        continue;
      }
      std::vector<std::int32_t> order(t.dict[c].size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        return t.dict[c][a] < t.dict[c][b];
      });
      std::vector<std::int32_t> remap(order.size());
      std::vector<std::string> sorted(order.size());
      for (std::size_t rank = 0; rank < order.size(); ++rank) {
        remap[order[rank]] = static_cast<std::int32_t>(rank);
        sorted[rank] = t.dict[c][order[rank]];
      }
      t.dict[c] = std::move(sorted);
      for (auto& code : t.codes[c]) code = remap[code];
    }
  }
  return t;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_to_string(const Table& t, bool blank_missing) {
  std::string out;
  for (int c = 0; c < t.schema.size(); ++c) {
    if (c) out.push_back(',');
    append_field(out, t.schema.columns[c].name);
  }
  out.push_back('\n');
  for (std::int64_t r = 0; r < t.rows; ++r) {
    for (int c = 0; c < t.schema.size(); ++c) {
      if (c) out.push_back(',');
      const ColumnSpec& spec = t.schema.columns[c];
      switch (spec.role) {
        case ColumnRole::kFeature:
          if (blank_missing && t.miss[c][r]) {
            break;
          }
          if (spec.kind == ColumnKind::kContinuous) {
            out += format_double(t.cont[c][r]);
          } else {
            append_field(out, t.dict[c][t.codes[c][r]]);
          }
          break;
        case ColumnRole::kJoinKey:
          out += std::to_string(t.keys[c][r]);
          break;
        case ColumnRole::kId:
          append_field(out, t.ids[c][r]);
          break;
      }
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Table& t, const std::string& path, bool emit_mask, bool blank_missing) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << csv_to_string(t, blank_missing);
    if (!out) throw DataError("write failed: " + path);
  }
  if (!emit_mask) return;
  std::ofstream out(path + ".mask.csv", std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path + ".mask.csv");
  for (int c = 0; c < t.schema.size(); ++c) {
    out << (c ? "," : "") << t.schema.columns[c].name;
  }
  out << '\n';
  for (std::int64_t r = 0; r < t.rows; ++r) {
    for (int c = 0; c < t.schema.size(); ++c) {
      if (c) out << ',';
      const bool feature = t.schema.columns[c].role == ColumnRole::kFeature;
      out << (feature && t.miss[c][r] ? '1' : '0');
    }
    out << '\n';
  }
}

}  // namespace ringml
