#include "bdbc/csv.hpp"

#include "bdbc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>

namespace bdbc {

std::vector<CsvRow> read_csv(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.starts_with("\xEF\xBB\xBF")) {
    text.erase(0, 3);
  }
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_row = [&] {
    if (field_started || !row.empty()) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') {
          ++line;
        }
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
    case '"':
      if (!field.empty()) {
        throw InputError("CSV line " + std::to_string(line) + ": stray quote inside field");
      }
      quoted = true;
      field_started = true;
      break;
    case ',':
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
      break;
    case '\r':
      if (i + 1 < text.size() && text[i + 1] == '\n') {
        break;
      }
      [[fallthrough]];
    case '\n':
      end_row();
      ++line;
      break;
    default:
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) {
    throw InputError("CSV: unterminated quoted field");
  }
  end_row();
  return rows;
}

std::vector<CsvRow> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open '" + path + "'");
  }
  return read_csv(in);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out.push_back('"');
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const CsvRow& row) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j > 0) {
      out << ',';
    }
    out << csv_escape(row[j]);
  }
  out << '\n';
}

std::string format_double(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

} // namespace bdbc
