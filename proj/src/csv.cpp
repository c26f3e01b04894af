#include "larch/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "larch/errors.hpp"

namespace larch::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

Writer::Writer(const std::filesystem::path& path) : path_(path), out_(path) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  out_.precision(17);
}

void Writer::comment(std::string_view text) { out_ << "# " << text << '\n'; }

void Writer::comment(const std::vector<std::pair<std::string, std::string>>& fields) {
  out_ << '#';
  for (const auto& [k, v] : fields) out_ << ' ' << k << '=' << v;
  out_ << '\n';
}

void Writer::header(std::initializer_list<std::string_view> names) {
  bool first = true;
  for (const auto name : names) {
    if (!first) out_ << ',';
    out_ << name;
    first = false;
  }
  out_ << '\n';
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
  if (!out_) throw Error("write to " + path_.string() + " failed");
}

std::vector<double> load_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IncompleteInputError("cannot open " + path.string());

  std::vector<double> x;
  std::string line;
  std::size_t row = 0;
  std::size_t column = 0;  // 0 until the layout is known
  bool layout_known = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::vector<std::string> fields = split(t);
    if (!layout_known) {
      layout_known = true;
      double probe = 0.0;
      if (!parse_double(trim(fields.front()), probe)) {
        bool found = false;
        for (std::size_t i = 0; i < fields.size(); ++i)
          if (trim(fields[i]) == "x") {
            column = i;
            found = true;
          }
        if (fields.size() == 1 && !found)
          throw ParseError(path.string() + ": row " + std::to_string(row) + ", column 1: '" + fields.front() +
                               "' is not a number",
                           row, 1);
        if (!found) throw ParseError(path.string() + ": header has no column named x", row, 1);
        continue;
      }
    }
    if (column >= fields.size())
      throw ParseError(path.string() + ": row " + std::to_string(row) + " has no column " +
                           std::to_string(column + 1),
                       row, column + 1);
    const std::string cell = trim(fields[column]);
    double v = 0.0;
    if (!parse_double(cell, v))
      throw ParseError(path.string() + ": row " + std::to_string(row) + ", column " + std::to_string(column + 1) +
                           ": '" + cell + "' is not a number",
                       row, column + 1);
    if (!std::isfinite(v))
      throw ParseError(path.string() + ": row " + std::to_string(row) + ", column " + std::to_string(column + 1) +
                           ": non-finite value",
                       row, column + 1);
    x.push_back(v);
  }
  if (x.empty()) throw IncompleteInputError(path.string() + " contains no observations");
  return x;
}

}  // namespace larch::csv
