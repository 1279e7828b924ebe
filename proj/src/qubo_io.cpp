#include "qbnn/qubo_io.hpp"

#include <charconv>
#include <cstdint>
#include <sstream>

namespace qbnn {

using nlohmann::json;

json qubo_to_json(const Qubo& q, std::span<const std::string> var_names) {
  if (!var_names.empty() && var_names.size() != q.num_vars()) {
    throw DimensionError("var_names has " + std::to_string(var_names.size()) + " entries for " +
                         std::to_string(q.num_vars()) + " variables");
  }
  json terms = json::array();
  q.for_each_term([&](std::size_t i, std::size_t j, std::int64_t c) { terms.push_back({i, j, c}); });
  json out = {{"num_vars", q.num_vars()}, {"offset", q.offset()}, {"terms", std::move(terms)}};
  if (!var_names.empty()) out["var_names"] = std::vector<std::string>(var_names.begin(), var_names.end());
  return out;
}

namespace {

std::int64_t require_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<std::int64_t>();
}

}  // namespace

NamedQubo qubo_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("qubo: expected a JSON object");
  if (!j.contains("num_vars")) throw ParseError("qubo: missing field 'num_vars'");
  const std::int64_t n = require_int(j.at("num_vars"), "num_vars");
  if (n < 0) throw ParseError("num_vars: must be non-negative");
  const std::int64_t offset = j.contains("offset") ? require_int(j.at("offset"), "offset") : 0;

  NamedQubo out{Qubo(static_cast<std::size_t>(n), offset), {}};
  if (j.contains("terms")) {
    const json& terms = j.at("terms");
    if (!terms.is_array()) throw ParseError("terms: expected an array");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string where = "terms[" + std::to_string(t) + "]";
      const json& e = terms[t];
      if (!e.is_array() || e.size() != 3) throw ParseError(where + ": expected [i, j, coeff]");
      const std::int64_t a = require_int(e[0], where + "[0]");
      const std::int64_t b = require_int(e[1], where + "[1]");
      const std::int64_t c = require_int(e[2], where + "[2]");
      if (a < 0 || b < 0 || a >= n || b >= n) {
        throw ParseError(where + ": index out of range for num_vars " + std::to_string(n));
      }
      out.qubo.add_term(static_cast<std::size_t>(a), static_cast<std::size_t>(b), c);
    }
  }
  if (j.contains("var_names")) {
    const json& names = j.at("var_names");
    if (!names.is_array()) throw ParseError("var_names: expected an array");
    if (names.size() != static_cast<std::size_t>(n)) {
      throw ParseError("var_names: " + std::to_string(names.size()) + " entries for num_vars " + std::to_string(n));
    }
    for (std::size_t t = 0; t < names.size(); ++t) {
      if (!names[t].is_string()) throw ParseError("var_names[" + std::to_string(t) + "]: expected a string");
      out.var_names.push_back(names[t].get<std::string>());
    }
  }
  return out;
}

std::string serialize_qubo(const Qubo& q, std::span<const std::string> var_names) {
  return qubo_to_json(q, var_names).dump() + "\n";
}

NamedQubo parse_qubo_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return qubo_from_json(j);
}

std::string serialize_qubo_text(const Qubo& q) {
  std::ostringstream os;
  os << "qubo " << q.num_vars() << ' ' << q.num_terms() << ' ' << q.offset() << '\n';
  q.for_each_term([&](std::size_t i, std::size_t j, std::int64_t c) { os << i << ' ' << j << ' ' << c << '\n'; });
  return os.str();
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (p < line.size()) {
    while (p < line.size() && (line[p] == ' ' || line[p] == '\t' || line[p] == '\r')) ++p;
    const std::size_t start = p;
    while (p < line.size() && line[p] != ' ' && line[p] != '\t' && line[p] != '\r') ++p;
    if (p > start) out.push_back(line.substr(start, p - start));
  }
  return out;
}

std::int64_t to_int(std::string_view s, const char* field, std::size_t line) {
  std::int64_t v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(std::string(field) + ": '" + std::string(s) + "' is not an integer", line);
  }
  return v;
}

}  // namespace

Qubo parse_qubo_text(std::string_view text) {
  std::size_t line_no = 0;
  bool have_header = false;
  std::int64_t n = 0, declared_terms = 0, seen_terms = 0;
  Qubo q;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto fields = split_fields(line);
    if (fields.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!have_header) {
      if (fields.size() != 4 || fields[0] != "qubo") {
        throw ParseError("expected header 'qubo <num_vars> <num_terms> <offset>'", line_no);
      }
      n = to_int(fields[1], "num_vars", line_no);
      declared_terms = to_int(fields[2], "num_terms", line_no);
      if (n < 0 || declared_terms < 0) throw ParseError("header counts must be non-negative", line_no);
      q = Qubo(static_cast<std::size_t>(n), to_int(fields[3], "offset", line_no));
      have_header = true;
    } else {
      if (fields.size() != 3) throw ParseError("expected 'i j coeff'", line_no);
      const std::int64_t i = to_int(fields[0], "i", line_no);
      const std::int64_t j = to_int(fields[1], "j", line_no);
      const std::int64_t c = to_int(fields[2], "coeff", line_no);
      if (i < 0 || j < 0 || i >= n || j >= n) {
        throw ParseError("index out of range for num_vars " + std::to_string(n), line_no);
      }
      q.add_term(static_cast<std::size_t>(i), static_cast<std::size_t>(j), c);
      ++seen_terms;
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError("missing 'qubo' header line", line_no);
  if (seen_terms != declared_terms) {
    throw ParseError("header declares " + std::to_string(declared_terms) + " terms, found " +
                         std::to_string(seen_terms),
                     line_no);
  }
  return q;
}

NamedQubo parse_qubo_any(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_qubo_json(text);
  return {parse_qubo_text(text), {}};
}

}  // namespace qbnn
