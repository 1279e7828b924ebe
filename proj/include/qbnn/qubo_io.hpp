#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qbnn/qubo.hpp"

namespace qbnn {

struct NamedQubo {
  Qubo qubo;
  std::vector<std::string> var_names;  // empty when the source carried none
};

// Canonical JSON:
//   {"num_vars": N, "offset": c, "terms": [[i, j, coeff], ...], "var_names": [...]}
// terms sorted lexicographically with i <= j; var_names optional.
nlohmann::json qubo_to_json(const Qubo& q, std::span<const std::string> var_names = {});
NamedQubo qubo_from_json(const nlohmann::json& j);

std::string serialize_qubo(const Qubo& q, std::span<const std::string> var_names = {});
NamedQubo parse_qubo_json(std::string_view text);

// Plain-text coordinate format:
//   qubo <N> <num_terms> <offset>
//   i j coeff        (one per term, '#' starts a comment)
std::string serialize_qubo_text(const Qubo& q);
Qubo parse_qubo_text(std::string_view text);

/// Dispatches on the first non-blank character: '{' means JSON, anything else text.
NamedQubo parse_qubo_any(std::string_view text);

}  // namespace qbnn
