#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "anreach/agent_network.hpp"

namespace anreach {

/// [{"coeff": c, "vars": {"name": exponent}}, ...]
nlohmann::json polynomial_to_json(const Polynomial& p, const SymbolTable& symbols);
Polynomial polynomial_from_json(const nlohmann::json& j, const SymbolTable& symbols);

/// {"const": c, "terms": {"name": a}}
nlohmann::json affine_to_json(const AffineForm& a, const SymbolTable& symbols);
AffineForm affine_from_json(const nlohmann::json& j, const SymbolTable& symbols);

/// Model schema:
/// {"states": [...], "params": {name: {"nominal": real | [[t,v],...], "bound": real}},
///  "reactions": [{"transitions": [[from,to],...], "rate": {"poly": [...], "denom": {...}}}],
///  "init": {state: real}, "horizon": real}
/// Unknown keys are rejected with ParseError; undeclared names with UnknownSymbol.
AgentNetwork model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const AgentNetwork& an);

/// Reads and parses a model file; JSON syntax errors carry the byte offset.
AgentNetwork load_model(const std::filesystem::path& path);
AgentNetwork parse_model(const std::string& text);

}  // namespace anreach
