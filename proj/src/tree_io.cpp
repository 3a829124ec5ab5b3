#include <fmt/format.h>

#include <json.hpp>

#include "uplift/tree.hpp"

namespace uplift {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

ordered_json variable_to_json(const VariableSpec& v) {
  return ordered_json{{"name", v.name}, {"values", v.values}};
}

ordered_json node_to_json(const Node& node, const Schema& schema) {
  if (node.is_leaf()) {
    const auto& c = node.counts;
    return ordered_json{{"counts",
                         {{"s1m1", c.mailed.yes},
                          {"s0m1", c.mailed.no},
                          {"s1m0", c.not_mailed.yes},
                          {"s0m0", c.not_mailed.no}}}};
  }
  const auto& rule = *node.rule;
  const auto& spec = rule.variable.spec(schema);
  ordered_json split{{"variable", spec.name},
                     {"kind", rule.kind == SplitKind::kBinary ? "binary" : "complete"}};
  if (rule.kind == SplitKind::kBinary) split["value"] = spec.values[rule.value];
  ordered_json children = ordered_json::array();
  for (const auto& child : node.children) children.push_back(node_to_json(child, schema));
  return ordered_json{{"split", std::move(split)}, {"children", std::move(children)}};
}

VariableSpec variable_from_json(const json& j) {
  return VariableSpec{j.at("name").get<std::string>(),
                      j.at("values").get<std::vector<std::string>>()};
}

Schema schema_from_json(const json& j) {
  std::vector<VariableSpec> predictors;
  for (const auto& p : j.at("predictors")) predictors.push_back(variable_from_json(p));
  return Schema(std::move(predictors), variable_from_json(j.at("treatment")),
                variable_from_json(j.at("outcome")));
}

Node node_from_json(const json& j, const Schema& schema) {
  if (!j.is_object()) throw Error("tree node is not an object");
  if (j.contains("counts")) {
    const auto& c = j.at("counts");
    CrossTab counts;
    counts.mailed.yes = c.at("s1m1").get<std::uint64_t>();
    counts.mailed.no = c.at("s0m1").get<std::uint64_t>();
    counts.not_mailed.yes = c.at("s1m0").get<std::uint64_t>();
    counts.not_mailed.no = c.at("s0m0").get<std::uint64_t>();
    return Node::leaf(counts);
  }
  if (!j.contains("split")) throw Error("unknown node kind");
  const auto& s = j.at("split");
  const auto name = s.at("variable").get<std::string>();
  VariableRef var = VariableRef::treatment();
  if (name != schema.treatment().name) {
    const auto idx = schema.find_predictor(name);
    if (!idx) throw Error(fmt::format("split on unknown variable '{}'", name));
    var = VariableRef::predictor(*idx);
  }
  const auto kind = s.at("kind").get<std::string>();
  SplitRule rule;
  if (kind == "complete") {
    rule = SplitRule::complete(var);
  } else if (kind == "binary") {
    const auto label = s.at("value").get<std::string>();
    const auto v = var.spec(schema).find(label);
    if (!v) throw Error(fmt::format("split value '{}' not in '{}'", label, name));
    rule = SplitRule::binary(var, *v);
  } else {
    throw Error(fmt::format("unknown split kind '{}'", kind));
  }
  std::vector<Node> children;
  for (const auto& child : j.at("children")) children.push_back(node_from_json(child, schema));
  return Node::split(rule, std::move(children));
}

}  // namespace

std::string serialize(const Tree& tree, const std::map<std::string, std::string>& metadata) {
  const auto& schema = tree.schema();
  ordered_json predictors = ordered_json::array();
  for (const auto& p : schema.predictors()) predictors.push_back(variable_to_json(p));
  ordered_json doc{
      {"format_version", kFormatVersion},
      {"schema_fingerprint", schema.fingerprint()},
      {"form", to_string(tree.form())},
      {"schema",
       {{"predictors", std::move(predictors)},
        {"treatment", variable_to_json(schema.treatment())},
        {"outcome", variable_to_json(schema.outcome())}}},
  };
  if (!metadata.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : metadata) meta[k] = v;
    doc["metadata"] = std::move(meta);
  }
  doc["root"] = node_to_json(tree.root(), schema);
  return doc.dump(2) + "\n";
}

Tree deserialize(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed tree file: {}", e.what()));
  }
  try {
    if (doc.at("format_version").get<int>() != kFormatVersion) {
      throw Error("unsupported tree format version");
    }
    Schema schema = schema_from_json(doc.at("schema"));
    if (doc.at("schema_fingerprint").get<std::string>() != schema.fingerprint()) {
      throw Error("schema fingerprint mismatch");
    }
    const auto form_name = doc.at("form").get<std::string>();
    TreeForm form;
    if (form_name == "standard") {
      form = TreeForm::kStandard;
    } else if (form_name == "forced") {
      form = TreeForm::kForced;
    } else {
      throw Error(fmt::format("unknown tree form '{}'", form_name));
    }
    Node root = node_from_json(doc.at("root"), schema);
    return Tree(std::move(schema), std::move(root), form);
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed tree file: {}", e.what()));
  }
}

Tree deserialize(std::string_view bytes, const Schema& expected) {
  Tree tree = deserialize(bytes);
  if (tree.schema().fingerprint() != expected.fingerprint()) {
    throw Error("schema fingerprint mismatch");
  }
  return tree;
}

}  // namespace uplift
