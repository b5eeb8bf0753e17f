#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ckm/error.hpp"
#include "ckm/instance.hpp"
#include "json.hpp"

namespace ckm {

using nlohmann::json;

inline json to_json(const Instance& inst) {
  json j;
  j["num_facilities"] = inst.numFacilities;
  j["num_clients"] = inst.numClients;
  j["k"] = inst.k;
  j["u"] = inst.u;
  j["colocated"] = inst.colocated;
  j["dist"] = inst.dist;
  if (inst.graph) {
    json edges = json::array();
    for (auto [a, b] : inst.graph->edges) edges.push_back({a, b});
    j["graph"] = {{"n", inst.graph->vertexCount}, {"edges", std::move(edges)}};
  }
  return j;
}

namespace detail {

inline const json& require(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) fail(ErrorKind::Parse, where + ": missing field \"" + field + "\"");
  return *it;
}

inline int require_int(const json& obj, const char* field, const std::string& where) {
  const json& v = require(obj, field, where);
  if (!v.is_number_integer())
    fail(ErrorKind::Parse, where + ": field \"" + field + "\" must be an integer");
  return v.get<int>();
}

}  // namespace detail

/// Parses and validates the instance schema. `where` prefixes error messages.
inline Instance instance_from_json(const json& j, const std::string& where = "instance") {
  using detail::require;
  using detail::require_int;
  if (!j.is_object()) fail(ErrorKind::Parse, where + ": top level must be an object");
  Instance inst;
  inst.numFacilities = require_int(j, "num_facilities", where);
  inst.numClients = require_int(j, "num_clients", where);
  inst.k = require_int(j, "k", where);
  inst.u = require_int(j, "u", where);
  const json& col = require(j, "colocated", where);
  if (!col.is_boolean()) fail(ErrorKind::Parse, where + ": field \"colocated\" must be a boolean");
  inst.colocated = col.get<bool>();
  const json& dist = require(j, "dist", where);
  if (!dist.is_array()) fail(ErrorKind::Parse, where + ": field \"dist\" must be an array");
  if (inst.numFacilities < 0 || inst.numClients < 0)
    fail(ErrorKind::Parse, where + ": negative point counts");
  const std::size_t n = static_cast<std::size_t>(inst.numFacilities + inst.numClients);
  if (dist.size() != n * n)
    fail(ErrorKind::Shape, where + ": field \"dist\" has " + std::to_string(dist.size()) +
                               " entries, expected (nF+nC)^2 = " + std::to_string(n * n));
  inst.dist.reserve(n * n);
  for (std::size_t e = 0; e < dist.size(); ++e) {
    if (!dist[e].is_number())
      fail(ErrorKind::Parse, where + ": dist[" + std::to_string(e) + "] is not a number");
    inst.dist.push_back(dist[e].get<double>());
  }
  if (auto it = j.find("graph"); it != j.end()) {
    GraphDescription g;
    g.vertexCount = require_int(*it, "n", where + ".graph");
    for (const json& e : require(*it, "edges", where + ".graph")) {
      if (!e.is_array() || e.size() != 2)
        fail(ErrorKind::Parse, where + ".graph: each edge must be a pair");
      g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    const auto adj = g.adjacency();
    g.regular3 = g.vertexCount > 0 &&
                 std::all_of(adj.begin(), adj.end(), [](const auto& r) { return r.size() == 3; });
    inst.graph = std::move(g);
  }
  validate_instance(inst);
  return inst;
}

inline Instance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open instance file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, "instance file '" + path + "': " + e.what());
  }
  return instance_from_json(j, "instance file '" + path + "'");
}

inline void write_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Parse, "cannot write instance file '" + path + "'");
  out << to_json(inst).dump() << '\n';
}

}  // namespace ckm
