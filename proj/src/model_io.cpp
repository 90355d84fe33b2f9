#include "ctmc/model_io.hpp"

#include <fstream>
#include <set>
#include <tuple>

#include <json.hpp>

namespace ctmc {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "ctmc-model/1";

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& origin) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ModelError(origin + ": unknown field \"" + it.key() + "\"");
}

std::vector<double> number_array(const json& j, const char* field,
                                 const std::string& origin) {
  if (!j.contains(field)) return {};
  const auto& arr = j.at(field);
  if (!arr.is_array())
    throw ModelError(origin + ": field \"" + field + "\" must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number())
      throw ModelError(origin + ": field \"" + field +
                       "\" must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

LoadedModel load_model(std::istream& in, const std::string& origin) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ModelError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ModelError(origin + ": expected an object");
  if (!j.contains("schema") || j.at("schema") != kSchema)
    throw ModelError(origin + ": missing or unsupported schema (want \"" +
                     kSchema + "\")");
  const std::string kind = j.value("kind", "");
  if (kind == "branching") {
    reject_unknown(j, {"schema", "kind", "name", "b"}, origin);
    return branching_qmatrix(number_array(j, "b", origin));
  }
  if (kind == "immigration_resurrection") {
    reject_unknown(j, {"schema", "kind", "name", "c", "h"}, origin);
    return immigration_resurrection(number_array(j, "c", origin),
                                    number_array(j, "h", origin));
  }
  if (kind == "power_birth") {
    reject_unknown(j, {"schema", "kind", "name", "coeff", "power", "offset"},
                   origin);
    return power_birth(j.value("coeff", 1.0), j.value("power", 1),
                       j.value("offset", 0u));
  }
  if (kind == "triplets") {
    reject_unknown(j, {"schema", "kind", "name", "entries", "states", "bounded"},
                   origin);
    if (!j.contains("entries") || !j.at("entries").is_array())
      throw ModelError(origin + ": triplets need an \"entries\" array");
    std::vector<std::tuple<State, State, double>> entries;
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() != 3)
        throw ModelError(origin + ": each entry must be [i, j, rate]");
      entries.emplace_back(e[0].get<State>(), e[1].get<State>(),
                           e[2].get<double>());
    }
    std::optional<State> states;
    if (j.contains("states")) states = j.at("states").get<State>() ;
    RateMatrix m = triplet_qmatrix(entries, states);
    if (j.value("bounded", false)) return bounded_from_matrix(std::move(m));
    return m;
  }
  throw ModelError(origin + ": unknown kind \"" + kind + "\"");
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path);
  return load_model(in, path);
}

const RateMatrix& generator_of(const LoadedModel& m) {
  if (const auto* r = std::get_if<RateMatrix>(&m)) return *r;
  return std::get<BoundedPerturbation>(m).inner();
}

BoundedPerturbation as_perturbation(LoadedModel m) {
  if (auto* p = std::get_if<BoundedPerturbation>(&m)) return std::move(*p);
  RateMatrix r = std::get<RateMatrix>(std::move(m));
  if (!r.support_bound())
    throw ModelError(
        "model \"" + r.name() +
        "\" has unbounded support and no rate bound; it cannot be used as "
        "a bounded perturbation");
  return bounded_from_matrix(std::move(r));
}

}  // namespace ctmc
