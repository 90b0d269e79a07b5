#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "coarseopt/csv.hpp"
#include "coarseopt/policy.hpp"

namespace coarseopt {

inline nlohmann::json policy_to_json(const PolicyFile& pf) {
  nlohmann::json j;
  j["mechanism"] = pf.mechanism;
  j["T"] = pf.policy.T;
  j["N"] = pf.policy.n_intervals();
  j["p_ss"] = pf.policy.p_ss;
  j["values"] = pf.policy.values;
  j["seed"] = pf.seed;
  return j;
}

inline PolicyFile policy_from_json(const nlohmann::json& j) {
  PolicyFile pf;
  pf.mechanism = j.at("mechanism").get<std::string>();
  pf.policy.T = j.at("T").get<double>();
  pf.policy.p_ss = j.at("p_ss").get<double>();
  pf.policy.values = j.at("values").get<std::vector<double>>();
  pf.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("N") && j.at("N").get<std::size_t>() != pf.policy.values.size())
    throw std::invalid_argument("policy file: N does not match values[]");
  validate_policy(pf.policy);
  return pf;
}

inline void save_policy(const std::filesystem::path& path, const PolicyFile& pf) {
  atomic_write(path, policy_to_json(pf).dump(2) + "\n");
}

inline PolicyFile load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file: " + path.string());
  nlohmann::json j;
  in >> j;
  return policy_from_json(j);
}

}  // namespace coarseopt
