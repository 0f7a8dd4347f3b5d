#pragma once

#include "harmrec/data.hpp"
#include "harmrec/dynamics.hpp"
#include "harmrec/gradient.hpp"
#include "harmrec/optimizer.hpp"
#include "harmrec/policy.hpp"
#include "harmrec/types.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace harmrec {

using Json = nlohmann::json;

Json to_json(const DynamicsParams& params);
/// Fields missing from `j` keep the values in `base`.
DynamicsParams params_from_json(const Json& j, DynamicsParams base = {});

Json to_json(const Instance& instance);
Instance instance_from_json(const Json& j);

/// Accepts {"instances": [...]} or a single instance object.
std::vector<Instance> instances_from_json(const Json& j);
Json instances_to_json(const std::vector<Instance>& instances);

/// Keyed by candidate-set index: bounded blocks list {items, prob} per subset,
/// independent blocks list {item, rho} per candidate.
Json to_json(const Instance& instance, const Policy& policy);
Policy policy_from_json(const Instance& instance, const Json& j);

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json to_json(const StationaryResult& result);
Json to_json(const Trajectory& trajectory);
Json to_json(const GradientReport& report);
Json to_json(const Instance& instance, const StartOutcome& outcome);
Json to_json(const Instance& instance, const OptimizeResult& result);

Json to_json(const MfModel& model);
MfModel mf_model_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace harmrec
