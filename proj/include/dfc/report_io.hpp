#pragma once

// JSON serialization of fitted models and reports.

#include "dfc/egarch.hpp"
#include "dfc/estimate.hpp"

#include <nlohmann/json.hpp>

namespace dfc {

using json = nlohmann::json;

json to_json(const Vector& v);
Vector vector_from_json(const json& j);

json to_json(const BlockSpec& b);
BlockSpec block_spec_from_json(const json& j);
json to_json(const ConvTSpec& d);
ConvTSpec convt_from_json(const json& j);
json to_json(const Recursion& r);
Recursion recursion_from_json(const json& j);
json to_json(const BfgsResult& r);
json to_json(const EgarchParams& p);
EgarchParams egarch_from_json(const json& j);

// Fitted models; filter outputs are not stored and are recomputed on load.
json to_json(const FactorFit& f);
FactorFit factor_fit_from_json(const json& j);
json to_json(const JointFit& f);
JointFit joint_fit_from_json(const json& j);
json to_json(const DecoupledFit& f);
DecoupledFit decoupled_fit_from_json(const json& j);
json to_json(const OosReport& r);

// Headline averages: mu, beta and alpha for loadings and correlations, nu, log lambda.
json summary_json(const JointFit& f);
json summary_json(const DecoupledFit& f);

}  // namespace dfc
