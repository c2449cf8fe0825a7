#pragma once

#include <string>

#include <json.hpp>

#include "mspace/pocset.hpp"

namespace msp {

using Json = nlohmann::json;

// {"walls": W, "leq": [[a,b],...], "weights": ["p/q",...]} with ids 2k/2k+1
// complementary per wall; the relation lists every nonreflexive pair, sorted
// lexicographically (canonical form).  Requires an enumerable relation, so
// the wall count is capped.
Json pocset_to_json(const WeightedPocset& P, uint32_t max_walls = 4096);
WeightedPocset pocset_from_json(const Json& j);

}  // namespace msp
