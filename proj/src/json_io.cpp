#include "mspace/json_io.hpp"

#include <stdexcept>

namespace msp {

Json pocset_to_json(const WeightedPocset& P, uint32_t max_walls) {
    if (P.wall_count() > max_walls)
        throw std::invalid_argument("pocset_to_json: " + std::to_string(P.wall_count()) +
                                    " walls exceed the serialization cap of " +
                                    std::to_string(max_walls));
    Json j;
    j["walls"] = P.wall_count();
    Json leq = Json::array();
    for (HalfId a = 0; a < P.half_count(); ++a)
        for (HalfId b = 0; b < P.half_count(); ++b)
            if (a != b && P.leq(a, b)) leq.push_back(Json::array({a, b}));
    j["leq"] = std::move(leq);  // (a, b) scan order is already lexicographic
    Json weights = Json::array();
    for (uint32_t w = 0; w < P.wall_count(); ++w)
        weights.push_back(rat_str(P.wall_weight(w)));
    j["weights"] = std::move(weights);
    return j;
}

WeightedPocset pocset_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("walls") || !j.contains("leq") ||
        !j.contains("weights"))
        throw std::invalid_argument("pocset_from_json: need walls, leq, weights");
    uint32_t walls = j.at("walls").get<uint32_t>();
    std::vector<Rat> weights;
    for (const auto& w : j.at("weights")) weights.push_back(parse_rat(w));
    if (weights.size() != walls)
        throw std::invalid_argument("pocset_from_json: weight count mismatch");
    std::vector<std::pair<HalfId, HalfId>> rel;
    for (const auto& p : j.at("leq")) {
        if (!p.is_array() || p.size() != 2)
            throw std::invalid_argument("pocset_from_json: malformed relation pair");
        HalfId a = p[0].get<HalfId>(), b = p[1].get<HalfId>();
        if (a >= 2 * walls || b >= 2 * walls)
            throw std::invalid_argument("pocset_from_json: halfspace id out of range");
        rel.emplace_back(a, b);
    }
    return WeightedPocset::from_relations(walls, std::move(weights), rel);
}

}  // namespace msp
