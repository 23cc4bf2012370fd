#pragma once

// JSON model files:
// {"q": 0.75,
//  "states": [{"p": 0.5, "r": 1, "sigma2": 1, "lambda": 0.45,
//              "claims": {"type": "exponential", "mu": 1.0}}, ...]}
// Hyperexponential claims: {"type": "hyperexponential", "weights": [...], "rates": [...]}.
// Unknown fields are rejected at every level.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"
#include "ruin/errors.hpp"
#include "ruin/model.hpp"

namespace ruin {

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + ": expected a JSON object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) known = known || item.key() == key;
        if (!known) throw ValidationError(where + ": unknown field \"" + item.key() + "\"");
    }
}

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ValidationError(where + ": missing field \"" + key + "\"");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(where + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

inline std::vector<double> number_array(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_array())
        throw ValidationError(where + ": field \"" + key + "\" must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : obj.at(key)) {
        if (!v.is_number()) throw ValidationError(where + ": field \"" + key + "\" must hold numbers only");
        out.push_back(v.get<double>());
    }
    return out;
}

inline ClaimDistribution parse_claims(const nlohmann::json& obj, const std::string& where) {
    if (!obj.is_object() || !obj.contains("type") || !obj.at("type").is_string())
        throw ValidationError(where + ": claims need a string \"type\"");
    const std::string type = obj.at("type").get<std::string>();
    if (type == "exponential") {
        reject_unknown(obj, {"type", "mu"}, where);
        return ClaimDistribution::exponential(number_field(obj, "mu", where));
    }
    if (type == "hyperexponential") {
        reject_unknown(obj, {"type", "weights", "rates"}, where);
        return ClaimDistribution::hyperexponential(number_array(obj, "weights", where),
                                                   number_array(obj, "rates", where));
    }
    throw ValidationError(where + ": unknown claim type \"" + type + "\"");
}

}  // namespace detail

inline RiskModel parse_model(const nlohmann::json& doc) {
    detail::reject_unknown(doc, {"q", "states"}, "model");
    RiskModel model;
    model.q = detail::number_field(doc, "q", "model");
    if (!doc.contains("states") || !doc.at("states").is_array() || doc.at("states").empty())
        throw ValidationError("model: \"states\" must be a non-empty array");
    std::size_t index = 0;
    for (const auto& s : doc.at("states")) {
        const std::string where = "states[" + std::to_string(index++) + "]";
        detail::reject_unknown(s, {"p", "r", "sigma2", "lambda", "claims"}, where);
        model.p.push_back(detail::number_field(s, "p", where));
        LevyComponent c;
        c.drift = detail::number_field(s, "r", where);
        c.sigma2 = detail::number_field(s, "sigma2", where);
        c.lambda = detail::number_field(s, "lambda", where);
        if (!s.contains("claims")) throw ValidationError(where + ": missing field \"claims\"");
        c.claims = detail::parse_claims(s.at("claims"), where + ".claims");
        model.components.push_back(std::move(c));
    }
    return model;
}

inline RiskModel parse_model(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
    }
    return parse_model(doc);
}

inline RiskModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading model file: " + path);
    return parse_model(buf.str());
}

inline nlohmann::json to_json(const RiskModel& model) {
    nlohmann::json doc;
    doc["q"] = model.q;
    doc["states"] = nlohmann::json::array();
    for (std::size_t i = 0; i < model.dim(); ++i) {
        const LevyComponent& c = model.components[i];
        nlohmann::json claims;
        if (c.claims.kind() == ClaimDistribution::Kind::Exponential) {
            claims = {{"type", "exponential"}, {"mu", c.claims.rates().front()}};
        } else {
            claims = {{"type", "hyperexponential"}, {"weights", c.claims.weights()}, {"rates", c.claims.rates()}};
        }
        doc["states"].push_back(
            {{"p", model.p[i]}, {"r", c.drift}, {"sigma2", c.sigma2}, {"lambda", c.lambda}, {"claims", claims}});
    }
    return doc;
}

}  // namespace ruin
