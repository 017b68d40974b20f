#include "pef/params_io.hpp"

#include "pef/error.hpp"
#include "pef/text.hpp"

#include <json.hpp>

namespace pef {

using nlohmann::json;

namespace {

double number(const json& doc, const char* key, const std::string& origin)
{
    if (!doc.contains(key)) {
        throw DataError(origin + ": missing field '" + key + "'");
    }
    if (!doc[key].is_number()) {
        throw DataError(origin + ": field '" + key + "' must be a number");
    }
    return doc[key].get<double>();
}

} // namespace

ParamsFile parse_params(const std::string& content, const std::string& origin)
{
    json doc;
    try {
        doc = json::parse(content);
    } catch (const json::exception& e) {
        throw DataError(origin + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw DataError(origin + ": expected an object");
    }
    ParamsFile out;
    out.params.intercept_c = number(doc, "c", origin);
    out.params.sigma = number(doc, "sigma", origin);
    if (!doc.contains("n")) {
        throw DataError(origin + ": missing field 'n'");
    }
    const auto& n = doc["n"];
    if (n.is_number()) {
        out.params.exponents = {n.get<double>()};
    } else if (n.is_array()) {
        for (const auto& v : n) {
            if (!v.is_number()) {
                throw DataError(origin + ": 'n' must hold numbers");
            }
            out.params.exponents.push_back(v.get<double>());
        }
    } else {
        throw DataError(origin + ": 'n' must be a number or an array");
    }
    if (doc.contains("d0")) {
        out.d0 = number(doc, "d0", origin);
        if (!(*out.d0 > 0.0)) {
            throw DataError(origin + ": d0 must be positive");
        }
    }
    if (doc.contains("type_names")) {
        for (const auto& v : doc["type_names"]) {
            out.type_names.push_back(v.get<std::string>());
        }
    }
    out.params.validate();
    return out;
}

ParamsFile load_params(const std::filesystem::path& path) { return parse_params(text::read_file(path), path.string()); }

LogDistParams load_logdist_params(const std::filesystem::path& path, std::optional<double> d0_override)
{
    auto file = load_params(path);
    if (file.params.type_count() != 1) {
        throw DataError(path.string() + ": log-distance parameters need a single exponent");
    }
    LogDistParams p{file.params.intercept_c, file.params.exponents.front(), file.params.sigma,
                    d0_override.value_or(file.d0.value_or(1.0))};
    p.validate();
    return p;
}

std::string params_json(const PefParams& params, std::optional<double> d0, const std::vector<std::string>& type_names)
{
    json doc;
    doc["model"] = "pef";
    doc["c"] = params.intercept_c;
    doc["n"] = params.exponents;
    doc["sigma"] = params.sigma;
    if (d0) {
        doc["d0"] = *d0;
    }
    if (!type_names.empty()) {
        doc["type_names"] = type_names;
    }
    return doc.dump(2) + "\n";
}

std::string logdist_json(const LogDistParams& params)
{
    json doc;
    doc["model"] = "logdist";
    doc["c"] = params.intercept_c;
    doc["n"] = params.n;
    doc["sigma"] = params.sigma;
    doc["d0"] = params.d0;
    return doc.dump(2) + "\n";
}

} // namespace pef
