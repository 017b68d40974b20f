#pragma once

#include "pef/propagation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pef {

/// Contents of a parameter file: {"model", "c", "n", "sigma", "d0", "type_names"}.
/// "n" is an array for the PEF model and a number for log-distance.
struct ParamsFile {
    PefParams params;
    std::optional<double> d0;
    std::vector<std::string> type_names;
};

ParamsFile parse_params(const std::string& json, const std::string& origin);
ParamsFile load_params(const std::filesystem::path& path);
LogDistParams load_logdist_params(const std::filesystem::path& path, std::optional<double> d0_override);

std::string params_json(const PefParams& params, std::optional<double> d0,
                        const std::vector<std::string>& type_names = {});
std::string logdist_json(const LogDistParams& params);

} // namespace pef
