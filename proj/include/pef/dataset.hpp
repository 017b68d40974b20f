#pragma once

#include "pef/geometry.hpp"
#include "pef/inference.hpp"
#include "pef/propagation.hpp"
#include "pef/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pef {

struct Measurement {
    Point rx;
    double pathloss = 0.0;  // dB
};

/// Path-loss observations from a single transmitter.
struct MeasurementSet {
    Point tx;
    std::vector<Measurement> records;
    std::optional<double> truncation;  // L, dB

    std::size_t size() const { return records.size(); }
};

inline constexpr const char* kMeasurementHeader = "tx_x_m,tx_y_m,rx_x_m,rx_y_m,pathloss_db";

MeasurementSet parse_measurements(const std::string& csv, const std::string& origin);
MeasurementSet load_measurements(const std::filesystem::path& path);
std::string measurements_csv(const MeasurementSet& set);
void save_measurements(const MeasurementSet& set, const std::filesystem::path& path);

/// Drops records with pathloss >= L and records L on the result.
MeasurementSet truncate(const MeasurementSet& set, double truncation);

/// Synthetic measurements: receivers uniform over cells (beyond d0 of tx),
/// pathloss = PEF mean + N(0, sigma^2). With a truncation level, draws at or
/// above it are rejected until `count` records are kept; at most 1000 draws
/// per requested record.
MeasurementSet gen_synthetic(const RegionGrid& grid, Point tx, const PefParams& params, double d0,
                             std::size_t count, std::optional<double> truncation, std::uint64_t seed);

/// Design matrix for the PEF fit: one row of D_i per record. Records at or
/// above `truncation` are left out; `dropped` receives how many.
DesignMatrix build_design(const RegionGrid& grid, const MeasurementSet& set, double d0, double truncation,
                          std::size_t* dropped = nullptr);

/// Tx-Rx distances paired with the observed path loss.
std::vector<DistanceSample> distance_samples(const MeasurementSet& set);

} // namespace pef
