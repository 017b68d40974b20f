#include "pef/dataset.hpp"

#include "pef/error.hpp"
#include "pef/text.hpp"

#include <cmath>
#include <random>

namespace pef {

MeasurementSet parse_measurements(const std::string& csv, const std::string& origin)
{
    auto lines = text::split(csv, '\n');
    std::size_t lineno = 0;
    bool header_seen = false;
    bool tx_seen = false;
    MeasurementSet set;
    for (const auto& raw : lines) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty()) {
            continue;
        }
        const std::string where = origin + ":" + std::to_string(lineno);
        if (!header_seen) {
            if (line != kMeasurementHeader) {
                throw DataError(where + ": expected header '" + kMeasurementHeader + "'");
            }
            header_seen = true;
            continue;
        }
        auto fields = text::split(line, ',');
        if (fields.size() != 5) {
            throw DataError(where + ": expected 5 fields, got " + std::to_string(fields.size()));
        }
        double v[5];
        for (std::size_t i = 0; i < 5; ++i) {
            v[i] = text::parse_double(fields[i], where);
        }
        const Point tx{v[0], v[1]};
        if (!tx_seen) {
            set.tx = tx;
            tx_seen = true;
        } else if (!(tx == set.tx)) {
            throw DataError(where + ": multiple transmitter positions in one file");
        }
        set.records.push_back({{v[2], v[3]}, v[4]});
    }
    if (!header_seen) {
        throw DataError(origin + ": missing header");
    }
    return set;
}

MeasurementSet load_measurements(const std::filesystem::path& path)
{
    return parse_measurements(text::read_file(path), path.string());
}

std::string measurements_csv(const MeasurementSet& set)
{
    std::string out = std::string(kMeasurementHeader) + "\n";
    const auto tx = text::round_trip(set.tx.x) + "," + text::round_trip(set.tx.y) + ",";
    for (const auto& r : set.records) {
        out += tx + text::round_trip(r.rx.x) + "," + text::round_trip(r.rx.y) + "," + text::round_trip(r.pathloss) +
               "\n";
    }
    return out;
}

void save_measurements(const MeasurementSet& set, const std::filesystem::path& path)
{
    text::write_file(path, measurements_csv(set));
}

MeasurementSet truncate(const MeasurementSet& set, double truncation)
{
    if (std::isnan(truncation)) {
        throw DataError("truncation level must not be NaN");
    }
    MeasurementSet out;
    out.tx = set.tx;
    out.truncation = truncation;
    for (const auto& r : set.records) {
        if (r.pathloss < truncation) {
            out.records.push_back(r);
        }
    }
    return out;
}

MeasurementSet gen_synthetic(const RegionGrid& grid, Point tx, const PefParams& params, double d0,
                             std::size_t count, std::optional<double> truncation, std::uint64_t seed)
{
    grid.validate();
    params.validate();
    if (count < 1) {
        throw DataError("synthetic set needs at least one record");
    }
    if (!contains(grid, tx)) {
        throw DataError("tx lies outside the grid");
    }
    if (params.type_count() != grid.type_count) {
        throw DataError("grid and parameters disagree on the region type count");
    }
    if (!(d0 > 0.0)) {
        throw DataError("d0 must be positive");
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_col(0, grid.width - 1);
    std::uniform_int_distribution<int> pick_row(0, grid.height - 1);
    std::uniform_real_distribution<double> offset(0.0, 1.0);

    MeasurementSet set;
    set.tx = tx;
    set.truncation = truncation;
    set.records.reserve(count);
    const std::size_t budget = 1000 * count;
    for (std::size_t draws = 0; set.records.size() < count; ++draws) {
        if (draws >= budget) {
            throw DataError("synthetic generation kept " + std::to_string(set.records.size()) + " of " +
                            std::to_string(count) + " records after " + std::to_string(budget) +
                            " draws; truncation level too low");
        }
        const int col = pick_col(rng);
        const int row = pick_row(rng);
        const double u = offset(rng);
        const double v = offset(rng);
        const Point rx{(col + u) * grid.meters_per_pixel, (row + v) * grid.meters_per_pixel};
        if (!contains(grid, rx) || distance(tx, rx) <= d0) {
            continue;
        }
        const double observed = sample_shadowed(predict_pef(grid, tx, rx, d0, params), params.sigma, rng);
        if (truncation && !(observed < *truncation)) {
            continue;
        }
        set.records.push_back({rx, observed});
    }
    return set;
}

DesignMatrix build_design(const RegionGrid& grid, const MeasurementSet& set, double d0, double truncation,
                          std::size_t* dropped)
{
    DesignMatrix design(grid.type_count, truncation);
    std::size_t skipped = 0;
    for (const auto& r : set.records) {
        if (!(r.pathloss < truncation)) {
            ++skipped;
            continue;
        }
        const auto coeffs = like_term_coefficients(trace_path(grid, set.tx, r.rx, d0), grid.type_count);
        design.add_row(coeffs.coeffs, r.pathloss);
    }
    if (dropped != nullptr) {
        *dropped = skipped;
    }
    return design;
}

std::vector<DistanceSample> distance_samples(const MeasurementSet& set)
{
    std::vector<DistanceSample> out;
    out.reserve(set.size());
    for (const auto& r : set.records) {
        out.push_back({distance(set.tx, r.rx), r.pathloss});
    }
    return out;
}

} // namespace pef
