#include "pef/raster.hpp"

#include "pef/error.hpp"
#include "pef/text.hpp"
#include "pnm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

namespace pef {

void RgbRaster::validate() const
{
    if (width <= 0 || height <= 0) {
        throw DataError("raster must have positive width and height");
    }
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DataError("raster pixel count does not match width x height");
    }
}

void RegionGrid::validate() const
{
    if (width <= 0 || height <= 0) {
        throw DataError("region grid must have positive width and height");
    }
    if (!(meters_per_pixel > 0.0) || !std::isfinite(meters_per_pixel)) {
        throw DataError("meters_per_pixel must be positive");
    }
    if (type_count < 1 || type_count > kMaxRegionTypes) {
        throw DataError("region type count must be in 1.." + std::to_string(kMaxRegionTypes));
    }
    if (labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DataError("label matrix does not match width x height");
    }
    for (auto l : labels) {
        if (l >= type_count) {
            throw DataError("label " + std::to_string(l) + " exceeds region type count " + std::to_string(type_count));
        }
    }
    if (!type_names.empty() && type_names.size() != static_cast<std::size_t>(type_count)) {
        throw DataError("type_names must list every region type");
    }
    if (!type_colors.empty() && type_colors.size() != static_cast<std::size_t>(type_count)) {
        throw DataError("type_colors must list every region type");
    }
}

RgbRaster load_raster(const std::filesystem::path& path)
{
    auto img = detail::read_pnm(path, 3);
    RgbRaster r;
    r.width = img.width;
    r.height = img.height;
    r.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < r.pixels.size(); ++i) {
        r.pixels[i] = {img.samples[3 * i], img.samples[3 * i + 1], img.samples[3 * i + 2]};
    }
    return r;
}

void save_raster(const RgbRaster& raster, const std::filesystem::path& path, bool ascii)
{
    raster.validate();
    detail::PnmImage img{raster.width, raster.height, 3, {}};
    img.samples.reserve(raster.pixels.size() * 3);
    for (const auto& p : raster.pixels) {
        img.samples.insert(img.samples.end(), p.begin(), p.end());
    }
    detail::write_pnm(path, img, ascii);
}

double luminance(const Rgb& c) { return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]; }

namespace {

using Centroid = std::array<double, 3>;

double dist2(const Rgb& p, const Centroid& c)
{
    const double dr = p[0] - c[0];
    const double dg = p[1] - c[1];
    const double db = p[2] - c[2];
    return dr * dr + dg * dg + db * db;
}

std::uint32_t pack(const Rgb& c) { return (std::uint32_t{c[0]} << 16) | (std::uint32_t{c[1]} << 8) | c[2]; }

// Index drawn with probability proportional to weights[i].
std::size_t draw_weighted(const std::vector<double>& weights, std::mt19937_64& rng)
{
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::uniform_real_distribution<double> u(0.0, total);
    const double target = u(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            last_positive = i;
            acc += weights[i];
            if (target < acc) {
                return i;
            }
        }
    }
    return last_positive;
}

} // namespace

RegionGrid classify_regions(const RgbRaster& raster, int k, std::uint64_t seed, double meters_per_pixel,
                            const KMeansOptions& options, KMeansTrace* trace)
{
    raster.validate();
    if (k < 1 || k > kMaxRegionTypes) {
        throw DataError("cluster count k must be in 1.." + std::to_string(kMaxRegionTypes));
    }
    if (!(meters_per_pixel > 0.0)) {
        throw DataError("meters_per_pixel must be positive");
    }

    // Pixel k-means is weighted k-means over the distinct colors.
    std::unordered_map<std::uint32_t, std::size_t> index_of;
    std::vector<std::pair<std::uint32_t, Rgb>> distinct;
    for (const auto& p : raster.pixels) {
        if (index_of.emplace(pack(p), 0).second) {
            distinct.emplace_back(pack(p), p);
        }
    }
    std::sort(distinct.begin(), distinct.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (static_cast<std::size_t>(k) > distinct.size()) {
        throw DataError("k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct.size()) +
                        " distinct colors in the raster");
    }
    const std::size_t m = distinct.size();
    std::vector<Rgb> colors(m);
    std::vector<double> weight(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        colors[i] = distinct[i].second;
        index_of[distinct[i].first] = i;
    }
    for (const auto& p : raster.pixels) {
        weight[index_of[pack(p)]] += 1.0;
    }

    // k-means++ seeding.
    std::mt19937_64 rng(seed);
    std::vector<Centroid> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    auto to_centroid = [](const Rgb& c) { return Centroid{double(c[0]), double(c[1]), double(c[2])}; };
    centroids.push_back(to_centroid(colors[draw_weighted(weight, rng)]));
    std::vector<double> nearest(m);
    for (std::size_t i = 0; i < m; ++i) {
        nearest[i] = dist2(colors[i], centroids[0]);
    }
    while (centroids.size() < static_cast<std::size_t>(k)) {
        std::vector<double> w(m);
        for (std::size_t i = 0; i < m; ++i) {
            w[i] = weight[i] * nearest[i];
        }
        const auto pick = draw_weighted(w, rng);
        centroids.push_back(to_centroid(colors[pick]));
        for (std::size_t i = 0; i < m; ++i) {
            nearest[i] = std::min(nearest[i], dist2(colors[i], centroids.back()));
        }
    }

    // Lloyd iterations.
    std::vector<int> assign(m, -1);
    KMeansTrace local;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        bool changed = false;
        double objective = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            int best = 0;
            double best_d = dist2(colors[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = dist2(colors[i], centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
            objective += weight[i] * best_d;
        }
        local.objective.push_back(objective);
        local.iterations = iter + 1;
        if (!changed) {
            local.converged = true;
            break;
        }

        std::vector<Centroid> sum(static_cast<std::size_t>(k), Centroid{0, 0, 0});
        std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            auto& s = sum[static_cast<std::size_t>(assign[i])];
            for (int ch = 0; ch < 3; ++ch) {
                s[static_cast<std::size_t>(ch)] += weight[i] * colors[i][static_cast<std::size_t>(ch)];
            }
            mass[static_cast<std::size_t>(assign[i])] += weight[i];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (mass[c] > 0.0) {
                centroids[c] = {sum[c][0] / mass[c], sum[c][1] / mass[c], sum[c][2] / mass[c]};
                continue;
            }
            // Empty cluster: move it onto the color farthest from its own centroid.
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double d = dist2(colors[i], centroids[static_cast<std::size_t>(assign[i])]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            centroids[c] = to_centroid(colors[far]);
            assign[far] = -1;  // forces another assignment pass
        }
    }

    // Canonical order: ascending centroid luminance.
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    auto lum = [&](int c) {
        const auto& v = centroids[static_cast<std::size_t>(c)];
        return 0.2126 * v[0] + 0.7152 * v[1] + 0.0722 * v[2];
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lum(a) < lum(b); });
    std::vector<int> rank(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
    }

    RegionGrid grid;
    grid.width = raster.width;
    grid.height = raster.height;
    grid.meters_per_pixel = meters_per_pixel;
    grid.type_count = k;
    grid.type_colors.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        const auto& v = centroids[static_cast<std::size_t>(c)];
        auto& out = grid.type_colors[static_cast<std::size_t>(rank[static_cast<std::size_t>(c)])];
        for (std::size_t ch = 0; ch < 3; ++ch) {
            out[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v[ch]), 0L, 255L));
        }
    }
    grid.labels.resize(raster.pixels.size());
    for (std::size_t p = 0; p < raster.pixels.size(); ++p) {
        const auto cluster = assign[index_of[pack(raster.pixels[p])]];
        grid.labels[p] = static_cast<std::uint8_t>(rank[static_cast<std::size_t>(cluster)]);
    }
    if (trace != nullptr) {
        *trace = std::move(local);
    }
    return grid;
}

RegionGrid merge_region_types(const RegionGrid& grid, const std::map<int, int>& merges)
{
    grid.validate();
    std::vector<int> target(static_cast<std::size_t>(grid.type_count));
    std::iota(target.begin(), target.end(), 0);
    for (auto [from, to] : merges) {
        if (from < 0 || from >= grid.type_count || to < 0 || to >= grid.type_count) {
            throw DataError("merge " + std::to_string(from) + "=" + std::to_string(to) + " names an unknown type");
        }
        target[static_cast<std::size_t>(from)] = to;
    }
    // Resolve chains such as 3=2,2=1; a cycle is an error.
    for (int t = 0; t < grid.type_count; ++t) {
        int cur = t;
        for (int hops = 0; target[static_cast<std::size_t>(cur)] != cur; ++hops) {
            if (hops > grid.type_count) {
                throw DataError("merge map contains a cycle");
            }
            cur = target[static_cast<std::size_t>(cur)];
        }
        target[static_cast<std::size_t>(t)] = cur;
    }
    std::vector<int> dense(static_cast<std::size_t>(grid.type_count), -1);
    int next = 0;
    for (int t = 0; t < grid.type_count; ++t) {
        if (target[static_cast<std::size_t>(t)] == t) {
            dense[static_cast<std::size_t>(t)] = next++;
        }
    }

    RegionGrid out = grid;
    out.type_count = next;
    for (auto& l : out.labels) {
        l = static_cast<std::uint8_t>(dense[static_cast<std::size_t>(target[l])]);
    }
    out.type_names.clear();
    out.type_colors.clear();
    for (int t = 0; t < grid.type_count; ++t) {
        if (dense[static_cast<std::size_t>(t)] < 0) {
            continue;
        }
        if (!grid.type_names.empty()) {
            out.type_names.push_back(grid.type_names[static_cast<std::size_t>(t)]);
        }
        if (!grid.type_colors.empty()) {
            out.type_colors.push_back(grid.type_colors[static_cast<std::size_t>(t)]);
        }
    }
    return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& grid_path)
{
    auto p = grid_path;
    p += ".meta";
    return p;
}

void save_region_grid(const RegionGrid& grid, const std::filesystem::path& path, bool ascii)
{
    grid.validate();
    for (const auto& name : grid.type_names) {
        if (name.find_first_of(",\n\r") != std::string::npos || text::trim(name) != name || name.empty()) {
            throw DataError("type name '" + name + "' cannot be stored (empty, padded or contains ',' / newline)");
        }
    }
    detail::PnmImage img{grid.width, grid.height, 1, grid.labels};
    detail::write_pnm(path, img, ascii);

    text::KeyValue meta;
    meta.set("meters_per_pixel", text::round_trip(grid.meters_per_pixel));
    meta.set("types", std::to_string(grid.type_count));
    if (!grid.type_names.empty()) {
        std::string names;
        for (std::size_t i = 0; i < grid.type_names.size(); ++i) {
            names += (i ? "," : "") + grid.type_names[i];
        }
        meta.set("type_names", names);
    }
    if (!grid.type_colors.empty()) {
        std::string colors;
        for (std::size_t i = 0; i < grid.type_colors.size(); ++i) {
            const auto& c = grid.type_colors[i];
            colors += (i ? ";" : "") + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]);
        }
        meta.set("type_colors", colors);
    }
    text::write_file(sidecar_path(path), meta.dump());
}

RegionGrid load_region_grid(const std::filesystem::path& path)
{
    auto img = detail::read_pnm(path, 1);
    auto meta = text::KeyValue::load(sidecar_path(path));

    RegionGrid grid;
    grid.width = img.width;
    grid.height = img.height;
    grid.labels = std::move(img.samples);
    grid.meters_per_pixel = text::parse_double(meta.get("meters_per_pixel"), "meters_per_pixel");
    grid.type_count = static_cast<int>(text::parse_int(meta.get("types"), "types"));
    if (meta.has("type_names")) {
        grid.type_names = text::split(meta.get("type_names"), ',');
    }
    if (meta.has("type_colors")) {
        for (const auto& entry : text::split(meta.get("type_colors"), ';')) {
            auto parts = text::split(entry, ',');
            if (parts.size() != 3) {
                throw DataError("type_colors: expected r,g,b triples");
            }
            Rgb c{};
            for (std::size_t ch = 0; ch < 3; ++ch) {
                auto v = text::parse_int(parts[ch], "type_colors");
                if (v < 0 || v > 255) {
                    throw DataError("type_colors: channel out of range");
                }
                c[ch] = static_cast<std::uint8_t>(v);
            }
            grid.type_colors.push_back(c);
        }
    }
    grid.validate();
    return grid;
}

} // namespace pef
