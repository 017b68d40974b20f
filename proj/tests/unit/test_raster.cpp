#include "pef/error.hpp"
#include "pef/raster.hpp"
#include "pef/text.hpp"

#include "../support/fixtures.hpp"
#include "../support/tempdir.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace pef;
using fixture::TempDir;

namespace {

RgbRaster random_raster(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> dim(1, 17);
    std::uniform_int_distribution<int> byte(0, 255);
    RgbRaster r;
    r.width = dim(rng);
    r.height = dim(rng);
    for (int i = 0; i < r.width * r.height; ++i) {
        r.pixels.push_back({std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))});
    }
    return r;
}

// Same partition up to a relabelling: the label pairs form a bijection.
bool same_partition(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    std::map<int, int> fwd, bwd;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [f, fi] = fwd.emplace(a[i], b[i]);
        auto [g, gi] = bwd.emplace(b[i], a[i]);
        if (f->second != b[i] || g->second != a[i]) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("load_raster reads binary and ascii pixmaps exactly")
{
    TempDir dir;
    const std::string bin = std::string("P6\n# comment\n2 2\n255\n") +
                            std::string("\xff\x00\x00\x00\xff\x00\x00\x00\xff\xff\xff\xff", 12);
    text::write_file(dir / "a.ppm", bin);
    auto r = load_raster(dir / "a.ppm");
    CHECK(r.width == 2);
    CHECK(r.height == 2);
    const std::vector<Rgb> expect{{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {255, 255, 255}};
    CHECK(r.pixels == expect);

    text::write_file(dir / "b.ppm", "P3 2 2 255\n255 0 0  0 255 0\n0 0 255 255 255 255\n");
    CHECK(load_raster(dir / "b.ppm") == r);

    text::write_file(dir / "black.ppm", "P3\n1 1\n255\n0 0 0\n");
    auto black = load_raster(dir / "black.ppm");
    CHECK(black.width == 1);
    CHECK(black.height == 1);
    CHECK(black.pixels == std::vector<Rgb>{{0, 0, 0}});
}

TEST_CASE("load_raster rejects malformed input")
{
    TempDir dir;
    text::write_file(dir / "hdr.ppm", "P6\n2 x\n255\n");
    CHECK_THROWS_AS(load_raster(dir / "hdr.ppm"), DataError);
    text::write_file(dir / "short.ppm", std::string("P6\n2 2\n255\n") + std::string(5, '\0'));
    CHECK_THROWS_AS(load_raster(dir / "short.ppm"), DataError);
    text::write_file(dir / "deep.ppm", "P3\n1 1\n65535\n0 0 0\n");
    CHECK_THROWS_AS(load_raster(dir / "deep.ppm"), DataError);
    text::write_file(dir / "gray.ppm", "P5\n1 1\n255\n\x01");
    CHECK_THROWS_AS(load_raster(dir / "gray.ppm"), DataError);
    text::write_file(dir / "ascii_short.ppm", "P3\n2 1\n255\n1 2 3 4\n");
    CHECK_THROWS_AS(load_raster(dir / "ascii_short.ppm"), DataError);
    CHECK_THROWS_AS(load_raster(dir / "missing.ppm"), DataError);
}

TEST_CASE("save_raster then load_raster is the identity on random images")
{
    TempDir dir;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        auto r = random_raster(rng);
        const bool ascii = i % 2 == 1;
        save_raster(r, dir / "r.ppm", ascii);
        REQUIRE(load_raster(dir / "r.ppm") == r);
    }
}

TEST_CASE("classify_regions on trivially separable maps")
{
    SUBCASE("single colour, k = 1")
    {
        RgbRaster r{4, 3, std::vector<Rgb>(12, Rgb{10, 20, 30})};
        auto g = classify_regions(r, 1, 7, 0.5);
        CHECK(std::all_of(g.labels.begin(), g.labels.end(), [](auto l) { return l == 0; }));
        CHECK(g.type_count == 1);
        CHECK(g.meters_per_pixel == 0.5);
        CHECK(g.type_colors == std::vector<Rgb>{{10, 20, 30}});
    }
    SUBCASE("three distant colours, k = 3")
    {
        const std::vector<Rgb> palette{{250, 10, 10}, {10, 250, 10}, {10, 10, 250}};
        RgbRaster r{5, 5, {}};
        std::vector<std::uint8_t> truth;
        for (int i = 0; i < 25; ++i) {
            const auto t = static_cast<std::uint8_t>((i * 7 + i / 3) % 3);
            truth.push_back(t);
            r.pixels.push_back(palette[t]);
        }
        auto g = classify_regions(r, 3, 1, 1.0);
        CHECK(same_partition(g.labels, truth));
        // luminance order: blue < red < green
        CHECK(g.type_colors[0] == Rgb{10, 10, 250});
        CHECK(g.type_colors[1] == Rgb{250, 10, 10});
        CHECK(g.type_colors[2] == Rgb{10, 250, 10});
    }
}

TEST_CASE("classify_regions recovers a five-class map up to label permutation")
{
    auto truth = fixture::voronoi_grid(96, 80, 1.0, 5, 40, 5);
    auto raster = fixture::paint(truth, fixture::reference_palette());
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        KMeansTrace trace;
        auto g = classify_regions(raster, 5, seed, 0.709, {}, &trace);
        CHECK(same_partition(g.labels, truth.labels));
        CHECK(trace.converged);
        CHECK(trace.objective.back() == 0.0);
    }
}

TEST_CASE("classify_regions errors")
{
    RgbRaster two{2, 1, {{0, 0, 0}, {1, 1, 1}}};
    CHECK_THROWS_AS(classify_regions(two, 3, 0, 1.0), DataError);
    CHECK_THROWS_AS(classify_regions(two, 0, 0, 1.0), DataError);
    CHECK_THROWS_AS(classify_regions(RgbRaster{}, 1, 0, 1.0), DataError);
    CHECK_THROWS_AS(classify_regions(two, 1, 0, 0.0), DataError);
}

TEST_CASE("k-means objective never increases and runs are deterministic")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> jitter(0.0, 18.0);
    const auto palette = fixture::reference_palette();
    auto base = fixture::voronoi_grid(60, 60, 1.0, 5, 30, 9);
    RgbRaster noisy{60, 60, {}};
    for (auto l : base.labels) {
        Rgb c = palette[l];
        for (auto& ch : c) {
            ch = static_cast<std::uint8_t>(std::clamp(ch + jitter(rng), 0.0, 255.0));
        }
        noisy.pixels.push_back(c);
    }
    for (int k : {2, 4, 5, 8}) {
        KMeansTrace trace;
        auto a = classify_regions(noisy, k, 42, 1.0, {}, &trace);
        auto b = classify_regions(noisy, k, 42, 1.0);
        CHECK(a == b);
        for (std::size_t i = 1; i < trace.objective.size(); ++i) {
            CHECK(trace.objective[i] <= trace.objective[i - 1] * (1 + 1e-12));
        }
        CHECK(trace.iterations <= 300);
        for (int t = 1; t < k; ++t) {
            CHECK(luminance(a.type_colors[t - 1]) <= luminance(a.type_colors[t]) + 1.0);
        }
    }
}

TEST_CASE("separated palettes classify identically across seeds")
{
    auto truth = fixture::voronoi_grid(40, 40, 1.0, 5, 25, 17);
    auto raster = fixture::paint(truth, fixture::reference_palette());
    auto first = classify_regions(raster, 5, 1, 1.0);
    for (std::uint64_t seed = 2; seed < 12; ++seed) {
        CHECK(classify_regions(raster, 5, seed, 1.0).labels == first.labels);
    }
}

TEST_CASE("merge_region_types folds and renumbers")
{
    auto g = fixture::uniform_grid(4, 1, 1.0, 4);
    g.labels = {0, 1, 2, 3};
    g.type_names = {"a", "b", "c", "d"};
    g.type_colors = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    auto m = merge_region_types(g, {{3, 1}, {2, 3}});
    CHECK(m.type_count == 2);
    CHECK(m.labels == std::vector<std::uint8_t>{0, 1, 1, 1});
    CHECK(m.type_names == std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(merge_region_types(g, {{5, 0}}), DataError);
    CHECK_THROWS_AS(merge_region_types(g, {{1, 2}, {2, 1}}), DataError);
}

TEST_CASE("region grid persistence")
{
    TempDir dir;
    auto g = fixture::voronoi_grid(33, 21, 0.709, 5, 12, 4);
    g.type_names = fixture::reference_names();
    g.type_colors = fixture::reference_palette();
    save_region_grid(g, dir / "g.pgm");
    CHECK(load_region_grid(dir / "g.pgm") == g);
    save_region_grid(g, dir / "ga.pgm", true);
    CHECK(load_region_grid(dir / "ga.pgm") == g);

    SUBCASE("label equal to the type count")
    {
        text::write_file(dir / "bad.pgm", "P2\n2 1\n255\n0 5\n");
        text::write_file(dir / "bad.pgm.meta", "meters_per_pixel: 1\ntypes: 5\n");
        CHECK_THROWS_AS(load_region_grid(dir / "bad.pgm"), DataError);
    }
    SUBCASE("zero scale")
    {
        text::write_file(dir / "z.pgm", "P2\n2 1\n255\n0 1\n");
        text::write_file(dir / "z.pgm.meta", "meters_per_pixel: 0\ntypes: 2\n");
        CHECK_THROWS_AS(load_region_grid(dir / "z.pgm"), DataError);
    }
    SUBCASE("missing scale")
    {
        text::write_file(dir / "m.pgm", "P2\n2 1\n255\n0 1\n");
        text::write_file(dir / "m.pgm.meta", "types: 2\n");
        CHECK_THROWS_AS(load_region_grid(dir / "m.pgm"), DataError);
    }
    SUBCASE("names that cannot be stored")
    {
        auto bad = g;
        bad.type_names[0] = "a,b";
        CHECK_THROWS_AS(save_region_grid(bad, dir / "n.pgm"), DataError);
    }
}
