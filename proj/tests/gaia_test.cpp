#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "genworld/gaia.hpp"

using namespace genworld;
using namespace genworld::gaia;

namespace {

// Frozen from a reference run of generate_fields (seed 42, 256x256 defaults).
constexpr double GOLDEN_MEAN_ELEVATION = 0.51257131367081499;

WorldSpec small_spec(std::uint64_t seed, int size = 64) {
    WorldSpec s;
    s.seed = seed;
    s.width = size;
    s.height = size;
    return s;
}

TerrainGrid uniform_terrain(int w, int h, const BiomeTable& table, const std::string& biome) {
    Fields f{ScalarField(w, h, 0.5), ScalarField(w, h, 0.5), ScalarField(w, h, 0.5)};
    TerrainGrid g = classify_biomes(f, table, 0.35);
    const auto b = static_cast<std::uint16_t>(*table.find(biome));
    std::fill(g.biome_ids.begin(), g.biome_ids.end(), b);
    std::fill(g.passable.begin(), g.passable.end(), 1);
    std::fill(g.move_cost.begin(), g.move_cost.end(), table.biomes[b].move_cost);
    return g;
}

}  // namespace

TEST(WorldSpec, Validation) {
    WorldSpec s;
    EXPECT_NO_THROW(s.validate());
    s.width = 31;
    EXPECT_THROW(s.validate(), Error);
    s = {};
    s.sea_level = 1.0;
    EXPECT_THROW(s.validate(), Error);
    s = {};
    s.target_population = 0;
    EXPECT_THROW(s.validate(), Error);
}

TEST(GenerateFields, DeterministicAndInUnitRange) {
    const auto a = generate_fields(small_spec(5));
    const auto b = generate_fields(small_spec(5));
    EXPECT_EQ(a, b);
    EXPECT_NE(a.elevation, generate_fields(small_spec(6)).elevation);
    for (const auto* f : {&a.elevation, &a.precipitation, &a.temperature}) {
        EXPECT_EQ(f->values.size(), 64u * 64u);
        for (double v : f->values) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
    }
    // Decorrelated seeds: the fields are not copies of each other.
    EXPECT_NE(a.elevation.values, a.precipitation.values);
}

TEST(GenerateFields, LapseIsMonotoneWithinARow) {
    WorldSpec s = small_spec(17, 96);
    const auto f = generate_fields(s);
    for (int y = 0; y < s.height; ++y)
        for (int x1 = 0; x1 < s.width; x1 += 3)
            for (int x2 = 0; x2 < s.width; x2 += 5)
                if (f.elevation.at(x1, y) >= f.elevation.at(x2, y)) {
                    ASSERT_LE(f.temperature.at(x1, y), f.temperature.at(x2, y) + 1e-12);
                }
}

TEST(GenerateFields, GoldenMeanElevationSeed42) {
    WorldSpec s;
    s.seed = 42;
    const auto f = generate_fields(s);
    EXPECT_NEAR(f.elevation.mean(), GOLDEN_MEAN_ELEVATION, 1e-12);
}

TEST(BiomeTable, DefaultsCoverTheUnitCube) {
    EXPECT_NO_THROW(BiomeTable::defaults().check_coverage(50));
}

TEST(BiomeTable, MissingCatchAllIsUncovered) {
    auto t = BiomeTable::defaults();
    t.biomes.pop_back();  // grassland
    try {
        t.check_coverage(50);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UncoveredTriple);
    }
}

TEST(BiomeTable, JsonRoundTrip) {
    const auto t = BiomeTable::defaults();
    const json j = t;
    EXPECT_EQ(j.at("biomes").at(0).at("move_cost"), "impassable");
    EXPECT_EQ(json::parse(j.dump()).get<BiomeTable>(), t);
}

TEST(BiomeTable, ShippedDataFileMatchesDefaults) {
    std::ifstream in(std::string(GENWORLD_SOURCE_DIR) + "/data/biomes.json");
    ASSERT_TRUE(in.good());
    EXPECT_EQ(json::parse(in).get<BiomeTable>(), BiomeTable::defaults());
}

TEST(ClassifyBiomes, WaterRuleHasTopPriority) {
    const auto t = BiomeTable::defaults();
    const auto b = t.classify(0.1, 0.9, 0.1, 0.35);
    ASSERT_TRUE(b);
    EXPECT_EQ(t.biomes[*b].generic_id, "ocean");

    Fields f{ScalarField(32, 32, 0.1), ScalarField(32, 32, 0.5), ScalarField(32, 32, 0.5)};
    const auto g = classify_biomes(f, t, 0.35);
    EXPECT_FALSE(g.is_passable({3, 3}));
    EXPECT_TRUE(std::isinf(g.cost({3, 3})));
}

TEST(ClassifyBiomes, HotDryIsDesert) {
    const auto t = BiomeTable::defaults();
    const auto b = t.classify(0.5, 0.9, 0.1, 0.35);
    ASSERT_TRUE(b);
    EXPECT_EQ(t.biomes[*b].generic_id, "desert");
}

TEST(ClassifyBiomes, EveryTileOfRandomWorldsGetsOneBiome) {
    const auto table = BiomeTable::defaults();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto spec = small_spec(seed * 7919 + 1, 32);
        const auto g = classify_biomes(generate_fields(spec), table, spec.sea_level);
        ASSERT_EQ(g.biome_ids.size(), g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto& b = table.biomes[g.biome_ids[i]];
            // water-passability coupling
            ASSERT_EQ(g.passable[i] == 0, b.water || std::isinf(g.move_cost[i]));
            ASSERT_EQ(g.fields.elevation.values[i] < spec.sea_level, b.water);
            if (g.passable[i]) {
                ASSERT_TRUE(std::isfinite(g.move_cost[i]));
            }
        }
    }
}

// ------------------------------ Analogization ------------------------------

namespace {

struct OracleFixture {
    oracle::ScriptTable table;
    std::unique_ptr<oracle::ScriptedOracle> backend;
    oracle::HashEmbedder embedder;
    std::unique_ptr<oracle::Gateway> gateway;

    void build() {
        backend = std::make_unique<oracle::ScriptedOracle>(table);
        gateway = std::make_unique<oracle::Gateway>(*backend, embedder);
    }
};

}  // namespace

TEST(AnalogizeBiomes, StoresScriptedAnalogyVerbatim) {
    OracleFixture fx;
    const std::string world = "world made of glass";
    fx.table.set("analogize_descriptor",
                 {{"world", world}, {"category", "plant or natural object"}, {"descriptor", "spreading apple tree"}},
                 "wide glass tree with glass ornaments");
    fx.table.set("analogize_biome", {{"world", world}, {"biome", "forest"}}, "Prism Grove");
    fx.build();
    AnalogyLog log;
    const auto base = BiomeTable::defaults();
    const auto out = analogize_biomes(base, world, *fx.gateway, &log);
    const auto& forest = out.biomes[*out.find("forest")];
    EXPECT_EQ(forest.analog_name, "Prism Grove");
    EXPECT_EQ(forest.flora[0].analog, "wide glass tree with glass ornaments");
    EXPECT_TRUE(out.same_rules(base));
    // unscripted entries fall back to their generic text and are logged
    EXPECT_EQ(out.biomes[*out.find("desert")].analog_name, "desert");
    EXPECT_FALSE(log.fallbacks.empty());
    for (const auto& b : out.biomes) {
        EXPECT_FALSE(b.analog_name.empty());
        for (const auto& f : b.flora) EXPECT_FALSE(f.analog.empty());
    }
}

TEST(AnalogizeBiomes, EmptyDescriptionIsIdentity) {
    OracleFixture fx;
    fx.build();
    const auto base = BiomeTable::defaults();
    const auto out = analogize_biomes(base, "", *fx.gateway);
    for (const auto& b : out.biomes) EXPECT_EQ(b.analog_name, b.generic_id);
    EXPECT_TRUE(fx.gateway->journal().empty());
    EXPECT_TRUE(out.same_rules(base));
}

TEST(AnalogizeBiomes, TransportErrorsPropagate) {
    class Down : public oracle::Oracle {
    public:
        oracle::OracleResponse complete(const oracle::OracleRequest&) override {
            throw Error(Errc::TransportError, "oracle", "down");
        }
    } down;
    oracle::HashEmbedder e;
    oracle::Gateway g(down, e);
    EXPECT_THROW(analogize_biomes(BiomeTable::defaults(), "candy", g), Error);
}

// ------------------------------ Flora ------------------------------

TEST(PlaceFlora, ZeroDensityGivesNothing) {
    auto t = BiomeTable::defaults();
    for (auto& b : t.biomes)
        for (auto& f : b.flora) f.density = 0;
    const auto g = uniform_terrain(64, 64, t, "grassland");
    Rng rng(1);
    EXPECT_TRUE(place_flora(g, t, {}, rng).empty());
}

TEST(PlaceFlora, AllReservedGivesNothing) {
    const auto t = BiomeTable::defaults();
    const auto g = uniform_terrain(64, 64, t, "grassland");
    Rng rng(1);
    EXPECT_TRUE(place_flora(g, t, std::vector<std::uint8_t>(g.size(), 1), rng).empty());
}

TEST(PlaceFlora, DensityWithinTwentyPercentOverFiftySeeds) {
    auto t = BiomeTable::defaults();
    auto& grass = t.biomes[*t.find("grassland")];
    grass.flora = {{"wildflower patch", 3.0, ""}};
    const auto g = uniform_terrain(256, 256, t, "grassland");
    const double expected = 3.0 * static_cast<double>(g.size()) / 100.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto objs = place_flora(g, t, {}, rng);
        EXPECT_NEAR(static_cast<double>(objs.size()), expected, 0.2 * expected) << "seed " << seed;
    }
}

TEST(PlaceFlora, RespectsWaterReservationsAndSpacing) {
    const auto t = BiomeTable::defaults();
    const auto spec = small_spec(77, 96);
    const auto g = classify_biomes(generate_fields(spec), t, spec.sea_level);
    std::vector<std::uint8_t> reserved(g.size(), 0);
    for (int y = 10; y < 30; ++y)
        for (int x = 0; x < 96; ++x) reserved[g.index({x, y})] = 1;
    Rng a(3);
    Rng b(3);
    const auto objs = place_flora(g, t, reserved, a);
    EXPECT_EQ(objs, place_flora(g, t, reserved, b));
    std::set<Tile> seen;
    for (const auto& o : objs) {
        ASSERT_TRUE(g.is_passable(o.position));
        ASSERT_FALSE(reserved[g.index(o.position)]);
        ASSERT_EQ(g.biome_ids[g.index(o.position)], o.biome);
        ASSERT_TRUE(seen.insert(o.position).second);
    }
    for (const auto& o : objs)
        for (const auto& p : objs)
            if (o.id != p.id) {
                ASSERT_GT(chebyshev(o.position, p.position), 1);
            }
}

TEST(TerrainExport, SaveLoadIsStableAfterQuantization) {
    const auto t = BiomeTable::defaults();
    const auto spec = small_spec(9, 48);
    auto f = generate_fields(spec);
    quantize_field(f.elevation);
    quantize_field(f.precipitation);
    quantize_field(f.temperature);
    const auto g = classify_biomes(f, t, spec.sea_level);
    const json j = export_terrain(g);
    const auto back = import_terrain(json::parse(j.dump()), t);
    EXPECT_EQ(back, g);
    EXPECT_EQ(export_terrain(back).dump(), j.dump());
    EXPECT_LT(j.at("biome_rle").size(), g.size());
}
