// genworld/gaia.hpp
//
// Natural world: noise fields (elevation, precipitation, temperature), biome
// classification into tiles, analogical re-skinning of biomes for the world
// description, and flora placement.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "genworld/core.hpp"
#include "genworld/noise.hpp"
#include "genworld/oracle.hpp"

namespace genworld::gaia {

inline constexpr double kImpassable = std::numeric_limits<double>::infinity();

// ------------------------------ WorldSpec ------------------------------

struct WorldSpec {
    std::uint64_t seed = 0;
    std::string description;
    int width = 256;
    int height = 256;
    double sea_level = 0.35;
    int target_population = 12;
    int degrees_cap = 4;
    int day_length = 1440;

    void validate() const {
        auto bad = [](const std::string& why) { throw Error(Errc::InvalidParams, "gaia", why); };
        if (width < 32 || height < 32) bad("width and height must be >= 32");
        if (target_population < 1) bad("target_population must be >= 1");
        if (!(sea_level > 0 && sea_level < 1)) bad("sea_level must be in (0, 1)");
        if (degrees_cap < 1) bad("degrees_cap must be >= 1");
        if (day_length < 60) bad("day_length must be >= 60");
    }

    bool operator==(const WorldSpec&) const = default;
};

inline void to_json(json& j, const WorldSpec& s) {
    j = {{"seed", s.seed},           {"description", s.description},     {"width", s.width},
         {"height", s.height},       {"sea_level", s.sea_level},         {"target_population", s.target_population},
         {"degrees_cap", s.degrees_cap}, {"day_length", s.day_length}};
}

inline void from_json(const json& j, WorldSpec& s) {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.description = j.at("description").get<std::string>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.sea_level = j.at("sea_level").get<double>();
    s.target_population = j.at("target_population").get<int>();
    s.degrees_cap = j.at("degrees_cap").get<int>();
    s.day_length = j.at("day_length").get<int>();
}

// ------------------------------ Fields ------------------------------

struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // row-major, each in [0, 1]

    ScalarField() = default;
    ScalarField(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }

    double mean() const {
        double s = 0;
        for (double v : values) s += v;
        return values.empty() ? 0.0 : s / static_cast<double>(values.size());
    }

    bool operator==(const ScalarField&) const = default;
};

struct Fields {
    ScalarField elevation;
    ScalarField precipitation;
    ScalarField temperature;

    bool operator==(const Fields&) const = default;
};

struct FieldParams {
    double elevation_scale = 1.0 / 64.0;      // noise units per tile
    double precipitation_scale = 1.0 / 80.0;
    double temperature_jitter_scale = 1.0 / 48.0;
    noise::FbmParams elevation_fbm{5, 0.5, 2.0};
    noise::FbmParams precipitation_fbm{4, 0.5, 2.0};
    noise::FbmParams temperature_fbm{3, 0.5, 2.0};
    double temperature_jitter = 0.1;
    double lapse = 0.6;  // temperature drop per unit elevation above sea level
};

inline constexpr std::uint64_t kElevationSalt = 0xE1E7A7105EED0001ull;
inline constexpr std::uint64_t kPrecipitationSalt = 0x9A1F7A11C0FFEE02ull;
inline constexpr std::uint64_t kTemperatureSalt = 0x7E3A9E7A7B0A0003ull;

// Equator runs through the middle row; poles at the top and bottom edges.
inline double latitude_warmth(int y, int height) {
    if (height <= 1) return 1.0;
    return 1.0 - std::abs(2.0 * y / static_cast<double>(height - 1) - 1.0);
}

inline Fields generate_fields(const WorldSpec& spec, const FieldParams& params = {}) {
    spec.validate();
    const noise::Perlin2 elev_noise(spec.seed ^ kElevationSalt);
    const noise::Perlin2 precip_noise(spec.seed ^ kPrecipitationSalt);
    const noise::Perlin2 temp_noise(spec.seed ^ kTemperatureSalt);

    Fields f{ScalarField(spec.width, spec.height), ScalarField(spec.width, spec.height),
             ScalarField(spec.width, spec.height)};
    auto to01 = [](double v) { return std::clamp((v + 1.0) * 0.5, 0.0, 1.0); };

    for (int y = 0; y < spec.height; ++y) {
        // The temperature base depends on the row only, so within a row the
        // lapse term alone orders temperatures by elevation.
        const double jitter = noise::fbm(temp_noise, 0.5, y * params.temperature_jitter_scale, params.temperature_fbm);
        const double base = std::clamp(0.1 + 0.85 * latitude_warmth(y, spec.height) + params.temperature_jitter * jitter,
                                       0.0, 1.0);
        for (int x = 0; x < spec.width; ++x) {
            const double e = to01(noise::fbm(elev_noise, x * params.elevation_scale + 0.5,
                                             y * params.elevation_scale + 0.5, params.elevation_fbm));
            const double p = to01(noise::fbm(precip_noise, x * params.precipitation_scale + 0.5,
                                             y * params.precipitation_scale + 0.5, params.precipitation_fbm));
            f.elevation.at(x, y) = e;
            f.precipitation.at(x, y) = p;
            f.temperature.at(x, y) = std::clamp(base - params.lapse * std::max(0.0, e - spec.sea_level), 0.0, 1.0);
        }
    }
    return f;
}

// ------------------------------ Biomes ------------------------------

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    bool operator==(const Interval&) const = default;
};

inline void to_json(json& j, const Interval& i) { j = json::array({i.lo, i.hi}); }
inline void from_json(const json& j, Interval& i) { i = {j.at(0).get<double>(), j.at(1).get<double>()}; }

struct FloraDescriptor {
    std::string description;
    double density = 0.0;  // objects per 100 eligible tiles
    std::string analog;    // world-specific description, filled by analogize_biomes

    bool operator==(const FloraDescriptor&) const = default;
};

struct Biome {
    std::string generic_id;
    bool water = false;  // water rule: matches iff elevation < sea_level, evaluated first
    Interval elevation;
    Interval temperature;
    Interval precipitation;
    std::string tile_kind;
    double move_cost = 1.0;  // kImpassable for impassable ground
    std::vector<FloraDescriptor> flora;
    std::string analog_name;

    bool matches(double e, double t, double p) const {
        return elevation.contains(e) && temperature.contains(t) && precipitation.contains(p);
    }
    // Rule boxes only; names and flora text are the re-skinnable part.
    bool same_rules(const Biome& o) const {
        return generic_id == o.generic_id && water == o.water && elevation == o.elevation &&
               temperature == o.temperature && precipitation == o.precipitation && tile_kind == o.tile_kind &&
               move_cost == o.move_cost && flora.size() == o.flora.size();
    }
    const std::string& display_name() const { return analog_name.empty() ? generic_id : analog_name; }

    bool operator==(const Biome&) const = default;
};

struct BiomeTable {
    static constexpr int kVersion = 1;
    std::vector<Biome> biomes;  // priority order

    std::optional<std::size_t> water_index() const {
        for (std::size_t i = 0; i < biomes.size(); ++i)
            if (biomes[i].water) return i;
        return std::nullopt;
    }

    std::optional<std::size_t> classify(double e, double t, double p, double sea_level) const {
        if (e < sea_level)
            if (auto w = water_index()) return w;
        for (std::size_t i = 0; i < biomes.size(); ++i)
            if (!biomes[i].water && biomes[i].matches(e, t, p)) return i;
        return std::nullopt;
    }

    // Land rules must cover every triple of the unit cube, whatever the sea level.
    void check_coverage(int steps = 50) const {
        if (!water_index()) throw Error(Errc::UncoveredTriple, "gaia", "biome table has no water rule");
        for (int a = 0; a < steps; ++a)
            for (int b = 0; b < steps; ++b)
                for (int c = 0; c < steps; ++c) {
                    const double e = a / static_cast<double>(steps - 1);
                    const double t = b / static_cast<double>(steps - 1);
                    const double p = c / static_cast<double>(steps - 1);
                    if (!classify(e, t, p, 0.0))
                        throw Error(Errc::UncoveredTriple, "gaia",
                                    "(" + std::to_string(e) + ", " + std::to_string(t) + ", " + std::to_string(p) + ")");
                }
    }

    std::optional<std::size_t> find(std::string_view generic_id) const {
        for (std::size_t i = 0; i < biomes.size(); ++i)
            if (biomes[i].generic_id == generic_id) return i;
        return std::nullopt;
    }

    bool same_rules(const BiomeTable& o) const {
        if (biomes.size() != o.biomes.size()) return false;
        for (std::size_t i = 0; i < biomes.size(); ++i)
            if (!biomes[i].same_rules(o.biomes[i])) return false;
        return true;
    }

    bool operator==(const BiomeTable&) const = default;

    static BiomeTable defaults() {
        BiomeTable t;
        auto box = [](double lo, double hi) { return Interval{lo, hi}; };
        t.biomes = {
            {"ocean", true, box(0, 1), box(0, 1), box(0, 1), "water", kImpassable, {}, ""},
            {"mountain", false, box(0.72, 1), box(0, 1), box(0, 1), "rock", 4.0,
             {{"jagged boulder", 1.0, ""}, {"hardy pine", 1.0, ""}}, ""},
            {"tundra", false, box(0, 1), box(0, 0.2), box(0, 1), "snow", 2.0,
             {{"frost-covered shrub", 1.0, ""}, {"snow drift", 0.5, ""}}, ""},
            {"desert", false, box(0, 1), box(0.6, 1), box(0, 0.42), "sand", 1.6,
             {{"tall cactus", 1.0, ""}, {"sun-bleached rock", 0.5, ""}}, ""},
            {"rainforest", false, box(0, 1), box(0.6, 1), box(0.58, 1), "jungle", 2.2,
             {{"giant fern", 3.0, ""}, {"vine-covered tree", 4.0, ""}}, ""},
            {"forest", false, box(0, 1), box(0, 1), box(0.55, 1), "forest_floor", 1.5,
             {{"spreading apple tree", 2.0, ""}, {"oak tree", 4.0, ""}, {"berry bush", 1.0, ""}}, ""},
            {"grassland", false, box(0, 1), box(0, 1), box(0, 1), "grass", 1.0,
             {{"wildflower patch", 1.5, ""}, {"spreading apple tree", 0.5, ""}}, ""},
        };
        return t;
    }
};

inline void to_json(json& j, const Biome& b) {
    json flora = json::array();
    for (const auto& f : b.flora) flora.push_back({{"description", f.description}, {"density", f.density}, {"analog", f.analog}});
    j = {{"generic_id", b.generic_id},
         {"water", b.water},
         {"elevation", b.elevation},
         {"temperature", b.temperature},
         {"precipitation", b.precipitation},
         {"tile_kind", b.tile_kind},
         {"move_cost", std::isinf(b.move_cost) ? json("impassable") : json(b.move_cost)},
         {"flora", flora},
         {"analog_name", b.analog_name}};
}

inline void from_json(const json& j, Biome& b) {
    b.generic_id = j.at("generic_id").get<std::string>();
    b.water = j.value("water", false);
    b.elevation = j.at("elevation").get<Interval>();
    b.temperature = j.at("temperature").get<Interval>();
    b.precipitation = j.at("precipitation").get<Interval>();
    b.tile_kind = j.at("tile_kind").get<std::string>();
    const auto& mc = j.at("move_cost");
    b.move_cost = mc.is_string() ? kImpassable : mc.get<double>();
    if (!(b.move_cost > 0)) throw Error(Errc::InvalidParams, "gaia", "move_cost must be positive");
    b.flora.clear();
    for (const auto& f : j.at("flora"))
        b.flora.push_back({f.at("description").get<std::string>(), f.at("density").get<double>(), f.value("analog", "")});
    b.analog_name = j.value("analog_name", "");
}

inline void to_json(json& j, const BiomeTable& t) { j = {{"version", BiomeTable::kVersion}, {"biomes", t.biomes}}; }

inline void from_json(const json& j, BiomeTable& t) {
    if (j.value("version", 0) != BiomeTable::kVersion) throw Error(Errc::VersionMismatch, "gaia", "biome table version");
    t.biomes = j.at("biomes").get<std::vector<Biome>>();
}

// ------------------------------ Terrain ------------------------------

struct TerrainGrid {
    int width = 0;
    int height = 0;
    Fields fields;
    std::vector<std::uint16_t> biome_ids;
    std::vector<std::uint8_t> passable;
    std::vector<double> move_cost;  // kImpassable where not passable

    std::size_t index(Tile t) const { return static_cast<std::size_t>(t.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(t.x); }
    Tile tile(std::size_t i) const { return {static_cast<int>(i % static_cast<std::size_t>(width)), static_cast<int>(i / static_cast<std::size_t>(width))}; }
    bool in_bounds(Tile t) const { return t.x >= 0 && t.y >= 0 && t.x < width && t.y < height; }
    bool is_passable(Tile t) const { return in_bounds(t) && passable[index(t)] != 0; }
    double cost(Tile t) const { return in_bounds(t) ? move_cost[index(t)] : kImpassable; }
    std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }

    bool operator==(const TerrainGrid&) const = default;
};

inline TerrainGrid classify_biomes(const Fields& fields, const BiomeTable& table, double sea_level) {
    TerrainGrid g;
    g.width = fields.elevation.width;
    g.height = fields.elevation.height;
    g.fields = fields;
    const std::size_t n = g.size();
    g.biome_ids.resize(n);
    g.passable.resize(n);
    g.move_cost.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = fields.elevation.values[i];
        const double t = fields.temperature.values[i];
        const double p = fields.precipitation.values[i];
        const auto b = table.classify(e, t, p, sea_level);
        if (!b)
            throw Error(Errc::UncoveredTriple, "gaia",
                        "(" + std::to_string(e) + ", " + std::to_string(t) + ", " + std::to_string(p) + ")");
        const Biome& biome = table.biomes[*b];
        g.biome_ids[i] = static_cast<std::uint16_t>(*b);
        const bool ok = !biome.water && !std::isinf(biome.move_cost);
        g.passable[i] = ok ? 1 : 0;
        g.move_cost[i] = ok ? biome.move_cost : kImpassable;
    }
    return g;
}

// ------------------------------ Analogization ------------------------------

struct AnalogyLog {
    std::vector<std::string> fallbacks;  // biome or descriptor that kept its generic text
};

inline bool is_fallback_error(const Error& e) {
    return e.code() == Errc::SchemaViolation || e.code() == Errc::MissingScriptEntry;
}

// Re-skins names and flora descriptions; rule boxes are copied untouched.
inline BiomeTable analogize_biomes(const BiomeTable& table, const std::string& world_description,
                                   oracle::Gateway& gateway, AnalogyLog* log = nullptr) {
    BiomeTable out = table;
    const bool identity = trim(world_description).empty();
    auto ask = [&](const std::string& tid, SlotValues slots, const std::string& fallback) -> std::string {
        if (identity) return fallback;
        try {
            return trim(gateway.ask(tid, std::move(slots), oracle::ResponseSchema::free_text()).text);
        } catch (const Error& e) {
            if (!is_fallback_error(e)) throw;
            if (log) log->fallbacks.push_back(tid + ":" + fallback);
            return fallback;
        }
    };
    for (auto& b : out.biomes) {
        b.analog_name = ask("analogize_biome", {{"world", world_description}, {"biome", b.generic_id}}, b.generic_id);
        for (auto& f : b.flora)
            f.analog = ask("analogize_descriptor",
                           {{"world", world_description}, {"category", "plant or natural object"}, {"descriptor", f.description}},
                           f.description);
    }
    return out;
}

// ------------------------------ Flora ------------------------------

struct NaturalObject {
    ObjectId id;
    Tile position;
    std::uint16_t biome = 0;
    std::string generic;     // generic descriptor from the biome table
    std::string descriptor;  // world-specific description
    std::string asset_ref;
    int size = 1;

    bool operator==(const NaturalObject&) const = default;
};

inline void to_json(json& j, const NaturalObject& o) {
    j = {{"object_id", o.id},     {"position", o.position},   {"biome", o.biome}, {"generic", o.generic},
         {"descriptor", o.descriptor}, {"asset_ref", o.asset_ref}, {"size", o.size}};
}

inline void from_json(const json& j, NaturalObject& o) {
    o.id = j.at("object_id").get<ObjectId>();
    o.position = j.at("position").get<Tile>();
    o.biome = j.at("biome").get<std::uint16_t>();
    o.generic = j.at("generic").get<std::string>();
    o.descriptor = j.at("descriptor").get<std::string>();
    o.asset_ref = j.at("asset_ref").get<std::string>();
    o.size = j.at("size").get<int>();
}

// Dart throwing per (biome, descriptor) with a one-tile exclusion ring, so
// objects never touch; the target count is density * eligible / 100.
inline std::vector<NaturalObject> place_flora(const TerrainGrid& terrain, const BiomeTable& table,
                                              const std::vector<std::uint8_t>& reserved, Rng& rng,
                                              std::uint32_t first_id = 1) {
    std::vector<NaturalObject> out;
    const std::size_t n = terrain.size();
    std::vector<std::uint8_t> occupied(n, 0);
    std::vector<std::vector<std::size_t>> eligible(table.biomes.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!terrain.passable[i]) continue;
        if (!reserved.empty() && reserved[i]) continue;
        eligible[terrain.biome_ids[i]].push_back(i);
    }
    auto free_ring = [&](Tile t) {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const Tile q{t.x + dx, t.y + dy};
                if (terrain.in_bounds(q) && occupied[terrain.index(q)]) return false;
            }
        return true;
    };
    std::uint32_t next_id = first_id;
    for (std::size_t b = 0; b < table.biomes.size(); ++b) {
        const auto& tiles = eligible[b];
        if (tiles.empty()) continue;
        for (const auto& f : table.biomes[b].flora) {
            if (f.density <= 0) continue;
            const auto target = static_cast<std::size_t>(std::llround(f.density * static_cast<double>(tiles.size()) / 100.0));
            std::size_t placed = 0;
            for (std::size_t attempt = 0; attempt < 20 * target && placed < target; ++attempt) {
                const std::size_t i = tiles[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(tiles.size()) - 1))];
                const Tile t = terrain.tile(i);
                if (occupied[i] || !free_ring(t)) continue;
                occupied[i] = 1;
                out.push_back({ObjectId(next_id++), t, static_cast<std::uint16_t>(b), f.description,
                               f.analog.empty() ? f.description : f.analog, "", 1});
                ++placed;
            }
        }
    }
    return out;
}

// ------------------------------ Export ------------------------------

// Run-length encoding as [[value, count], ...].
template <class T>
json rle_encode(const std::vector<T>& values) {
    json out = json::array();
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        out.push_back(json::array({values[i], j - i}));
        i = j;
    }
    return out;
}

template <class T>
std::vector<T> rle_decode(const json& runs, std::size_t expected) {
    std::vector<T> out;
    out.reserve(expected);
    for (const auto& r : runs) {
        const auto v = r.at(0).get<T>();
        const auto count = r.at(1).get<std::size_t>();
        if (out.size() + count > expected) throw std::invalid_argument("run length overflow");
        out.insert(out.end(), count, v);
    }
    if (out.size() != expected) throw std::invalid_argument("run length mismatch");
    return out;
}

inline std::uint16_t quantize16(double v) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}
inline double dequantize16(std::uint16_t q) { return q / 65535.0; }

// Snap a field to the 16-bit grid used in saves, so save/load is lossless afterwards.
inline void quantize_field(ScalarField& f) {
    for (auto& v : f.values) v = dequantize16(quantize16(v));
}

inline std::string encode_field(const ScalarField& f) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(f.values.size() * 2);
    for (double v : f.values) {
        const auto q = quantize16(v);
        bytes.push_back(static_cast<std::uint8_t>(q & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>(q >> 8));
    }
    return base64_encode(bytes);
}

inline ScalarField decode_field(const std::string& text, int width, int height) {
    const auto bytes = base64_decode(text);
    ScalarField f(width, height);
    if (bytes.size() != f.values.size() * 2) throw std::invalid_argument("field size mismatch");
    for (std::size_t i = 0; i < f.values.size(); ++i)
        f.values[i] = dequantize16(static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8)));
    return f;
}

inline json export_terrain(const TerrainGrid& g) {
    return {{"width", g.width},
            {"height", g.height},
            {"biome_rle", rle_encode(g.biome_ids)},
            {"passable_rle", rle_encode(g.passable)},
            {"elevation_q16", encode_field(g.fields.elevation)},
            {"precipitation_q16", encode_field(g.fields.precipitation)},
            {"temperature_q16", encode_field(g.fields.temperature)}};
}

// Move costs are derived from the biome table; road discounts are applied by the caller.
inline TerrainGrid import_terrain(const json& j, const BiomeTable& table) {
    TerrainGrid g;
    g.width = j.at("width").get<int>();
    g.height = j.at("height").get<int>();
    if (g.width < 1 || g.height < 1) throw std::invalid_argument("terrain dimensions");
    const std::size_t n = g.size();
    g.biome_ids = rle_decode<std::uint16_t>(j.at("biome_rle"), n);
    g.passable = rle_decode<std::uint8_t>(j.at("passable_rle"), n);
    g.fields.elevation = decode_field(j.at("elevation_q16").get<std::string>(), g.width, g.height);
    g.fields.precipitation = decode_field(j.at("precipitation_q16").get<std::string>(), g.width, g.height);
    g.fields.temperature = decode_field(j.at("temperature_q16").get<std::string>(), g.width, g.height);
    g.move_cost.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (g.biome_ids[i] >= table.biomes.size()) throw std::invalid_argument("biome id out of range");
        const auto& b = table.biomes[g.biome_ids[i]];
        g.move_cost[i] = g.passable[i] ? b.move_cost : kImpassable;
    }
    return g;
}

}  // namespace genworld::gaia
