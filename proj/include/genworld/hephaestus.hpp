// genworld/hephaestus.hpp
//
// The constructed world: building roster from the family plan, street-row
// placement with player-facing facades, interiors with furniture, and a road
// network routed as a TSP tour over entrances refined by A* terrain paths.
//
// Conventions: the facade is the bottom edge of the footprint ("down" faces
// the viewer). The door is the bottom-row centre tile of the footprint and the
// entrance is the street tile directly below it.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "genworld/core.hpp"
#include "genworld/gaia.hpp"
#include "genworld/oracle.hpp"
#include "genworld/pathing.hpp"

namespace genworld::hephaestus {

inline constexpr int kMinBuildings = 5;
inline constexpr int kMaxBuildings = 30;
inline constexpr int kMinFootprint = 2;
inline constexpr int kMaxFootprint = 12;

// ------------------------------ Roster ------------------------------

struct BuildingSpec {
    std::string function_tag;        // residence | workplace | city-hall
    std::vector<std::string> roles;  // workplace role group(s) housed here
    int width = 3;
    int height = 3;
    int capacity = 1;
    std::string description;         // generic text, later replaced by its analog
    bool filler = false;

    bool operator==(const BuildingSpec&) const = default;
};

inline void to_json(json& j, const BuildingSpec& s) {
    j = {{"function_tag", s.function_tag}, {"roles", s.roles},       {"width", s.width},  {"height", s.height},
         {"capacity", s.capacity},         {"description", s.description}, {"filler", s.filler}};
}

inline void from_json(const json& j, BuildingSpec& s) {
    s.function_tag = j.at("function_tag").get<std::string>();
    s.roles = j.at("roles").get<std::vector<std::string>>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.capacity = j.at("capacity").get<int>();
    s.description = j.at("description").get<std::string>();
    s.filler = j.at("filler").get<bool>();
}

inline BuildingSpec residence_spec(int capacity, bool filler = false) {
    BuildingSpec s;
    s.function_tag = "residence";
    s.capacity = std::max(1, capacity);
    s.filler = filler;
    if (s.capacity <= 2) {
        s.width = 3;
        s.height = 3;
        s.description = "small family house with a pitched roof";
    } else if (s.capacity <= 4) {
        s.width = 4;
        s.height = 3;
        s.description = "small family house with a pitched roof";
    } else {
        s.width = 5;
        s.height = 4;
        s.description = "large family house with a porch";
    }
    return s;
}

inline BuildingSpec workplace_spec(std::vector<std::string> roles) {
    BuildingSpec s;
    s.function_tag = "workplace";
    s.width = 5;
    s.height = 4;
    s.capacity = 8;
    s.description = "workshop of the " + join(roles, " and ");
    s.roles = std::move(roles);
    return s;
}

inline BuildingSpec civic_spec() {
    BuildingSpec s;
    s.function_tag = "city-hall";
    s.width = 6;
    s.height = 5;
    s.capacity = 12;
    s.description = "city hall with a clock tower";
    return s;
}

// One residence per family, one workplace per distinct role (merged round-robin
// when needed to stay within the maximum), one civic building, and filler
// residences up to the minimum.
inline std::vector<BuildingSpec> derive_building_needs(const std::vector<int>& family_sizes,
                                                       const std::vector<std::string>& roles) {
    std::vector<std::string> distinct;
    for (const auto& r : roles)
        if (std::find(distinct.begin(), distinct.end(), r) == distinct.end()) distinct.push_back(r);
    const int families = static_cast<int>(family_sizes.size());
    const int min_workplaces = distinct.empty() ? 0 : 1;
    if (families + min_workplaces + 1 > kMaxBuildings)
        throw Error(Errc::PopulationTooLarge, "hephaestus",
                    std::to_string(families) + " families exceed the " + std::to_string(kMaxBuildings) + "-building cap");

    std::vector<BuildingSpec> out;
    for (int size : family_sizes) out.push_back(residence_spec(size));
    const int workplaces = std::min(static_cast<int>(distinct.size()), kMaxBuildings - families - 1);
    std::vector<std::vector<std::string>> groups(static_cast<std::size_t>(workplaces));
    for (std::size_t i = 0; i < distinct.size(); ++i) groups[i % groups.size()].push_back(distinct[i]);
    for (auto& g : groups) out.push_back(workplace_spec(std::move(g)));
    out.push_back(civic_spec());
    while (static_cast<int>(out.size()) < kMinBuildings) out.push_back(residence_spec(2, true));
    return out;
}

// Replace each generic description with its world-specific analog; schema
// violations and missing script entries keep the generic text.
inline void analogize_buildings(std::vector<BuildingSpec>& specs, const std::string& world_description,
                                oracle::Gateway& gateway) {
    if (trim(world_description).empty()) return;
    for (auto& s : specs) {
        try {
            const auto r = gateway.ask("analogize_descriptor",
                                       {{"world", world_description}, {"category", "building"}, {"descriptor", s.description}},
                                       oracle::ResponseSchema::free_text());
            if (!trim(r.text).empty()) s.description = trim(r.text);
        } catch (const Error& e) {
            if (!gaia::is_fallback_error(e)) throw;
        }
    }
}

// ------------------------------ Placement ------------------------------

struct Building {
    BuildingId id;
    BuildingSpec spec;
    Tile origin;  // top-left of the footprint
    std::string asset_ref;

    Rect footprint() const { return {origin.x, origin.y, spec.width, spec.height}; }
    Tile door() const { return {origin.x + spec.width / 2, origin.y + spec.height - 1}; }
    Tile entrance() const { return {origin.x + spec.width / 2, origin.y + spec.height}; }
    int street_row() const { return origin.y + spec.height; }

    bool operator==(const Building&) const = default;
};

inline void to_json(json& j, const Building& b) {
    j = {{"id", b.id}, {"spec", b.spec}, {"origin", b.origin}, {"asset_ref", b.asset_ref}};
}

inline void from_json(const json& j, Building& b) {
    b.id = j.at("id").get<BuildingId>();
    b.spec = j.at("spec").get<BuildingSpec>();
    b.origin = j.at("origin").get<Tile>();
    b.asset_ref = j.at("asset_ref").get<std::string>();
}

struct Settlement {
    std::vector<Building> buildings;
    std::vector<int> street_rows;
    Rect bounds;

    const Building* find(BuildingId id) const {
        for (const auto& b : buildings)
            if (b.id == id) return &b;
        return nullptr;
    }

    bool operator==(const Settlement&) const = default;
};

inline void to_json(json& j, const Settlement& s) {
    j = {{"buildings", s.buildings}, {"street_rows", s.street_rows}, {"bounds", s.bounds}};
}

inline void from_json(const json& j, Settlement& s) {
    s.buildings = j.at("buildings").get<std::vector<Building>>();
    s.street_rows = j.at("street_rows").get<std::vector<int>>();
    s.bounds = j.at("bounds").get<Rect>();
}

struct PlacementParams {
    double slope_threshold = 0.08;  // max elevation spread over a footprint
    int min_gap = 1;                // tiles between footprints on a street
    int isolation = 6;              // isolated buildings keep more than this clearance
    int max_row_seeds = 50;
    int margin = 1;                 // keep footprints off the map edge
};

// Placement problems found in a settlement; empty means all invariants hold.
inline std::vector<std::string> settlement_violations(const Settlement& s, const gaia::TerrainGrid& terrain,
                                                      const PlacementParams& params = {}) {
    std::vector<std::string> v;
    const auto n = s.buildings.size();
    if (n < static_cast<std::size_t>(kMinBuildings) || n > static_cast<std::size_t>(kMaxBuildings))
        v.push_back("building count " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = s.buildings[i];
        const Rect fa = a.footprint();
        if (a.spec.width < kMinFootprint || a.spec.height < kMinFootprint || a.spec.width > kMaxFootprint ||
            a.spec.height > kMaxFootprint)
            v.push_back("footprint size of " + std::to_string(a.id.value));
        double lo = 1e9, hi = -1e9;
        for (int y = fa.y; y < fa.y + fa.h; ++y)
            for (int x = fa.x; x < fa.x + fa.w; ++x) {
                if (!terrain.is_passable({x, y})) v.push_back("footprint on impassable tile, building " + std::to_string(a.id.value));
                if (terrain.in_bounds({x, y})) {
                    lo = std::min(lo, terrain.fields.elevation.at(x, y));
                    hi = std::max(hi, terrain.fields.elevation.at(x, y));
                }
            }
        if (hi - lo > params.slope_threshold + 1e-12) v.push_back("slope under building " + std::to_string(a.id.value));
        const Tile e = a.entrance();
        const Tile below{e.x, e.y + 1};
        if (!terrain.is_passable(e) || !terrain.is_passable(below))
            v.push_back("entrance not passable, building " + std::to_string(a.id.value));
        bool shares_street = false;
        bool isolated = true;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& b = s.buildings[k];
            if (b.footprint().contains(e) || b.footprint().contains(below))
                v.push_back("entrance of " + std::to_string(a.id.value) + " blocked by " + std::to_string(b.id.value));
            if (k == i) continue;
            if (k > i && fa.intersects(b.footprint()))
                v.push_back("overlap " + std::to_string(a.id.value) + "/" + std::to_string(b.id.value));
            if (b.street_row() == a.street_row()) shares_street = true;
            if (rect_gap(fa, b.footprint()) <= params.isolation) isolated = false;
        }
        if (!shares_street && !isolated) v.push_back("building " + std::to_string(a.id.value) + " neither on a street nor isolated");
    }
    return v;
}

namespace detail {

struct Placer {
    const gaia::TerrainGrid& terrain;
    const PlacementParams& params;
    std::vector<std::uint8_t> in_component;  // largest passable component
    std::vector<int> occupied;               // building index + 1 per footprint tile
    std::vector<std::uint8_t> reserved;      // entrances and the tiles below them

    Placer(const gaia::TerrainGrid& t, const PlacementParams& p) : terrain(t), params(p) {
        pathing::CostGrid g{t.width, t.height, t.move_cost};
        const auto labels = pathing::component_labels(g);
        std::map<int, std::size_t> sizes;
        for (int l : labels)
            if (l >= 0) ++sizes[l];
        int best = -1;
        std::size_t best_n = 0;
        for (auto [l, c] : sizes)
            if (c > best_n) {
                best_n = c;
                best = l;
            }
        in_component.assign(labels.size(), 0);
        for (std::size_t i = 0; i < labels.size(); ++i) in_component[i] = labels[i] == best && best >= 0;
        reset();
    }

    void reset() {
        occupied.assign(terrain.size(), 0);
        reserved.assign(terrain.size(), 0);
    }

    bool usable(Tile t) const { return terrain.in_bounds(t) && in_component[terrain.index(t)]; }

    bool fits(const BuildingSpec& s, Tile origin, int clearance) const {
        const Rect r{origin.x, origin.y, s.width, s.height};
        const int m = params.margin;
        if (r.x < m || r.y < m || r.x + r.w > terrain.width - m || r.y + r.h + 2 > terrain.height) return false;
        const Tile e{r.x + r.w / 2, r.y + r.h};
        const Tile below{e.x, e.y + 1};
        if (!usable(e) || !usable(below) || occupied[terrain.index(e)] || occupied[terrain.index(below)]) return false;
        double lo = 1e9, hi = -1e9;
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x) {
                const Tile t{x, y};
                if (!usable(t) || reserved[terrain.index(t)]) return false;
                const double el = terrain.fields.elevation.at(x, y);
                lo = std::min(lo, el);
                hi = std::max(hi, el);
            }
        if (hi - lo > params.slope_threshold) return false;
        const Rect halo = r.inflated(clearance);
        for (int y = std::max(0, halo.y); y < std::min(terrain.height, halo.y + halo.h); ++y)
            for (int x = std::max(0, halo.x); x < std::min(terrain.width, halo.x + halo.w); ++x)
                if (occupied[terrain.index({x, y})]) return false;
        return true;
    }

    void mark(const BuildingSpec& s, Tile origin, int index) {
        for (int y = origin.y; y < origin.y + s.height; ++y)
            for (int x = origin.x; x < origin.x + s.width; ++x) occupied[terrain.index({x, y})] = index + 1;
        const Tile e{origin.x + s.width / 2, origin.y + s.height};
        reserved[terrain.index(e)] = 1;
        reserved[terrain.index({e.x, e.y + 1})] = 1;
    }

    void unmark(const BuildingSpec& s, Tile origin) {
        for (int y = origin.y; y < origin.y + s.height; ++y)
            for (int x = origin.x; x < origin.x + s.width; ++x) occupied[terrain.index({x, y})] = 0;
        const Tile e{origin.x + s.width / 2, origin.y + s.height};
        reserved[terrain.index(e)] = 0;
        reserved[terrain.index({e.x, e.y + 1})] = 0;
    }
};

}  // namespace detail

// Greedy street-row packing. Street rows are tried top to bottom from a
// random start row (wrapping); each row takes buildings left to right with
// footprints bottom-aligned on the row. A row that would hold a single
// building is abandoned, and buildings that fit on no shared row are placed
// isolated. Each retry draws a new start row.
inline Settlement place_buildings(const std::vector<BuildingSpec>& specs, const gaia::TerrainGrid& terrain, Rng& rng,
                                  const PlacementParams& params = {}) {
    if (specs.empty()) return {};
    detail::Placer placer(terrain, params);
    int max_h = 0;
    for (const auto& s : specs) max_h = std::max(max_h, s.height);
    const int first_row = params.margin + max_h;
    const int last_row = terrain.height - 2;
    if (last_row < first_row)
        throw Error(Errc::InsufficientBuildableArea, "hephaestus", "terrain too small");

    for (int attempt = 0; attempt < params.max_row_seeds; ++attempt) {
        placer.reset();
        std::vector<std::optional<Tile>> origin(specs.size());
        std::vector<int> rows;
        const int span = last_row - first_row + 1;
        const int start = first_row + static_cast<int>(rng.uniform_int(0, span - 1));
        std::size_t remaining = specs.size();
        for (int k = 0; k < span && remaining > 1; ++k) {
            const int row = first_row + (start - first_row + k) % span;
            std::vector<std::size_t> on_row;
            int cursor = params.margin;
            for (std::size_t i = 0; i < specs.size(); ++i) {
                if (origin[i]) continue;
                const auto& s = specs[i];
                for (int x = cursor; x + s.width + params.margin <= terrain.width; ++x) {
                    const Tile o{x, row - s.height};
                    if (placer.fits(s, o, params.min_gap)) {
                        origin[i] = o;
                        placer.mark(s, o, static_cast<int>(i));
                        on_row.push_back(i);
                        cursor = x + s.width + params.min_gap;
                        break;
                    }
                }
            }
            if (on_row.size() == 1) {
                placer.unmark(specs[on_row[0]], *origin[on_row[0]]);
                origin[on_row[0]].reset();
            } else if (!on_row.empty()) {
                rows.push_back(row);
                remaining -= on_row.size();
            }
        }
        // Leftovers go where nothing lies within the isolation clearance.
        bool complete = true;
        for (std::size_t i = 0; i < specs.size() && complete; ++i) {
            if (origin[i]) continue;
            const auto& s = specs[i];
            const int oy0 = static_cast<int>(rng.uniform_int(0, terrain.height - 1));
            bool placed = false;
            for (int dy = 0; dy < terrain.height && !placed; ++dy) {
                const int y = (oy0 + dy) % terrain.height;
                for (int x = 0; x < terrain.width && !placed; ++x) {
                    if (placer.fits(s, {x, y}, params.isolation + 1)) {
                        origin[i] = Tile{x, y};
                        placer.mark(s, {x, y}, static_cast<int>(i));
                        placed = true;
                    }
                }
            }
            complete = placed;
        }
        if (!complete) continue;

        Settlement out;
        int x0 = terrain.width, y0 = terrain.height, x1 = 0, y1 = 0;
        for (std::size_t i = 0; i < specs.size(); ++i) {
            Building b;
            b.id = BuildingId(static_cast<std::uint32_t>(i + 1));
            b.spec = specs[i];
            b.origin = *origin[i];
            const Rect f = b.footprint();
            x0 = std::min(x0, f.x);
            y0 = std::min(y0, f.y);
            x1 = std::max(x1, f.x + f.w);
            y1 = std::max(y1, f.y + f.h + 1);
            out.buildings.push_back(std::move(b));
        }
        std::sort(rows.begin(), rows.end());
        out.street_rows = rows;
        out.bounds = {x0, y0, x1 - x0, y1 - y0};
        return out;
    }
    throw Error(Errc::InsufficientBuildableArea, "hephaestus",
                "no layout after " + std::to_string(params.max_row_seeds) + " row seeds");
}

// ------------------------------ Interiors ------------------------------

struct FurnitureSpec {
    std::string furniture_tag;
    int width = 1;
    int height = 1;
    bool wall_required = true;
    std::vector<std::string> function_tags;
    std::string description;

    bool operator==(const FurnitureSpec&) const = default;
};

inline void to_json(json& j, const FurnitureSpec& f) {
    j = {{"furniture_tag", f.furniture_tag},   {"footprint", {f.width, f.height}},
         {"wall_required", f.wall_required},   {"function_tags", f.function_tags},
         {"description", f.description}};
}

inline void from_json(const json& j, FurnitureSpec& f) {
    f.furniture_tag = j.at("furniture_tag").get<std::string>();
    f.width = j.at("footprint").at(0).get<int>();
    f.height = j.at("footprint").at(1).get<int>();
    f.wall_required = j.at("wall_required").get<bool>();
    f.function_tags = j.at("function_tags").get<std::vector<std::string>>();
    f.description = j.at("description").get<std::string>();
}

struct FurnitureCatalog {
    static constexpr int kVersion = 1;
    std::vector<FurnitureSpec> items;

    std::vector<const FurnitureSpec*> for_function(const std::string& function_tag) const {
        std::vector<const FurnitureSpec*> out;
        for (const auto& f : items)
            if (std::find(f.function_tags.begin(), f.function_tags.end(), function_tag) != f.function_tags.end())
                out.push_back(&f);
        return out;
    }

    static FurnitureCatalog defaults() {
        const std::vector<std::string> home{"residence"};
        const std::vector<std::string> work{"workplace"};
        const std::vector<std::string> civic{"city-hall"};
        const std::vector<std::string> all{"residence", "workplace", "city-hall"};
        return {{
            {"bed", 1, 2, true, home, "bed"},
            {"table", 2, 1, false, {"residence", "city-hall"}, "table"},
            {"chair", 1, 1, false, all, "chair"},
            {"bookshelf", 1, 1, true, {"residence", "city-hall"}, "bookshelf"},
            {"stove", 1, 1, true, home, "stove"},
            {"chest", 1, 1, true, {"residence", "workplace"}, "storage chest"},
            {"counter", 2, 1, true, work, "shop counter"},
            {"workbench", 2, 1, true, work, "workbench"},
            {"desk", 2, 1, true, civic, "desk"},
            {"bench", 2, 1, false, civic, "bench"},
        }};
    }

    bool operator==(const FurnitureCatalog&) const = default;
};

inline void to_json(json& j, const FurnitureCatalog& c) { j = {{"version", FurnitureCatalog::kVersion}, {"items", c.items}}; }

inline void from_json(const json& j, FurnitureCatalog& c) {
    if (j.at("version").get<int>() != FurnitureCatalog::kVersion)
        throw Error(Errc::VersionMismatch, "hephaestus", "furniture catalog version");
    c.items = j.at("items").get<std::vector<FurnitureSpec>>();
}

struct PlacedFurniture {
    std::string furniture_tag;
    std::string description;  // analog text once analogized
    std::string asset_ref;
    Tile tile;                // local top-left
    int width = 1;
    int height = 1;
    bool wall_required = true;

    Rect footprint() const { return {tile.x, tile.y, width, height}; }
    bool operator==(const PlacedFurniture&) const = default;
};

inline void to_json(json& j, const PlacedFurniture& f) {
    j = {{"furniture_tag", f.furniture_tag}, {"description", f.description}, {"asset_ref", f.asset_ref},
         {"tile", f.tile}, {"footprint", {f.width, f.height}}, {"wall_required", f.wall_required}};
}

inline void from_json(const json& j, PlacedFurniture& f) {
    f.furniture_tag = j.at("furniture_tag").get<std::string>();
    f.description = j.at("description").get<std::string>();
    f.asset_ref = j.at("asset_ref").get<std::string>();
    f.tile = j.at("tile").get<Tile>();
    f.width = j.at("footprint").at(0).get<int>();
    f.height = j.at("footprint").at(1).get<int>();
    f.wall_required = j.at("wall_required").get<bool>();
}

inline constexpr int kWall = -1;

// Local coordinates: (0,0) is the footprint's top-left; the door is on the bottom row.
struct Interior {
    BuildingId building_id;
    int width = 0;
    int height = 0;
    std::vector<int> rooms;  // room id per tile, kWall for wall tiles
    int room_count = 1;
    Tile door;
    std::vector<PlacedFurniture> furniture;

    int room_at(Tile t) const { return rooms[static_cast<std::size_t>(t.y * width + t.x)]; }
    bool in_bounds(Tile t) const { return t.x >= 0 && t.y >= 0 && t.x < width && t.y < height; }

    bool furniture_at(Tile t) const {
        for (const auto& f : furniture)
            if (f.footprint().contains(t)) return true;
        return false;
    }
    bool walkable(Tile t) const { return in_bounds(t) && room_at(t) != kWall && !furniture_at(t); }

    bool operator==(const Interior&) const = default;
};

inline void to_json(json& j, const Interior& in) {
    j = {{"building_id", in.building_id}, {"width", in.width},   {"height", in.height},      {"rooms", in.rooms},
         {"room_count", in.room_count},   {"door", in.door},     {"furniture", in.furniture}};
}

inline void from_json(const json& j, Interior& in) {
    in.building_id = j.at("building_id").get<BuildingId>();
    in.width = j.at("width").get<int>();
    in.height = j.at("height").get<int>();
    in.rooms = j.at("rooms").get<std::vector<int>>();
    in.room_count = j.at("room_count").get<int>();
    in.door = j.at("door").get<Tile>();
    in.furniture = j.at("furniture").get<std::vector<PlacedFurniture>>();
}

// All walkable tiles connected to the door, and every piece of furniture has
// at least one walkable neighbour.
inline bool interior_reachable(const Interior& in) {
    if (!in.walkable(in.door)) return false;
    std::vector<std::uint8_t> seen(in.rooms.size(), 0);
    std::vector<Tile> stack{in.door};
    seen[static_cast<std::size_t>(in.door.y * in.width + in.door.x)] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const Tile t = stack.back();
        stack.pop_back();
        for (Tile d : pathing::kNeighbours4) {
            const Tile nb{t.x + d.x, t.y + d.y};
            if (!in.walkable(nb)) continue;
            auto& s = seen[static_cast<std::size_t>(nb.y * in.width + nb.x)];
            if (s) continue;
            s = 1;
            ++reached;
            stack.push_back(nb);
        }
    }
    std::size_t walkable = 0;
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) walkable += in.walkable({x, y});
    if (reached != walkable) return false;
    for (const auto& f : in.furniture) {
        bool touches = false;
        const Rect r = f.footprint();
        for (int y = r.y - 1; y <= r.y + r.h && !touches; ++y)
            for (int x = r.x - 1; x <= r.x + r.w && !touches; ++x) {
                const Tile t{x, y};
                const bool edge_neighbour = (x >= r.x && x < r.x + r.w) != (y >= r.y && y < r.y + r.h);
                if (edge_neighbour && in.walkable(t) && seen[static_cast<std::size_t>(y * in.width + x)]) touches = true;
            }
        if (!touches) return false;
    }
    return true;
}

namespace detail {

struct RoomBox {
    int x, y, w, h;
};

inline bool wall_adjacent(const Interior& in, const Rect& r) {
    for (int y = r.y - 1; y <= r.y + r.h; ++y)
        for (int x = r.x - 1; x <= r.x + r.w; ++x) {
            const bool edge_neighbour = (x >= r.x && x < r.x + r.w) != (y >= r.y && y < r.y + r.h);
            if (!edge_neighbour) continue;
            const Tile t{x, y};
            if (!in.in_bounds(t) || in.room_at(t) == kWall) return true;
        }
    return false;
}

}  // namespace detail

inline constexpr int kMaxWallSplits = 3;

// Up to three axis-aligned wall splits (each wall line has one doorway),
// then catalog furniture placed wall-first without disconnecting the floor.
inline Interior layout_interior(const Building& building, const FurnitureCatalog& catalog, Rng& rng) {
    const int W = building.spec.width;
    const int H = building.spec.height;
    if (W < kMinFootprint || H < kMinFootprint)
        throw Error(Errc::InvalidParams, "hephaestus", "footprint below 2x2");
    Interior in;
    in.building_id = building.id;
    in.width = W;
    in.height = H;
    in.rooms.assign(static_cast<std::size_t>(W * H), 0);
    in.door = {W / 2, H - 1};
    auto set_room = [&](Tile t, int r) { in.rooms[static_cast<std::size_t>(t.y * W + t.x)] = r; };

    std::vector<detail::RoomBox> boxes{{0, 0, W, H}};
    const int splits = static_cast<int>(rng.uniform_int(0, kMaxWallSplits));
    for (int s = 0; s < splits; ++s) {
        // split the largest room that can hold a wall with >= 2 tiles each side
        std::size_t pick = boxes.size();
        for (std::size_t i = 0; i < boxes.size(); ++i)
            if ((boxes[i].w >= 5 || boxes[i].h >= 5) &&
                (pick == boxes.size() || boxes[i].w * boxes[i].h > boxes[pick].w * boxes[pick].h))
                pick = i;
        if (pick == boxes.size()) break;
        const detail::RoomBox b = boxes[pick];
        // a wall must not end against an earlier doorway
        auto open_tile = [&](Tile t) { return in.in_bounds(t) && in.room_at(t) != kWall; };
        const bool vertical = b.w >= b.h ? b.w >= 5 : b.h < 5;
        const int newroom = static_cast<int>(boxes.size());
        std::vector<int> lines;
        if (vertical) {
            for (int c = b.x + 2; c <= b.x + b.w - 3; ++c)
                if (!(c == in.door.x && b.y + b.h == H) && !open_tile({c, b.y - 1}) && !open_tile({c, b.y + b.h}))
                    lines.push_back(c);
        } else {
            for (int r = b.y + 2; r <= b.y + b.h - 3; ++r)
                if (!open_tile({b.x - 1, r}) && !open_tile({b.x + b.w, r})) lines.push_back(r);
        }
        if (lines.empty()) break;
        const int line = lines[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(lines.size()) - 1))];
        if (vertical) {
            const int gap = b.y + static_cast<int>(rng.uniform_int(0, b.h - 1));
            for (int y = b.y; y < b.y + b.h; ++y) set_room({line, y}, y == gap ? in.room_at({line - 1, y}) : kWall);
            for (int y = b.y; y < b.y + b.h; ++y)
                for (int x = line + 1; x < b.x + b.w; ++x) set_room({x, y}, newroom);
            boxes[pick] = {b.x, b.y, line - b.x, b.h};
            boxes.push_back({line + 1, b.y, b.x + b.w - line - 1, b.h});
        } else {
            const int gap = b.x + static_cast<int>(rng.uniform_int(0, b.w - 1));
            for (int x = b.x; x < b.x + b.w; ++x) set_room({x, line}, x == gap ? in.room_at({x, line - 1}) : kWall);
            for (int y = line + 1; y < b.y + b.h; ++y)
                for (int x = b.x; x < b.x + b.w; ++x) set_room({x, y}, newroom);
            boxes[pick] = {b.x, b.y, b.w, line - b.y};
            boxes.push_back({b.x, line + 1, b.w, b.y + b.h - line - 1});
        }
    }
    in.room_count = static_cast<int>(boxes.size());

    auto options = catalog.for_function(building.spec.function_tag);
    if (options.empty()) return in;
    const int cap = std::max(1, W * H / 6);
    int failures = 0;
    while (static_cast<int>(in.furniture.size()) < cap && failures < 2 * static_cast<int>(options.size())) {
        const FurnitureSpec& f = *options[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];
        std::vector<Tile> wall_first;
        std::vector<Tile> free_standing;
        for (int y = 0; y + f.height <= H; ++y)
            for (int x = 0; x + f.width <= W; ++x) {
                const Rect r{x, y, f.width, f.height};
                bool ok = !r.contains(in.door) && !r.contains({in.door.x, in.door.y - 1});
                for (int yy = y; yy < y + f.height && ok; ++yy)
                    for (int xx = x; xx < x + f.width && ok; ++xx) ok = in.walkable({xx, yy});
                if (!ok) continue;
                (detail::wall_adjacent(in, r) ? wall_first : free_standing).push_back({x, y});
            }
        if (!f.wall_required) wall_first.insert(wall_first.end(), free_standing.begin(), free_standing.end());
        rng.shuffle(wall_first);
        bool placed = false;
        for (Tile t : wall_first) {
            in.furniture.push_back({f.furniture_tag, f.description, "", t, f.width, f.height, f.wall_required});
            if (interior_reachable(in)) {
                placed = true;
                break;
            }
            in.furniture.pop_back();
        }
        if (!placed) ++failures;
    }
    return in;
}

// ------------------------------ Roads ------------------------------

struct RoadNetwork {
    std::vector<BuildingId> tour;
    std::vector<std::vector<Tile>> segments;
    std::vector<Tile> road_tiles;  // sorted, unique

    bool operator==(const RoadNetwork&) const = default;
};

inline void to_json(json& j, const RoadNetwork& r) {
    j = {{"tour", r.tour}, {"segments", r.segments}, {"road_tiles", r.road_tiles}};
}

inline void from_json(const json& j, RoadNetwork& r) {
    r.tour = j.at("tour").get<std::vector<BuildingId>>();
    r.segments = j.at("segments").get<std::vector<std::vector<Tile>>>();
    r.road_tiles = j.at("road_tiles").get<std::vector<Tile>>();
}

inline constexpr double kRoadCostFactor = 0.5;

// Terrain costs with building footprints blocked.
inline pathing::CostGrid routing_grid(const gaia::TerrainGrid& terrain, const Settlement& settlement) {
    pathing::CostGrid g{terrain.width, terrain.height, terrain.move_cost};
    for (const auto& b : settlement.buildings) {
        const Rect f = b.footprint();
        for (int y = f.y; y < f.y + f.h; ++y)
            for (int x = f.x; x < f.x + f.w; ++x)
                if (terrain.in_bounds({x, y})) g.cost[g.index({x, y})] = gaia::kImpassable;
    }
    return g;
}

inline RoadNetwork build_roads(const Settlement& settlement, const gaia::TerrainGrid& terrain) {
    RoadNetwork net;
    const std::size_t n = settlement.buildings.size();
    if (n <= 1) {
        for (const auto& b : settlement.buildings) net.tour.push_back(b.id);
        return net;
    }
    const auto grid = routing_grid(terrain, settlement);
    const auto labels = pathing::component_labels(grid);
    std::vector<pathing::Point> pts;
    for (const auto& b : settlement.buildings) {
        const Tile e = b.entrance();
        if (!grid.passable(e) || labels[grid.index(e)] != labels[grid.index(settlement.buildings[0].entrance())])
            throw Error(Errc::DisconnectedSettlement, "hephaestus", "building " + std::to_string(b.id.value) + " unreachable");
        pts.push_back({static_cast<double>(e.x), static_cast<double>(e.y)});
    }
    const auto order = pathing::tsp_route(pts);
    for (std::size_t i : order) net.tour.push_back(settlement.buildings[i].id);
    const std::size_t legs = n >= 3 ? n : 1;
    std::set<Tile> tiles;
    for (std::size_t k = 0; k < legs; ++k) {
        const Tile a = settlement.buildings[order[k]].entrance();
        const Tile b = settlement.buildings[order[(k + 1) % n]].entrance();
        auto path = pathing::astar(grid, a, b);
        tiles.insert(path.tiles.begin(), path.tiles.end());
        net.segments.push_back(std::move(path.tiles));
    }
    net.road_tiles.assign(tiles.begin(), tiles.end());
    return net;
}

// Roads are cheaper to walk on.
inline void apply_roads(gaia::TerrainGrid& terrain, const RoadNetwork& roads, double factor = kRoadCostFactor) {
    for (Tile t : roads.road_tiles)
        if (terrain.is_passable(t)) terrain.move_cost[terrain.index(t)] *= factor;
}

// True when the road tiles form one 4-connected component containing every entrance.
inline bool roads_connect_entrances(const Settlement& settlement, const RoadNetwork& roads) {
    if (settlement.buildings.size() <= 1) return true;
    const std::set<Tile> tiles(roads.road_tiles.begin(), roads.road_tiles.end());
    const Tile start = settlement.buildings[0].entrance();
    if (!tiles.count(start)) return false;
    std::set<Tile> seen{start};
    std::vector<Tile> stack{start};
    while (!stack.empty()) {
        const Tile t = stack.back();
        stack.pop_back();
        for (Tile d : pathing::kNeighbours4) {
            const Tile nb{t.x + d.x, t.y + d.y};
            if (tiles.count(nb) && seen.insert(nb).second) stack.push_back(nb);
        }
    }
    if (seen.size() != tiles.size()) return false;
    for (const auto& b : settlement.buildings)
        if (!seen.count(b.entrance())) return false;
    return true;
}

// Tiles flora must avoid: footprints, entrances, and roads.
inline std::vector<std::uint8_t> reserved_mask(const gaia::TerrainGrid& terrain, const Settlement& settlement,
                                               const RoadNetwork& roads) {
    std::vector<std::uint8_t> m(terrain.size(), 0);
    for (const auto& b : settlement.buildings) {
        const Rect f = b.footprint();
        for (int y = f.y; y < f.y + f.h + 2; ++y)
            for (int x = f.x; x < f.x + f.w; ++x)
                if (terrain.in_bounds({x, y}) && (y < f.y + f.h || x == b.entrance().x)) m[terrain.index({x, y})] = 1;
    }
    for (Tile t : roads.road_tiles)
        if (terrain.in_bounds(t)) m[terrain.index(t)] = 1;
    return m;
}

}  // namespace genworld::hephaestus
