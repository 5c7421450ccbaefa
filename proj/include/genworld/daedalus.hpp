// genworld/daedalus.hpp
//
// Asset resolution for analogical descriptions: size estimation through the
// oracle, nearest-description retrieval from a pre-generated library, and
// sprite post-processing (pixel scale + palette unification, background
// removal by gradient-tolerant flood fill from the corners).
#pragma once

#include <deque>
#include <filesystem>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "genworld/core.hpp"
#include "genworld/oracle.hpp"

namespace genworld::daedalus {

// ------------------------------ Sprites ------------------------------

struct Rgba {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    std::uint8_t a = 0;

    bool operator==(const Rgba&) const = default;
};

static_assert(sizeof(Rgba) == 4);
inline constexpr Rgba kTransparent{0, 0, 0, 0};

struct Sprite {
    int width = 0;
    int height = 0;
    std::vector<Rgba> pixels;  // row-major
    std::optional<std::vector<Rgba>> palette;

    Sprite() = default;
    Sprite(int w, int h, Rgba fill = kTransparent)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    Rgba& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
    const Rgba& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }

    bool operator==(const Sprite&) const = default;
};

inline constexpr std::uint8_t kAlphaThreshold = 128;
inline constexpr std::size_t kMaxPalette = 32;

inline int color_distance2(Rgba a, Rgba b) {
    const int dr = a.r - b.r;
    const int dg = a.g - b.g;
    const int db = a.b - b.b;
    return dr * dr + dg * dg + db * db;
}

// Nearest palette entry by squared RGB distance; ties go to the earliest index.
inline std::size_t nearest_palette_index(Rgba c, const std::vector<Rgba>& palette) {
    std::size_t best = 0;
    int best_d = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < palette.size(); ++i) {
        const int d = color_distance2(c, palette[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

// Nearest-neighbour resample into a square box of target_tiles * pixels_per_tile
// pixels (aspect kept, letterboxed with transparency), alpha thresholded at 128,
// opaque pixels snapped to the palette.
inline Sprite unify_sprite(const Sprite& sprite, int target_tiles, int pixels_per_tile, const std::vector<Rgba>& palette) {
    if (palette.empty()) throw Error(Errc::EmptyPalette, "daedalus", "unify_sprite");
    if (pixels_per_tile < 1 || target_tiles < 1 || sprite.width < 1 || sprite.height < 1)
        throw Error(Errc::InvalidParams, "daedalus", "unify_sprite dimensions");
    const int box = target_tiles * pixels_per_tile;
    const double scale = static_cast<double>(box) / std::max(sprite.width, sprite.height);
    const int w = std::clamp(static_cast<int>(std::lround(sprite.width * scale)), 1, box);
    const int h = std::clamp(static_cast<int>(std::lround(sprite.height * scale)), 1, box);
    const int ox = (box - w) / 2;
    const int oy = (box - h) / 2;

    Sprite out(box, box, kTransparent);
    out.palette = palette;
    for (int y = 0; y < h; ++y) {
        const int sy = std::min(sprite.height - 1, static_cast<int>((y + 0.5) * sprite.height / h));
        for (int x = 0; x < w; ++x) {
            const int sx = std::min(sprite.width - 1, static_cast<int>((x + 0.5) * sprite.width / w));
            const Rgba src = sprite.at(sx, sy);
            if (src.a < kAlphaThreshold) continue;
            Rgba c = palette[nearest_palette_index(src, palette)];
            c.a = 255;
            out.at(ox + x, oy + y) = c;
        }
    }
    return out;
}

// Corner flood fill. A pixel joins the background when its largest channel
// deviation from the mean of its already-filled 8-neighbours is within
// `tolerance`, which lets the fill follow smooth gradients. A corner only
// seeds if its 2x2 block is itself uniform within tolerance, and a fill that
// would swallow every opaque pixel is discarded (no separable foreground).
inline Sprite remove_background(const Sprite& sprite, int tolerance = 24) {
    if (tolerance < 0) throw Error(Errc::InvalidParams, "daedalus", "tolerance must be >= 0");
    Sprite out = sprite;
    const int W = sprite.width;
    const int H = sprite.height;
    if (W < 2 || H < 2) return out;
    auto idx = [W](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(W) + static_cast<std::size_t>(x); };
    auto deviation = [](Rgba a, double r, double g, double b) {
        return std::max({std::abs(a.r - r), std::abs(a.g - g), std::abs(a.b - b)});
    };
    std::vector<std::uint8_t> filled(sprite.pixels.size(), 0);
    std::deque<std::pair<int, int>> queue;

    const std::array<std::pair<int, int>, 4> corners{{{0, 0}, {W - 1, 0}, {0, H - 1}, {W - 1, H - 1}}};
    for (auto [cx, cy] : corners) {
        const Rgba c = sprite.at(cx, cy);
        if (c.a < kAlphaThreshold || filled[idx(cx, cy)]) continue;
        const int nx = cx == 0 ? 1 : cx - 1;
        const int ny = cy == 0 ? 1 : cy - 1;
        bool uniform = true;
        for (auto [px, py] : {std::pair{nx, cy}, std::pair{cx, ny}, std::pair{nx, ny}}) {
            const Rgba q = sprite.at(px, py);
            if (q.a < kAlphaThreshold || deviation(q, c.r, c.g, c.b) > tolerance) uniform = false;
        }
        if (!uniform) continue;
        filled[idx(cx, cy)] = 1;
        queue.emplace_back(cx, cy);
    }

    static constexpr std::array<std::pair<int, int>, 4> kDirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        for (auto [dx, dy] : kDirs) {
            const int qx = x + dx;
            const int qy = y + dy;
            if (qx < 0 || qy < 0 || qx >= W || qy >= H || filled[idx(qx, qy)]) continue;
            const Rgba q = sprite.at(qx, qy);
            if (q.a < kAlphaThreshold) continue;
            double r = 0, g = 0, b = 0;
            int n = 0;
            for (int ny = qy - 1; ny <= qy + 1; ++ny)
                for (int nx = qx - 1; nx <= qx + 1; ++nx) {
                    if (nx < 0 || ny < 0 || nx >= W || ny >= H || !filled[idx(nx, ny)]) continue;
                    const Rgba f = sprite.at(nx, ny);
                    r += f.r;
                    g += f.g;
                    b += f.b;
                    ++n;
                }
            if (deviation(q, r / n, g / n, b / n) > tolerance) continue;
            filled[idx(qx, qy)] = 1;
            queue.emplace_back(qx, qy);
        }
    }

    std::size_t opaque = 0;
    std::size_t removed = 0;
    for (std::size_t i = 0; i < sprite.pixels.size(); ++i) {
        if (sprite.pixels[i].a >= kAlphaThreshold) ++opaque;
        if (filled[i]) ++removed;
    }
    if (removed == opaque) return out;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        if (filled[i]) out.pixels[i] = kTransparent;
    return out;
}

// ------------------------------ Library ------------------------------

struct AssetEntry {
    std::string asset_id;
    std::string image_path;  // relative to the manifest directory; "builtin:" entries carry no image
    std::string description;
    oracle::EmbeddingVector embedding;
    std::vector<std::string> tags;
    int native_size = 1;

    bool operator==(const AssetEntry&) const = default;
};

struct AssetLibrary {
    static constexpr int kManifestVersion = 1;
    int manifest_version = kManifestVersion;
    std::vector<AssetEntry> entries;

    bool operator==(const AssetLibrary&) const = default;

    // Unique ids, unit-length embeddings, and (for file-backed entries) images present.
    void validate(const std::filesystem::path& base_dir = {}, bool check_images = true) const {
        std::set<std::string> ids;
        for (const auto& e : entries) {
            if (!ids.insert(e.asset_id).second)
                throw Error(Errc::InvalidParams, "daedalus", "duplicate asset_id " + e.asset_id);
            if (std::abs(e.embedding.norm() - 1.0) > 1e-6)
                throw Error(Errc::InvalidParams, "daedalus", "embedding not unit length for " + e.asset_id);
            if (check_images && e.image_path.rfind("builtin:", 0) != 0 && !std::filesystem::exists(base_dir / e.image_path))
                throw Error(Errc::IoError, "daedalus", "missing image " + e.image_path);
        }
    }
};

inline void to_json(json& j, const AssetEntry& e) {
    j = {{"asset_id", e.asset_id},     {"image_path", e.image_path}, {"description_text", e.description},
         {"embedding", e.embedding.values}, {"tags", e.tags},         {"native_size", e.native_size}};
}

inline void from_json(const json& j, AssetEntry& e) {
    e.asset_id = j.at("asset_id").get<std::string>();
    e.image_path = j.at("image_path").get<std::string>();
    e.description = j.at("description_text").get<std::string>();
    e.embedding.values = j.at("embedding").get<std::vector<double>>();
    e.tags = j.value("tags", std::vector<std::string>{});
    e.native_size = j.value("native_size", 1);
}

inline void to_json(json& j, const AssetLibrary& l) {
    j = {{"manifest_version", l.manifest_version}, {"entries", l.entries}};
}

inline void from_json(const json& j, AssetLibrary& l) {
    l.manifest_version = j.at("manifest_version").get<int>();
    if (l.manifest_version != AssetLibrary::kManifestVersion)
        throw Error(Errc::VersionMismatch, "daedalus", "manifest_version");
    l.entries = j.at("entries").get<std::vector<AssetEntry>>();
}

struct ManifestInput {
    std::string asset_id;
    std::string image_path;
    std::string description;
    std::vector<std::string> tags;
    int native_size = 1;
};

inline AssetLibrary build_manifest(const std::vector<ManifestInput>& inputs, oracle::Embedder& embedder) {
    AssetLibrary lib;
    for (const auto& in : inputs)
        lib.entries.push_back({in.asset_id, in.image_path, in.description, embedder.embed(in.description), in.tags,
                               in.native_size});
    return lib;
}

// The library used when no manifest is supplied: one entry per generic
// descriptor shipped in the default biome table and building/furniture rosters.
inline AssetLibrary builtin_library(oracle::Embedder& embedder) {
    static const std::vector<std::tuple<std::string, std::string, std::string, int>> kEntries = {
        {"flora-apple-tree", "spreading apple tree", "flora", 2},
        {"flora-oak", "oak tree", "flora", 2},
        {"flora-berry-bush", "berry bush", "flora", 1},
        {"flora-wildflowers", "wildflower patch", "flora", 1},
        {"flora-cactus", "tall cactus", "flora", 1},
        {"flora-desert-rock", "sun-bleached rock", "flora", 1},
        {"flora-fern", "giant fern", "flora", 1},
        {"flora-jungle-tree", "vine-covered tree", "flora", 2},
        {"flora-shrub-frost", "frost-covered shrub", "flora", 1},
        {"flora-snowdrift", "snow drift", "flora", 1},
        {"flora-boulder", "jagged boulder", "flora", 1},
        {"flora-pine", "hardy pine", "flora", 2},
        {"building-house-small", "small family house with a pitched roof", "building", 4},
        {"building-house-large", "large family house with a porch", "building", 5},
        {"building-city-hall", "city hall with a clock tower", "building", 6},
        {"building-workshop", "workshop with a wide door", "building", 5},
        {"building-bakery", "bakery with a chimney", "building", 5},
        {"building-smithy", "blacksmith forge", "building", 5},
        {"building-farmhouse", "farmhouse with a barn", "building", 5},
        {"building-market", "market hall with stalls", "building", 5},
        {"building-school", "schoolhouse with a bell", "building", 5},
        {"building-clinic", "healer's clinic", "building", 5},
        {"furniture-bed", "bed", "furniture", 1},
        {"furniture-table", "table", "furniture", 1},
        {"furniture-chair", "chair", "furniture", 1},
        {"furniture-shelf", "bookshelf", "furniture", 1},
        {"furniture-stove", "stove", "furniture", 1},
        {"furniture-chest", "storage chest", "furniture", 1},
        {"furniture-counter", "shop counter", "furniture", 1},
        {"furniture-workbench", "workbench", "furniture", 1},
        {"furniture-desk", "desk", "furniture", 1},
        {"furniture-bench", "bench", "furniture", 1},
    };
    AssetLibrary lib;
    for (const auto& [id, desc, tag, size] : kEntries)
        lib.entries.push_back({id, "builtin:" + id, desc, embedder.embed(desc), {tag, "viewpoint:top-down-oblique"}, size});
    return lib;
}

// ------------------------------ Operations ------------------------------

inline constexpr int kMinAssetSize = 1;
inline constexpr int kMaxAssetSize = 64;

struct SizedAssetRequest {
    std::string description;
    std::string function_tag;
    int estimated_size = 1;
};

inline int default_size_for(std::string_view function_tag) {
    static const std::map<std::string, int, std::less<>> kDefaults = {
        {"tree", 2},     {"flora", 1},    {"rock", 1},      {"furniture", 1}, {"chair", 1},
        {"table", 1},    {"bed", 2},      {"residence", 4}, {"workplace", 5}, {"civic", 6},
        {"city-hall", 6}, {"building", 5}, {"insect", 1},
    };
    auto it = kDefaults.find(function_tag);
    return it == kDefaults.end() ? 1 : it->second;
}

inline int estimate_size(const std::string& description, const std::string& function_tag, oracle::Gateway& gateway) {
    if (trim(description).empty()) throw Error(Errc::EmptyText, "daedalus", "estimate_size");
    try {
        const auto r = gateway.ask("estimate_size", {{"description", description}, {"function_tag", function_tag}},
                                   oracle::ResponseSchema::score(kMinAssetSize, kMaxAssetSize));
        const double v = r.score();
        return static_cast<int>(std::clamp<double>(std::llround(v), kMinAssetSize, kMaxAssetSize));
    } catch (const Error&) {
        return default_size_for(function_tag);
    }
}

// Argmax of cosine similarity; ties broken by the lexicographically smallest id.
inline std::string retrieve_asset(const std::string& description, const AssetLibrary& library, oracle::Embedder& embedder) {
    if (library.entries.empty()) throw Error(Errc::EmptyLibrary, "daedalus", "retrieve_asset");
    const auto query = embedder.embed(description);
    const AssetEntry* best = nullptr;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (const auto& e : library.entries) {
        const double s = oracle::cosine(query, e.embedding);
        if (s > best_sim || (s == best_sim && e.asset_id < best->asset_id)) {
            best_sim = s;
            best = &e;
        }
    }
    return best->asset_id;
}

struct ResolvedAsset {
    std::string asset_id;
    int size = 1;
};

// estimate -> retrieve; unification and background removal apply to the
// image files and run in the `assets` tooling.
inline ResolvedAsset resolve_asset(const SizedAssetRequest& request, const AssetLibrary& library, oracle::Gateway& gateway) {
    ResolvedAsset out;
    out.size = estimate_size(request.description, request.function_tag, gateway);
    out.asset_id = retrieve_asset(request.description, library, gateway.embedder());
    return out;
}

}  // namespace genworld::daedalus
