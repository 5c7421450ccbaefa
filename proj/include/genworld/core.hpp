// genworld/core.hpp
//
// Shared vocabulary for the world generator and simulation:
// - strong ids for npcs, buildings, memories, plans, conversations, objects
// - tile coordinates and rectangles
// - the single error type (code + module tag) used across the library
// - a splitmix64 RNG whose streams are stable across platforms
// - order-insensitive stable hashing for oracle script keys
//
#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace genworld {

using json = nlohmann::json;

// ------------------------------ Ids ------------------------------

template <class Tag, class Rep = std::uint32_t>
struct StrongId {
    Rep value{};

    constexpr StrongId() = default;
    constexpr explicit StrongId(Rep v) : value(v) {}

    constexpr auto operator<=>(const StrongId&) const = default;
};

template <class Tag, class Rep>
void to_json(json& j, const StrongId<Tag, Rep>& id) { j = id.value; }

template <class Tag, class Rep>
void from_json(const json& j, StrongId<Tag, Rep>& id) { id.value = j.get<Rep>(); }

using NpcId = StrongId<struct NpcTag>;
using BuildingId = StrongId<struct BuildingTag>;
using FamilyId = StrongId<struct FamilyTag>;
using ObjectId = StrongId<struct ObjectTag>;
using MemoryId = StrongId<struct MemoryTag, std::uint64_t>;
using PlanId = StrongId<struct PlanTag, std::uint64_t>;
using ConversationId = StrongId<struct ConversationTag, std::uint64_t>;

// ------------------------------ Geometry ------------------------------

struct Tile {
    int x = 0;
    int y = 0;

    constexpr auto operator<=>(const Tile&) const = default;
};

inline void to_json(json& j, const Tile& t) { j = json::array({t.x, t.y}); }
inline void from_json(const json& j, Tile& t) {
    t.x = j.at(0).get<int>();
    t.y = j.at(1).get<int>();
}

inline std::ostream& operator<<(std::ostream& os, Tile t) { return os << "(" << t.x << "," << t.y << ")"; }

inline int manhattan(Tile a, Tile b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }
inline int chebyshev(Tile a, Tile b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

// Half-open tile rectangle [x, x+w) x [y, y+h).
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool contains(Tile t) const { return t.x >= x && t.x < x + w && t.y >= y && t.y < y + h; }
    bool intersects(const Rect& o) const {
        return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
    }
    Rect inflated(int d) const { return {x - d, y - d, w + 2 * d, h + 2 * d}; }

    bool operator==(const Rect&) const = default;
};

inline void to_json(json& j, const Rect& r) { j = json::array({r.x, r.y, r.w, r.h}); }
inline void from_json(const json& j, Rect& r) {
    r = {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

// Chebyshev distance between the closest tiles of two rectangles (0 when they overlap).
inline int rect_gap(const Rect& a, const Rect& b) {
    const int dx = std::max({0, a.x - (b.x + b.w - 1), b.x - (a.x + a.w - 1)});
    const int dy = std::max({0, a.y - (b.y + b.h - 1), b.y - (a.y + a.h - 1)});
    return std::max(dx, dy);
}

// ------------------------------ Errors ------------------------------

enum class Errc {
    // oracle
    MissingScriptEntry,
    SchemaViolation,
    EmptyText,
    Timeout,
    TransportError,
    // gaia
    InvalidParams,
    UncoveredTriple,
    // daedalus
    EmptyLibrary,
    EmptyPalette,
    // hephaestus
    PopulationTooLarge,
    InsufficientBuildableArea,
    NoPath,
    DisconnectedSettlement,
    // pygmalion
    OutOfRange,
    AlreadyInConversation,
    NoFeasibleDay,
    // wordofgod
    UnknownNpc,
    UnknownLocation,
    UnparseableCommand,
    TargetBusy,
    SessionClosed,
    // simserver
    VersionMismatch,
    CorruptSave,
    InvariantViolation,
    IoError,
    ProtocolError,
};

inline std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::MissingScriptEntry: return "MissingScriptEntry";
        case Errc::SchemaViolation: return "SchemaViolation";
        case Errc::EmptyText: return "EmptyText";
        case Errc::Timeout: return "Timeout";
        case Errc::TransportError: return "TransportError";
        case Errc::InvalidParams: return "InvalidParams";
        case Errc::UncoveredTriple: return "UncoveredTriple";
        case Errc::EmptyLibrary: return "EmptyLibrary";
        case Errc::EmptyPalette: return "EmptyPalette";
        case Errc::PopulationTooLarge: return "PopulationTooLarge";
        case Errc::InsufficientBuildableArea: return "InsufficientBuildableArea";
        case Errc::NoPath: return "NoPath";
        case Errc::DisconnectedSettlement: return "DisconnectedSettlement";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::AlreadyInConversation: return "AlreadyInConversation";
        case Errc::NoFeasibleDay: return "NoFeasibleDay";
        case Errc::UnknownNpc: return "UnknownNpc";
        case Errc::UnknownLocation: return "UnknownLocation";
        case Errc::UnparseableCommand: return "UnparseableCommand";
        case Errc::TargetBusy: return "TargetBusy";
        case Errc::SessionClosed: return "SessionClosed";
        case Errc::VersionMismatch: return "VersionMismatch";
        case Errc::CorruptSave: return "CorruptSave";
        case Errc::InvariantViolation: return "InvariantViolation";
        case Errc::IoError: return "IoError";
        case Errc::ProtocolError: return "ProtocolError";
    }
    return "Unknown";
}

inline Errc errc_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(Errc::ProtocolError); ++i)
        if (errc_name(static_cast<Errc>(i)) == name) return static_cast<Errc>(i);
    return Errc::TransportError;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string module, const std::string& detail)
        : std::runtime_error(std::string(module) + ": " + std::string(errc_name(code)) +
                             (detail.empty() ? "" : " (" + detail + ")")),
          code_(code),
          module_(std::move(module)),
          detail_(detail) {}

    Errc code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string module_;
    std::string detail_;
};

// ------------------------------ RNG ------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64(s);
}

// Platform-stable random stream. std:: distributions are implementation-defined,
// so all sampling goes through these members.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform integer in [lo, hi] (inclusive), unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64());
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t r = next_u64();
        while (r >= limit) r = next_u64();
        return lo + static_cast<std::int64_t>(r % span);
    }

    // Uniform real in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    bool chance(double p) { return uniform01() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent child stream; does not advance this one.
    Rng fork(std::uint64_t salt) const { return Rng(mix64(state_ ^ mix64(salt))); }

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

private:
    std::uint64_t state_;
};

// ------------------------------ Hashing ------------------------------

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

using SlotValues = std::map<std::string, std::string>;

// Order-insensitive: the map is sorted by slot name, and every name/value is
// length-prefixed so ("ab","c") and ("a","bc") cannot collide structurally.
inline std::string slot_hash(const SlotValues& slots) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [name, value] : slots) {
        h = fnv1a64(std::to_string(name.size()) + ":" + name, h);
        h = fnv1a64(std::to_string(value.size()) + ":" + value, h);
    }
    return hex64(h);
}

// ------------------------------ Text helpers ------------------------------

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline bool contains_ci(std::string_view hay, std::string_view needle) {
    return to_lower(hay).find(to_lower(needle)) != std::string::npos;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}


inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        const std::uint32_t b0 = bytes[i];
        const std::uint32_t b1 = i + 1 < bytes.size() ? bytes[i + 1] : 0;
        const std::uint32_t b2 = i + 2 < bytes.size() ? bytes[i + 2] : 0;
        const std::uint32_t v = (b0 << 16) | (b1 << 8) | b2;
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += i + 1 < bytes.size() ? table[(v >> 6) & 63] : '=';
        out += i + 2 < bytes.size() ? table[v & 63] : '=';
    }
    return out;
}

// Throws std::invalid_argument on malformed input.
inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw std::invalid_argument("base64 length");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + static_cast<std::size_t>(k)];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                v[k] = 0;
                ++pad;
            } else {
                v[k] = value(c);
                if (v[k] < 0 || pad) throw std::invalid_argument("base64 character");
            }
        }
        const std::uint32_t n = (static_cast<std::uint32_t>(v[0]) << 18) | (static_cast<std::uint32_t>(v[1]) << 12) |
                                (static_cast<std::uint32_t>(v[2]) << 6) | static_cast<std::uint32_t>(v[3]);
        out.push_back(static_cast<std::uint8_t>(n >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((n >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(n & 0xFF));
    }
    return out;
}

}  // namespace genworld

template <class Tag, class Rep>
struct std::hash<genworld::StrongId<Tag, Rep>> {
    std::size_t operator()(const genworld::StrongId<Tag, Rep>& id) const noexcept {
        return std::hash<Rep>{}(id.value);
    }
};
