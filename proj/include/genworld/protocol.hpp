// genworld/protocol.hpp
//
// Client wire protocol. Each frame is a 4-byte big-endian payload length
// followed by one UTF-8 JSON object whose "type" field names the message.
//
//   client -> server: Hello, Subscribe, Command, InterviewStart, InterviewTurn, InterviewEnd, Ping
//   server -> client: Welcome, Snapshot, Delta, Event, InterviewReply, Error, Pong
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "genworld/world.hpp"

namespace genworld::protocol {

using namespace genworld::world;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 16u << 20;
inline constexpr int kMaxRegionTiles = 128 * 128;

[[noreturn]] inline void protocol_error(const std::string& why) { throw Error(Errc::ProtocolError, "simserver", why); }

// ------------------------------ Framing ------------------------------

inline std::string encode_frame(const json& message) {
    const std::string body = message.dump();
    if (body.size() > kMaxFrameBytes) protocol_error("frame too large");
    const auto n = static_cast<std::uint32_t>(body.size());
    std::string out;
    out.reserve(4 + body.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out += body;
    return out;
}

// Incremental decoder: feed raw bytes, pop complete messages.
class FrameDecoder {
public:
    void feed(const char* data, std::size_t n) { buffer_.append(data, n); }
    void feed(std::string_view s) { feed(s.data(), s.size()); }

    // Throws ProtocolError on an oversized frame or a payload that is not a JSON object.
    std::optional<json> next() {
        if (buffer_.size() < 4) return std::nullopt;
        const auto* b = reinterpret_cast<const unsigned char*>(buffer_.data());
        const std::uint32_t n = (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
        if (n > kMaxFrameBytes) protocol_error("frame of " + std::to_string(n) + " bytes exceeds limit");
        if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
        const std::string body = buffer_.substr(4, n);
        buffer_.erase(0, 4 + static_cast<std::size_t>(n));
        json j = json::parse(body, nullptr, false);
        if (j.is_discarded()) protocol_error("malformed json");
        if (!j.is_object()) protocol_error("message must be a json object");
        return j;
    }

    std::size_t buffered() const { return buffer_.size(); }

private:
    std::string buffer_;
};

// ------------------------------ Client messages ------------------------------

struct Region {
    int x = 0, y = 0, w = 0, h = 0;
    bool contains(Tile t) const { return t.x >= x && t.y >= y && t.x < x + w && t.y < y + h; }
    bool operator==(const Region&) const = default;
};

inline void to_json(json& j, const Region& r) { j = {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

struct Hello {
    std::string client_name;
    int protocol_version = 0;
};
struct Subscribe {
    std::optional<Region> region;
    std::optional<NpcId> npc;
    bool events = false;
};
struct Command {
    std::string text;
    NpcId target_npc;
};
struct InterviewStart {
    NpcId npc;
};
struct InterviewTurn {
    std::uint64_t session = 0;
    std::string text;
};
struct InterviewEnd {
    std::uint64_t session = 0;
    bool remember = false;
};
struct Ping {};

using ClientMessage = std::variant<Hello, Subscribe, Command, InterviewStart, InterviewTurn, InterviewEnd, Ping>;

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.contains(key)) protocol_error(std::string("missing field ") + key);
    return j[key];
}

inline std::string string_field(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) protocol_error(std::string(key) + " must be a string");
    return v.get<std::string>();
}

inline std::int64_t int_field(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number_integer()) protocol_error(std::string(key) + " must be an integer");
    return v.get<std::int64_t>();
}

inline std::uint64_t id_field(const json& j, const char* key) {
    const auto v = int_field(j, key);
    if (v < 0) protocol_error(std::string(key) + " must be non-negative");
    return static_cast<std::uint64_t>(v);
}

}  // namespace detail

inline ClientMessage parse_client_message(const json& j) {
    using namespace detail;
    if (!j.is_object()) protocol_error("message must be a json object");
    const auto type = string_field(j, "type");
    if (type == "Hello") return Hello{string_field(j, "client_name"), static_cast<int>(int_field(j, "protocol_version"))};
    if (type == "Subscribe") {
        Subscribe s;
        if (j.contains("region") && !j["region"].is_null()) {
            const auto& r = j["region"];
            if (!r.is_object()) protocol_error("region must be an object");
            Region reg{static_cast<int>(int_field(r, "x")), static_cast<int>(int_field(r, "y")), static_cast<int>(int_field(r, "w")),
                       static_cast<int>(int_field(r, "h"))};
            if (reg.w <= 0 || reg.h <= 0) protocol_error("region must have positive size");
            if (static_cast<std::int64_t>(reg.w) * reg.h > kMaxRegionTiles) protocol_error("region too large");
            s.region = reg;
        }
        if (j.contains("npc") && !j["npc"].is_null()) s.npc = NpcId(id_field(j, "npc"));
        if (j.contains("events")) {
            if (!j["events"].is_boolean()) protocol_error("events must be a boolean");
            s.events = j["events"].get<bool>();
        }
        if (!s.region && !s.npc && !s.events) protocol_error("subscribe names no feed");
        return s;
    }
    if (type == "Command") return Command{string_field(j, "text"), NpcId(id_field(j, "target_npc"))};
    if (type == "InterviewStart") return InterviewStart{NpcId(id_field(j, "npc"))};
    if (type == "InterviewTurn") return InterviewTurn{id_field(j, "session"), string_field(j, "text")};
    if (type == "InterviewEnd") {
        const auto& r = field(j, "remember");
        if (!r.is_boolean()) protocol_error("remember must be a boolean");
        return InterviewEnd{id_field(j, "session"), r.get<bool>()};
    }
    if (type == "Ping") return Ping{};
    protocol_error("unknown message type " + type);
}

// Client-side builders, used by the tool, the samples and the tests.
inline json hello(const std::string& name, int version = kProtocolVersion) {
    return {{"type", "Hello"}, {"client_name", name}, {"protocol_version", version}};
}
inline json subscribe_region(Region r) { return {{"type", "Subscribe"}, {"region", r}}; }
inline json subscribe_npc(NpcId id) { return {{"type", "Subscribe"}, {"npc", id.value}}; }
inline json subscribe_events() { return {{"type", "Subscribe"}, {"events", true}}; }
inline json command(NpcId target, const std::string& text) { return {{"type", "Command"}, {"target_npc", target.value}, {"text", text}}; }
inline json interview_start(NpcId id) { return {{"type", "InterviewStart"}, {"npc", id.value}}; }
inline json interview_turn(std::uint64_t session, const std::string& text) {
    return {{"type", "InterviewTurn"}, {"session", session}, {"text", text}};
}
inline json interview_end(std::uint64_t session, bool remember) {
    return {{"type", "InterviewEnd"}, {"session", session}, {"remember", remember}};
}
inline json ping() { return {{"type", "Ping"}}; }

// ------------------------------ Server messages ------------------------------

inline json error_message(Errc code, const std::string& message) {
    return {{"type", "Error"}, {"code", errc_name(code)}, {"message", message}};
}
inline json pong() { return {{"type", "Pong"}}; }
inline json event_message(const Event& e) {
    return {{"type", "Event"}, {"seq", e.seq}, {"at", e.at}, {"kind", e.kind}, {"payload", e.payload}};
}
inline json interview_reply(std::uint64_t session, const std::string& text) {
    return {{"type", "InterviewReply"}, {"session", session}, {"text", text}};
}

// What a client sees of one npc.
inline json npc_entity(const World& w, NpcId id) {
    const auto& s = w.npcs.at(id);
    const auto* e = w.current_entry(id);
    json j = {{"id", id.value},
              {"name", w.profile(id).name},
              {"x", s.position.x},
              {"y", s.position.y},
              {"awake", w.awake(id)},
              {"activity", e ? e->activity : std::string("sleeping")}};
    j["conversation"] = s.conversation ? json(s.conversation->value) : json(nullptr);
    return j;
}

inline json welcome(const World& w, std::uint64_t session_id) {
    json npcs = json::array();
    for (const auto& p : w.population.profiles) npcs.push_back({{"id", p.id.value}, {"name", p.name}});
    json buildings = json::array();
    for (const auto& b : w.settlement.buildings)
        buildings.push_back({{"id", b.id.value}, {"name", building_name(w, b.id)}, {"x", b.origin.x}, {"y", b.origin.y},
                             {"w", b.spec.width}, {"h", b.spec.height}});
    return {{"type", "Welcome"},
            {"protocol_version", kProtocolVersion},
            {"session_id", session_id},
            {"world",
             {{"description", w.spec.description},
              {"seed", w.spec.seed},
              {"width", w.spec.width},
              {"height", w.spec.height},
              {"tick", w.clock.tick},
              {"day", w.day()},
              {"minute", w.minute()},
              {"npcs", npcs},
              {"buildings", buildings}}}};
}

// Region snapshot: biome ids row-major, a legend, and everything standing in it.
inline json snapshot(const World& w, const std::optional<Region>& region, const std::optional<NpcId>& npc) {
    json out = {{"type", "Snapshot"}, {"tick", w.clock.tick}};
    json entities = json::array();
    if (region) {
        const int x0 = std::clamp(region->x, 0, w.terrain.width), y0 = std::clamp(region->y, 0, w.terrain.height);
        const int x1 = std::clamp(region->x + region->w, 0, w.terrain.width), y1 = std::clamp(region->y + region->h, 0, w.terrain.height);
        const Region r{x0, y0, x1 - x0, y1 - y0};
        std::vector<int> tiles;
        std::set<std::uint16_t> used;
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x) {
                const auto b = w.terrain.biome_ids[w.terrain.index({x, y})];
                tiles.push_back(b);
                used.insert(b);
            }
        json legend = json::object();
        for (auto b : used) legend[std::to_string(b)] = w.biomes.biomes.at(b).generic_id;
        json roads = json::array();
        for (const auto& t : w.roads.road_tiles)
            if (r.contains(t)) roads.push_back({t.x, t.y});
        json buildings = json::array();
        for (const auto& b : w.settlement.buildings) {
            const auto f = b.footprint();
            if (f.x < r.x + r.w && r.x < f.x + f.w && f.y < r.y + r.h && r.y < f.y + f.h)
                buildings.push_back({{"id", b.id.value}, {"name", building_name(w, b.id)}, {"x", f.x}, {"y", f.y}, {"w", f.w}, {"h", f.h},
                                     {"asset_ref", b.asset_ref}});
        }
        json flora = json::array();
        for (const auto& f : w.flora)
            if (r.contains(f.position))
                flora.push_back({{"id", f.id.value}, {"x", f.position.x}, {"y", f.position.y}, {"descriptor", f.descriptor}, {"asset_ref", f.asset_ref}});
        json objects = json::array();
        for (const auto& o : w.objects)
            if (r.contains(o.tile))
                objects.push_back({{"id", o.id.value}, {"x", o.tile.x}, {"y", o.tile.y}, {"tag", o.tag}, {"state", o.state}});
        for (const auto& [id, s] : w.npcs)
            if (r.contains(s.position)) entities.push_back(npc_entity(w, id));
        out["region"] = r;
        out["tiles"] = std::move(tiles);
        out["legend"] = std::move(legend);
        out["roads"] = std::move(roads);
        out["buildings"] = std::move(buildings);
        out["flora"] = std::move(flora);
        out["objects"] = std::move(objects);
    }
    if (npc && w.npcs.count(*npc)) {
        const bool listed = std::any_of(entities.begin(), entities.end(), [&](const json& e) { return e["id"] == npc->value; });
        if (!listed) entities.push_back(npc_entity(w, *npc));
    }
    out["entities"] = std::move(entities);
    return out;
}

// Npc ids an event is about, used to route npc subscriptions.
inline std::set<NpcId> event_npcs(const json& payload) {
    std::set<NpcId> out;
    auto take = [&](const json& v) {
        if (v.is_number_unsigned() || v.is_number_integer()) out.insert(NpcId(v.get<std::uint64_t>()));
    };
    for (const char* key : {"npc_id", "speaker", "proposer", "initiator", "joiner", "npc"})
        if (payload.contains(key)) take(payload[key]);
    for (const char* key : {"participants", "invitees", "targets"})
        if (payload.contains(key) && payload[key].is_array())
            for (const auto& v : payload[key]) take(v);
    return out;
}

}  // namespace genworld::protocol
