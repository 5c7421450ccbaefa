// genworld/world.hpp
//
// Runtime world state shared by the agent runtime, the command layer and the
// simulation loop: objects, NPC state, conversations, plans, events, clock.
#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genworld/core.hpp"
#include "genworld/gaia.hpp"
#include "genworld/hephaestus.hpp"
#include "genworld/memory.hpp"
#include "genworld/moira.hpp"
#include "genworld/pathing.hpp"
#include "genworld/routine.hpp"

namespace genworld::world {

using memory::SimTime;
using routine::Location;

// ------------------------------ Config ------------------------------

struct RuntimeConfig {
    int perception_radius = 8;
    int observation_cooldown = 30;
    double deviation_threshold = 0.5;
    int deviation_minutes = 30;
    int conversation_radius = 3;
    int max_turns = 12;
    std::size_t poll_k = 3;
    int plan_horizon = 7;
    int evening_start = 1080;
    int evening_end = 1200;
    int wake = routine::kDefaultWake;
    int sleep = routine::kDefaultSleep;
    int engagement_timeout = 60;
    double urgency_burning = 0.9;
    double urgency_conversation = 0.4;
    double urgency_routine = 0.1;
    memory::ScoreWeights weights;

    bool operator==(const RuntimeConfig&) const = default;
};

inline void to_json(json& j, const RuntimeConfig& c) {
    j = {{"perception_radius", c.perception_radius},
         {"observation_cooldown", c.observation_cooldown},
         {"deviation_threshold", c.deviation_threshold},
         {"deviation_minutes", c.deviation_minutes},
         {"conversation_radius", c.conversation_radius},
         {"max_turns", c.max_turns},
         {"poll_k", c.poll_k},
         {"plan_horizon", c.plan_horizon},
         {"evening_start", c.evening_start},
         {"evening_end", c.evening_end},
         {"wake", c.wake},
         {"sleep", c.sleep},
         {"engagement_timeout", c.engagement_timeout},
         {"urgency_burning", c.urgency_burning},
         {"urgency_conversation", c.urgency_conversation},
         {"urgency_routine", c.urgency_routine},
         {"weights", {c.weights.alpha, c.weights.beta, c.weights.gamma, c.weights.decay_per_hour}}};
}

inline void from_json(const json& j, RuntimeConfig& c) {
    c.perception_radius = j.at("perception_radius").get<int>();
    c.observation_cooldown = j.at("observation_cooldown").get<int>();
    c.deviation_threshold = j.at("deviation_threshold").get<double>();
    c.deviation_minutes = j.at("deviation_minutes").get<int>();
    c.conversation_radius = j.at("conversation_radius").get<int>();
    c.max_turns = j.at("max_turns").get<int>();
    c.poll_k = j.at("poll_k").get<std::size_t>();
    c.plan_horizon = j.at("plan_horizon").get<int>();
    c.evening_start = j.at("evening_start").get<int>();
    c.evening_end = j.at("evening_end").get<int>();
    c.wake = j.at("wake").get<int>();
    c.sleep = j.at("sleep").get<int>();
    c.engagement_timeout = j.at("engagement_timeout").get<int>();
    c.urgency_burning = j.at("urgency_burning").get<double>();
    c.urgency_conversation = j.at("urgency_conversation").get<double>();
    c.urgency_routine = j.at("urgency_routine").get<double>();
    const auto& w = j.at("weights");
    c.weights = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>(), w.at(3).get<double>()};
}

// ------------------------------ Objects ------------------------------

// A piece of furniture in world coordinates. `state` is empty for objects
// nobody would notice; anything else ("burning") is perceivable.
struct WorldObject {
    ObjectId id;
    BuildingId building;
    Tile tile;
    std::string tag;
    std::string description;
    std::string asset_ref;
    std::string state;

    bool operator==(const WorldObject&) const = default;
};

inline void to_json(json& j, const WorldObject& o) {
    j = {{"object_id", o.id},         {"building", o.building},   {"tile", o.tile},  {"tag", o.tag},
         {"description", o.description}, {"asset_ref", o.asset_ref}, {"state", o.state}};
}

inline void from_json(const json& j, WorldObject& o) {
    o.id = j.at("object_id").get<ObjectId>();
    o.building = j.at("building").get<BuildingId>();
    o.tile = j.at("tile").get<Tile>();
    o.tag = j.at("tag").get<std::string>();
    o.description = j.at("description").get<std::string>();
    o.asset_ref = j.at("asset_ref").get<std::string>();
    o.state = j.at("state").get<std::string>();
}

// ------------------------------ Conversations ------------------------------

enum class Phase { OutlineGeneration, ProposalDetection, ProposalDecision, DialogueRefinement, Ended };

inline std::string_view phase_name(Phase p) {
    switch (p) {
        case Phase::OutlineGeneration: return "outline_generation";
        case Phase::ProposalDetection: return "proposal_detection";
        case Phase::ProposalDecision: return "proposal_decision";
        case Phase::DialogueRefinement: return "dialogue_refinement";
        case Phase::Ended: return "ended";
    }
    return "ended";
}

inline Phase phase_from_name(std::string_view s) {
    for (auto p : {Phase::OutlineGeneration, Phase::ProposalDetection, Phase::ProposalDecision, Phase::DialogueRefinement,
                   Phase::Ended})
        if (phase_name(p) == s) return p;
    throw Error(Errc::CorruptSave, "pygmalion", "unknown conversation phase " + std::string(s));
}

// Edges of the conversation graph, plus the failure exit to Ended from any live phase.
inline bool valid_transition(Phase from, Phase to) {
    if (from == Phase::Ended) return false;
    if (to == Phase::Ended) return true;
    switch (from) {
        case Phase::OutlineGeneration: return to == Phase::ProposalDetection;
        case Phase::ProposalDetection: return to == Phase::ProposalDecision || to == Phase::DialogueRefinement;
        case Phase::ProposalDecision: return to == Phase::DialogueRefinement;
        case Phase::DialogueRefinement: return to == Phase::OutlineGeneration;
        case Phase::Ended: return false;
    }
    return false;
}

inline bool valid_walk(const std::vector<Phase>& history) {
    if (history.empty() || history.front() != Phase::OutlineGeneration) return false;
    for (std::size_t i = 1; i < history.size(); ++i)
        if (!valid_transition(history[i - 1], history[i])) return false;
    return true;
}

struct Utterance {
    NpcId speaker;
    std::string text;
    SimTime at = 0;

    bool operator==(const Utterance&) const = default;
};

inline void to_json(json& j, const Utterance& u) { j = {{"speaker", u.speaker}, {"text", u.text}, {"at", u.at}}; }
inline void from_json(const json& j, Utterance& u) {
    u.speaker = j.at("speaker").get<NpcId>();
    u.text = j.at("text").get<std::string>();
    u.at = j.at("at").get<SimTime>();
}

struct Conversation {
    ConversationId id;
    std::vector<NpcId> participants;
    Phase phase = Phase::OutlineGeneration;
    std::string context;
    std::string outline;
    std::vector<Utterance> transcript;
    std::optional<Utterance> draft;  // drafted in ProposalDetection, appended in DialogueRefinement
    std::optional<PlanId> pending_proposal;
    int turn_count = 0;
    int max_turns = 12;
    std::vector<Phase> history;
    bool degraded = false;  // an oracle call failed; summaries are templated
    SimTime started_at = 0;
    SimTime ended_at = -1;

    bool active() const { return phase != Phase::Ended; }
    int utterances_by(NpcId npc) const {
        return static_cast<int>(std::count_if(transcript.begin(), transcript.end(), [npc](const Utterance& u) { return u.speaker == npc; }));
    }
    bool operator==(const Conversation&) const = default;
};

inline void to_json(json& j, const Conversation& c) {
    json history = json::array();
    for (auto p : c.history) history.push_back(phase_name(p));
    j = {{"conversation_id", c.id}, {"participants", c.participants}, {"phase", phase_name(c.phase)},
         {"context", c.context},    {"outline", c.outline},           {"transcript", c.transcript},
         {"turn_count", c.turn_count}, {"max_turns", c.max_turns},   {"history", history},
         {"degraded", c.degraded},  {"started_at", c.started_at},     {"ended_at", c.ended_at}};
    j["draft"] = c.draft ? json(*c.draft) : json(nullptr);
    j["pending_proposal"] = c.pending_proposal ? json(*c.pending_proposal) : json(nullptr);
}

inline void from_json(const json& j, Conversation& c) {
    c.id = j.at("conversation_id").get<ConversationId>();
    c.participants = j.at("participants").get<std::vector<NpcId>>();
    c.phase = phase_from_name(j.at("phase").get<std::string>());
    c.context = j.at("context").get<std::string>();
    c.outline = j.at("outline").get<std::string>();
    c.transcript = j.at("transcript").get<std::vector<Utterance>>();
    c.turn_count = j.at("turn_count").get<int>();
    c.max_turns = j.at("max_turns").get<int>();
    c.history.clear();
    for (const auto& p : j.at("history")) c.history.push_back(phase_from_name(p.get<std::string>()));
    c.degraded = j.at("degraded").get<bool>();
    c.started_at = j.at("started_at").get<SimTime>();
    c.ended_at = j.at("ended_at").get<SimTime>();
    c.draft.reset();
    if (!j.at("draft").is_null()) c.draft = j.at("draft").get<Utterance>();
    c.pending_proposal.reset();
    if (!j.at("pending_proposal").is_null()) c.pending_proposal = j.at("pending_proposal").get<PlanId>();
}

// ------------------------------ Plans ------------------------------

enum class PlanStatus { Proposed, Scheduled, Cancelled, Completed };
enum class Decision { Pending, Accepted, Rejected };

inline std::string_view plan_status_name(PlanStatus s) {
    switch (s) {
        case PlanStatus::Proposed: return "proposed";
        case PlanStatus::Scheduled: return "scheduled";
        case PlanStatus::Cancelled: return "cancelled";
        case PlanStatus::Completed: return "completed";
    }
    return "proposed";
}

inline PlanStatus plan_status_from_name(std::string_view s) {
    for (auto v : {PlanStatus::Proposed, PlanStatus::Scheduled, PlanStatus::Cancelled, PlanStatus::Completed})
        if (plan_status_name(v) == s) return v;
    throw Error(Errc::CorruptSave, "pygmalion", "unknown plan status " + std::string(s));
}

inline std::string_view decision_name(Decision d) {
    switch (d) {
        case Decision::Pending: return "pending";
        case Decision::Accepted: return "accepted";
        case Decision::Rejected: return "rejected";
    }
    return "pending";
}

inline Decision decision_from_name(std::string_view s) {
    for (auto v : {Decision::Pending, Decision::Accepted, Decision::Rejected})
        if (decision_name(v) == s) return v;
    throw Error(Errc::CorruptSave, "pygmalion", "unknown plan decision " + std::string(s));
}

struct Plan {
    PlanId id;
    NpcId proposer;
    std::vector<NpcId> invitees;
    std::map<NpcId, Decision> decisions;
    int requested_day = 0;
    int scheduled_day = -1;
    int start = 0;
    int end = 0;
    Location location;
    std::string activity;
    PlanStatus status = PlanStatus::Proposed;
    ConversationId conversation;  // 0 when proposed by a command
    bool unschedulable_reported = false;

    bool accepted_by_any() const {
        for (const auto& [_, d] : decisions)
            if (d == Decision::Accepted) return true;
        return false;
    }
    // Proposer first, then accepting invitees in invitation order.
    std::vector<NpcId> participants() const {
        std::vector<NpcId> out{proposer};
        for (auto n : invitees)
            if (auto it = decisions.find(n); it != decisions.end() && it->second == Decision::Accepted) out.push_back(n);
        return out;
    }
    bool operator==(const Plan&) const = default;
};

inline void to_json(json& j, const Plan& p) {
    json decisions = json::object();
    for (const auto& [npc, d] : p.decisions) decisions[std::to_string(npc.value)] = decision_name(d);
    j = {{"plan_id", p.id},
         {"proposer", p.proposer},
         {"invitees", p.invitees},
         {"decisions", decisions},
         {"requested_day", p.requested_day},
         {"scheduled_day", p.scheduled_day},
         {"start", p.start},
         {"end", p.end},
         {"location", p.location},
         {"activity", p.activity},
         {"status", plan_status_name(p.status)},
         {"conversation", p.conversation},
         {"unschedulable_reported", p.unschedulable_reported}};
}

inline void from_json(const json& j, Plan& p) {
    p.id = j.at("plan_id").get<PlanId>();
    p.proposer = j.at("proposer").get<NpcId>();
    p.invitees = j.at("invitees").get<std::vector<NpcId>>();
    p.decisions.clear();
    for (const auto& [k, v] : j.at("decisions").items())
        p.decisions[NpcId(static_cast<std::uint32_t>(std::stoul(k)))] = decision_from_name(v.get<std::string>());
    p.requested_day = j.at("requested_day").get<int>();
    p.scheduled_day = j.at("scheduled_day").get<int>();
    p.start = j.at("start").get<int>();
    p.end = j.at("end").get<int>();
    p.location = j.at("location").get<Location>();
    p.activity = j.at("activity").get<std::string>();
    p.status = plan_status_from_name(j.at("status").get<std::string>());
    p.conversation = j.at("conversation").get<ConversationId>();
    p.unschedulable_reported = j.at("unschedulable_reported").get<bool>();
}

// ------------------------------ Events, observations, commands ------------------------------

struct Event {
    std::uint64_t seq = 0;
    SimTime at = 0;
    std::string kind;
    json payload;

    bool operator==(const Event&) const = default;
};

inline void to_json(json& j, const Event& e) { j = {{"seq", e.seq}, {"at", e.at}, {"kind", e.kind}, {"payload", e.payload}}; }
inline void from_json(const json& j, Event& e) {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.at = j.at("at").get<SimTime>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.at("payload");
}

enum class SubjectKind { Npc, Object };

struct Observation {
    NpcId observer;
    SubjectKind subject_kind = SubjectKind::Npc;
    std::uint32_t subject = 0;
    std::string subject_name;
    std::string subject_state;
    int distance = 0;
    double urgency = 0.0;
    SimTime at = 0;

    std::string text() const { return subject_name + " is " + subject_state; }
};

struct PendingEngagement {
    std::vector<NpcId> targets;
    std::string intent;
    SimTime expires = 0;
    std::uint64_t command_id = 0;

    bool operator==(const PendingEngagement&) const = default;
};

inline void to_json(json& j, const PendingEngagement& p) {
    j = {{"targets", p.targets}, {"intent", p.intent}, {"expires", p.expires}, {"command_id", p.command_id}};
}
inline void from_json(const json& j, PendingEngagement& p) {
    p.targets = j.at("targets").get<std::vector<NpcId>>();
    p.intent = j.at("intent").get<std::string>();
    p.expires = j.at("expires").get<SimTime>();
    p.command_id = j.at("command_id").get<std::uint64_t>();
}

struct NpcState {
    NpcId id;
    Tile position;
    std::vector<Tile> path;  // remaining steps, next step last
    std::optional<ConversationId> conversation;
    int last_conversation_day = -1;
    std::optional<PendingEngagement> engagement;

    bool operator==(const NpcState&) const = default;
};

inline void to_json(json& j, const NpcState& s) {
    j = {{"npc_id", s.id}, {"position", s.position}, {"path", s.path}, {"last_conversation_day", s.last_conversation_day}};
    j["conversation"] = s.conversation ? json(*s.conversation) : json(nullptr);
    j["engagement"] = s.engagement ? json(*s.engagement) : json(nullptr);
}

inline void from_json(const json& j, NpcState& s) {
    s.id = j.at("npc_id").get<NpcId>();
    s.position = j.at("position").get<Tile>();
    s.path = j.at("path").get<std::vector<Tile>>();
    s.last_conversation_day = j.at("last_conversation_day").get<int>();
    s.conversation.reset();
    if (!j.at("conversation").is_null()) s.conversation = j.at("conversation").get<ConversationId>();
    s.engagement.reset();
    if (!j.at("engagement").is_null()) s.engagement = j.at("engagement").get<PendingEngagement>();
}

// A player instruction waiting in the FIFO. `steps` holds the validated
// decomposition once parsed, so a queued command is not parsed twice.
struct PlayerCommand {
    std::uint64_t id = 0;
    std::string issuer;
    NpcId target;
    std::string text;
    SimTime submitted_at = 0;
    std::optional<json> steps;
    std::size_t next_step = 0;
    bool busy_reported = false;

    bool operator==(const PlayerCommand&) const = default;
};

inline void to_json(json& j, const PlayerCommand& c) {
    j = {{"command_id", c.id}, {"issuer", c.issuer}, {"target", c.target}, {"text", c.text},
         {"submitted_at", c.submitted_at}, {"next_step", c.next_step}, {"busy_reported", c.busy_reported}};
    j["steps"] = c.steps ? *c.steps : json(nullptr);
}

inline void from_json(const json& j, PlayerCommand& c) {
    c.id = j.at("command_id").get<std::uint64_t>();
    c.issuer = j.at("issuer").get<std::string>();
    c.target = j.at("target").get<NpcId>();
    c.text = j.at("text").get<std::string>();
    c.submitted_at = j.at("submitted_at").get<SimTime>();
    c.next_step = j.at("next_step").get<std::size_t>();
    c.busy_reported = j.at("busy_reported").get<bool>();
    c.steps.reset();
    if (!j.at("steps").is_null()) c.steps = j.at("steps");
}

// ------------------------------ Clock ------------------------------

struct Clock {
    std::int64_t tick = 0;
    int minutes_per_tick = 1;
    int day_length = 1440;

    SimTime now() const { return tick * minutes_per_tick; }
    int day() const { return static_cast<int>(now() / day_length); }
    int minute_of_day() const { return static_cast<int>(now() % day_length); }

    bool operator==(const Clock&) const = default;
};

// ------------------------------ World ------------------------------

struct World {
    gaia::WorldSpec spec;
    RuntimeConfig config;
    gaia::BiomeTable biomes;
    gaia::TerrainGrid terrain;  // road discount applied
    hephaestus::Settlement settlement;
    std::vector<hephaestus::Interior> interiors;
    hephaestus::RoadNetwork roads;
    std::vector<gaia::NaturalObject> flora;
    std::vector<WorldObject> objects;
    moira::Population population;
    memory::MemoryBank memories;
    std::map<std::pair<NpcId, int>, routine::Routine> routines;
    std::map<PlanId, Plan> plans;
    std::uint64_t next_plan_id = 1;
    std::map<NpcId, std::vector<PlanId>> plan_buffer;
    std::map<ConversationId, Conversation> conversations;
    std::uint64_t next_conversation_id = 1;
    std::vector<Event> events;
    std::uint64_t next_event_seq = 1;
    std::deque<PlayerCommand> commands;
    std::uint64_t next_command_id = 1;
    Clock clock;
    std::map<NpcId, NpcState> npcs;
    std::map<std::string, SimTime> cooldowns;
    std::uint64_t oracle_next_request_id = 1;

    // Derived, rebuilt on demand.
    std::optional<pathing::CostGrid> grid_cache;

    SimTime now() const { return clock.now(); }
    int day() const { return clock.day(); }
    int minute() const { return clock.minute_of_day(); }

    const Event& emit(std::string kind, json payload) {
        events.push_back({next_event_seq++, now(), std::move(kind), std::move(payload)});
        return events.back();
    }

    const pathing::CostGrid& grid() {
        if (!grid_cache) grid_cache = hephaestus::routing_grid(terrain, settlement);
        return *grid_cache;
    }

    moira::NpcProfile& profile(NpcId id) {
        auto* p = population.find(id);
        if (!p) throw Error(Errc::UnknownNpc, "pygmalion", "npc " + std::to_string(id.value));
        return *p;
    }
    const moira::NpcProfile& profile(NpcId id) const {
        const auto* p = population.find(id);
        if (!p) throw Error(Errc::UnknownNpc, "pygmalion", "npc " + std::to_string(id.value));
        return *p;
    }
    NpcState& state(NpcId id) {
        auto it = npcs.find(id);
        if (it == npcs.end()) throw Error(Errc::UnknownNpc, "pygmalion", "npc " + std::to_string(id.value));
        return it->second;
    }

    routine::Routine* routine_of(NpcId npc, int day) {
        auto it = routines.find({npc, day});
        return it == routines.end() ? nullptr : &it->second;
    }
    const routine::Routine* routine_of(NpcId npc, int day) const {
        auto it = routines.find({npc, day});
        return it == routines.end() ? nullptr : &it->second;
    }
    const routine::RoutineEntry* current_entry(NpcId npc) const {
        const auto* r = routine_of(npc, day());
        return r ? r->at(minute()) : nullptr;
    }
    bool awake(NpcId npc) const {
        const auto* r = routine_of(npc, day());
        return r && r->wake <= minute() && minute() < r->sleep;
    }

    const WorldObject* object(ObjectId id) const {
        for (const auto& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }
    WorldObject* object(ObjectId id) {
        for (auto& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }

    const hephaestus::Interior* interior(BuildingId id) const {
        for (const auto& in : interiors)
            if (in.building_id == id) return &in;
        return nullptr;
    }
};

// ------------------------------ Names and locations ------------------------------

// Display name: "<Surname> house", "workshop of the <roles>", "city hall".
inline std::string building_name(const World& w, BuildingId id) {
    const auto* b = w.settlement.find(id);
    if (!b) return "building " + std::to_string(id.value);
    if (b->spec.function_tag == "workplace") return "workshop of the " + join(b->spec.roles, " and ");
    if (b->spec.function_tag == "city-hall") return "city hall";
    for (const auto& f : w.population.families)
        if (f.residence == id) return f.surname + " house";
    return "empty cottage " + std::to_string(id.value);
}

inline Location building_location(const World& w, BuildingId id) {
    const auto* b = w.settlement.find(id);
    if (!b) throw Error(Errc::UnknownLocation, "pygmalion", "building " + std::to_string(id.value));
    return {id, b->entrance(), building_name(w, id)};
}

inline Location home_of(const World& w, NpcId npc) { return building_location(w, w.profile(npc).home); }

inline std::optional<Location> workplace_of(const World& w, NpcId npc) {
    const auto& p = w.profile(npc);
    if (!p.workplace) return std::nullopt;
    return building_location(w, *p.workplace);
}

inline std::string strip_article(std::string s) {
    s = to_lower(trim(s));
    for (std::string_view a : {"the ", "a ", "an "})
        if (s.rfind(a, 0) == 0) return s.substr(a.size());
    return s;
}

// Case-insensitive exact match on building names plus a fixed alias table;
// "home" and "work" resolve relative to `relative_to`.
inline std::optional<Location> resolve_location(const World& w, const std::string& name,
                                                std::optional<NpcId> relative_to = std::nullopt) {
    const std::string key = strip_article(name);
    if (key.empty()) return std::nullopt;
    if (relative_to) {
        if (key == "home" || key == "my home" || key == "house") return home_of(w, *relative_to);
        if (key == "work" || key == "workplace" || key == "my workplace") return workplace_of(w, *relative_to);
    }
    static const std::map<std::string, std::string> kAliases = {
        {"square", "city hall"}, {"town square", "city hall"}, {"village square", "city hall"},
        {"plaza", "city hall"},  {"town hall", "city hall"},   {"clock tower", "city hall"}};
    const auto alias = kAliases.find(key);
    const std::string target = alias == kAliases.end() ? key : alias->second;
    for (const auto& b : w.settlement.buildings) {
        const auto bname = to_lower(building_name(w, b.id));
        if (bname == target || to_lower(b.spec.description) == target) return building_location(w, b.id);
        for (const auto& r : b.spec.roles)
            if (target == to_lower(r) + "'s workshop" || target == to_lower(r) + " workshop") return building_location(w, b.id);
    }
    for (const auto& f : w.population.families)
        if (target == to_lower(f.surname) + " home" || target == to_lower(f.surname) + "s' house" || target == to_lower(f.surname) + " residence")
            return building_location(w, f.residence);
    return std::nullopt;
}

// Full name, or a first name shared by no one else.
inline std::optional<NpcId> resolve_npc(const World& w, const std::string& name) {
    const std::string key = to_lower(trim(name));
    if (key.empty()) return std::nullopt;
    for (const auto& p : w.population.profiles)
        if (to_lower(p.name) == key) return p.id;
    std::optional<NpcId> found;
    int hits = 0;
    for (const auto& p : w.population.profiles) {
        const auto first = to_lower(p.name.substr(0, p.name.find(' ')));
        if (first == key) {
            found = p.id;
            ++hits;
        }
    }
    return hits == 1 ? found : std::nullopt;
}

inline std::vector<const WorldObject*> accessible_objects(const World& w, NpcId npc) {
    const auto& p = w.profile(npc);
    std::vector<const WorldObject*> out;
    for (const auto& o : w.objects)
        if (o.building == p.home || (p.workplace && o.building == *p.workplace)) out.push_back(&o);
    return out;
}

}  // namespace genworld::world
