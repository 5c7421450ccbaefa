// genworld/simulation.hpp
//
// World generation pipeline, the fixed-order tick loop, and canonical
// save/load with validation on the way in.
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "genworld/daedalus.hpp"
#include "genworld/pygmalion.hpp"
#include "genworld/wordofgod.hpp"

namespace genworld::simulation {

using namespace genworld::world;

inline constexpr int kFormatVersion = 1;

// ------------------------------ Generation ------------------------------

struct GenerationOptions {
    moira::MoiraConfig moira;
    hephaestus::FurnitureCatalog furniture = hephaestus::FurnitureCatalog::defaults();
    const daedalus::AssetLibrary* library = nullptr;  // builtin library when null
};

struct GenerationReport {
    std::map<std::string, std::size_t> counts;
    std::vector<std::pair<std::string, double>> stage_ms;  // wall clock, informational only
};

inline void to_json(json& j, const GenerationReport& r) {
    json stages = json::array();
    for (const auto& [name, ms] : r.stage_ms) stages.push_back({{"stage", name}, {"ms", ms}});
    j = {{"counts", r.counts}, {"stages", stages}};
}

// Wake, sleep and the evening plan slot scale with non-default day lengths.
inline RuntimeConfig config_for(const gaia::WorldSpec& spec) {
    RuntimeConfig c;
    if (spec.day_length != 1440) {
        c.wake = spec.day_length / 4;
        c.sleep = spec.day_length * 11 / 12;
        c.evening_start = spec.day_length * 3 / 4;
        c.evening_end = spec.day_length * 5 / 6;
    }
    return c;
}

inline void place_npcs(World& w) {
    w.npcs.clear();
    for (const auto& p : w.population.profiles) {
        NpcState s;
        s.id = p.id;
        s.position = home_of(w, p.id).tile;
        w.npcs.emplace(p.id, s);
    }
}

inline void build_objects(World& w) {
    w.objects.clear();
    auto next = static_cast<std::uint32_t>(w.flora.size() + 1);
    for (const auto& in : w.interiors) {
        const auto* b = w.settlement.find(in.building_id);
        for (const auto& f : in.furniture)
            w.objects.push_back({ObjectId(next++), in.building_id, {b->origin.x + f.tile.x, b->origin.y + f.tile.y}, f.furniture_tag,
                                 f.description, f.asset_ref, ""});
    }
}

inline World generate_world(const gaia::WorldSpec& spec, oracle::Gateway& g, GenerationReport* report = nullptr,
                            const GenerationOptions& options = {}) {
    spec.validate();
    GenerationReport local;
    GenerationReport& rep = report ? *report : local;
    World w;
    w.spec = spec;
    w.config = config_for(spec);
    w.clock.day_length = spec.day_length;
    Rng rng(spec.seed);

    auto stage = [&](const std::string& name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn();
        } catch (const Error& e) {
            throw Error(e.code(), name, e.detail().empty() ? e.what() : e.detail());
        } catch (const json::exception& e) {
            throw Error(Errc::SchemaViolation, name, e.what());
        }
        rep.stage_ms.emplace_back(name, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    };

    gaia::Fields fields;
    stage("gaia", [&] {
        fields = gaia::generate_fields(spec);
        gaia::quantize_field(fields.elevation);
        gaia::quantize_field(fields.precipitation);
        gaia::quantize_field(fields.temperature);
        w.biomes = gaia::analogize_biomes(gaia::BiomeTable::defaults(), spec.description, g);
        w.terrain = gaia::classify_biomes(fields, w.biomes, spec.sea_level);
    });

    moira::PopulationPlan plan;
    moira::MoiraConfig mcfg = options.moira;
    mcfg.degrees_cap = spec.degrees_cap;
    stage("moira", [&] { plan = moira::plan_families(spec.target_population, spec.description, g, rng, mcfg); });

    stage("hephaestus", [&] {
        auto specs = hephaestus::derive_building_needs(plan.family_sizes(), plan.adult_roles());
        hephaestus::analogize_buildings(specs, spec.description, g);
        w.settlement = hephaestus::place_buildings(specs, w.terrain, rng);
        for (const auto& b : w.settlement.buildings) w.interiors.push_back(hephaestus::layout_interior(b, options.furniture, rng));
        // Furniture analogs, one oracle call per distinct generic description.
        std::map<std::string, std::string> analog;
        for (auto& in : w.interiors)
            for (auto& f : in.furniture) {
                auto it = analog.find(f.description);
                if (it == analog.end()) {
                    std::string text = f.description;
                    if (!trim(spec.description).empty()) {
                        try {
                            const auto r = g.ask("analogize_descriptor",
                                                 {{"world", spec.description}, {"category", "furniture"}, {"descriptor", f.description}},
                                                 oracle::ResponseSchema::free_text());
                            if (!trim(r.text).empty()) text = trim(r.text);
                        } catch (const Error& e) {
                            if (!gaia::is_fallback_error(e)) throw;
                        }
                    }
                    it = analog.emplace(f.description, text).first;
                }
                f.description = it->second;
            }
    });

    stage("roads", [&] {
        w.roads = hephaestus::build_roads(w.settlement, w.terrain);
        hephaestus::apply_roads(w.terrain, w.roads);
    });

    stage("flora", [&] {
        const auto reserved = hephaestus::reserved_mask(w.terrain, w.settlement, w.roads);
        w.flora = gaia::place_flora(w.terrain, w.biomes, reserved, rng, 1);
        build_objects(w);
    });

    stage("moira", [&] {
        const auto assignment = moira::assign_buildings(plan, w.settlement);
        w.population = moira::populate(plan, assignment, spec.description, g, w.memories, rng, mcfg, &w.settlement);
    });

    stage("daedalus", [&] {
        std::optional<daedalus::AssetLibrary> builtin;
        const daedalus::AssetLibrary* lib = options.library;
        if (!lib) lib = &builtin.emplace(daedalus::builtin_library(g.embedder()));
        std::map<std::pair<std::string, std::string>, daedalus::ResolvedAsset> cache;
        auto resolve = [&](const std::string& desc, const std::string& tag) {
            auto key = std::make_pair(desc, tag);
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, daedalus::resolve_asset({desc, tag, 1}, *lib, g)).first;
            return it->second;
        };
        for (auto& f : w.flora) {
            const auto a = resolve(f.descriptor.empty() ? f.generic : f.descriptor, "flora");
            f.asset_ref = a.asset_id;
            f.size = a.size;
        }
        for (auto& b : w.settlement.buildings) b.asset_ref = resolve(b.spec.description, b.spec.function_tag).asset_id;
        for (auto& in : w.interiors)
            for (auto& f : in.furniture) f.asset_ref = resolve(f.description, "furniture").asset_id;
        build_objects(w);
        rep.counts["distinct_assets"] = cache.size();
    });

    stage("pygmalion", [&] {
        place_npcs(w);
        for (const auto& p : w.population.profiles) pygmalion::install_routine(w, pygmalion::generate_routine(w, p.id, 0, g));
    });

    rep.counts["buildings"] = w.settlement.buildings.size();
    rep.counts["road_tiles"] = w.roads.road_tiles.size();
    rep.counts["flora"] = w.flora.size();
    rep.counts["objects"] = w.objects.size();
    rep.counts["npcs"] = w.population.profiles.size();
    rep.counts["relationships"] = w.population.relationships.size();
    rep.counts["families"] = w.population.families.size();
    std::size_t memories = 0;
    for (const auto& [_, s] : w.memories.streams) memories += s.entries.size();
    rep.counts["memories"] = memories;
    w.oracle_next_request_id = g.next_request_id();
    w.emit("world_generated", {{"seed", spec.seed}, {"description", spec.description}, {"counts", rep.counts}});
    return w;
}

// ------------------------------ Tick ------------------------------

enum class TickPhase { Commands = 1, Movement, Perception, Reactions, Conversations, Scheduling, Rollover };

using PhaseObserver = std::function<void(std::int64_t tick, TickPhase)>;

inline Tile movement_target(const World& w, NpcId npc) {
    const auto& s = w.npcs.at(npc);
    if (s.engagement && !s.engagement->targets.empty()) return w.npcs.at(s.engagement->targets.front()).position;
    if (!w.awake(npc)) return home_of(w, npc).tile;
    const auto* e = w.current_entry(npc);
    return e ? e->location.tile : s.position;
}

// One tile per tick along an A* path; unreachable targets are jumped to.
inline void move_npcs(World& w) {
    for (auto& [id, s] : w.npcs) {
        if (s.conversation) continue;
        const Tile target = movement_target(w, id);
        if (s.position == target) {
            s.path.clear();
            continue;
        }
        if (s.path.empty() || s.path.front() != target) {
            s.path.clear();
            try {
                const auto p = pathing::astar(w.grid(), s.position, target);
                for (auto it = p.tiles.rbegin(); it != p.tiles.rend(); ++it)
                    if (*it != s.position) s.path.push_back(*it);
            } catch (const Error& e) {
                if (e.code() != Errc::NoPath && e.code() != Errc::InvalidParams) throw;
            }
            if (s.path.empty()) {
                s.position = target;
                continue;
            }
        }
        s.position = s.path.back();
        s.path.pop_back();
    }
}

inline bool is_leisure(const routine::RoutineEntry* e) { return e && contains_ci(e->activity, "leisure"); }

inline void run_reactions(World& w, const std::map<NpcId, std::vector<Observation>>& seen, oracle::Gateway& g) {
    using pygmalion::ReactionKind;
    for (const auto& [npc, list] : seen) {
        for (const auto& obs : list) {
            if (w.npcs.at(npc).conversation) break;
            const auto r = pygmalion::react(w, npc, obs, g);
            if (r.kind == ReactionKind::Continue) continue;
            if (r.kind == ReactionKind::Deviate) {
                std::optional<ObjectId> object;
                if (obs.subject_kind == SubjectKind::Object) object = ObjectId(obs.subject);
                pygmalion::apply_deviation(w, npc, pygmalion::observation_location(w, obs), object, r.action);
            } else {
                try {
                    pygmalion::start_conversation(w, npc, r.targets, r.action.empty() ? "talking about " + obs.text() : r.action);
                } catch (const Error& e) {
                    if (e.code() != Errc::AlreadyInConversation && e.code() != Errc::OutOfRange) throw;
                }
            }
            break;
        }
    }
    // Pending command rendezvous.
    for (auto& [npc, s] : w.npcs) {
        if (!s.engagement || s.conversation) continue;
        const auto eng = *s.engagement;
        if (w.now() >= eng.expires) {
            s.engagement.reset();
            w.emit("engagement_expired", {{"npc_id", npc}, {"command_id", eng.command_id}});
            continue;
        }
        bool ready = true;
        for (auto t : eng.targets) {
            const auto& ts = w.npcs.at(t);
            ready = ready && !ts.conversation && chebyshev(s.position, ts.position) <= w.config.conversation_radius;
        }
        if (!ready) continue;
        s.engagement.reset();
        pygmalion::start_conversation(w, npc, eng.targets, eng.intent);
    }
    // Chance meetings during leisure, at most one per npc per day.
    for (auto& [a, sa] : w.npcs) {
        if (sa.conversation || sa.last_conversation_day == w.day() || !w.awake(a) || !is_leisure(w.current_entry(a))) continue;
        for (auto& [b, sb] : w.npcs) {
            if (!(a < b) || sb.conversation || sb.last_conversation_day == w.day() || !w.awake(b) || !is_leisure(w.current_entry(b)))
                continue;
            if (chebyshev(sa.position, sb.position) > w.config.conversation_radius) continue;
            const auto* e = w.current_entry(a);
            pygmalion::start_conversation(w, a, {b}, "a chance meeting near the " + e->location.name);
            break;
        }
    }
}

inline void schedule_buffered(World& w) {
    std::set<PlanId> ids;
    for (const auto& [_, q] : w.plan_buffer) ids.insert(q.begin(), q.end());
    for (auto id : ids) {
        auto& p = w.plans.at(id);
        if (p.status != PlanStatus::Proposed) {
            pygmalion::unbuffer_plan(w, id);
            continue;
        }
        try {
            pygmalion::schedule_plan(w, id);
        } catch (const Error& e) {
            if (e.code() != Errc::NoFeasibleDay) throw;
            if (w.day() >= p.requested_day + w.config.plan_horizon) {
                p.status = PlanStatus::Cancelled;
                pygmalion::unbuffer_plan(w, id);
                w.emit("plan_cancelled", {{"plan_id", id}, {"reason", "no feasible day within the horizon"}});
            } else if (!p.unschedulable_reported) {
                p.unschedulable_reported = true;
                w.emit("plan_unschedulable", {{"plan_id", id}});
            }
        }
    }
}

inline void rollover(World& w, oracle::Gateway& g) {
    const int day = w.day();
    for (const auto& p : w.population.profiles) pygmalion::reflect(w, p.id, day, g);
    for (auto& [id, p] : w.plans)
        if (p.status == PlanStatus::Scheduled && p.scheduled_day <= day) {
            p.status = PlanStatus::Completed;
            w.emit("plan_completed", {{"plan_id", id}});
        }
    for (const auto& p : w.population.profiles) pygmalion::install_routine(w, pygmalion::generate_routine(w, p.id, day + 1, g));
    for (auto it = w.cooldowns.begin(); it != w.cooldowns.end();)
        it = w.now() - it->second >= w.config.observation_cooldown ? w.cooldowns.erase(it) : std::next(it);
    w.emit("day_ended", {{"day", day}});
}

inline void tick(World& w, oracle::Gateway& g, const PhaseObserver& observe = {}) {
    g.set_next_request_id(w.oracle_next_request_id);
    auto mark = [&](TickPhase p) {
        if (observe) observe(w.clock.tick, p);
    };
    mark(TickPhase::Commands);
    wordofgod::drain_commands(w, g);
    mark(TickPhase::Movement);
    move_npcs(w);
    mark(TickPhase::Perception);
    std::map<NpcId, std::vector<Observation>> seen;
    for (const auto& [id, _] : w.npcs) {
        if (!w.awake(id)) continue;
        auto obs = pygmalion::perceive(w, id, w.config.perception_radius);
        pygmalion::record_observations(w, g, obs);
        if (!obs.empty()) seen.emplace(id, std::move(obs));
    }
    mark(TickPhase::Reactions);
    run_reactions(w, seen, g);
    mark(TickPhase::Conversations);
    std::vector<ConversationId> live;
    for (const auto& [id, c] : w.conversations)
        if (c.active()) live.push_back(id);
    for (auto id : live) pygmalion::conversation_step(w, id, g);
    mark(TickPhase::Scheduling);
    schedule_buffered(w);
    mark(TickPhase::Rollover);
    if (w.minute() == w.clock.day_length - 1) rollover(w, g);
    w.oracle_next_request_id = g.next_request_id();
    ++w.clock.tick;
}

inline void run(World& w, oracle::Gateway& g, std::int64_t ticks, const PhaseObserver& observe = {}) {
    for (std::int64_t i = 0; i < ticks; ++i) tick(w, g, observe);
}

// ------------------------------ Save / load ------------------------------

inline json to_save_json(const World& w, const std::vector<oracle::JournalRecord>* journal = nullptr) {
    json routines = json::array();
    for (const auto& [_, r] : w.routines) routines.push_back(r);
    json plans = json::array();
    for (const auto& [_, p] : w.plans) plans.push_back(p);
    json buffer = json::object();
    for (const auto& [npc, q] : w.plan_buffer) buffer[std::to_string(npc.value)] = q;
    json conversations = json::array();
    for (const auto& [_, c] : w.conversations) conversations.push_back(c);
    json npcs = json::array();
    for (const auto& [_, s] : w.npcs) npcs.push_back(s);
    json commands = json::array();
    for (const auto& c : w.commands) commands.push_back(c);
    json j = {{"format_version", kFormatVersion},
              {"spec", w.spec},
              {"config", w.config},
              {"biomes", w.biomes},
              {"terrain", gaia::export_terrain(w.terrain)},
              {"settlement", w.settlement},
              {"interiors", w.interiors},
              {"roads", w.roads},
              {"flora", w.flora},
              {"objects", w.objects},
              {"population", w.population},
              {"memories", w.memories},
              {"routines", routines},
              {"plans", plans},
              {"plan_buffer", buffer},
              {"conversations", conversations},
              {"events", w.events},
              {"commands", commands},
              {"clock", {{"tick", w.clock.tick}, {"minutes_per_tick", w.clock.minutes_per_tick}, {"day_length", w.clock.day_length}}},
              {"npcs", npcs},
              {"cooldowns", w.cooldowns},
              {"counters",
               {{"next_plan_id", w.next_plan_id},
                {"next_conversation_id", w.next_conversation_id},
                {"next_event_seq", w.next_event_seq},
                {"next_command_id", w.next_command_id},
                {"oracle_next_request_id", w.oracle_next_request_id}}}};
    if (journal) j["journal"] = *journal;
    return j;
}

// Canonical text: sorted keys, fixed indentation, trailing newline.
inline std::string save_text(const World& w, const std::vector<oracle::JournalRecord>* journal = nullptr) {
    return to_save_json(w, journal).dump(1) + "\n";
}

// Module invariants checked on load; the first failing module is reported.
inline void validate_world(const World& w) {
    auto fail = [](const std::string& module, const std::string& detail) { throw Error(Errc::InvariantViolation, module, detail); };
    if (w.terrain.width != w.spec.width || w.terrain.height != w.spec.height) fail("gaia", "terrain size differs from spec");
    if (auto v = hephaestus::settlement_violations(w.settlement, w.terrain); !v.empty()) fail("hephaestus", v.front());
    for (const auto& in : w.interiors)
        if (!hephaestus::interior_reachable(in)) fail("hephaestus", "interior " + std::to_string(in.building_id.value) + " unreachable");
    if (auto v = moira::population_violations(w.population, w.memories, w.spec.degrees_cap); !v.empty()) fail("moira", v.front());
    for (const auto& [npc, s] : w.memories.streams)
        for (const auto& m : s.entries) {
            if (m.last_access < m.created_at) fail("pygmalion", "memory " + std::to_string(m.id.value) + " accessed before creation");
            if (m.importance < 0 || m.importance > 1) fail("pygmalion", "memory " + std::to_string(m.id.value) + " importance");
            if (m.id.value >= w.memories.next_id) fail("pygmalion", "memory id beyond counter");
        }
    for (const auto& [key, r] : w.routines) {
        if (key.first != r.npc || key.second != r.day) fail("pygmalion", "routine keyed under the wrong npc or day");
        if (auto e = routine::contiguity_error(r)) fail("pygmalion", *e);
    }
    if (auto v = pygmalion::plan_violations(w); !v.empty()) fail("pygmalion", v.front());
    for (const auto& [id, c] : w.conversations) {
        if (!valid_walk(c.history) || c.history.back() != c.phase) fail("pygmalion", "conversation " + std::to_string(id.value) + " phase history");
        if (c.participants.size() < 2) fail("pygmalion", "conversation " + std::to_string(id.value) + " has fewer than two participants");
    }
    for (const auto& [id, s] : w.npcs)
        if (!w.population.find(id)) fail("pygmalion", "state for unknown npc " + std::to_string(id.value));
    if (w.npcs.size() != w.population.profiles.size()) fail("pygmalion", "npc state count differs from population");
}

struct Loaded {
    World world;
    std::vector<oracle::JournalRecord> journal;
};

inline Loaded from_save_json(const json& j) {
    if (!j.is_object() || !j.contains("format_version")) throw Error(Errc::CorruptSave, "simserver", "missing format_version");
    if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kFormatVersion)
        throw Error(Errc::VersionMismatch, "simserver", "format_version " + j["format_version"].dump());
    Loaded out;
    World& w = out.world;
    try {
        w.spec = j.at("spec").get<gaia::WorldSpec>();
        w.config = j.at("config").get<RuntimeConfig>();
        w.biomes = j.at("biomes").get<gaia::BiomeTable>();
        w.terrain = gaia::import_terrain(j.at("terrain"), w.biomes);
        w.settlement = j.at("settlement").get<hephaestus::Settlement>();
        w.interiors = j.at("interiors").get<std::vector<hephaestus::Interior>>();
        w.roads = j.at("roads").get<hephaestus::RoadNetwork>();
        hephaestus::apply_roads(w.terrain, w.roads);
        w.flora = j.at("flora").get<std::vector<gaia::NaturalObject>>();
        w.objects = j.at("objects").get<std::vector<WorldObject>>();
        w.population = j.at("population").get<moira::Population>();
        w.memories = j.at("memories").get<memory::MemoryBank>();
        for (const auto& r : j.at("routines")) {
            auto routine = r.get<routine::Routine>();
            const auto key = std::make_pair(routine.npc, routine.day);
            if (!w.routines.emplace(key, std::move(routine)).second) throw Error(Errc::CorruptSave, "simserver", "duplicate routine");
        }
        for (const auto& p : j.at("plans")) {
            auto plan = p.get<Plan>();
            w.plans.emplace(plan.id, std::move(plan));
        }
        for (const auto& [k, v] : j.at("plan_buffer").items())
            w.plan_buffer[NpcId(static_cast<std::uint32_t>(std::stoul(k)))] = v.get<std::vector<PlanId>>();
        for (const auto& c : j.at("conversations")) {
            auto conv = c.get<Conversation>();
            w.conversations.emplace(conv.id, std::move(conv));
        }
        w.events = j.at("events").get<std::vector<Event>>();
        for (const auto& c : j.at("commands")) w.commands.push_back(c.get<PlayerCommand>());
        const auto& clock = j.at("clock");
        w.clock.tick = clock.at("tick").get<std::int64_t>();
        w.clock.minutes_per_tick = clock.at("minutes_per_tick").get<int>();
        w.clock.day_length = clock.at("day_length").get<int>();
        for (const auto& s : j.at("npcs")) {
            auto st = s.get<NpcState>();
            w.npcs.emplace(st.id, std::move(st));
        }
        w.cooldowns = j.at("cooldowns").get<std::map<std::string, SimTime>>();
        const auto& c = j.at("counters");
        w.next_plan_id = c.at("next_plan_id").get<std::uint64_t>();
        w.next_conversation_id = c.at("next_conversation_id").get<std::uint64_t>();
        w.next_event_seq = c.at("next_event_seq").get<std::uint64_t>();
        w.next_command_id = c.at("next_command_id").get<std::uint64_t>();
        w.oracle_next_request_id = c.at("oracle_next_request_id").get<std::uint64_t>();
        if (j.contains("journal")) out.journal = j.at("journal").get<std::vector<oracle::JournalRecord>>();
    } catch (const Error& e) {
        if (e.code() == Errc::VersionMismatch) throw;
        throw Error(Errc::CorruptSave, e.module(), e.detail());
    } catch (const std::exception& e) {
        throw Error(Errc::CorruptSave, "simserver", e.what());
    }
    if (w.clock.minutes_per_tick < 1 || w.clock.day_length != w.spec.day_length || w.clock.tick < 0)
        throw Error(Errc::CorruptSave, "simserver", "clock");
    validate_world(w);
    return out;
}

inline Loaded parse_save(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::CorruptSave, "simserver", e.what());
    }
    return from_save_json(j);
}

inline void save_world(const World& w, const std::filesystem::path& path, const std::vector<oracle::JournalRecord>* journal = nullptr) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "simserver", "cannot write " + path.string());
    out << save_text(w, journal);
    if (!out) throw Error(Errc::IoError, "simserver", "write failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "simserver", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Loaded load_world(const std::filesystem::path& path) { return parse_save(read_file(path)); }

}  // namespace genworld::simulation
