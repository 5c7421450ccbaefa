// genworld/pygmalion.hpp
//
// Agent runtime: routine generation, perception and reactions, the
// conversation phase machine with polling, plan decisions and scheduling,
// and nightly reflection.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "genworld/memory.hpp"
#include "genworld/oracle.hpp"
#include "genworld/routine.hpp"
#include "genworld/world.hpp"

namespace genworld::pygmalion {

using namespace genworld::world;
using memory::MemoryKind;
using routine::EntrySource;
using routine::Routine;
using routine::RoutineEntry;

// ------------------------------ Helpers ------------------------------

inline bool is_oracle_failure(const Error& e) {
    switch (e.code()) {
        case Errc::SchemaViolation:
        case Errc::MissingScriptEntry:
        case Errc::Timeout:
        case Errc::TransportError: return true;
        default: return false;
    }
}

inline std::string names_of(const World& w, const std::vector<NpcId>& ids, std::optional<NpcId> except = std::nullopt) {
    std::vector<std::string> out;
    for (auto id : ids)
        if (!except || id != *except) out.push_back(w.profile(id).name);
    return join(out, ", ");
}

inline oracle::EmbeddingVector embed_query(oracle::Gateway& g, const std::string& text) {
    return g.embed(trim(text).empty() ? std::string_view("(empty)") : std::string_view(text));
}

struct Recalled {
    memory::MemoryEntry entry;
    double score = 0.0;
};

// retrieve() with the scores kept; last_access of the returned entries moves to now.
inline std::vector<Recalled> recall(World& w, NpcId npc, const oracle::EmbeddingVector& query, std::size_t k) {
    auto& stream = w.memories.of(npc);
    const auto ranked = stream.rank(query, k, w.now(), w.config.weights);
    std::vector<Recalled> out;
    for (const auto& s : ranked) {
        auto& e = stream.entries[s.index];
        e.last_access = std::max(e.last_access, w.now());
        out.push_back({e, s.score});
    }
    return out;
}

inline std::string recalled_texts(const std::vector<Recalled>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(r.entry.text);
    return out.empty() ? std::string("(nothing)") : join(out, " | ");
}

inline MemoryId remember(World& w, oracle::Gateway& g, NpcId npc, MemoryKind kind, std::string text, double importance) {
    return w.memories.add(npc, kind, std::move(text), w.now(), importance, g.embedder());
}

inline RoutineEntry idle_entry(const World& w, NpcId npc, int start, int end) {
    RoutineEntry e;
    e.start = start;
    e.end = end;
    e.location = home_of(w, npc);
    e.activity = "idle at home";
    return e;
}

// ------------------------------ Routines ------------------------------

inline Routine template_routine(const World& w, NpcId npc, int day) {
    routine::TemplateContext c;
    c.npc = npc;
    c.day = day;
    c.wake = w.config.wake;
    c.sleep = w.config.sleep;
    c.home = home_of(w, npc);
    c.workplace = workplace_of(w, npc);
    return routine::default_routine(c);
}

// Parses a daily_routine answer. Entries naming an inaccessible object or an
// unknown location become idle-at-home blocks; a malformed answer or an adult
// without a work block throws SchemaViolation.
inline Routine routine_from_answer(const World& w, NpcId npc, int day, const json& answer) {
    const auto& entries = answer.at("entries");
    if (!entries.is_array() || entries.empty()) throw Error(Errc::SchemaViolation, "pygmalion", "entries must be a non-empty array");
    Routine r;
    r.npc = npc;
    r.day = day;
    r.wake = w.config.wake;
    r.sleep = w.config.sleep;
    r.entries = {idle_entry(w, npc, r.wake, r.sleep)};
    const auto work = workplace_of(w, npc);
    std::set<std::uint32_t> accessible;
    for (const auto* o : accessible_objects(w, npc)) accessible.insert(o->id.value);
    bool has_work = false;
    for (const auto& e : entries) {
        if (!e.is_object() || !e.contains("start") || !e.contains("end") || !e["start"].is_number_integer() ||
            !e["end"].is_number_integer())
            throw Error(Errc::SchemaViolation, "pygmalion", "routine entry needs integer start and end");
        RoutineEntry entry;
        entry.start = std::max(e["start"].get<int>(), r.wake);
        entry.end = std::min(e["end"].get<int>(), r.sleep);
        if (entry.start >= entry.end) continue;
        const std::string where = e.contains("location") && e["location"].is_string() ? e["location"].get<std::string>() : "";
        const std::string activity = e.contains("activity") && e["activity"].is_string() ? trim(e["activity"].get<std::string>()) : "";
        bool valid = !activity.empty() && (where == "home" || (where == "work" && work));
        if (valid && e.contains("object") && !e["object"].is_null()) {
            valid = e["object"].is_number_unsigned() && accessible.count(e["object"].get<std::uint32_t>());
            if (valid) entry.object = ObjectId(e["object"].get<std::uint32_t>());
        }
        if (!valid) {
            routine::insert_entry(r, idle_entry(w, npc, entry.start, entry.end));
            continue;
        }
        entry.location = where == "work" ? *work : home_of(w, npc);
        entry.activity = activity;
        has_work = has_work || where == "work";
        routine::insert_entry(r, std::move(entry));
    }
    if (work && !has_work) throw Error(Errc::SchemaViolation, "pygmalion", "adult routine without a work block");
    routine::check_contiguity(r, "generate_routine");
    return r;
}

inline Routine generate_routine(const World& w, NpcId npc, int day, oracle::Gateway& g) {
    const auto& p = w.profile(npc);
    std::vector<std::string> objects;
    for (const auto* o : accessible_objects(w, npc))
        objects.push_back(std::to_string(o->id.value) + ":" + o->tag + "@" + building_name(w, o->building));
    const auto work = workplace_of(w, npc);
    try {
        const auto r = g.ask("daily_routine",
                             {{"npc", p.name},
                              {"traits", join(p.traits, ", ")},
                              {"lore", p.lore},
                              {"home", home_of(w, npc).name},
                              {"workplace", work ? work->name : "none"},
                              {"objects", objects.empty() ? "none" : join(objects, ", ")},
                              {"day", std::to_string(day)},
                              {"wake", std::to_string(w.config.wake)},
                              {"sleep", std::to_string(w.config.sleep)}},
                             oracle::ResponseSchema::json_object({"entries"}));
        return routine_from_answer(w, npc, day, r.object());
    } catch (const Error& e) {
        if (!is_oracle_failure(e)) throw;
    } catch (const json::exception&) {
    }
    return template_routine(w, npc, day);
}

// Routine for a day that may not have been generated yet; future days get a
// provisional template that install_routine later merges into.
inline Routine& ensure_routine(World& w, NpcId npc, int day) {
    auto it = w.routines.find({npc, day});
    if (it == w.routines.end()) it = w.routines.emplace(std::make_pair(npc, day), template_routine(w, npc, day)).first;
    return it->second;
}

// Stores a freshly generated routine, carrying over plan and command entries
// already booked into a provisional routine for the same day.
inline void install_routine(World& w, Routine fresh) {
    if (const auto* old = w.routine_of(fresh.npc, fresh.day)) {
        for (auto src : {EntrySource::Plan, EntrySource::Command})
            for (const auto& e : old->entries)
                if (e.source == src && !routine::conflicts_with_plans(fresh, e.start, e.end)) routine::insert_entry(fresh, e);
    }
    routine::check_contiguity(fresh, "install_routine");
    w.routines[{fresh.npc, fresh.day}] = std::move(fresh);
}

// ------------------------------ Perception ------------------------------

inline std::string npc_state_text(const World& w, NpcId npc) {
    const auto& s = w.npcs.at(npc);
    if (s.conversation) {
        const auto& c = w.conversations.at(*s.conversation);
        return "talking with " + names_of(w, c.participants, npc);
    }
    const auto* e = w.current_entry(npc);
    return e ? e->activity : "idle";
}

inline double urgency_of(const RuntimeConfig& c, SubjectKind kind, std::string_view state, bool conversing) {
    if (to_lower(state).find("burning") != std::string::npos || to_lower(state).find("on fire") != std::string::npos)
        return c.urgency_burning;
    if (kind == SubjectKind::Npc && conversing) return c.urgency_conversation;
    return c.urgency_routine;
}

// Everything within Chebyshev `radius` of the observer, minus observations
// repeated inside the cooldown window (the window is refreshed here).
inline std::vector<Observation> perceive(World& w, NpcId observer, int radius) {
    if (radius <= 0) throw Error(Errc::InvalidParams, "pygmalion", "perception radius must be > 0");
    std::vector<Observation> out;
    const Tile here = w.npcs.at(observer).position;
    auto consider = [&](Observation o) {
        const std::string key = std::to_string(observer.value) + (o.subject_kind == SubjectKind::Npc ? ":npc:" : ":object:") +
                                std::to_string(o.subject) + ":" + o.subject_state;
        auto it = w.cooldowns.find(key);
        if (it != w.cooldowns.end() && w.now() - it->second < w.config.observation_cooldown) return;
        w.cooldowns[key] = w.now();
        out.push_back(std::move(o));
    };
    for (const auto& [id, s] : w.npcs) {
        if (id == observer || !w.awake(id)) continue;
        const int d = chebyshev(here, s.position);
        if (d > radius) continue;
        const std::string state = npc_state_text(w, id);
        consider({observer, SubjectKind::Npc, id.value, w.profile(id).name, state, d,
                  urgency_of(w.config, SubjectKind::Npc, state, s.conversation.has_value()), w.now()});
    }
    for (const auto& o : w.objects) {
        if (o.state.empty()) continue;
        const int d = chebyshev(here, o.tile);
        if (d > radius) continue;
        consider({observer, SubjectKind::Object, o.id.value, "the " + o.tag + " in the " + building_name(w, o.building), o.state,
                  d, urgency_of(w.config, SubjectKind::Object, o.state, false), w.now()});
    }
    return out;
}

inline void record_observations(World& w, oracle::Gateway& g, const std::vector<Observation>& obs) {
    for (const auto& o : obs) remember(w, g, o.observer, MemoryKind::Observation, o.text(), o.urgency);
}

// ------------------------------ Reactions ------------------------------

enum class ReactionKind { Continue, Deviate, Converse };

struct Reaction {
    ReactionKind kind = ReactionKind::Continue;
    std::string action;
    std::vector<NpcId> targets;
};

inline std::vector<NpcId> nearby_free_npcs(const World& w, NpcId npc, int radius) {
    std::vector<NpcId> out;
    const Tile here = w.npcs.at(npc).position;
    for (const auto& [id, s] : w.npcs)
        if (id != npc && !s.conversation && w.awake(id) && chebyshev(here, s.position) <= radius) out.push_back(id);
    return out;
}

// Below the threshold nothing is asked; any oracle failure also continues.
inline Reaction react(World& w, NpcId npc, const Observation& obs, oracle::Gateway& g) {
    if (obs.urgency < w.config.deviation_threshold) return {};
    const auto* e = w.current_entry(npc);
    try {
        const auto r = g.ask("react", {{"npc", w.profile(npc).name}, {"activity", e ? e->activity : "idle"}, {"observation", obs.text()}},
                             oracle::ResponseSchema::json_object({"decision"}));
        const json j = r.object();
        const std::string decision = j.at("decision").is_string() ? trim(j.at("decision").get<std::string>()) : "";
        std::string action = j.contains("action") && j["action"].is_string() ? trim(j["action"].get<std::string>()) : "";
        if (decision == "deviate") {
            if (action.empty()) action = "respond to " + obs.text();
            return {ReactionKind::Deviate, action, {}};
        }
        if (decision == "converse") {
            std::vector<NpcId> targets;
            if (obs.subject_kind == SubjectKind::Npc) {
                const NpcId s(obs.subject);
                if (!w.npcs.at(s).conversation && chebyshev(w.npcs.at(npc).position, w.npcs.at(s).position) <= w.config.conversation_radius)
                    targets.push_back(s);
            } else {
                targets = nearby_free_npcs(w, npc, w.config.conversation_radius);
            }
            if (!targets.empty()) return {ReactionKind::Converse, action, targets};
        }
    } catch (const Error& err) {
        if (!is_oracle_failure(err)) throw;
    } catch (const json::exception&) {
    }
    return {};
}

// Inserts a temporary entry starting now; the tail of the interrupted entry
// resumes afterwards. False when the slot is protected or the NPC is asleep.
inline bool apply_deviation(World& w, NpcId npc, Location where, std::optional<ObjectId> object, const std::string& activity,
                            EntrySource source = EntrySource::Deviation) {
    auto* r = w.routine_of(npc, w.day());
    if (!r) return false;
    const int start = w.minute();
    const int end = std::min(start + w.config.deviation_minutes, r->sleep);
    if (start < r->wake || start >= end || routine::conflicts_with_plans(*r, start, end)) return false;
    RoutineEntry e;
    e.start = start;
    e.end = end;
    e.location = std::move(where);
    e.object = object;
    e.activity = activity;
    e.source = source;
    routine::insert_entry(*r, e);
    routine::check_contiguity(*r, "deviation");
    w.npcs.at(npc).path.clear();
    w.emit("deviation", {{"npc_id", npc}, {"activity", activity}, {"location", e.location.name}, {"start", start}, {"end", end}});
    return true;
}

inline Location observation_location(const World& w, const Observation& obs) {
    if (obs.subject_kind == SubjectKind::Object) {
        const auto* o = w.object(ObjectId(obs.subject));
        return building_location(w, o->building);
    }
    return {BuildingId(), w.npcs.at(NpcId(obs.subject)).position, obs.subject_name};
}

// ------------------------------ Conversations ------------------------------

inline void transition(Conversation& c, Phase to) {
    if (!valid_transition(c.phase, to))
        throw Error(Errc::InvariantViolation, "pygmalion",
                    "conversation " + std::to_string(c.id.value) + ": " + std::string(phase_name(c.phase)) + " -> " +
                        std::string(phase_name(to)));
    c.phase = to;
    c.history.push_back(to);
}

inline ConversationId start_conversation(World& w, NpcId initiator, std::vector<NpcId> targets, std::string context) {
    if (targets.empty()) throw Error(Errc::InvalidParams, "pygmalion", "conversation needs at least one target");
    std::vector<NpcId> participants{initiator};
    for (auto t : targets)
        if (std::find(participants.begin(), participants.end(), t) == participants.end()) participants.push_back(t);
    if (participants.size() < 2) throw Error(Errc::InvalidParams, "pygmalion", "conversation needs two participants");
    for (auto p : participants) {
        if (!w.npcs.count(p)) throw Error(Errc::UnknownNpc, "pygmalion", "npc " + std::to_string(p.value));
        if (w.npcs.at(p).conversation)
            throw Error(Errc::AlreadyInConversation, "pygmalion", w.profile(p).name + " is already in a conversation");
    }
    const Tile here = w.npcs.at(initiator).position;
    for (auto p : participants)
        if (chebyshev(here, w.npcs.at(p).position) > w.config.conversation_radius)
            throw Error(Errc::OutOfRange, "pygmalion", w.profile(p).name + " is out of conversation range");
    Conversation c;
    c.id = ConversationId(w.next_conversation_id++);
    c.participants = participants;
    c.context = std::move(context);
    c.max_turns = w.config.max_turns;
    c.started_at = w.now();
    c.history = {Phase::OutlineGeneration};
    for (auto p : participants) {
        auto& s = w.npcs.at(p);
        s.conversation = c.id;
        s.path.clear();
        s.last_conversation_day = w.day();
    }
    w.emit("conversation_started", {{"conversation_id", c.id}, {"participants", participants}, {"context", c.context}});
    const auto id = c.id;
    w.conversations.emplace(id, std::move(c));
    return id;
}

inline void join_conversation(World& w, ConversationId id, NpcId joiner) {
    auto& c = w.conversations.at(id);
    if (!c.active()) throw Error(Errc::InvalidParams, "pygmalion", "conversation has ended");
    auto& s = w.state(joiner);
    if (s.conversation) throw Error(Errc::AlreadyInConversation, "pygmalion", w.profile(joiner).name + " is already in a conversation");
    bool near = false;
    for (auto p : c.participants) near = near || chebyshev(s.position, w.npcs.at(p).position) <= w.config.conversation_radius;
    if (!near) throw Error(Errc::OutOfRange, "pygmalion", w.profile(joiner).name + " is out of conversation range");
    c.participants.push_back(joiner);
    s.conversation = id;
    s.path.clear();
    s.last_conversation_day = w.day();
    w.emit("conversation_joined", {{"conversation_id", id}, {"npc_id", joiner}});
}

inline std::string transcript_text(const World& w, const Conversation& c) {
    std::string out;
    for (const auto& u : c.transcript) out += w.profile(u.speaker).name + ": " + u.text + "\n";
    return out.empty() ? std::string("(no words were exchanged)") : out;
}

inline std::string latest_context(const Conversation& c) {
    if (!c.transcript.empty()) return c.transcript.back().text;
    if (!c.outline.empty()) return c.outline;
    return c.context;
}

inline std::string template_summary(const World& w, const Conversation& c, NpcId npc) {
    std::string s = "I talked with " + names_of(w, c.participants, npc);
    if (!trim(c.context).empty()) s += " (" + c.context + ")";
    s += ".";
    if (!c.transcript.empty()) s += " " + w.profile(c.transcript.back().speaker).name + " said: \"" + c.transcript.back().text + "\"";
    return s;
}

// Ends the conversation and stores one first-person summary per participant.
inline void end_conversation(World& w, Conversation& c, oracle::Gateway& g) {
    transition(c, Phase::Ended);
    c.ended_at = w.now();
    c.draft.reset();
    const std::string names = names_of(w, c.participants);
    const std::string transcript = transcript_text(w, c);
    for (auto p : c.participants) {
        std::string summary;
        if (!c.degraded) {
            try {
                summary = trim(g.ask("conversation_summary", {{"npc", w.profile(p).name}, {"participants", names}, {"transcript", transcript}},
                                     oracle::ResponseSchema::free_text())
                                   .text);
            } catch (const Error& e) {
                if (!is_oracle_failure(e)) throw;
            }
        }
        if (summary.empty()) summary = template_summary(w, c, p);
        remember(w, g, p, MemoryKind::ConversationSummary, summary, memory::default_importance(MemoryKind::ConversationSummary));
        w.npcs.at(p).conversation.reset();
    }
    w.emit("conversation_ended",
           {{"conversation_id", c.id}, {"participants", c.participants}, {"turns", c.turn_count}, {"degraded", c.degraded}});
}

// Speaker whose best recalled memory scores highest against the latest
// context; ties go to the fewest utterances so far, then the lowest id.
inline NpcId poll_speaker(World& w, const Conversation& c, oracle::Gateway& g, std::vector<Recalled>* speaker_memories = nullptr) {
    const auto query = embed_query(g, latest_context(c));
    std::optional<NpcId> best;
    double best_score = 0;
    int best_count = 0;
    std::vector<Recalled> best_mem;
    for (auto p : c.participants) {
        auto mem = recall(w, p, query, w.config.poll_k);
        const double score = mem.empty() ? -std::numeric_limits<double>::infinity() : mem.front().score;
        const int count = c.utterances_by(p);
        const bool better = !best || score > best_score || (score == best_score && (count < best_count || (count == best_count && p < *best)));
        if (better) {
            best = p;
            best_score = score;
            best_count = count;
            best_mem = std::move(mem);
        }
    }
    if (speaker_memories) *speaker_memories = std::move(best_mem);
    return *best;
}

// ------------------------------ Plans ------------------------------

inline std::pair<int, int> normalize_slot(const World& w, int start, int end) {
    if (w.config.wake <= start && start < end && end <= w.config.sleep) return {start, end};
    return {w.config.evening_start, w.config.evening_end};
}

inline PlanId create_plan(World& w, NpcId proposer, std::vector<NpcId> invitees, std::string activity, Location where, int day_offset,
                          int start, int end, ConversationId conversation = ConversationId()) {
    Plan p;
    p.id = PlanId(w.next_plan_id++);
    p.proposer = proposer;
    for (auto n : invitees)
        if (n != proposer && std::find(p.invitees.begin(), p.invitees.end(), n) == p.invitees.end()) p.invitees.push_back(n);
    for (auto n : p.invitees) p.decisions[n] = Decision::Pending;
    p.activity = std::move(activity);
    p.location = std::move(where);
    p.requested_day = w.day() + std::clamp(day_offset, 0, w.config.plan_horizon);
    std::tie(p.start, p.end) = normalize_slot(w, start, end);
    p.conversation = conversation;
    w.emit("plan_proposed", {{"plan_id", p.id}, {"proposer", proposer}, {"invitees", p.invitees}, {"activity", p.activity},
                             {"location", p.location.name}, {"day", p.requested_day}, {"start", p.start}, {"end", p.end}});
    const auto id = p.id;
    w.plans.emplace(id, std::move(p));
    return id;
}

inline void buffer_plan(World& w, const Plan& p) {
    for (auto n : p.participants()) {
        auto& q = w.plan_buffer[n];
        if (std::find(q.begin(), q.end(), p.id) == q.end()) q.push_back(p.id);
    }
}

inline void unbuffer_plan(World& w, PlanId id) {
    for (auto it = w.plan_buffer.begin(); it != w.plan_buffer.end();) {
        auto& q = it->second;
        q.erase(std::remove(q.begin(), q.end(), id), q.end());
        it = q.empty() ? w.plan_buffer.erase(it) : std::next(it);
    }
}

// Each pending invitee accepts or rejects; every decision is remembered.
// Accepted plans enter the buffer, unanimously rejected ones are cancelled.
// An oracle failure cancels the plan and propagates.
inline void decide_plan(World& w, PlanId id, oracle::Gateway& g) {
    auto& p = w.plans.at(id);
    const auto& proposer = w.profile(p.proposer);
    try {
        for (auto n : p.invitees) {
            if (p.decisions[n] != Decision::Pending) continue;
            const auto& prof = w.profile(n);
            const auto mem = recall(w, n, embed_query(g, p.activity), w.config.poll_k);
            const auto r = g.ask("plan_decision",
                                 {{"npc", prof.name}, {"traits", join(prof.traits, ", ")}, {"proposer", proposer.name},
                                  {"activity", p.activity}, {"memories", recalled_texts(mem)}},
                                 oracle::ResponseSchema::choice({"accept", "reject"}));
            const bool accept = r.choice() == "accept";
            p.decisions[n] = accept ? Decision::Accepted : Decision::Rejected;
            remember(w, g, n, MemoryKind::PlanDecision,
                     std::string(accept ? "I accepted " : "I turned down ") + proposer.name + "'s invitation to " + p.activity + " at the " +
                         p.location.name + ".",
                     memory::default_importance(MemoryKind::PlanDecision));
            w.emit("plan_decision", {{"plan_id", id}, {"npc_id", n}, {"decision", decision_name(p.decisions[n])}});
        }
    } catch (const Error& e) {
        if (is_oracle_failure(e)) {
            p.status = PlanStatus::Cancelled;
            w.emit("plan_cancelled", {{"plan_id", id}, {"reason", "oracle failure"}});
        }
        throw;
    }
    if (p.accepted_by_any()) {
        buffer_plan(w, p);
    } else {
        p.status = PlanStatus::Cancelled;
        w.emit("plan_cancelled", {{"plan_id", id}, {"reason", "rejected by all invitees"}});
    }
}

// Books the plan on the earliest day within the horizon where no participant
// already has a plan entry overlapping the slot.
inline int schedule_plan(World& w, PlanId id) {
    auto& p = w.plans.at(id);
    if (p.status != PlanStatus::Proposed) throw Error(Errc::InvalidParams, "pygmalion", "plan is not awaiting scheduling");
    if (!p.accepted_by_any()) {
        p.status = PlanStatus::Cancelled;
        unbuffer_plan(w, id);
        w.emit("plan_cancelled", {{"plan_id", id}, {"reason", "no invitee accepted"}});
        return -1;
    }
    const auto people = p.participants();
    std::optional<int> chosen;
    for (int d = p.requested_day; d < p.requested_day + w.config.plan_horizon && !chosen; ++d) {
        if (d < w.day() || (d == w.day() && p.start <= w.minute())) continue;
        bool conflict = false;
        for (auto n : people)
            if (const auto* r = w.routine_of(n, d)) conflict = conflict || routine::conflicts_with_plans(*r, p.start, p.end);
        if (!conflict) chosen = d;
    }
    if (!chosen) throw Error(Errc::NoFeasibleDay, "pygmalion", "plan " + std::to_string(id.value));
    for (auto n : people) {
        auto& r = ensure_routine(w, n, *chosen);
        RoutineEntry e;
        e.start = p.start;
        e.end = p.end;
        e.location = p.location;
        e.activity = p.activity;
        e.source = EntrySource::Plan;
        e.plan_id = id;
        routine::insert_entry(r, e);
        routine::check_contiguity(r, "schedule_plan");
    }
    p.scheduled_day = *chosen;
    p.status = PlanStatus::Scheduled;
    unbuffer_plan(w, id);
    w.emit("plan_scheduled", {{"plan_id", id}, {"day", *chosen}, {"start", p.start}, {"end", p.end}, {"participants", people}});
    return *chosen;
}

// status = scheduled <=> every participant holds exactly one matching entry.
inline std::vector<std::string> plan_violations(const World& w) {
    std::vector<std::string> v;
    for (const auto& [id, p] : w.plans) {
        if (p.status != PlanStatus::Scheduled) continue;
        for (auto n : p.participants()) {
            const auto* r = w.routine_of(n, p.scheduled_day);
            int matches = 0;
            if (r)
                for (const auto& e : r->entries)
                    if (e.source == EntrySource::Plan && e.plan_id == id && e.location == p.location) ++matches;
            if (matches != 1) v.push_back("plan " + std::to_string(id.value) + " entry count for npc " + std::to_string(n.value));
        }
    }
    return v;
}

inline void remove_plan_entry(World& w, const Plan& p, NpcId npc) {
    auto* r = w.routine_of(npc, p.scheduled_day);
    if (!r) return;
    routine::remove_entries(
        *r, [&](const RoutineEntry& e) { return e.source == EntrySource::Plan && e.plan_id == p.id; }, idle_entry(w, npc, 0, 0));
    routine::check_contiguity(*r, "plan withdrawal");
}

// ------------------------------ Conversation step ------------------------------

// Runs one phase. Oracle failures end the conversation with templated summaries.
inline void conversation_step(World& w, ConversationId id, oracle::Gateway& g) {
    auto& c = w.conversations.at(id);
    if (!c.active()) throw Error(Errc::InvalidParams, "pygmalion", "conversation has ended");
    const std::string names = names_of(w, c.participants);
    try {
        switch (c.phase) {
            case Phase::OutlineGeneration: {
                std::vector<std::string> mem;
                const auto q = embed_query(g, c.context + " " + latest_context(c));
                for (auto p : c.participants) mem.push_back(w.profile(p).name + ": " + recalled_texts(recall(w, p, q, w.config.poll_k)));
                c.outline = trim(g.ask("conversation_outline", {{"participants", names}, {"context", c.context}, {"memories", join(mem, "; ")}},
                                       oracle::ResponseSchema::free_text())
                                     .text);
                transition(c, Phase::ProposalDetection);
                break;
            }
            case Phase::ProposalDetection: {
                std::vector<Recalled> mem;
                const NpcId speaker = poll_speaker(w, c, g, &mem);
                std::vector<std::string> seen;
                const auto& stream = w.memories.of(speaker).entries;
                for (auto it = stream.rbegin(); it != stream.rend() && seen.size() < 3; ++it) {
                    if (it->created_at < w.now() - w.config.observation_cooldown) break;
                    if (it->kind == MemoryKind::Observation) seen.push_back(it->text);
                }
                const std::string line = trim(
                    g.ask("utterance",
                          {{"speaker", w.profile(speaker).name},
                           {"participants", names},
                           {"outline", c.outline},
                           {"last_line", c.transcript.empty() ? "(none)" : c.transcript.back().text},
                           {"memories", recalled_texts(mem)},
                           {"observations", seen.empty() ? "(nothing new)" : join(seen, " | ")},
                           {"turn", std::to_string(c.turn_count + 1)}},
                          oracle::ResponseSchema::free_text())
                        .text);
                c.draft = Utterance{speaker, line, w.now()};
                const auto kind = g.ask("detect_proposal", {{"speaker", w.profile(speaker).name}, {"utterance", line}},
                                        oracle::ResponseSchema::choice({"proposal", "none"}));
                transition(c, kind.choice() == "proposal" ? Phase::ProposalDecision : Phase::DialogueRefinement);
                break;
            }
            case Phase::ProposalDecision: {
                const Utterance& d = *c.draft;
                std::vector<NpcId> invitees;
                for (auto p : c.participants)
                    if (p != d.speaker) invitees.push_back(p);
                const auto r = g.ask("plan_details",
                                     {{"proposer", w.profile(d.speaker).name}, {"utterance", d.text}, {"invitees", names_of(w, invitees)}},
                                     oracle::ResponseSchema::json_object({"activity", "location"}));
                const json j = r.object();
                const std::string activity = j.at("activity").is_string() ? trim(j.at("activity").get<std::string>()) : "";
                const std::string where = j.at("location").is_string() ? j.at("location").get<std::string>() : "";
                const auto loc = resolve_location(w, where, d.speaker);
                auto int_or = [&](const char* key, int fallback) {
                    return j.contains(key) && j[key].is_number_integer() ? j[key].get<int>() : fallback;
                };
                if (activity.empty() || !loc) {
                    w.emit("plan_dropped", {{"conversation_id", c.id}, {"location", where}, {"activity", activity}});
                } else {
                    const auto pid = create_plan(w, d.speaker, invitees, activity, *loc, int_or("day_offset", 1), int_or("start", -1),
                                                 int_or("end", -1), c.id);
                    c.pending_proposal = pid;
                    decide_plan(w, pid, g);
                }
                transition(c, Phase::DialogueRefinement);
                break;
            }
            case Phase::DialogueRefinement: {
                if (c.draft) {
                    c.transcript.push_back(*c.draft);
                    c.draft.reset();
                    ++c.turn_count;
                    w.emit("utterance", {{"conversation_id", c.id}, {"speaker", c.transcript.back().speaker}, {"text", c.transcript.back().text}});
                }
                bool end = c.turn_count >= c.max_turns;
                if (!end) {
                    const auto r = g.ask("conversation_continue",
                                         {{"participants", names}, {"transcript", transcript_text(w, c)}, {"turn", std::to_string(c.turn_count)}},
                                         oracle::ResponseSchema::choice({"continue", "end"}));
                    end = r.choice() == "end";
                }
                if (end)
                    end_conversation(w, c, g);
                else
                    transition(c, Phase::OutlineGeneration);
                break;
            }
            case Phase::Ended: break;
        }
    } catch (const Error& e) {
        if (!is_oracle_failure(e) || !c.active()) throw;
        c.degraded = true;
        end_conversation(w, c, g);
    } catch (const json::exception&) {
        if (!c.active()) throw;
        c.degraded = true;
        end_conversation(w, c, g);
    }
}

// ------------------------------ Reflection ------------------------------

struct ReflectionResult {
    MemoryId insight;
    bool templated = false;
    std::optional<moira::TraitChange> trait_change;
    std::vector<PlanId> withdrawn;
};

inline std::vector<std::string> top_activities(const Routine* r, std::size_t n) {
    std::vector<std::pair<std::string, int>> totals;
    if (r)
        for (const auto& e : r->entries) {
            auto it = std::find_if(totals.begin(), totals.end(), [&](const auto& t) { return t.first == e.activity; });
            if (it == totals.end())
                totals.emplace_back(e.activity, e.duration());
            else
                it->second += e.duration();
        }
    std::stable_sort(totals.begin(), totals.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(n, totals.size()); ++i) out.push_back(totals[i].first);
    return out;
}

inline std::string day_log(const World& w, NpcId npc, int day) {
    std::vector<std::string> parts;
    if (const auto* r = w.routine_of(npc, day))
        for (const auto& e : r->entries) parts.push_back(e.activity + " at the " + e.location.name);
    const SimTime from = static_cast<SimTime>(day) * w.clock.day_length;
    if (const auto* s = w.memories.find(npc))
        for (const auto& m : s->entries)
            if (m.created_at >= from && m.kind != MemoryKind::Observation && m.kind != MemoryKind::Reflection) parts.push_back(m.text);
    return parts.empty() ? std::string("a quiet day") : join(parts, "; ");
}

inline ReflectionResult reflect(World& w, NpcId npc, int day, oracle::Gateway& g) {
    ReflectionResult out;
    auto& prof = w.profile(npc);
    std::string insight;
    double importance = memory::default_importance(MemoryKind::Reflection);
    try {
        insight = trim(g.ask("reflection_insight",
                             {{"npc", prof.name}, {"traits", join(prof.traits, ", ")}, {"day", std::to_string(day)}, {"events", day_log(w, npc, day)}},
                             oracle::ResponseSchema::free_text())
                           .text);
    } catch (const Error& e) {
        if (!is_oracle_failure(e)) throw;
    }
    if (insight.empty()) {
        out.templated = true;
        const auto top = top_activities(w.routine_of(npc, day), 3);
        insight = "Today I " + (top.empty() ? std::string("rested") : join(top, ", ")) + ".";
    } else {
        try {
            const auto r = g.ask("reflection_importance", {{"npc", prof.name}, {"insight", insight}}, oracle::ResponseSchema::score(0, 10));
            importance = std::clamp(r.score() / 10.0, 0.0, 1.0);
        } catch (const Error& e) {
            if (!is_oracle_failure(e)) throw;
        }
    }
    out.insight = remember(w, g, npc, MemoryKind::Reflection, insight, importance);
    w.emit("reflection", {{"npc_id", npc}, {"day", day}, {"text", insight}, {"templated", out.templated}});

    if (!out.templated) {
        try {
            const auto r = g.ask("trait_evolution", {{"npc", prof.name}, {"traits", join(prof.traits, ", ")}, {"insight", insight}},
                                 oracle::ResponseSchema::json_object({"op"}));
            const json j = r.object();
            const std::string op = j.at("op").is_string() ? j.at("op").get<std::string>() : "none";
            const std::string trait = j.contains("trait") && j["trait"].is_string() ? trim(j["trait"].get<std::string>()) : "";
            auto has = std::find_if(prof.traits.begin(), prof.traits.end(), [&](const std::string& t) { return to_lower(t) == to_lower(trait); });
            if (op == "add" && !trait.empty() && has == prof.traits.end() && prof.traits.size() < 6) {
                prof.traits.push_back(trait);
                out.trait_change = moira::TraitChange{day, "add", trait, out.insight};
            } else if (op == "remove" && has != prof.traits.end() && prof.traits.size() > 3) {
                out.trait_change = moira::TraitChange{day, "remove", *has, out.insight};
                prof.traits.erase(has);
            }
            if (out.trait_change) {
                prof.evolution.push_back(*out.trait_change);
                w.emit("trait_change", {{"npc_id", npc}, {"change", out.trait_change->change}, {"trait", out.trait_change->trait}});
            }
        } catch (const Error& e) {
            if (!is_oracle_failure(e)) throw;
        } catch (const json::exception&) {
        }
    }

    for (auto& [pid, p] : w.plans) {
        if (p.status != PlanStatus::Scheduled || p.scheduled_day <= day) continue;
        auto d = p.decisions.find(npc);
        if (d == p.decisions.end() || d->second != Decision::Accepted) continue;
        bool withdraw = false;
        try {
            withdraw = g.ask("plan_reconsider",
                             {{"npc", prof.name}, {"activity", p.activity}, {"day", std::to_string(p.scheduled_day)}, {"insight", insight}},
                             oracle::ResponseSchema::choice({"keep", "withdraw"}))
                           .choice() == "withdraw";
        } catch (const Error& e) {
            if (!is_oracle_failure(e)) throw;
        }
        if (!withdraw) continue;
        remove_plan_entry(w, p, npc);
        d->second = Decision::Rejected;
        remember(w, g, npc, MemoryKind::PlanDecision,
                 "I decided not to join " + w.profile(p.proposer).name + " for " + p.activity + " after all.",
                 memory::default_importance(MemoryKind::PlanDecision));
        out.withdrawn.push_back(pid);
        w.emit("plan_withdrawn", {{"plan_id", pid}, {"npc_id", npc}});
        if (!p.accepted_by_any()) {
            remove_plan_entry(w, p, p.proposer);
            p.status = PlanStatus::Cancelled;
            w.emit("plan_cancelled", {{"plan_id", pid}, {"reason", "all invitees withdrew"}});
        }
    }
    return out;
}

}  // namespace genworld::pygmalion
