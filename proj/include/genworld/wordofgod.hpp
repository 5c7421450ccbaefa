// genworld/wordofgod.hpp
//
// Player commands: natural language decomposed by the oracle into a fixed step
// vocabulary, validated against the world, then executed from the tick. Also
// the interview mode, which reads memories without touching the world.
#pragma once

#include <string>
#include <vector>

#include "genworld/pygmalion.hpp"

namespace genworld::wordofgod {

using namespace genworld::world;
using routine::EntrySource;
using routine::RoutineEntry;

enum class StepKind { Engage, Schedule, Propose, Custom };

inline std::string_view step_kind_name(StepKind k) {
    switch (k) {
        case StepKind::Engage: return "engage";
        case StepKind::Schedule: return "schedule";
        case StepKind::Propose: return "propose";
        case StepKind::Custom: return "custom";
    }
    return "custom";
}

inline std::optional<StepKind> step_kind_from_name(std::string_view s) {
    for (auto k : {StepKind::Engage, StepKind::Schedule, StepKind::Propose, StepKind::Custom})
        if (step_kind_name(k) == s) return k;
    return std::nullopt;
}

// One validated step. Which fields matter depends on the kind:
// engage uses targets+intent, schedule day/start/end/location/activity,
// propose adds targets as invitees, custom uses activity and an optional location.
struct Step {
    StepKind kind = StepKind::Custom;
    std::vector<NpcId> targets;
    std::string intent;
    int day = 0;
    int start = 0;
    int end = 0;
    std::optional<Location> location;
    std::string activity;

    bool operator==(const Step&) const = default;
};

inline void to_json(json& j, const Step& s) {
    j = {{"kind", step_kind_name(s.kind)}, {"targets", s.targets}, {"intent", s.intent}, {"day", s.day},
         {"start", s.start},               {"end", s.end},         {"activity", s.activity}};
    j["location"] = s.location ? json(*s.location) : json(nullptr);
}

inline void from_json(const json& j, Step& s) {
    const auto k = step_kind_from_name(j.at("kind").get<std::string>());
    if (!k) throw Error(Errc::CorruptSave, "wordofgod", "unknown step kind");
    s.kind = *k;
    s.targets = j.at("targets").get<std::vector<NpcId>>();
    s.intent = j.at("intent").get<std::string>();
    s.day = j.at("day").get<int>();
    s.start = j.at("start").get<int>();
    s.end = j.at("end").get<int>();
    s.activity = j.at("activity").get<std::string>();
    s.location.reset();
    if (!j.at("location").is_null()) s.location = j.at("location").get<Location>();
}

// ------------------------------ Parsing ------------------------------

namespace detail {

[[noreturn]] inline void unparseable(const std::string& why) { throw Error(Errc::UnparseableCommand, "wordofgod", why); }

inline std::string text_field(const json& s, const char* key, bool required) {
    if (!s.contains(key) || s[key].is_null()) {
        if (required) unparseable(std::string("step is missing ") + key);
        return {};
    }
    if (!s[key].is_string()) unparseable(std::string(key) + " must be a string");
    return trim(s[key].get<std::string>());
}

inline int int_field(const json& s, const char* key, std::optional<int> fallback) {
    if (!s.contains(key) || s[key].is_null()) {
        if (!fallback) unparseable(std::string("step is missing ") + key);
        return *fallback;
    }
    if (!s[key].is_number_integer()) unparseable(std::string(key) + " must be an integer");
    return s[key].get<int>();
}

inline std::vector<NpcId> npc_list(const World& w, const json& s, const char* key, NpcId self) {
    if (!s.contains(key) || !s[key].is_array() || s[key].empty()) unparseable(std::string(key) + " must be a non-empty list");
    std::vector<NpcId> out;
    for (const auto& n : s[key]) {
        if (!n.is_string()) unparseable(std::string(key) + " entries must be names");
        const auto id = resolve_npc(w, n.get<std::string>());
        if (!id) throw Error(Errc::UnknownNpc, "wordofgod", n.get<std::string>());
        if (*id != self && std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
    }
    if (out.empty()) unparseable(std::string(key) + " names only the commanded npc");
    return out;
}

inline Location location_field(const World& w, const json& s, NpcId self) {
    const auto name = text_field(s, "location", true);
    auto loc = resolve_location(w, name, self);
    if (!loc) throw Error(Errc::UnknownLocation, "wordofgod", name);
    return *loc;
}

inline void slot_fields(const World& w, const json& s, Step& out) {
    out.day = w.day() + std::clamp(int_field(s, "day_offset", 0), 0, w.config.plan_horizon);
    out.start = int_field(s, "start", std::nullopt);
    out.end = int_field(s, "end", std::nullopt);
    if (out.start < 0 || out.start >= out.end || out.end > w.clock.day_length) unparseable("invalid time slot");
}

}  // namespace detail

// All-or-nothing: any unresolvable referent rejects the whole command.
inline std::vector<Step> validate_steps(const World& w, NpcId target, const json& answer) {
    using namespace detail;
    if (!answer.is_object() || !answer.contains("steps") || !answer["steps"].is_array() || answer["steps"].empty())
        unparseable("no steps");
    std::vector<Step> steps;
    for (const auto& s : answer["steps"]) {
        if (!s.is_object()) unparseable("step must be an object");
        const auto kind = step_kind_from_name(text_field(s, "kind", true));
        if (!kind) unparseable("unknown step kind");
        Step st;
        st.kind = *kind;
        switch (*kind) {
            case StepKind::Engage:
                st.targets = npc_list(w, s, "targets", target);
                st.intent = text_field(s, "intent", false);
                break;
            case StepKind::Schedule:
                slot_fields(w, s, st);
                st.location = location_field(w, s, target);
                st.activity = text_field(s, "activity", true);
                break;
            case StepKind::Propose:
                st.targets = npc_list(w, s, "invitees", target);
                slot_fields(w, s, st);
                st.location = location_field(w, s, target);
                st.activity = text_field(s, "activity", true);
                break;
            case StepKind::Custom:
                st.activity = text_field(s, "activity", true);
                if (!text_field(s, "location", false).empty()) st.location = location_field(w, s, target);
                break;
        }
        if ((st.kind != StepKind::Engage) && st.activity.empty()) unparseable("empty activity");
        steps.push_back(std::move(st));
    }
    return steps;
}

inline std::vector<Step> parse_command(const World& w, NpcId target, const std::string& text, oracle::Gateway& g) {
    if (trim(text).empty()) detail::unparseable("empty command");
    const auto& prof = w.profile(target);
    std::vector<std::string> npcs, places;
    for (const auto& p : w.population.profiles) npcs.push_back(p.name);
    for (const auto& b : w.settlement.buildings) places.push_back(building_name(w, b.id));
    json answer;
    try {
        answer = g.ask("parse_command",
                       {{"npc", prof.name}, {"command", text}, {"npcs", join(npcs, ", ")}, {"locations", join(places, ", ")}},
                       oracle::ResponseSchema::json_object({"steps"}))
                     .object();
    } catch (const Error& e) {
        if (!pygmalion::is_oracle_failure(e)) throw;
        detail::unparseable(std::string(errc_name(e.code())) + ": " + e.detail());
    }
    return validate_steps(w, target, answer);
}

// ------------------------------ Execution ------------------------------

inline bool in_plan_entry(const World& w, NpcId npc) {
    const auto* e = w.current_entry(npc);
    return e && e->source == EntrySource::Plan;
}

[[noreturn]] inline void busy(const World& w, NpcId npc, const std::string& why) {
    throw Error(Errc::TargetBusy, "wordofgod", w.profile(npc).name + " " + why);
}

// Applies one step for `npc` and records exactly one command_step event.
// TargetBusy leaves the world untouched so the step can be retried.
inline const Event& execute_step(World& w, const PlayerCommand& cmd, std::size_t index, const Step& step, oracle::Gateway& g) {
    const NpcId npc = cmd.target;
    json outcome = {{"command_id", cmd.id}, {"step", index}, {"kind", step_kind_name(step.kind)}, {"npc_id", npc}};
    auto& state = w.state(npc);
    switch (step.kind) {
        case StepKind::Engage: {
            if (state.conversation) busy(w, npc, "is already talking");
            if (in_plan_entry(w, npc)) busy(w, npc, "is busy with a plan");
            for (auto t : step.targets)
                if (w.state(t).conversation) busy(w, t, "is already talking");
            const std::string context = step.intent.empty() ? std::string("a chat") : step.intent;
            bool near = true;
            for (auto t : step.targets) near = near && chebyshev(state.position, w.npcs.at(t).position) <= w.config.conversation_radius;
            if (near) {
                outcome["conversation_id"] = pygmalion::start_conversation(w, npc, step.targets, context);
                outcome["outcome"] = "started";
            } else {
                const auto& first = w.npcs.at(step.targets.front());
                pygmalion::apply_deviation(w, npc, {BuildingId(), first.position, w.profile(first.id).name}, std::nullopt,
                                           "go and talk with " + pygmalion::names_of(w, step.targets) + " about " + context,
                                           EntrySource::Command);
                state.engagement = PendingEngagement{step.targets, context, w.now() + w.config.engagement_timeout, cmd.id};
                outcome["outcome"] = "rendezvous";
            }
            break;
        }
        case StepKind::Schedule: {
            if (step.day < w.day() || (step.day == w.day() && step.start <= w.minute())) {
                outcome["outcome"] = "expired";
                break;
            }
            auto& r = pygmalion::ensure_routine(w, npc, step.day);
            if (routine::conflicts_with_plans(r, step.start, step.end)) busy(w, npc, "has a plan at that time");
            RoutineEntry e;
            e.start = step.start;
            e.end = step.end;
            e.location = *step.location;
            e.activity = step.activity;
            e.source = EntrySource::Command;
            if (e.start < r.wake || e.end > r.sleep) {
                outcome["outcome"] = "outside waking hours";
                break;
            }
            routine::insert_entry(r, e);
            routine::check_contiguity(r, "command schedule");
            outcome["outcome"] = "scheduled";
            outcome["day"] = step.day;
            break;
        }
        case StepKind::Propose: {
            const auto id = pygmalion::create_plan(w, npc, step.targets, step.activity, *step.location, step.day - w.day(), step.start,
                                                   step.end);
            outcome["plan_id"] = id;
            try {
                pygmalion::decide_plan(w, id, g);
                outcome["outcome"] = plan_status_name(w.plans.at(id).status);
            } catch (const Error& e) {
                if (!pygmalion::is_oracle_failure(e)) throw;
                outcome["outcome"] = "cancelled";
            }
            break;
        }
        case StepKind::Custom: {
            if (state.conversation) busy(w, npc, "is already talking");
            const Location where = step.location ? *step.location : Location{BuildingId(), state.position, "where they stand"};
            if (!w.awake(npc)) {
                outcome["outcome"] = "asleep";
                break;
            }
            if (!pygmalion::apply_deviation(w, npc, where, std::nullopt, step.activity, EntrySource::Command))
                busy(w, npc, "has a plan right now");
            outcome["outcome"] = "started";
            break;
        }
    }
    return w.emit("command_step", std::move(outcome));
}

// Submits a command to the FIFO; processing happens in the next tick.
inline std::uint64_t submit_command(World& w, std::string issuer, NpcId target, std::string text) {
    if (!w.npcs.count(target)) throw Error(Errc::UnknownNpc, "wordofgod", "npc " + std::to_string(target.value));
    PlayerCommand c;
    c.id = w.next_command_id++;
    c.issuer = std::move(issuer);
    c.target = target;
    c.text = std::move(text);
    c.submitted_at = w.now();
    w.commands.push_back(std::move(c));
    return w.commands.back().id;
}

// Drains the FIFO in order. A busy command stays queued and holds back later
// commands for the same npc so their relative order survives.
inline void drain_commands(World& w, oracle::Gateway& g) {
    std::set<NpcId> blocked;
    std::deque<PlayerCommand> keep;
    while (!w.commands.empty()) {
        PlayerCommand cmd = std::move(w.commands.front());
        w.commands.pop_front();
        if (blocked.count(cmd.target)) {
            keep.push_back(std::move(cmd));
            continue;
        }
        if (!cmd.steps) {
            try {
                cmd.steps = json(parse_command(w, cmd.target, cmd.text, g));
                w.emit("command_parsed", {{"command_id", cmd.id}, {"issuer", cmd.issuer}, {"npc_id", cmd.target}, {"steps", *cmd.steps}});
            } catch (const Error& e) {
                w.emit("command_rejected", {{"command_id", cmd.id},
                                            {"issuer", cmd.issuer},
                                            {"code", errc_name(e.code())},
                                            {"message", e.detail()}});
                continue;
            }
        }
        const auto steps = cmd.steps->get<std::vector<Step>>();
        bool held = false;
        while (cmd.next_step < steps.size()) {
            try {
                execute_step(w, cmd, cmd.next_step, steps[cmd.next_step], g);
                ++cmd.next_step;
            } catch (const Error& e) {
                if (e.code() != Errc::TargetBusy) throw;
                if (!cmd.busy_reported) {
                    w.emit("command_busy", {{"command_id", cmd.id}, {"issuer", cmd.issuer}, {"message", e.detail()}});
                    cmd.busy_reported = true;
                }
                held = true;
                break;
            }
        }
        if (held) {
            blocked.insert(cmd.target);
            keep.push_back(std::move(cmd));
        }
    }
    w.commands = std::move(keep);
}

// ------------------------------ Interviews ------------------------------

struct InterviewSession {
    std::uint64_t id = 0;
    NpcId npc;
    std::vector<std::pair<std::string, std::string>> transcript;  // (speaker, text)
    bool open = true;
    std::optional<bool> remember;
};

inline InterviewSession start_interview(const World& w, NpcId npc, std::uint64_t id) {
    (void)w.profile(npc);
    return {id, npc, {}, true, std::nullopt};
}

inline std::string interview_transcript(const World& w, const InterviewSession& s) {
    std::string out;
    for (const auto& [who, text] : s.transcript) out += (who == "player" ? std::string("Visitor") : w.profile(s.npc).name) + ": " + text + "\n";
    return out.empty() ? std::string("(none)") : out;
}

// Retrieval here is read-only (no last_access bump) so the world stays untouched.
inline std::string interview(const World& w, InterviewSession& s, const std::string& question, oracle::Gateway& g) {
    if (!s.open) throw Error(Errc::SessionClosed, "wordofgod", "interview " + std::to_string(s.id));
    const auto& p = w.profile(s.npc);
    std::string answer;
    try {
        std::vector<std::string> recalled;
        if (const auto* stream = w.memories.find(s.npc)) {
            const auto q = pygmalion::embed_query(g, question);
            for (const auto& r : stream->rank(q, 5, w.now(), w.config.weights)) recalled.push_back(stream->entries[r.index].text);
        }
        answer = trim(g.ask("interview_answer",
                            {{"npc", p.name},
                             {"profile", p.lore + " Traits: " + join(p.traits, ", ")},
                             {"memories", recalled.empty() ? "(nothing)" : join(recalled, " | ")},
                             {"transcript", interview_transcript(w, s)},
                             {"question", question}},
                            oracle::ResponseSchema::free_text())
                          .text);
    } catch (const Error& e) {
        if (!pygmalion::is_oracle_failure(e) && e.code() != Errc::EmptyText) throw;
    }
    if (answer.empty()) answer = "I'm sorry, my mind wandered. Could you ask me again?";
    s.transcript.emplace_back("player", question);
    s.transcript.emplace_back("npc", answer);
    return answer;
}

// remember=true stores exactly one conversation_summary memory; false leaves no trace.
inline void end_interview(World& w, InterviewSession& s, bool remember, oracle::Gateway& g) {
    if (!s.open) throw Error(Errc::SessionClosed, "wordofgod", "interview " + std::to_string(s.id));
    s.open = false;
    s.remember = remember;
    if (!remember) return;
    const auto& p = w.profile(s.npc);
    std::string summary;
    try {
        summary = trim(g.ask("interview_summary", {{"npc", p.name}, {"transcript", interview_transcript(w, s)}},
                             oracle::ResponseSchema::free_text())
                           .text);
    } catch (const Error& e) {
        if (!pygmalion::is_oracle_failure(e)) throw;
    }
    if (summary.empty())
        summary = s.transcript.empty() ? std::string("A visitor came to talk with me but asked nothing.")
                                       : "A visitor asked me: \"" + s.transcript.front().second + "\"";
    w.memories.add(s.npc, memory::MemoryKind::ConversationSummary, summary, w.now(),
                   memory::default_importance(memory::MemoryKind::ConversationSummary), g.embedder());
}

}  // namespace genworld::wordofgod
