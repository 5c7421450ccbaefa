// genworld/routine.hpp
//
// Daily schedules. A routine covers [wake, sleep] of one day with ordered,
// non-overlapping, gap-free entries; every mutation goes through insert_entry
// or remove_entries, and check_contiguity is the single shared checker.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genworld/core.hpp"

namespace genworld::routine {

enum class EntrySource { Generated, Plan, Deviation, Command };

inline std::string_view source_name(EntrySource s) {
    switch (s) {
        case EntrySource::Generated: return "generated";
        case EntrySource::Plan: return "plan";
        case EntrySource::Deviation: return "deviation";
        case EntrySource::Command: return "command";
    }
    return "generated";
}

inline EntrySource source_from_name(std::string_view s) {
    for (auto v : {EntrySource::Generated, EntrySource::Plan, EntrySource::Deviation, EntrySource::Command})
        if (source_name(v) == s) return v;
    throw Error(Errc::CorruptSave, "pygmalion", "unknown entry source " + std::string(s));
}

// A building (by id, with the tile NPCs walk to) or a bare tile.
struct Location {
    BuildingId building;  // 0 when the location is a bare tile
    Tile tile;
    std::string name;

    bool operator==(const Location&) const = default;
};

inline void to_json(json& j, const Location& l) { j = {{"building", l.building}, {"tile", l.tile}, {"name", l.name}}; }
inline void from_json(const json& j, Location& l) {
    l.building = j.at("building").get<BuildingId>();
    l.tile = j.at("tile").get<Tile>();
    l.name = j.at("name").get<std::string>();
}

struct RoutineEntry {
    int start = 0;  // minutes within the day
    int end = 0;
    Location location;
    std::optional<ObjectId> object;
    std::string activity;
    EntrySource source = EntrySource::Generated;
    PlanId plan_id;  // set when source == Plan

    int duration() const { return end - start; }
    bool overlaps(int s, int e) const { return start < e && s < end; }
    bool operator==(const RoutineEntry&) const = default;
};

inline void to_json(json& j, const RoutineEntry& e) {
    j = {{"start", e.start},       {"end", e.end},       {"location", e.location},
         {"activity", e.activity}, {"source", source_name(e.source)}, {"plan_id", e.plan_id}};
    j["object"] = e.object ? json(*e.object) : json(nullptr);
}

inline void from_json(const json& j, RoutineEntry& e) {
    e.start = j.at("start").get<int>();
    e.end = j.at("end").get<int>();
    e.location = j.at("location").get<Location>();
    e.activity = j.at("activity").get<std::string>();
    e.source = source_from_name(j.at("source").get<std::string>());
    e.plan_id = j.at("plan_id").get<PlanId>();
    if (j.at("object").is_null())
        e.object.reset();
    else
        e.object = j.at("object").get<ObjectId>();
}

inline constexpr int kDefaultWake = 360;
inline constexpr int kDefaultSleep = 1320;

struct Routine {
    NpcId npc;
    int day = 0;
    int wake = kDefaultWake;
    int sleep = kDefaultSleep;
    std::vector<RoutineEntry> entries;

    const RoutineEntry* at(int minute) const {
        for (const auto& e : entries)
            if (e.start <= minute && minute < e.end) return &e;
        return nullptr;
    }

    bool operator==(const Routine&) const = default;
};

inline void to_json(json& j, const Routine& r) {
    j = {{"npc_id", r.npc}, {"day", r.day}, {"wake", r.wake}, {"sleep", r.sleep}, {"entries", r.entries}};
}

inline void from_json(const json& j, Routine& r) {
    r.npc = j.at("npc_id").get<NpcId>();
    r.day = j.at("day").get<int>();
    r.wake = j.at("wake").get<int>();
    r.sleep = j.at("sleep").get<int>();
    r.entries = j.at("entries").get<std::vector<RoutineEntry>>();
}

// nullopt when the routine is ordered, non-overlapping and gap-free over [wake, sleep].
inline std::optional<std::string> contiguity_error(const Routine& r) {
    if (r.wake >= r.sleep) return "wake must precede sleep";
    if (r.entries.empty()) return "no entries";
    if (r.entries.front().start != r.wake) return "first entry does not start at wake";
    if (r.entries.back().end != r.sleep) return "last entry does not end at sleep";
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        const auto& e = r.entries[i];
        if (e.start >= e.end) return "empty entry at " + std::to_string(e.start);
        if (i > 0 && r.entries[i - 1].end != e.start)
            return r.entries[i - 1].end < e.start ? "gap at " + std::to_string(r.entries[i - 1].end)
                                                  : "overlap at " + std::to_string(e.start);
    }
    return std::nullopt;
}

inline void check_contiguity(const Routine& r, std::string_view site) {
    if (auto err = contiguity_error(r))
        throw Error(Errc::InvariantViolation, "pygmalion",
                    "routine of npc " + std::to_string(r.npc.value) + " day " + std::to_string(r.day) + " after " +
                        std::string(site) + ": " + *err);
}

inline bool is_protected(const RoutineEntry& e) { return e.source == EntrySource::Plan; }

// True when [start, end) overlaps a plan-sourced entry.
inline bool conflicts_with_plans(const Routine& r, int start, int end) {
    for (const auto& e : r.entries)
        if (is_protected(e) && e.overlaps(start, end)) return true;
    return false;
}

// Insert an entry, truncating or splitting whatever it overlaps. Plan entries
// are never overwritten; the caller checks conflicts_with_plans first.
inline void insert_entry(Routine& r, RoutineEntry entry) {
    entry.start = std::max(entry.start, r.wake);
    entry.end = std::min(entry.end, r.sleep);
    if (entry.start >= entry.end) throw Error(Errc::InvalidParams, "pygmalion", "entry outside the waking day");
    if (conflicts_with_plans(r, entry.start, entry.end))
        throw Error(Errc::InvalidParams, "pygmalion", "entry overlaps a plan entry");
    std::vector<RoutineEntry> out;
    for (const auto& e : r.entries) {
        if (!e.overlaps(entry.start, entry.end)) {
            out.push_back(e);
            continue;
        }
        if (e.start < entry.start) {
            RoutineEntry head = e;
            head.end = entry.start;
            out.push_back(head);
        }
        if (e.end > entry.end) {
            RoutineEntry tail = e;
            tail.start = entry.end;
            out.push_back(tail);
        }
    }
    out.push_back(std::move(entry));
    std::sort(out.begin(), out.end(), [](const RoutineEntry& a, const RoutineEntry& b) { return a.start < b.start; });
    r.entries = std::move(out);
}

// Remove matching entries. Each hole goes to the preceding entry, or to the
// following one when the preceding entry is a plan (or absent); when both
// neighbours are plans the filler covers it.
template <class Pred>
inline std::size_t remove_entries(Routine& r, Pred pred, const RoutineEntry& filler) {
    std::vector<RoutineEntry> kept;
    std::vector<std::pair<int, int>> holes;
    for (const auto& e : r.entries) {
        if (pred(e))
            holes.emplace_back(e.start, e.end);
        else
            kept.push_back(e);
    }
    if (holes.empty()) return 0;
    for (auto [s, e] : holes) {
        auto next = std::find_if(kept.begin(), kept.end(), [s](const RoutineEntry& k) { return k.start >= s; });
        if (next != kept.begin()) {
            auto prev = std::prev(next);
            if (prev->end == s && !is_protected(*prev)) {
                prev->end = e;
                continue;
            }
        }
        if (next != kept.end() && next->start == e && !is_protected(*next)) {
            next->start = s;
            continue;
        }
        RoutineEntry fill = filler;
        fill.start = s;
        fill.end = e;
        fill.source = EntrySource::Generated;
        fill.plan_id = PlanId();
        kept.insert(next, fill);
    }
    r.entries = std::move(kept);
    return holes.size();
}

// ------------------------------ Default template ------------------------------

struct TemplateContext {
    NpcId npc;
    int day = 0;
    int wake = kDefaultWake;
    int sleep = kDefaultSleep;
    Location home;
    std::optional<Location> workplace;
};

// Meals, work (or study for NPCs without a workplace) and leisure, scaled to
// the waking span. Zero-length slots are dropped; boundaries are monotone.
inline Routine default_routine(const TemplateContext& c) {
    Routine r;
    r.npc = c.npc;
    r.day = c.day;
    r.wake = c.wake;
    r.sleep = c.sleep;
    const Location work = c.workplace ? *c.workplace : c.home;
    const std::string work_activity = c.workplace ? "work" : "study and play";
    struct Slot {
        double until;  // fraction of the waking span
        const Location* where;
        std::string activity;
    };
    const std::vector<Slot> slots = {
        {0.06, &c.home, "breakfast"},  {0.40, &work, work_activity}, {0.46, &work, "lunch"},
        {0.73, &work, work_activity}, {0.81, &c.home, "dinner"},    {1.00, &c.home, "leisure"},
    };
    const int span = c.sleep - c.wake;
    int prev = c.wake;
    for (const auto& s : slots) {
        const int end = s.until >= 1.0 ? c.sleep : std::clamp(c.wake + static_cast<int>(std::lround(s.until * span)), prev, c.sleep);
        if (end <= prev) continue;
        RoutineEntry e;
        e.start = prev;
        e.end = end;
        e.location = *s.where;
        e.activity = s.activity;
        r.entries.push_back(e);
        prev = end;
    }
    check_contiguity(r, "default template");
    return r;
}

}  // namespace genworld::routine
