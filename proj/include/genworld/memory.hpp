// genworld/memory.hpp
//
// Per-NPC memory streams scored by recency, importance and relevance.
#pragma once

#include <string>
#include <vector>

#include "genworld/core.hpp"
#include "genworld/oracle.hpp"

namespace genworld::memory {

// Minutes since world start. Seed memories predate day 0 and are negative.
using SimTime = std::int64_t;

enum class MemoryKind { Seed, Observation, ConversationSummary, Reflection, PlanDecision };

inline std::string_view kind_name(MemoryKind k) {
    switch (k) {
        case MemoryKind::Seed: return "seed";
        case MemoryKind::Observation: return "observation";
        case MemoryKind::ConversationSummary: return "conversation_summary";
        case MemoryKind::Reflection: return "reflection";
        case MemoryKind::PlanDecision: return "plan_decision";
    }
    return "seed";
}

inline MemoryKind kind_from_name(std::string_view s) {
    for (auto k : {MemoryKind::Seed, MemoryKind::Observation, MemoryKind::ConversationSummary, MemoryKind::Reflection,
                   MemoryKind::PlanDecision})
        if (kind_name(k) == s) return k;
    throw Error(Errc::CorruptSave, "pygmalion", "unknown memory kind " + std::string(s));
}

// Importance used when nothing better is known.
inline double default_importance(MemoryKind k) {
    switch (k) {
        case MemoryKind::Seed: return 0.5;
        case MemoryKind::ConversationSummary: return 0.6;
        case MemoryKind::PlanDecision: return 0.7;
        case MemoryKind::Reflection: return 0.5;
        case MemoryKind::Observation: return 0.1;
    }
    return 0.5;
}

struct MemoryEntry {
    MemoryId id;
    NpcId npc;
    MemoryKind kind = MemoryKind::Seed;
    std::string text;
    SimTime created_at = 0;
    SimTime last_access = 0;
    double importance = 0.5;
    oracle::EmbeddingVector embedding;

    bool operator==(const MemoryEntry&) const = default;
};

inline void to_json(json& j, const MemoryEntry& m) {
    j = {{"memory_id", m.id},          {"npc_id", m.npc},           {"kind", kind_name(m.kind)},
         {"text", m.text},             {"created_at", m.created_at}, {"last_access", m.last_access},
         {"importance", m.importance}, {"embedding", m.embedding.values}};
}

inline void from_json(const json& j, MemoryEntry& m) {
    m.id = j.at("memory_id").get<MemoryId>();
    m.npc = j.at("npc_id").get<NpcId>();
    m.kind = kind_from_name(j.at("kind").get<std::string>());
    m.text = j.at("text").get<std::string>();
    m.created_at = j.at("created_at").get<SimTime>();
    m.last_access = j.at("last_access").get<SimTime>();
    m.importance = j.at("importance").get<double>();
    m.embedding.values = j.at("embedding").get<std::vector<double>>();
}

struct ScoreWeights {
    double alpha = 1.0;  // recency
    double beta = 1.0;   // importance
    double gamma = 1.0;  // relevance
    double decay_per_hour = 0.995;
};

inline double recency(const MemoryEntry& m, SimTime now, const ScoreWeights& w) {
    const double hours = static_cast<double>(now - m.last_access) / 60.0;
    return std::pow(w.decay_per_hour, std::max(0.0, hours));
}

inline double score_memory(const MemoryEntry& m, const oracle::EmbeddingVector& query, SimTime now,
                           const ScoreWeights& w = {}) {
    const double relevance = (1.0 + oracle::cosine(query, m.embedding)) / 2.0;
    return w.alpha * recency(m, now, w) + w.beta * m.importance + w.gamma * relevance;
}

struct Scored {
    std::size_t index;
    double score;
};

class MemoryStream {
public:
    std::vector<MemoryEntry> entries;

    void add(MemoryEntry m) {
        if (m.importance < 0 || m.importance > 1) throw Error(Errc::InvalidParams, "pygmalion", "importance outside [0,1]");
        if (m.last_access < m.created_at) m.last_access = m.created_at;
        entries.push_back(std::move(m));
    }

    std::size_t size() const { return entries.size(); }

    // Ranking without side effects: descending score, then newer first, then lower id.
    std::vector<Scored> rank(const oracle::EmbeddingVector& query, std::size_t k, SimTime now,
                             const ScoreWeights& w = {}) const {
        std::vector<Scored> all;
        all.reserve(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) all.push_back({i, score_memory(entries[i], query, now, w)});
        const auto better = [this](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            const auto& ea = entries[a.index];
            const auto& eb = entries[b.index];
            if (ea.created_at != eb.created_at) return ea.created_at > eb.created_at;
            return ea.id < eb.id;
        };
        const std::size_t n = std::min(k, all.size());
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), better);
        all.resize(n);
        return all;
    }

    // Top-k entries; their last_access moves to `now`.
    std::vector<MemoryEntry> retrieve(const oracle::EmbeddingVector& query, std::size_t k, SimTime now,
                                      const ScoreWeights& w = {}) {
        if (k == 0) throw Error(Errc::InvalidParams, "pygmalion", "k must be >= 1");
        const auto top = rank(query, k, now, w);
        std::vector<MemoryEntry> out;
        out.reserve(top.size());
        for (const auto& s : top) {
            auto& e = entries[s.index];
            e.last_access = std::max(e.last_access, now);
            out.push_back(e);
        }
        return out;
    }

    bool operator==(const MemoryStream&) const = default;
};

inline void to_json(json& j, const MemoryStream& s) { j = s.entries; }
inline void from_json(const json& j, MemoryStream& s) { s.entries = j.get<std::vector<MemoryEntry>>(); }

// All streams plus the world-wide memory id counter.
struct MemoryBank {
    std::map<NpcId, MemoryStream> streams;
    std::uint64_t next_id = 1;

    MemoryId add(NpcId npc, MemoryKind kind, std::string text, SimTime at, double importance, oracle::Embedder& embedder) {
        MemoryEntry m;
        m.id = MemoryId(next_id++);
        m.npc = npc;
        m.kind = kind;
        m.embedding = embedder.embed(text.empty() ? std::string_view("(empty)") : std::string_view(text));
        m.text = std::move(text);
        m.created_at = at;
        m.last_access = at;
        m.importance = std::clamp(importance, 0.0, 1.0);
        streams[npc].add(std::move(m));
        return MemoryId(next_id - 1);
    }

    MemoryStream& of(NpcId npc) { return streams[npc]; }
    const MemoryStream* find(NpcId npc) const {
        auto it = streams.find(npc);
        return it == streams.end() ? nullptr : &it->second;
    }

    const MemoryEntry* entry(NpcId npc, MemoryId id) const {
        const auto* s = find(npc);
        if (!s) return nullptr;
        for (const auto& e : s->entries)
            if (e.id == id) return &e;
        return nullptr;
    }

    std::size_t count(NpcId npc, MemoryKind kind) const {
        const auto* s = find(npc);
        if (!s) return 0;
        return static_cast<std::size_t>(std::count_if(s->entries.begin(), s->entries.end(), [kind](const MemoryEntry& e) { return e.kind == kind; }));
    }

    bool operator==(const MemoryBank&) const = default;
};

inline void to_json(json& j, const MemoryBank& b) {
    json streams = json::object();
    for (const auto& [npc, s] : b.streams) streams[std::to_string(npc.value)] = s;
    j = {{"next_memory_id", b.next_id}, {"streams", streams}};
}

inline void from_json(const json& j, MemoryBank& b) {
    b.next_id = j.at("next_memory_id").get<std::uint64_t>();
    b.streams.clear();
    for (const auto& [key, s] : j.at("streams").items())
        b.streams[NpcId(static_cast<std::uint32_t>(std::stoul(key)))] = s.get<MemoryStream>();
}

inline std::vector<std::string> texts(const std::vector<MemoryEntry>& ms) {
    std::vector<std::string> out;
    for (const auto& m : ms) out.push_back(m.text);
    return out;
}

}  // namespace genworld::memory
