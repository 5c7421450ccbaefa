// genworld/moira.hpp
//
// Population: family plans, lore and profiles, seed relationships with
// reciprocal memories, and social-graph augmentation until every pair of NPCs
// is within `degrees_cap` hops.
#pragma once

#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "genworld/core.hpp"
#include "genworld/hephaestus.hpp"
#include "genworld/memory.hpp"
#include "genworld/oracle.hpp"

namespace genworld::moira {

using memory::SimTime;

struct MoiraConfig {
    int min_family_size = 1;
    int max_family_size = 5;
    int degrees_cap = 4;
    int lore_attempts = 2;
    SimTime seed_epoch = -10080;  // seed memories are spread over the week before day 0
    std::vector<std::string> fallback_roles = {"farmer", "baker", "smith", "merchant", "teacher", "healer"};
    std::vector<std::string> first_names = {
        "Anna",  "John",  "Michael", "Mara",  "Ezra",   "Lena",  "Tomas", "Ida",    "Felix", "Nora",  "Oskar", "Clara",
        "Jonas", "Elsa",  "Hugo",    "Vera",  "Emil",   "Alma",  "Otto",  "Greta",  "Leo",   "Maja",  "Arne",  "Sigrid",
        "Karl",  "Freya", "Nils",    "Hanna", "Petra",  "Rune",  "Saga",  "Theo",   "Una",   "Viggo", "Wilma", "Yrsa",
        "Axel",  "Berit", "Caspar",  "Dagny", "Edvin",  "Frida", "Gustav", "Helga", "Ivar",  "Jorun", "Knut",  "Liv"};
    std::vector<std::string> surnames = {
        "Berg",   "Lind",   "Holm",   "Dahl",   "Strand", "Eklund", "Norberg", "Vik",    "Falk",  "Sund",
        "Hedlund", "Moberg", "Ström",  "Lund",   "Ekberg", "Sjöberg", "Hagen",  "Brandt", "Roos",  "Nyberg",
        "Forsberg", "Borg",  "Wester", "Aspen",  "Alder",  "Fenwick", "Marlow", "Thorne", "Wren",  "Hollis"};
    std::vector<std::string> trait_pool = {"kind",     "curious",  "stubborn", "cheerful", "patient",  "ambitious",
                                           "shy",      "generous", "witty",    "careful",  "brave",    "gossipy",
                                           "diligent", "dreamy",   "proud",    "gentle",   "restless", "honest"};
};

// ------------------------------ Plans ------------------------------

struct MemberPlan {
    std::string family_role;                   // adult | parent | child
    std::optional<std::string> workplace_role;  // adults only

    bool operator==(const MemberPlan&) const = default;
};

struct FamilyPlan {
    int index = 0;
    std::vector<MemberPlan> members;

    bool operator==(const FamilyPlan&) const = default;
};

struct PopulationPlan {
    std::vector<std::string> roles;  // lore-derived role list
    std::vector<FamilyPlan> families;

    std::vector<int> family_sizes() const {
        std::vector<int> out;
        for (const auto& f : families) out.push_back(static_cast<int>(f.members.size()));
        return out;
    }
    std::vector<std::string> adult_roles() const {
        std::vector<std::string> out;
        for (const auto& f : families)
            for (const auto& m : f.members)
                if (m.workplace_role) out.push_back(*m.workplace_role);
        return out;
    }
};

inline bool is_adult_role(std::string_view family_role) { return family_role == "adult" || family_role == "parent"; }

inline std::vector<std::string> workplace_roles(const std::string& world_description, oracle::Gateway& gateway,
                                                const MoiraConfig& config) {
    try {
        const auto r = gateway.ask("workplace_roles", {{"world", world_description}}, oracle::ResponseSchema::json_object({"roles"}));
        const json j = r.object();
        std::vector<std::string> roles;
        if (!j.at("roles").is_array()) throw Error(Errc::SchemaViolation, "moira", "roles not an array");
        for (const auto& v : j.at("roles")) {
            if (!v.is_string()) continue;
            const auto s = trim(v.get<std::string>());
            if (!s.empty() && std::find(roles.begin(), roles.end(), s) == roles.end()) roles.push_back(s);
        }
        if (!roles.empty()) return roles;
    } catch (const Error&) {
    }
    return config.fallback_roles;
}

// Family sizes uniform in [min, max], the last family truncated to hit the
// target; 1 member is an adult, 2 are parents, larger families add children.
inline PopulationPlan plan_families(int target_population, const std::string& world_description, oracle::Gateway& gateway,
                                    Rng& rng, const MoiraConfig& config = {}) {
    if (target_population < 1) throw Error(Errc::InvalidParams, "moira", "target_population must be >= 1");
    PopulationPlan plan;
    plan.roles = workplace_roles(world_description, gateway, config);
    int remaining = target_population;
    int index = 0;
    while (remaining > 0) {
        const int size = std::min(remaining, static_cast<int>(rng.uniform_int(config.min_family_size, config.max_family_size)));
        FamilyPlan f;
        f.index = index++;
        for (int m = 0; m < size; ++m) {
            MemberPlan mp;
            mp.family_role = size == 1 ? "adult" : (m < 2 ? "parent" : "child");
            if (is_adult_role(mp.family_role))
                mp.workplace_role =
                    plan.roles[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(plan.roles.size()) - 1))];
            f.members.push_back(std::move(mp));
        }
        plan.families.push_back(std::move(f));
        remaining -= size;
    }
    return plan;
}

// ------------------------------ Population ------------------------------

struct TraitChange {
    int day = 0;
    std::string change;  // add | remove
    std::string trait;
    MemoryId insight;

    bool operator==(const TraitChange&) const = default;
};

inline void to_json(json& j, const TraitChange& t) {
    j = {{"day", t.day}, {"change", t.change}, {"trait", t.trait}, {"insight", t.insight}};
}
inline void from_json(const json& j, TraitChange& t) {
    t.day = j.at("day").get<int>();
    t.change = j.at("change").get<std::string>();
    t.trait = j.at("trait").get<std::string>();
    t.insight = j.at("insight").get<MemoryId>();
}

struct FamilyLore {
    FamilyId id;
    std::string surname;
    std::string background;
    BuildingId residence;
    std::vector<NpcId> members;

    bool operator==(const FamilyLore&) const = default;
};

inline void to_json(json& j, const FamilyLore& f) {
    j = {{"family_id", f.id}, {"surname", f.surname}, {"background", f.background}, {"residence", f.residence}, {"members", f.members}};
}
inline void from_json(const json& j, FamilyLore& f) {
    f.id = j.at("family_id").get<FamilyId>();
    f.surname = j.at("surname").get<std::string>();
    f.background = j.at("background").get<std::string>();
    f.residence = j.at("residence").get<BuildingId>();
    f.members = j.at("members").get<std::vector<NpcId>>();
}

struct NpcProfile {
    NpcId id;
    std::string name;
    FamilyId family;
    std::string family_role;
    std::string role;  // workplace role, empty for children
    std::string lore;
    std::vector<std::string> traits;
    std::optional<BuildingId> workplace;
    BuildingId home;
    Tile position;
    std::vector<TraitChange> evolution;

    bool is_adult() const { return is_adult_role(family_role); }
    bool operator==(const NpcProfile&) const = default;
};

inline void to_json(json& j, const NpcProfile& p) {
    j = {{"npc_id", p.id},   {"name", p.name},         {"family_id", p.family}, {"family_role", p.family_role},
         {"role", p.role},   {"lore", p.lore},         {"traits", p.traits},    {"home", p.home},
         {"position", p.position}, {"evolution", p.evolution}};
    j["workplace"] = p.workplace ? json(*p.workplace) : json(nullptr);
}
inline void from_json(const json& j, NpcProfile& p) {
    p.id = j.at("npc_id").get<NpcId>();
    p.name = j.at("name").get<std::string>();
    p.family = j.at("family_id").get<FamilyId>();
    p.family_role = j.at("family_role").get<std::string>();
    p.role = j.at("role").get<std::string>();
    p.lore = j.at("lore").get<std::string>();
    p.traits = j.at("traits").get<std::vector<std::string>>();
    p.home = j.at("home").get<BuildingId>();
    p.position = j.at("position").get<Tile>();
    p.evolution = j.at("evolution").get<std::vector<TraitChange>>();
    if (j.at("workplace").is_null())
        p.workplace.reset();
    else
        p.workplace = j.at("workplace").get<BuildingId>();
}

enum class RelationKind { Family, Coworker, Acquaintance, Emergent };

inline std::string_view relation_name(RelationKind k) {
    switch (k) {
        case RelationKind::Family: return "family";
        case RelationKind::Coworker: return "coworker";
        case RelationKind::Acquaintance: return "acquaintance";
        case RelationKind::Emergent: return "emergent";
    }
    return "family";
}

inline RelationKind relation_from_name(std::string_view s) {
    for (auto k : {RelationKind::Family, RelationKind::Coworker, RelationKind::Acquaintance, RelationKind::Emergent})
        if (relation_name(k) == s) return k;
    throw Error(Errc::CorruptSave, "moira", "unknown relationship kind " + std::string(s));
}

struct Relationship {
    NpcId a;  // a < b
    NpcId b;
    RelationKind kind = RelationKind::Family;
    std::vector<MemoryId> seed_memory_refs;

    bool operator==(const Relationship&) const = default;
};

inline void to_json(json& j, const Relationship& r) {
    j = {{"npc_a", r.a}, {"npc_b", r.b}, {"kind", relation_name(r.kind)}, {"seed_memory_refs", r.seed_memory_refs}};
}
inline void from_json(const json& j, Relationship& r) {
    r.a = j.at("npc_a").get<NpcId>();
    r.b = j.at("npc_b").get<NpcId>();
    r.kind = relation_from_name(j.at("kind").get<std::string>());
    r.seed_memory_refs = j.at("seed_memory_refs").get<std::vector<MemoryId>>();
}

struct Population {
    std::vector<FamilyLore> families;
    std::vector<NpcProfile> profiles;
    std::vector<Relationship> relationships;

    NpcProfile* find(NpcId id) {
        for (auto& p : profiles)
            if (p.id == id) return &p;
        return nullptr;
    }
    const NpcProfile* find(NpcId id) const {
        for (const auto& p : profiles)
            if (p.id == id) return &p;
        return nullptr;
    }
    const FamilyLore* family(FamilyId id) const {
        for (const auto& f : families)
            if (f.id == id) return &f;
        return nullptr;
    }
    const Relationship* relation(NpcId x, NpcId y) const {
        const NpcId a = std::min(x, y);
        const NpcId b = std::max(x, y);
        for (const auto& r : relationships)
            if (r.a == a && r.b == b) return &r;
        return nullptr;
    }

    bool operator==(const Population&) const = default;
};

inline void to_json(json& j, const Population& p) {
    j = {{"families", p.families}, {"profiles", p.profiles}, {"relationships", p.relationships}};
}
inline void from_json(const json& j, Population& p) {
    p.families = j.at("families").get<std::vector<FamilyLore>>();
    p.profiles = j.at("profiles").get<std::vector<NpcProfile>>();
    p.relationships = j.at("relationships").get<std::vector<Relationship>>();
}

// Which building each family lives in and where each role works.
struct Assignment {
    std::vector<BuildingId> residences;  // per family
    std::map<std::string, BuildingId> workplaces;
    std::map<BuildingId, std::string> workplace_names;  // shared-context token for coworkers
};

// Residences follow derive_building_needs order (family i -> residence i).
// Workplace names use the generic role wording, which survives analogization.
inline Assignment assign_buildings(const PopulationPlan& plan, const hephaestus::Settlement& settlement) {
    Assignment a;
    std::vector<BuildingId> residences;
    for (const auto& b : settlement.buildings) {
        if (b.spec.function_tag == "residence" && !b.spec.filler) residences.push_back(b.id);
        if (b.spec.function_tag == "workplace")
            for (const auto& r : b.spec.roles) {
                a.workplaces[r] = b.id;
                a.workplace_names[b.id] = "workshop of the " + join(b.spec.roles, " and ");
            }
    }
    if (residences.size() < plan.families.size())
        throw Error(Errc::InvariantViolation, "moira", "fewer residences than families");
    for (std::size_t i = 0; i < plan.families.size(); ++i) a.residences.push_back(residences[i]);
    for (const auto& role : plan.adult_roles())
        if (!a.workplaces.count(role)) throw Error(Errc::InvariantViolation, "moira", "no workplace for role " + role);
    return a;
}

// Building ids without a settlement: residences 1..F, then one workplace per
// distinct role. Used when a population is studied on its own.
inline Assignment synthetic_assignment(const PopulationPlan& plan) {
    Assignment a;
    std::uint32_t next = 1;
    for (std::size_t i = 0; i < plan.families.size(); ++i) a.residences.push_back(BuildingId(next++));
    for (const auto& role : plan.adult_roles())
        if (!a.workplaces.count(role)) {
            const BuildingId id(next++);
            a.workplaces[role] = id;
            a.workplace_names[id] = role + "'s workshop";
        }
    return a;
}

namespace detail {

inline std::vector<std::string> pick_traits(Rng& rng, const MoiraConfig& config) {
    auto pool = config.trait_pool;
    rng.shuffle(pool);
    pool.resize(std::min<std::size_t>(3, pool.size()));
    return pool;
}

inline std::vector<std::string> dedup(const std::vector<std::string>& in) {
    std::vector<std::string> out;
    for (const auto& t : in) {
        const auto s = trim(t);
        if (s.empty()) continue;
        if (std::none_of(out.begin(), out.end(), [&](const std::string& o) { return to_lower(o) == to_lower(s); })) out.push_back(s);
    }
    return out;
}

}  // namespace detail

// Names, lore and traits per family. The oracle answers with
// {"background": text, "members": [{"name", "lore", "traits"}...]}; any
// invalid answer is retried, then replaced by templated lore.
inline Population generate_lore(const PopulationPlan& plan, const Assignment& assignment, const std::string& world_description,
                                oracle::Gateway& gateway, Rng& rng, const MoiraConfig& config = {}) {
    Population pop;
    auto surnames = config.surnames;
    rng.shuffle(surnames);
    std::set<std::string> used_names;
    std::uint32_t next_npc = 1;
    for (const auto& fp : plan.families) {
        FamilyLore fam;
        fam.id = FamilyId(static_cast<std::uint32_t>(fp.index + 1));
        fam.surname = surnames[static_cast<std::size_t>(fp.index) % surnames.size()];
        if (static_cast<std::size_t>(fp.index) >= surnames.size())
            fam.surname += "-" + std::to_string(fp.index / static_cast<int>(surnames.size()) + 1);
        fam.residence = assignment.residences.at(static_cast<std::size_t>(fp.index));

        std::vector<std::string> member_roles;
        for (const auto& m : fp.members) member_roles.push_back(m.workplace_role ? m.family_role + " (" + *m.workplace_role + ")" : m.family_role);

        std::optional<json> answer;
        for (int attempt = 0; attempt < config.lore_attempts && !answer; ++attempt) {
            try {
                const auto r = gateway.ask("family_lore",
                                           {{"world", world_description},
                                            {"family_index", std::to_string(fp.index)},
                                            {"surname", fam.surname},
                                            {"members", join(member_roles, ", ")}},
                                           oracle::ResponseSchema::json_object({"background", "members"}));
                json j = r.object();
                const auto& ms = j.at("members");
                bool ok = j.at("background").is_string() && !trim(j.at("background").get<std::string>()).empty() &&
                          ms.is_array() && ms.size() == fp.members.size();
                std::set<std::string> names_here;
                for (std::size_t i = 0; ok && i < ms.size(); ++i) {
                    const auto& m = ms[i];
                    ok = m.is_object() && m.contains("name") && m.contains("lore") && m.contains("traits") &&
                         m["name"].is_string() && m["lore"].is_string() && m["traits"].is_array();
                    if (!ok) break;
                    const auto name = trim(m["name"].get<std::string>());
                    std::vector<std::string> traits;
                    for (const auto& t : m["traits"])
                        if (t.is_string()) traits.push_back(t.get<std::string>());
                    const auto clean = detail::dedup(traits);
                    ok = !name.empty() && !trim(m["lore"].get<std::string>()).empty() && clean.size() >= 3 && clean.size() <= 6 &&
                         !used_names.count(name) && names_here.insert(name).second;
                }
                if (ok) answer = j;
            } catch (const Error& e) {
                if (e.code() == Errc::Timeout || e.code() == Errc::TransportError) break;
            }
        }

        fam.background = answer ? trim((*answer)["background"].get<std::string>())
                                : "The " + fam.surname + " family has lived in " +
                                      (trim(world_description).empty() ? std::string("this land") : world_description) +
                                      " for generations.";
        auto firsts = config.first_names;
        rng.shuffle(firsts);
        std::size_t next_first = 0;
        for (std::size_t i = 0; i < fp.members.size(); ++i) {
            const auto& mp = fp.members[i];
            NpcProfile p;
            p.id = NpcId(next_npc++);
            p.family = fam.id;
            p.family_role = mp.family_role;
            p.role = mp.workplace_role.value_or("");
            p.home = fam.residence;
            if (mp.workplace_role) p.workplace = assignment.workplaces.at(*mp.workplace_role);
            if (answer) {
                const auto& m = (*answer)["members"][i];
                p.name = trim(m["name"].get<std::string>());
                p.lore = trim(m["lore"].get<std::string>());
                std::vector<std::string> traits;
                for (const auto& t : m["traits"])
                    if (t.is_string()) traits.push_back(t.get<std::string>());
                p.traits = detail::dedup(traits);
            } else {
                do {
                    p.name = firsts[next_first++ % firsts.size()] + " " + fam.surname;
                    if (next_first > firsts.size()) p.name += " " + std::to_string(next_first / firsts.size());
                } while (used_names.count(p.name));
                p.lore = p.name + ", a " + (p.role.empty() ? p.family_role : p.role) + " of the " + fam.surname + " family";
                p.traits = detail::pick_traits(rng, config);
            }
            used_names.insert(p.name);
            fam.members.push_back(p.id);
            pop.profiles.push_back(std::move(p));
        }
        pop.families.push_back(std::move(fam));
    }
    return pop;
}

// ------------------------------ Relationships ------------------------------

struct SeedContext {
    memory::MemoryBank& bank;
    oracle::Gateway& gateway;
    SimTime next_time;  // advanced per seed memory, stays below 0
};

namespace detail {

inline MemoryId seed_memory(SeedContext& ctx, const NpcProfile& self, const NpcProfile& other, RelationKind kind,
                            const std::string& token, const std::string& fallback) {
    std::string text;
    try {
        const auto r = ctx.gateway.ask("seed_memory",
                                       {{"npc", self.name}, {"other", other.name}, {"relation", std::string(relation_name(kind))}, {"context", token}},
                                       oracle::ResponseSchema::free_text());
        text = trim(r.text);
    } catch (const Error& e) {
        if (e.code() == Errc::Timeout || e.code() == Errc::TransportError) throw;
    }
    if (text.empty() || !contains_ci(text, token)) text = fallback;
    const SimTime at = std::min<SimTime>(ctx.next_time++, -1);
    return ctx.bank.add(self.id, memory::MemoryKind::Seed, std::move(text), at,
                        memory::default_importance(memory::MemoryKind::Seed), ctx.gateway.embedder());
}

inline void connect(Population& pop, SeedContext& ctx, NpcId x, NpcId y, RelationKind kind, const std::string& token,
                    const std::string& fallback_a, const std::string& fallback_b) {
    Relationship r;
    r.a = std::min(x, y);
    r.b = std::max(x, y);
    r.kind = kind;
    const auto& pa = *pop.find(r.a);
    const auto& pb = *pop.find(r.b);
    r.seed_memory_refs.push_back(seed_memory(ctx, pa, pb, kind, token, fallback_a));
    r.seed_memory_refs.push_back(seed_memory(ctx, pb, pa, kind, token, fallback_b));
    pop.relationships.push_back(std::move(r));
}

}  // namespace detail

// Family cliques, then coworker cliques among members of different families.
// Every edge carries one seed memory per direction that names the shared
// context (surname or workplace).
inline void seed_relationships(Population& pop, const Assignment& assignment, SeedContext& ctx) {
    for (const auto& fam : pop.families)
        for (std::size_t i = 0; i < fam.members.size(); ++i)
            for (std::size_t k = i + 1; k < fam.members.size(); ++k) {
                const auto& a = *pop.find(std::min(fam.members[i], fam.members[k]));
                const auto& b = *pop.find(std::max(fam.members[i], fam.members[k]));
                detail::connect(pop, ctx, a.id, b.id, RelationKind::Family, fam.surname,
                                "I share the " + fam.surname + " family home with " + b.name + ".",
                                "I share the " + fam.surname + " family home with " + a.name + ".");
            }
    std::map<BuildingId, std::vector<NpcId>> by_work;
    for (const auto& p : pop.profiles)
        if (p.workplace) by_work[*p.workplace].push_back(p.id);
    for (const auto& [wb, ids] : by_work) {
        auto it = assignment.workplace_names.find(wb);
        const std::string place = it == assignment.workplace_names.end() ? "workplace " + std::to_string(wb.value) : it->second;
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t k = i + 1; k < ids.size(); ++k) {
                const auto& a = *pop.find(ids[i]);
                const auto& b = *pop.find(ids[k]);
                if (a.family == b.family || pop.relation(a.id, b.id)) continue;
                detail::connect(pop, ctx, a.id, b.id, RelationKind::Coworker, place,
                                "I work alongside " + b.name + " at the " + place + ".",
                                "I work alongside " + a.name + " at the " + place + ".");
            }
    }
}

// ------------------------------ Social graph ------------------------------

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

struct SocialGraph {
    std::vector<NpcId> nodes;
    std::vector<std::vector<std::size_t>> adj;

    static SocialGraph of(const Population& pop) {
        SocialGraph g;
        std::map<NpcId, std::size_t> index;
        for (const auto& p : pop.profiles) {
            index[p.id] = g.nodes.size();
            g.nodes.push_back(p.id);
        }
        g.adj.resize(g.nodes.size());
        for (const auto& r : pop.relationships) {
            const auto a = index.at(r.a);
            const auto b = index.at(r.b);
            g.adj[a].push_back(b);
            g.adj[b].push_back(a);
        }
        return g;
    }

    std::vector<int> bfs(std::size_t s) const {
        std::vector<int> d(nodes.size(), kUnreachable);
        std::deque<std::size_t> q{s};
        d[s] = 0;
        while (!q.empty()) {
            const auto u = q.front();
            q.pop_front();
            for (auto v : adj[u])
                if (d[v] == kUnreachable) {
                    d[v] = d[u] + 1;
                    q.push_back(v);
                }
        }
        return d;
    }

    // kUnreachable when disconnected; 0 for fewer than two nodes.
    int diameter() const {
        int best = 0;
        for (std::size_t s = 0; s < nodes.size(); ++s)
            for (int d : bfs(s)) best = std::max(best, d);
        return best;
    }
};

// Shared commonality used to justify a bridging edge, or "" when none.
inline std::string commonality(const NpcProfile& a, const NpcProfile& b, const hephaestus::Settlement* settlement) {
    if (!a.role.empty() && a.role == b.role) return a.role;
    if (settlement) {
        const auto* ha = settlement->find(a.home);
        const auto* hb = settlement->find(b.home);
        if (ha && hb && rect_gap(ha->footprint(), hb->footprint()) <= 8) return "neighbour";
    }
    return "";
}

// Adds acquaintance edges between a maximal-distance pair until the graph is
// connected with diameter <= cap. Pairs with a commonality come first, then
// larger summed eccentricity, then the lexicographically smallest pair.
// Each edge turns one pair beyond the cap into a pair at distance 1 and never
// lengthens another, so the loop terminates.
inline int ensure_connectedness(Population& pop, int degrees_cap, SeedContext& ctx,
                                const hephaestus::Settlement* settlement = nullptr) {
    if (degrees_cap < 1) throw Error(Errc::InvalidParams, "moira", "degrees_cap must be >= 1");
    int added = 0;
    for (;;) {
        const auto g = SocialGraph::of(pop);
        const std::size_t n = g.nodes.size();
        if (n < 2) return added;
        std::vector<std::vector<int>> dist(n);
        std::vector<int> ecc(n, 0);
        int maxd = 0;
        for (std::size_t s = 0; s < n; ++s) {
            dist[s] = g.bfs(s);
            for (int d : dist[s]) {
                ecc[s] = std::max(ecc[s], d);
                maxd = std::max(maxd, d);
            }
        }
        if (maxd <= degrees_cap) return added;
        std::optional<std::pair<std::size_t, std::size_t>> best;
        bool best_common = false;
        long best_ecc = -1;
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v) {
                if (dist[u][v] != maxd) continue;
                const bool common = !commonality(*pop.find(g.nodes[u]), *pop.find(g.nodes[v]), settlement).empty();
                const long e = static_cast<long>(std::min(ecc[u], 1 << 20)) + std::min(ecc[v], 1 << 20);
                if (!best || (common && !best_common) || (common == best_common && e > best_ecc)) {
                    best = {u, v};
                    best_common = common;
                    best_ecc = e;
                }
            }
        const auto& a = *pop.find(g.nodes[best->first]);
        const auto& b = *pop.find(g.nodes[best->second]);
        std::string token = commonality(a, b, settlement);
        if (token.empty()) token = "village";
        const std::string how = token == "neighbour" ? "live near" : (token == "village" ? "often cross paths with" : "share the " + token + " trade with");
        detail::connect(pop, ctx, a.id, b.id, RelationKind::Acquaintance, token,
                        "I " + how + " " + b.name + " in the " + (token == "village" || token == "neighbour" ? token : "village") + ".",
                        "I " + how + " " + a.name + " in the " + (token == "village" || token == "neighbour" ? token : "village") + ".");
        ++added;
    }
}

// Population-level invariants; empty means consistent.
inline std::vector<std::string> population_violations(const Population& pop, const memory::MemoryBank& bank,
                                                      int degrees_cap) {
    std::vector<std::string> v;
    std::set<std::pair<NpcId, NpcId>> pairs;
    for (const auto& p : pop.profiles) {
        if (p.traits.empty() || detail::dedup(p.traits).size() != p.traits.size()) v.push_back("traits of " + p.name);
        if (p.is_adult() != p.workplace.has_value()) v.push_back("workplace rule for " + p.name);
    }
    for (const auto& f : pop.families)
        if (f.members.empty()) v.push_back("empty family " + f.surname);
    for (const auto& r : pop.relationships) {
        if (!(r.a < r.b) || !pairs.insert({r.a, r.b}).second) v.push_back("duplicate or unordered relationship");
        const auto* a = pop.find(r.a);
        const auto* b = pop.find(r.b);
        if (!a || !b) {
            v.push_back("relationship with unknown npc");
            continue;
        }
        if ((r.kind == RelationKind::Family) != (a->family == b->family)) v.push_back("family kind mismatch " + a->name + "/" + b->name);
        bool from_a = false, from_b = false;
        for (auto id : r.seed_memory_refs) {
            from_a = from_a || bank.entry(r.a, id);
            from_b = from_b || bank.entry(r.b, id);
        }
        if (!from_a || !from_b) v.push_back("missing seed memory " + a->name + "/" + b->name);
    }
    const int d = SocialGraph::of(pop).diameter();
    if (d > degrees_cap) v.push_back("social graph diameter " + (d == kUnreachable ? std::string("inf") : std::to_string(d)));
    return v;
}

// Lore, seed relationships and connectedness for an already planned and
// housed population. Seed memory timestamps start at config.seed_epoch.
inline Population populate(const PopulationPlan& plan, const Assignment& assignment, const std::string& world_description,
                           oracle::Gateway& gateway, memory::MemoryBank& bank, Rng& rng, const MoiraConfig& config = {},
                           const hephaestus::Settlement* settlement = nullptr) {
    Population pop = generate_lore(plan, assignment, world_description, gateway, rng, config);
    SeedContext ctx{bank, gateway, config.seed_epoch};
    seed_relationships(pop, assignment, ctx);
    ensure_connectedness(pop, config.degrees_cap, ctx, settlement);
    return pop;
}

}  // namespace genworld::moira
