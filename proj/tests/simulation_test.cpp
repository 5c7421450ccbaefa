#include <gtest/gtest.h>

#include "harness.hpp"

using namespace genworld;
using namespace genworld::world;
using testing_support::Harness;
using testing_support::village_script;

namespace {

Errc code_of(const std::function<void()>& fn, std::string* module = nullptr) {
    try {
        fn();
    } catch (const Error& e) {
        if (module) *module = e.module();
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return Errc::InvalidParams;
}

std::size_t count_events(const World& w, const std::string& kind) {
    return static_cast<std::size_t>(std::count_if(w.events.begin(), w.events.end(), [&](const Event& e) { return e.kind == kind; }));
}

}  // namespace

TEST(Simulation, QuietNightTickOnlyAdvancesClock) {
    Harness h;
    h.set_minute(120);
    simulation::run(h.w, h.gateway, 1);  // settle anyone not yet home
    auto before = simulation::to_save_json(h.w);
    const auto calls = h.oracle_calls();
    simulation::tick(h.w, h.gateway);
    auto after = simulation::to_save_json(h.w);
    EXPECT_EQ(after["clock"]["tick"].get<std::int64_t>(), before["clock"]["tick"].get<std::int64_t>() + 1);
    after["clock"] = before["clock"];
    EXPECT_EQ(after, before);
    EXPECT_EQ(h.oracle_calls(), calls);
}

TEST(Simulation, WorldWithoutNpcsOnlyAdvancesClock) {
    Harness h;
    h.w.population.profiles.clear();
    h.w.population.relationships.clear();
    h.w.npcs.clear();
    h.w.memories = {};
    h.w.routines.clear();
    auto before = simulation::to_save_json(h.w);
    simulation::run(h.w, h.gateway, 100);
    auto after = simulation::to_save_json(h.w);
    EXPECT_EQ(after["clock"]["tick"].get<std::int64_t>(), before["clock"]["tick"].get<std::int64_t>() + 100);
    after["clock"] = before["clock"];
    EXPECT_EQ(after, before);
}

TEST(Simulation, PhasesRunInOrderEveryTick) {
    Harness h;
    std::vector<std::pair<std::int64_t, simulation::TickPhase>> seen;
    simulation::run(h.w, h.gateway, 3, [&](std::int64_t t, simulation::TickPhase p) { seen.emplace_back(t, p); });
    ASSERT_EQ(seen.size(), 21u);
    for (std::size_t i = 0; i < seen.size(); ++i) {
        EXPECT_EQ(seen[i].first, 600 + static_cast<std::int64_t>(i / 7));
        EXPECT_EQ(static_cast<int>(seen[i].second), static_cast<int>(i % 7) + 1);
    }
}

TEST(Simulation, FullDayInvariants) {
    Harness h(8, 5, 96, village_script());
    h.set_minute(0);
    const auto npcs = h.w.population.profiles.size();
    simulation::run(h.w, h.gateway, 1440);
    EXPECT_EQ(h.w.day(), 1);

    // One reflection per npc at rollover.
    for (const auto& p : h.w.population.profiles) {
        const auto& entries = h.w.memories.of(p.id).entries;
        EXPECT_EQ(std::count_if(entries.begin(), entries.end(), [](const auto& m) { return m.kind == memory::MemoryKind::Reflection; }), 1)
            << p.name;
    }
    EXPECT_EQ(count_events(h.w, "reflection"), npcs);

    // At most one utterance per conversation per tick.
    std::set<std::pair<SimTime, std::uint64_t>> slots;
    for (const auto& e : h.w.events)
        if (e.kind == "utterance") EXPECT_TRUE(slots.emplace(e.at, e.payload.at("conversation_id").get<std::uint64_t>()).second);

    // Ended conversations leave one summary per participant.
    std::map<NpcId, long> ended;
    for (const auto& [id, c] : h.w.conversations)
        if (!c.active())
            for (auto n : c.participants) ++ended[n];
    for (const auto& p : h.w.population.profiles) {
        const auto& entries = h.w.memories.of(p.id).entries;
        EXPECT_EQ(std::count_if(entries.begin(), entries.end(),
                                [](const auto& m) { return m.kind == memory::MemoryKind::ConversationSummary; }),
                  ended[p.id]);
    }
    EXPECT_GT(count_events(h.w, "utterance"), 0u);
    EXPECT_NO_THROW(simulation::validate_world(h.w));
    ASSERT_NE(h.w.routine_of(h.npc(0), 1), nullptr);
}

TEST(Simulation, SaveLoadSaveIsByteIdentical) {
    Harness h(6, 3, 64, village_script());
    simulation::run(h.w, h.gateway, 120);
    const auto journal = h.gateway.journal();
    const auto text = simulation::save_text(h.w, &journal);
    const auto loaded = simulation::parse_save(text);
    EXPECT_EQ(simulation::save_text(loaded.world, &loaded.journal), text);
    EXPECT_EQ(loaded.journal, journal);

    // Continuing from the loaded world matches continuing the original.
    oracle::ScriptedOracle backend(village_script());
    oracle::HashEmbedder embedder;
    oracle::Gateway g(backend, embedder);
    auto copy = loaded.world;
    simulation::run(copy, g, 200);
    simulation::run(h.w, h.gateway, 200);
    EXPECT_EQ(simulation::save_text(copy), simulation::save_text(h.w));
}

TEST(Simulation, LoadRejectsBadSaves) {
    Harness h;
    const auto text = simulation::save_text(h.w);
    EXPECT_EQ(code_of([&] { simulation::parse_save(text.substr(0, text.size() / 2)); }), Errc::CorruptSave);
    EXPECT_EQ(code_of([&] { simulation::parse_save("[]"); }), Errc::CorruptSave);

    auto j = json::parse(text);
    j["format_version"] = simulation::kFormatVersion + 1;
    EXPECT_EQ(code_of([&] { simulation::from_save_json(j); }), Errc::VersionMismatch);

    j = json::parse(text);
    j.erase("routines");
    EXPECT_EQ(code_of([&] { simulation::from_save_json(j); }), Errc::CorruptSave);

    j = json::parse(text);
    auto& buildings = j["settlement"]["buildings"];
    ASSERT_GE(buildings.size(), 2u);
    buildings[1]["origin"] = buildings[0]["origin"];
    std::string module;
    EXPECT_EQ(code_of([&] { simulation::from_save_json(j); }, &module), Errc::InvariantViolation);
    EXPECT_EQ(module, "hephaestus");
}

TEST(Simulation, GenerationIsDeterministic) {
    Harness a(6, 11, 64, village_script()), b(6, 11, 64, village_script());
    EXPECT_EQ(simulation::save_text(a.w), simulation::save_text(b.w));
    Harness c(6, 12, 64, village_script());
    EXPECT_NE(simulation::save_text(a.w), simulation::save_text(c.w));
}

TEST(Simulation, GenerationErrorsCarryStage) {
    oracle::ScriptedOracle backend{oracle::ScriptTable{}};
    oracle::HashEmbedder embedder;
    oracle::Gateway g(backend, embedder);
    gaia::WorldSpec spec;
    spec.seed = 1;
    spec.width = spec.height = 64;
    spec.sea_level = 0.99;
    std::string module;
    EXPECT_EQ(code_of([&] { simulation::generate_world(spec, g); }, &module), Errc::InsufficientBuildableArea);
    EXPECT_EQ(module, "hephaestus");

    spec.sea_level = 0.35;
    spec.width = 8;
    EXPECT_EQ(code_of([&] { simulation::generate_world(spec, g); }, &module), Errc::InvalidParams);
    EXPECT_EQ(module, "gaia");
}

TEST(Simulation, ReportCountsMatchWorld) {
    oracle::ScriptedOracle backend{oracle::ScriptTable{}};
    oracle::HashEmbedder embedder;
    oracle::Gateway g(backend, embedder);
    gaia::WorldSpec spec;
    spec.seed = 7;
    spec.width = spec.height = 96;
    spec.target_population = 8;
    simulation::GenerationReport report;
    const auto w = simulation::generate_world(spec, g, &report);
    EXPECT_EQ(report.counts.at("buildings"), w.settlement.buildings.size());
    EXPECT_EQ(report.counts.at("npcs"), w.population.profiles.size());
    EXPECT_EQ(report.stage_ms.size(), 8u);
    EXPECT_EQ(w.events.front().kind, "world_generated");
}

// Frozen digest of the seed-42 fixture world generated with no script entries.
// Any change to generation output shows up here first.
TEST(Simulation, GoldenFixtureDigest) {
    oracle::ScriptedOracle backend{oracle::ScriptTable{}};
    oracle::HashEmbedder embedder;
    oracle::Gateway g(backend, embedder);
    gaia::WorldSpec spec;
    spec.seed = 42;
    spec.description = "cozy villages";
    spec.target_population = 12;
    const auto w = simulation::generate_world(spec, g);
    const auto digest = fnv1a64(simulation::save_text(w));
    EXPECT_EQ(digest, 3866027321381807218ull) << std::hex << digest;
}
