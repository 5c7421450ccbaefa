// Steers one villager with a player command, then interviews them.

#include <iostream>

#include "genworld/genworld.hpp"

using namespace genworld;

int main() {
    auto table = oracle::ScriptTable::from_json(json::parse(simulation::read_file(GENWORLD_SOURCE_DIR "/data/scripts/village.json")));
    oracle::ScriptedOracle backend(table);
    oracle::HashEmbedder embedder;
    oracle::Gateway gateway(backend, embedder);

    gaia::WorldSpec spec;
    spec.seed = 7;
    spec.description = "a riverside hamlet";
    spec.width = spec.height = 96;
    spec.target_population = 6;
    auto w = simulation::generate_world(spec, gateway);
    simulation::run(w, gateway, 9 * 60);  // to 09:00

    const auto& hero = w.population.profiles.front();
    std::cout << "commanding " << hero.name << "\n";
    wordofgod::submit_command(w, "player", hero.id, "go dance in the square");
    simulation::tick(w, gateway);
    for (const auto& e : w.events)
        if (e.kind.rfind("command_", 0) == 0) std::cout << "  " << e.kind << " " << e.payload.dump() << "\n";
    if (const auto* now = w.current_entry(hero.id)) std::cout << hero.name << " is now: " << now->activity << "\n";

    auto session = wordofgod::start_interview(w, hero.id, 1);
    for (const auto* q : {"Who are you?", "What are you doing today?"})
        std::cout << "Q: " << q << "\nA: " << wordofgod::interview(w, session, q, gateway) << "\n";
    const auto before = w.memories.of(hero.id).entries.size();
    wordofgod::end_interview(w, session, true, gateway);
    std::cout << "memories: " << before << " -> " << w.memories.of(hero.id).entries.size() << "\n";
}
