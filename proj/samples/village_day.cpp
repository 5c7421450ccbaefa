// Generates a small village and prints what happens over one simulated day.
//
//   village_day [script.json] [seed]

#include <iostream>

#include "genworld/genworld.hpp"

using namespace genworld;

int main(int argc, char** argv) {
    const std::string script_path = argc > 1 ? argv[1] : GENWORLD_SOURCE_DIR "/data/scripts/village.json";
    gaia::WorldSpec spec;
    spec.seed = argc > 2 ? std::stoull(argv[2]) : 42;
    spec.description = "cozy villages";
    spec.width = spec.height = 128;
    spec.target_population = 8;

    oracle::ScriptedOracle backend(oracle::ScriptTable::from_json(json::parse(simulation::read_file(script_path))));
    oracle::HashEmbedder embedder;
    oracle::Gateway gateway(backend, embedder);

    simulation::GenerationReport report;
    auto w = simulation::generate_world(spec, gateway, &report);
    std::cout << "generated " << report.counts["buildings"] << " buildings, " << report.counts["npcs"] << " villagers\n";
    for (const auto& p : w.population.profiles)
        std::cout << "  " << p.name << " (" << (p.role.empty() ? p.family_role : p.role) << ")\n";

    const auto first_new = w.events.size();
    simulation::run(w, gateway, w.clock.day_length);

    for (std::size_t i = first_new; i < w.events.size(); ++i) {
        const auto& e = w.events[i];
        const auto hhmm = std::to_string(e.at % 1440 / 60) + ":" + (e.at % 60 < 10 ? "0" : "") + std::to_string(e.at % 60);
        if (e.kind == "conversation_started") {
            std::cout << hhmm << "  conversation about " << e.payload["context"].get<std::string>() << "\n";
        } else if (e.kind == "utterance") {
            std::cout << hhmm << "    " << w.profile(e.payload["speaker"].get<NpcId>()).name << ": " << e.payload["text"].get<std::string>()
                      << "\n";
        } else if (e.kind == "reflection") {
            std::cout << hhmm << "  " << w.profile(e.payload["npc_id"].get<NpcId>()).name << " reflects: "
                      << e.payload["text"].get<std::string>() << "\n";
        }
    }
    std::cout << w.events.size() - first_new << " events in one day\n";
}
