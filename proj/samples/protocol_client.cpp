// Serves a world on a local port and talks to it over the wire protocol.

#include <iostream>

#include "genworld/genworld.hpp"

using namespace genworld;
using namespace std::chrono_literals;

int main() {
    auto table = oracle::ScriptTable::from_json(json::parse(simulation::read_file(GENWORLD_SOURCE_DIR "/data/scripts/village.json")));
    oracle::ScriptedOracle sim_backend(table), interview_backend(table);
    oracle::HashEmbedder embedder;
    oracle::Gateway gateway(sim_backend, embedder);

    gaia::WorldSpec spec;
    spec.seed = 3;
    spec.width = spec.height = 64;
    spec.target_population = 6;
    auto w = simulation::generate_world(spec, gateway);
    w.clock.tick = 17 * 60;  // start in the late afternoon

    server::ServerCore core(std::move(w), sim_backend, interview_backend, embedder);
    server::TcpServer tcp(core, "127.0.0.1", 0);
    tcp.start();
    server::SimLoop loop(core, 2ms);

    server::TcpClient client("127.0.0.1", tcp.port());
    client.send(protocol::hello("sample"));
    const auto welcome = client.receive();
    std::cout << "connected to a world of " << (*welcome)["world"]["npcs"].size() << " villagers\n";
    client.send(protocol::subscribe_events());
    client.receive_type("Snapshot");
    loop.start();

    int shown = 0;
    while (shown < 15) {
        auto m = client.receive_type("Event", 5s);
        if (!m) break;
        std::cout << "  [" << (*m)["at"] << "] " << (*m)["kind"].get<std::string>() << " " << (*m)["payload"].dump() << "\n";
        ++shown;
    }
    loop.stop();
    tcp.stop();
}
