// simserver: generate, run, serve and inspect worlds, plus asset tools.
//
// Exit codes: 0 ok, 2 validation error, 3 generation error, 4 IO error.

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "genworld/image_io.hpp"
#include "genworld/server.hpp"
#include "genworld/simulation.hpp"

using namespace genworld;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kGeneration = 3;
constexpr int kIo = 4;

struct Failure {
    int code;
    std::string message;
};

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case Errc::IoError: return kIo;
        case Errc::InvalidParams:
        case Errc::VersionMismatch:
        case Errc::CorruptSave:
        case Errc::InvariantViolation:
        case Errc::UnknownNpc:
        case Errc::UnknownLocation:
        case Errc::UnparseableCommand:
        case Errc::ProtocolError: return kValidation;
        default: return kGeneration;
    }
}

json read_json(const fs::path& path) {
    const auto text = simulation::read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Failure{kValidation, path.string() + ": not valid JSON"};
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure{kIo, "cannot write " + path.string()};
    out << text;
    if (!out) throw Failure{kIo, "write failed for " + path.string()};
}

std::vector<oracle::JournalRecord> read_journal(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Failure{kIo, "cannot read " + path.string()};
    std::vector<oracle::JournalRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Failure{kValidation, path.string() + ": bad journal line"};
        out.push_back(j.get<oracle::JournalRecord>());
    }
    return out;
}

void write_journal(const fs::path& path, const std::vector<oracle::JournalRecord>& records) {
    std::string text;
    for (const auto& r : records) text += json(r).dump() + "\n";
    write_text(path, text);
}

// ------------------------------ Oracle selection ------------------------------

// Live transport over cpp-httplib; url is scheme://host[:port]/path.
oracle::HttpResult http_post(const std::string& url, const std::string& body, const std::string& token, double timeout_s) {
    oracle::HttpResult r;
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(origin);
    const auto secs = static_cast<time_t>(timeout_s);
    const auto usecs = static_cast<time_t>((timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
        r.timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                      res.error() == httplib::Error::ConnectionTimeout;
        r.body = httplib::to_string(res.error());
        return r;
    }
    r.ok = res->status >= 200 && res->status < 300;
    r.status = res->status;
    r.body = res->body;
    return r;
}

struct OracleChoice {
    std::string script;
    std::string replay;
};

bool determinism_forced() {
    const char* v = std::getenv("DETERMINISM");
    return v && std::string(v) == "1";
}

// Script, then journal replay, then the live endpoint when configured and allowed.
// With none of those, an empty script makes every call take its fallback.
std::unique_ptr<oracle::Oracle> make_oracle(const OracleChoice& c) {
    if (!c.script.empty() && !c.replay.empty()) throw Failure{kValidation, "--script and --replay are exclusive"};
    if (!c.script.empty()) {
        try {
            return std::make_unique<oracle::ScriptedOracle>(oracle::ScriptTable::from_json(read_json(c.script)));
        } catch (const json::exception& e) {
            throw Failure{kValidation, c.script + ": " + e.what()};
        }
    }
    if (!c.replay.empty()) return std::make_unique<oracle::JournalOracle>(read_journal(c.replay));
    const char* url = std::getenv("GENWORLD_ORACLE_URL");
    if (url && *url && !determinism_forced()) {
        oracle::EndpointConfig cfg;
        cfg.base_url = url;
        if (const char* m = std::getenv("GENWORLD_ORACLE_MODEL")) cfg.model = m;
        return std::make_unique<oracle::LiveOracle>(cfg, http_post);
    }
    std::cerr << "note: no --script given; every oracle call uses its fallback\n";
    return std::make_unique<oracle::ScriptedOracle>(oracle::ScriptTable{});
}

void add_oracle_options(CLI::App* cmd, OracleChoice& c) {
    cmd->add_option("--script", c.script, "Scripted oracle table (JSON)");
    cmd->add_option("--replay", c.replay, "Replay oracle answers from a journal (JSONL)");
}

simulation::Loaded load(const std::string& path) {
    if (!fs::exists(path)) throw Failure{kIo, "no such file " + path};
    return simulation::load_world(path);
}

// ------------------------------ Subcommands ------------------------------

struct GenerateArgs {
    gaia::WorldSpec spec;
    std::string out;
    std::string report;
    std::string manifest;
    OracleChoice oracle;
};

int cmd_generate(const GenerateArgs& a) {
    auto backend = make_oracle(a.oracle);
    oracle::HashEmbedder embedder;
    oracle::Gateway g(*backend, embedder);
    simulation::GenerationOptions opts;
    daedalus::AssetLibrary library;
    if (!a.manifest.empty()) {
        library = read_json(a.manifest).get<daedalus::AssetLibrary>();
        library.validate(fs::path(a.manifest).parent_path());
        opts.library = &library;
    }
    simulation::GenerationReport report;
    const auto w = simulation::generate_world(a.spec, g, &report, opts);
    const auto journal = g.journal();
    simulation::save_world(w, a.out, &journal);
    if (!a.report.empty()) write_text(a.report, json(report).dump(1) + "\n");
    std::cout << json(report).dump(1) << "\n";
    return kOk;
}

struct RunArgs {
    std::string save;
    std::string out;
    std::int64_t ticks = 0;
    std::string journal;
    std::string commands;
    OracleChoice oracle;
};

// Command trace entries: {"tick": T, "issuer": "...", "npc": ID, "text": "..."}; each is
// submitted just before the tick with that number runs.
int cmd_run(const RunArgs& a) {
    auto loaded = load(a.save);
    auto& w = loaded.world;
    auto backend = make_oracle(a.oracle);
    oracle::HashEmbedder embedder;
    oracle::Gateway g(*backend, embedder);
    std::multimap<std::int64_t, json> trace;
    if (!a.commands.empty())
        for (const auto& c : read_json(a.commands)) trace.emplace(c.at("tick").get<std::int64_t>(), c);
    for (std::int64_t i = 0; i < a.ticks; ++i) {
        auto [lo, hi] = trace.equal_range(w.clock.tick);
        for (auto it = lo; it != hi; ++it)
            wordofgod::submit_command(w, it->second.value("issuer", std::string("trace")), NpcId(it->second.at("npc").get<std::uint64_t>()),
                                      it->second.at("text").get<std::string>());
        simulation::tick(w, g);
    }
    simulation::save_world(w, a.out.empty() ? a.save : a.out);
    if (!a.journal.empty()) write_journal(a.journal, g.journal());
    std::cout << "tick " << w.clock.tick << " day " << w.day() << " events " << w.events.size() << "\n";
    return kOk;
}

struct ServeArgs {
    std::string save;
    std::string bind = "127.0.0.1:7777";
    int tick_ms = 100;
    std::string out;
    OracleChoice oracle;
};

volatile std::sig_atomic_t g_stop = 0;

int cmd_serve(const ServeArgs& a) {
    auto loaded = load(a.save);
    auto sim = make_oracle(a.oracle);
    auto talk = make_oracle(a.oracle);
    oracle::HashEmbedder embedder;
    server::ServerCore core(std::move(loaded.world), *sim, *talk, embedder);
    const auto [host, port] = server::detail::split_host_port(a.bind);
    server::TcpServer tcp(core, host, port);
    tcp.start();
    server::SimLoop loop(core, std::chrono::milliseconds(a.tick_ms));
    loop.start();
    std::cout << "serving on " << host << ":" << tcp.port() << std::endl;
    std::signal(SIGINT, [](int) { g_stop = 1; });
    std::signal(SIGTERM, [](int) { g_stop = 1; });
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    loop.stop();
    tcp.stop();
    if (!a.out.empty()) write_text(a.out, core.save_text());
    return kOk;
}

struct InspectArgs {
    std::string save;
    std::int64_t npc = -1;
    bool settlement = false;
    bool graph = false;
};

int cmd_inspect(const InspectArgs& a) {
    const auto loaded = load(a.save);
    const auto& w = loaded.world;
    json out;
    if (a.npc >= 0) {
        const NpcId id(static_cast<std::uint64_t>(a.npc));
        const auto* p = w.population.find(id);
        if (!p) throw Error(Errc::UnknownNpc, "simserver", "npc " + std::to_string(a.npc));
        out["profile"] = *p;
        out["state"] = w.npcs.at(id);
        const auto* e = w.current_entry(id);
        out["current_activity"] = e ? json(e->activity) : json(nullptr);
        if (const auto* r = w.routine_of(id, w.day())) out["routine_today"] = *r;
        json mem = json::array();
        if (const auto* s = w.memories.find(id))
            for (const auto& m : s->entries)
                mem.push_back({{"id", m.id}, {"kind", memory::kind_name(m.kind)}, {"text", m.text}, {"created_at", m.created_at},
                               {"importance", m.importance}});
        out["memories"] = mem;
        json rel = json::array();
        for (const auto& r : w.population.relationships)
            if (r.a == id || r.b == id) rel.push_back(r);
        out["relationships"] = rel;
    } else if (a.settlement) {
        json buildings = json::array();
        for (const auto& b : w.settlement.buildings)
            buildings.push_back({{"id", b.id},
                                 {"name", world::building_name(w, b.id)},
                                 {"origin", b.origin},
                                 {"size", {b.spec.width, b.spec.height}},
                                 {"asset_ref", b.asset_ref}});
        out = {{"buildings", buildings},
               {"road_tiles", w.roads.road_tiles.size()},
               {"tour", w.roads.tour},
               {"flora", w.flora.size()},
               {"objects", w.objects.size()}};
    } else if (a.graph) {
        json nodes = json::array(), edges = json::array();
        for (const auto& p : w.population.profiles) nodes.push_back({{"id", p.id}, {"name", p.name}, {"role", p.role}});
        for (const auto& r : w.population.relationships)
            edges.push_back({{"a", r.a}, {"b", r.b}, {"kind", moira::relation_name(r.kind)}});
        const int d = moira::SocialGraph::of(w.population).diameter();
        out = {{"nodes", nodes}, {"edges", edges}, {"diameter", d == moira::kUnreachable ? json(nullptr) : json(d)}};
    } else {
        out = {{"spec", w.spec},
               {"tick", w.clock.tick},
               {"day", w.day()},
               {"npcs", w.population.profiles.size()},
               {"buildings", w.settlement.buildings.size()},
               {"events", w.events.size()},
               {"plans", w.plans.size()},
               {"conversations", w.conversations.size()}};
    }
    std::cout << out.dump(1) << "\n";
    return kOk;
}

// ------------------------------ Assets ------------------------------

daedalus::Rgba parse_hex(const std::string& s) {
    std::string h = s;
    if (!h.empty() && h[0] == '#') h.erase(0, 1);
    if (h.size() != 6 && h.size() != 8) throw Failure{kValidation, "bad colour " + s};
    const auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(std::stoi(h.substr(i, 2), nullptr, 16)); };
    return {byte(0), byte(2), byte(4), h.size() == 8 ? byte(6) : std::uint8_t(255)};
}

std::vector<daedalus::Rgba> read_palette(const std::string& path) {
    std::vector<daedalus::Rgba> out;
    for (const auto& c : read_json(path)) out.push_back(parse_hex(c.get<std::string>()));
    if (out.size() > daedalus::kMaxPalette) throw Failure{kValidation, "palette has more than 32 colours"};
    return out;
}

struct AssetArgs {
    std::string input, output, manifest, description, palette;
    int tiles = 1, ppt = 16, tolerance = 24;
};

int cmd_build_manifest(const AssetArgs& a) {
    std::vector<daedalus::ManifestInput> inputs;
    for (const auto& e : read_json(a.input))
        inputs.push_back({e.at("asset_id").get<std::string>(), e.at("image_path").get<std::string>(), e.at("description").get<std::string>(),
                          e.value("tags", std::vector<std::string>{}), e.value("native_size", 1)});
    oracle::HashEmbedder embedder;
    const auto lib = daedalus::build_manifest(inputs, embedder);
    lib.validate(fs::path(a.input).parent_path());
    write_text(a.output, json(lib).dump(1) + "\n");
    std::cout << lib.entries.size() << " entries\n";
    return kOk;
}

int cmd_retrieve(const AssetArgs& a) {
    const auto lib = read_json(a.manifest).get<daedalus::AssetLibrary>();
    oracle::HashEmbedder embedder;
    std::cout << daedalus::retrieve_asset(a.description, lib, embedder) << "\n";
    return kOk;
}

int cmd_unify(const AssetArgs& a) {
    const auto sprite = image_io::read_png(a.input);
    image_io::write_png(daedalus::unify_sprite(sprite, a.tiles, a.ppt, read_palette(a.palette)), a.output);
    return kOk;
}

int cmd_strip(const AssetArgs& a) {
    image_io::write_png(daedalus::remove_background(image_io::read_png(a.input), a.tolerance), a.output);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate, run and serve simulated worlds"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a world and write a save");
    generate->add_option("--seed", gen.spec.seed, "World seed")->required();
    generate->add_option("--desc", gen.spec.description, "World description")->required();
    generate->add_option("--pop", gen.spec.target_population, "Target population");
    generate->add_option("--width", gen.spec.width, "Map width in tiles");
    generate->add_option("--height", gen.spec.height, "Map height in tiles");
    generate->add_option("--sea-level", gen.spec.sea_level, "Sea level in (0, 1)");
    generate->add_option("--degrees-cap", gen.spec.degrees_cap, "Maximum social graph diameter");
    generate->add_option("--day-length", gen.spec.day_length, "Minutes per day");
    generate->add_option("--out", gen.out, "Save file")->required();
    generate->add_option("--report", gen.report, "Also write the generation report here");
    generate->add_option("--manifest", gen.manifest, "Asset library manifest (default: builtin library)");
    add_oracle_options(generate, gen.oracle);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Advance a saved world by some ticks");
    run_cmd->add_option("--save", run.save, "Save file")->required();
    run_cmd->add_option("--ticks", run.ticks, "Ticks to run")->required()->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--out", run.out, "Write here instead of overwriting --save");
    run_cmd->add_option("--journal", run.journal, "Write the oracle request journal (JSONL)");
    run_cmd->add_option("--commands", run.commands, "Player command trace (JSON array)");
    add_oracle_options(run_cmd, run.oracle);

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve a saved world to clients");
    serve_cmd->add_option("--save", serve.save, "Save file")->required();
    serve_cmd->add_option("--bind", serve.bind, "HOST:PORT");
    serve_cmd->add_option("--tick-ms", serve.tick_ms, "Wall-clock milliseconds per tick")->check(CLI::PositiveNumber);
    serve_cmd->add_option("--out", serve.out, "Write the final world here on shutdown");
    add_oracle_options(serve_cmd, serve.oracle);

    InspectArgs inspect;
    auto* inspect_cmd = app.add_subcommand("inspect", "Print parts of a save as JSON");
    inspect_cmd->add_option("--save", inspect.save, "Save file")->required();
    auto* npc_opt = inspect_cmd->add_option("--npc", inspect.npc, "Npc id");
    auto* settle_opt = inspect_cmd->add_flag("--settlement", inspect.settlement, "Buildings and roads");
    auto* graph_opt = inspect_cmd->add_flag("--graph", inspect.graph, "Social graph");
    npc_opt->excludes(settle_opt, graph_opt);
    settle_opt->excludes(graph_opt);

    AssetArgs asset;
    auto* assets = app.add_subcommand("assets", "Asset library tools");
    assets->require_subcommand(1);
    auto* build = assets->add_subcommand("build-manifest", "Embed descriptions into a manifest");
    build->add_option("--input", asset.input, "JSON array of {asset_id, image_path, description, tags, native_size}")->required();
    build->add_option("--out", asset.output, "Manifest to write")->required();
    auto* retrieve = assets->add_subcommand("retrieve", "Best library entry for a description");
    retrieve->add_option("--manifest", asset.manifest, "Manifest")->required();
    retrieve->add_option("--desc", asset.description, "Description")->required();
    auto* unify = assets->add_subcommand("unify", "Rescale and palette-snap a sprite");
    unify->add_option("--in", asset.input, "Input PNG")->required();
    unify->add_option("--out", asset.output, "Output PNG")->required();
    unify->add_option("--tiles", asset.tiles, "Target size in tiles");
    unify->add_option("--ppt", asset.ppt, "Pixels per tile");
    unify->add_option("--palette", asset.palette, "JSON array of #rrggbb colours")->required();
    auto* strip = assets->add_subcommand("strip-background", "Flood-fill the background away");
    strip->add_option("--in", asset.input, "Input PNG")->required();
    strip->add_option("--out", asset.output, "Output PNG")->required();
    strip->add_option("--tolerance", asset.tolerance, "Colour tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*generate) {
            try {
                gen.spec.validate();
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kValidation;
            }
            return cmd_generate(gen);
        }
        if (*run_cmd) return cmd_run(run);
        if (*serve_cmd) return cmd_serve(serve);
        if (*inspect_cmd) return cmd_inspect(inspect);
        if (*build) return cmd_build_manifest(asset);
        if (*retrieve) return cmd_retrieve(asset);
        if (*unify) return cmd_unify(asset);
        if (*strip) return cmd_strip(asset);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
    return kOk;
}
