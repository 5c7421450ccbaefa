#include <gtest/gtest.h>

#include "genworld/server.hpp"
#include "harness.hpp"

using namespace genworld;
using namespace genworld::world;
using namespace std::chrono_literals;
using testing_support::Harness;
using testing_support::village_script;

namespace {

std::vector<json> of_type(const std::vector<json>& ms, const std::string& type) {
    std::vector<json> out;
    for (const auto& m : ms)
        if (m["type"] == type) out.push_back(m);
    return out;
}

// A core plus its own oracles, built from the shared fixture world.
struct Served {
    oracle::ScriptedOracle sim{village_script()};
    oracle::ScriptedOracle talk{village_script()};
    oracle::HashEmbedder embedder;
    server::ServerCore core;

    explicit Served(World w) : core(std::move(w), sim, talk, embedder) {}

    server::SessionId greet(const std::string& name) {
        const auto id = core.open_session();
        EXPECT_TRUE(core.handle(id, protocol::hello(name)));
        const auto ms = core.outbox(id)->drain();
        EXPECT_EQ(ms.size(), 1u);
        EXPECT_EQ(ms.at(0)["type"], "Welcome");
        return id;
    }

    std::vector<json> drain(server::SessionId id) { return core.outbox(id)->drain(); }
};

World fixture() { return Harness(6, 3, 64, village_script()).w; }

}  // namespace

TEST(Protocol, FramesRoundTripAcrossArbitrarySplits) {
    const json a = protocol::command(NpcId(3), "wave at the baker"), b = protocol::ping();
    const auto bytes = protocol::encode_frame(a) + protocol::encode_frame(b);
    EXPECT_EQ(static_cast<unsigned char>(bytes[3]), a.dump().size());
    for (std::size_t cut = 0; cut <= bytes.size(); ++cut) {
        protocol::FrameDecoder d;
        d.feed(bytes.substr(0, cut));
        std::vector<json> got;
        while (auto m = d.next()) got.push_back(*m);
        d.feed(bytes.substr(cut));
        while (auto m = d.next()) got.push_back(*m);
        ASSERT_EQ(got, (std::vector<json>{a, b})) << cut;
        EXPECT_EQ(d.buffered(), 0u);
    }
}

TEST(Protocol, RejectsMalformedFrames) {
    protocol::FrameDecoder d;
    d.feed(std::string("\x7f\xff\xff\xff", 4));
    EXPECT_THROW(d.next(), Error);
    protocol::FrameDecoder e;
    e.feed(std::string("\0\0\0\3abc", 7));
    EXPECT_THROW(e.next(), Error);
    EXPECT_THROW(protocol::parse_client_message({{"type", "Teleport"}}), Error);
    EXPECT_THROW(protocol::parse_client_message({{"type", "Command"}, {"text", "x"}}), Error);
    EXPECT_THROW(protocol::parse_client_message({{"type", "Subscribe"}}), Error);
    EXPECT_THROW(protocol::parse_client_message({{"type", "Subscribe"}, {"region", {{"x", 0}, {"y", 0}, {"w", 1000}, {"h", 1000}}}}), Error);
    const auto m = protocol::parse_client_message(protocol::interview_end(4, true));
    EXPECT_TRUE(std::get<protocol::InterviewEnd>(m).remember);
}

TEST(Server, HelloFirstAndVersionNegotiation) {
    Served s(fixture());
    const auto a = s.core.open_session();
    EXPECT_FALSE(s.core.handle(a, protocol::ping()));
    auto ms = s.drain(a);
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_EQ(ms[0]["code"], "ProtocolError");
    EXPECT_TRUE(s.core.outbox(a)->closed());

    const auto b = s.core.open_session();
    EXPECT_FALSE(s.core.handle(b, protocol::hello("old", protocol::kProtocolVersion + 1)));
    EXPECT_EQ(s.drain(b).at(0)["code"], "VersionMismatch");

    const auto c = s.greet("ok");
    EXPECT_TRUE(s.core.handle(c, protocol::ping()));
    EXPECT_EQ(s.drain(c).at(0)["type"], "Pong");
}

TEST(Server, CommandsFromTwoClientsKeepArrivalOrder) {
    Served s(fixture());
    const auto a = s.greet("alice"), b = s.greet("bob");
    const auto target_a = s.core.with_world([](const World& w) { return w.population.profiles[0].id; });
    const auto target_b = s.core.with_world([](const World& w) { return w.population.profiles[1].id; });
    ASSERT_TRUE(s.core.handle(a, protocol::command(target_a, "dance")));
    ASSERT_TRUE(s.core.handle(b, protocol::command(target_b, "dance")));
    EXPECT_EQ(of_type(s.drain(a), "Event").at(0)["kind"], "command_queued");
    s.core.step(1);
    const auto order = s.core.with_world([](const World& w) {
        std::vector<std::string> issuers;
        for (const auto& e : w.events)
            if (e.kind == "command_parsed") issuers.push_back(e.payload["issuer"]);
        return issuers;
    });
    EXPECT_EQ(order, (std::vector<std::string>{"alice", "bob"}));

    // A bad target is an Error reply but the session stays open.
    EXPECT_TRUE(s.core.handle(a, protocol::command(NpcId(999), "dance")));
    EXPECT_EQ(s.drain(a).at(0)["code"], "UnknownNpc");
}

TEST(Server, NpcSubscriptionReceivesConversationUtterances) {
    auto w = fixture();
    const auto a = w.population.profiles[0].id, b = w.population.profiles[1].id;
    oracle::ScriptedOracle scratch{village_script()};
    oracle::HashEmbedder emb;
    oracle::Gateway g(scratch, emb);
    pygmalion::start_conversation(w, a, {b}, "the weather");
    w.oracle_next_request_id = g.next_request_id();
    Served s(std::move(w));
    const auto sub = s.greet("watcher"), other = s.greet("other");
    ASSERT_TRUE(s.core.handle(sub, protocol::subscribe_npc(b)));
    const auto snap = s.drain(sub).at(0);
    EXPECT_EQ(snap["type"], "Snapshot");
    EXPECT_EQ(snap["entities"].at(0)["id"], b.value);
    s.core.step(8);
    const auto events = of_type(s.drain(sub), "Event");
    std::size_t utterances = 0;
    for (const auto& e : events) utterances += e["kind"] == "utterance";
    EXPECT_GE(utterances, 1u);
    EXPECT_TRUE(of_type(s.drain(other), "Event").empty());
}

TEST(Server, RegionSubscriptionSnapshotAndDeltas) {
    Served s(fixture());
    const auto id = s.greet("viewer");
    const auto dims = s.core.with_world([](const World& w) { return std::pair{w.spec.width, w.spec.height}; });
    ASSERT_TRUE(s.core.handle(id, protocol::subscribe_region({0, 0, dims.first, dims.second})));
    const auto snap = s.drain(id).at(0);
    EXPECT_EQ(snap["tiles"].size(), static_cast<std::size_t>(dims.first * dims.second));
    EXPECT_FALSE(snap["buildings"].empty());
    const auto npcs = s.core.with_world([](const World& w) { return w.npcs.size(); });
    EXPECT_EQ(snap["entities"].size(), npcs);
    // Work starts mid-morning, so positions change within an hour.
    s.core.step(60);
    const auto deltas = of_type(s.drain(id), "Delta");
    ASSERT_FALSE(deltas.empty());
    for (const auto& d : deltas) EXPECT_FALSE(d["entities"].empty() && d["removed"].empty());
}

TEST(Server, MalformedMessageClosesOnlyThatSession) {
    Served s(fixture()), reference(fixture());
    const auto bad = s.greet("bad"), good = s.greet("good");
    EXPECT_FALSE(s.core.handle(bad, json{{"type", "Subscribe"}, {"npc", "seven"}}));
    EXPECT_EQ(s.drain(bad).at(0)["code"], "ProtocolError");
    s.core.close_session(bad);
    EXPECT_EQ(s.core.session_count(), 1u);
    s.core.step(30);
    reference.core.step(30);
    EXPECT_EQ(s.core.save_text(), reference.core.save_text());
    EXPECT_TRUE(s.core.handle(good, protocol::ping()));
}

TEST(Server, InterviewsRunOnSnapshotsAndRememberAtNextStep) {
    Served s(fixture());
    const auto id = s.greet("reporter");
    const auto npc = s.core.with_world([](const World& w) { return w.population.profiles[0].id; });
    const auto before = s.core.save_text();

    ASSERT_TRUE(s.core.handle(id, protocol::interview_start(npc)));
    const auto session = s.drain(id).at(0)["session"].get<std::uint64_t>();
    ASSERT_TRUE(s.core.handle(id, protocol::interview_turn(session, "How was your day?")));
    const auto reply = s.drain(id).at(0);
    EXPECT_EQ(reply["type"], "InterviewReply");
    EXPECT_FALSE(reply["text"].get<std::string>().empty());
    EXPECT_EQ(s.core.save_text(), before);

    ASSERT_TRUE(s.core.handle(id, protocol::interview_end(session, true)));
    EXPECT_EQ(s.drain(id).at(0)["remember"], true);
    EXPECT_TRUE(s.core.handle(id, protocol::interview_turn(session, "Still there?")));
    EXPECT_EQ(s.drain(id).at(0)["code"], "SessionClosed");

    Served reference(fixture());
    const auto count = [&](Served& x) { return x.core.with_world([&](const World& w) { return w.memories.find(npc)->entries.size(); }); };
    s.core.step(1);
    reference.core.step(1);
    EXPECT_EQ(count(s), count(reference) + 1);
}

TEST(Server, TcpEndToEnd) {
    Served s(fixture());
    server::TcpServer tcp(s.core, "127.0.0.1", 0);
    tcp.start();
    server::SimLoop loop(s.core, 5ms);

    server::TcpClient a("127.0.0.1", tcp.port());
    a.send(protocol::hello("alice"));
    const auto welcome = a.receive();
    ASSERT_TRUE(welcome);
    EXPECT_EQ((*welcome)["type"], "Welcome");
    const auto target = (*welcome)["world"]["npcs"].at(0)["id"].get<std::uint64_t>();
    a.send(protocol::subscribe_events());
    ASSERT_TRUE(a.receive_type("Snapshot"));
    loop.start();
    a.send(protocol::command(NpcId(target), "dance"));
    bool parsed = false;
    for (int i = 0; i < 200 && !parsed; ++i) {
        auto m = a.receive_type("Event", 2000ms);
        ASSERT_TRUE(m);
        parsed = (*m)["kind"] == "command_parsed";
    }
    EXPECT_TRUE(parsed);

    // A garbage frame gets an Error and a closed socket; the other client carries on.
    server::TcpClient b("127.0.0.1", tcp.port());
    b.send_raw(std::string("\0\0\0\2{]", 6));
    const auto err = b.receive();
    ASSERT_TRUE(err);
    EXPECT_EQ((*err)["code"], "ProtocolError");
    EXPECT_FALSE(b.receive(500ms));
    EXPECT_TRUE(b.closed_by_peer());

    a.send(protocol::ping());
    EXPECT_TRUE(a.receive_type("Pong"));
    loop.stop();
    tcp.stop();
}
