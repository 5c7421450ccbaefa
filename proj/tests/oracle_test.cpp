#include <atomic>
#include <chrono>
#include <thread>

#include <gtest/gtest.h>

#include "genworld/oracle.hpp"

using namespace genworld;
using namespace genworld::oracle;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected genworld::Error";
    return Errc::IoError;
}

OracleRequest request(std::string tid, SlotValues slots, ResponseSchema schema = ResponseSchema::free_text()) {
    return {1, std::move(tid), std::move(slots), std::move(schema)};
}

}  // namespace

TEST(ScriptedOracle, ExactKeyReturnsTextVerbatim) {
    ScriptTable table;
    table.set("greet", {{"name", "Ann"}}, "Hello, Ann!");
    ScriptedOracle o(table);
    EXPECT_EQ(o.complete(request("greet", {{"name", "Ann"}})).text, "Hello, Ann!");
}

TEST(ScriptedOracle, RepeatedRequestIsByteIdentical) {
    ScriptTable table;
    table.set("greet", {{"name", "Ann"}}, "Hello, Ann!");
    ScriptedOracle o(table);
    const auto r = request("greet", {{"name", "Ann"}});
    EXPECT_EQ(o.complete(r).text, o.complete(r).text);
}

TEST(ScriptedOracle, ChoiceOutsideOptionsIsSchemaViolation) {
    ScriptTable table;
    table.set_default("ask", "maybe");
    ScriptedOracle o(table);
    EXPECT_EQ(code_of([&] { o.complete(request("ask", {}, ResponseSchema::choice({"yes", "no"}))); }),
              Errc::SchemaViolation);
}

TEST(ScriptedOracle, FallsBackToTemplateDefault) {
    ScriptTable table;
    table.set("greet", {{"name", "Ann"}}, "Hello, Ann!");
    table.set_default("greet", "Hello, stranger.");
    ScriptedOracle o(table);
    EXPECT_EQ(o.complete(request("greet", {{"name", "Bob"}})).text, "Hello, stranger.");
}

TEST(ScriptedOracle, MissingEntryWithoutDefault) {
    ScriptedOracle o(ScriptTable{});
    EXPECT_EQ(code_of([&] { o.complete(request("greet", {{"name", "Ann"}})); }), Errc::MissingScriptEntry);
}

TEST(ScriptTable, JsonRoundTripPreservesLookups) {
    ScriptTable table;
    table.set("greet", {{"name", "Ann"}}, "Hello, Ann!");
    table.set_default("score", "7");
    const auto back = ScriptTable::from_json(json::parse(table.to_json().dump()));
    EXPECT_EQ(back.lookup("greet", slot_hash({{"name", "Ann"}})), "Hello, Ann!");
    EXPECT_EQ(back.lookup("score", "anything"), "7");
    EXPECT_EQ(back.to_json(), table.to_json());
}

TEST(ScriptTable, RejectsUnknownVersion) {
    EXPECT_EQ(code_of([] { ScriptTable::from_json({{"version", 99}, {"entries", json::array()}}); }),
              Errc::VersionMismatch);
}

TEST(SlotHash, OrderInsensitiveAndValueSensitive) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<std::string, std::string>> pairs;
        const int n = static_cast<int>(rng.uniform_int(1, 6));
        for (int i = 0; i < n; ++i)
            pairs.emplace_back("k" + std::to_string(i), std::to_string(rng.next_u64() % 1000));
        SlotValues forward(pairs.begin(), pairs.end());
        rng.shuffle(pairs);
        SlotValues shuffled;
        for (const auto& p : pairs) shuffled.insert(p);
        EXPECT_EQ(slot_hash(forward), slot_hash(shuffled));
        auto changed = forward;
        changed.begin()->second += "x";
        EXPECT_NE(slot_hash(forward), slot_hash(changed));
    }
    EXPECT_NE(slot_hash({{"ab", "c"}}), slot_hash({{"a", "bc"}}));
}

TEST(Validate, SchemaKinds) {
    EXPECT_NO_THROW(validate(ResponseSchema::free_text(), "hi"));
    EXPECT_THROW(validate(ResponseSchema::free_text(), "  \n"), Error);
    EXPECT_NO_THROW(validate(ResponseSchema::json_object({"a"}), R"({"a": 1})"));
    EXPECT_THROW(validate(ResponseSchema::json_object({"a"}), R"({"b": 1})"), Error);
    EXPECT_THROW(validate(ResponseSchema::json_object(), "[1,2]"), Error);
    EXPECT_NO_THROW(validate(ResponseSchema::score(0, 10), " 7.5 "));
    EXPECT_NO_THROW(validate(ResponseSchema::score(1, 64), "9999"));  // range is the caller's to clamp
    EXPECT_THROW(validate(ResponseSchema::score(0, 10), "seven"), Error);
    EXPECT_THROW(validate(ResponseSchema::score(0, 10), "7 apples"), Error);
}

TEST(Catalog, RenderIsDeterministicAndSlotChecked) {
    const auto& c = default_catalog();
    EXPECT_GE(c.size(), 20u);
    const auto* t = c.find("seed_memory");
    ASSERT_NE(t, nullptr);
    SlotValues s{{"npc", "Ann"}, {"other", "Bob"}, {"relation", "brother"}, {"context", "the Miller family"}};
    EXPECT_EQ(t->render(s), t->render(s));
    EXPECT_NE(t->render(s).find("the Miller family"), std::string::npos);
    EXPECT_NO_THROW(c.check_slots("seed_memory", s));
    s.erase("context");
    EXPECT_THROW(c.check_slots("seed_memory", s), std::logic_error);
    EXPECT_THROW(c.check_slots("no_such_template", {}), std::logic_error);
}

TEST(HashEmbedder, DeterministicUnitLengthSelfSimilar) {
    HashEmbedder e;
    const auto a = e.embed("tree");
    EXPECT_EQ(a, e.embed("tree"));
    EXPECT_EQ(a.values.size(), 64u);
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        std::string text;
        const int len = static_cast<int>(rng.uniform_int(1, 40));
        for (int k = 0; k < len; ++k) text += static_cast<char>(rng.uniform_int(32, 126));
        EXPECT_NEAR(e.embed(text).norm(), 1.0, 1e-6) << text;
    }
    EXPECT_NEAR(cosine(e.embed("a"), e.embed("a")), 1.0, 1e-12);
}

TEST(HashEmbedder, SharedTokensAreMoreSimilar) {
    HashEmbedder e;
    const auto q = e.embed("glass tree with ornaments");
    EXPECT_GT(cosine(q, e.embed("a glass tree")), cosine(q, e.embed("iron anvil")));
}

TEST(HashEmbedder, EmptyTextRejected) {
    HashEmbedder e;
    EXPECT_EQ(code_of([&] { e.embed(""); }), Errc::EmptyText);
}

// ------------------------------ Live adapter ------------------------------

namespace {

std::string chat_body(const std::string& content) {
    return json{{"choices", json::array({{{"message", {{"content", content}}}}})}}.dump();
}

struct FakeTransport {
    explicit FakeTransport(std::vector<HttpResult> r) : replies(std::move(r)) {}

    std::vector<HttpResult> replies;
    std::vector<std::string> bodies;
    std::size_t calls = 0;

    HttpTransport fn() {
        return [this](const std::string&, const std::string& body, const std::string&, double) {
            bodies.push_back(body);
            const auto& r = replies[std::min(calls, replies.size() - 1)];
            ++calls;
            return r;
        };
    }
};

EndpointConfig config() {
    EndpointConfig c;
    c.base_url = "http://localhost:0/v1/chat/completions";
    c.backoff = std::chrono::milliseconds(1);
    return c;
}

}  // namespace

TEST(LiveOracle, ChoicePassThrough) {
    FakeTransport t{{HttpResult{true, false, 200, chat_body("accept"), ""}}};
    std::vector<std::chrono::milliseconds> sleeps;
    LiveOracle o(config(), t.fn(), default_catalog(), [&](auto d) { sleeps.push_back(d); });
    const auto r = o.complete(request("plan_decision",
                                      {{"npc", "a"}, {"traits", "b"}, {"proposer", "c"}, {"activity", "d"}, {"memories", "e"}},
                                      ResponseSchema::choice({"accept", "reject"})));
    EXPECT_EQ(r.choice(), "accept");
    EXPECT_EQ(t.calls, 1u);
    EXPECT_TRUE(sleeps.empty());
}

TEST(LiveOracle, MalformedThreeTimesSurfacesSchemaViolation) {
    FakeTransport t{{HttpResult{true, false, 200, chat_body("perhaps"), ""}}};
    std::vector<std::chrono::milliseconds> sleeps;
    LiveOracle o(config(), t.fn(), default_catalog(), [&](auto d) { sleeps.push_back(d); });
    EXPECT_EQ(code_of([&] { o.complete(request("x", {}, ResponseSchema::choice({"accept", "reject"}))); }),
              Errc::SchemaViolation);
    EXPECT_EQ(t.calls, 3u);
    ASSERT_EQ(sleeps.size(), 2u);
    EXPECT_EQ(sleeps[1], sleeps[0] * 2);  // exponential backoff
}

TEST(LiveOracle, RecoversOnRetry) {
    FakeTransport t{{HttpResult{false, false, 0, "", "connection reset"}, HttpResult{true, false, 200, chat_body("reject"), ""}}};
    LiveOracle o(config(), t.fn(), default_catalog(), [](auto) {});
    EXPECT_EQ(o.complete(request("x", {}, ResponseSchema::choice({"accept", "reject"}))).text, "reject");
    EXPECT_EQ(t.calls, 2u);
}

TEST(LiveOracle, TimeoutBudgetExceeded) {
    auto c = config();
    c.timeout_seconds = 0.05;
    HttpTransport slow = [](const std::string&, const std::string&, const std::string&, double budget) {
        std::this_thread::sleep_for(std::chrono::duration<double>(budget));
        return HttpResult{false, true, 0, "", "timeout"};
    };
    LiveOracle o(c, slow, default_catalog(), [](auto) {});
    EXPECT_EQ(code_of([&] { o.complete(request("x", {})); }), Errc::Timeout);
}

TEST(LiveOracle, TransportErrorAfterRetries) {
    FakeTransport t{{HttpResult{true, false, 503, "", ""}}};
    LiveOracle o(config(), t.fn(), default_catalog(), [](auto) {});
    EXPECT_EQ(code_of([&] { o.complete(request("x", {})); }), Errc::TransportError);
    EXPECT_EQ(t.calls, 3u);
}

TEST(LiveOracle, DeterminismForcesZeroTemperature) {
    auto c = config();
    c.per_template["greet"] = {64, 0.9};
    LiveOracle hot(c, nullptr);
    EXPECT_DOUBLE_EQ(hot.build_body(request("greet", {})).at("temperature").get<double>(), 0.9);
    c.determinism = true;
    LiveOracle cold(c, nullptr);
    EXPECT_DOUBLE_EQ(cold.build_body(request("greet", {})).at("temperature").get<double>(), 0.0);
    EXPECT_EQ(cold.build_body(request("greet", {})).at("max_tokens").get<int>(), 64);
}

// ------------------------------ Gateway ------------------------------

namespace {

TemplateCatalog test_catalog() {
    TemplateCatalog c;
    c.add({"greet", {"name"}, "Say hello to {name}."});
    return c;
}

// Completes with jittered latency so that completion order differs from issue order.
class SlowOracle : public Oracle {
public:
    OracleResponse complete(const OracleRequest& r) override {
        std::this_thread::sleep_for(std::chrono::milliseconds((r.request_id * 7919) % 13));
        ++calls;
        return {r.request_id, "hi " + r.slots.at("name")};
    }
    std::atomic<int> calls{0};
};

}  // namespace

TEST(Gateway, RequestIdsIncreaseAndJournalRecordsCalls) {
    ScriptTable table;
    table.set_default("greet", "hello");
    ScriptedOracle backend(table);
    HashEmbedder embedder;
    const auto catalog = test_catalog();
    Gateway g(backend, embedder, catalog);
    const auto a = g.ask("greet", {{"name", "A"}}, ResponseSchema::free_text());
    const auto b = g.ask("greet", {{"name", "B"}}, ResponseSchema::free_text());
    EXPECT_LT(a.request_id, b.request_id);
    ASSERT_EQ(g.journal().size(), 2u);
    EXPECT_EQ(g.journal()[0].slot_hash, slot_hash({{"name", "A"}}));
    EXPECT_THROW(g.ask("greet", {}, ResponseSchema::free_text()), std::logic_error);
}

TEST(Gateway, BatchResultsComeBackInRequestOrder) {
    SlowOracle backend;
    HashEmbedder embedder;
    const auto catalog = test_catalog();
    Gateway g(backend, embedder, catalog);
    std::vector<PendingRequest> batch;
    for (int i = 0; i < 12; ++i) batch.push_back({"greet", {{"name", std::to_string(i)}}, ResponseSchema::free_text()});
    const auto out = g.ask_batch(batch);
    ASSERT_EQ(out.size(), 12u);
    for (int i = 0; i < 12; ++i) EXPECT_EQ(std::get<OracleResponse>(out[static_cast<std::size_t>(i)]).text, "hi " + std::to_string(i));
    for (std::size_t i = 1; i < g.journal().size(); ++i)
        EXPECT_LT(g.journal()[i - 1].request_id, g.journal()[i].request_id);
}

TEST(Gateway, JournalReplayReproducesResponses) {
    ScriptTable table;
    table.set("greet", {{"name", "A"}}, "hello A");
    ScriptedOracle backend(table);
    HashEmbedder embedder;
    const auto catalog = test_catalog();
    Gateway first(backend, embedder, catalog);
    first.ask("greet", {{"name", "A"}}, ResponseSchema::free_text());
    EXPECT_THROW(first.ask("greet", {{"name", "B"}}, ResponseSchema::free_text()), Error);

    JournalOracle replay(first.journal());
    Gateway second(replay, embedder, catalog);
    EXPECT_EQ(second.ask("greet", {{"name", "A"}}, ResponseSchema::free_text()).text, "hello A");
    EXPECT_THROW(second.ask("greet", {{"name", "B"}}, ResponseSchema::free_text()), Error);
    EXPECT_EQ(second.journal(), first.journal());

    Gateway diverged(replay, embedder, catalog);
    EXPECT_EQ(code_of([&] { diverged.ask("greet", {{"name", "Z"}}, ResponseSchema::free_text()); }),
              Errc::MissingScriptEntry);
}
