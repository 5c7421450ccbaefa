// genworld/oracle.hpp
//
// The one boundary through which generated text and embeddings enter the
// simulation. Everything above this layer talks to a Gateway, which stamps
// request ids, validates responses against their schema and keeps a journal
// of (request_id, template_id, slot_hash) records for replay checks.
//
// Backends:
//   ScriptedOracle  table lookup keyed by (template_id, slot_hash) or a per-template default
//   JournalOracle   replays the responses recorded by a previous run, by request id
//   LiveOracle      chat-completions style HTTP adapter with retries (transport injected)
//
#pragma once

#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "genworld/core.hpp"

namespace genworld::oracle {

// ------------------------------ Templates ------------------------------

struct PromptTemplate {
    std::string id;
    std::vector<std::string> slots;
    std::string text;  // static text with {slot} placeholders

    std::string render(const SlotValues& values) const {
        std::string out;
        out.reserve(text.size() + 64);
        for (std::size_t i = 0; i < text.size();) {
            if (text[i] == '{') {
                const auto close = text.find('}', i);
                if (close != std::string::npos) {
                    const auto name = text.substr(i + 1, close - i - 1);
                    if (auto it = values.find(name); it != values.end()) {
                        out += it->second;
                        i = close + 1;
                        continue;
                    }
                }
            }
            out += text[i++];
        }
        return out;
    }
};

class TemplateCatalog {
public:
    void add(PromptTemplate t) {
        if (by_id_.count(t.id)) throw std::logic_error("duplicate template id: " + t.id);
        by_id_.emplace(t.id, std::move(t));
    }

    const PromptTemplate* find(std::string_view id) const {
        auto it = by_id_.find(std::string(id));
        return it == by_id_.end() ? nullptr : &it->second;
    }

    // Slot names supplied by a call site must match the declaration exactly.
    void check_slots(std::string_view id, const SlotValues& values) const {
        const auto* t = find(id);
        if (!t) throw std::logic_error("unknown template: " + std::string(id));
        if (t->slots.size() != values.size())
            throw std::logic_error("slot count mismatch for template " + std::string(id));
        for (const auto& s : t->slots)
            if (!values.count(s))
                throw std::logic_error("missing slot '" + s + "' for template " + std::string(id));
    }

    std::size_t size() const { return by_id_.size(); }
    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : by_id_) out.push_back(k);
        return out;
    }

private:
    std::map<std::string, PromptTemplate> by_id_;
};

inline const TemplateCatalog& default_catalog() {
    static const TemplateCatalog catalog = [] {
        TemplateCatalog c;
        auto add = [&](std::string id, std::vector<std::string> slots, std::string text) {
            c.add({std::move(id), std::move(slots), std::move(text)});
        };
        add("analogize_biome", {"world", "biome"},
            "The player described this world: \"{world}\". Name the region of this world that plays the "
            "role of a {biome} biome. Answer with the name only.");
        add("analogize_descriptor", {"world", "category", "descriptor"},
            "The player described this world: \"{world}\". Describe the {category} that fills the role of "
            "\"{descriptor}\" in this world, as a short visual description.");
        add("estimate_size", {"description", "function_tag"},
            "Estimate the footprint, in 1-meter tiles, of: {description} (function: {function_tag}). "
            "Answer with a single number between 1 and 64.");
        add("workplace_roles", {"world"},
            "List the occupations practiced in this world: \"{world}\". Respond as JSON "
            "{\"roles\": [string, ...]}.");
        add("family_lore", {"world", "family_index", "surname", "members"},
            "World: \"{world}\". Family #{family_index}, surname {surname}, members: {members}. Write the "
            "family background and, for each member, a name, a short personal lore and 3 to 6 traits. "
            "Respond as JSON {\"background\": string, \"members\": [{\"name\": string, \"lore\": string, "
            "\"traits\": [string]}]}.");
        add("seed_memory", {"npc", "other", "relation", "context"},
            "Write, from the point of view of {npc}, one sentence remembering {other}, their {relation}. "
            "Mention {context}.");
        add("daily_routine", {"npc", "traits", "lore", "home", "workplace", "objects", "day", "wake", "sleep"},
            "{npc} ({traits}). {lore}. Home: {home}. Workplace: {workplace}. Usable objects: {objects}. "
            "Write the schedule for day {day} from minute {wake} to minute {sleep} as JSON {\"entries\": "
            "[{\"start\": int, \"end\": int, \"location\": \"home\"|\"work\", \"object\": id|null, "
            "\"activity\": string}]}.");
        add("react", {"npc", "activity", "observation"},
            "{npc} is {activity} and notices: {observation}. Respond as JSON {\"decision\": "
            "\"continue\"|\"deviate\"|\"converse\", \"action\": string}.");
        add("conversation_outline", {"participants", "context", "memories"},
            "Participants: {participants}. Context: {context}. Relevant memories: {memories}. Outline the "
            "next part of their conversation.");
        add("utterance", {"speaker", "participants", "outline", "last_line", "memories", "observations", "turn"},
            "Outline: {outline}. Last line: {last_line}. {speaker} remembers: {memories}. Recent "
            "surroundings: {observations}. Write {speaker}'s next line (turn {turn}) in a conversation with "
            "{participants}.");
        add("detect_proposal", {"speaker", "utterance"},
            "Does this line by {speaker} propose a joint future activity? \"{utterance}\". Answer proposal or "
            "none.");
        add("plan_details", {"proposer", "utterance", "invitees"},
            "{proposer} said \"{utterance}\" to {invitees}. Extract the plan as JSON {\"activity\": string, "
            "\"location\": string, \"day_offset\": int, \"start\": int, \"end\": int}.");
        add("plan_decision", {"npc", "traits", "proposer", "activity", "memories"},
            "{npc} ({traits}) is invited by {proposer} to: {activity}. Relevant memories: {memories}. Answer "
            "accept or reject.");
        add("conversation_continue", {"participants", "transcript", "turn"},
            "Conversation between {participants} so far (turn {turn}):\n{transcript}\nShould it continue? "
            "Answer continue or end.");
        add("conversation_summary", {"npc", "participants", "transcript"},
            "Summarise this conversation between {participants} in one sentence from the point of view of "
            "{npc}:\n{transcript}");
        add("reflection_insight", {"npc", "traits", "day", "events"},
            "{npc} ({traits}) looks back on day {day}: {events}. State one high-level insight in first "
            "person.");
        add("reflection_importance", {"npc", "insight"},
            "On a scale of 0 to 10, how important is this insight to {npc}? \"{insight}\". Answer with a "
            "number.");
        add("trait_evolution", {"npc", "traits", "insight"},
            "{npc} has traits {traits} and realised: \"{insight}\". Respond as JSON {\"op\": "
            "\"add\"|\"remove\"|\"none\", \"trait\": string}.");
        add("plan_reconsider", {"npc", "activity", "day", "insight"},
            "{npc} agreed to \"{activity}\" on day {day}. Today they realised: \"{insight}\". Answer keep or "
            "withdraw.");
        add("parse_command", {"npc", "command", "npcs", "locations"},
            "You are the subconscious of {npc}. Known people: {npcs}. Known places: {locations}. Break this "
            "instruction into steps: \"{command}\". Respond as JSON {\"steps\": [...]}.");
        add("interview_answer", {"npc", "profile", "memories", "transcript", "question"},
            "You are {npc}. {profile}. You remember: {memories}. Interview so far:\n{transcript}\nQuestion: "
            "{question}\nAnswer in character.");
        add("interview_summary", {"npc", "transcript"},
            "Summarise this interview in one sentence from the point of view of {npc}:\n{transcript}");
        return c;
    }();
    return catalog;
}

// ------------------------------ Requests & responses ------------------------------

struct ResponseSchema {
    enum class Kind { FreeText, JsonObject, Choice, Score };

    Kind kind = Kind::FreeText;
    std::vector<std::string> options;  // Choice: allowed answers; JsonObject: required keys
    double lo = 0.0;                   // Score: advertised range (callers clamp)
    double hi = 0.0;

    static ResponseSchema free_text() { return {}; }
    static ResponseSchema json_object(std::vector<std::string> required_keys = {}) {
        return {Kind::JsonObject, std::move(required_keys), 0, 0};
    }
    static ResponseSchema choice(std::vector<std::string> opts) { return {Kind::Choice, std::move(opts), 0, 0}; }
    static ResponseSchema score(double lo, double hi) { return {Kind::Score, {}, lo, hi}; }
};

struct OracleRequest {
    std::uint64_t request_id = 0;
    std::string template_id;
    SlotValues slots;
    ResponseSchema schema;
};

struct OracleResponse {
    std::uint64_t request_id = 0;
    std::string text;

    json object() const { return json::parse(text); }
    double score() const { return std::stod(trim(text)); }
    std::string choice() const { return trim(text); }
};

inline std::optional<double> parse_number(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Validates, never repairs.
inline void validate(const ResponseSchema& schema, const std::string& text) {
    auto fail = [&](const std::string& why) { throw Error(Errc::SchemaViolation, "oracle", why); };
    switch (schema.kind) {
        case ResponseSchema::Kind::FreeText:
            if (trim(text).empty()) fail("empty free text");
            return;
        case ResponseSchema::Kind::JsonObject: {
            json j = json::parse(text, nullptr, false);
            if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
            for (const auto& key : schema.options)
                if (!j.contains(key)) fail("missing key '" + key + "'");
            return;
        }
        case ResponseSchema::Kind::Choice:
            if (std::find(schema.options.begin(), schema.options.end(), trim(text)) == schema.options.end())
                fail("'" + trim(text) + "' is not one of the options");
            return;
        case ResponseSchema::Kind::Score:
            if (!parse_number(text)) fail("not a number: '" + text + "'");
            return;
    }
}

// ------------------------------ Backends ------------------------------

class Oracle {
public:
    virtual ~Oracle() = default;
    virtual OracleResponse complete(const OracleRequest& request) = 0;
};

class ScriptTable {
public:
    static constexpr int kVersion = 1;
    static constexpr const char* kDefaultKey = "default";

    void set(const std::string& template_id, const SlotValues& slots, std::string response) {
        entries_[template_id][slot_hash(slots)] = std::move(response);
    }
    void set_hash(const std::string& template_id, const std::string& hash, std::string response) {
        entries_[template_id][hash] = std::move(response);
    }
    void set_default(const std::string& template_id, std::string response) {
        entries_[template_id][kDefaultKey] = std::move(response);
    }

    std::optional<std::string> lookup(const std::string& template_id, const std::string& hash) const {
        auto t = entries_.find(template_id);
        if (t == entries_.end()) return std::nullopt;
        if (auto e = t->second.find(hash); e != t->second.end()) return e->second;
        if (auto d = t->second.find(kDefaultKey); d != t->second.end()) return d->second;
        return std::nullopt;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [_, m] : entries_) n += m.size();
        return n;
    }

    json to_json() const {
        json entries = json::array();
        for (const auto& [tid, m] : entries_)
            for (const auto& [key, response] : m)
                entries.push_back({{"template_id", tid}, {"slot_hash", key}, {"response", response}});
        return {{"version", kVersion}, {"entries", entries}};
    }

    static ScriptTable from_json(const json& j) {
        if (!j.is_object() || j.value("version", 0) != kVersion)
            throw Error(Errc::VersionMismatch, "oracle", "script table version");
        ScriptTable t;
        for (const auto& e : j.at("entries"))
            t.entries_[e.at("template_id").get<std::string>()][e.at("slot_hash").get<std::string>()] =
                e.at("response").get<std::string>();
        return t;
    }

    // Merges `other` over this table (other wins on key collisions).
    void merge(const ScriptTable& other) {
        for (const auto& [tid, m] : other.entries_)
            for (const auto& [key, response] : m) entries_[tid][key] = response;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> entries_;
};

class ScriptedOracle : public Oracle {
public:
    explicit ScriptedOracle(ScriptTable table) : table_(std::move(table)) {}

    OracleResponse complete(const OracleRequest& request) override {
        auto text = table_.lookup(request.template_id, slot_hash(request.slots));
        if (!text) throw Error(Errc::MissingScriptEntry, "oracle", request.template_id);
        validate(request.schema, *text);
        return {request.request_id, *text};
    }

    ScriptTable& table() { return table_; }

private:
    ScriptTable table_;
};

struct JournalRecord {
    std::uint64_t request_id = 0;
    std::string template_id;
    std::string slot_hash;
    std::optional<std::string> response;  // absent when the backend failed
    std::string error;                    // Errc name when it failed

    bool operator==(const JournalRecord&) const = default;
};

inline void to_json(json& j, const JournalRecord& r) {
    j = {{"request_id", r.request_id}, {"template_id", r.template_id}, {"slot_hash", r.slot_hash}};
    if (r.response) j["response"] = *r.response;
    if (!r.error.empty()) j["error"] = r.error;
}

inline void from_json(const json& j, JournalRecord& r) {
    r.request_id = j.at("request_id").get<std::uint64_t>();
    r.template_id = j.at("template_id").get<std::string>();
    r.slot_hash = j.at("slot_hash").get<std::string>();
    r.response = j.contains("response") ? std::optional(j.at("response").get<std::string>()) : std::nullopt;
    r.error = j.value("error", "");
}

// Replays a recorded run. Each request id must find its record with the same
// template and slot hash; anything else is a divergence. Read-only, so safe
// under concurrent completion.
class JournalOracle : public Oracle {
public:
    explicit JournalOracle(const std::vector<JournalRecord>& records) {
        for (const auto& r : records) by_id_.emplace(r.request_id, r);
    }

    OracleResponse complete(const OracleRequest& request) override {
        auto it = by_id_.find(request.request_id);
        if (it == by_id_.end())
            throw Error(Errc::MissingScriptEntry, "oracle", "no journal record for request " +
                                                                 std::to_string(request.request_id));
        const auto& r = it->second;
        if (r.template_id != request.template_id || r.slot_hash != slot_hash(request.slots))
            throw Error(Errc::MissingScriptEntry, "oracle",
                        "journal divergence at request " + std::to_string(request.request_id));
        if (!r.response) throw Error(errc_from_name(r.error), "oracle", "recorded failure");
        validate(request.schema, *r.response);
        return {request.request_id, *r.response};
    }

private:
    std::map<std::uint64_t, JournalRecord> by_id_;
};

// ------------------------------ Live adapter ------------------------------

struct TemplateSettings {
    int max_tokens = 256;
    double temperature = 0.7;
};

struct EndpointConfig {
    std::string base_url;                       // e.g. https://host/v1/chat/completions
    std::string token_env = "GENWORLD_ORACLE_TOKEN";
    std::string model = "default";
    int max_retries = 3;
    double timeout_seconds = 10.0;              // total budget per request, across retries
    std::chrono::milliseconds backoff{200};     // doubled after each failed attempt
    bool determinism = false;                   // forces temperature 0
    std::map<std::string, TemplateSettings> per_template;
};

struct HttpResult {
    bool ok = false;
    bool timed_out = false;
    int status = 0;
    std::string body;
    std::string error;
};

using HttpTransport =
    std::function<HttpResult(const std::string& url, const std::string& body, const std::string& token, double timeout_s)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

class LiveOracle : public Oracle {
public:
    LiveOracle(EndpointConfig config, HttpTransport transport, const TemplateCatalog& catalog = default_catalog(),
               Sleeper sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
        : config_(std::move(config)), transport_(std::move(transport)), catalog_(catalog), sleep_(std::move(sleeper)) {}

    json build_body(const OracleRequest& request) const {
        const auto* t = catalog_.find(request.template_id);
        const std::string prompt = t ? t->render(request.slots) : request.template_id;
        TemplateSettings settings;
        if (auto it = config_.per_template.find(request.template_id); it != config_.per_template.end())
            settings = it->second;
        if (config_.determinism) settings.temperature = 0.0;
        return {{"model", config_.model},
                {"max_tokens", settings.max_tokens},
                {"temperature", settings.temperature},
                {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    }

    OracleResponse complete(const OracleRequest& request) override {
        const std::string body = build_body(request).dump();
        const char* token = std::getenv(config_.token_env.c_str());
        const auto start = std::chrono::steady_clock::now();
        auto backoff = config_.backoff;
        Errc last = Errc::TransportError;
        std::string last_detail;
        for (int attempt = 0; attempt < std::max(1, config_.max_retries); ++attempt) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const double remaining = config_.timeout_seconds - elapsed;
            if (remaining <= 0) throw Error(Errc::Timeout, "oracle", request.template_id);
            HttpResult r = transport_(config_.base_url, body, token ? token : "", remaining);
            if (r.timed_out) {
                last = Errc::Timeout;
                last_detail = "attempt " + std::to_string(attempt + 1);
            } else if (!r.ok || r.status < 200 || r.status >= 300) {
                last = Errc::TransportError;
                last_detail = r.error.empty() ? "HTTP " + std::to_string(r.status) : r.error;
            } else {
                try {
                    std::string text = extract_content(r.body);
                    validate(request.schema, text);
                    return {request.request_id, std::move(text)};
                } catch (const Error& e) {
                    last = e.code();
                    last_detail = e.detail();
                }
            }
            if (attempt + 1 < config_.max_retries) {
                sleep_(backoff);
                backoff *= 2;
            }
        }
        throw Error(last, "oracle", last_detail);
    }

    static std::string extract_content(const std::string& body) {
        json j = json::parse(body, nullptr, false);
        if (j.is_discarded()) throw Error(Errc::SchemaViolation, "oracle", "response body is not JSON");
        if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
            const auto& c = j["choices"][0];
            if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
                return c["message"]["content"].get<std::string>();
        }
        if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
        throw Error(Errc::SchemaViolation, "oracle", "no completion text in response");
    }

private:
    EndpointConfig config_;
    HttpTransport transport_;
    const TemplateCatalog& catalog_;
    Sleeper sleep_;
};

// ------------------------------ Embeddings ------------------------------

struct EmbeddingVector {
    std::vector<double> values;

    double norm() const {
        double s = 0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }
    bool operator==(const EmbeddingVector&) const = default;
};

inline double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0;
    const std::size_t n = std::min(a.values.size(), b.values.size());
    for (std::size_t i = 0; i < n; ++i) s += a.values[i] * b.values[i];
    return s;
}

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0 || nb == 0) return 0;
    return dot(a, b) / (na * nb);
}

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(std::string_view text) = 0;
    virtual std::size_t dimension() const = 0;
};

// Seeded random projection of token hashes: each lowercase alphanumeric token
// contributes a pseudo-random vector derived from its hash, and the sum is
// normalized. Shared tokens make texts similar; no model involved.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0x5eedull)
        : dim_(dimension), seed_(seed) {}

    EmbeddingVector embed(std::string_view text) override {
        if (text.empty()) throw Error(Errc::EmptyText, "oracle", "embed_text");
        std::vector<double> acc(dim_, 0.0);
        std::vector<std::string> tokens;
        std::string cur;
        for (unsigned char c : text) {
            if (std::isalnum(c)) {
                cur += static_cast<char>(std::tolower(c));
            } else if (!cur.empty()) {
                tokens.push_back(std::move(cur));
                cur.clear();
            }
        }
        if (!cur.empty()) tokens.push_back(std::move(cur));
        if (tokens.empty()) tokens.emplace_back(text);
        for (const auto& tok : tokens) {
            Rng rng(mix64(fnv1a64(tok) ^ seed_));
            for (auto& v : acc) v += rng.uniform(-1.0, 1.0);
        }
        EmbeddingVector out{std::move(acc)};
        const double n = out.norm();
        if (n == 0) {
            out.values.assign(dim_, 0.0);
            out.values[0] = 1.0;
            return out;
        }
        for (auto& v : out.values) v /= n;
        return out;
    }

    std::size_t dimension() const override { return dim_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

// ------------------------------ Gateway ------------------------------

struct PendingRequest {
    std::string template_id;
    SlotValues slots;
    ResponseSchema schema;
};

using Outcome = std::variant<OracleResponse, Error>;

// Stamps request ids, checks slots against the catalog, journals every call.
// Not thread-safe: owned by the simulation thread; ask_batch fans out
// internally and hands results back in request-id order.
class Gateway {
public:
    Gateway(Oracle& backend, Embedder& embedder, const TemplateCatalog& catalog = default_catalog())
        : backend_(&backend), embedder_(&embedder), catalog_(&catalog) {}

    OracleResponse ask(const std::string& template_id, SlotValues slots, ResponseSchema schema) {
        auto results = ask_batch({PendingRequest{template_id, std::move(slots), std::move(schema)}});
        if (auto* e = std::get_if<Error>(&results.front())) throw *e;
        return std::get<OracleResponse>(results.front());
    }

    std::vector<Outcome> ask_batch(std::vector<PendingRequest> pending) {
        std::vector<OracleRequest> requests;
        requests.reserve(pending.size());
        for (auto& p : pending) {
            catalog_->check_slots(p.template_id, p.slots);
            requests.push_back({next_request_id_++, std::move(p.template_id), std::move(p.slots), std::move(p.schema)});
        }
        std::vector<Outcome> results(requests.size(), Outcome{Error(Errc::TransportError, "oracle", "not run")});
        auto run_one = [this](const OracleRequest& r) -> Outcome {
            try {
                return backend_->complete(r);
            } catch (const Error& e) {
                return e;
            } catch (const std::exception& e) {
                return Error(Errc::TransportError, "oracle", e.what());
            }
        };
        if (max_in_flight_ <= 1 || requests.size() <= 1) {
            for (std::size_t i = 0; i < requests.size(); ++i) results[i] = run_one(requests[i]);
        } else {
            for (std::size_t base = 0; base < requests.size(); base += max_in_flight_) {
                std::vector<std::future<Outcome>> inflight;
                const std::size_t end = std::min(requests.size(), base + max_in_flight_);
                for (std::size_t i = base; i < end; ++i)
                    inflight.push_back(std::async(std::launch::async, run_one, std::cref(requests[i])));
                for (std::size_t i = base; i < end; ++i) results[i] = inflight[i - base].get();
            }
        }
        for (std::size_t i = 0; i < requests.size(); ++i) {
            JournalRecord rec{requests[i].request_id, requests[i].template_id, slot_hash(requests[i].slots), {}, {}};
            if (auto* ok = std::get_if<OracleResponse>(&results[i]))
                rec.response = ok->text;
            else
                rec.error = std::string(errc_name(std::get<Error>(results[i]).code()));
            journal_.push_back(std::move(rec));
        }
        return results;
    }

    EmbeddingVector embed(std::string_view text) { return embedder_->embed(text); }
    Embedder& embedder() { return *embedder_; }

    // Backends must tolerate concurrent complete() calls when this is > 1.
    void set_max_in_flight(std::size_t n) { max_in_flight_ = std::max<std::size_t>(1, n); }

    std::uint64_t next_request_id() const { return next_request_id_; }
    void set_next_request_id(std::uint64_t id) { next_request_id_ = id; }
    const std::vector<JournalRecord>& journal() const { return journal_; }
    void clear_journal() { journal_.clear(); }

private:
    Oracle* backend_;
    Embedder* embedder_;
    const TemplateCatalog* catalog_;
    std::uint64_t next_request_id_ = 1;
    std::size_t max_in_flight_ = 4;
    std::vector<JournalRecord> journal_;
};

}  // namespace genworld::oracle
