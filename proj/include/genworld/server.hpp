// genworld/server.hpp
//
// Multi-client simulation server. ServerCore is socket-free: sessions feed it
// parsed frames and read replies from per-session outboxes, which keeps the
// protocol testable in-process. TcpServer and TcpClient move frames over POSIX
// sockets.
//
// One thread owns the tick (step()). Sessions only touch the world to enqueue
// commands and to read snapshots. Interviews run against a copied world with
// their own gateway, and remembered interviews are written back at the start
// of the next step.
#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include "genworld/protocol.hpp"
#include "genworld/simulation.hpp"

namespace genworld::server {

using namespace genworld::world;
using SessionId = std::uint64_t;

class Outbox {
public:
    void push(json m) {
        {
            std::lock_guard lk(mu_);
            if (closed_) return;
            queue_.push_back(std::move(m));
        }
        cv_.notify_all();
    }

    // Blocks until a message arrives, the box closes, or the timeout passes.
    std::optional<json> pop(std::chrono::milliseconds timeout) {
        std::unique_lock lk(mu_);
        cv_.wait_for(lk, timeout, [&] { return !queue_.empty() || closed_; });
        if (queue_.empty()) return std::nullopt;
        json m = std::move(queue_.front());
        queue_.pop_front();
        return m;
    }

    std::vector<json> drain() {
        std::lock_guard lk(mu_);
        std::vector<json> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
        queue_.clear();
        return out;
    }

    // Closing keeps queued messages readable so a final Error still goes out.
    void close() {
        {
            std::lock_guard lk(mu_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    bool closed() const {
        std::lock_guard lk(mu_);
        return closed_;
    }

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<json> queue_;
    bool closed_ = false;
};

struct Interview {
    wordofgod::InterviewSession session;
    std::shared_ptr<const World> snapshot;
};

struct Session {
    SessionId id = 0;
    std::string client_name;
    bool greeted = false;
    std::vector<protocol::Region> regions;
    std::set<NpcId> npcs;
    bool events = false;
    std::map<NpcId, json> last_seen;  // entity state last sent in a Snapshot or Delta
    std::map<std::uint64_t, Interview> interviews;
    std::shared_ptr<Outbox> outbox = std::make_shared<Outbox>();
};

class ServerCore {
public:
    ServerCore(World w, oracle::Oracle& sim_backend, oracle::Oracle& interview_backend, oracle::Embedder& embedder)
        : world_(std::move(w)), sim_gateway_(sim_backend, embedder), interview_gateway_(interview_backend, embedder) {
        last_event_seq_ = world_.next_event_seq - 1;
    }

    SessionId open_session() {
        std::lock_guard lk(sessions_mu_);
        const SessionId id = next_session_++;
        sessions_[id].id = id;
        return id;
    }

    void close_session(SessionId id) {
        std::shared_ptr<Outbox> box;
        {
            std::lock_guard lk(sessions_mu_);
            auto it = sessions_.find(id);
            if (it == sessions_.end()) return;
            box = it->second.outbox;
            sessions_.erase(it);
        }
        box->close();
    }

    std::shared_ptr<Outbox> outbox(SessionId id) {
        std::lock_guard lk(sessions_mu_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second.outbox;
    }

    std::size_t session_count() const {
        std::lock_guard lk(sessions_mu_);
        return sessions_.size();
    }

    // Handles one decoded frame. Returns false when the session must be closed;
    // the Error reply is already queued in that case.
    bool handle(SessionId id, const json& frame) {
        auto box = outbox(id);
        if (!box) return false;
        try {
            const auto msg = protocol::parse_client_message(frame);
            std::visit([&](const auto& m) { on(id, *box, m); }, msg);
            return true;
        } catch (const Error& e) {
            box->push(protocol::error_message(e.code(), e.detail()));
            if (e.code() == Errc::ProtocolError || e.code() == Errc::VersionMismatch) {
                box->close();
                return false;
            }
            return true;
        } catch (const json::exception& e) {
            box->push(protocol::error_message(Errc::ProtocolError, e.what()));
            box->close();
            return false;
        }
    }

    // Reports a framing failure seen by the transport.
    void fail(SessionId id, const std::string& why) {
        if (auto box = outbox(id)) {
            box->push(protocol::error_message(Errc::ProtocolError, why));
            box->close();
        }
    }

    // Runs ticks on the calling thread and broadcasts their effects.
    void step(std::int64_t ticks = 1) {
        for (std::int64_t i = 0; i < ticks; ++i) {
            std::lock_guard wl(world_mu_);
            apply_pending_interviews();
            simulation::tick(world_, sim_gateway_);
            broadcast();
        }
    }

    template <class F>
    auto with_world(F&& f) {
        std::lock_guard wl(world_mu_);
        return f(std::as_const(world_));
    }

    std::string save_text() {
        std::lock_guard wl(world_mu_);
        const auto journal = sim_gateway_.journal();
        return simulation::save_text(world_, &journal);
    }

    std::int64_t tick() {
        std::lock_guard wl(world_mu_);
        return world_.clock.tick;
    }

private:
    void on(SessionId id, Outbox& box, const protocol::Hello& m) {
        {
            std::lock_guard lk(sessions_mu_);
            auto& s = sessions_.at(id);
            if (s.greeted) protocol::protocol_error("duplicate Hello");
            if (m.protocol_version != protocol::kProtocolVersion)
                throw Error(Errc::VersionMismatch, "simserver",
                            "client speaks " + std::to_string(m.protocol_version) + ", server speaks " +
                                std::to_string(protocol::kProtocolVersion));
            s.greeted = true;
            s.client_name = m.client_name.empty() ? "client-" + std::to_string(id) : m.client_name;
        }
        std::lock_guard wl(world_mu_);
        box.push(protocol::welcome(world_, id));
    }

    Session& greeted(SessionId id) {
        auto& s = sessions_.at(id);
        if (!s.greeted) protocol::protocol_error("Hello must come first");
        return s;
    }

    void on(SessionId id, Outbox& box, const protocol::Subscribe& m) {
        std::lock_guard wl(world_mu_);
        std::lock_guard lk(sessions_mu_);
        auto& s = greeted(id);
        if (m.npc && !world_.npcs.count(*m.npc)) throw Error(Errc::UnknownNpc, "simserver", "npc " + std::to_string(m.npc->value));
        if (m.region) s.regions.push_back(*m.region);
        if (m.npc) s.npcs.insert(*m.npc);
        s.events = s.events || m.events;
        auto snap = protocol::snapshot(world_, m.region, m.npc);
        for (const auto& e : snap["entities"]) s.last_seen[NpcId(e["id"].get<std::uint64_t>())] = e;
        box.push(std::move(snap));
    }

    void on(SessionId id, Outbox& box, const protocol::Command& m) {
        std::string issuer;
        {
            std::lock_guard lk(sessions_mu_);
            issuer = greeted(id).client_name;
        }
        std::lock_guard wl(world_mu_);
        const auto cid = wordofgod::submit_command(world_, issuer, m.target_npc, m.text);
        box.push({{"type", "Event"},
                  {"seq", 0},
                  {"at", world_.now()},
                  {"kind", "command_queued"},
                  {"payload", {{"command_id", cid}, {"npc_id", m.target_npc}, {"issuer", issuer}, {"text", m.text}}}});
    }

    void on(SessionId id, Outbox& box, const protocol::InterviewStart& m) {
        {
            std::lock_guard lk(sessions_mu_);
            greeted(id);
        }
        auto snap = current_snapshot();
        if (!snap->npcs.count(m.npc)) throw Error(Errc::UnknownNpc, "simserver", "npc " + std::to_string(m.npc.value));
        const auto iid = next_interview_.fetch_add(1);
        std::lock_guard lk(sessions_mu_);
        sessions_.at(id).interviews[iid] = Interview{wordofgod::start_interview(*snap, m.npc, iid), snap};
        box.push({{"type", "InterviewReply"}, {"session", iid}, {"npc", m.npc.value}, {"text", ""}, {"open", true}});
    }

    void on(SessionId id, Outbox& box, const protocol::InterviewTurn& m) {
        Interview iv = take_interview(id, m.session);
        std::string answer;
        {
            std::lock_guard il(interview_mu_);
            answer = wordofgod::interview(*iv.snapshot, iv.session, m.text, interview_gateway_);
        }
        {
            std::lock_guard lk(sessions_mu_);
            if (auto it = sessions_.find(id); it != sessions_.end()) it->second.interviews[m.session] = std::move(iv);
        }
        box.push(protocol::interview_reply(m.session, answer));
    }

    void on(SessionId id, Outbox& box, const protocol::InterviewEnd& m) {
        Interview iv = take_interview(id, m.session);
        if (m.remember) {
            std::lock_guard pl(pending_mu_);
            pending_.push_back(std::move(iv.session));
        }
        box.push({{"type", "InterviewReply"}, {"session", m.session}, {"text", ""}, {"open", false}, {"remember", m.remember}});
    }

    void on(SessionId id, Outbox& box, const protocol::Ping&) {
        {
            std::lock_guard lk(sessions_mu_);
            greeted(id);
        }
        box.push(protocol::pong());
    }

    Interview take_interview(SessionId id, std::uint64_t iid) {
        std::lock_guard lk(sessions_mu_);
        auto& s = greeted(id);
        auto it = s.interviews.find(iid);
        if (it == s.interviews.end()) throw Error(Errc::SessionClosed, "wordofgod", "interview " + std::to_string(iid));
        Interview iv = std::move(it->second);
        s.interviews.erase(it);
        return iv;
    }

    // Shared read-only copy of the world, refreshed when the clock has moved.
    std::shared_ptr<const World> current_snapshot() {
        std::lock_guard wl(world_mu_);
        if (!snapshot_ || snapshot_->clock.tick != world_.clock.tick || snapshot_->next_event_seq != world_.next_event_seq)
            snapshot_ = std::make_shared<const World>(world_);
        return snapshot_;
    }

    void apply_pending_interviews() {
        std::deque<wordofgod::InterviewSession> todo;
        {
            std::lock_guard pl(pending_mu_);
            todo.swap(pending_);
        }
        std::lock_guard il(interview_mu_);
        for (auto& s : todo) wordofgod::end_interview(world_, s, true, interview_gateway_);
    }

    std::set<NpcId> npcs_of(const Event& e) const {
        auto out = protocol::event_npcs(e.payload);
        if (e.payload.contains("conversation_id"))
            if (auto it = world_.conversations.find(ConversationId(e.payload["conversation_id"].get<std::uint64_t>()));
                it != world_.conversations.end())
                out.insert(it->second.participants.begin(), it->second.participants.end());
        if (e.payload.contains("plan_id"))
            if (auto it = world_.plans.find(PlanId(e.payload["plan_id"].get<std::uint64_t>())); it != world_.plans.end()) {
                const auto ps = it->second.participants();
                out.insert(ps.begin(), ps.end());
            }
        return out;
    }

    // Called with world_mu_ held.
    void broadcast() {
        std::vector<const Event*> fresh;
        for (auto it = world_.events.rbegin(); it != world_.events.rend() && it->seq > last_event_seq_; ++it) fresh.push_back(&*it);
        std::reverse(fresh.begin(), fresh.end());
        if (!fresh.empty()) last_event_seq_ = fresh.back()->seq;

        std::lock_guard lk(sessions_mu_);
        for (auto& [id, s] : sessions_) {
            if (!s.greeted) continue;
            for (const auto* e : fresh) {
                bool want = s.events;
                if (!want && !s.npcs.empty()) {
                    const auto who = npcs_of(*e);
                    want = std::any_of(s.npcs.begin(), s.npcs.end(), [&](NpcId n) { return who.count(n) > 0; });
                }
                if (want) s.outbox->push(protocol::event_message(*e));
            }
            if (s.regions.empty() && s.npcs.empty()) continue;
            json changed = json::array(), removed = json::array();
            for (const auto& [nid, st] : world_.npcs) {
                const bool visible = s.npcs.count(nid) ||
                                     std::any_of(s.regions.begin(), s.regions.end(), [&](const auto& r) { return r.contains(st.position); });
                auto seen = s.last_seen.find(nid);
                if (!visible) {
                    if (seen != s.last_seen.end()) {
                        removed.push_back(nid.value);
                        s.last_seen.erase(seen);
                    }
                    continue;
                }
                auto ent = protocol::npc_entity(world_, nid);
                if (seen == s.last_seen.end() || seen->second != ent) {
                    changed.push_back(ent);
                    s.last_seen[nid] = std::move(ent);
                }
            }
            if (!changed.empty() || !removed.empty())
                s.outbox->push({{"type", "Delta"}, {"tick", world_.clock.tick}, {"entities", changed}, {"removed", removed}});
        }
    }

    std::mutex world_mu_;
    World world_;
    oracle::Gateway sim_gateway_;
    std::uint64_t last_event_seq_ = 0;
    std::shared_ptr<const World> snapshot_;

    mutable std::mutex sessions_mu_;
    std::map<SessionId, Session> sessions_;
    SessionId next_session_ = 1;

    std::mutex interview_mu_;
    oracle::Gateway interview_gateway_;
    std::atomic<std::uint64_t> next_interview_{1};

    std::mutex pending_mu_;
    std::deque<wordofgod::InterviewSession> pending_;
};

// Drives ServerCore::step on its own thread at a fixed wall-clock interval.
class SimLoop {
public:
    SimLoop(ServerCore& core, std::chrono::milliseconds interval) : core_(core), interval_(interval) {}
    ~SimLoop() { stop(); }

    void start() {
        running_ = true;
        thread_ = std::thread([this] {
            while (running_) {
                const auto next = std::chrono::steady_clock::now() + interval_;
                core_.step(1);
                std::unique_lock lk(mu_);
                cv_.wait_until(lk, next, [&] { return !running_; });
            }
        });
    }

    void stop() {
        {
            std::lock_guard lk(mu_);
            running_ = false;
        }
        cv_.notify_all();
        if (thread_.joinable()) thread_.join();
    }

private:
    ServerCore& core_;
    std::chrono::milliseconds interval_;
    std::atomic<bool> running_{false};
    std::mutex mu_;
    std::condition_variable cv_;
    std::thread thread_;
};

// ------------------------------ Sockets ------------------------------

namespace detail {

inline bool write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return false;
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

inline std::pair<std::string, int> split_host_port(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw Error(Errc::IoError, "simserver", "expected HOST:PORT, got " + bind);
    try {
        return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
    } catch (const std::exception&) {
        throw Error(Errc::IoError, "simserver", "bad port in " + bind);
    }
}

inline sockaddr_in resolve(const std::string& host, int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    const std::string h = (host.empty() || host == "localhost") ? "127.0.0.1" : host;
    if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
        addrinfo hints{}, *res = nullptr;
        hints.ai_family = AF_INET;
        if (::getaddrinfo(h.c_str(), nullptr, &hints, &res) != 0 || !res) throw Error(Errc::IoError, "simserver", "cannot resolve " + h);
        addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
        ::freeaddrinfo(res);
    }
    return addr;
}

}  // namespace detail

class TcpServer {
public:
    TcpServer(ServerCore& core, const std::string& host, int port) : core_(core) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw Error(Errc::IoError, "simserver", "socket failed");
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        auto addr = detail::resolve(host, port);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
            ::close(listen_fd_);
            throw Error(Errc::IoError, "simserver", "cannot listen on " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
        }
        socklen_t len = sizeof addr;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
    }

    ~TcpServer() { stop(); }

    int port() const { return port_; }

    void start() {
        running_ = true;
        accept_thread_ = std::thread([this] { accept_loop(); });
    }

    void stop() {
        if (!running_.exchange(false)) return;
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        if (accept_thread_.joinable()) accept_thread_.join();
        std::vector<std::thread> threads;
        {
            std::lock_guard lk(mu_);
            for (int fd : fds_) ::shutdown(fd, SHUT_RDWR);
            threads.swap(threads_);
        }
        for (auto& t : threads)
            if (t.joinable()) t.join();
    }

private:
    void accept_loop() {
        while (running_) {
            pollfd p{listen_fd_, POLLIN, 0};
            if (::poll(&p, 1, 100) <= 0) continue;
            const int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) continue;
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            std::lock_guard lk(mu_);
            fds_.insert(fd);
            threads_.emplace_back([this, fd] { serve(fd); });
        }
    }

    void serve(int fd) {
        const SessionId id = core_.open_session();
        auto box = core_.outbox(id);
        std::thread writer([&] {
            while (true) {
                auto m = box->pop(std::chrono::milliseconds(200));
                if (m) {
                    if (!detail::write_all(fd, protocol::encode_frame(*m))) break;
                    continue;
                }
                if (box->closed()) break;
            }
            ::shutdown(fd, SHUT_RDWR);
        });
        protocol::FrameDecoder decoder;
        char buf[65536];
        bool open = true;
        while (open) {
            const auto n = ::recv(fd, buf, sizeof buf, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;
            decoder.feed(buf, static_cast<std::size_t>(n));
            try {
                while (open) {
                    auto frame = decoder.next();
                    if (!frame) break;
                    open = core_.handle(id, *frame);
                }
            } catch (const Error& e) {
                core_.fail(id, e.detail());
                open = false;
            }
        }
        box->close();
        writer.join();
        core_.close_session(id);
        std::lock_guard lk(mu_);
        fds_.erase(fd);
        ::close(fd);
    }

    ServerCore& core_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex mu_;
    std::set<int> fds_;
    std::vector<std::thread> threads_;
};

class TcpClient {
public:
    TcpClient(const std::string& host, int port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw Error(Errc::IoError, "simserver", "socket failed");
        auto addr = detail::resolve(host, port);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            ::close(fd_);
            throw Error(Errc::IoError, "simserver", "cannot connect to " + host + ":" + std::to_string(port));
        }
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    TcpClient(const TcpClient&) = delete;
    TcpClient& operator=(const TcpClient&) = delete;
    ~TcpClient() { close(); }

    void send(const json& m) { send_raw(protocol::encode_frame(m)); }

    void send_raw(const std::string& bytes) {
        if (!detail::write_all(fd_, bytes)) throw Error(Errc::IoError, "simserver", "send failed");
    }

    // Next message, or nullopt on timeout or when the server closed the connection.
    std::optional<json> receive(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        while (true) {
            if (auto m = decoder_.next()) return m;
            if (eof_) return std::nullopt;
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) return std::nullopt;
            pollfd p{fd_, POLLIN, 0};
            if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) continue;
            char buf[65536];
            const auto n = ::recv(fd_, buf, sizeof buf, 0);
            if (n <= 0) {
                eof_ = true;
                continue;
            }
            decoder_.feed(buf, static_cast<std::size_t>(n));
        }
    }

    // Skips messages until one of the given type arrives.
    std::optional<json> receive_type(const std::string& type, std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        while (std::chrono::steady_clock::now() < deadline) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            auto m = receive(left);
            if (!m) return std::nullopt;
            if ((*m)["type"] == type) return m;
        }
        return std::nullopt;
    }

    bool closed_by_peer() const { return eof_; }

    void close() {
        if (fd_ >= 0) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
    bool eof_ = false;
    protocol::FrameDecoder decoder_;
};

}  // namespace genworld::server
