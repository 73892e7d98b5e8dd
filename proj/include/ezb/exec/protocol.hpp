#pragma once

#include "ezb/core/serialize.hpp"
#include "ezb/exec/executor.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

// ezp/1: newline-delimited JSON messages `{"id": n, "kind": k, "payload": {...}}`.
// Every request gets exactly one response echoing its id; failures come back
// as kind "error" with payload {"code", "message"}.
namespace ezb::exec {

enum class MessageKind { execute, validate, render, introspect, hello, error };

std::string_view to_string(MessageKind k);
std::optional<MessageKind> parse_message_kind(std::string_view s);

struct ProtocolMessage {
    std::optional<std::int64_t> id; // absent only on responses to unparseable input
    MessageKind kind = MessageKind::hello;
    json payload = json::object();
};

std::string encode_message(const ProtocolMessage& m);
ProtocolMessage decode_message(std::string_view line);

// Error codes carried in error payloads.
namespace wire {
inline constexpr std::string_view kMalformed = "malformed";
inline constexpr std::string_view kUnknownKind = "unknown-kind";
inline constexpr std::string_view kBadPayload = "bad-payload";
inline constexpr std::string_view kVersionMismatch = "version-mismatch";
inline constexpr std::string_view kRenderFailed = "render-failed";
inline constexpr std::string_view kBackend = "backend-error";
} // namespace wire

// Server-side dispatcher: total over arbitrary input lines.
class ProtocolServer {
public:
    explicit ProtocolServer(Executor& backend) : backend_(backend) {}
    std::string handle_line(std::string_view line);

private:
    ProtocolMessage dispatch(const ProtocolMessage& req);
    Executor& backend_;
};

// Serves lines from `in` until EOF (stdio mode).
void serve_stream(ProtocolServer& server, std::istream& in, std::ostream& out);

class LineTransport {
public:
    virtual ~LineTransport() = default;
    // Both throw Error(executor_unreachable) when the peer is gone.
    virtual void send_line(const std::string& line) = 0;
    virtual std::string recv_line() = 0;
};

// In-process transport straight into a ProtocolServer.
class LoopbackTransport final : public LineTransport {
public:
    explicit LoopbackTransport(ProtocolServer& server) : server_(server) {}
    void send_line(const std::string& line) override;
    std::string recv_line() override;

private:
    ProtocolServer& server_;
    std::vector<std::string> pending_;
};

class TcpLineTransport final : public LineTransport {
public:
    // A backend silent for longer than `recv_timeout` counts as lost.
    TcpLineTransport(const std::string& host, int port, std::chrono::seconds recv_timeout = std::chrono::seconds(300));
    ~TcpLineTransport() override;
    TcpLineTransport(const TcpLineTransport&) = delete;
    TcpLineTransport& operator=(const TcpLineTransport&) = delete;

    void send_line(const std::string& line) override;
    std::string recv_line() override;

private:
    int fd_ = -1;
    std::string buffer_;
};

// Spawns `argv` and talks to it over its stdin/stdout.
class ChildProcessTransport final : public LineTransport {
public:
    explicit ChildProcessTransport(const std::vector<std::string>& argv);
    ~ChildProcessTransport() override;
    ChildProcessTransport(const ChildProcessTransport&) = delete;
    ChildProcessTransport& operator=(const ChildProcessTransport&) = delete;

    void send_line(const std::string& line) override;
    std::string recv_line() override;

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

// Executor client speaking ezp/1 over any line transport. Round trips are
// serialized, so an execute is never pipelined behind an unacknowledged one.
class RemoteExecutor final : public Executor {
public:
    explicit RemoteExecutor(std::unique_ptr<LineTransport> transport);

    // Performs the hello handshake; throws Error(protocol_error) on version mismatch.
    static std::unique_ptr<RemoteExecutor> connect(std::unique_ptr<LineTransport> transport);

    HelloInfo hello() override;
    ValidateResult validate(const CodeSnippet& script) override;
    ExecuteResult execute(const CodeSnippet& script) override;
    RenderImage render(const RenderSpec& spec) override;
    SceneManifest introspect() override;

private:
    json call(MessageKind kind, json payload);

    std::mutex mu_;
    std::unique_ptr<LineTransport> transport_;
    std::int64_t next_id_ = 1;
};

// Accepts TCP clients and serves each on its own thread.
class TcpServer {
public:
    // Port 0 picks a free port. Throws Error(port_in_use) when bind fails with EADDRINUSE.
    TcpServer(Executor& backend, int port, const std::string& bind_address = "127.0.0.1");
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    [[nodiscard]] int port() const { return port_; }
    void start();            // background accept loop
    void serve_forever();    // blocking accept loop
    void stop();

private:
    void accept_loop();
    void serve_client(int fd);

    ProtocolServer server_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
    std::mutex clients_mu_;
    std::vector<int> client_fds_;
    std::vector<std::thread> workers_;
    std::thread acceptor_;
};

json render_to_json(const RenderImage& img);
RenderImage render_from_json(const json& j);

} // namespace ezb::exec
