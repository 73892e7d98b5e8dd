#include "ezb/exec/protocol.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/exec/png.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

namespace ezb::exec {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {"execute", "validate", "render", "introspect", "hello", "error"};

ProtocolMessage error_response(std::optional<std::int64_t> id, std::string_view code, const std::string& message) {
    return {id, MessageKind::error, {{"code", std::string(code)}, {"message", message}}};
}

std::string snippet_body(const json& payload) {
    if (!payload.is_object() || !payload.contains("script") || !payload["script"].is_string())
        throw Error(ErrorKind::invalid_argument, "payload needs a 'script' string");
    return payload["script"].get<std::string>();
}

CodeSnippet snippet_from_payload(const json& payload) {
    auto domain = Domain::geo;
    if (payload.contains("domain") && payload["domain"].is_string()) domain = domain_from_string(payload["domain"].get<std::string>());
    int generation = payload.value("generation_index", 0);
    double temperature = payload.value("temperature", 0.0);
    return CodeSnippet(domain, snippet_body(payload), generation, temperature);
}

json snippet_payload(const CodeSnippet& s) {
    return {{"script", s.body()},
            {"domain", std::string(to_string(s.domain()))},
            {"generation_index", s.generation_index()},
            {"temperature", s.temperature()}};
}

void write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == ENOTSOCK) n = ::write(fd, data.data(), data.size());
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw Error(ErrorKind::executor_unreachable, std::string("write failed: ") + std::strerror(errno));
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

// Returns false on EOF before a full line.
bool read_line(int fd, std::string& buffer, std::string& line) {
    while (true) {
        auto nl = buffer.find('\n');
        if (nl != std::string::npos) {
            line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            return true;
        }
        char chunk[4096];
        auto n = ::read(fd, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

} // namespace

std::string_view to_string(MessageKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<MessageKind> parse_message_kind(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == s) return static_cast<MessageKind>(i);
    return std::nullopt;
}

std::string encode_message(const ProtocolMessage& m) {
    json j{{"id", m.id ? json(*m.id) : json(nullptr)}, {"kind", std::string(to_string(m.kind))}, {"payload", m.payload}};
    return j.dump();
}

ProtocolMessage decode_message(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::protocol_error, std::string("malformed message: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::protocol_error, "message must be a JSON object");
    ProtocolMessage m;
    if (j.contains("id") && j["id"].is_number_integer()) m.id = j["id"].get<std::int64_t>();
    if (!j.contains("kind") || !j["kind"].is_string()) throw Error(ErrorKind::protocol_error, "message without kind");
    auto kind = parse_message_kind(j["kind"].get<std::string>());
    if (!kind) throw Error(ErrorKind::protocol_error, "unknown kind '" + j["kind"].get<std::string>() + "'");
    m.kind = *kind;
    m.payload = j.value("payload", json::object());
    return m;
}

json render_to_json(const RenderImage& img) {
    return {{"png_base64", base64_encode(img.png)},
            {"width", img.width},
            {"height", img.height},
            {"view_index", img.view_index},
            {"focus", img.focus ? json(std::string(to_string(*img.focus))) : json(nullptr)},
            {"digest", img.digest},
            {"render_micros", img.render_micros}};
}

RenderImage render_from_json(const json& j) {
    RenderImage img;
    img.png = base64_decode(j.at("png_base64").get<std::string>());
    img.width = j.at("width").get<int>();
    img.height = j.at("height").get<int>();
    img.view_index = j.at("view_index").get<int>();
    if (j.contains("focus") && j["focus"].is_string()) img.focus = domain_from_string(j["focus"].get<std::string>());
    img.digest = j.value("digest", "");
    img.render_micros = j.value("render_micros", std::int64_t{0});
    return img;
}

std::string ProtocolServer::handle_line(std::string_view line) {
    std::optional<std::int64_t> id;
    json raw;
    try {
        raw = json::parse(line);
    } catch (const json::exception&) {
        return encode_message(error_response(std::nullopt, wire::kMalformed, "request is not valid JSON"));
    }
    if (!raw.is_object()) return encode_message(error_response(std::nullopt, wire::kMalformed, "request must be an object"));
    if (raw.contains("id") && raw["id"].is_number_integer()) id = raw["id"].get<std::int64_t>();
    if (!id) return encode_message(error_response(std::nullopt, wire::kMalformed, "request needs an integer id"));
    if (!raw.contains("kind") || !raw["kind"].is_string())
        return encode_message(error_response(id, wire::kMalformed, "request needs a kind"));
    auto kind = parse_message_kind(raw["kind"].get<std::string>());
    if (!kind || *kind == MessageKind::error)
        return encode_message(error_response(id, wire::kUnknownKind, "unsupported kind '" + raw["kind"].get<std::string>() + "'"));
    ProtocolMessage req{id, *kind, raw.value("payload", json::object())};
    try {
        return encode_message(dispatch(req));
    } catch (const Error& e) {
        auto code = e.kind() == ErrorKind::render_failed ? wire::kRenderFailed
                    : (e.kind() == ErrorKind::invalid_argument || e.kind() == ErrorKind::parse_error) ? wire::kBadPayload
                                                                                                       : wire::kBackend;
        return encode_message(error_response(id, code, e.what()));
    } catch (const std::exception& e) {
        return encode_message(error_response(id, wire::kBadPayload, e.what()));
    }
}

ProtocolMessage ProtocolServer::dispatch(const ProtocolMessage& req) {
    const auto& p = req.payload;
    switch (req.kind) {
    case MessageKind::hello: {
        auto info = backend_.hello();
        if (p.is_object() && p.contains("version") && p["version"] != info.version)
            return error_response(req.id, wire::kVersionMismatch,
                                  "backend speaks " + info.version + ", client sent " + p["version"].dump());
        return {req.id, req.kind, {{"version", info.version}, {"backend", info.backend}}};
    }
    case MessageKind::validate: {
        auto r = backend_.validate(snippet_from_payload(p));
        return {req.id, req.kind, {{"report", to_json(r.report)}, {"backend_micros", r.backend_micros}}};
    }
    case MessageKind::execute: {
        auto r = backend_.execute(snippet_from_payload(p));
        return {req.id, req.kind,
                {{"report", to_json(r.report)}, {"state_version", r.state_version}, {"backend_micros", r.backend_micros}}};
    }
    case MessageKind::render: {
        RenderSpec spec;
        if (p.is_object()) {
            spec.view_index = p.value("view_index", 0);
            spec.width = p.value("width", 512);
            spec.height = p.value("height", 512);
            if (p.contains("focus") && p["focus"].is_string()) spec.focus = domain_from_string(p["focus"].get<std::string>());
        }
        return {req.id, req.kind, render_to_json(backend_.render(spec))};
    }
    case MessageKind::introspect: return {req.id, req.kind, {{"manifest", backend_.introspect().to_json()}}};
    case MessageKind::error: break;
    }
    return error_response(req.id, wire::kUnknownKind, "unsupported kind");
}

void serve_stream(ProtocolServer& server, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out << server.handle_line(line) << '\n' << std::flush;
    }
}

void LoopbackTransport::send_line(const std::string& line) { pending_.push_back(server_.handle_line(line)); }

std::string LoopbackTransport::recv_line() {
    if (pending_.empty()) throw Error(ErrorKind::executor_unreachable, "no pending response");
    auto line = std::move(pending_.front());
    pending_.erase(pending_.begin());
    return line;
}

TcpLineTransport::TcpLineTransport(const std::string& host, int port, std::chrono::seconds recv_timeout) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error(ErrorKind::executor_unreachable, "socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw Error(ErrorKind::executor_unreachable, "bad backend address " + host);
    }
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        auto err = std::string(std::strerror(errno));
        ::close(fd_);
        fd_ = -1;
        throw Error(ErrorKind::executor_unreachable, "cannot connect to " + host + ":" + std::to_string(port) + ": " + err);
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    timeval tv{};
    tv.tv_sec = static_cast<decltype(tv.tv_sec)>(recv_timeout.count());
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

TcpLineTransport::~TcpLineTransport() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpLineTransport::send_line(const std::string& line) { write_all(fd_, line + "\n"); }

std::string TcpLineTransport::recv_line() {
    std::string line;
    if (!read_line(fd_, buffer_, line)) throw Error(ErrorKind::executor_unreachable, "backend closed the connection");
    return line;
}

ChildProcessTransport::ChildProcessTransport(const std::vector<std::string>& argv) {
    if (argv.empty()) throw Error(ErrorKind::invalid_argument, "empty child command");
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) throw Error(ErrorKind::executor_unreachable, "pipe() failed");
    pid_ = ::fork();
    if (pid_ < 0) throw Error(ErrorKind::executor_unreachable, "fork() failed");
    if (pid_ == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

ChildProcessTransport::~ChildProcessTransport() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }
}

void ChildProcessTransport::send_line(const std::string& line) { write_all(to_child_, line + "\n"); }

std::string ChildProcessTransport::recv_line() {
    std::string line;
    if (!read_line(from_child_, buffer_, line)) throw Error(ErrorKind::executor_unreachable, "backend process exited");
    return line;
}

RemoteExecutor::RemoteExecutor(std::unique_ptr<LineTransport> transport) : transport_(std::move(transport)) {}

std::unique_ptr<RemoteExecutor> RemoteExecutor::connect(std::unique_ptr<LineTransport> transport) {
    auto ex = std::make_unique<RemoteExecutor>(std::move(transport));
    auto info = ex->hello();
    if (info.version != kProtocolVersion)
        throw Error(ErrorKind::protocol_error, "backend speaks " + info.version + ", expected " + std::string(kProtocolVersion));
    return ex;
}

json RemoteExecutor::call(MessageKind kind, json payload) {
    std::lock_guard lock(mu_);
    auto id = next_id_++;
    transport_->send_line(encode_message({id, kind, std::move(payload)}));
    ProtocolMessage resp;
    try {
        resp = decode_message(transport_->recv_line());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::executor_unreachable) throw;
        throw Error(ErrorKind::protocol_error, e.what());
    }
    if (resp.id != id) throw Error(ErrorKind::protocol_error, "response id does not match request id");
    if (resp.kind == MessageKind::error) {
        auto code = resp.payload.value("code", "");
        auto message = resp.payload.value("message", "");
        if (code == wire::kRenderFailed) throw Error(ErrorKind::render_failed, message);
        throw Error(ErrorKind::protocol_error, code + ": " + message);
    }
    if (resp.kind != kind) throw Error(ErrorKind::protocol_error, "response kind does not match request kind");
    return resp.payload;
}

HelloInfo RemoteExecutor::hello() {
    auto p = call(MessageKind::hello, {{"version", std::string(kProtocolVersion)}});
    return {p.value("version", ""), p.value("backend", "")};
}

ValidateResult RemoteExecutor::validate(const CodeSnippet& script) {
    auto p = call(MessageKind::validate, snippet_payload(script));
    return {report_from_json(p.at("report")), p.value("backend_micros", std::int64_t{0})};
}

ExecuteResult RemoteExecutor::execute(const CodeSnippet& script) {
    auto p = call(MessageKind::execute, snippet_payload(script));
    return {report_from_json(p.at("report")), p.value("state_version", std::int64_t{0}),
            p.value("backend_micros", std::int64_t{0})};
}

RenderImage RemoteExecutor::render(const RenderSpec& spec) {
    json payload{{"view_index", spec.view_index}, {"width", spec.width}, {"height", spec.height}};
    if (spec.focus) payload["focus"] = std::string(to_string(*spec.focus));
    return render_from_json(call(MessageKind::render, std::move(payload)));
}

SceneManifest RemoteExecutor::introspect() {
    return SceneManifest::from_json(call(MessageKind::introspect, json::object()).at("manifest"));
}

TcpServer::TcpServer(Executor& backend, int port, const std::string& bind_address) : server_(backend) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(ErrorKind::executor_unreachable, "socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    ::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        int err = errno;
        ::close(listen_fd_);
        if (err == EADDRINUSE) throw Error(ErrorKind::port_in_use, "port " + std::to_string(port) + " is in use");
        throw Error(ErrorKind::executor_unreachable, std::string("bind failed: ") + std::strerror(err));
    }
    ::listen(listen_fd_, 16);
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
    acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::serve_forever() { accept_loop(); }

void TcpServer::stop() {
    if (stopping_.exchange(true)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    {
        std::lock_guard lock(clients_mu_);
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    if (acceptor_.joinable()) acceptor_.join();
    for (auto& w : workers_)
        if (w.joinable()) w.join();
}

void TcpServer::accept_loop() {
    while (!stopping_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;
        }
        std::lock_guard lock(clients_mu_);
        if (stopping_) {
            ::close(fd);
            return;
        }
        client_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve_client(fd); });
    }
}

void TcpServer::serve_client(int fd) {
    std::string buffer;
    std::string line;
    try {
        while (read_line(fd, buffer, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            write_all(fd, server_.handle_line(line) + "\n");
        }
    } catch (const Error&) {
        // peer went away
    }
    std::lock_guard lock(clients_mu_);
    std::erase(client_fds_, fd);
    ::close(fd);
}

} // namespace ezb::exec
