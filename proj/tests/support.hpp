#pragma once

#include "ezb/agents/debug_agent.hpp"
#include "ezb/agents/session.hpp"
#include "ezb/core/text.hpp"
#include "ezb/exec/mock_executor.hpp"
#include "ezb/llm/gateway.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <memory>
#include <string>

namespace ezb::testing {

inline std::string data_path(const std::string& rel) { return std::string(EZB_DATA_DIR) + "/" + rel; }

inline std::shared_ptr<llm::ReplayProvider> replay(const std::string& transcript, int delay_ms = 0) {
    llm::ReplayOptions opt;
    opt.delay = std::chrono::milliseconds(delay_ms);
    return std::make_shared<llm::ReplayProvider>(llm::load_transcript(data_path("transcripts/" + transcript)), opt);
}

inline exec::SimScene studio() { return exec::SimScene::load(data_path("scenes/studio.json")); }

inline agents::SubAgentProfile profile(Domain d) {
    auto p = agents::SubAgentProfile::defaults(d);
    p.system_prompt = read_text_file(data_path("templates/subagent_" + std::string(to_string(d)) + ".txt"));
    return p;
}

inline agents::SessionConfig session_config() {
    agents::SessionConfig c;
    c.planner.template_text = read_text_file(data_path("templates/planner.txt"));
    c.planner.image_template_text = read_text_file(data_path("templates/planner_image.txt"));
    for (auto d : kAllDomains) c.profiles[d] = profile(d);
    return c;
}

inline std::string debug_prompt() { return read_text_file(data_path("templates/debug.txt")); }

// A loopback port with nothing listening on it.
inline int closed_port() {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            path = base / ("ezb-test-" + std::to_string(::getpid()) + "-" + std::to_string(i));
            if (std::filesystem::create_directory(path)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace ezb::testing
