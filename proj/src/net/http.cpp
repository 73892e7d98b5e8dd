#include "ezb/net/http.hpp"

#include <httplib.h>

namespace ezb::net {

Url split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto slash = url.find('/', host_start);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

Response post(const std::string& url, const std::map<std::string, std::string>& headers, const std::string& body,
              int timeout_seconds) {
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    httplib::Headers hs;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
        if (k == "Content-Type") content_type = v;
        else hs.emplace(k, v);
    }
    auto res = client.Post(path, hs, body, content_type);
    if (!res) return {0, "", httplib::to_string(res.error())};
    return {res->status, res->body, ""};
}

} // namespace ezb::net
