#pragma once

#include <map>
#include <string>

namespace ezb::net {

struct Response {
    int status = 0;
    std::string body;
    std::string error; // transport failure, empty on any HTTP response
};

// POST `body` to an absolute http(s) URL. Never throws.
Response post(const std::string& url, const std::map<std::string, std::string>& headers, const std::string& body,
              int timeout_seconds = 60);

struct Url {
    std::string origin; // scheme://host[:port]
    std::string path;   // always starts with '/'
};

Url split_url(const std::string& url);

} // namespace ezb::net
