#include "ezb/core/text.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/core/model.hpp"

#include <fstream>
#include <sstream>

namespace ezb {

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        auto open = tmpl.find("{{", i);
        if (open == std::string_view::npos) break;
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) break;
        out.append(tmpl.substr(i, open - i));
        auto key = trim(tmpl.substr(open + 2, close - open - 2));
        if (auto it = slots.find(key); it != slots.end()) out += it->second;
        else out.append(tmpl.substr(open, close + 2 - open));
        i = close + 2;
    }
    out.append(tmpl.substr(i));
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::config_error, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string strip_code_fence(std::string_view text) {
    auto open = text.find("```");
    if (open == std::string_view::npos) return std::string(text);
    auto body_start = text.find('\n', open);
    if (body_start == std::string_view::npos) return std::string(text);
    auto close = text.find("```", body_start + 1);
    if (close == std::string_view::npos) return std::string(text.substr(body_start + 1));
    return std::string(text.substr(body_start + 1, close - body_start - 1));
}

} // namespace ezb
