#pragma once

#include <map>
#include <string>
#include <string_view>

namespace ezb {

// Replaces every `{{key}}` with its value; unknown slots are left as-is.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& slots);

// Throws Error(config_error) when the file cannot be read.
std::string read_text_file(const std::string& path);

// Model replies often wrap payloads in a Markdown fence; returns the fenced body if there is one.
std::string strip_code_fence(std::string_view text);

} // namespace ezb
