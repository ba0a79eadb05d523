#pragma once

#include <string>
#include <string_view>

namespace impact {

struct BaseUrl {
  std::string scheme_host_port;  // "https://host:port"
  std::string path_prefix;       // "/v1" or ""
};

/// Splits "https://host[:port]/prefix" for httplib::Client. Throws
/// ConfigError on anything without an http(s) scheme.
BaseUrl split_base_url(std::string_view url);

std::string url_encode(std::string_view s);

}  // namespace impact
