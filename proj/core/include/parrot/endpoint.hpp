#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>

namespace parrot::net {

/// "http://host:port/base/path" split into what the HTTP client needs.
struct EndpointUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 80;
  std::string base_path;  // no trailing slash; may be empty

  /// Throws ValidationError for malformed or unsupported URLs.
  static EndpointUrl parse(std::string_view url);

  std::string origin() const;
  /// base_path + "/" + leaf, unless base_path already ends with "/" + leaf.
  std::string path_for(std::string_view leaf) const;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POSTs a JSON body. Throws EndpointError on transport failure; HTTP error statuses
/// are returned, not thrown.
HttpResponse post_json(const EndpointUrl& url, const std::string& path, const std::string& body,
                       std::chrono::milliseconds timeout,
                       const std::map<std::string, std::string>& headers = {});

}  // namespace parrot::net
