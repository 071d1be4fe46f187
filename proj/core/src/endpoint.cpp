#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "parrot/endpoint.hpp"

#include <charconv>

#include <httplib.h>

#include "parrot/error.hpp"

namespace parrot::net {

EndpointUrl EndpointUrl::parse(std::string_view url) {
  EndpointUrl out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ValidationError("endpoint URL needs a scheme: '" + std::string(url) + "'");
  out.scheme = std::string(url.substr(0, scheme_end));
  if (out.scheme != "http" && out.scheme != "https") {
    throw ValidationError("unsupported endpoint scheme '" + out.scheme + "'");
  }
  out.port = out.scheme == "https" ? 443 : 80;

  auto rest = url.substr(scheme_end + 3);
  const auto path_start = rest.find('/');
  auto authority = rest.substr(0, path_start);
  if (path_start != std::string_view::npos) out.base_path = std::string(rest.substr(path_start));
  while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();

  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    const auto port_str = authority.substr(colon + 1);
    int port = 0;
    const auto [ptr, ec] = std::from_chars(port_str.data(), port_str.data() + port_str.size(), port);
    if (ec != std::errc{} || ptr != port_str.data() + port_str.size() || port <= 0 || port > 65535) {
      throw ValidationError("bad port in endpoint URL '" + std::string(url) + "'");
    }
    out.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw ValidationError("endpoint URL has no host: '" + std::string(url) + "'");
  out.host = std::string(authority);
  return out;
}

std::string EndpointUrl::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

std::string EndpointUrl::path_for(std::string_view leaf) const {
  const std::string suffix = "/" + std::string(leaf);
  if (base_path.size() >= suffix.size() &&
      base_path.compare(base_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return base_path;
  }
  return base_path + suffix;
}

HttpResponse post_json(const EndpointUrl& url, const std::string& path, const std::string& body,
                       std::chrono::milliseconds timeout, const std::map<std::string, std::string>& headers) {
  httplib::Client client(url.origin());
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body, "application/json");
  if (!res) {
    throw EndpointError("POST " + url.origin() + path + " failed: " + httplib::to_string(res.error()));
  }
  return HttpResponse{res->status, res->body};
}

}  // namespace parrot::net
