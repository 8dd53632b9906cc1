#include <httplib.h>

#include "tmotif/agent.hpp"

namespace tmotif {

struct ToolServer::Impl {
  httplib::Server server;
};

ToolServer::ToolServer() : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  srv.Get("/tools", [](const httplib::Request&, httplib::Response& res) {
    auto list = nlohmann::json::array();
    for (const auto& s : tool_registry()) {
      nlohmann::json params = nlohmann::json::object();
      for (const auto& p : s.params) params[p.name] = p.description;
      list.push_back({{"name", s.name}, {"description", s.description}, {"parameters", params}});
    }
    res.set_content(list.dump(), "application/json");
  });
  srv.Post(R"(/tools/([A-Za-z_]+))", [](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1];
    auto reply = [&res](int status, const char* key, const std::string& text) {
      res.status = status;
      res.set_content(nlohmann::json{{key, text}}.dump(), "application/json");
    };
    if (!find_tool(name)) return reply(404, "error", "unknown tool \"" + name + "\"");
    nlohmann::json input;
    try {
      input = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      return reply(400, "error", std::string("body: invalid JSON: ") + e.what());
    }
    auto obs = call_tool(name, input);
    reply(obs.error ? 400 : 200, obs.error ? "error" : "observation", obs.text);
  });
}

ToolServer::~ToolServer() { stop(); }

int ToolServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port = impl_->server.bind_to_any_port(host);
    if (port < 0) throw std::runtime_error("cannot bind " + host);
    return port;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void ToolServer::listen() { impl_->server.listen_after_bind(); }

void ToolServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace tmotif
