#include "dimminer/http_service.hpp"

#include <string>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "dimminer/session_io.hpp"

namespace dimminer {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kConfig:
    case ErrorCode::kDegenerate:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUndefined:
      return 422;
    case ErrorCode::kNumeric:
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

namespace {

constexpr const char* kJson = "application/json; charset=utf-8";

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send(res, status, json{{"code", code}, {"message", message}});
}

// Runs a handler and turns errors into {code, message} bodies.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::parse_error& e) {
      send_error(res, 400, to_string(ErrorCode::kParse), e.what());
    } catch (const json::exception& e) {
      send_error(res, 422, to_string(ErrorCode::kInvalidArgument), e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_error(res, 500, "internal", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body);
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return j;
}

std::vector<int> parse_eig_list(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (part.empty() || used != part.size()) {
      throw Error(ErrorCode::kInvalidArgument, "eig must be a comma-separated list of indices");
    }
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

PolarityMap polarity_from_body(const json& body) {
  if (!body.contains("polarity_map") || body["polarity_map"].is_null()) return PolarityMap{};
  return body["polarity_map"].get<PolarityMap>();
}

std::optional<std::uint64_t> expected_revision(const json& body) {
  if (!body.contains("expected_revision") || body["expected_revision"].is_null()) return std::nullopt;
  return body["expected_revision"].get<std::uint64_t>();
}

}  // namespace

void mount_routes(httplib::Server& server, SessionService& sessions,
                  const std::optional<std::filesystem::path>& static_dir) {
  constexpr const char* kId = "([A-Za-z0-9._-]+)";
  const std::string prefix = std::string("/sessions/") + kId;

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/sessions", guarded([&sessions](const httplib::Request&, httplib::Response& res) {
    send(res, 200, json{{"sessions", sessions.list()}});
  }));

  server.Post("/sessions", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    std::optional<std::string> id;
    if (body.contains("session_id") && !body["session_id"].is_null()) id = body["session_id"].get<std::string>();
    std::optional<SessionSettings> settings;
    if (body.contains("settings") && !body["settings"].is_null()) {
      json merged = sessions.config().session_settings();
      merged.update(body["settings"]);
      settings = merged.get<SessionSettings>();
    }
    send(res, 201, json(sessions.create(id, settings)));
  }));

  server.Get(prefix, guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, json(sessions.get(req.matches[1])));
  }));

  server.Get(prefix + "/dimensions", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, sessions.dimensions(req.matches[1]));
  }));

  server.Get(prefix + "/preview", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("eig")) throw Error(ErrorCode::kInvalidArgument, "preview needs eig=I[,J]");
    PolarityMap polarity;
    if (req.has_param("c1")) {
      polarity.c1 = parse_polarity(req.get_param_value("c1"));
      polarity.c2 = opposite(polarity.c1);
    }
    send(res, 200, sessions.preview(req.matches[1], parse_eig_list(req.get_param_value("eig")), polarity));
  }));

  server.Post(prefix + "/selection", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (!body.contains("indices")) throw Error(ErrorCode::kInvalidArgument, "selection needs indices");
    auto indices = body["indices"].get<std::vector<int>>();
    auto source = parse_selection_source(body.value("source", std::string("HUMAN")));
    auto s = sessions.select(req.matches[1], std::move(indices), polarity_from_body(body), source,
                             body.value("note", std::string()), expected_revision(body));
    send(res, 200, json(s));
  }));

  server.Get(prefix + "/result", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, sessions.result(req.matches[1]));
  }));

  server.Post(prefix + "/lexicon-selection",
              guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
                auto body = parse_body(req);
                auto s = sessions.lexicon_select(req.matches[1], body.value("note", std::string()),
                                                 expected_revision(body));
                send(res, 200, json(s));
              }));

  server.Post(prefix + "/adapt", guarded([&sessions](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    // Either the profile itself or {"profile": ..., "note": ..., "expected_revision": ...}.
    const json& profile = body.contains("profile") ? body["profile"] : body;
    auto s = sessions.adapt(req.matches[1], profile.get<DimensionProfile>(), body.value("note", std::string()),
                            expected_revision(body));
    send(res, 200, json(s));
  }));

  if (static_dir) server.set_mount_point("/ui", static_dir->string());

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty() && res.status == 404) {
      send_error(res, 404, to_string(ErrorCode::kNotFound), "no route for " + req.method + " " + req.path);
    }
  });
}

}  // namespace dimminer
