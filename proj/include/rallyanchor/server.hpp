#pragma once

#include <map>
#include <memory>
#include <string>

#include "rallyanchor/anchors.hpp"
#include "rallyanchor/config.hpp"

namespace httplib {
class Server;
}

namespace rallyanchor {

struct ApiRequest {
  std::string method;  // GET, POST, PUT, DELETE
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

// Resource routes over a Store. Every body is JSON; errors come back as
// {"error": {"code": "<ErrorCode name>", "message": "..."}}.
//
//   GET    /matches
//   GET    /matches/{id}
//   GET    /matches/{id}/rallies
//   POST   /matches/{id}/query           QueryRule
//   GET    /rallies/{id}/anchors?include_deleted=true|false
//   POST   /rallies/{id}/anchors         {frame, type, x?, y?}
//   GET    /rallies/{id}/playback-hints
//   POST   /anchors/{id}/calibrate       {delta}
//   DELETE /anchors/{id}
//   PUT    /annotations                  {event_id, context_type, value, author?}
//   GET    /annotations?event_id=...
class Api {
 public:
  Api(Store& store, PlaybackConfig playback) : store_(store), playback_(playback) {}

  ApiResponse handle(const ApiRequest& request);

 private:
  Store& store_;
  PlaybackConfig playback_;
};

// HTTP front end for Api; request handling runs on httplib's worker pool.
class HttpService {
 public:
  HttpService(Store& store, const AppConfig& config);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds to config.service.host; port 0 picks a free port. Returns the port.
  int bind();
  // Blocks until stop() is called.
  void listen();
  void stop();

 private:
  Api api_;
  ServiceConfig service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace rallyanchor
