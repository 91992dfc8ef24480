#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "fairhub/catalog.hpp"
#include "fairhub/issue.hpp"

namespace httplib {
class Server;
}

namespace fairhub::server {

struct Request {
  std::string method = "GET";
  std::string path;
  std::multimap<std::string, std::string> params;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json; charset=utf-8";
  std::string body;
};

/// Read-only API over a store. Requests are answered from an immutable
/// index snapshot; reload() swaps in a new one.
class ApiHandler {
 public:
  explicit ApiHandler(std::filesystem::path store_root);

  /// Loads root/catalog.json, rebuilding it from the store when absent.
  /// The previous snapshot stays in place on failure.
  std::vector<Issue> reload();
  Response handle(const Request& req) const;

  std::shared_ptr<const catalog::Index> snapshot() const;

 private:
  Response studies(const Request& req, const catalog::Index& idx) const;
  Response study(const std::string& acc, const catalog::Index& idx) const;
  Response study_metadata(const std::string& acc, const Request& req, const catalog::Index& idx) const;
  Response study_file(const std::string& acc, const std::string& name, const Request& req,
                      const catalog::Index& idx) const;
  Response facets(const Request& req, const catalog::Index& idx) const;
  Response autocomplete(const Request& req, const catalog::Index& idx) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::shared_ptr<const catalog::Index> index_;
};

/// Builds the query that GET /studies would run for these parameters.
Result<catalog::Query> query_from_params(const std::multimap<std::string, std::string>& params);

/// cpp-httplib front end for ApiHandler.
class HttpServer {
 public:
  explicit HttpServer(const ApiHandler& api);
  ~HttpServer();

  /// Binds host:port (port 0 picks a free one); returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  bool listen();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  const ApiHandler& api_;
  std::unique_ptr<httplib::Server> svr_;
  std::thread thread_;
};

}  // namespace fairhub::server
