// Copyright 2026 The hashloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#ifndef HASHLOC_HTTP_SERVER_HPP_
#define HASHLOC_HTTP_SERVER_HPP_

#include <string>

#include "httplib.h"
#include "json.hpp"

#include "hashloc/service.hpp"

namespace hashloc {

/// Routes: POST /predict, POST /recommend, GET /model/info, POST /admin/reload.
inline void bind_routes(httplib::Server& server, AdvisorService& service) {
  auto reply = [](httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  };
  auto json_route = [&service, reply](auto handler) {
    return [&service, reply, handler](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::parse_error& e) {
        reply(res, 400, {{"error", std::string("invalid JSON: ") + e.what()}});
        return;
      }
      try {
        reply(res, 200, handler(service, body));
      } catch (const BadRequest& e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
      }
    };
  };
  server.Post("/predict", json_route([](AdvisorService& s, const nlohmann::json& b) { return s.predict(b); }));
  server.Post("/recommend", json_route([](AdvisorService& s, const nlohmann::json& b) { return s.recommend(b); }));
  server.Get("/model/info", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, service.model_info());
  });
  server.Post("/admin/reload", [&service, reply](const httplib::Request&, httplib::Response& res) {
    try {
      service.reload();
      reply(res, 200, {{"reloaded", true}, {"model", service.model_info()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  });
}

}  // namespace hashloc

#endif  // HASHLOC_HTTP_SERVER_HPP_
