#pragma once

// HTTP/1.1 binding of the Application handlers.
//
//   POST   /sessions                          multipart: image (file), themes (optional, comma-separated)
//   GET    /sessions/{id}
//   DELETE /sessions/{id}
//   POST   /sessions/{id}/navigate            {axis_id, position, k?}
//   POST   /sessions/{id}/generate            {axis_id, position, k?, seed?}
//   POST   /sessions/{id}/promote             {image_id}
//   POST   /sessions/{id}/themes              {label, poles?}
//   GET    /sessions/{id}/images/{image_id}
//   GET    /healthz

#include <atomic>
#include <cstdlib>
#include <sstream>

#include "thematic/service/app.hpp"

namespace thematic::service {

class HttpServer {
public:
    explicit HttpServer(Application& app) : app_(app) {
        server_.set_payload_max_length(app_.config().limits.max_upload_bytes * 2 + (1u << 20));
        server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            ErrorCode code = res.status == 413   ? ErrorCode::payload_too_large
                             : res.status == 404 ? ErrorCode::unknown_session
                                                 : ErrorCode::invalid_argument;
            Error e(code, res.status == 404 ? "no such route" : "request rejected");
            res.set_content(e.to_json().dump(), "application/json");
        });
        server_.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            res.set_header("X-Request-Id", request_id(req));
            if (!authorized(req)) {
                write(res, error_response(Error(ErrorCode::unauthorized, "missing or invalid bearer token")));
                return httplib::Server::HandlerResponse::Handled;
            }
            return httplib::Server::HandlerResponse::Unhandled;
        });
        server_.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
            app_.logger().info("http_request", json{{"request_id", res.get_header_value("X-Request-Id")},
                                                    {"method", req.method},
                                                    {"path", req.path},
                                                    {"status", res.status}});
        });
        routes();
    }

    /// Binds to host:port (port 0 picks a free port) and returns the port.
    int bind(const std::string& host, int port) {
        int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (bound < 0) fail(ErrorCode::config_invalid, "cannot bind " + host + ":" + std::to_string(port));
        return bound;
    }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() const { server_.wait_until_ready(); }

private:
    static void write(httplib::Response& res, const Response& r) {
        res.status = r.status;
        if (r.status == 204) return;
        if (!r.raw.empty()) res.set_content(r.raw, r.content_type);
        else res.set_content(r.body.dump(), r.content_type);
    }

    static json parse_body(const httplib::Request& req) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object())
            throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
        return body;
    }

    template <typename F>
    static void with_json(const httplib::Request& req, httplib::Response& res, F&& f) {
        try {
            write(res, f(parse_body(req)));
        } catch (const Error& e) {
            write(res, error_response(e));
        }
    }

    std::string request_id(const httplib::Request& req) {
        if (req.has_header("X-Request-Id")) return req.get_header_value("X-Request-Id");
        return "req-" + std::to_string(++next_request_);
    }

    bool authorized(const httplib::Request& req) const {
        const auto& env = app_.config().bearer_token_env;
        if (!env) return true;
        const char* token = std::getenv(env->c_str());
        if (!token || !*token) return false;
        return req.get_header_value("Authorization") == std::string("Bearer ") + token;
    }

    void routes() {
        server_.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            Bytes image;
            std::vector<std::string> themes;
            if (req.is_multipart_form_data()) {
                if (req.has_file("image")) image = req.get_file_value("image").content;
                if (req.has_file("themes")) {
                    std::stringstream ss(req.get_file_value("themes").content);
                    for (std::string t; std::getline(ss, t, ',');)
                        if (!trim(t).empty()) themes.push_back(trim(t));
                }
            } else {
                image = req.body;
            }
            write(res, app_.create_session(image, themes));
        });
        server_.Get(R"(/sessions/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            write(res, app_.get_session(req.matches[1]));
        });
        server_.Delete(R"(/sessions/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            write(res, app_.delete_session(req.matches[1]));
        });
        server_.Post(R"(/sessions/([A-Za-z0-9_-]+)/navigate)", [this](const httplib::Request& req, httplib::Response& res) {
            with_json(req, res, [&](const json& body) { return app_.navigate(req.matches[1], body); });
        });
        server_.Post(R"(/sessions/([A-Za-z0-9_-]+)/generate)", [this](const httplib::Request& req, httplib::Response& res) {
            with_json(req, res, [&](const json& body) { return app_.generate(req.matches[1], body); });
        });
        server_.Post(R"(/sessions/([A-Za-z0-9_-]+)/promote)", [this](const httplib::Request& req, httplib::Response& res) {
            with_json(req, res, [&](const json& body) { return app_.promote(req.matches[1], body); });
        });
        server_.Post(R"(/sessions/([A-Za-z0-9_-]+)/themes)", [this](const httplib::Request& req, httplib::Response& res) {
            with_json(req, res, [&](const json& body) { return app_.add_theme(req.matches[1], body); });
        });
        server_.Get(R"(/sessions/([A-Za-z0-9_-]+)/images/([A-Za-z0-9_-]+))",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        write(res, app_.get_image(req.matches[1], req.matches[2]));
                    });
        server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) { write(res, app_.healthz()); });
    }

    Application& app_;
    httplib::Server server_;
    std::atomic<long> next_request_{0};
};

}  // namespace thematic::service
