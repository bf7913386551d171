#include "commgraph/server.hpp"

#include <httplib.h>

namespace commgraph {

using nlohmann::json;

struct HttpServer::Impl {
    Api& api;
    httplib::Server server;

    explicit Impl(Api& a) : api(a) {}
};

namespace {

QueryParams paramsOf(const httplib::Request& req) { return QueryParams(req.params.begin(), req.params.end()); }

json bodyOf(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw UsageError(std::string("request body is not valid JSON: ") + e.what());
    }
}

template <class Fn>
httplib::Server::Handler jsonRoute(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            auto body = fn(req);
            if constexpr (std::is_same_v<decltype(body), std::string>) res.set_content(std::move(body), "application/json");
            else res.set_content(body.dump(), "application/json");
        } catch (const std::exception& e) {
            auto [status, body] = errorResponse(e);
            res.status = status;
            res.set_content(body.dump(), "application/json");
        }
    };
}

} // namespace

HttpServer::HttpServer(Api& api) : impl_(std::make_unique<Impl>(api)) {
    auto& s = impl_->server;
    Api& a = impl_->api;
    s.Get("/corpus/summary", jsonRoute([&a](const httplib::Request&) { return a.corpusSummary(); }));
    s.Get("/matrix", jsonRoute([&a](const httplib::Request& r) { return a.matrix(paramsOf(r)); }));
    s.Get(R"(/cell/([^/]+)/([^/]+))", jsonRoute([&a](const httplib::Request& r) {
              return a.cell(r.matches[1], r.matches[2], paramsOf(r));
          }));
    s.Get(R"(/episode/([^/]+))", jsonRoute([&a](const httplib::Request& r) { return a.episode(r.matches[1]); }));
    s.Post("/filters", jsonRoute([&a](const httplib::Request& r) { return a.postFilters(bodyOf(r)); }));
    s.Post(R"(/episode/([^/]+)/label)", jsonRoute([&a](const httplib::Request& r) {
               return a.labelEpisode(r.matches[1], bodyOf(r));
           }));
    s.Get("/ambiguous", jsonRoute([&a](const httplib::Request& r) { return a.ambiguous(paramsOf(r)); }));
    s.Post("/provenance/navigate", jsonRoute([&a](const httplib::Request& r) { return a.navigate(bodyOf(r)); }));
    s.Post("/provenance/star", jsonRoute([&a](const httplib::Request& r) { return a.star(bodyOf(r)); }));
    s.Get("/provenance/graph", jsonRoute([&a](const httplib::Request&) { return a.graph(); }));
    s.Post("/query/parse", jsonRoute([&a](const httplib::Request& r) { return a.parseQuery(bodyOf(r)); }));
    s.Get("/report", [&a](const httplib::Request&, httplib::Response& res) {
        try {
            res.set_content(a.report(), "text/markdown; charset=utf-8");
        } catch (const std::exception& e) {
            auto [status, body] = errorResponse(e);
            res.status = status;
            res.set_content(body.dump(), "application/json");
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    auto& s = impl_->server;
    if (port == 0) {
        const int bound = s.bind_to_any_port(host);
        if (bound < 0) throw Error("cannot bind " + host);
        return bound;
    }
    if (!s.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::listen() {
    if (!impl_->server.listen_after_bind()) throw Error("server stopped with an error");
}

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::waitUntilReady() const { impl_->server.wait_until_ready(); }

} // namespace commgraph
