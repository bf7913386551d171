#pragma once

#include "commgraph/api.hpp"

#include <memory>
#include <string>

namespace commgraph {

/// HTTP binding of Api; JSON bodies except GET /report (text/markdown).
class HttpServer {
public:
    explicit HttpServer(Api& api);
    ~HttpServer();

    /// Returns the bound port; port 0 picks a free one. Throws Error.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();
    void waitUntilReady() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace commgraph
