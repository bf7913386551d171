#pragma once

#include "commgraph/matrixview.hpp"
#include "commgraph/session.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace commgraph {

using QueryParams = std::multimap<std::string, std::string>;

/// Transport-independent handlers behind the HTTP routes. Reads take a
/// shared lock, mutations an exclusive one. Handlers throw the commgraph
/// error types; the server maps them to status codes.
class Api {
public:
    explicit Api(Session session) : session_(std::move(session)) {}

    nlohmann::json corpusSummary() const;                              // GET /corpus/summary
    std::string matrix(const QueryParams& params) const;               // GET /matrix, serialized
    nlohmann::json cell(const std::string& row, const std::string& col,
                        const QueryParams& params) const;              // GET /cell/{row}/{col}
    nlohmann::json episode(const std::string& id) const;               // GET /episode/{id}
    nlohmann::json postFilters(const nlohmann::json& body);            // POST /filters
    nlohmann::json labelEpisode(const std::string& id, const nlohmann::json& body);  // POST /episode/{id}/label
    nlohmann::json ambiguous(const QueryParams& params) const;         // GET /ambiguous
    nlohmann::json navigate(const nlohmann::json& body);               // POST /provenance/navigate
    nlohmann::json star(const nlohmann::json& body);                   // POST /provenance/star
    nlohmann::json graph() const;                                      // GET /provenance/graph
    std::string report() const;                                        // GET /report
    nlohmann::json parseQuery(const nlohmann::json& body) const;       // POST /query/parse

    /// Exclusive access for tests and tools.
    template <class Fn>
    auto withSession(Fn&& fn) {
        std::unique_lock lock(mutex_);
        return fn(session_);
    }

private:
    mutable std::shared_mutex mutex_;
    Session session_;
};

/// Maps a handler exception to {status, {"error": ..., ["position": ...]}}.
std::pair<int, nlohmann::json> errorResponse(const std::exception& e);

} // namespace commgraph
