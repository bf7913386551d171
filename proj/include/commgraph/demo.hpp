#pragma once

#include "commgraph/ingest.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace commgraph {

struct DemoOptions {
    std::size_t participants = 151;
    std::size_t messages = 20000;
    std::size_t plantedSenders = 5;
    std::uint64_t seed = 2001;
};

/// Synthetic fraud scenario: during Jan-Sep 2001 a few senders write about
/// legal issues involving persons and organizations in California, and one
/// receiver hears from all of them. Everything else is background traffic
/// and decoys (wrong period, missing concept, concepts out of order).
struct DemoFixture {
    std::string csv;        ///< header: id,from,to,date,subject,body
    std::string gazetteer;  ///< CATEGORY:term lines; GPE lists only California
    std::vector<std::string> plantedSenders;  ///< sorted
    std::string plantedReceiver;
    /// Ids of the planted messages (all of them carry "PERSON ~7 GPE").
    std::vector<std::string> plantedMessageIds;  ///< sorted
};

DemoFixture makeFraudFixture(const DemoOptions& options = {});

/// Column mapping for the fixture CSV.
FieldMapping demoMapping();

/// Background-only corpus with Enron-like shape (151 users, heavy-tailed
/// pair volumes, 1999-2002), same CSV columns as the fixture.
std::string makeEnronShapedCsv(std::size_t participants, std::size_t messages, std::uint64_t seed);

} // namespace commgraph
