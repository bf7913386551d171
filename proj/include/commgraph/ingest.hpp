#pragma once

#include "commgraph/corpus.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace commgraph {

enum class InputFormat { Csv, Jsonl };

InputFormat parseInputFormat(std::string_view name);

/// Which source fields feed which message attributes. `sender`, `receiver`
/// and `time` are required; the rest are optional. Unmapped source fields
/// are kept in Message::meta.
struct FieldMapping {
    std::string sender;
    std::string receiver;
    std::string time;
    std::string content;
    std::string id;
    std::string channel;
    char delimiter = ',';
    /// Separates multiple recipients inside one receiver field.
    char recipientSeparator = ';';

    /// Parses "sender=from,receiver=to,time=date,content=body".
    static FieldMapping parse(std::string_view text);
};

struct IngestReject {
    std::size_t line = 0;
    std::string reason;
};

struct IngestResult {
    Corpus corpus;
    std::vector<IngestReject> rejects;
    std::size_t records = 0;
};

/// Reads records and expands each into one message per recipient. A record
/// with k > 1 recipients yields k messages "<recordId>:<n>" that share
/// meta["group"] = recordId. Bad records are rejected and ingest continues.
IngestResult ingest(std::istream& in, InputFormat format, const FieldMapping& mapping);

/// Splits one delimiter-separated line set into records (RFC 4180 quoting,
/// quoted fields may span lines). Exposed for tests.
class CsvReader {
public:
    CsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

    /// False at end of input. `line` receives the 1-based line the record starts on.
    bool next(std::vector<std::string>& fields, std::size_t& line);

private:
    std::istream& in_;
    char delimiter_;
    std::size_t line_ = 0;
};

} // namespace commgraph
