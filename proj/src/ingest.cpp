#include "commgraph/ingest.hpp"

#include "commgraph/timeparse.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <istream>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace commgraph {

using nlohmann::json;

InputFormat parseInputFormat(std::string_view name) {
    if (name == "csv") return InputFormat::Csv;
    if (name == "jsonl") return InputFormat::Jsonl;
    throw UsageError("unknown input format '" + std::string(name) + "' (expected csv or jsonl)");
}

FieldMapping FieldMapping::parse(std::string_view text) {
    FieldMapping m;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        const std::string_view item = text.substr(pos, comma - pos);
        pos = comma + 1;
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size()) {
            throw UsageError("bad mapping entry '" + std::string(item) + "' (expected field=column)");
        }
        const std::string_view key = item.substr(0, eq);
        std::string value(item.substr(eq + 1));
        if (key == "sender") m.sender = std::move(value);
        else if (key == "receiver") m.receiver = std::move(value);
        else if (key == "time") m.time = std::move(value);
        else if (key == "content") m.content = std::move(value);
        else if (key == "id") m.id = std::move(value);
        else if (key == "channel") m.channel = std::move(value);
        else throw UsageError("unknown mapping field '" + std::string(key) + "'");
    }
    if (m.sender.empty() || m.receiver.empty() || m.time.empty()) {
        throw UsageError("mapping must name sender, receiver and time columns");
    }
    return m;
}

bool CsvReader::next(std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    std::string raw;
    if (!std::getline(in_, raw)) return false;
    ++line_;
    line = line_;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();

    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
        if (i >= raw.size()) {
            if (quoted) {
                // Quoted field continues on the next physical line.
                if (!std::getline(in_, raw)) break;
                ++line_;
                if (!raw.empty() && raw.back() == '\r') raw.pop_back();
                field.push_back('\n');
                i = 0;
                continue;
            }
            break;
        }
        const char c = raw[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < raw.size() && raw[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == delimiter_) {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
        ++i;
    }
    fields.push_back(std::move(field));
    return true;
}

namespace {

std::string trimmed(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> splitRecipients(std::string_view field, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= field.size()) {
        std::size_t next = field.find(sep, pos);
        if (next == std::string_view::npos) next = field.size();
        std::string r = trimmed(field.substr(pos, next - pos));
        if (!r.empty() && std::find(out.begin(), out.end(), r) == out.end()) out.push_back(std::move(r));
        pos = next + 1;
    }
    return out;
}

/// A source record normalized across formats.
struct Record {
    std::string id;
    std::string sender;
    std::vector<std::string> recipients;
    std::optional<Timestamp> time;
    std::string rawTime;
    std::string content;
    std::string channel;
    Attributes meta;
};

class Ingestor {
public:
    explicit Ingestor(IngestResult& result) : result_(result) {}

    void add(Record r, std::size_t line) {
        ++result_.records;
        if (r.sender.empty()) return reject(line, "missing sender");
        if (r.recipients.empty()) return reject(line, "missing recipient");
        if (r.rawTime.empty()) return reject(line, "missing timestamp");
        if (!r.time) return reject(line, "unparseable timestamp '" + r.rawTime + "'");
        if (r.id.empty()) r.id = "r" + std::to_string(line);
        r.meta["group"] = r.id;

        const bool multi = r.recipients.size() > 1;
        std::vector<std::string> ids;
        for (std::size_t k = 0; k < r.recipients.size(); ++k) {
            ids.push_back(multi ? r.id + ":" + std::to_string(k) : r.id);
            if (seen_.count(ids.back())) return reject(line, "duplicate message id '" + ids.back() + "'");
        }
        for (std::size_t k = 0; k < r.recipients.size(); ++k) {
            seen_.insert(ids[k]);
            builder_.addMessage(std::move(ids[k]), r.sender, r.recipients[k], *r.time, r.content, r.channel, r.meta);
        }
    }

    void reject(std::size_t line, std::string reason) { result_.rejects.push_back({line, std::move(reason)}); }

    Corpus finish() { return std::move(builder_).build(); }

private:
    IngestResult& result_;
    CorpusBuilder builder_;
    std::unordered_set<std::string> seen_;
};

void ingestCsv(std::istream& in, const FieldMapping& mapping, Ingestor& sink) {
    CsvReader reader(in, mapping.delimiter);
    std::vector<std::string> header;
    std::size_t line = 0;
    if (!reader.next(header, line)) return;
    for (auto& h : header) h = trimmed(h);

    auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
        if (name.empty()) return std::nullopt;
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            if (required) throw UsageError("mapping refers to column '" + name + "' which is not in the header");
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto senderCol = column(mapping.sender, true);
    const auto receiverCol = column(mapping.receiver, true);
    const auto timeCol = column(mapping.time, true);
    const auto contentCol = column(mapping.content, !mapping.content.empty());
    const auto idCol = column(mapping.id, !mapping.id.empty());
    const auto channelCol = column(mapping.channel, !mapping.channel.empty());
    std::vector<bool> mapped(header.size(), false);
    for (const auto& c : {senderCol, receiverCol, timeCol, contentCol, idCol, channelCol}) {
        if (c) mapped[*c] = true;
    }

    std::vector<std::string> fields;
    while (reader.next(fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        auto get = [&](std::optional<std::size_t> c) -> std::string {
            return c && *c < fields.size() ? fields[*c] : std::string();
        };
        Record r;
        r.id = trimmed(get(idCol));
        r.sender = trimmed(get(senderCol));
        r.recipients = splitRecipients(get(receiverCol), mapping.recipientSeparator);
        r.rawTime = trimmed(get(timeCol));
        r.time = parseTimestamp(r.rawTime);
        r.content = get(contentCol);
        r.channel = trimmed(get(channelCol));
        for (std::size_t c = 0; c < header.size() && c < fields.size(); ++c) {
            if (!mapped[c] && !header[c].empty()) r.meta[header[c]] = fields[c];
        }
        sink.add(std::move(r), line);
    }
}

std::string scalarText(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return {};
    return v.dump();
}

void ingestJsonl(std::istream& in, const FieldMapping& mapping, Ingestor& sink) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(text);
        } catch (const json::exception&) {
            sink.reject(line, "malformed JSON record");
            continue;
        }
        if (!obj.is_object()) {
            sink.reject(line, "record is not an object");
            continue;
        }
        auto field = [&](const std::string& key) -> const json* {
            if (key.empty()) return nullptr;
            auto it = obj.find(key);
            return it == obj.end() ? nullptr : &*it;
        };
        Record r;
        if (const json* v = field(mapping.id)) r.id = scalarText(*v);
        if (const json* v = field(mapping.sender)) r.sender = trimmed(scalarText(*v));
        if (const json* v = field(mapping.receiver)) {
            if (v->is_array()) {
                for (const json& e : *v) {
                    std::string s = trimmed(scalarText(e));
                    if (!s.empty() && std::find(r.recipients.begin(), r.recipients.end(), s) == r.recipients.end()) {
                        r.recipients.push_back(std::move(s));
                    }
                }
            } else {
                r.recipients = splitRecipients(scalarText(*v), mapping.recipientSeparator);
            }
        }
        if (const json* v = field(mapping.time)) {
            if (v->is_number()) {
                r.rawTime = v->dump();
                r.time = v->is_number_float() ? Timestamp(v->get<double>()) : v->get<Timestamp>();
            } else {
                r.rawTime = trimmed(scalarText(*v));
                r.time = parseTimestamp(r.rawTime);
            }
        }
        if (const json* v = field(mapping.content)) r.content = scalarText(*v);
        if (const json* v = field(mapping.channel)) r.channel = scalarText(*v);
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            const std::string& k = it.key();
            if (k == mapping.id || k == mapping.sender || k == mapping.receiver || k == mapping.time ||
                k == mapping.content || k == mapping.channel) {
                continue;
            }
            r.meta[k] = scalarText(it.value());
        }
        sink.add(std::move(r), line);
    }
}

} // namespace

IngestResult ingest(std::istream& in, InputFormat format, const FieldMapping& mapping) {
    IngestResult result;
    Ingestor sink(result);
    if (format == InputFormat::Csv) ingestCsv(in, mapping, sink);
    else ingestJsonl(in, mapping, sink);
    result.corpus = sink.finish();
    return result;
}

} // namespace commgraph
