// commgraph command-line entry points.

#include "commgraph/api.hpp"
#include "commgraph/config.hpp"
#include "commgraph/demo.hpp"
#include "commgraph/ingest.hpp"
#include "commgraph/kernels.hpp"
#include "commgraph/server.hpp"
#include "commgraph/timeparse.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace commgraph;
using nlohmann::json;

namespace {

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void writeFile(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << bytes;
}

Timestamp timeArg(const std::string& text, const char* flag) {
    if (auto t = parseTimestamp(text)) return *t;
    throw UsageError(std::string(flag) + ": cannot parse time '" + text + "'");
}

struct Inputs {
    std::string corpus;
    std::string annotations;
};

std::shared_ptr<const Corpus> loadCorpusArg(const Inputs& in) {
    return std::make_shared<const Corpus>(loadCorpusFile(in.corpus));
}

std::shared_ptr<const AnnotationIndex> loadAnnotationsArg(const Inputs& in, const Corpus& corpus) {
    if (in.annotations.empty()) return nullptr;
    std::ifstream f(in.annotations);
    if (!f) throw DataError("cannot open annotations '" + in.annotations + "'");
    return std::make_shared<const AnnotationIndex>(loadAnnotations(f, corpus));
}

SessionConfig sessionConfig(const Config& config) {
    SessionConfig s;
    s.categories = config.categories;
    s.forest = config.forest;
    s.dynamics = config.dynamics;
    s.fadeThreshold = config.fadeThreshold;
    return s;
}

void addDynamicsFlags(CLI::App* cmd, std::optional<double>& mu, std::optional<double>& sigma, std::optional<double>& h,
                      std::optional<double>& theta, std::optional<int>& minMessages) {
    cmd->add_option("--mu", mu, "kernel centre shift, seconds");
    cmd->add_option("--sigma", sigma, "kernel width, seconds");
    cmd->add_option("--bandwidth", h, "bandwidth scale h");
    cmd->add_option("--theta", theta, "density threshold");
    cmd->add_option("--min-messages", minMessages, "smallest episode kept");
}

std::string episodeLine(const Corpus& corpus, const Episode& e) {
    const FeatureVector f = episodeFeatures(e, corpus);
    std::ostringstream line;
    line << e.ref().toString() << '\t' << corpus.participantId(e.row) << '\t' << corpus.participantId(e.col) << '\t'
         << formatTimestamp(e.start) << '\t' << formatTimestamp(e.end) << '\t' << e.messages.size() << '\t' << f[2]
         << '\t' << e.peakDensity;
    return line.str();
}

HttpServer* activeServer = nullptr;

void onSignal(int) {
    if (activeServer) activeServer->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"commgraph: multi-level analysis of communication corpora"};
    app.require_subcommand(1);
    std::string configPath;
    app.add_option("--config", configPath, "JSON file overriding dynamics, categories, forest and fade defaults");

    Inputs inputs;
    auto corpusFlags = [&](CLI::App* cmd, bool annotations) {
        cmd->add_option("--corpus", inputs.corpus, "corpus file")->required();
        if (annotations) cmd->add_option("--annotations", inputs.annotations, "annotations file");
    };

    // ingest
    auto* ingestCmd = app.add_subcommand("ingest", "Convert CSV or JSON-lines messages into a corpus file");
    std::string input, format = "csv", mapping, out;
    char delimiter = ',', separator = ';';
    ingestCmd->add_option("--input", input, "source file")->required();
    ingestCmd->add_option("--format", format, "csv or jsonl");
    ingestCmd->add_option("--map", mapping, "e.g. sender=from,receiver=to,time=date,content=body,id=id")->required();
    ingestCmd->add_option("--delimiter", delimiter, "CSV field delimiter");
    ingestCmd->add_option("--separator", separator, "separator between multiple recipients");
    ingestCmd->add_option("--out", out, "corpus file to write")->required();

    // annotate
    auto* annotateCmd = app.add_subcommand("annotate", "Tag entities with the rule-based tagger");
    corpusFlags(annotateCmd, false);
    std::string gazetteer;
    bool noPatterns = false;
    annotateCmd->add_option("--gazetteer", gazetteer, "CATEGORY:term lines");
    annotateCmd->add_flag("--no-patterns", noPatterns, "disable the DATE/TIME/MONEY/... patterns");
    annotateCmd->add_option("--out", out, "annotations file to write")->required();

    // query
    auto* queryCmd = app.add_subcommand("query", "Print ids of messages matching a concept query");
    corpusFlags(queryCmd, true);
    std::string queryText, from, to;
    queryCmd->add_option("--q", queryText, "concept query, e.g. \"PERSON ~7 GPE\"")->required();
    queryCmd->add_option("--from", from, "earliest time (inclusive)");
    queryCmd->add_option("--to", to, "latest time (inclusive)");

    // episodes
    auto* episodesCmd = app.add_subcommand("episodes", "List conversation episodes");
    corpusFlags(episodesCmd, false);
    std::vector<std::string> pair;
    std::optional<double> mu, sigma, h, theta;
    std::optional<int> minMessages;
    episodesCmd->add_option("--pair", pair, "two participant ids")->expected(2);
    addDynamicsFlags(episodesCmd, mu, sigma, h, theta, minMessages);

    // train
    auto* trainCmd = app.add_subcommand("train", "Train the relevance model from labeled episodes");
    corpusFlags(trainCmd, true);
    std::string labelsPath;
    trainCmd->add_option("--labels", labelsPath, "lines of '<episode id> relevant|irrelevant'")->required();
    trainCmd->add_option("--out", out, "model file to write")->required();

    // score
    auto* scoreCmd = app.add_subcommand("score", "Score every episode with a trained model");
    corpusFlags(scoreCmd, true);
    std::string modelPath;
    scoreCmd->add_option("--model", modelPath, "model file")->required();

    // report
    auto* reportCmd = app.add_subcommand("report", "Run a filter script and write, or replay, an analysis report");
    corpusFlags(reportCmd, true);
    std::string scriptPath, replayPath;
    auto* scriptOpt = reportCmd->add_option("--script", scriptPath, "JSON list of steps");
    auto* replayOpt = reportCmd->add_option("--replay", replayPath, "report to verify against the corpus");
    scriptOpt->excludes(replayOpt);
    reportCmd->add_option("--out", out, "report file (default: standard output)");

    // serve
    auto* serveCmd = app.add_subcommand("serve", "Serve the matrix HTTP API");
    corpusFlags(serveCmd, true);
    std::string host = "127.0.0.1";
    int port = 8080;
    serveCmd->add_option("--host", host, "interface to bind");
    serveCmd->add_option("--port", port, "port (0 picks a free one)");

    // demo
    auto* demoCmd = app.add_subcommand("demo", "Write the synthetic fraud fixture");
    std::string outDir;
    DemoOptions demo;
    demoCmd->add_option("--out-dir", outDir, "directory for fraud.csv, gazetteer.txt, truth.json")->required();
    demoCmd->add_option("--messages", demo.messages, "message rows");
    demoCmd->add_option("--participants", demo.participants, "participants");
    demoCmd->add_option("--seed", demo.seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const Config config = configPath.empty() ? Config{} : Config::loadFile(configPath);

        if (*ingestCmd) {
            FieldMapping m = FieldMapping::parse(mapping);
            m.delimiter = delimiter;
            m.recipientSeparator = separator;
            std::ifstream f(input, std::ios::binary);
            if (!f) throw DataError("cannot open '" + input + "'");
            const IngestResult result = ingest(f, parseInputFormat(format), m);
            for (const IngestReject& r : result.rejects) std::cerr << "line " << r.line << ": " << r.reason << '\n';
            saveCorpusFile(result.corpus, out);
            std::cout << "records " << result.records << ", messages " << result.corpus.messageCount()
                      << ", participants " << result.corpus.participantCount() << ", rejected "
                      << result.rejects.size() << '\n';
        } else if (*annotateCmd) {
            const auto corpus = loadCorpusArg(inputs);
            GazetteerTagger tagger(config.categories);
            if (!gazetteer.empty()) tagger.loadFile(gazetteer);
            tagger.setPatternsEnabled(!noPatterns);
            const AnnotationIndex index = annotate(*corpus, tagger, config.categories);
            std::ofstream f(out, std::ios::binary);
            if (!f) throw DataError("cannot write '" + out + "'");
            saveAnnotations(index, *corpus, f);
        } else if (*queryCmd) {
            const auto corpus = loadCorpusArg(inputs);
            if (inputs.annotations.empty()) throw UsageError("query needs --annotations");
            const auto index = loadAnnotationsArg(inputs, *corpus);
            const ConceptQuery q = parseQuery(queryText, index->categories());
            MessageMask mask = thematicMask(*index, q);
            if (!from.empty() || !to.empty()) {
                const TimeRange range{from.empty() ? INT64_MIN : timeArg(from, "--from"),
                                      to.empty() ? INT64_MAX : timeArg(to, "--to")};
                kernels::intersectInto(mask, timefilter(*corpus, range));
            }
            std::vector<std::string> ids;
            for (std::size_t i = 0; i < mask.size(); ++i) {
                if (mask[i]) ids.push_back(corpus->message(static_cast<MessageIndex>(i)).id);
            }
            std::sort(ids.begin(), ids.end());
            for (const auto& id : ids) std::cout << id << '\n';
        } else if (*episodesCmd) {
            const auto corpus = loadCorpusArg(inputs);
            DynamicsParams p = config.dynamics;
            if (mu) p.mu = *mu;
            if (sigma) p.sigma = *sigma;
            if (h) p.h = *h;
            if (theta) p.theta = *theta;
            if (minMessages) p.minMessages = *minMessages;
            p.validate();
            if (!pair.empty()) {
                const auto a = corpus->requireParticipant(pair[0]);
                const auto b = corpus->requireParticipant(pair[1]);
                for (const Episode& e : segmentEpisodes(*corpus, a, b, p)) std::cout << episodeLine(*corpus, e) << '\n';
            } else {
                std::vector<MessageIndex> all(corpus->messageCount());
                for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<MessageIndex>(i);
                const auto streams = conversationsOf(*corpus, all);
                for (const auto& list : kernels::segmentAll(*corpus, streams, p)) {
                    for (const Episode& e : list) std::cout << episodeLine(*corpus, e) << '\n';
                }
            }
        } else if (*trainCmd) {
            const auto corpus = loadCorpusArg(inputs);
            Session session(corpus, loadAnnotationsArg(inputs, *corpus), sessionConfig(config));
            std::istringstream labels(readFile(labelsPath));
            std::string line;
            std::size_t lineNo = 0;
            while (std::getline(labels, line)) {
                ++lineNo;
                std::istringstream fields(line);
                std::string id, label;
                if (!(fields >> id)) continue;
                if (!(fields >> label)) throw DataError("labels line " + std::to_string(lineNo) + ": missing label");
                try {
                    session.label(id, parseLabel(label));
                } catch (const UsageError& e) {
                    throw DataError("labels line " + std::to_string(lineNo) + ": " + e.what());
                } catch (const NotFoundError& e) {
                    throw DataError("labels line " + std::to_string(lineNo) + ": " + e.what());
                }
            }
            if (!session.model()) throw DataError("training needs at least one relevant and one irrelevant label");
            writeFile(out, toJson(*session.model()).dump(2) + "\n");
            std::cout << "trained " << session.model()->trees().size() << " trees on " << session.labels().size()
                      << " labels\n";
        } else if (*scoreCmd) {
            const auto corpus = loadCorpusArg(inputs);
            Session session(corpus, loadAnnotationsArg(inputs, *corpus), sessionConfig(config));
            RelevanceModel model;
            try {
                model = modelFromJson(json::parse(readFile(modelPath)));
            } catch (const json::exception& e) {
                throw DataError(std::string("model file: ") + e.what());
            }
            const std::size_t expected = session.featureNames().size();
            if (model.featureDim() != expected) {
                throw DataError("model expects " + std::to_string(model.featureDim()) + " features, corpus setup yields " +
                                std::to_string(expected));
            }
            for (const Episode& e : session.allEpisodes()) {
                const Score s = model.score(session.features(e));
                std::cout << e.ref().toString() << '\t' << s.p << '\t' << s.uncertainty << '\t'
                          << fadeFactor(s.p, config.fadeThreshold) << '\n';
            }
        } else if (*reportCmd) {
            const auto corpus = loadCorpusArg(inputs);
            const auto annotations = loadAnnotationsArg(inputs, *corpus);
            if (!replayPath.empty()) {
                const LevelContext ctx{*corpus, annotations.get(), config.categories};
                const ReplayResult r = replayReport(readFile(replayPath), ctx);
                std::cout << "nodes " << r.nodes << ", corpus " << (r.corpusMatches ? "matches" : "differs")
                          << ", mismatches " << r.mismatches.size() << '\n';
                for (const auto& m : r.mismatches) {
                    std::cerr << "state " << m.node << ": expected " << m.expected << ", got " << m.actual << '\n';
                }
                return r.ok() ? 0 : 2;
            }
            Api api(Session(corpus, annotations, sessionConfig(config)));
            if (!scriptPath.empty()) {
                json script;
                try {
                    script = json::parse(readFile(scriptPath));
                } catch (const json::exception& e) {
                    throw DataError(std::string("script: ") + e.what());
                }
                if (!script.is_array()) throw DataError("script must be a JSON list of steps");
                for (const json& step : script) {
                    if (step.contains("filters")) api.postFilters(step.at("filters"));
                    else if (step.contains("navigate")) api.navigate({{"nodeId", step.at("navigate")}});
                    else if (step.contains("star")) {
                        json body{{"nodeId", step.at("star")}, {"starred", true}};
                        if (step.contains("note")) body["note"] = step.at("note");
                        api.star(body);
                    } else {
                        throw DataError("unknown script step " + step.dump());
                    }
                }
            }
            const std::string text = api.report();
            if (out.empty()) std::cout << text;
            else writeReportFile(out, text);
        } else if (*serveCmd) {
            const auto corpus = loadCorpusArg(inputs);
            Api api(Session(corpus, loadAnnotationsArg(inputs, *corpus), sessionConfig(config)));
            HttpServer server(api);
            const int bound = server.bind(host, port);
            std::cout << "listening on http://" << host << ':' << bound << std::endl;
            activeServer = &server;
            std::signal(SIGINT, onSignal);
            std::signal(SIGTERM, onSignal);
            server.listen();
            activeServer = nullptr;
        } else if (*demoCmd) {
            const DemoFixture fx = makeFraudFixture(demo);
            std::filesystem::create_directories(outDir);
            const std::filesystem::path dir(outDir);
            writeFile((dir / "fraud.csv").string(), fx.csv);
            writeFile((dir / "gazetteer.txt").string(), fx.gazetteer);
            const json truth{{"plantedSenders", fx.plantedSenders},
                             {"plantedReceiver", fx.plantedReceiver},
                             {"plantedMessageIds", fx.plantedMessageIds},
                             {"mapping", "id=id,sender=from,receiver=to,time=date,content=body"}};
            writeFile((dir / "truth.json").string(), truth.dump(2) + "\n");
            std::cout << "wrote " << (dir / "fraud.csv").string() << ", " << (dir / "gazetteer.txt").string() << ", "
                      << (dir / "truth.json").string() << '\n';
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
