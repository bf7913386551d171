#include "commgraph/levels.hpp"

#include "commgraph/kernels.hpp"
#include "commgraph/timeparse.hpp"
#include "commgraph/tokenize.hpp"

#include <algorithm>
#include <set>

namespace commgraph {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const std::vector<std::string_view>& registrationOrder() {
    static const std::vector<std::string_view> order{kVolumeLevel,  kDistributionLevel, kTimefilterLevel,
                                                     kUserSelectionLevel, kKeywordLevel, kThematicLevel,
                                                     kDynamicsLevel};
    return order;
}

LevelParams defaultParams(std::string_view id) {
    if (id == kVolumeLevel) return VolumeParams{};
    if (id == kDistributionLevel) return DistributionParams{};
    if (id == kTimefilterLevel) return TimeFilterParams{};
    if (id == kUserSelectionLevel) return UserSelectionParams{};
    if (id == kKeywordLevel) return KeywordParams{};
    if (id == kThematicLevel) return ThematicParams{};
    if (id == kDynamicsLevel) return DynamicsParams{};
    throw LevelError(std::string(id), "level", "unknown level");
}

std::string_view roleName(UserRole r) {
    switch (r) {
    case UserRole::Sender: return "sender";
    case UserRole::Receiver: return "receiver";
    case UserRole::Either: return "either";
    }
    return "either";
}

/// First enabled state of the given level, if any.
const LevelState* enabledState(std::span<const LevelState> states, std::string_view id) {
    for (const LevelState& s : states) {
        if (s.enabled && s.levelId() == id) return &s;
    }
    return nullptr;
}

std::vector<char> participantFlags(const Corpus& corpus, const std::vector<std::string>& ids, const char* field) {
    std::vector<char> flags(corpus.participantCount(), 0);
    for (const std::string& id : ids) {
        const auto p = corpus.findParticipant(id);
        if (!p) throw LevelError(std::string(kUserSelectionLevel), field, "unknown participant '" + id + "'");
        flags[*p] = 1;
    }
    return flags;
}

// JSON helpers raising LevelError with the field name.
const json& member(const json& params, std::string_view level, const char* field) {
    auto it = params.find(field);
    if (it == params.end()) throw LevelError(std::string(level), field, "missing");
    return *it;
}

Timestamp timeField(const json& params, std::string_view level, const char* field) {
    const json& v = member(params, level, field);
    if (v.is_number_integer()) return v.get<Timestamp>();
    if (v.is_string()) {
        if (auto t = parseTimestamp(v.get<std::string>())) return *t;
    }
    throw LevelError(std::string(level), field, "expected epoch seconds or an ISO-8601 time");
}

std::vector<std::string> stringList(const json& params, std::string_view level, const char* field) {
    auto it = params.find(field);
    if (it == params.end()) return {};
    if (!it->is_array()) throw LevelError(std::string(level), field, "expected a list of strings");
    std::vector<std::string> out;
    for (const json& e : *it) {
        if (!e.is_string()) throw LevelError(std::string(level), field, "expected a list of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

double numberField(const json& params, std::string_view level, const char* field, double fallback) {
    auto it = params.find(field);
    if (it == params.end()) return fallback;
    if (!it->is_number()) throw LevelError(std::string(level), field, "expected a number");
    return it->get<double>();
}

void rejectUnknownFields(const json& params, std::string_view level, std::initializer_list<std::string_view> known) {
    if (!params.is_object()) throw LevelError(std::string(level), "params", "expected an object");
    for (auto it = params.begin(); it != params.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw LevelError(std::string(level), it.key(), "unknown field");
        }
    }
}

} // namespace

std::string_view LevelState::levelId() const {
    return std::visit(Overloaded{
                          [](const VolumeParams&) { return kVolumeLevel; },
                          [](const DistributionParams&) { return kDistributionLevel; },
                          [](const TimeFilterParams&) { return kTimefilterLevel; },
                          [](const UserSelectionParams&) { return kUserSelectionLevel; },
                          [](const KeywordParams&) { return kKeywordLevel; },
                          [](const ThematicParams&) { return kThematicLevel; },
                          [](const DynamicsParams&) { return kDynamicsLevel; },
                      },
                      params);
}

std::vector<LevelDescriptor> levelRegistry(const CategorySet& categories) {
    std::vector<std::string> thematic;
    for (const std::string& c : categories.names()) thematic.push_back("thematic." + c);
    std::vector<std::string> dynamics;
    for (const std::string& n : episodeFeatureNames()) dynamics.push_back("dynamics." + n);
    return {
        {std::string(kVolumeLevel), true, false, {"volume.pairMessages"}},
        {std::string(kDistributionLevel), true, false, {}},
        {std::string(kTimefilterLevel), false, true, {}},
        {std::string(kUserSelectionLevel), false, true, {}},
        {std::string(kKeywordLevel), false, true, {}},
        {std::string(kThematicLevel), false, true, std::move(thematic)},
        {std::string(kDynamicsLevel), true, true, std::move(dynamics)},
    };
}

bool Selection::contains(MessageIndex m) const { return std::binary_search(messages.begin(), messages.end(), m); }

void validateLevel(const LevelContext& ctx, const LevelState& state) {
    if (!state.enabled) return;
    std::visit(Overloaded{
                   [](const VolumeParams&) {},
                   [](const DistributionParams&) {},
                   [](const TimeFilterParams& p) {
                       if (p.range.start > p.range.end) {
                           throw LevelError(std::string(kTimefilterLevel), "start", "start must not be after end");
                       }
                   },
                   [&](const UserSelectionParams& p) {
                       const auto include = participantFlags(ctx.corpus, p.include, "include");
                       const auto exclude = participantFlags(ctx.corpus, p.exclude, "exclude");
                       for (const std::string& id : p.exclude) {
                           if (include[*ctx.corpus.findParticipant(id)]) {
                               throw LevelError(std::string(kUserSelectionLevel), "exclude",
                                                "participant '" + id + "' is both included and excluded");
                           }
                       }
                   },
                   [](const KeywordParams& p) {
                       if (p.terms.empty()) {
                           throw LevelError(std::string(kKeywordLevel), "terms", "at least one term is required");
                       }
                       for (const std::string& t : p.terms) {
                           if (tokenize(t).empty()) {
                               throw LevelError(std::string(kKeywordLevel), "terms", "term '" + t + "' has no words");
                           }
                       }
                   },
                   [&](const ThematicParams& p) {
                       try {
                           parseQuery(p.query, ctx.categories);
                       } catch (const ParseError& e) {
                           throw LevelError(std::string(kThematicLevel), "query", e.what());
                       }
                       if (ctx.annotations == nullptr) {
                           throw LevelError(std::string(kThematicLevel), "query", "no annotation index is loaded");
                       }
                   },
                   [](const DynamicsParams& p) { p.validate(); },
               },
               state.params);
}

MessageMask timefilter(const Corpus& corpus, TimeRange range) {
    if (range.start > range.end) throw LevelError(std::string(kTimefilterLevel), "start", "start must not be after end");
    const auto msgs = corpus.messages();
    MessageMask mask(msgs.size(), 0);
    const auto lo = std::partition_point(msgs.begin(), msgs.end(), [&](const Message& m) { return m.timestamp < range.start; });
    const auto hi = std::partition_point(lo, msgs.end(), [&](const Message& m) { return m.timestamp <= range.end; });
    std::fill(mask.begin() + (lo - msgs.begin()), mask.begin() + (hi - msgs.begin()), 1);
    return mask;
}

MessageMask userSelection(const Corpus& corpus, const UserSelectionParams& params) {
    const auto include = participantFlags(corpus, params.include, "include");
    const auto exclude = participantFlags(corpus, params.exclude, "exclude");
    for (std::size_t i = 0; i < include.size(); ++i) {
        if (include[i] && exclude[i]) {
            throw LevelError(std::string(kUserSelectionLevel), "exclude",
                             "participant '" + corpus.participantId(static_cast<ParticipantIndex>(i)) +
                                 "' is both included and excluded");
        }
    }
    const bool restrict = !params.include.empty();
    const UserRole role = params.role;
    return kernels::maskWhere(corpus.messageCount(), [&](MessageIndex i) {
        const Message& m = corpus.message(i);
        switch (role) {
        case UserRole::Sender:
            return (!restrict || include[m.sender]) && !exclude[m.sender];
        case UserRole::Receiver:
            return (!restrict || include[m.receiver]) && !exclude[m.receiver];
        case UserRole::Either:
            return (!restrict || include[m.sender] || include[m.receiver]) && !exclude[m.sender] &&
                   !exclude[m.receiver];
        }
        return false;
    });
}

MessageMask keywordSearch(const Corpus& corpus, const KeywordParams& params) {
    if (params.terms.empty()) throw LevelError(std::string(kKeywordLevel), "terms", "at least one term is required");
    std::vector<std::vector<std::string>> terms;
    for (const std::string& t : params.terms) {
        auto ws = words(t, params.caseFold);
        if (ws.empty()) throw LevelError(std::string(kKeywordLevel), "terms", "term '" + t + "' has no words");
        terms.push_back(std::move(ws));
    }
    const bool all = params.mode == KeywordMode::All;
    return kernels::maskWhere(corpus.messageCount(), [&](MessageIndex i) {
        const auto tokens = words(corpus.message(i).content, params.caseFold);
        auto present = [&](const std::vector<std::string>& term) {
            return std::search(tokens.begin(), tokens.end(), term.begin(), term.end()) != tokens.end();
        };
        return all ? std::all_of(terms.begin(), terms.end(), present)
                   : std::any_of(terms.begin(), terms.end(), present);
    });
}

MessageMask episodeMembership(const Corpus& corpus, const DynamicsParams& params) {
    params.validate();
    std::vector<MessageIndex> all(corpus.messageCount());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<MessageIndex>(i);
    const auto streams = conversationsOf(corpus, all);
    const auto episodes = kernels::segmentAll(corpus, streams, params);
    MessageMask mask(corpus.messageCount(), 0);
    for (const auto& list : episodes) {
        for (const Episode& e : list) {
            for (MessageIndex m : e.messages) mask[m] = 1;
        }
    }
    return mask;
}

MessageMask levelMask(const LevelContext& ctx, const LevelState& state) {
    if (!state.enabled) return MessageMask(ctx.corpus.messageCount(), 1);
    validateLevel(ctx, state);
    return std::visit(Overloaded{
                          [&](const VolumeParams&) { return MessageMask(ctx.corpus.messageCount(), 1); },
                          [&](const DistributionParams&) { return MessageMask(ctx.corpus.messageCount(), 1); },
                          [&](const TimeFilterParams& p) { return timefilter(ctx.corpus, p.range); },
                          [&](const UserSelectionParams& p) { return userSelection(ctx.corpus, p); },
                          [&](const KeywordParams& p) { return keywordSearch(ctx.corpus, p); },
                          [&](const ThematicParams& p) {
                              return thematicMask(*ctx.annotations, parseQuery(p.query, ctx.categories));
                          },
                          [&](const DynamicsParams& p) { return episodeMembership(ctx.corpus, p); },
                      },
                      state.params);
}

Selection selectionFromMask(const Corpus& corpus, const MessageMask& mask) {
    Selection s;
    std::vector<char> endpoint(corpus.participantCount(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        s.messages.push_back(static_cast<MessageIndex>(i));
        const Message& m = corpus.message(static_cast<MessageIndex>(i));
        endpoint[m.sender] = 1;
        endpoint[m.receiver] = 1;
    }
    for (std::size_t p = 0; p < endpoint.size(); ++p) {
        if (endpoint[p]) s.participants.push_back(static_cast<ParticipantIndex>(p));
    }
    return s;
}

Selection applyAll(const LevelContext& ctx, std::span<const LevelState> states) {
    for (const LevelState& s : states) validateLevel(ctx, s);
    MessageMask mask(ctx.corpus.messageCount(), 1);
    for (const LevelState& s : states) {
        if (!s.enabled) continue;
        kernels::intersectInto(mask, levelMask(ctx, s));
    }
    return selectionFromMask(ctx.corpus, mask);
}

std::optional<TimeRange> activeTimeRange(const Corpus& corpus, std::span<const LevelState> states) {
    if (const LevelState* s = enabledState(states, kTimefilterLevel)) {
        return std::get<TimeFilterParams>(s->params).range;
    }
    return corpus.timeExtent();
}

namespace {

DynamicsParams dynamicsOf(std::span<const LevelState> states) {
    if (const LevelState* s = enabledState(states, kDynamicsLevel)) return std::get<DynamicsParams>(s->params);
    return {};
}

template <class Emit>
void forEachFeatureLevel(std::span<const LevelState> states, Emit emit) {
    for (std::string_view id : registrationOrder()) {
        if (enabledState(states, id) != nullptr) emit(id);
    }
}

} // namespace

FeatureVector featureVector(const LevelContext& ctx, const Episode& episode, std::span<const LevelState> states) {
    FeatureVector out;
    forEachFeatureLevel(states, [&](std::string_view id) {
        if (id == kVolumeLevel) {
            out.push_back(static_cast<double>(ctx.corpus.conversation(episode.row, episode.col).size()));
        } else if (id == kThematicLevel) {
            if (ctx.annotations != nullptr) {
                for (std::size_t c : ctx.annotations->tally(episode.messages)) out.push_back(static_cast<double>(c));
            } else {
                out.insert(out.end(), ctx.categories.size(), 0.0);
            }
        } else if (id == kDynamicsLevel) {
            const FeatureVector f = episodeFeatures(episode, ctx.corpus);
            out.insert(out.end(), f.begin(), f.end());
        }
    });
    return out;
}

FeatureVector featureVector(const LevelContext& ctx, const FeatureTarget& target, std::span<const LevelState> states) {
    const DynamicsParams params = dynamicsOf(states);
    if (const auto* ref = std::get_if<EpisodeRef>(&target)) {
        if (ref->row >= ctx.corpus.participantCount() || ref->col >= ctx.corpus.participantCount()) {
            throw NotFoundError("unknown episode '" + ref->toString() + "'");
        }
        const auto stream = ctx.corpus.conversation(ref->row, ref->col);
        auto episode = findEpisode(ctx.corpus, stream, *ref, params);
        if (!episode) throw NotFoundError("unknown episode '" + ref->toString() + "'");
        return featureVector(ctx, *episode, states);
    }

    const auto& id = std::get<MessageTarget>(target).messageId;
    const auto m = ctx.corpus.findMessage(id);
    if (!m) throw NotFoundError("unknown target message '" + id + "'");
    const Message& msg = ctx.corpus.message(*m);
    FeatureVector out;
    forEachFeatureLevel(states, [&](std::string_view level) {
        if (level == kVolumeLevel) {
            out.push_back(static_cast<double>(ctx.corpus.conversation(msg.sender, msg.receiver).size()));
        } else if (level == kThematicLevel) {
            if (ctx.annotations != nullptr) {
                const MessageIndex one[] = {*m};
                for (std::size_t c : ctx.annotations->tally(one)) out.push_back(static_cast<double>(c));
            } else {
                out.insert(out.end(), ctx.categories.size(), 0.0);
            }
        } else if (level == kDynamicsLevel) {
            // Features of the episode containing the message; zeros if none.
            FeatureVector f(episodeFeatureNames().size(), 0.0);
            for (const Episode& e : segmentEpisodes(ctx.corpus, msg.sender, msg.receiver, params)) {
                if (std::find(e.messages.begin(), e.messages.end(), *m) != e.messages.end()) {
                    f = episodeFeatures(e, ctx.corpus);
                    break;
                }
            }
            out.insert(out.end(), f.begin(), f.end());
        }
    });
    return out;
}

std::vector<std::string> featureNames(const CategorySet& categories, std::span<const LevelState> states) {
    const auto registry = levelRegistry(categories);
    std::vector<std::string> out;
    for (const LevelDescriptor& d : registry) {
        if (enabledState(states, d.levelId) != nullptr) out.insert(out.end(), d.featureNames.begin(), d.featureNames.end());
    }
    return out;
}

AnalysisState AnalysisState::initial() {
    AnalysisState s;
    for (std::string_view id : registrationOrder()) s.levels.push_back({false, defaultParams(id)});
    return s;
}

LevelState& AnalysisState::level(std::string_view id) {
    for (LevelState& s : levels) {
        if (s.levelId() == id) return s;
    }
    throw LevelError(std::string(id), "level", "unknown level");
}

const LevelState& AnalysisState::level(std::string_view id) const {
    return const_cast<AnalysisState&>(*this).level(id);
}

json toJson(const LevelState& state) {
    json params = std::visit(
        Overloaded{
            [](const VolumeParams&) { return json::object(); },
            [](const DistributionParams&) { return json::object(); },
            [](const TimeFilterParams& p) { return json{{"start", p.range.start}, {"end", p.range.end}}; },
            [](const UserSelectionParams& p) {
                return json{{"include", p.include}, {"exclude", p.exclude}, {"role", roleName(p.role)}};
            },
            [](const KeywordParams& p) {
                return json{{"terms", p.terms}, {"mode", p.mode == KeywordMode::All ? "all" : "any"}, {"caseFold", p.caseFold}};
            },
            [](const ThematicParams& p) { return json{{"query", p.query}}; },
            [](const DynamicsParams& p) {
                return json{{"mu", p.mu}, {"sigma", p.sigma}, {"h", p.h}, {"theta", p.theta}, {"minMessages", p.minMessages}};
            },
        },
        state.params);
    return json{{"level", state.levelId()}, {"enabled", state.enabled}, {"params", std::move(params)}};
}

LevelState levelStateFromJson(const json& doc) {
    if (!doc.is_object()) throw LevelError("?", "level", "level state must be an object");
    auto idIt = doc.find("level");
    if (idIt == doc.end() || !idIt->is_string()) throw LevelError("?", "level", "missing level id");
    const std::string id = idIt->get<std::string>();
    LevelState state{false, defaultParams(id)};

    if (auto it = doc.find("enabled"); it != doc.end()) {
        if (!it->is_boolean()) throw LevelError(id, "enabled", "expected true or false");
        state.enabled = it->get<bool>();
    }
    const json params = doc.contains("params") ? doc.at("params") : json::object();

    std::visit(Overloaded{
                   [&](VolumeParams&) { rejectUnknownFields(params, id, {}); },
                   [&](DistributionParams&) { rejectUnknownFields(params, id, {}); },
                   [&](TimeFilterParams& p) {
                       rejectUnknownFields(params, id, {"start", "end"});
                       p.range = {timeField(params, id, "start"), timeField(params, id, "end")};
                   },
                   [&](UserSelectionParams& p) {
                       rejectUnknownFields(params, id, {"include", "exclude", "role"});
                       p.include = stringList(params, id, "include");
                       p.exclude = stringList(params, id, "exclude");
                       std::sort(p.include.begin(), p.include.end());
                       p.include.erase(std::unique(p.include.begin(), p.include.end()), p.include.end());
                       std::sort(p.exclude.begin(), p.exclude.end());
                       p.exclude.erase(std::unique(p.exclude.begin(), p.exclude.end()), p.exclude.end());
                       const std::string role = params.value("role", "either");
                       if (role == "sender") p.role = UserRole::Sender;
                       else if (role == "receiver") p.role = UserRole::Receiver;
                       else if (role == "either") p.role = UserRole::Either;
                       else throw LevelError(id, "role", "expected sender, receiver or either");
                   },
                   [&](KeywordParams& p) {
                       rejectUnknownFields(params, id, {"terms", "mode", "caseFold"});
                       p.terms = stringList(params, id, "terms");
                       const std::string mode = params.value("mode", "any");
                       if (mode == "any") p.mode = KeywordMode::Any;
                       else if (mode == "all") p.mode = KeywordMode::All;
                       else throw LevelError(id, "mode", "expected any or all");
                       if (auto it = params.find("caseFold"); it != params.end()) {
                           if (!it->is_boolean()) throw LevelError(id, "caseFold", "expected true or false");
                           p.caseFold = it->get<bool>();
                       }
                   },
                   [&](ThematicParams& p) {
                       rejectUnknownFields(params, id, {"query"});
                       if (auto it = params.find("query"); it != params.end()) {
                           if (!it->is_string()) throw LevelError(id, "query", "expected a string");
                           p.query = it->get<std::string>();
                       }
                   },
                   [&](DynamicsParams& p) {
                       rejectUnknownFields(params, id, {"mu", "sigma", "h", "theta", "minMessages"});
                       p.mu = numberField(params, id, "mu", p.mu);
                       p.sigma = numberField(params, id, "sigma", p.sigma);
                       p.h = numberField(params, id, "h", p.h);
                       p.theta = numberField(params, id, "theta", p.theta);
                       if (auto it = params.find("minMessages"); it != params.end()) {
                           if (!it->is_number_integer()) throw LevelError(id, "minMessages", "expected an integer");
                           p.minMessages = it->get<int>();
                       }
                       p.validate();
                   },
               },
               state.params);
    return state;
}

json toJson(const AnalysisState& state) {
    json levels = json::array();
    for (const LevelState& s : state.levels) levels.push_back(toJson(s));
    return json{{"version", 1}, {"levels", std::move(levels)}, {"fadeThreshold", state.fadeThreshold}};
}

AnalysisState analysisStateFromJson(const json& doc) {
    if (!doc.is_object()) throw LevelError("state", "document", "expected an object");
    AnalysisState state = AnalysisState::initial();
    if (auto it = doc.find("levels"); it != doc.end()) {
        if (!it->is_array()) throw LevelError("state", "levels", "expected a list");
        std::set<std::string> seen;
        for (const json& l : *it) {
            LevelState s = levelStateFromJson(l);
            const std::string id(s.levelId());
            if (!seen.insert(id).second) throw LevelError(id, "level", "listed more than once");
            state.level(id) = std::move(s);
        }
    }
    if (auto it = doc.find("fadeThreshold"); it != doc.end()) {
        if (!it->is_number()) throw LevelError("retrieval", "fadeThreshold", "expected a number");
        state.fadeThreshold = it->get<double>();
        if (!(state.fadeThreshold >= 0 && state.fadeThreshold <= 1)) {
            throw LevelError("retrieval", "fadeThreshold", "must lie in [0, 1]");
        }
    }
    return state;
}

std::string canonicalText(const AnalysisState& state) { return toJson(state).dump(); }

} // namespace commgraph
