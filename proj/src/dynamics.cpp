#include "commgraph/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace commgraph {

void DynamicsParams::validate() const {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw LevelError("dynamics", field, what);
    };
    require(std::isfinite(mu), "mu", "must be finite");
    require(std::isfinite(sigma) && sigma > 0, "sigma", "must be > 0");
    require(std::isfinite(h) && h > 0, "h", "must be > 0");
    require(std::isfinite(theta) && theta > 0, "theta", "must be > 0");
    require(minMessages >= 1, "minMessages", "must be >= 1");
}

std::string EpisodeRef::toString() const {
    return std::to_string(row) + ":" + std::to_string(col) + ":" + std::to_string(first);
}

std::optional<EpisodeRef> EpisodeRef::parse(std::string_view text) {
    EpisodeRef ref;
    std::uint32_t* parts[] = {&ref.row, &ref.col, &ref.first};
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 3; ++i) {
        auto [next, ec] = std::from_chars(p, end, *parts[i]);
        if (ec != std::errc{} || next == p) return std::nullopt;
        p = next;
        if (i < 2) {
            if (p == end || *p != ':') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return ref;
}

double density(std::span<const Timestamp> times, double t, const DynamicsParams& params) {
    const double w = params.width();
    const double inv = 1.0 / (2.0 * w * w);
    double sum = 0.0;
    for (Timestamp ti : times) {
        const double d = t - static_cast<double>(ti) - params.mu;
        sum += std::exp(-d * d * inv);
    }
    return sum;
}

namespace {

// Kernels further than 9 widths contribute less than 2.6e-18 each.
constexpr double kCutoffWidths = 9.0;
// Sampling step inside an interval, in widths.
constexpr double kSampleStep = 1.0 / 8.0;
constexpr int kMaxRefineSteps = 60;

/// Density over kernel centres sorted ascending, in coordinates relative to
/// the first message of the stream (exact integer differences keep the
/// result invariant under a common time shift).
class DensityField {
public:
    DensityField(std::vector<double> centres, double width)
        : centres_(std::move(centres)), width_(width), inv2w2_(1.0 / (2.0 * width * width)) {}

    double operator()(double x) const { return derivatives(x).f; }

    struct Local {
        double f = 0, d1 = 0, d2 = 0;
    };

    /// Density and its first two derivatives at x.
    Local derivatives(double x) const {
        const double reach = kCutoffWidths * width_;
        auto lo = std::lower_bound(centres_.begin(), centres_.end(), x - reach);
        auto hi = std::upper_bound(lo, centres_.end(), x + reach);
        const double w2 = width_ * width_;
        Local out;
        for (auto it = lo; it != hi; ++it) {
            const double d = x - *it;
            const double k = std::exp(-d * d * inv2w2_);
            out.f += k;
            out.d1 -= k * d / w2;
            out.d2 += k * (d * d / w2 - 1.0) / w2;
        }
        return out;
    }

    const std::vector<double>& centres() const { return centres_; }
    double width() const { return width_; }

    /// True if the density drops below theta somewhere in (a, b).
    bool dipsBelow(double a, double b, double theta) const {
        const double len = b - a;
        if (len <= 0) return false;
        // Every centre is outside (a, b), so at the midpoint each kernel is at
        // most exp(-(len/2)^2 / 2w^2).
        const double half = len / 2;
        if (static_cast<double>(centres_.size()) * std::exp(-half * half * inv2w2_) < theta) return true;
        // The two endpoint kernels alone bound the density from below; their
        // sum is smallest at an endpoint or at the midpoint.
        const double pairFloor = std::min(1.0 + std::exp(-len * len * inv2w2_), 2.0 * std::exp(-half * half * inv2w2_));
        if (pairFloor >= theta) return false;
        if ((*this)(a + half) < theta) return true;

        const int k = std::max(2, static_cast<int>(std::ceil(len / (kSampleStep * width_))));
        const double step = len / k;
        std::vector<double> f(static_cast<std::size_t>(k) + 1);
        for (int i = 0; i <= k; ++i) {
            f[i] = (*this)(i == k ? b : a + i * step);
            if (f[i] < theta) return true;
        }
        for (int i = 1; i < k; ++i) {
            if (f[i] <= f[i - 1] && f[i] <= f[i + 1]) {
                if (localMinimum(a + (i - 1) * step, a + (i + 1) * step) < theta) return true;
            }
        }
        return false;
    }

    /// Largest density over [a, b] (a <= b).
    double maxOver(double a, double b) const {
        if (b <= a) return (*this)(a);
        const int k = std::max(2, static_cast<int>(std::ceil((b - a) / (kSampleStep * width_))));
        const double step = (b - a) / k;
        const std::vector<double> f = grid(a, step, k);
        const auto bestIndex = static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
        const double best = f[static_cast<std::size_t>(bestIndex)];
        const double lo = a + std::max(0, bestIndex - 1) * step;
        const double hi = std::min(b, a + (bestIndex + 1) * step);
        return std::max(best, -localMinimum(lo, hi, -1.0));
    }

private:
    /// Density at a + i*step for i = 0..k. Each kernel's values along the
    /// grid follow g' = g*r, r' = r*exp(-step^2/w^2), so only its first
    /// point needs exp.
    std::vector<double> grid(double a, double step, int k) const {
        std::vector<double> f(static_cast<std::size_t>(k) + 1, 0.0);
        const double reach = kCutoffWidths * width_;
        const double b = a + k * step;
        const double q = std::exp(-2.0 * step * step * inv2w2_);
        auto lo = std::lower_bound(centres_.begin(), centres_.end(), a - reach);
        auto hi = std::upper_bound(lo, centres_.end(), b + reach);
        for (auto it = lo; it != hi; ++it) {
            const double c = *it;
            const int i0 = std::max(0, static_cast<int>(std::ceil((c - reach - a) / step)));
            const int i1 = std::min(k, static_cast<int>(std::floor((c + reach - a) / step)));
            if (i0 > i1) continue;
            const double d = a + i0 * step - c;
            double g = std::exp(-d * d * inv2w2_);
            double r = std::exp(-(2.0 * d * step + step * step) * inv2w2_);
            for (int i = i0; i <= i1; ++i) {
                f[static_cast<std::size_t>(i)] += g;
                g *= r;
                r *= q;
            }
        }
        return f;
    }

    /// Smallest value of sign*f on [lo, hi], by Newton steps on the
    /// derivative kept inside a bisection bracket.
    double localMinimum(double lo, double hi, double sign = 1.0) const {
        const Local a = derivatives(lo), b = derivatives(hi);
        double best = std::min(sign * a.f, sign * b.f);
        // No interior minimum unless the slope changes sign.
        if (!(sign * a.d1 < 0 && sign * b.d1 > 0)) return best;
        const double tol = 1e-6 * width_;
        double x = (lo + hi) / 2;
        for (int i = 0; i < kMaxRefineSteps; ++i) {
            const Local v = derivatives(x);
            best = std::min(best, sign * v.f);
            const double g = sign * v.d1, h = sign * v.d2;
            if (g < 0) lo = x;
            else hi = x;
            double next = h > 0 ? x - g / h : (lo + hi) / 2;
            if (!(next > lo && next < hi)) next = (lo + hi) / 2;
            if (std::abs(next - x) < tol || hi - lo < tol) break;
            x = next;
        }
        return best;
    }

    std::vector<double> centres_;
    double width_;
    double inv2w2_;
};

Episode makeEpisode(const Corpus& corpus, std::vector<MessageIndex> messages, ParticipantIndex row,
                    ParticipantIndex col, double peak) {
    Episode e;
    e.row = row;
    e.col = col;
    e.start = corpus.message(messages.front()).timestamp;
    e.end = corpus.message(messages.back()).timestamp;
    e.initiator = corpus.message(messages.front()).sender;
    e.peakDensity = peak;
    e.messages = std::move(messages);
    return e;
}

} // namespace

std::vector<Episode> segmentStream(const Corpus& corpus, std::span<const MessageIndex> stream,
                                   ParticipantIndex row, ParticipantIndex col, const DynamicsParams& params) {
    params.validate();
    std::vector<Episode> episodes;
    if (stream.empty()) return episodes;

    const Timestamp origin = corpus.message(stream.front()).timestamp;
    std::vector<double> centres;
    centres.reserve(stream.size());
    for (MessageIndex m : stream) {
        centres.push_back(static_cast<double>(corpus.message(m).timestamp - origin) + params.mu);
    }
    const DensityField field(std::move(centres), params.width());
    const auto& s = field.centres();

    std::vector<MessageIndex> run;
    std::size_t runFirst = 0;
    auto close = [&](std::size_t last) {
        if (run.size() >= static_cast<std::size_t>(params.minMessages)) {
            const double peak = field.maxOver(s[runFirst], s[last]);
            episodes.push_back(makeEpisode(corpus, std::move(run), row, col, peak));
        }
        run.clear();
    };

    bool prevQualified = false;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        // The message's own kernel contributes exactly 1.
        const bool qualified = params.theta <= 1.0 || field(s[i]) >= params.theta;
        if (!qualified) {
            if (!run.empty()) close(i - 1);
            prevQualified = false;
            continue;
        }
        if (!run.empty() && !(prevQualified && !field.dipsBelow(s[i - 1], s[i], params.theta))) {
            close(i - 1);
        }
        if (run.empty()) runFirst = i;
        run.push_back(stream[i]);
        prevQualified = true;
    }
    if (!run.empty()) close(stream.size() - 1);
    return episodes;
}

std::vector<Episode> segmentEpisodes(const Corpus& corpus, ParticipantIndex a, ParticipantIndex b,
                                     const DynamicsParams& params) {
    if (a >= corpus.participantCount() || b >= corpus.participantCount()) {
        throw NotFoundError("unknown participant index in pair");
    }
    const auto stream = corpus.conversation(a, b);
    return segmentStream(corpus, stream, a, b, params);
}

const std::vector<std::string>& episodeFeatureNames() {
    static const std::vector<std::string> names{"durationSeconds",           "messageCount",
                                                "directionBalance",          "initiatorIsRowParticipant",
                                                "meanInterMessageGap",       "peakDensity"};
    return names;
}

FeatureVector episodeFeatures(const Episode& episode, const Corpus& corpus) {
    const auto n = static_cast<double>(episode.messages.size());
    double fromRow = 0;
    for (MessageIndex m : episode.messages) {
        if (corpus.message(m).sender == episode.row) ++fromRow;
    }
    // A self-conversation only has the row direction.
    const double toRow = episode.row == episode.col ? 0 : n - fromRow;
    const auto duration = static_cast<double>(episode.end - episode.start);
    return {duration,
            n,
            n > 0 ? (fromRow - toRow) / n : 0.0,
            episode.initiator == episode.row ? 1.0 : 0.0,
            n > 1 ? duration / (n - 1) : 0.0,
            episode.peakDensity};
}

std::optional<Episode> findEpisode(const Corpus& corpus, std::span<const MessageIndex> stream, const EpisodeRef& ref,
                                   const DynamicsParams& params) {
    if (std::find(stream.begin(), stream.end(), ref.first) == stream.end()) return std::nullopt;
    for (Episode& e : segmentStream(corpus, stream, ref.row, ref.col, params)) {
        if (e.messages.front() == ref.first) return std::move(e);
    }
    return std::nullopt;
}

} // namespace commgraph
