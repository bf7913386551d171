#pragma once

#include "commgraph/aggregate.hpp"
#include "commgraph/session.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commgraph {

/// Semantic-zoom views, coarse to fine.
enum class ZoomView { Volume, Distribution, DistributionPlus, Dynamics };

inline constexpr int kBaseCellSize = 16;
inline constexpr int kDistributionBins = 8;
inline constexpr int kDistributionPlusBins = 32;

/// One view per doubling of the base size: <32 Volume, [32,64) Distribution,
/// [64,128) Distribution+, >=128 Dynamics. Throws UsageError for px < 1.
ZoomView viewForCellSize(int px);

std::string_view viewName(ZoomView view);
/// Accepts the names from viewName(), case-insensitive. Throws UsageError.
ZoomView parseView(std::string_view name);
/// Histogram bins shown by the view (Volume uses the coarse count in details).
int binsForView(ZoomView view);

struct AxisOrder {
    enum class Kind { Alphabetical, VolumeDesc, Manual };
    Kind kind = Kind::Alphabetical;
    std::vector<std::string> manual;  ///< a permutation of all participant ids

    /// "alphabetical", "volumeDesc" or "manual" (ids supplied separately).
    static AxisOrder parse(std::string_view kind, std::vector<std::string> manual = {});
};

/// A run of display positions along one axis; clamped to the axis.
struct AxisWindow {
    std::size_t start = 0;
    std::optional<std::size_t> count;  ///< empty: to the end
};

struct MatrixRequest {
    std::optional<NodeId> node;  ///< defaults to the current node
    ZoomView view = ZoomView::Volume;
    AxisOrder rowOrder;
    AxisOrder colOrder;
    /// Visible part of the matrix. Only cells inside both windows are
    /// returned; maxCount and totalCount still cover the whole matrix.
    AxisWindow rowWindow;
    AxisWindow colWindow;
};

struct EpisodeSummary {
    std::string episodeId;
    Timestamp start = 0;
    Timestamp end = 0;
    std::size_t messageCount = 0;
    double fadeFactor = 1.0;
    std::optional<double> score;
};

struct CellAggregate {
    ParticipantIndex row = 0;
    ParticipantIndex col = 0;
    std::uint64_t count = 0;
    double normalizedCount = 0.0;
    std::vector<std::uint64_t> histogram;  ///< Distribution views only
    std::vector<EpisodeSummary> episodes;  ///< Dynamics view only
};

struct MatrixResponse {
    NodeId node = 0;
    ZoomView view = ZoomView::Volume;
    std::vector<ParticipantIndex> rows;  ///< full axis, display order
    std::vector<ParticipantIndex> cols;
    std::pair<std::size_t, std::size_t> rowRange;  ///< [first, last) display positions returned
    std::pair<std::size_t, std::size_t> colRange;
    std::uint64_t maxCount = 0;
    std::uint64_t totalCount = 0;
    std::optional<TimeRange> timeRange;
    std::vector<double> binEdges;
    std::vector<CellAggregate> cells;  ///< nonzero cells in the windows, (row, col) display order
};

/// Aggregates for the node's selection. Throws NotFoundError for an
/// unknown node, UsageError for a bad manual order.
MatrixResponse computeMatrix(const Session& session, const MatrixRequest& request);
/// Serialized JSON body of a matrix response.
std::string matrixJson(const MatrixResponse& response, const Corpus& corpus);

struct RawRecord {
    MessageIndex message = 0;
};

struct CellDetails {
    ParticipantIndex row = 0;
    ParticipantIndex col = 0;
    ZoomView view = ZoomView::Volume;
    std::size_t messageCount = 0;  ///< both directions, current selection
    std::vector<double> binEdges;
    std::vector<std::uint64_t> histogram;
    std::vector<std::pair<CategoryId, std::size_t>> entities;  ///< count desc, then name
    std::vector<MessageIndex> records;  ///< the requested page
    std::size_t offset = 0;
    std::size_t limit = 0;
};

inline constexpr std::size_t kDefaultRecordLimit = 50;

/// Details-on-demand for the conversation between row and col (both
/// directions) within the current selection.
CellDetails cellDetails(const Session& session, ParticipantIndex row, ParticipantIndex col, ZoomView view,
                        std::size_t offset = 0, std::size_t limit = kDefaultRecordLimit);
nlohmann::json toJson(const CellDetails& details, const Session& session);

struct ChatRecord {
    enum class Side { Left, Right };
    Side senderSide = Side::Left;  ///< Left: sent by the episode's row participant
    MessageIndex message = 0;
    Timestamp timestamp = 0;
};

std::vector<ChatRecord> episodeTranscript(const Session& session, std::string_view episodeId);
nlohmann::json transcriptJson(const Session& session, std::string_view episodeId);

nlohmann::json toJson(const LabelOutcome& outcome);

} // namespace commgraph
