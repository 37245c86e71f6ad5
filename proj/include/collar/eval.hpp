#pragma once

#include "collar/labeler.hpp"
#include "collar/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace collar {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o);
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Per-pixel counts with the collar as the positive class.
ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt);

struct Metrics {
    double iou = 1.0;
    double recall = 1.0;
    double precision = 1.0;
    // Set when a denominator was zero and the empty-empty convention applied.
    bool iou_empty = false;
    bool recall_empty = false;
    bool precision_empty = false;
};

Metrics metrics(const ConfusionCounts& c);

enum class Averaging { Micro, Macro };

struct MetricReport {
    Averaging averaging = Averaging::Micro;
    Metrics overall;
    ConfusionCounts counts;
    std::size_t pairs = 0;
    std::size_t empty_convention_pairs = 0;  // pairs with no positives in pred or gt
    std::map<std::string, Metrics> per_garment;
    std::map<std::string, ConfusionCounts> per_garment_counts;
};

/// Prediction for an entry is `pred_dir / filename(entry.mask)`. Micro mode
/// divides summed counts; macro mode averages per-pair metrics.
/// Throws MissingPrediction naming every entry without a prediction file.
MetricReport evaluate_set(const DatasetManifest& manifest, const std::filesystem::path& pred_dir,
                          Averaging averaging = Averaging::Micro);

nlohmann::json to_json(const MetricReport& report);

/// Column table: one column per garment (plus "all"), rows Recall, Precision, IoU.
std::string format_table(const MetricReport& report);

}  // namespace collar
