#include "collar/eval.hpp"

#include "collar/error.hpp"
#include "collar/image_io.hpp"

#include <iomanip>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace collar {
namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& empty) {
    empty = den == 0;
    return empty ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json metrics_json(const Metrics& m) {
    nlohmann::json j = {{"iou", m.iou}, {"recall", m.recall}, {"precision", m.precision}};
    nlohmann::json empty = nlohmann::json::array();
    if (m.iou_empty) empty.push_back("iou");
    if (m.recall_empty) empty.push_back("recall");
    if (m.precision_empty) empty.push_back("precision");
    if (!empty.empty()) j["empty_convention"] = empty;
    return j;
}

nlohmann::json counts_json(const ConfusionCounts& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

struct MacroSum {
    double iou = 0.0, recall = 0.0, precision = 0.0;
    std::size_t n = 0;

    void add(const Metrics& m) {
        iou += m.iou;
        recall += m.recall;
        precision += m.precision;
        ++n;
    }
    Metrics mean() const {
        Metrics m;
        if (n == 0) return m;
        m.iou = iou / n;
        m.recall = recall / n;
        m.precision = precision / n;
        return m;
    }
};

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
}

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt) {
    if (!pred.same_shape(gt)) {
        throw Error(ErrorCode::DimensionMismatch, "prediction and ground-truth sizes differ");
    }
    ConfusionCounts c;
    const auto p = pred.bits();
    const auto g = gt.bits();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i]) {
            g[i] ? ++c.tp : ++c.fp;
        } else {
            g[i] ? ++c.fn : ++c.tn;
        }
    }
    return c;
}

Metrics metrics(const ConfusionCounts& c) {
    Metrics m;
    m.iou = ratio(c.tp, c.tp + c.fp + c.fn, m.iou_empty);
    m.recall = ratio(c.tp, c.tp + c.fn, m.recall_empty);
    m.precision = ratio(c.tp, c.tp + c.fp, m.precision_empty);
    return m;
}

MetricReport evaluate_set(const DatasetManifest& manifest, const fs::path& pred_dir,
                          Averaging averaging) {
    std::vector<std::string> missing;
    std::vector<fs::path> preds;
    for (const ManifestEntry& e : manifest.entries) {
        const fs::path p = pred_dir / fs::path(e.mask).filename();
        if (!fs::exists(p)) missing.push_back(e.mask);
        preds.push_back(p);
    }
    if (!missing.empty()) {
        std::string msg = "no prediction for:";
        for (const auto& m : missing) msg += " " + m;
        throw Error(ErrorCode::MissingPrediction, msg);
    }

    MetricReport report;
    report.averaging = averaging;
    MacroSum macro;
    std::map<std::string, MacroSum> macro_garment;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const ManifestEntry& e = manifest.entries[i];
        const ConfusionCounts c = confusion(read_mask_png(preds[i]), read_mask_png(e.mask));
        report.counts += c;
        ++report.pairs;
        const Metrics m = metrics(c);
        if (m.iou_empty) ++report.empty_convention_pairs;
        macro.add(m);
        if (e.garment) {
            report.per_garment_counts[*e.garment] += c;
            macro_garment[*e.garment].add(m);
        }
    }
    if (averaging == Averaging::Micro) {
        report.overall = metrics(report.counts);
        for (const auto& [g, c] : report.per_garment_counts) report.per_garment[g] = metrics(c);
    } else {
        report.overall = macro.mean();
        for (const auto& [g, s] : macro_garment) report.per_garment[g] = s.mean();
    }
    return report;
}

nlohmann::json to_json(const MetricReport& report) {
    nlohmann::json j = {
        {"averaging", report.averaging == Averaging::Micro ? "micro" : "macro"},
        {"pairs", report.pairs},
        {"empty_convention_pairs", report.empty_convention_pairs},
        {"counts", counts_json(report.counts)},
        {"overall", metrics_json(report.overall)},
    };
    nlohmann::json garments = nlohmann::json::object();
    for (const auto& [g, m] : report.per_garment) {
        garments[g] = metrics_json(m);
        garments[g]["counts"] = counts_json(report.per_garment_counts.at(g));
    }
    j["per_garment"] = garments;
    return j;
}

std::string format_table(const MetricReport& report) {
    std::vector<std::pair<std::string, Metrics>> cols;
    for (const auto& [g, m] : report.per_garment) cols.emplace_back(g, m);
    cols.emplace_back("all", report.overall);

    std::ostringstream out;
    out << std::left << std::setw(12) << "";
    for (const auto& [name, m] : cols) out << std::right << std::setw(10) << name;
    out << '\n';
    const auto row = [&](const char* label, double Metrics::*field) {
        out << std::left << std::setw(12) << label;
        for (const auto& [name, m] : cols) {
            out << std::right << std::setw(10) << std::fixed << std::setprecision(3) << m.*field;
        }
        out << '\n';
    };
    row("Recall", &Metrics::recall);
    row("Precision", &Metrics::precision);
    row("IoU", &Metrics::iou);
    return out.str();
}

}  // namespace collar
