#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faast/dataset.hpp"

namespace faast::metrics {

struct PrfResult {
    double precision = 0, recall = 0, f1 = 0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    bool zero_denominator = false;  // flagged instead of NaN
};

/// Verdict is score >= sigma; labels must be +1/-1.
PrfResult prf(const std::vector<double>& scores, const std::vector<int>& labels, double sigma);

struct SweepPoint {
    double sigma = 0;
    double precision = 0, recall = 0, f1 = 0;
    long positives = 0;
};

std::vector<double> default_grid(double step = 0.01);  // [-1, 1]

std::vector<SweepPoint> sweep(const std::vector<double>& scores, const std::vector<int>& labels,
                              const std::vector<double>& grid);

struct RocResult {
    std::vector<std::pair<double, double>> points;  // (FPR, TPR), ascending
    double auc = 0;
};

/// ROC over unique score thresholds plus trapezoid AUC (ties get the
/// Mann-Whitney half credit automatically). Throws Error{SingleClass}
/// unless both classes are present.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Per clone type: the type's true pairs as positives against all shared
/// non-clone pairs as negatives. Types without pairs are omitted.
std::map<CloneType, PrfResult> per_type_report(
    const std::vector<double>& scores, const std::vector<int>& labels,
    const std::vector<std::optional<CloneType>>& types, double sigma);

struct EvalReport {
    double sigma = 0;
    PrfResult overall;
    std::vector<SweepPoint> curve;
    RocResult roc;
    std::map<CloneType, PrfResult> per_type;
    bool has_types = false;
};

EvalReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                    const std::vector<std::optional<CloneType>>& types, double sigma,
                    const std::vector<double>& grid);

std::string report_text(const EvalReport& report);
nlohmann::json report_json(const EvalReport& report);
std::string sweep_csv(const std::vector<SweepPoint>& curve);
std::string roc_csv(const RocResult& roc);

/// Minimal standalone SVG line plots for the sweep and ROC curves.
std::string sweep_svg(const std::vector<SweepPoint>& curve);
std::string roc_svg(const RocResult& roc);

}  // namespace faast::metrics
