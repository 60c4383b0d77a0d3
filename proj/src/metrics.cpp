#include "faast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "faast/errors.hpp"

namespace faast::metrics {

namespace {

void check_lengths(size_t a, size_t b, const char* what) {
    if (a != b)
        raise(ErrorCode::LengthMismatch,
              std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

PrfResult prf(const std::vector<double>& scores, const std::vector<int>& labels, double sigma) {
    check_lengths(scores.size(), labels.size(), "prf scores/labels");
    PrfResult r;
    for (size_t i = 0; i < scores.size(); ++i) {
        bool positive = scores[i] >= sigma;
        bool truth = labels[i] > 0;
        if (positive && truth) ++r.tp;
        else if (positive && !truth) ++r.fp;
        else if (!positive && truth) ++r.fn;
        else ++r.tn;
    }
    if (r.tp + r.fp > 0) r.precision = double(r.tp) / double(r.tp + r.fp);
    else r.zero_denominator = true;
    if (r.tp + r.fn > 0) r.recall = double(r.tp) / double(r.tp + r.fn);
    else r.zero_denominator = true;
    if (r.precision + r.recall > 0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else
        r.zero_denominator = true;
    return r;
}

std::vector<double> default_grid(double step) {
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        double v = -1.0 + step * i;
        if (v > 1.0 + 1e-12) break;
        grid.push_back(std::min(v, 1.0));
    }
    return grid;
}

std::vector<SweepPoint> sweep(const std::vector<double>& scores, const std::vector<int>& labels,
                              const std::vector<double>& grid) {
    check_lengths(scores.size(), labels.size(), "sweep scores/labels");
    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    for (double sigma : grid) {
        PrfResult r = prf(scores, labels, sigma);
        out.push_back({sigma, r.precision, r.recall, r.f1, r.tp + r.fp});
    }
    return out;
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores.size(), labels.size(), "roc scores/labels");
    long pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y > 0; });
    long neg = static_cast<long>(labels.size()) - pos;
    if (pos == 0 || neg == 0)
        raise(ErrorCode::SingleClass, "ROC needs both classes present");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    RocResult out;
    out.points.emplace_back(0.0, 0.0);
    long tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] > 0) ++tp;
            else ++fp;
            ++i;
        }
        out.points.emplace_back(double(fp) / double(neg), double(tp) / double(pos));
    }
    double auc = 0.0;
    for (size_t k = 1; k < out.points.size(); ++k) {
        auto [x0, y0] = out.points[k - 1];
        auto [x1, y1] = out.points[k];
        auc += (x1 - x0) * (y0 + y1) / 2.0;
    }
    out.auc = auc;
    return out;
}

std::map<CloneType, PrfResult> per_type_report(
    const std::vector<double>& scores, const std::vector<int>& labels,
    const std::vector<std::optional<CloneType>>& types, double sigma) {
    check_lengths(scores.size(), labels.size(), "per_type scores/labels");
    check_lengths(scores.size(), types.size(), "per_type scores/types");
    for (const auto& t : types)
        if (!t) raise(ErrorCode::MissingTypeTags, "per-type report needs clone type tags");

    std::vector<double> neg_scores;
    std::vector<int> neg_labels;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] < 0) {
            neg_scores.push_back(scores[i]);
            neg_labels.push_back(-1);
        }
    }
    std::map<CloneType, PrfResult> out;
    for (CloneType t : {CloneType::T1, CloneType::T2, CloneType::ST3, CloneType::MT3,
                        CloneType::WT3T4}) {
        std::vector<double> s = neg_scores;
        std::vector<int> y = neg_labels;
        long n_pos = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            if (labels[i] > 0 && *types[i] == t) {
                s.push_back(scores[i]);
                y.push_back(1);
                ++n_pos;
            }
        }
        if (n_pos == 0) continue;
        out[t] = prf(s, y, sigma);
    }
    return out;
}

EvalReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                    const std::vector<std::optional<CloneType>>& types, double sigma,
                    const std::vector<double>& grid) {
    EvalReport report;
    report.sigma = sigma;
    report.overall = prf(scores, labels, sigma);
    report.curve = sweep(scores, labels, grid);
    report.roc = roc_auc(scores, labels);
    report.has_types = !types.empty() &&
                       std::all_of(types.begin(), types.end(), [](auto& t) { return bool(t); });
    if (report.has_types) report.per_type = per_type_report(scores, labels, types, sigma);
    return report;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

nlohmann::json prf_json(const PrfResult& r) {
    return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
            {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn},
            {"tn", r.tn},               {"zero_denominator", r.zero_denominator}};
}

}  // namespace

std::string report_text(const EvalReport& report) {
    std::ostringstream os;
    os << "threshold sigma: " << fmt(report.sigma) << "\n";
    os << "precision " << fmt(report.overall.precision) << "  recall "
       << fmt(report.overall.recall) << "  f1 " << fmt(report.overall.f1) << "\n";
    os << "counts: tp " << report.overall.tp << " fp " << report.overall.fp << " fn "
       << report.overall.fn << " tn " << report.overall.tn << "\n";
    os << "roc_auc: " << fmt(report.roc.auc) << "\n";
    if (!report.per_type.empty()) {
        // Per-type metrics use that type's true pairs as positives against
        // all shared non-clone pairs as negatives.
        os << "per-type (positives: that type; negatives: all non-clone pairs)\n";
        os << "  type      P       R       F1      pairs\n";
        for (auto& [t, r] : report.per_type) {
            std::string name = clone_type_name(t);
            name.resize(8, ' ');
            os << "  " << name << "  " << fmt(r.precision) << "  " << fmt(r.recall) << "  "
               << fmt(r.f1) << "  " << (r.tp + r.fn) << "\n";
        }
    }
    return os.str();
}

nlohmann::json report_json(const EvalReport& report) {
    nlohmann::json j;
    j["sigma"] = report.sigma;
    j["overall"] = prf_json(report.overall);
    j["auc"] = report.roc.auc;
    nlohmann::json curve = nlohmann::json::array();
    for (const SweepPoint& p : report.curve)
        curve.push_back({{"sigma", p.sigma},
                         {"precision", p.precision},
                         {"recall", p.recall},
                         {"f1", p.f1},
                         {"positives", p.positives}});
    j["sweep"] = std::move(curve);
    nlohmann::json roc = nlohmann::json::array();
    for (auto& [fpr, tpr] : report.roc.points) roc.push_back({{"fpr", fpr}, {"tpr", tpr}});
    j["roc"] = std::move(roc);
    if (!report.per_type.empty()) {
        nlohmann::json per;
        for (auto& [t, r] : report.per_type) per[clone_type_name(t)] = prf_json(r);
        j["per_type"] = std::move(per);
    }
    return j;
}

std::string sweep_csv(const std::vector<SweepPoint>& curve) {
    std::ostringstream os;
    os << "sigma,precision,recall,f1,positives\n";
    for (const SweepPoint& p : curve)
        os << p.sigma << "," << p.precision << "," << p.recall << "," << p.f1 << ","
           << p.positives << "\n";
    return os.str();
}

std::string roc_csv(const RocResult& roc) {
    std::ostringstream os;
    os << "fpr,tpr\n";
    for (auto& [fpr, tpr] : roc.points) os << fpr << "," << tpr << "\n";
    return os.str();
}

namespace {

struct SvgPlot {
    std::ostringstream body;
    static constexpr int kW = 640, kH = 480, kPad = 50;

    static double sx(double x, double x0, double x1) {
        return kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad);
    }
    static double sy(double y) { return kH - kPad - y * (kH - 2 * kPad); }

    void polyline(const std::vector<std::pair<double, double>>& pts, double x0, double x1,
                  const char* color) {
        body << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (auto& [x, y] : pts) body << sx(x, x0, x1) << "," << sy(y) << " ";
        body << "\"/>\n";
    }

    void label(double x, double y, const std::string& text, const char* color = "#000") {
        body << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"12\" fill=\"" << color
             << "\">" << text << "</text>\n";
    }

    std::string finish(const std::string& title, double x0, double x1) {
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
           << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad
           << "\" y2=\"" << kH - kPad << "\" stroke=\"#444\"/>\n";
        os << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
           << kH - kPad << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << kW / 2 - 60 << "\" y=\"24\" font-size=\"14\">" << title
           << "</text>\n";
        os << "<text x=\"" << kPad - 10 << "\" y=\"" << kH - kPad + 16 << "\" font-size=\"11\">"
           << x0 << "</text>\n";
        os << "<text x=\"" << kW - kPad - 6 << "\" y=\"" << kH - kPad + 16
           << "\" font-size=\"11\">" << x1 << "</text>\n";
        os << body.str() << "</svg>\n";
        return os.str();
    }
};

}  // namespace

std::string sweep_svg(const std::vector<SweepPoint>& curve) {
    SvgPlot plot;
    std::vector<std::pair<double, double>> p, r, f;
    for (const SweepPoint& pt : curve) {
        p.emplace_back(pt.sigma, pt.precision);
        r.emplace_back(pt.sigma, pt.recall);
        f.emplace_back(pt.sigma, pt.f1);
    }
    plot.polyline(p, -1, 1, "#1f77b4");
    plot.polyline(r, -1, 1, "#ff7f0e");
    plot.polyline(f, -1, 1, "#2ca02c");
    plot.label(SvgPlot::kW - 130, 40, "precision", "#1f77b4");
    plot.label(SvgPlot::kW - 130, 56, "recall", "#ff7f0e");
    plot.label(SvgPlot::kW - 130, 72, "f1", "#2ca02c");
    return plot.finish("threshold sweep", -1, 1);
}

std::string roc_svg(const RocResult& roc) {
    SvgPlot plot;
    plot.polyline(roc.points, 0, 1, "#1f77b4");
    plot.polyline({{0, 0}, {1, 1}}, 0, 1, "#bbbbbb");
    char auc[48];
    std::snprintf(auc, sizeof(auc), "AUC = %.4f", roc.auc);
    plot.label(SvgPlot::kW - 150, 40, auc, "#1f77b4");
    return plot.finish("ROC curve", 0, 1);
}

}  // namespace faast::metrics
