#pragma once

// Ground-truth labeling, threshold sweep, detection cost, DET points and
// k-fold cross-validated cost reporting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "firststory/errors.hpp"
#include "firststory/scorers.hpp"

namespace fsd {

enum class Label { novel, not_novel, excluded };

struct GroundTruth {
    std::unordered_map<std::string, Label> labels;
    std::unordered_map<std::string, std::string> cluster_of;
    std::size_t novel_count = 0;

    Label label_of(const std::string& doc_id) const {
        auto it = labels.find(doc_id);
        return it == labels.end() ? Label::excluded : it->second;
    }

    void exclude(const std::string& doc_id) {
        auto it = labels.find(doc_id);
        if (it == labels.end()) return;
        if (it->second == Label::novel && novel_count > 0) novel_count--;
        it->second = Label::excluded;
    }
};

// The first document of each cluster is the novel one; the rest are not.
// Documents in excluded (mixed) clusters, or without a cluster id, carry the
// excluded label. Input order is chronological.
inline GroundTruth derive_labels(
    const std::vector<std::pair<std::string, std::string>>& docs_with_clusters,
    const std::unordered_set<std::string>& excluded_clusters = {}) {
    GroundTruth truth;
    std::unordered_set<std::string> seen;
    for (const auto& [doc_id, cluster_id] : docs_with_clusters) {
        Label label;
        if (cluster_id.empty() || excluded_clusters.contains(cluster_id)) {
            label = Label::excluded;
        } else if (seen.insert(cluster_id).second) {
            label = Label::novel;
            truth.novel_count++;
        } else {
            label = Label::not_novel;
        }
        truth.labels.emplace(doc_id, label);
        truth.cluster_of.emplace(doc_id, cluster_id);
    }
    return truth;
}

struct CostConfig {
    double c_miss = 1.0;
    double c_fa = 1.0;
    double p_target = 0.5;
};

// C_Det = C_Miss * P_Miss * P_Target + C_Fa * P_Fa * (1 - P_Target)
inline double detection_cost(double p_miss, double p_fa, const CostConfig& config = {}) {
    return config.c_miss * p_miss * config.p_target +
           config.c_fa * p_fa * (1.0 - config.p_target);
}

// Inverse standard normal CDF. Rational approximation (Acklam) refined with
// one Halley step against erfc, good to well under 1e-8. Inputs are clipped
// to [1e-6, 1 - 1e-6].
inline double probit(double p) {
    p = std::clamp(p, 1e-6, 1.0 - 1e-6);
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = err * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

struct DetPoint {
    double threshold = 0.0;
    double p_miss = 0.0;
    double p_fa = 0.0;
    double probit_miss = 0.0;
    double probit_fa = 0.0;
};

struct SweepResult {
    std::vector<DetPoint> points;  // ascending threshold
    double best_threshold = 0.0;   // minC_Det threshold
    double best_cost = 0.0;        // minC_Det
    DetPoint best_point;
};

namespace eval_detail {

struct LabeledScore {
    double score;
    bool target;
};

// Records with novel/not_novel labels, in input order.
inline std::vector<LabeledScore> labeled_scores(const std::vector<ScoreRecord>& records,
                                                const GroundTruth& truth) {
    std::vector<LabeledScore> out;
    out.reserve(records.size());
    for (const auto& record : records) {
        Label label = truth.label_of(record.doc_id);
        if (label == Label::excluded) continue;
        out.push_back({record.raw_score, label == Label::novel});
    }
    return out;
}

}  // namespace eval_detail

// Sweep every operating point: candidate thresholds are the midpoints between
// consecutive distinct scores plus -inf/+inf sentinels (cost is piecewise
// constant in between). Returns all DET points and the argmin-cost threshold,
// ties broken toward lower p_miss then lower threshold.
inline SweepResult sweep(const std::vector<ScoreRecord>& records, const GroundTruth& truth,
                         const CostConfig& config = {}) {
    if (records.empty()) throw NoTargets("no score records to sweep");
    Orientation orientation = records.front().orientation;
    for (const auto& record : records)
        if (record.orientation != orientation)
            throw ConfigError("score records mix orientations; sweep one scorer at a time");
    auto scores = eval_detail::labeled_scores(records, truth);

    std::size_t targets = 0;
    for (const auto& ls : scores) targets += ls.target ? 1 : 0;
    std::size_t non_targets = scores.size() - targets;
    if (targets == 0) throw NoTargets("score set has no target (novel) documents");
    if (non_targets == 0) throw NoNonTargets("score set has no non-target documents");

    // Sort by score; walk thresholds from low to high. For higher_is_novel a
    // rising threshold converts detections back to misses one distinct score
    // at a time, so misses/fas at each candidate come from prefix counts.
    std::vector<eval_detail::LabeledScore> sorted = scores;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& x, const auto& y) { return x.score < y.score; });

    std::vector<double> candidates;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (sorted[i].score < sorted[i + 1].score)
            candidates.push_back(sorted[i].score + (sorted[i + 1].score - sorted[i].score) / 2.0);
    }
    candidates.push_back(std::numeric_limits<double>::infinity());

    SweepResult result;
    result.points.reserve(candidates.size());
    std::size_t idx = 0;  // scores <= current threshold
    std::size_t targets_below = 0;
    std::size_t non_targets_below = 0;
    for (double threshold : candidates) {
        while (idx < sorted.size() && sorted[idx].score < threshold) {
            if (sorted[idx].target)
                targets_below++;
            else
                non_targets_below++;
            idx++;
        }
        DetPoint point;
        point.threshold = threshold;
        if (orientation == Orientation::higher_is_novel) {
            // detected = score > threshold (no score equals a midpoint)
            point.p_miss = static_cast<double>(targets_below) / static_cast<double>(targets);
            point.p_fa = static_cast<double>(non_targets - non_targets_below) /
                         static_cast<double>(non_targets);
        } else {
            // detected = score < threshold
            point.p_miss = static_cast<double>(targets - targets_below) /
                           static_cast<double>(targets);
            point.p_fa = static_cast<double>(non_targets_below) / static_cast<double>(non_targets);
        }
        point.probit_miss = probit(point.p_miss);
        point.probit_fa = probit(point.p_fa);
        result.points.push_back(point);
    }

    const DetPoint* best = &result.points.front();
    double best_cost = detection_cost(best->p_miss, best->p_fa, config);
    for (const auto& point : result.points) {
        double cost = detection_cost(point.p_miss, point.p_fa, config);
        if (cost < best_cost ||
            (cost == best_cost && (point.p_miss < best->p_miss ||
                                   (point.p_miss == best->p_miss &&
                                    point.threshold < best->threshold)))) {
            best = &point;
            best_cost = cost;
        }
    }
    result.best_point = *best;
    result.best_threshold = best->threshold;
    result.best_cost = best_cost;
    return result;
}

struct CrossValidationResult {
    double avg_cost = 0.0;
    std::vector<double> fold_thresholds;
    std::vector<double> fold_costs;
};

// k contiguous chronological blocks (input order is stream order). Per fold:
// pick the minC_Det threshold on the training part, pay C_Det on the test
// part, report the mean. shuffle exists for comparison runs only; the default
// keeps future stream statistics out of threshold selection.
inline CrossValidationResult cross_validate(const std::vector<ScoreRecord>& records,
                                            const GroundTruth& truth, int k = 5,
                                            const CostConfig& config = {}, bool shuffle = false,
                                            std::uint64_t shuffle_seed = 0) {
    if (k < 2) throw ConfigError("cross-validation needs k >= 2");
    std::vector<const ScoreRecord*> labeled;
    for (const auto& record : records)
        if (truth.label_of(record.doc_id) != Label::excluded) labeled.push_back(&record);
    if (labeled.size() < static_cast<std::size_t>(k))
        throw FoldTooSmall("fewer labeled documents than folds");
    if (shuffle) {
        std::mt19937_64 rng(shuffle_seed);
        std::shuffle(labeled.begin(), labeled.end(), rng);
    }

    const std::size_t n = labeled.size();
    CrossValidationResult result;
    for (int fold = 0; fold < k; ++fold) {
        std::size_t begin = n * static_cast<std::size_t>(fold) / static_cast<std::size_t>(k);
        std::size_t end = n * (static_cast<std::size_t>(fold) + 1) / static_cast<std::size_t>(k);
        std::vector<ScoreRecord> train;
        train.reserve(n - (end - begin));
        std::size_t test_targets = 0;
        std::size_t test_non_targets = 0;
        std::size_t misses = 0;
        std::size_t fas = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= begin && i < end) continue;
            train.push_back(*labeled[i]);
        }
        double threshold;
        try {
            threshold = sweep(train, truth, config).best_threshold;
        } catch (const NoTargets&) {
            throw FoldTooSmall("training part of fold " + std::to_string(fold + 1) +
                               " has no targets");
        } catch (const NoNonTargets&) {
            throw FoldTooSmall("training part of fold " + std::to_string(fold + 1) +
                               " has no non-targets");
        }
        for (std::size_t i = begin; i < end; ++i) {
            bool target = truth.label_of(labeled[i]->doc_id) == Label::novel;
            bool detected = is_novel(*labeled[i], threshold);
            if (target) {
                test_targets++;
                if (!detected) misses++;
            } else {
                test_non_targets++;
                if (detected) fas++;
            }
        }
        if (test_targets == 0)
            throw FoldTooSmall("fold " + std::to_string(fold + 1) + " has no targets");
        if (test_non_targets == 0)
            throw FoldTooSmall("fold " + std::to_string(fold + 1) + " has no non-targets");
        double cost = detection_cost(static_cast<double>(misses) / test_targets,
                                     static_cast<double>(fas) / test_non_targets, config);
        result.fold_thresholds.push_back(threshold);
        result.fold_costs.push_back(cost);
    }
    result.avg_cost = std::accumulate(result.fold_costs.begin(), result.fold_costs.end(), 0.0) /
                      static_cast<double>(k);
    return result;
}

// DET export, directly plottable.
inline void write_det_tsv(std::ostream& out, const std::vector<DetPoint>& points) {
    out << "threshold\tp_miss\tp_fa\tprobit_miss\tprobit_fa\n";
    for (const auto& point : points) {
        out << point.threshold << '\t' << point.p_miss << '\t' << point.p_fa << '\t'
            << point.probit_miss << '\t' << point.probit_fa << '\n';
    }
}

// One row of the experiment grid.
struct CostGridRow {
    std::string scorer;
    std::string scheme;
    std::size_t window = 0;
    std::string decay;  // "none" for scorers without decay
    double alpha = 0.0;
    double avg_cost = 0.0;
};

inline void write_cost_grid_csv(std::ostream& out, const std::vector<CostGridRow>& rows) {
    out << "scorer,scheme,N,decay,alpha,avgC_Det\n";
    for (const auto& row : rows) {
        out << row.scorer << ',' << row.scheme << ',' << row.window << ',' << row.decay << ','
            << row.alpha << ',' << row.avg_cost << '\n';
    }
}

}  // namespace fsd
