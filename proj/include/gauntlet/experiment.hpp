/// @file experiment.hpp
/// @brief Dataset-by-scheme benchmark: quantiles of min-p over repeated runs,
///        classified against the theory mask computed from exact residuals.
#pragma once

#include <gauntlet/adversary.hpp>
#include <gauntlet/data.hpp>
#include <gauntlet/detector.hpp>
#include <gauntlet/errors.hpp>
#include <gauntlet/rng.hpp>
#include <gauntlet/windowing.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace gauntlet {

/// Profile family with fixed parameters; Rand.* families redraw their random
/// head on every generate call. Rand.Const uses the binary benchmark variant
/// (gen_rand_const_binary): streams must stay pure P/Q draws per sample, or
/// the mixture coins of the exact fractional tail inject composition noise
/// that masks the very invisibility the grid is meant to exhibit.
struct DatasetSpec {
    enum class Family { Periodic, RandConst, RandPer };

    Family family = Family::Periodic;
    int l = 100;     ///< period (Periodic, RandPer)
    int duty = 50;   ///< ones per period (Periodic)
    int a = 100;     ///< head length (RandConst, RandPer)

    std::string label() const {
        switch (family) {
            case Family::Periodic: return "Periodic";
            case Family::RandConst: return "Rand.Const (" + std::to_string(a) + ")";
            case Family::RandPer: return "Rand.Per. (" + std::to_string(a) + ")";
        }
        return {};
    }

    AdversarialProfile generate(int n, Rng& rng) const {
        switch (family) {
            case Family::Periodic: return gen_periodic(l, duty, n);
            case Family::RandConst: return gen_rand_const_binary(a, n, rng);
            case Family::RandPer: return gen_rand_periodic(a, l, n, rng);
        }
        throw InvalidSpecError("unknown dataset family");
    }

    nlohmann::ordered_json to_json() const {
        switch (family) {
            case Family::Periodic: return {{"family", "periodic"}, {"l", l}, {"duty", duty}};
            case Family::RandConst: return {{"family", "rand_const"}, {"a", a}};
            case Family::RandPer: return {{"family", "rand_periodic"}, {"a", a}, {"l", l}};
        }
        return {};
    }

    static DatasetSpec from_json(const nlohmann::json& j) {
        const std::string family = j.value("family", "");
        DatasetSpec d;
        if (family == "periodic") {
            d.family = Family::Periodic;
            d.l = j.value("l", 100);
            d.duty = j.value("duty", d.l / 2);
        } else if (family == "rand_const") {
            d.family = Family::RandConst;
            d.a = j.value("a", 100);
        } else if (family == "rand_periodic") {
            d.family = Family::RandPer;
            d.a = j.value("a", 100);
            d.l = j.value("l", 100);
        } else {
            throw ParseError("unknown dataset family \"" + family + "\"");
        }
        return d;
    }
};

struct ExperimentConfig {
    int n = 1000;
    int runs = 50;
    int permutations = 500;
    int stride = 1;              ///< applied to every scheme
    double theta = 0.05;         ///< alarm threshold echoed into reports
    double intensity = 5.0;      ///< two-squares drift intensity
    KernelSpec kernel = KernelSpec::rbf_median();
    std::vector<DatasetSpec> datasets;
    std::vector<WindowScheme> schemes;
    std::uint64_t seed = 42;
    int agreement_floor = 0;     ///< 0 disables enforcement

    void validate() const {
        if (n < 2 || runs < 1 || permutations < 1 || stride < 1) {
            throw InvalidSpecError("experiment needs n >= 2, runs >= 1, permutations >= 1, stride >= 1");
        }
        if (datasets.empty() || schemes.empty()) {
            throw InvalidSpecError("experiment needs at least one dataset and one scheme");
        }
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["n"] = n;
        j["runs"] = runs;
        j["permutations"] = permutations;
        j["stride"] = stride;
        j["theta"] = theta;
        j["intensity"] = intensity;
        j["kernel"] = kernel.to_json();
        auto ds = nlohmann::ordered_json::array();
        for (const auto& d : datasets) ds.push_back(d.to_json());
        j["datasets"] = std::move(ds);
        auto ss = nlohmann::ordered_json::array();
        for (const auto& s : schemes) ss.push_back(s.to_json());
        j["schemes"] = std::move(ss);
        j["seed"] = seed;
        j["agreement_floor"] = agreement_floor;
        return j;
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        c.n = j.value("n", 1000);
        c.runs = j.value("runs", 50);
        c.permutations = j.value("permutations", 500);
        c.stride = j.value("stride", 1);
        c.theta = j.value("theta", 0.05);
        c.intensity = j.value("intensity", 5.0);
        if (j.contains("kernel")) c.kernel = KernelSpec::from_json(j["kernel"]);
        if (j.contains("datasets")) {
            for (const auto& d : j["datasets"]) c.datasets.push_back(DatasetSpec::from_json(d));
        }
        if (j.contains("schemes")) {
            for (const auto& s : j["schemes"]) c.schemes.push_back(WindowScheme::from_json(s));
        }
        c.seed = j.value("seed", std::uint64_t{42});
        c.agreement_floor = j.value("agreement_floor", 0);
        c.validate();
        return c;
    }
};

/// Whether the family is invisible to the scheme in theory: the exact
/// rational residual of a representative member is zero. Computed, never
/// hard-coded; the representative's random head uses a fixed internal seed so
/// the mask is stable across experiment seeds (the zero/nonzero outcome is a
/// property of the family construction, not of the particular head). Pass the
/// scheme exactly as the detector runs it, stride included: invisibility is a
/// statement about the window pairs that are actually evaluated.
inline bool expected_adversarial(const DatasetSpec& dataset, const WindowScheme& scheme, int n) {
    Rng rng(derive_seed(0x6d61736bull /* "mask" */, {static_cast<std::uint64_t>(dataset.family),
                                                     static_cast<std::uint64_t>(dataset.a),
                                                     static_cast<std::uint64_t>(dataset.l)}));
    const auto member = dataset.generate(n, rng);
    const auto report = verify_profile(member, scheme, n);
    return report.is_adversarial;
}

enum class CellClass { Undetected, Detected, Mismatch };

inline const char* to_string(CellClass c) {
    switch (c) {
        case CellClass::Undetected: return "undetected";
        case CellClass::Detected: return "detected";
        case CellClass::Mismatch: return "mismatch";
    }
    return "";
}

struct Cell {
    double q90 = 0.0;
    double q10 = 0.0;
    bool expected_adversarial = false;
    CellClass classification = CellClass::Mismatch;
    bool agrees = false;
};

struct QuantileTable {
    std::vector<std::string> dataset_labels;
    std::vector<std::string> scheme_labels;
    std::vector<std::vector<Cell>> cells;  ///< [dataset][scheme]

    int cell_count() const {
        return static_cast<int>(dataset_labels.size() * scheme_labels.size());
    }

    int agreement_count() const {
        int c = 0;
        for (const auto& row : cells) {
            for (const auto& cell : row) c += cell.agrees ? 1 : 0;
        }
        return c;
    }
};

/// Empirical quantile with linear interpolation between order statistics
/// (the common "type 7" convention).
inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw InvalidSpecError("quantile of an empty sample");
    std::sort(xs.begin(), xs.end());
    const double h = (static_cast<double>(xs.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= xs.size()) return xs.back();
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[lo + 1] - xs[lo]);
}

/// Classification thresholds: a cell counts as undetected (drift hidden) when
/// the 10% quantile of min-p stays >= kUndetectedQ10Bar, as detected when the
/// 90% quantile falls to <= kDetectedQ90Bar.
///
/// The detected bar is set by what a desk-scale grid can certify. At n=1000
/// the strongest window pair a growing reference ever sees against a block
/// profile has masses (150, 100) and composition contrast 1/6; the exact
/// two-sided permutation tail of that composition is 0.0121. An unsigned
/// statistic cannot beat that number, so with 500 permutations the achievable
/// 90% quantile of min-p lands near 0.02 regardless of kernel or drift
/// separation. The bar 0.025 sits just above the combinatorial ceiling while
/// staying a factor 2 under the undetected bar; grids with finer strides and
/// more permutations push well below it.
inline constexpr double kUndetectedQ10Bar = 0.05;
inline constexpr double kDetectedQ90Bar = 0.025;

inline CellClass classify_cell(double q90, double q10) {
    if (q10 >= kUndetectedQ10Bar) return CellClass::Undetected;
    if (q90 <= kDetectedQ90Bar) return CellClass::Detected;
    return CellClass::Mismatch;
}

/// Runs the full grid: per (dataset, scheme, run), generate a fresh profile,
/// sample a stream from the two-squares source, run the detector, and record
/// min-p. Each run draws from substreams derived from (seed, dataset index,
/// scheme index, run index), so results are independent of evaluation order.
inline QuantileTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    const SampleSource source = SampleSource::two_squares(config.intensity);

    QuantileTable table;
    for (const auto& d : config.datasets) table.dataset_labels.push_back(d.label());
    for (const auto& s : config.schemes) table.scheme_labels.push_back(s.label());

    for (std::size_t di = 0; di < config.datasets.size(); ++di) {
        table.cells.emplace_back();
        for (std::size_t si = 0; si < config.schemes.size(); ++si) {
            const auto& dataset = config.datasets[di];
            const WindowScheme scheme = config.schemes[si].with_stride(config.stride);
            try {
                std::vector<double> min_ps;
                min_ps.reserve(static_cast<std::size_t>(config.runs));
                for (int run = 0; run < config.runs; ++run) {
                    const auto d64 = static_cast<std::uint64_t>(di);
                    const auto s64 = static_cast<std::uint64_t>(si);
                    const auto r64 = static_cast<std::uint64_t>(run);
                    Rng profile_rng(derive_seed(config.seed, {d64, s64, r64, 0}));
                    Rng stream_rng(derive_seed(config.seed, {d64, s64, r64, 1}));
                    const std::uint64_t detector_seed = derive_seed(config.seed, {d64, s64, r64, 2});
                    const auto profile = dataset.generate(config.n, profile_rng);
                    const auto stream = sample_stream(profile, source, stream_rng);
                    const auto report = run_detector(stream.points(), scheme, config.theta,
                                                     config.kernel, config.permutations,
                                                     detector_seed);
                    min_ps.push_back(report.min_p);
                }
                Cell cell;
                cell.q90 = quantile(min_ps, 0.9);
                cell.q10 = quantile(min_ps, 0.1);
                cell.expected_adversarial = expected_adversarial(dataset, scheme, config.n);
                cell.classification = classify_cell(cell.q90, cell.q10);
                cell.agrees = cell.expected_adversarial
                                  ? cell.classification == CellClass::Undetected
                                  : cell.classification == CellClass::Detected;
                table.cells.back().push_back(cell);
            } catch (const Error& e) {
                throw InvalidSpecError("cell [" + dataset.label() + " x " + scheme.label() +
                                       "]: " + e.what());
            }
        }
    }
    return table;
}

namespace detail {

inline std::string format_quantile(double q) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", q);
    return buf;
}

}  // namespace detail

/// One row per cell: dataset, scheme, q90, q10, theory mask, classification,
/// agreement. Quantiles carry the same 4-decimal formatting as the markdown
/// rendering.
inline std::string render_table_csv(const QuantileTable& table) {
    std::string out = "dataset,scheme,q90,q10,expected,observed,agrees\n";
    for (std::size_t di = 0; di < table.dataset_labels.size(); ++di) {
        for (std::size_t si = 0; si < table.scheme_labels.size(); ++si) {
            const Cell& c = table.cells[di][si];
            out += table.dataset_labels[di] + "," + table.scheme_labels[si] + "," +
                   detail::format_quantile(c.q90) + "," + detail::format_quantile(c.q10) + "," +
                   (c.expected_adversarial ? "adversarial" : "detected") + "," +
                   to_string(c.classification) + "," + (c.agrees ? "yes" : "no") + "\n";
        }
    }
    return out;
}

/// Matrix layout, one dataset per row, cells as "q90/q10" with a trailing *
/// on cells the theory mask marks adversarial.
inline std::string render_table_markdown(const QuantileTable& table) {
    std::string out = "| dataset |";
    for (const auto& s : table.scheme_labels) out += " " + s + " |";
    out += "\n|---|";
    for (std::size_t si = 0; si < table.scheme_labels.size(); ++si) out += "---|";
    out += "\n";
    for (std::size_t di = 0; di < table.dataset_labels.size(); ++di) {
        out += "| " + table.dataset_labels[di] + " |";
        for (std::size_t si = 0; si < table.scheme_labels.size(); ++si) {
            const Cell& c = table.cells[di][si];
            out += " " + detail::format_quantile(c.q90) + "/" + detail::format_quantile(c.q10);
            out += c.expected_adversarial ? "\\*" : "";
            out += " |";
        }
        out += "\n";
    }
    out += "\n\\* cell the theory mask marks adversarial (undetectable drift)\n";
    return out;
}

}  // namespace gauntlet
