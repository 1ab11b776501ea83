/// @file data.hpp
/// @brief Synthetic 2-D distribution pairs, profile-driven stream sampling
///        (position i draws from v_i*P + (1-v_i)*Q), and stream files.
#pragma once

#include <gauntlet/adversary.hpp>
#include <gauntlet/errors.hpp>
#include <gauntlet/kernel.hpp>
#include <gauntlet/rng.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace gauntlet {

/// Pair of named 2-D distributions P != Q to hide drift between.
class SampleSource {
public:
    enum class Kind { TwoSquares, GaussianShift, CustomBoxes };

    using Box = std::array<double, 4>;  ///< x0, x1, y0, y1

    /// P uniform on the unit square, Q uniform on the same square shifted by
    /// delta = intensity/2 along the first axis. This parameterization is
    /// this toolkit's own convention; intensity 2 makes the supports just
    /// disjoint, intensity 5 separates them by 1.5 side lengths (so the
    /// component of every sample is legible to the kernel and the only
    /// question is which windows mix them how), and intensity 0 collapses to
    /// P = Q (the null source for calibration).
    static SampleSource two_squares(double intensity) {
        if (intensity < 0.0) throw InvalidSpecError("two_squares intensity must be >= 0");
        SampleSource s(Kind::TwoSquares);
        s.intensity_ = intensity;
        return s;
    }

    /// P standard normal, Q shifted by the given offset.
    static SampleSource gaussian_shift(std::array<double, 2> offset) {
        SampleSource s(Kind::GaussianShift);
        s.offset_ = offset;
        return s;
    }

    /// P uniform on box_p, Q uniform on box_q.
    static SampleSource custom_boxes(Box box_p, Box box_q) {
        for (const auto& b : {box_p, box_q}) {
            if (b[1] <= b[0] || b[3] <= b[2]) throw InvalidSpecError("box needs x0 < x1 and y0 < y1");
        }
        SampleSource s(Kind::CustomBoxes);
        s.box_p_ = box_p;
        s.box_q_ = box_q;
        return s;
    }

    Kind kind() const { return kind_; }
    double intensity() const { return intensity_; }

    std::array<double, 2> draw(bool from_p, Rng& rng) const {
        switch (kind_) {
            case Kind::TwoSquares: {
                const double shift = from_p ? 0.0 : intensity_ / 2.0;
                return {shift + rng.uniform(), rng.uniform()};
            }
            case Kind::GaussianShift: {
                auto z = rng.normal2();
                if (!from_p) {
                    z[0] += offset_[0];
                    z[1] += offset_[1];
                }
                return z;
            }
            case Kind::CustomBoxes: {
                const Box& b = from_p ? box_p_ : box_q_;
                return {rng.uniform(b[0], b[1]), rng.uniform(b[2], b[3])};
            }
        }
        return {0.0, 0.0};
    }

    nlohmann::ordered_json to_json() const {
        switch (kind_) {
            case Kind::TwoSquares: return {{"kind", "two_squares"}, {"intensity", intensity_}};
            case Kind::GaussianShift: return {{"kind", "gaussian_shift"}, {"offset", offset_}};
            case Kind::CustomBoxes: return {{"kind", "custom_boxes"}, {"p", box_p_}, {"q", box_q_}};
        }
        return {};
    }

    static SampleSource from_json(const nlohmann::json& j) {
        const std::string kind = j.value("kind", "");
        if (kind == "two_squares") return two_squares(j.value("intensity", 5.0));
        if (kind == "gaussian_shift") {
            return gaussian_shift(j.value("offset", std::array<double, 2>{1.0, 0.0}));
        }
        if (kind == "custom_boxes") {
            if (!j.contains("p") || !j.contains("q")) {
                throw ParseError("custom_boxes source needs boxes \"p\" and \"q\"");
            }
            return custom_boxes(j["p"].get<Box>(), j["q"].get<Box>());
        }
        throw ParseError("unknown sample source kind \"" + kind + "\"");
    }

private:
    explicit SampleSource(Kind kind) : kind_(kind) {}

    Kind kind_;
    double intensity_ = 0.0;
    std::array<double, 2> offset_{0.0, 0.0};
    Box box_p_{0.0, 1.0, 0.0, 1.0};
    Box box_q_{0.0, 1.0, 0.0, 1.0};
};

struct StreamSample {
    int i = 0;
    std::array<double, 2> x{0.0, 0.0};
    double v = 0.0;     ///< mixture weight applied at this position
    char component = 'P';  ///< which distribution the point was drawn from
};

struct Stream {
    std::vector<StreamSample> samples;
    nlohmann::ordered_json metadata;  ///< source spec, profile provenance, seed

    int n() const { return static_cast<int>(samples.size()); }

    PointSet points() const {
        PointSet ps(2);
        for (const auto& s : samples) ps.push(s.x);
        return ps;
    }
};

/// Draws position i from P with probability v_i, else from Q. Weights 0 and 1
/// select the component with certainty. The drawn component is recorded so
/// tests can check the mixture law without re-inferring it.
inline Stream sample_stream(const AdversarialProfile& profile, const SampleSource& source, Rng& rng,
                            std::uint64_t seed_echo = 0) {
    Stream stream;
    stream.samples.reserve(static_cast<std::size_t>(profile.n()));
    for (int i = 0; i < profile.n(); ++i) {
        const double v = profile.values()[static_cast<std::size_t>(i)];
        const bool from_p = rng.bernoulli(v);
        StreamSample s;
        s.i = i;
        s.x = source.draw(from_p, rng);
        s.v = v;
        s.component = from_p ? 'P' : 'Q';
        stream.samples.push_back(s);
    }
    stream.metadata = {{"format", "drift-gauntlet-stream"},
                       {"n", profile.n()},
                       {"source", source.to_json()},
                       {"profile_provenance", profile.provenance().to_json()},
                       {"seed", seed_echo}};
    return stream;
}

/// One header line of metadata, then one record per sample:
/// {"i":0,"x":[...,...],"v":...,"c":"P"} with floats at 17 significant digits.
inline std::string serialize_stream(const Stream& stream) {
    std::string out = stream.metadata.dump();
    out += '\n';
    char buf[256];
    for (const auto& s : stream.samples) {
        std::snprintf(buf, sizeof(buf), "{\"i\":%d,\"x\":[%.17g,%.17g],\"v\":%.17g,\"c\":\"%c\"}\n",
                      s.i, s.x[0], s.x[1], s.v, s.component);
        out += buf;
    }
    return out;
}

inline void write_stream(const Stream& stream, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open \"" + path + "\" for writing");
    f << serialize_stream(stream);
}

inline Stream parse_stream(std::istream& in) {
    Stream stream;
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError("stream file is empty", 1);
    ++line_no;
    try {
        stream.metadata = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception&) {
        throw ParseError("malformed stream header", line_no);
    }
    if (!stream.metadata.is_object() || stream.metadata.value("format", "") != "drift-gauntlet-stream") {
        throw ParseError("not a drift-gauntlet stream header", line_no);
    }
    int expected_i = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw ParseError("malformed stream record", line_no);
        }
        if (!j.contains("i") || !j.contains("x") || !j.contains("v") || !j.contains("c") ||
            !j["x"].is_array() || j["x"].size() != 2 || !j["c"].is_string()) {
            throw ParseError("stream record missing fields", line_no);
        }
        StreamSample s;
        s.i = j["i"].get<int>();
        s.x = {j["x"][0].get<double>(), j["x"][1].get<double>()};
        s.v = j["v"].get<double>();
        const std::string c = j["c"].get<std::string>();
        if (c != "P" && c != "Q") throw ParseError("component must be \"P\" or \"Q\"", line_no);
        s.component = c[0];
        if (s.i != expected_i) throw ParseError("sample indices must increase from 0", line_no);
        ++expected_i;
        stream.samples.push_back(s);
    }
    const int declared = stream.metadata.value("n", -1);
    if (declared >= 0 && declared != stream.n()) {
        throw ParseError("header declares n = " + std::to_string(declared) + " but file has " +
                         std::to_string(stream.n()) + " records");
    }
    return stream;
}

inline Stream read_stream(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open \"" + path + "\"");
    return parse_stream(f);
}

}  // namespace gauntlet
