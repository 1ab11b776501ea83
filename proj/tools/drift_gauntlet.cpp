/// @file drift_gauntlet.cpp
/// @brief Command-line front door: generate streams with hidden drift, run
///        the window-pair detector, verify profiles and limiting functions,
///        inspect scheme null spaces, combine detectors, and reproduce the
///        benchmark table.
///
/// Exit codes (stable contract): 0 ok / no alarm, 2 no adversarial direction
/// (or a profile/function the scheme can see), 3 drift alerted, 4 input
/// error. The experiment subcommand exits 1 when the observed/theory
/// agreement falls below the configured floor.

#include <gauntlet/adversary.hpp>
#include <gauntlet/data.hpp>
#include <gauntlet/detector.hpp>
#include <gauntlet/errors.hpp>
#include <gauntlet/experiment.hpp>
#include <gauntlet/kernel.hpp>
#include <gauntlet/limiting.hpp>
#include <gauntlet/rng.hpp>
#include <gauntlet/windowing.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace gauntlet;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitBelowFloor = 1;
constexpr int kExitNoAdversarial = 2;
constexpr int kExitDriftAlerted = 3;
constexpr int kExitInputError = 4;

constexpr std::uint64_t kDefaultSeed = 42;

// ---------------------------------------------------------------------------
// Argument parsing helpers
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

/// "k1=v1,k2=v2" -> map. Values must be integers.
std::map<std::string, int> parse_kv_ints(const std::string& text, const std::string& context) {
    std::map<std::string, int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ParseError(context + ": expected key=value, got \"" + item + "\"");
        }
        const std::string key = trim(item.substr(0, eq));
        const std::string value = trim(item.substr(eq + 1));
        try {
            std::size_t used = 0;
            const int v = std::stoi(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            out[key] = v;
        } catch (const std::exception&) {
            throw ParseError(context + ": value for \"" + key + "\" is not an integer: \"" + value +
                             "\"");
        }
    }
    return out;
}

int take_int(std::map<std::string, int>& kv, const std::string& key, const std::string& context,
             std::optional<int> fallback = std::nullopt) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        if (fallback) return *fallback;
        throw ParseError(context + ": missing required parameter \"" + key + "\"");
    }
    const int v = it->second;
    kv.erase(it);
    return v;
}

void reject_leftovers(const std::map<std::string, int>& kv, const std::string& context) {
    if (kv.empty()) return;
    throw ParseError(context + ": unknown parameter \"" + kv.begin()->first + "\"");
}

/// Scheme argument: either a JSON object ({"type":"sliding","l":100,...}) or
/// the inline shorthand "sliding:l=100,stride=10" / "fixed:a=100,l=100" /
/// "growing:a=100,l=100". Chunked and union schemes need the JSON form.
WindowScheme parse_scheme_arg(const std::string& raw) {
    const std::string text = trim(raw);
    if (text.empty()) throw ParseError("scheme specification is empty");
    if (text.front() == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw ParseError(std::string("scheme JSON: ") + e.what());
        }
        return WindowScheme::from_json(j);
    }
    const auto colon = text.find(':');
    const std::string type = trim(text.substr(0, colon));
    auto kv = colon == std::string::npos ? std::map<std::string, int>{}
                                         : parse_kv_ints(text.substr(colon + 1), "scheme " + type);
    if (type == "sliding") {
        const int l = take_int(kv, "l", "sliding");
        const int stride = take_int(kv, "stride", "sliding", 1);
        reject_leftovers(kv, "sliding");
        return WindowScheme::sliding(l, stride);
    }
    if (type == "fixed") {
        const int a = take_int(kv, "a", "fixed");
        const int l = take_int(kv, "l", "fixed");
        const int stride = take_int(kv, "stride", "fixed", 1);
        reject_leftovers(kv, "fixed");
        return WindowScheme::fixed(a, l, stride);
    }
    if (type == "growing") {
        const int a = take_int(kv, "a", "growing");
        const int l = take_int(kv, "l", "growing");
        const int stride = take_int(kv, "stride", "growing", 1);
        reject_leftovers(kv, "growing");
        return WindowScheme::growing(a, l, stride);
    }
    if (type == "chunked" || type == "union") {
        throw ParseError("scheme \"" + type + "\" needs the JSON form (nested members)");
    }
    throw ParseError("unknown scheme type \"" + type + "\"");
}

struct FamilyArg {
    std::string name;  ///< periodic | rand_const | rand_const_binary | rand_periodic
    int l = 0;
    int duty = 0;
    int a = 0;
};

/// Family argument: "periodic:l=100,duty=50" (duty defaults to l/2),
/// "rand_const:a=100", "rand_const_binary:a=100", "rand_periodic:a=100,l=100".
FamilyArg parse_family_arg(const std::string& raw) {
    const std::string text = trim(raw);
    const auto colon = text.find(':');
    FamilyArg f;
    f.name = trim(text.substr(0, colon));
    auto kv = colon == std::string::npos ? std::map<std::string, int>{}
                                         : parse_kv_ints(text.substr(colon + 1), "family " + f.name);
    if (f.name == "periodic") {
        f.l = take_int(kv, "l", "periodic");
        f.duty = take_int(kv, "duty", "periodic", f.l / 2);
    } else if (f.name == "rand_const" || f.name == "rand_const_binary") {
        f.a = take_int(kv, "a", f.name);
    } else if (f.name == "rand_periodic") {
        f.a = take_int(kv, "a", "rand_periodic");
        f.l = take_int(kv, "l", "rand_periodic");
    } else {
        throw ParseError("unknown family \"" + f.name + "\"");
    }
    reject_leftovers(kv, "family " + f.name);
    return f;
}

/// Kernel argument: "rbf" (median bandwidth), "rbf:H" (fixed bandwidth H),
/// or "linear".
KernelSpec parse_kernel_arg(const std::string& raw) {
    const std::string text = trim(raw);
    if (text == "rbf") return KernelSpec::rbf_median();
    if (text == "linear") return KernelSpec::linear();
    if (text.rfind("rbf:", 0) == 0) {
        const std::string value = text.substr(4);
        try {
            std::size_t used = 0;
            const double h = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return KernelSpec::rbf(h);
        } catch (const std::exception&) {
            throw ParseError("kernel bandwidth is not a number: \"" + value + "\"");
        }
    }
    throw ParseError("unknown kernel \"" + text + "\" (use rbf, rbf:H, or linear)");
}

json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open \"" + path + "\"");
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open \"" + path + "\" for writing");
    f << content;
}

/// Report sink: --output writes a file, otherwise stdout.
void emit(const std::string& output, const std::string& content) {
    if (output.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
    } else {
        write_text_file(output, content);
    }
}

/// Seed resolution: --seed wins; otherwise DRIFT_GAUNTLET_SEED if set;
/// otherwise the documented default (42).
std::uint64_t resolve_seed(bool seed_given, std::uint64_t cli_seed) {
    if (seed_given) return cli_seed;
    const char* env = std::getenv("DRIFT_GAUNTLET_SEED");
    if (env == nullptr || *env == '\0') return kDefaultSeed;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
        throw ParseError(std::string("DRIFT_GAUNTLET_SEED is not an integer: \"") + env + "\"");
    }
    return static_cast<std::uint64_t>(v);
}

Waveform waveform_from_json(const json& j) {
    const std::string kind = j.value("kind", "");
    if (kind == "const") return Waveform::constant(j.value("value", 0.0));
    if (kind == "sine") {
        return Waveform::sine(j.value("period", 1.0), j.value("mean", 0.0), j.value("amp", 0.0));
    }
    if (kind == "square") {
        return Waveform::square(j.value("period", 1.0), j.value("duty", 0.5), j.value("hi", 1.0),
                                j.value("lo", 0.0));
    }
    throw ParseError("unknown waveform kind \"" + kind + "\" (use const, sine, or square)");
}

/// Function spec (same shape AdversarialFunction::describe() emits):
///   {"family":"periodic","wave":{...}}
///   {"family":"periodic_after","a":...,"head":{...},"tail":{...}}
///   {"family":"constant_after","a":...,"head":{...}[,"c":...]}
///   {"family":"boundary_effect","p":...,"q":{"kind":"sine",...}}
///     (or the shorthand fields "q_amp" and "l")
AdversarialFunction function_from_json(const json& j) {
    const std::string family = j.value("family", "");
    if (family == "periodic") {
        if (!j.contains("wave")) throw ParseError("periodic function needs \"wave\"");
        return AdversarialFunction::periodic(waveform_from_json(j["wave"]));
    }
    if (family == "periodic_after") {
        if (!j.contains("a") || !j.contains("head") || !j.contains("tail")) {
            throw ParseError("periodic_after needs \"a\", \"head\", and \"tail\"");
        }
        return AdversarialFunction::periodic_after(j["a"].get<double>(),
                                                   waveform_from_json(j["head"]),
                                                   waveform_from_json(j["tail"]));
    }
    if (family == "constant_after") {
        if (!j.contains("a") || !j.contains("head")) {
            throw ParseError("constant_after needs \"a\" and \"head\"");
        }
        const Waveform head = waveform_from_json(j["head"]);
        if (j.contains("c")) {
            return AdversarialFunction::constant_after(j["a"].get<double>(), head,
                                                       j["c"].get<double>());
        }
        return AdversarialFunction::constant_after(j["a"].get<double>(), head);
    }
    if (family == "boundary_effect") {
        const double p = j.value("p", 0.5);
        if (j.contains("q")) {
            const json& q = j["q"];
            return AdversarialFunction::boundary_effect(p, q.value("amp", 0.0),
                                                        q.value("period", 1.0));
        }
        if (!j.contains("q_amp") || !j.contains("l")) {
            throw ParseError("boundary_effect needs \"q\" or the fields \"q_amp\" and \"l\"");
        }
        return AdversarialFunction::boundary_effect(p, j["q_amp"].get<double>(),
                                                    j["l"].get<double>());
    }
    throw ParseError("unknown function family \"" + family + "\"");
}

/// Function argument: inline JSON or a path to a JSON file.
AdversarialFunction parse_function_arg(const std::string& raw) {
    const std::string text = trim(raw);
    if (!text.empty() && text.front() == '{') {
        try {
            return function_from_json(json::parse(text));
        } catch (const json::exception& e) {
            throw ParseError(std::string("function JSON: ") + e.what());
        }
    }
    return function_from_json(load_json_file(text));
}

ordered_json certificate_json(const ProfileReport& report, const WindowScheme& scheme) {
    ordered_json cert;
    cert["scheme"] = scheme.to_json();
    cert["max_residual"] = report.max_residual;
    cert["exact"] = report.exact_checked;
    cert["exact_zero"] = report.exact_zero;
    cert["is_nonconstant"] = report.is_nonconstant;
    cert["is_adversarial"] = report.is_adversarial;
    return cert;
}

std::string profile_verdict(const ProfileReport& report) {
    if (!report.is_nonconstant) return "improper (no drift)";
    if (report.is_adversarial) return "adversarial (scheme cannot see this drift)";
    return "visible (scheme sees this drift)";
}

/// stream.jsonl -> stream.profile.json; other names get .profile.json added.
std::string sidecar_path(const std::string& stream_path) {
    const std::string suffix = ".jsonl";
    if (stream_path.size() > suffix.size() &&
        stream_path.compare(stream_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return stream_path.substr(0, stream_path.size() - suffix.size()) + ".profile.json";
    }
    return stream_path + ".profile.json";
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string scheme;
    std::string family;
    int n = 1000;
    double intensity = 5.0;
    std::uint64_t seed = kDefaultSeed;
    bool seed_given = false;
    std::string output = "stream.jsonl";
};

int cmd_generate(const GenerateArgs& args) {
    if (args.scheme.empty() && args.family.empty()) {
        throw ParseError("generate needs --family or --scheme");
    }
    const std::uint64_t seed = resolve_seed(args.seed_given, args.seed);
    const SampleSource source = SampleSource::two_squares(args.intensity);

    // Build the profile and pick the scheme the certificate targets.
    AdversarialProfile profile(std::vector<double>{0.0, 0.0},
                               Provenance{Provenance::Kind::UserSupplied, "", {}, ""});
    WindowScheme target = WindowScheme::sliding(1);
    if (!args.family.empty()) {
        const FamilyArg fam = parse_family_arg(args.family);
        Rng profile_rng(derive_seed(seed, {0}));
        if (fam.name == "periodic") {
            profile = gen_periodic(fam.l, fam.duty, args.n);
            target = WindowScheme::sliding(fam.l);
        } else if (fam.name == "rand_const") {
            profile = gen_rand_const(fam.a, args.n, profile_rng);
            target = WindowScheme::growing(fam.a, std::min(fam.a, args.n - fam.a));
        } else if (fam.name == "rand_const_binary") {
            profile = gen_rand_const_binary(fam.a, args.n, profile_rng);
            target = WindowScheme::fixed(fam.a, std::min(fam.a, args.n - fam.a));
        } else {
            profile = gen_rand_periodic(fam.a, fam.l, args.n, profile_rng);
            target = WindowScheme::fixed(fam.a, fam.l);
        }
        if (!args.scheme.empty()) target = parse_scheme_arg(args.scheme);
    } else {
        // Null-space route: solve the scheme's constraint system, then prefer
        // the binarized representative when the repair succeeds.
        target = parse_scheme_arg(args.scheme);
        const WeightMatrix W = build_weight_matrix(target, args.n);
        profile = solve_nullspace(W);
        try {
            profile = binarize_profile(profile, W);
        } catch (const BinarizationInfeasibleError&) {
            // Keep the float profile; the certificate below still applies.
        }
    }

    const ProfileReport report = verify_profile(profile, target, args.n);

    Rng stream_rng(derive_seed(seed, {1}));
    const Stream stream = sample_stream(profile, source, stream_rng, seed);
    write_stream(stream, args.output);

    ordered_json sidecar;
    sidecar["profile"] = profile.to_json();
    sidecar["certificate"] = certificate_json(report, target);
    write_text_file(sidecar_path(args.output), sidecar.dump(2) + "\n");

    std::cout << "wrote " << args.output << " (" << stream.n() << " samples) and "
              << sidecar_path(args.output) << "\n"
              << "certificate vs " << target.label() << ": max residual " << report.max_residual
              << " -> " << profile_verdict(report) << "\n";
    return report.is_adversarial ? kExitOk : kExitNoAdversarial;
}

struct DetectArgs {
    std::string stream;
    std::string scheme;
    double theta = 0.05;
    int permutations = 500;
    std::string kernel = "rbf";
    std::uint64_t seed = kDefaultSeed;
    bool seed_given = false;
    std::string output;
    std::string format = "json";
};

int run_detect_like(const DetectArgs& args, const WindowScheme& scheme) {
    const std::uint64_t seed = resolve_seed(args.seed_given, args.seed);
    const Stream stream = read_stream(args.stream);
    const DetectionReport report = run_detector(stream.points(), scheme, args.theta,
                                                parse_kernel_arg(args.kernel), args.permutations,
                                                seed);
    emit(args.output, args.format == "csv" ? report.to_csv() : report.to_json().dump(2) + "\n");
    std::cerr << report.results.size() << " pairs, " << report.alarm_count()
              << " alarms, min p = " << report.min_p << "\n";
    return report.alarm_count() > 0 ? kExitDriftAlerted : kExitOk;
}

int cmd_detect(const DetectArgs& args) {
    return run_detect_like(args, parse_scheme_arg(args.scheme));
}

int cmd_combine(const DetectArgs& args, const std::vector<std::string>& scheme_args) {
    std::vector<WindowScheme> members;
    members.reserve(scheme_args.size());
    for (const auto& s : scheme_args) members.push_back(parse_scheme_arg(s));
    return run_detect_like(args, union_scheme(std::move(members)));
}

struct VerifyArgs {
    std::string profile;
    std::string function;
    std::string scheme;
    int n = 0;
    double grid_lo = 0.0;
    double grid_hi = 0.0;
    bool grid_given = false;
    int grid_points = 50;
    int quad_points = 512;
    std::string output;
};

int verify_profile_file(const VerifyArgs& args, const WindowScheme& scheme) {
    json j = load_json_file(args.profile);
    if (j.contains("profile")) j = j["profile"];  // accept generate's sidecar
    const AdversarialProfile profile = AdversarialProfile::from_json(j);
    const int n = args.n > 0 ? args.n : profile.n();
    const ProfileReport report = verify_profile(profile, scheme, n);

    ordered_json out = certificate_json(report, scheme);
    out["verdict"] = profile_verdict(report);
    emit(args.output, out.dump(2) + "\n");
    return report.is_adversarial ? kExitOk : kExitNoAdversarial;
}

int verify_function_spec(const VerifyArgs& args, const WindowScheme& scheme) {
    const AdversarialFunction f = parse_function_arg(args.function);

    double lo = args.grid_lo;
    double hi = args.grid_hi;
    if (!args.grid_given) {
        // Default grid: start at the first admissible t and span ten window
        // lengths.
        lo = scheme.kind() == WindowScheme::Kind::Fixed ||
                     scheme.kind() == WindowScheme::Kind::Growing
                 ? static_cast<double>(scheme.reference_length())
                 : static_cast<double>(scheme.length());
        lo = std::max(lo, f.domain_min());
        hi = lo + 10.0 * static_cast<double>(scheme.length());
    }
    if (args.grid_points < 1 || hi <= lo) {
        throw InvalidSpecError("verify needs grid-points >= 1 and grid-hi > grid-lo");
    }
    std::vector<double> t_grid;
    t_grid.reserve(static_cast<std::size_t>(args.grid_points));
    for (int i = 0; i < args.grid_points; ++i) {
        t_grid.push_back(args.grid_points == 1
                             ? lo
                             : lo + (hi - lo) * i / (args.grid_points - 1));
    }
    const LimitingReport report = verify_function_limiting(f, scheme, t_grid, args.quad_points);

    const bool constraints_hold = report.max_violation <= 1e-8;
    std::string verdict;
    if (constraints_hold && report.range_ok) {
        verdict = "adversarial (integral constraints hold)";
    } else if (constraints_hold) {
        verdict = "kernel member, range violated";
    } else {
        verdict = "visible (constraints violated)";
    }

    ordered_json out;
    out["function"] = f.describe();
    out["scheme"] = scheme.to_json();
    out["grid"] = {{"lo", lo}, {"hi", hi}, {"points", args.grid_points}};
    out["quad_points"] = args.quad_points;
    out["max_violation"] = report.max_violation;
    out["argmax_t"] = report.argmax_t;
    out["range_ok"] = report.range_ok;
    out["range_min"] = report.range_min;
    out["range_max"] = report.range_max;
    out["verdict"] = verdict;
    emit(args.output, out.dump(2) + "\n");
    return constraints_hold && report.range_ok ? kExitOk : kExitNoAdversarial;
}

int cmd_verify(const VerifyArgs& args) {
    if (args.profile.empty() == args.function.empty()) {
        throw ParseError("verify needs exactly one of --profile or --function");
    }
    const WindowScheme scheme = parse_scheme_arg(args.scheme);
    return args.profile.empty() ? verify_function_spec(args, scheme)
                                : verify_profile_file(args, scheme);
}

struct NullspaceArgs {
    std::string scheme;
    int n = 0;
    std::string output;
};

int cmd_nullspace(const NullspaceArgs& args) {
    const WindowScheme scheme = parse_scheme_arg(args.scheme);
    const WeightMatrix W = build_weight_matrix(scheme, args.n);
    const NullspaceBasis basis = nullspace_basis(W);

    ordered_json out;
    out["n"] = args.n;
    out["scheme"] = scheme.to_json();
    out["dimension"] = basis.dimension;
    out["has_nonconstant"] = basis.has_nonconstant;
    auto vectors = ordered_json::array();
    for (const auto& v : basis.vectors) {
        auto row = ordered_json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
        vectors.push_back(std::move(row));
    }
    out["basis"] = std::move(vectors);
    emit(args.output, out.dump(2) + "\n");
    return basis.has_nonconstant ? kExitOk : kExitNoAdversarial;
}

struct ExperimentArgs {
    std::string config;
    std::uint64_t seed = kDefaultSeed;
    bool seed_given = false;
    std::string output = "experiment_out";
    std::string format = "markdown";
};

int cmd_experiment(const ExperimentArgs& args) {
    ExperimentConfig config = ExperimentConfig::from_json(load_json_file(args.config));
    // The config carries its own seed; --seed overrides it when given
    // explicitly (the environment fallback does not apply here).
    if (args.seed_given) config.seed = args.seed;

    const auto t0 = std::chrono::steady_clock::now();
    const QuantileTable table = run_experiment(config);
    const double wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string csv = render_table_csv(table);
    const std::string md = render_table_markdown(table);
    ordered_json summary;
    summary["config"] = config.to_json();
    summary["cells"] = table.cell_count();
    summary["agreement"] = table.agreement_count();
    summary["agreement_floor"] = config.agreement_floor;

    std::filesystem::create_directories(args.output);
    const std::filesystem::path dir(args.output);
    write_text_file((dir / "table.csv").string(), csv);
    write_text_file((dir / "table.md").string(), md);
    write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");

    std::cout << (args.format == "csv" ? csv : md);
    std::cout << "agreement: " << table.agreement_count() << "/" << table.cell_count()
              << " cells, wall time " << wall_s << " s\n";

    if (config.agreement_floor > 0 && table.agreement_count() < config.agreement_floor) {
        std::cerr << "agreement below floor (" << table.agreement_count() << " < "
                  << config.agreement_floor << ")\n";
        return kExitBelowFloor;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"drift gauntlet: adversarial streams for two-window drift detectors"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand(
        "generate", "Build an adversarial profile and sample a stream from it");
    generate->add_option("--family", gen.family,
                         "Profile family, e.g. periodic:l=100,duty=50 | rand_const:a=100 | "
                         "rand_const_binary:a=100 | rand_periodic:a=100,l=100");
    generate->add_option("--scheme", gen.scheme,
                         "Window scheme (JSON or inline); without --family the profile is solved "
                         "from this scheme's null space");
    generate->add_option("--n", gen.n, "Stream length")->capture_default_str();
    generate->add_option("--intensity", gen.intensity, "Two-squares drift intensity (shift = intensity/2)")
        ->capture_default_str();
    auto* gen_seed = generate->add_option("--seed", gen.seed, "Random seed (default 42)");
    generate->add_option("--output", gen.output, "Stream file; sidecar goes next to it")
        ->capture_default_str();

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "Run the permutation MMD detector over a stream");
    detect->add_option("--stream", det.stream, "Stream file (JSON lines)")->required();
    detect->add_option("--scheme", det.scheme, "Window scheme (JSON or inline)")->required();
    detect->add_option("--theta", det.theta, "Alarm threshold on p-values")->capture_default_str();
    detect->add_option("--permutations", det.permutations, "Permutations per pair")
        ->capture_default_str();
    detect->add_option("--kernel", det.kernel, "rbf | rbf:H | linear")->capture_default_str();
    auto* det_seed = detect->add_option("--seed", det.seed, "Random seed (default 42)");
    detect->add_option("--output", det.output, "Report file (default stdout)");
    detect->add_option("--format", det.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    DetectArgs comb;
    std::vector<std::string> comb_schemes;
    auto* combine =
        app.add_subcommand("combine", "Detect with the deduplicated union of several schemes");
    combine->add_option("--stream", comb.stream, "Stream file (JSON lines)")->required();
    combine->add_option("--scheme", comb_schemes, "Member scheme (repeat the flag)")
        ->required()
        ->take_all();
    combine->add_option("--theta", comb.theta, "Alarm threshold on p-values")->capture_default_str();
    combine->add_option("--permutations", comb.permutations, "Permutations per pair")
        ->capture_default_str();
    combine->add_option("--kernel", comb.kernel, "rbf | rbf:H | linear")->capture_default_str();
    auto* comb_seed = combine->add_option("--seed", comb.seed, "Random seed (default 42)");
    combine->add_option("--output", comb.output, "Report file (default stdout)");
    combine->add_option("--format", comb.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    VerifyArgs ver;
    auto* verify = app.add_subcommand(
        "verify", "Check a profile (exact residuals) or a function (integral constraints)");
    verify->add_option("--profile", ver.profile, "Profile JSON file (bare or generate's sidecar)");
    verify->add_option("--function", ver.function, "Function spec (inline JSON or file)");
    verify->add_option("--scheme", ver.scheme, "Window scheme (JSON or inline)")->required();
    verify->add_option("--n", ver.n, "Stream length (defaults to the profile's n)");
    auto* grid_lo = verify->add_option("--grid-lo", ver.grid_lo, "First window start t");
    verify->add_option("--grid-hi", ver.grid_hi, "Last window start t")->needs(grid_lo);
    verify->add_option("--grid-points", ver.grid_points, "Window starts to check")
        ->capture_default_str();
    verify->add_option("--quad-points", ver.quad_points, "Simpson panels per integral")
        ->capture_default_str();
    verify->add_option("--output", ver.output, "Report file (default stdout)");

    NullspaceArgs ns;
    auto* nullspace =
        app.add_subcommand("nullspace", "Emit a basis of a scheme's difference-row null space");
    nullspace->add_option("--scheme", ns.scheme, "Window scheme (JSON or inline)")->required();
    nullspace->add_option("--n", ns.n, "Stream length")->required();
    nullspace->add_option("--output", ns.output, "Basis file (default stdout)");

    ExperimentArgs exp;
    auto* experiment =
        app.add_subcommand("experiment", "Run the dataset-by-scheme benchmark grid from a config");
    experiment->add_option("--config", exp.config, "Experiment config JSON")->required();
    auto* exp_seed =
        experiment->add_option("--seed", exp.seed, "Override the config's seed when given");
    experiment->add_option("--output", exp.output, "Output directory")->capture_default_str();
    experiment->add_option("--format", exp.format, "Table echoed to stdout: markdown | csv")
        ->check(CLI::IsMember({"markdown", "csv"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInputError;
    }

    try {
        if (generate->parsed()) {
            gen.seed_given = gen_seed->count() > 0;
            return cmd_generate(gen);
        }
        if (detect->parsed()) {
            det.seed_given = det_seed->count() > 0;
            return cmd_detect(det);
        }
        if (combine->parsed()) {
            comb.seed_given = comb_seed->count() > 0;
            return cmd_combine(comb, comb_schemes);
        }
        if (verify->parsed()) {
            ver.grid_given = grid_lo->count() > 0;
            return cmd_verify(ver);
        }
        if (nullspace->parsed()) return cmd_nullspace(ns);
        if (experiment->parsed()) {
            exp.seed_given = exp_seed->count() > 0;
            return cmd_experiment(exp);
        }
    } catch (const NoAdversarialError& e) {
        std::cerr << "no adversarial direction: " << e.what() << "\n";
        return kExitNoAdversarial;
    } catch (const EmptySchemeError& e) {
        std::cerr << "empty scheme: " << e.what() << "\n";
        return kExitNoAdversarial;
    } catch (const ParseError& e) {
        if (e.line() >= 0) {
            std::cerr << "input error at line " << e.line() << ": " << e.what() << "\n";
        } else {
            std::cerr << "input error: " << e.what() << "\n";
        }
        return kExitInputError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}
