// Command line front end: profile / fit / nli / oracle / compare.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <nlikit/nlikit.hpp>

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct GlobalArgs {
    std::string scenario_path;
    std::string out_dir;  // empty = primary table to stdout, no extra artifacts
    unsigned threads = 0;
    unsigned seed = 0;  // reserved for randomized scenario workflows
    std::string log_level = "info";
};

struct Manifest {
    std::string command;
    std::vector<std::string> artifacts;
    std::map<std::string, double> timings_ms;
    std::vector<std::string> warnings;
};

void log_line(const GlobalArgs& g, const std::string& level, const std::string& msg) {
    static const std::map<std::string, int> rank = {
        {"debug", 0}, {"info", 1}, {"warn", 2}, {"error", 3}};
    const auto want = rank.count(g.log_level) ? rank.at(g.log_level) : 1;
    if (rank.count(level) && rank.at(level) >= want)
        std::cerr << "[" << level << "] " << msg << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw nlikit::IoError("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Primary table goes to <out>/<name> when --out is set, stdout otherwise.
// Secondary artifacts are silently skipped without --out.
void emit_table(const GlobalArgs& g, Manifest& mf, const std::string& name,
                const std::string& text, bool primary) {
    if (g.out_dir.empty()) {
        if (primary) std::cout << text;
        return;
    }
    fs::create_directories(g.out_dir);
    const auto path = (fs::path(g.out_dir) / name).string();
    std::ofstream out(path);
    if (!out) throw nlikit::IoError("cannot open output file: " + path);
    out << text;
    mf.artifacts.push_back(path);
}

void write_manifest(const GlobalArgs& g, const Manifest& mf) {
    if (g.out_dir.empty()) return;
    nlohmann::json j;
    j["tool"] = "nlikit";
    j["version"] = nlikit::kVersion;
    j["command"] = mf.command;
    j["scenario"] = g.scenario_path;
    j["threads"] = g.threads;
    j["seed"] = g.seed;
    j["artifacts"] = mf.artifacts;
    j["timings_ms"] = mf.timings_ms;
    j["warnings"] = mf.warnings;
    const auto path = (fs::path(g.out_dir) / "manifest.json").string();
    std::ofstream out(path);
    if (!out) throw nlikit::IoError("cannot open manifest file: " + path);
    out << j.dump(2) << "\n";
}

nlikit::LinkScenario load(const GlobalArgs& g, nlikit::EngineOptions& opts) {
    if (g.scenario_path.empty())
        throw nlikit::Error(nlikit::ExitCode::usage, "a scenario file is required (--scenario)");
    auto sc = nlikit::load_scenario(read_file(g.scenario_path));
    opts.fit_degree = sc.options.fit_degree;
    opts.threads = g.threads;
    opts.base_dir = fs::path(g.scenario_path).parent_path().string();
    return sc;
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// "2dB@5km" -> LumpedLoss{5000 m, 2 dB}
nlikit::LumpedLoss parse_lumped(const std::string& text) {
    const auto at = text.find("dB@");
    if (at == std::string::npos || text.size() < at + 5 || text.substr(text.size() - 2) != "km")
        throw nlikit::Error(nlikit::ExitCode::usage,
                            "--lumped-loss expects the form <loss>dB@<z>km, e.g. 2dB@5km");
    try {
        nlikit::LumpedLoss ll;
        ll.loss_dB = std::stod(text.substr(0, at));
        ll.z = nlikit::units::km_to_m(
            std::stod(text.substr(at + 3, text.size() - 2 - (at + 3))));
        return ll;
    } catch (const std::exception&) {
        throw nlikit::Error(nlikit::ExitCode::usage, "--lumped-loss: cannot parse '" + text + "'");
    }
}

std::vector<int> parse_degrees(const std::string& text) {
    std::vector<int> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw nlikit::Error(nlikit::ExitCode::usage, "bad degree list: '" + text + "'");
        }
    }
    if (out.empty())
        throw nlikit::Error(nlikit::ExitCode::usage, "degree list must not be empty");
    return out;
}

std::string fit_curves_csv(const nlikit::SppSamples& spp, const std::vector<nlikit::PolySpp>& fits) {
    std::string out = "z_km";
    for (size_t c = 0; c < fits.size(); ++c) out += ", ch_" + std::to_string(c);
    out += "\n";
    char buf[40];
    for (size_t i = 0; i < spp.z.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", nlikit::units::m_to_km(spp.z[i]));
        out += buf;
        for (const auto& fit : fits) {
            std::snprintf(buf, sizeof buf, ", %.17g", nlikit::eval_poly_spp(fit, spp.z[i]));
            out += buf;
        }
        out += "\n";
    }
    return out;
}

int run_profile(const GlobalArgs& g, int span_index, const std::vector<std::string>& lumped,
                const std::string& fit_degrees, bool emit_fit) {
    Manifest mf;
    mf.command = "profile";
    nlikit::EngineOptions opts;
    auto sc = load(g, opts);
    if (span_index < 0 || static_cast<size_t>(span_index) >= sc.spans.size())
        throw nlikit::ValidationError("span index out of range");
    auto& span = sc.spans[static_cast<size_t>(span_index)];
    for (const auto& text : lumped) span.lumped.push_back(parse_lumped(text));

    const auto t0 = Clock::now();
    const auto spp = nlikit::build_span_spp(sc, span, opts.base_dir);
    mf.timings_ms["profile"] = ms_since(t0);
    emit_table(g, mf, "spp.csv", nlikit::emit_spp(spp), true);

    if (emit_fit) {
        const auto t1 = Clock::now();
        for (int deg : parse_degrees(fit_degrees)) {
            const auto fits = nlikit::fit_span_spp(spp, deg);
            emit_table(g, mf, "fit_np" + std::to_string(deg) + ".csv", fit_curves_csv(spp, fits),
                       false);
        }
        mf.timings_ms["fit"] = ms_since(t1);
    }
    write_manifest(g, mf);
    return 0;
}

int run_fit(const GlobalArgs& g, int span_index, int degree_override) {
    Manifest mf;
    mf.command = "fit";
    nlikit::EngineOptions opts;
    const auto sc = load(g, opts);
    if (degree_override >= 0) opts.fit_degree = degree_override;
    if (span_index < 0 || static_cast<size_t>(span_index) >= sc.spans.size())
        throw nlikit::ValidationError("span index out of range");
    const auto spp =
        nlikit::build_span_spp(sc, sc.spans[static_cast<size_t>(span_index)], opts.base_dir);
    const auto t0 = Clock::now();
    const auto fits = nlikit::fit_span_spp(spp, opts.fit_degree);
    mf.timings_ms["fit"] = ms_since(t0);
    for (size_t c = 0; c < fits.size(); ++c)
        if (fits[c].negative_on_grid)
            mf.warnings.push_back("channel " + std::to_string(c) +
                                  ": fitted profile dips below zero on the grid");
    emit_table(g, mf, "fit.csv", nlikit::emit_fit_csv(fits), true);
    write_manifest(g, mf);
    return 0;
}

int run_engine(const GlobalArgs& g, nlikit::KernelMode mode, const std::string& name,
               double oracle_tol, int degree_override) {
    Manifest mf;
    mf.command = name;
    nlikit::EngineOptions opts;
    opts.mode = mode;
    const auto sc = load(g, opts);
    if (degree_override >= 0) opts.fit_degree = degree_override;
    if (oracle_tol > 0.0) opts.oracle_settings.rel_tol = oracle_tol;

    auto t0 = Clock::now();
    const auto prepared = nlikit::prepare_spans(sc, opts);
    mf.timings_ms["profile_and_fit"] = ms_since(t0);

    t0 = Clock::now();
    const auto report = nlikit::evaluate_link(sc, prepared, opts);
    mf.timings_ms["kernels"] = ms_since(t0);

    for (const auto& w : report.warnings) {
        mf.warnings.push_back(w);
        log_line(g, "warn", w);
    }
    emit_table(g, mf, "link.csv", nlikit::emit_link_csv(sc, report), true);
    emit_table(g, mf, "spans.csv", nlikit::emit_span_breakdown_csv(report), false);
    write_manifest(g, mf);
    return 0;
}

int run_compare(const GlobalArgs& g, double oracle_tol, const std::string& degrees_text) {
    Manifest mf;
    mf.command = "compare";
    nlikit::EngineOptions opts;
    const auto sc = load(g, opts);
    nlikit::EngineOptions oracle_opts = opts;
    oracle_opts.mode = nlikit::KernelMode::oracle;
    if (oracle_tol > 0.0) oracle_opts.oracle_settings.rel_tol = oracle_tol;

    // the oracle works on the sampled profiles, so it is degree-independent
    auto t0 = Clock::now();
    const auto prepared = nlikit::prepare_spans(sc, opts);
    const auto oracle = nlikit::evaluate_link(sc, prepared, oracle_opts);
    mf.timings_ms["oracle"] = ms_since(t0);

    std::string out = "degree, ch, err_dB\n";
    char buf[80];
    t0 = Clock::now();
    for (int deg : parse_degrees(degrees_text)) {
        nlikit::EngineOptions dopts = opts;
        dopts.fit_degree = deg;
        std::vector<nlikit::PreparedSpan> refit;
        for (const auto& ps : prepared)
            refit.push_back({ps.spp, nlikit::fit_span_spp(ps.spp, deg)});
        const auto closed = nlikit::evaluate_link(sc, refit, dopts);
        for (const auto& w : closed.warnings) {
            mf.warnings.push_back(w);
            log_line(g, "warn", w);
        }
        for (size_t i = 0; i < closed.cuts.size(); ++i) {
            const double err_db =
                10.0 * std::log10(closed.cuts[i].p_nli / oracle.cuts[i].p_nli);
            std::snprintf(buf, sizeof buf, "%d, %d, %.17g\n", deg, closed.cuts[i].cut_index,
                          err_db);
            out += buf;
        }
    }
    mf.timings_ms["closed"] = ms_since(t0);
    emit_table(g, mf, "compare.csv", out, true);
    write_manifest(g, mf);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "nlikit: closed-form nonlinear-interference estimation for WDM links.\n"
        "Exit codes: 0 ok, 2 config parse error, 3 validation error, 4 numeric\n"
        "failure, 5 I/O error, 64 usage error."};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--scenario,-s", g.scenario_path, "scenario JSON file")
        ->envname("NLIKIT_SCENARIO");
    app.add_option("--out,-o", g.out_dir,
                   "output directory for tables and manifest.json (default: primary table "
                   "to stdout)")
        ->envname("NLIKIT_OUT");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware)")
        ->envname("NLIKIT_THREADS");
    app.add_option("--seed", g.seed, "random seed for randomized scenario workflows")
        ->envname("NLIKIT_SEED");
    app.add_option("--log-level", g.log_level, "debug|info|warn|error")
        ->envname("NLIKIT_LOG_LEVEL");

    int span_index = 0;
    int degree_override = -1;
    double oracle_tol = 0.0;
    std::string kernel_mode = "auto";
    std::vector<std::string> lumped;
    std::string fit_degrees = "3,5,9";
    std::string compare_degrees = "1,3,5,7,9";
    bool emit_fit = false;

    auto* profile = app.add_subcommand("profile", "emit the sampled power profiles of one span");
    profile->add_option("--span", span_index, "span index (default 0)");
    profile->add_option("--lumped-loss", lumped,
                        "extra lumped loss, e.g. 2dB@5km (repeatable)");
    profile->add_option("--fit-degree", fit_degrees,
                        "comma-separated degrees for --emit-fit (default 3,5,9)");
    profile->add_flag("--emit-fit", emit_fit, "also emit fitted-polynomial curves per degree");

    auto* fit = app.add_subcommand("fit", "fit per-channel profile polynomials and emit them");
    fit->add_option("--span", span_index, "span index (default 0)");
    fit->add_option("--degree", degree_override, "override the fit degree (0..9)");

    auto* nli = app.add_subcommand("nli", "closed-form NLI and GSNR per CUT");
    nli->add_option("--degree", degree_override, "override the fit degree (0..9)");
    nli->add_option("--kernels", kernel_mode, "auto|semianalytic (SCI kernel path)")
        ->check(CLI::IsMember({"auto", "semianalytic"}));

    auto* oracle = app.add_subcommand("oracle", "numeric-quadrature reference NLI per CUT");
    oracle->add_option("--degree", degree_override, "override the fit degree (0..9)");
    oracle->add_option("--rel-tol", oracle_tol, "oracle quadrature relative tolerance");

    auto* compare = app.add_subcommand("compare",
                                       "closed form vs numeric oracle across fit degrees");
    compare->add_option("--degrees", compare_degrees,
                        "comma-separated fit degrees (default 1,3,5,7,9)");
    compare->add_option("--rel-tol", oracle_tol, "oracle quadrature relative tolerance");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (profile->parsed()) return run_profile(g, span_index, lumped, fit_degrees, emit_fit);
        if (fit->parsed()) return run_fit(g, span_index, degree_override);
        if (nli->parsed())
            return run_engine(g,
                              kernel_mode == "semianalytic" ? nlikit::KernelMode::semianalytic
                                                            : nlikit::KernelMode::automatic,
                              "nli", 0.0, degree_override);
        if (oracle->parsed())
            return run_engine(g, nlikit::KernelMode::oracle, "oracle", oracle_tol,
                              degree_override);
        if (compare->parsed()) return run_compare(g, oracle_tol, compare_degrees);
    } catch (const nlikit::Error& e) {
        log_line(g, "error", e.what());
        return static_cast<int>(e.code);
    } catch (const std::exception& e) {
        log_line(g, "error", e.what());
        return static_cast<int>(nlikit::ExitCode::numeric);
    }
    return static_cast<int>(nlikit::ExitCode::usage);
}
