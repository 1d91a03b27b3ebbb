// kcanon: command-line front end for resistor-network graph signatures.
//
// Exit codes:
//   0  success (iso: IsomorphicCertified)
//   1  iso: DistinctCertified
//   2  input, parse or validation failure
//   3  solver failure
//   4  orbits --verify mismatch against the brute-force oracle
//   5  iso: PossiblyIsomorphic

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "kcanon/kcanon.hpp"

namespace {

using kcanon::Error;
using kcanon::ErrorKind;
using kcanon::Graph;
using ojson = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitDistinct = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerifyMismatch = 4;
constexpr int kExitPossiblyIsomorphic = 5;

enum class Format { Json, Text };

struct RunConfig {
    double tol = kcanon::kDefaultTolerance;
    kcanon::SolveMethod method = kcanon::SolveMethod::Grounded;
    double sink_weight = 1.0;
    std::uint64_t budget = kcanon::kDefaultSearchBudget;
    Format format = Format::Json;
    unsigned threads = std::max(1U, std::thread::hardware_concurrency());
    int verbosity = 0;

    kcanon::SignatureOptions signature_options() const {
        return {.tol = tol, .solver = {method, sink_weight}, .threads = threads};
    }
};

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Compact JSON with every float printed to 17 significant digits.
void write_json(std::string& out, const ojson& j) {
    switch (j.type()) {
    case ojson::value_t::object: {
        out += '{';
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) out += ',';
            first = false;
            out += ojson(key).dump();
            out += ':';
            write_json(out, value);
        }
        out += '}';
        break;
    }
    case ojson::value_t::array: {
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ',';
            write_json(out, j[i]);
        }
        out += ']';
        break;
    }
    case ojson::value_t::number_float: out += fmt17(j.get<double>()); break;
    default: out += j.dump(); break;
    }
}

std::string to_json_text(const ojson& j) {
    std::string out;
    write_json(out, j);
    return out;
}

void log(const RunConfig& cfg, const std::string& msg) {
    if (cfg.verbosity > 0) std::cerr << "kcanon: " << msg << '\n';
}

ojson int_array(const std::vector<int>& xs) {
    ojson a = ojson::array();
    for (int x : xs) a.push_back(x);
    return a;
}

ojson classes_json(const std::vector<std::vector<int>>& classes) {
    ojson a = ojson::array();
    for (const auto& c : classes) a.push_back(int_array(c));
    return a;
}

std::string join(const std::vector<int>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + std::to_string(xs[i]);
    return s;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_voltages(const RunConfig& cfg, const std::string& file, int a, int b) {
    const Graph g = kcanon::load_graph(file);
    if (g.n() < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 nodes");
    kcanon::detail::check_pair(g.n(), a, b);
    const kcanon::PairSolver solver = kcanon::PairSolver::make(g, {cfg.method, cfg.sink_weight});
    const kcanon::VoltageProfile prof = solver.solve_pair(a, b);
    const kcanon::PairCurrents pc = kcanon::pair_currents(g, prof);
    const double residual = kcanon::kcl_residual(kcanon::laplacian(g), prof);
    const double resistance = prof.at(a) - prof.at(b);
    std::optional<double> discrepancy;
    if (cfg.method == kcanon::SolveMethod::UniversalSink) {
        const auto exact = kcanon::LaplacianSystem::build(g).solve_pair(a, b);
        discrepancy = (prof.v - exact.v).cwiseAbs().maxCoeff();
    }

    if (cfg.format == Format::Text) {
        std::cout << "method " << kcanon::to_string(cfg.method)
                  << (prof.approximate ? " (approximate)" : "") << "\n";
        for (int k = 1; k <= g.n(); ++k) std::cout << "v " << k << ' ' << fmt17(prof.at(k)) << '\n';
        for (std::size_t e = 0; e < pc.current.size(); ++e) {
            std::cout << "i " << g.edges()[e].u << ' ' << g.edges()[e].v << ' '
                      << fmt17(pc.current[e]) << '\n';
        }
        std::cout << "effective_resistance " << fmt17(resistance) << '\n';
        std::cout << "kcl_residual " << fmt17(residual) << '\n';
        if (discrepancy) std::cout << "grounded_discrepancy " << fmt17(*discrepancy) << '\n';
        return kExitOk;
    }

    ojson out;
    out["command"] = "voltages";
    out["method"] = std::string(kcanon::to_string(cfg.method));
    out["approximate"] = prof.approximate;
    if (cfg.method == kcanon::SolveMethod::UniversalSink) out["sink_weight"] = cfg.sink_weight;
    out["n"] = g.n();
    out["source"] = a;
    out["sink"] = b;
    ojson volts = ojson::array();
    for (int k = 1; k <= g.n(); ++k) volts.push_back(prof.at(k));
    out["voltages"] = volts;
    ojson currents = ojson::array();
    for (std::size_t e = 0; e < pc.current.size(); ++e) {
        currents.push_back({{"u", g.edges()[e].u}, {"v", g.edges()[e].v}, {"current", pc.current[e]}});
    }
    out["currents"] = currents;
    out["effective_resistance"] = resistance;
    out["kcl_residual"] = residual;
    if (discrepancy) out["grounded_discrepancy"] = *discrepancy;
    std::cout << to_json_text(out) << '\n';
    return kExitOk;
}

int cmd_orbits(const RunConfig& cfg, const std::string& file, bool verify) {
    const Graph g = kcanon::load_graph(file);
    if (g.n() < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 nodes");
    const auto t0 = std::chrono::steady_clock::now();
    const kcanon::SignatureSet set = kcanon::compute_signatures(g, cfg.signature_options());
    const kcanon::OrbitPartition part = kcanon::orbit_partition(set);
    log(cfg, "signatures in " +
                 std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) +
                 " s");

    int code = kExitOk;
    ojson verify_json;
    std::optional<kcanon::oracle::AutomorphismReport> report;
    if (verify) {
        if (g.n() > kcanon::oracle::kMaxBruteForceNodes) {
            verify_json = {{"skipped", "oracle is limited to " +
                                           std::to_string(kcanon::oracle::kMaxBruteForceNodes) + " nodes"}};
        } else {
            report = kcanon::oracle::brute_force_automorphisms(g);
            bool sound = true;
            for (const auto& orbit : report->orbits) {
                for (int k : orbit) sound = sound && part.class_of[k - 1] == part.class_of[orbit[0] - 1];
            }
            std::vector<std::vector<int>> sorted_classes = part.classes;
            std::sort(sorted_classes.begin(), sorted_classes.end());
            const bool equal = sorted_classes == report->orbits;
            verify_json = {{"automorphism_group_order", report->order},
                           {"oracle_orbits", classes_json(report->orbits)},
                           {"sound", sound},
                           {"equal", equal}};
            if (!equal) code = kExitVerifyMismatch;
        }
    }

    if (cfg.format == Format::Text) {
        std::cout << "orbit candidates (" << part.classes.size() << " classes)\n";
        for (std::size_t c = 0; c < part.classes.size(); ++c) {
            std::cout << kcanon::signature_digest(set.quantizer, part.class_signature[c]) << ": "
                      << join(part.classes[c]) << '\n';
        }
        if (report) {
            std::cout << "oracle group order " << report->order << '\n';
            for (const auto& o : report->orbits) std::cout << "oracle orbit: " << join(o) << '\n';
            std::cout << (code == kExitOk ? "verify: match\n" : "verify: MISMATCH\n");
        } else if (verify) {
            std::cout << "verify: skipped\n";
        }
        return code;
    }

    ojson out;
    out["command"] = "orbits";
    out["label"] = "orbit candidates";
    out["method"] = std::string(kcanon::to_string(cfg.method));
    out["tol"] = cfg.tol;
    out["n"] = g.n();
    ojson classes = ojson::array();
    for (std::size_t c = 0; c < part.classes.size(); ++c) {
        classes.push_back({{"members", int_array(part.classes[c])},
                           {"signature_digest",
                            kcanon::signature_digest(set.quantizer, part.class_signature[c])}});
    }
    out["classes"] = classes;
    if (verify) out["verify"] = verify_json;
    std::cout << to_json_text(out) << '\n';
    return code;
}

int cmd_iso(const RunConfig& cfg, const std::string& file1, const std::string& file2) {
    const Graph g1 = kcanon::load_graph(file1);
    const Graph g2 = kcanon::load_graph(file2);
    const kcanon::IsoVerdict v = kcanon::iso_screen(g1, g2, cfg.signature_options(), cfg.budget);
    const int code = v.kind == kcanon::IsoVerdict::Kind::IsomorphicCertified ? kExitOk
                     : v.kind == kcanon::IsoVerdict::Kind::DistinctCertified
                         ? kExitDistinct
                         : kExitPossiblyIsomorphic;
    if (cfg.format == Format::Text) {
        std::cout << kcanon::to_string(v.kind) << " (" << v.reason << ")\n";
        if (!v.mapping.empty()) std::cout << "mapping " << join(v.mapping) << '\n';
        return code;
    }
    ojson out;
    out["command"] = "iso";
    out["verdict"] = std::string(kcanon::to_string(v.kind));
    out["reason"] = v.reason;
    out["tol"] = cfg.tol;
    out["expansions"] = v.expansions;
    if (!v.mapping.empty()) out["mapping"] = int_array(v.mapping);
    std::cout << to_json_text(out) << '\n';
    return code;
}

int cmd_fingerprint(const RunConfig& cfg, const std::string& file) {
    const Graph g = kcanon::load_graph(file);
    if (g.n() < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 nodes");
    const auto t0 = std::chrono::steady_clock::now();
    const kcanon::Fingerprint fp = kcanon::fingerprint(kcanon::compute_signatures(g, cfg.signature_options()));
    const std::string canonical = kcanon::serialize(fp);
    const std::string hash = kcanon::sha256_hex(canonical);
    log(cfg, "fingerprint in " +
                 std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) +
                 " s, factorizations " + std::to_string(kcanon::stats::factorization_count()));
    if (cfg.format == Format::Text) {
        std::cout << hash << " n=" << fp.n << " m=" << fp.m << '\n';
        return kExitOk;
    }
    ojson head;
    head["command"] = "fingerprint";
    head["method"] = std::string(kcanon::to_string(cfg.method));
    head["tol"] = cfg.tol;
    head["sha256"] = hash;
    std::string text = to_json_text(head);
    text.pop_back(); // splice the canonical bytes in verbatim
    std::cout << text << ",\"fingerprint\":" << canonical << "}\n";
    return kExitOk;
}

int cmd_canon(const RunConfig& cfg, const std::string& file) {
    const Graph g = kcanon::load_graph(file);
    kcanon::CanonicalLabeling c;
    if (g.n() == 1) {
        c = kcanon::canonical_labeling(g, cfg.tol, cfg.budget);
    } else {
        c = kcanon::canonical_labeling(
            g, kcanon::orbit_partition(kcanon::compute_signatures(g, cfg.signature_options())), cfg.budget);
    }
    if (cfg.format == Format::Text) {
        std::cout << (c.certified ? "certified" : "NOT certified (budget exhausted)") << '\n';
        std::cout << "order " << join(c.order) << '\n';
        std::cout << "form " << c.form << '\n';
        return kExitOk;
    }
    ojson out;
    out["command"] = "canon";
    out["certified"] = c.certified;
    out["tol"] = cfg.tol;
    out["expansions"] = c.expansions;
    out["order"] = int_array(c.order);
    out["relabel"] = int_array(c.relabel);
    out["canonical_form"] = c.form;
    out["canonical_hash"] = kcanon::sha256_hex(c.form);
    std::cout << to_json_text(out) << '\n';
    return kExitOk;
}

int cmd_oracle(const RunConfig& cfg, const std::string& file, int a, int b, const std::string& other) {
    const Graph g = kcanon::load_graph(file);
    const auto rep = kcanon::oracle::brute_force_automorphisms(g);
    std::optional<std::vector<kcanon::oracle::ExactRational>> exact;
    if (a != 0 || b != 0) exact = kcanon::oracle::exact_solve_pair(g, a, b);
    std::optional<std::optional<std::vector<int>>> iso;
    if (!other.empty()) iso = kcanon::oracle::brute_force_isomorphic(g, kcanon::load_graph(other));

    if (cfg.format == Format::Text) {
        std::cout << "automorphism group order " << rep.order << '\n';
        for (const auto& o : rep.orbits) std::cout << "orbit: " << join(o) << '\n';
        if (exact) {
            for (int k = 1; k <= g.n(); ++k) std::cout << "v " << k << ' ' << (*exact)[k - 1].str() << '\n';
        }
        if (iso) std::cout << (iso->has_value() ? "isomorphic " + join(**iso) : "proven distinct") << '\n';
        return kExitOk;
    }
    ojson out;
    out["command"] = "oracle";
    out["n"] = g.n();
    out["automorphism_group_order"] = rep.order;
    out["orbits"] = classes_json(rep.orbits);
    if (!rep.automorphisms.empty() && rep.automorphisms.size() <= 1000) {
        ojson perms = ojson::array();
        for (const auto& p : rep.automorphisms) perms.push_back(int_array(p));
        out["automorphisms"] = perms;
    }
    if (exact) {
        ojson volts = ojson::array();
        for (const auto& x : *exact) volts.push_back(x.str());
        out["exact_voltages"] = {{"source", a}, {"sink", b}, {"voltages", volts}};
    }
    if (iso) {
        ojson r = {{"isomorphic", iso->has_value()}};
        if (iso->has_value()) r["mapping"] = int_array(**iso);
        out["isomorphism"] = r;
    }
    std::cout << to_json_text(out) << '\n';
    return kExitOk;
}

int report_error(ErrorKind kind, const std::string& message) {
    ojson err = {{"error", std::string(kcanon::to_string(kind))}, {"message", message}};
    std::cerr << to_json_text(err) << '\n';
    return kcanon::is_input_error(kind) ? kExitInput : kExitSolver;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resistor-network signatures: voltages, orbit candidates, isomorphism screening "
                 "and canonical labels for weighted graphs"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::string method = "grounded";
    std::string format = "json";
    app.add_option("--tol", cfg.tol, "Quantization grid for signature equality")
        ->envname("KCANON_TOL")
        ->check(CLI::PositiveNumber);
    app.add_option("--method", method, "Pair solver")
        ->check(CLI::IsMember({"grounded", "pseudoinverse", "universal-sink"}));
    app.add_option("--sink-weight", cfg.sink_weight, "Universal-sink conductance")->check(CLI::PositiveNumber);
    app.add_option("--budget", cfg.budget, "Search expansion budget")->check(CLI::PositiveNumber);
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--threads", cfg.threads, "Worker threads for pair solves")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", cfg.verbosity, "Log timing to stderr");

    std::string file, file2, other;
    int source = 0, sink = 0;
    bool verify = false;

    auto* voltages = app.add_subcommand("voltages", "Voltages and currents for one source/sink pair");
    voltages->add_option("graph", file, "Graph file (edge list or JSON)")->required();
    voltages->add_option("-a,--source", source, "Current source node")->required();
    voltages->add_option("-b,--sink", sink, "Current sink node")->required();

    auto* orbits = app.add_subcommand("orbits", "Orbit candidates from node signatures");
    orbits->add_option("graph", file, "Graph file")->required();
    orbits->add_flag("--verify", verify, "Cross-check with the brute-force oracle (N <= 10)");

    auto* iso = app.add_subcommand("iso", "Isomorphism screen of two graphs");
    iso->add_option("graph1", file, "First graph file")->required();
    iso->add_option("graph2", file2, "Second graph file")->required();

    auto* fp = app.add_subcommand("fingerprint", "Canonical fingerprint and SHA-256");
    fp->add_option("graph", file, "Graph file")->required();

    auto* canon = app.add_subcommand("canon", "Canonical labeling");
    canon->add_option("graph", file, "Graph file")->required();

    auto* oracle = app.add_subcommand("oracle", "Brute-force ground truth (N <= 10)");
    oracle->add_option("graph", file, "Graph file")->required();
    oracle->add_option("-a,--source", source, "Exact voltages: source node");
    oracle->add_option("-b,--sink", sink, "Exact voltages: sink node");
    oracle->add_option("--against", other, "Second graph for an exhaustive isomorphism check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error(ErrorKind::InvalidArgument, e.what());
    }

    cfg.format = format == "text" ? Format::Text : Format::Json;
    cfg.method = method == "pseudoinverse"    ? kcanon::SolveMethod::Pseudoinverse
                 : method == "universal-sink" ? kcanon::SolveMethod::UniversalSink
                                              : kcanon::SolveMethod::Grounded;

    try {
        if (*voltages) return cmd_voltages(cfg, file, source, sink);
        if (*orbits) return cmd_orbits(cfg, file, verify);
        if (*iso) return cmd_iso(cfg, file, file2);
        if (*fp) return cmd_fingerprint(cfg, file);
        if (*canon) return cmd_canon(cfg, file);
        if (*oracle) return cmd_oracle(cfg, file, source, sink, other);
    } catch (const Error& e) {
        return report_error(e.kind(), e.detail());
    } catch (const std::exception& e) {
        return report_error(ErrorKind::InvalidArgument, e.what());
    }
    return kExitInput;
}
