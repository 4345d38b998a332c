// Command-line front end: trials, sweeps, privacy audits, bound curves and a
// long-running database server over the wire protocol.
//
// Exit codes: 0 all checks passed, 1 an invariant or audit failed (or a run
// failed operationally), 2 usage error (bad flags, bad parameters, or a
// request outside the feasibility guards).

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scpir/bounds.hpp"
#include "scpir/core_model.hpp"
#include "scpir/errors.hpp"
#include "scpir/harness.hpp"
#include "scpir/net.hpp"
#include "scpir/placement.hpp"
#include "scpir/privacy_auditor.hpp"

namespace {

using nlohmann::json;
using namespace scpir;

volatile std::sig_atomic_t g_stop = 0;
void handle_stop(int) { g_stop = 1; }

// "a/b", an integer, or a finite decimal; always exact.
Rational parse_rational(const std::string& text) {
    auto bad = [&] { throw ParameterError("cannot parse rational: " + text); };
    if (text.empty()) bad();
    try {
        auto slash = text.find('/');
        if (slash != std::string::npos) {
            BigInt n(text.substr(0, slash)), d(text.substr(slash + 1));
            if (d == 0) bad();
            return Rational(n, d);
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(BigInt(text));
        BigInt digits(text.substr(0, dot) + text.substr(dot + 1));
        BigInt scale = 1;
        for (std::size_t i = dot + 1; i < text.size(); ++i) scale *= 10;
        return Rational(digits, scale);
    } catch (const ParameterError&) {
        throw;
    } catch (const std::exception&) {
        bad();
    }
    return {};
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot open output file: " + path);
    out << text;
}

std::string indent_block(const std::string& text, const std::string& pad) {
    std::ostringstream out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out << pad << line << '\n';
    return out.str();
}

MessageSource parse_source(const std::string& name) {
    if (name == "random") return MessageSource::seeded_random;
    if (name == "zeros") return MessageSource::all_zero;
    if (name == "file") return MessageSource::from_file;
    throw ParameterError("unknown message source: " + name);
}

// ---------------------------------------------------------------- trial --

struct TrialOpts {
    int n = 0, k = 0, t = 0;
    std::string mu_text;
    int desired = -1;
    std::uint64_t seed = 1;
    std::string source = "random";
    std::string message_file;
    std::string mode = "inproc";
    std::vector<std::string> endpoints;
    std::string format = "text";
    std::string out;
};

std::string trial_text(const TrialReport& r, int desired, bool pass) {
    std::ostringstream o;
    bool composite = r.copies_high > 0;
    o << (composite ? "memory-sharing trial\n" : "trial\n");
    o << "  databases: " << r.num_dbs << "  messages: " << r.num_messages
      << "  storage fraction: " << r.mu.str() << '\n';
    if (composite)
        o << "  composition: " << r.copies_low << " x (t=" << r.subset_low << ") + "
          << r.copies_high << " x (t=" << r.subset_high << ")\n";
    else
        o << "  subset size: " << r.subset_low << '\n';
    o << "  message bits: " << r.message_bits << '\n';
    if (desired < 0)
        o << "  retrieved: all " << r.num_messages << " messages\n";
    else
        o << "  retrieved: message " << desired << '\n';
    o << "  downloaded bits: " << r.downloaded_total << "  desired bits: " << r.desired_bits
      << '\n';
    o << "  cost: " << r.cost.str() << " (" << to_double(r.cost)
      << ")  expected: " << r.expected_cost.str() << '\n';
    o << "  decode exact: " << (r.decode_exact ? "yes" : "NO")
      << "  shape invariant: " << (r.shape_invariant ? "yes" : "NO") << '\n';
    o << "  storage per db: " << r.storage_bits_per_db << " bits\n";
    o << "  wall: " << r.wall_seconds << " s\n";
    o << "result: " << (pass ? "PASS" : "FAIL") << '\n';
    return o.str();
}

json trial_json(const TrialReport& r, int desired, bool pass) {
    json j;
    j["databases"] = r.num_dbs;
    j["messages"] = r.num_messages;
    j["mu"] = r.mu.str();
    j["message_bits"] = r.message_bits;
    j["desired"] = desired < 0 ? "all" : std::to_string(desired);
    j["downloaded_total"] = r.downloaded_total;
    j["downloaded_per_db"] = r.downloaded_per_db;
    j["desired_bits"] = r.desired_bits;
    j["cost"] = r.cost.str();
    j["cost_float"] = to_double(r.cost);
    j["expected_cost"] = r.expected_cost.str();
    j["decode_exact"] = r.decode_exact;
    j["shape_invariant"] = r.shape_invariant;
    j["storage_bits_per_db"] = r.storage_bits_per_db;
    j["copies_low"] = r.copies_low;
    j["copies_high"] = r.copies_high;
    j["subset_low"] = r.subset_low;
    j["subset_high"] = r.subset_high;
    j["wall_seconds"] = r.wall_seconds;
    j["pass"] = pass;
    return j;
}

int do_trial(const TrialOpts& o) {
    TrialConfig cfg;
    cfg.num_dbs = o.n;
    cfg.num_messages = o.k;
    cfg.desired_index = o.desired;
    cfg.seed = o.seed;
    cfg.source = parse_source(o.source);
    cfg.message_file = o.message_file;
    cfg.mode = o.mode == "net" ? TrialMode::net : TrialMode::inproc;
    for (const auto& e : o.endpoints) cfg.endpoints.push_back(parse_endpoint(e));

    bool have_t = o.t > 0, have_mu = !o.mu_text.empty();
    if (have_t == have_mu) throw ParameterError("pass exactly one of --t and --mu");

    TrialReport rep;
    if (have_t) {
        cfg.subset_size = o.t;
        rep = run_trial(cfg);
    } else {
        Rational mu = parse_rational(o.mu_text);
        Rational scaled = mu * o.n;
        if (den(scaled) == 1 && scaled >= 1 && scaled <= o.n) {
            cfg.subset_size = num(scaled).convert_to<int>();
            rep = run_trial(cfg);
        } else {
            if (cfg.mode == TrialMode::net)
                throw ParameterError(
                    "memory-sharing trials run in-process; --mode net needs --t or a corner --mu");
            rep = run_memory_sharing(cfg, mu);
        }
    }
    bool pass = rep.decode_exact && rep.shape_invariant && rep.cost == rep.expected_cost;
    emit(o.format == "json" ? trial_json(rep, o.desired, pass).dump(2) + "\n"
                            : trial_text(rep, o.desired, pass),
         o.out);
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------- sweep --

struct SweepOpts {
    int n = 0, k = 0, grid = 4;
    std::uint64_t seed = 1;
    std::string mode = "inproc";
    std::string format = "csv";
    std::string out;
};

json sweep_json(const SweepResult& s) {
    json rows = json::array();
    for (const auto& r : s.rows) {
        json j;
        j["mu"] = r.mu.str();
        j["achievable"] = r.achievable.str();
        j["converse"] = r.converse.str();
        j["lp"] = r.lp.str();
        if (r.has_measured) {
            j["measured"] = r.measured.str();
            j["decode_exact"] = r.decode_exact;
        }
        j["violation"] = r.violation;
        rows.push_back(j);
    }
    return json{{"databases", s.num_dbs},
                {"messages", s.num_messages},
                {"rows", rows},
                {"any_violation", s.any_violation}};
}

int do_sweep(const SweepOpts& o) {
    TrialMode mode = o.mode == "net" ? TrialMode::net : TrialMode::inproc;
    SweepResult res = sweep(o.n, o.k, sweep_grid(o.n, o.grid), o.seed, mode);
    emit(o.format == "json" ? sweep_json(res).dump(2) + "\n" : sweep_to_csv(res), o.out);
    return res.any_violation ? 1 : 0;
}

// ---------------------------------------------------------------- audit --

struct AuditOpts {
    int n = 0, k = 0, t = 0;
    int db = -1;  // -1: every database
    std::uint64_t trials = 0;
    std::uint64_t seed = 1;
    double alpha = 0.01;
    bool negative_control = false;
    std::string format = "text";
    std::string out;
};

std::string audit_text(const AuditOpts& o, const Parameters& p,
                       const std::vector<PrivacyReport>& reports, bool all_pass) {
    std::ostringstream out;
    out << "privacy audit\n";
    out << "  databases: " << p.num_dbs << "  messages: " << p.num_messages
        << "  subset size: " << p.subset_size << "  storage fraction: " << p.mu.str() << '\n';
    out << "  scheme: " << (o.negative_control ? "negative control (symmetry skipped)" : "standard")
        << '\n';
    out << "  mode: " << reports.front().mode;
    if (reports.front().mode == "sampled")
        out << "  trials: " << o.trials << " per desired index  alpha: " << o.alpha;
    out << '\n';
    for (const auto& r : reports) {
        out << "  db " << r.db_index << ": " << (r.pass ? "PASS" : "FAIL");
        if (r.mode == "sampled")
            out << "  statistic=" << r.statistic << " df=" << r.degrees_of_freedom
                << " p=" << r.p_value << " categories=" << r.categories;
        if (r.vacuous) out << "  (vacuous: a single category, nothing to compare)";
        out << '\n';
        if (!r.witness.empty()) out << indent_block(r.witness, "    | ");
    }
    out << "overall: " << (all_pass ? "PASS" : "FAIL") << '\n';
    return out.str();
}

json audit_json(const AuditOpts& o, const Parameters& p,
                const std::vector<PrivacyReport>& reports, bool all_pass) {
    json rows = json::array();
    for (const auto& r : reports) {
        json j;
        j["db"] = r.db_index;
        j["pass"] = r.pass;
        j["vacuous"] = r.vacuous;
        if (r.mode == "sampled") {
            j["statistic"] = r.statistic;
            j["degrees_of_freedom"] = r.degrees_of_freedom;
            j["p_value"] = r.p_value;
            j["categories"] = r.categories;
            j["trials"] = r.trials;
        }
        if (!r.witness.empty()) j["witness"] = r.witness;
        rows.push_back(j);
    }
    return json{{"databases", p.num_dbs},
                {"messages", p.num_messages},
                {"subset_size", p.subset_size},
                {"mu", p.mu.str()},
                {"scheme", o.negative_control ? "negative-control" : "standard"},
                {"mode", reports.front().mode},
                {"reports", rows},
                {"overall_pass", all_pass}};
}

int do_audit(const AuditOpts& o) {
    Parameters params = make_parameters(o.n, o.k, o.t);
    if (o.db >= o.n) throw ParameterError("--db out of range");
    SchemeVariant variant =
        o.negative_control ? SchemeVariant::skip_symmetry : SchemeVariant::standard;

    std::vector<int> dbs;
    if (o.db >= 0)
        dbs.push_back(o.db);
    else
        for (int i = 0; i < o.n; ++i) dbs.push_back(i);

    std::vector<PrivacyReport> reports;
    for (int db : dbs) {
        if (o.trials > 0) {
            reports.push_back(verify_privacy_sampled(params, db, o.trials, o.seed, o.alpha, variant));
        } else {
            try {
                reports.push_back(verify_privacy_exact(params, db, variant));
            } catch (const ScaleError& e) {
                throw ScaleError(std::string(e.what()) +
                                 " (pass --trials to run the sampled audit instead)");
            }
        }
    }
    bool all_pass = std::all_of(reports.begin(), reports.end(),
                                [](const PrivacyReport& r) { return r.pass; });
    emit(o.format == "json" ? audit_json(o, params, reports, all_pass).dump(2) + "\n"
                            : audit_text(o, params, reports, all_pass),
         o.out);
    return all_pass ? 0 : 1;
}

// --------------------------------------------------------------- bounds --

struct BoundsOpts {
    int n = 0, k = 0, grid = 33;
    bool corners = false;
    std::string format = "csv";
    std::string out;
};

int do_bounds(const BoundsOpts& o) {
    Curve corners = corner_points(o.n, o.k);
    if (o.format == "json") {
        auto dump = [](const Curve& c) {
            json rows = json::array();
            for (const auto& p : c)
                rows.push_back(json{{"mu", p.mu.str()},
                                    {"cost", p.cost.str()},
                                    {"cost_float", to_double(p.cost)}});
            return rows;
        };
        json j{{"corners", dump(corners)}};
        if (!o.corners) j["curve"] = dump(optimal_tradeoff_curve(o.n, o.k, o.grid));
        emit(j.dump(2) + "\n", o.out);
        return 0;
    }
    emit(curve_to_csv(o.corners ? corners : optimal_tradeoff_curve(o.n, o.k, o.grid)), o.out);
    return 0;
}

// ---------------------------------------------------------------- serve --

struct ServeOpts {
    std::string placement;
    int db = -1;
    int n = 0, k = 0, t = 0;
    std::uint64_t seed = 1;
    std::string source = "zeros";
    std::string host = "127.0.0.1";
    int port = 0;
};

int do_serve(const ServeOpts& o) {
    SubmessageTable table;
    if (!o.placement.empty()) {
        table = load_placement_file(o.placement);
    } else {
        if (o.n <= 0 || o.k <= 0 || o.t <= 0)
            throw ParameterError("serve needs --placement, or --n/--k/--t to generate one");
        Parameters params = make_parameters(o.n, o.k, o.t);
        auto msgs = make_messages(o.k, params.message_bits, parse_source(o.source), o.seed);
        table = split_messages(params, msgs);
    }
    if (o.db < 0 || o.db >= table.params.num_dbs)
        throw ParameterError("--db must name a database in [0, " +
                             std::to_string(table.params.num_dbs) + ")");
    StorageContent storage = place(table)[o.db];
    uint64_t bits = storage_usage(storage);

    DatabaseServer server(std::move(storage), o.host, static_cast<uint16_t>(o.port));
    std::cout << "serving db " << o.db << " on " << o.host << ":" << server.port() << "  (N="
              << table.params.num_dbs << " K=" << table.params.num_messages
              << " t=" << table.params.subset_size << ", " << bits << " stored bits)"
              << std::endl;

    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    std::cout << "stopped\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"storage-constrained private information retrieval toolkit"};
    app.require_subcommand(1);

    TrialOpts trial;
    CLI::App* trial_cmd = app.add_subcommand(
        "trial", "run one placement/query/answer/decode round trip and check its cost");
    trial_cmd->add_option("--n", trial.n, "number of databases")->required();
    trial_cmd->add_option("--k", trial.k, "number of messages")->required();
    trial_cmd->add_option("--t", trial.t, "replication subset size (corner storage t/N)");
    trial_cmd->add_option("--mu", trial.mu_text,
                          "storage fraction in [1/N,1]; non-corner values run memory sharing");
    trial_cmd->add_option("--desired", trial.desired, "message to retrieve (default: all)");
    trial_cmd->add_option("--seed", trial.seed, "RNG seed");
    trial_cmd->add_option("--source", trial.source, "messages: random|zeros|file")
        ->check(CLI::IsMember({"random", "zeros", "file"}));
    trial_cmd->add_option("--message-file", trial.message_file, "message bytes for --source file");
    trial_cmd->add_option("--mode", trial.mode, "inproc|net")
        ->check(CLI::IsMember({"inproc", "net"}));
    trial_cmd->add_option("--endpoints", trial.endpoints,
                          "host:port per database, comma separated (net mode)")
        ->delimiter(',');
    trial_cmd->add_option("--format", trial.format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));
    trial_cmd->add_option("--out", trial.out, "write the report here instead of stdout");

    SweepOpts sweep_o;
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "compare achievable, converse and LP bounds over a storage grid, with live "
                 "trials at the corners");
    sweep_cmd->add_option("--n", sweep_o.n, "number of databases")->required();
    sweep_cmd->add_option("--k", sweep_o.k, "number of messages")->required();
    sweep_cmd->add_option("--grid", sweep_o.grid, "extra interior grid points (default 4)");
    sweep_cmd->add_option("--seed", sweep_o.seed, "RNG seed");
    sweep_cmd->add_option("--mode", sweep_o.mode,
                          "inproc|net (net starts local servers for each corner)")
        ->check(CLI::IsMember({"inproc", "net"}));
    sweep_cmd->add_option("--format", sweep_o.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--out", sweep_o.out, "write the table here instead of stdout");

    AuditOpts audit;
    CLI::App* audit_cmd = app.add_subcommand(
        "audit", "verify that the query distribution hides the desired index");
    audit_cmd->add_option("--n", audit.n, "number of databases")->required();
    audit_cmd->add_option("--k", audit.k, "number of messages")->required();
    audit_cmd->add_option("--t", audit.t, "replication subset size")->required();
    audit_cmd->add_option("--db", audit.db, "audit a single database (default: all)");
    audit_cmd->add_option("--trials", audit.trials,
                          "sample this many plans per desired index instead of exact enumeration");
    audit_cmd->add_option("--seed", audit.seed, "RNG seed (sampled mode)");
    audit_cmd->add_option("--alpha", audit.alpha, "chi-square significance level");
    audit_cmd->add_flag("--negative-control", audit.negative_control,
                        "audit the symmetry-skipping variant (expected to FAIL)");
    audit_cmd->add_option("--format", audit.format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));
    audit_cmd->add_option("--out", audit.out, "write the report here instead of stdout");

    BoundsOpts bounds;
    CLI::App* bounds_cmd =
        app.add_subcommand("bounds", "emit the optimal trade-off curve or its corner points");
    bounds_cmd->add_option("--n", bounds.n, "number of databases")->required();
    bounds_cmd->add_option("--k", bounds.k, "number of messages")->required();
    bounds_cmd->add_option("--grid", bounds.grid, "curve grid points (default 33)");
    bounds_cmd->add_flag("--corners", bounds.corners, "emit only the corner points t/N");
    bounds_cmd->add_option("--format", bounds.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    bounds_cmd->add_option("--out", bounds.out, "write the CSV here instead of stdout");

    ServeOpts serve;
    CLI::App* serve_cmd =
        app.add_subcommand("serve", "answer queries for one database over TCP until SIGINT");
    serve_cmd->add_option("--placement", serve.placement, "placement file to serve");
    serve_cmd->add_option("--db", serve.db, "database index to serve")->required();
    serve_cmd->add_option("--n", serve.n, "number of databases (generate placement)");
    serve_cmd->add_option("--k", serve.k, "number of messages (generate placement)");
    serve_cmd->add_option("--t", serve.t, "subset size (generate placement)");
    serve_cmd->add_option("--seed", serve.seed, "message seed for a generated placement");
    serve_cmd->add_option("--source", serve.source, "generated messages: random|zeros")
        ->check(CLI::IsMember({"random", "zeros"}));
    serve_cmd->add_option("--host", serve.host, "bind address");
    serve_cmd->add_option("--port", serve.port, "bind port (0: ephemeral, printed at startup)")
        ->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (trial_cmd->parsed()) return do_trial(trial);
        if (sweep_cmd->parsed()) return do_sweep(sweep_o);
        if (audit_cmd->parsed()) return do_audit(audit);
        if (bounds_cmd->parsed()) return do_bounds(bounds);
        if (serve_cmd->parsed()) return do_serve(serve);
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ScaleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const StructuralError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
