#include "scpir/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "scpir/errors.hpp"
#include "scpir/pir_protocol.hpp"
#include "scpir/placement.hpp"
#include "scpir/privacy_auditor.hpp"
#include "scpir/seeding.hpp"

namespace scpir {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

uint64_t trial_seed(uint64_t seed, uint64_t scheme, uint64_t instance,
                    uint64_t desired) {
    uint64_t s = splitmix64(seed ^ 0x747269616cULL);
    s = splitmix64(s ^ (scheme + 1));
    s = splitmix64(s ^ (instance + 1));
    return splitmix64(s ^ (desired + 1));
}

std::vector<int> desired_list(int desired_index, int num_messages) {
    if (desired_index == -1) {
        std::vector<int> all(num_messages);
        for (int k = 0; k < num_messages; ++k) all[k] = k;
        return all;
    }
    if (desired_index < 0 || desired_index >= num_messages)
        throw ParameterError("desired message index out of range");
    return {desired_index};
}

bool shapes_invariant(const Parameters& params) {
    PermutationSet ident = identity_permutations(params);
    std::vector<QueryPlan> plans;
    for (int k = 0; k < params.num_messages; ++k)
        plans.push_back(build_query_plan(params, k, ident));
    for (int db = 0; db < params.num_dbs; ++db) {
        std::string base = shape_fingerprint(plans[0].queries[db]);
        for (int k = 1; k < params.num_messages; ++k)
            if (shape_fingerprint(plans[k].queries[db]) != base) return false;
    }
    return true;
}

// Answers for one plan, either locally or over the sockets; joined by
// database index so ordering choices cannot change the result.
std::vector<Answer> gather_answers(const QueryPlan& plan,
                                   const std::vector<StorageContent>& storage,
                                   const TrialConfig& cfg) {
    std::vector<Answer> answers;
    for (int db = 0; db < plan.params.num_dbs; ++db) {
        if (cfg.mode == TrialMode::inproc)
            answers.push_back(evaluate_answer(plan.queries[db], storage[db]));
        else
            answers.push_back(query_remote(cfg.endpoints[db], plan.queries[db]));
    }
    return answers;
}

}  // namespace

std::vector<BitVec> make_messages(int num_messages, uint64_t message_bits,
                                  MessageSource source, uint64_t seed,
                                  const std::string& path) {
    std::vector<BitVec> msgs;
    switch (source) {
        case MessageSource::all_zero:
            for (int k = 0; k < num_messages; ++k) msgs.emplace_back(message_bits);
            return msgs;
        case MessageSource::seeded_random: {
            std::mt19937_64 rng(splitmix64(seed ^ 0x6d736773ULL));
            for (int k = 0; k < num_messages; ++k) {
                BitVec m(message_bits);
                for (uint64_t i = 0; i < message_bits; ++i) m.set(i, rng() & 1);
                msgs.push_back(std::move(m));
            }
            return msgs;
        }
        case MessageSource::from_file: {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw ParameterError("cannot open message file " + path);
            std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
            const uint64_t per = (message_bits + 7) / 8;
            if (bytes.size() != per * (uint64_t)num_messages)
                throw ParameterError("message file must hold exactly " +
                                     std::to_string(per * (uint64_t)num_messages) +
                                     " bytes");
            for (int k = 0; k < num_messages; ++k)
                msgs.push_back(BitVec::from_bytes(
                    std::vector<uint8_t>(bytes.begin() + (uint64_t)k * per,
                                         bytes.begin() + (uint64_t)(k + 1) * per),
                    message_bits));
            return msgs;
        }
    }
    throw ParameterError("unknown message source");
}

TrialReport run_trial(const TrialConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    Parameters params =
        make_parameters(cfg.num_dbs, cfg.num_messages, cfg.subset_size);

    TrialReport rep;
    rep.num_dbs = params.num_dbs;
    rep.num_messages = params.num_messages;
    rep.mu = params.mu;
    rep.message_bits = params.message_bits;
    rep.subset_low = params.subset_size;
    rep.downloaded_per_db.assign(params.num_dbs, 0);
    rep.expected_cost = corner_cost(params.subset_size, params.num_messages);

    std::vector<BitVec> msgs = make_messages(params.num_messages, params.message_bits,
                                             cfg.source, cfg.seed, cfg.message_file);

    std::vector<StorageContent> storage;
    if (cfg.mode == TrialMode::inproc) {
        storage = place(split_messages(params, msgs));
        for (const auto& db : storage) {
            uint64_t bits = storage_usage(db);
            rep.storage_bits_per_db = std::max(rep.storage_bits_per_db, bits);
        }
    } else {
        if ((int)cfg.endpoints.size() != params.num_dbs)
            throw ParameterError("net mode needs one endpoint per database");
        for (int db = 0; db < params.num_dbs; ++db) {
            ServerInfo info = remote_info(cfg.endpoints[db]);
            if (info.num_dbs != params.num_dbs ||
                info.num_messages != params.num_messages ||
                info.subset_size != params.subset_size || info.db_index != db)
                throw ProtocolError("endpoint " + std::to_string(db) +
                                        " serves different parameters",
                                    3);
            rep.storage_bits_per_db = std::max(rep.storage_bits_per_db, info.storage_bits);
        }
    }

    rep.decode_exact = true;
    for (int d : desired_list(cfg.desired_index, params.num_messages)) {
        PermutationSet perms =
            sample_permutations(params, trial_seed(cfg.seed, 0, 0, (uint64_t)d));
        QueryPlan plan = build_query_plan(params, d, perms);
        std::vector<Answer> answers = gather_answers(plan, storage, cfg);
        for (int db = 0; db < params.num_dbs; ++db) {
            rep.downloaded_per_db[db] += answers[db].bits.size();
            rep.downloaded_total += answers[db].bits.size();
        }
        BitVec got = decode_message(plan, answers);
        rep.decode_exact = rep.decode_exact && got == msgs[d];
        rep.decoded.push_back(std::move(got));
        rep.desired_bits += params.message_bits;
    }

    rep.cost = Rational(rep.downloaded_total, rep.desired_bits);
    rep.shape_invariant = shapes_invariant(params);
    rep.wall_seconds = seconds_since(start);
    return rep;
}

TrialReport run_memory_sharing(const TrialConfig& cfg, const Rational& mu) {
    auto start = std::chrono::steady_clock::now();
    const int N = cfg.num_dbs;
    const int K = cfg.num_messages;
    if (N < 1 || K < 1) throw ParameterError("need N >= 1 and K >= 1");
    if (mu <= Rational(1, N) || mu >= 1)
        throw ParameterError("memory sharing needs mu strictly inside (1/N, 1)");
    if (cfg.mode != TrialMode::inproc)
        throw ParameterError("memory-sharing trials run in-process");

    // mu = alpha * t/N + (1-alpha) * (t+1)/N with alpha in (0,1).
    Rational scaled = mu * N;
    BigInt t_big = num(scaled) / den(scaled);
    if (Rational(t_big) == scaled)
        throw ParameterError(
            "mu is a corner t/N; run a pure trial at that subset size");
    const int t = (int)t_big;
    Rational alpha = Rational(t + 1) - scaled;

    Parameters low = make_parameters(N, K, t);
    Parameters high = make_parameters(N, K, t + 1);

    // Minimal copy counts: with Lambda = copies_low*L1 + copies_high*L2,
    // alpha*Lambda = copies_low*L1 forces copies_low*L1*(b-a) =
    // copies_high*L2*a, so the minimal solution divides out the gcd.
    BigInt a = num(alpha), b = den(alpha);
    BigInt s1 = a * high.message_bits;        // copies of the low scheme
    BigInt s2 = (b - a) * low.message_bits;   // copies of the high scheme
    BigInt g = gcd(s1, s2);
    s1 /= g;
    s2 /= g;
    if (s1 > 1'000'000 || s2 > 1'000'000)
        throw ScaleError("memory-sharing blend needs more than 10^6 scheme copies");
    const uint64_t copies_low = (uint64_t)s1;
    const uint64_t copies_high = (uint64_t)s2;
    const uint64_t lambda =
        copies_low * low.message_bits + copies_high * high.message_bits;

    TrialReport rep;
    rep.num_dbs = N;
    rep.num_messages = K;
    rep.mu = mu;
    rep.message_bits = lambda;
    rep.copies_low = copies_low;
    rep.copies_high = copies_high;
    rep.subset_low = t;
    rep.subset_high = t + 1;
    rep.downloaded_per_db.assign(N, 0);
    rep.expected_cost =
        alpha * corner_cost(t, K) + (1 - alpha) * corner_cost(t + 1, K);

    std::vector<BitVec> msgs =
        make_messages(K, lambda, cfg.source, cfg.seed, cfg.message_file);
    std::vector<BitVec> rebuilt;
    for (int k = 0; k < K; ++k) rebuilt.emplace_back(lambda);

    rep.decode_exact = true;
    std::vector<int> desired = desired_list(cfg.desired_index, K);

    // Run every instance of both sub-schemes; instance i of the low scheme
    // owns message bits [i*L1, (i+1)*L1), high instances follow.
    struct Part {
        const Parameters* params;
        uint64_t instance;
        uint64_t offset;
        uint64_t scheme;
    };
    std::vector<Part> parts;
    for (uint64_t i = 0; i < copies_low; ++i)
        parts.push_back({&low, i, i * low.message_bits, 0});
    for (uint64_t i = 0; i < copies_high; ++i)
        parts.push_back(
            {&high, i, copies_low * low.message_bits + i * high.message_bits, 1});

    std::vector<uint64_t> storage_per_db(N, 0);
    for (const Part& part : parts) {
        const Parameters& p = *part.params;
        std::vector<BitVec> sub;
        for (int k = 0; k < K; ++k) {
            BitVec m(p.message_bits);
            for (uint64_t i = 0; i < p.message_bits; ++i)
                m.set(i, msgs[k].get(part.offset + i));
            sub.push_back(std::move(m));
        }
        std::vector<StorageContent> storage = place(split_messages(p, sub));
        for (int db = 0; db < N; ++db) storage_per_db[db] += storage_usage(storage[db]);

        for (int d : desired) {
            PermutationSet perms = sample_permutations(
                p, trial_seed(cfg.seed, part.scheme, part.instance, (uint64_t)d));
            QueryPlan plan = build_query_plan(p, d, perms);
            std::vector<Answer> answers;
            for (int db = 0; db < N; ++db) {
                answers.push_back(evaluate_answer(plan.queries[db], storage[db]));
                rep.downloaded_per_db[db] += answers.back().bits.size();
                rep.downloaded_total += answers.back().bits.size();
            }
            BitVec got = decode_message(plan, answers);
            rep.decode_exact = rep.decode_exact && got == sub[d];
            for (uint64_t i = 0; i < p.message_bits; ++i)
                rebuilt[d].set(part.offset + i, got.get(i));
        }
    }
    rep.storage_bits_per_db =
        *std::max_element(storage_per_db.begin(), storage_per_db.end());

    for (int d : desired) {
        rep.decode_exact = rep.decode_exact && rebuilt[d] == msgs[d];
        rep.decoded.push_back(rebuilt[d]);
        rep.desired_bits += lambda;
    }
    rep.cost = Rational(rep.downloaded_total, rep.desired_bits);
    rep.shape_invariant = shapes_invariant(low) && shapes_invariant(high);
    rep.wall_seconds = seconds_since(start);
    return rep;
}

std::vector<Rational> sweep_grid(int num_dbs, int extra) {
    if (num_dbs < 1) throw ParameterError("need N >= 1");
    std::vector<Rational> grid;
    for (int t = 1; t <= num_dbs; ++t) grid.push_back(Rational(t, num_dbs));
    Rational lo(1, num_dbs);
    for (int i = 1; i <= extra; ++i)
        grid.push_back(lo + (Rational(1) - lo) * Rational(i, extra + 1));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

SweepResult sweep(int num_dbs, int num_messages, const std::vector<Rational>& grid,
                  uint64_t seed, TrialMode mode) {
    SweepResult result;
    result.num_dbs = num_dbs;
    result.num_messages = num_messages;

    std::vector<Rational> points = grid;
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    for (const Rational& mu : points) {
        SweepRow row;
        row.mu = mu;
        row.achievable = achievable_hull(mu, num_dbs, num_messages);
        row.converse = converse_lower_bound(mu, num_dbs, num_messages);
        row.lp = lp_lower_bound(mu, num_dbs, num_messages).value;
        bool agree = row.achievable == row.converse && row.lp == row.converse;

        Rational scaled = mu * num_dbs;
        if (den(scaled) == 1) {
            int t = (int)num(scaled);
            TrialConfig cfg;
            cfg.num_dbs = num_dbs;
            cfg.num_messages = num_messages;
            cfg.subset_size = t;
            cfg.desired_index = -1;
            cfg.seed = splitmix64(seed ^ (uint64_t)t);
            cfg.mode = mode;

            // Networked rows exercise the real socket path against local
            // servers holding exactly the placement the trial expects.
            std::vector<std::unique_ptr<DatabaseServer>> servers;
            if (mode == TrialMode::net) {
                Parameters params = make_parameters(num_dbs, num_messages, t);
                auto msgs =
                    make_messages(num_messages, params.message_bits,
                                  MessageSource::seeded_random, cfg.seed);
                auto storage = place(split_messages(params, msgs));
                for (int db = 0; db < num_dbs; ++db) {
                    servers.push_back(
                        std::make_unique<DatabaseServer>(std::move(storage[db])));
                    cfg.endpoints.push_back(
                        Endpoint{"127.0.0.1", servers.back()->port()});
                }
            }
            TrialReport trial = run_trial(cfg);
            row.has_measured = true;
            row.measured = trial.cost;
            row.decode_exact = trial.decode_exact;
            agree = agree && trial.decode_exact && trial.shape_invariant &&
                    row.measured == row.achievable;
        }
        row.violation = !agree;
        result.any_violation = result.any_violation || row.violation;
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string sweep_to_csv(const SweepResult& result) {
    std::ostringstream os;
    os << "mu_num,mu_den,hull_num,hull_den,converse_num,converse_den,"
          "lp_num,lp_den,measured_num,measured_den,hull_float,violation\n";
    for (const SweepRow& row : result.rows) {
        os << num(row.mu) << ',' << den(row.mu) << ',' << num(row.achievable) << ','
           << den(row.achievable) << ',' << num(row.converse) << ','
           << den(row.converse) << ',' << num(row.lp) << ',' << den(row.lp) << ',';
        if (row.has_measured)
            os << num(row.measured) << ',' << den(row.measured);
        else
            os << ',';
        os << ',' << to_double(row.achievable) << ',' << (row.violation ? 1 : 0)
           << '\n';
    }
    return os.str();
}

}  // namespace scpir
