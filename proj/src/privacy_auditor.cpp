#include "scpir/privacy_auditor.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <sstream>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "scpir/errors.hpp"
#include "scpir/seeding.hpp"

namespace scpir {

namespace {

void check_db(const Parameters& params, int db_index) {
    if (db_index < 0 || db_index >= params.num_dbs)
        throw ParameterError("database index out of range");
}

std::string term_text(const Term& t) {
    std::ostringstream os;
    os << '(' << t.message << ',' << t.label << ',' << t.position << ')';
    return os.str();
}

std::string request_line(int block, int stage, const std::vector<Term>& terms) {
    std::ostringstream os;
    os << block << ':' << stage << ':';
    for (const Term& t : terms) os << term_text(t);
    return os.str();
}

// The block is recoverable from any term: all terms of a request share one
// label, and the block is that label. Using the terms directly keeps
// canonicalization honest for wire-decoded queries too.
int block_of(const Request& r) {
    return r.terms.empty() ? r.block : (int)r.terms[0].label;
}

std::string join_sorted(std::vector<std::string> lines) {
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

// All ordered tuples of `depth` distinct values from [0, universe).
void gen_injections(uint32_t universe, std::size_t depth, std::vector<uint32_t>& cur,
                    std::vector<char>& used,
                    std::vector<std::vector<uint32_t>>& out) {
    if (cur.size() == depth) {
        out.push_back(cur);
        return;
    }
    for (uint32_t v = 0; v < universe; ++v) {
        if (used[v]) continue;
        used[v] = 1;
        cur.push_back(v);
        gen_injections(universe, depth, cur, used, out);
        cur.pop_back();
        used[v] = 0;
    }
}

struct SkeletonTerm {
    int chunk = 0;      // index into the visible-chunk list
    uint32_t slot = 0;  // rank of the consumed position within that chunk
    uint16_t message = 0;
    uint16_t label = 0;
};

struct SkeletonRequest {
    int block = 0;
    int stage = 0;
    std::vector<SkeletonTerm> terms;  // sorted by message (stable under relabeling)
};

std::string sampled_fingerprint(const Query& query) {
    // Shape plus, per block, the position of the stage-1 single addressing
    // message 0 — a statistic whose distribution the scheme promises to keep
    // independent of the desired index.
    std::map<int, std::string> pos;
    for (const Request& r : query.requests) {
        int b = block_of(r);
        if (!pos.count(b)) pos[b] = "-";
        if (r.stage == 1 && r.terms.size() == 1 && r.terms[0].message == 0)
            pos[b] = std::to_string(r.terms[0].position);
    }
    std::string tail = "|p=";
    for (const auto& [b, p] : pos) {
        tail += p;
        tail += ',';
    }
    return shape_fingerprint(query) + tail;
}

}  // namespace

std::string canonical_query(const Query& query) {
    std::vector<std::string> lines;
    for (const Request& r : query.requests) {
        std::vector<Term> terms = r.terms;
        std::sort(terms.begin(), terms.end());
        lines.push_back(request_line(block_of(r), r.stage, terms));
    }
    // Blocks and stages are single small integers in practice, but sort
    // structurally anyway: line text sorts (block, stage, terms) only after
    // zero-ambiguity because ':' separates fixed fields.
    std::vector<std::tuple<int, int, std::string>> keyed;
    keyed.reserve(lines.size());
    for (std::size_t i = 0; i < query.requests.size(); ++i) {
        const Request& r = query.requests[i];
        keyed.emplace_back(block_of(r), (int)r.stage, lines[i]);
    }
    std::sort(keyed.begin(), keyed.end());
    std::string out;
    for (const auto& [b, s, l] : keyed) {
        out += l;
        out += '\n';
    }
    return out;
}

std::string shape_fingerprint(const Query& query) {
    std::vector<std::string> lines;
    for (const Request& r : query.requests) {
        std::set<int> msgs;
        for (const Term& t : r.terms) msgs.insert(t.message);
        std::ostringstream os;
        os << block_of(r) << ':' << (int)r.stage << ":{";
        bool first = true;
        for (int m : msgs) {
            if (!first) os << ',';
            os << m;
            first = false;
        }
        os << '}';
        lines.push_back(os.str());
    }
    return join_sorted(std::move(lines));
}

std::map<std::string, Rational> exact_query_distribution(const Parameters& params,
                                                         int db_index,
                                                         int desired_index,
                                                         SchemeVariant variant) {
    check_db(params, db_index);
    const uint64_t cb64 = ipow(params.subset_size, params.num_messages);

    QueryPlan plan =
        build_query_plan(params, desired_index, identity_permutations(params), variant);
    const Query& skeleton = plan.queries[db_index];

    // Consumed positions per visible chunk. With identity permutations the
    // skeleton positions are consumption counters; the live query replaces
    // counter c of a chunk by delta[c], and only those values matter.
    std::map<std::pair<uint16_t, uint16_t>, std::set<uint32_t>> consumed;
    for (const Request& r : skeleton.requests)
        for (const Term& t : r.terms) consumed[{t.message, t.label}].insert(t.position);

    std::vector<std::pair<uint16_t, uint16_t>> chunk_ids;
    std::vector<std::vector<uint32_t>> slots;  // sorted consumed counters
    std::map<std::pair<uint16_t, uint16_t>, int> chunk_index;
    for (const auto& [id, set] : consumed) {
        chunk_index[id] = (int)chunk_ids.size();
        chunk_ids.push_back(id);
        slots.emplace_back(set.begin(), set.end());
    }

    BigInt total = 1;
    for (const auto& s : slots)
        for (std::size_t i = 0; i < s.size(); ++i) {
            total *= BigInt(cb64 - i);
            if (total > 10'000'000)
                throw ScaleError(
                    "exact privacy enumeration exceeds 10^7 injection tuples; "
                    "use verify_privacy_sampled");
        }
    const uint32_t chunk_bits = (uint32_t)cb64;

    // Skeleton with terms resolved to (chunk, slot rank); term order within a
    // request is fixed by the message index alone, so it survives relabeling.
    std::vector<SkeletonRequest> reqs;
    for (const Request& r : skeleton.requests) {
        SkeletonRequest sr;
        sr.block = block_of(r);
        sr.stage = r.stage;
        for (const Term& t : r.terms) {
            int ci = chunk_index[{t.message, t.label}];
            const auto& sl = slots[ci];
            uint32_t rank =
                (uint32_t)(std::lower_bound(sl.begin(), sl.end(), t.position) -
                           sl.begin());
            sr.terms.push_back({ci, rank, t.message, t.label});
        }
        std::sort(sr.terms.begin(), sr.terms.end(),
                  [](const SkeletonTerm& a, const SkeletonTerm& b) {
                      return a.message < b.message;
                  });
        reqs.push_back(std::move(sr));
    }

    // One injection list per distinct consumed-set size.
    std::map<std::size_t, std::vector<std::vector<uint32_t>>> injections;
    for (const auto& s : slots)
        if (!injections.count(s.size())) {
            std::vector<uint32_t> cur;
            std::vector<char> used(chunk_bits, 0);
            gen_injections(chunk_bits, s.size(), cur, used, injections[s.size()]);
        }

    std::map<std::string, uint64_t> counts;
    std::vector<const std::vector<uint32_t>*> chosen(slots.size(), nullptr);
    std::vector<std::string> lines(reqs.size());
    std::vector<std::tuple<int, int, std::string>> keyed(reqs.size());

    auto emit = [&]() {
        for (std::size_t i = 0; i < reqs.size(); ++i) {
            const SkeletonRequest& sr = reqs[i];
            std::string line =
                std::to_string(sr.block) + ':' + std::to_string(sr.stage) + ':';
            for (const SkeletonTerm& t : sr.terms) {
                line += '(';
                line += std::to_string(t.message);
                line += ',';
                line += std::to_string(t.label);
                line += ',';
                line += std::to_string((*chosen[t.chunk])[t.slot]);
                line += ')';
            }
            keyed[i] = {sr.block, sr.stage, std::move(line)};
        }
        std::sort(keyed.begin(), keyed.end());
        std::string key;
        for (const auto& [b, s, l] : keyed) {
            key += l;
            key += '\n';
        }
        ++counts[key];
    };

    auto recurse = [&](auto&& self, std::size_t ci) -> void {
        if (ci == slots.size()) {
            emit();
            return;
        }
        for (const auto& inj : injections[slots[ci].size()]) {
            chosen[ci] = &inj;
            self(self, ci + 1);
        }
    };
    recurse(recurse, 0);

    std::map<std::string, Rational> dist;
    for (const auto& [key, count] : counts) dist[key] = Rational(count, total);
    return dist;
}

PrivacyReport verify_privacy_exact(const Parameters& params, int db_index,
                                   SchemeVariant variant) {
    check_db(params, db_index);
    PrivacyReport rep;
    rep.mode = "exact";
    rep.db_index = db_index;
    const int K = params.num_messages;
    if (K == 1) {
        rep.pass = true;
        rep.vacuous = true;
        return rep;
    }

    // Shape mismatch already breaks privacy and costs nothing to find.
    PermutationSet ident = identity_permutations(params);
    std::vector<std::string> shapes;
    for (int k = 0; k < K; ++k)
        shapes.push_back(
            shape_fingerprint(build_query_plan(params, k, ident, variant).queries[db_index]));
    for (int k = 1; k < K; ++k)
        if (shapes[k] != shapes[0]) {
            rep.pass = false;
            rep.witness = "query shape depends on the desired index (desired=0 vs desired=" +
                          std::to_string(k) + "):\n" + shapes[0] + "--- vs ---\n" +
                          shapes[k];
            return rep;
        }

    std::vector<std::future<std::map<std::string, Rational>>> futs;
    for (int k = 0; k < K; ++k)
        futs.push_back(std::async(std::launch::async, [&, k] {
            return exact_query_distribution(params, db_index, k, variant);
        }));
    std::vector<std::map<std::string, Rational>> dists;
    for (auto& f : futs) dists.push_back(f.get());

    for (int k = 1; k < K; ++k) {
        if (dists[k] == dists[0]) continue;
        rep.pass = false;
        std::set<std::string> keys;
        for (const auto& [q, p] : dists[0]) keys.insert(q);
        for (const auto& [q, p] : dists[k]) keys.insert(q);
        for (const auto& q : keys) {
            Rational p0 = dists[0].count(q) ? dists[0].at(q) : Rational(0);
            Rational pk = dists[k].count(q) ? dists[k].at(q) : Rational(0);
            if (p0 == pk) continue;
            rep.witness = "P[query | desired=0] = " + to_string(p0) +
                          " but P[query | desired=" + std::to_string(k) +
                          "] = " + to_string(pk) + " for:\n" + q;
            break;
        }
        return rep;
    }
    rep.pass = true;
    return rep;
}

PrivacyReport verify_privacy_sampled(const Parameters& params, int db_index,
                                     uint64_t trials, uint64_t seed, double alpha,
                                     SchemeVariant variant) {
    check_db(params, db_index);
    if (trials < 1000) throw ParameterError("sampled audit needs trials >= 1000");
    PrivacyReport rep;
    rep.mode = "sampled";
    rep.db_index = db_index;
    rep.trials = trials;
    const int K = params.num_messages;
    if (K == 1) {
        rep.pass = true;
        rep.vacuous = true;
        rep.categories = 1;
        return rep;
    }

    auto draw = [&](int k) {
        std::map<std::string, uint64_t> counts;
        const uint64_t base = splitmix64(splitmix64(seed) ^ (uint64_t)(k + 1));
        for (uint64_t i = 0; i < trials; ++i) {
            PermutationSet perms =
                sample_permutations(params, splitmix64(base ^ (i + 1)));
            QueryPlan plan = build_query_plan(params, k, perms, variant);
            ++counts[sampled_fingerprint(plan.queries[db_index])];
        }
        return counts;
    };
    std::vector<std::future<std::map<std::string, uint64_t>>> futs;
    for (int k = 0; k < K; ++k)
        futs.push_back(std::async(std::launch::async, draw, k));
    std::vector<std::map<std::string, uint64_t>> obs;
    for (auto& f : futs) obs.push_back(f.get());

    std::set<std::string> bins;
    for (const auto& o : obs)
        for (const auto& [fp, c] : o) bins.insert(fp);
    rep.categories = bins.size();
    if (bins.size() <= 1) {
        rep.pass = true;
        rep.vacuous = true;
        return rep;
    }

    // Chi-square homogeneity across the K rows; every row has `trials`
    // observations and every column total is positive by construction.
    const double grand = double(trials) * K;
    double x2 = 0.0;
    for (const auto& fp : bins) {
        uint64_t col = 0;
        for (const auto& o : obs) col += o.count(fp) ? o.at(fp) : 0;
        for (const auto& o : obs) {
            double expect = double(trials) * double(col) / grand;
            double got = o.count(fp) ? double(o.at(fp)) : 0.0;
            x2 += (got - expect) * (got - expect) / expect;
        }
    }
    rep.statistic = x2;
    rep.degrees_of_freedom = (K - 1) * (int(bins.size()) - 1);
    boost::math::chi_squared_distribution<double> dist(rep.degrees_of_freedom);
    rep.p_value = boost::math::cdf(boost::math::complement(dist, x2));
    rep.pass = rep.p_value >= alpha;
    return rep;
}

}  // namespace scpir
