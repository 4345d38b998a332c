#include "scpir/pir_protocol.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "scpir/seeding.hpp"

namespace scpir {

namespace {

// Uniform draw in [0, bound) by rejection on the top of the 64-bit range;
// fully specified, unlike std::uniform_int_distribution.
uint32_t draw_below(std::mt19937_64& gen, uint64_t bound) {
    const uint64_t max = ~uint64_t(0);
    const uint64_t limit = max - (max % bound);  // multiple of bound
    uint64_t v = gen();
    while (v >= limit) v = gen();
    return (uint32_t)(v % bound);
}

void check_perms(const Parameters& params, const PermutationSet& perms) {
    const uint64_t chunk_bits = ipow(params.subset_size, params.num_messages);
    const std::size_t n_labels =
        binomial(params.num_dbs, params.subset_size).convert_to<std::size_t>();
    if (perms.params.num_dbs != params.num_dbs ||
        perms.params.num_messages != params.num_messages ||
        perms.params.subset_size != params.subset_size)
        throw StructuralError("permutation set built for different parameters");
    if (perms.delta.size() != (std::size_t)params.num_messages)
        throw StructuralError("permutation set incomplete: wrong message count");
    for (const auto& row : perms.delta) {
        if (row.size() != n_labels)
            throw StructuralError("permutation set incomplete: wrong label count");
        for (const auto& p : row)
            if (p.size() != chunk_bits)
                throw StructuralError("permutation has wrong length");
    }
}

}  // namespace

PermutationSet sample_permutations(const Parameters& params, uint64_t seed) {
    const uint64_t chunk_bits = ipow(params.subset_size, params.num_messages);
    const std::size_t n_labels =
        binomial(params.num_dbs, params.subset_size).convert_to<std::size_t>();
    PermutationSet set;
    set.params = params;
    set.delta.assign(params.num_messages, {});
    for (int k = 0; k < params.num_messages; ++k) {
        set.delta[k].reserve(n_labels);
        for (std::size_t r = 0; r < n_labels; ++r) {
            std::mt19937_64 gen(splitmix64(splitmix64(seed ^ (uint64_t(k) << 32)) ^ r));
            std::vector<uint32_t> perm(chunk_bits);
            for (uint64_t i = 0; i < chunk_bits; ++i) perm[i] = (uint32_t)i;
            for (uint64_t i = chunk_bits; i-- > 1;)
                std::swap(perm[i], perm[draw_below(gen, i + 1)]);
            set.delta[k].push_back(std::move(perm));
        }
    }
    return set;
}

PermutationSet identity_permutations(const Parameters& params) {
    const uint64_t chunk_bits = ipow(params.subset_size, params.num_messages);
    const std::size_t n_labels =
        binomial(params.num_dbs, params.subset_size).convert_to<std::size_t>();
    PermutationSet set;
    set.params = params;
    std::vector<uint32_t> ident(chunk_bits);
    for (uint64_t i = 0; i < chunk_bits; ++i) ident[i] = (uint32_t)i;
    set.delta.assign(params.num_messages,
                     std::vector<std::vector<uint32_t>>(n_labels, ident));
    return set;
}

QueryPlan build_query_plan(const Parameters& params, int desired,
                           const PermutationSet& perms, SchemeVariant variant) {
    if (desired < 0 || desired >= params.num_messages)
        throw ParameterError("desired message index must lie in [0, K), got " +
                             std::to_string(desired));
    check_perms(params, perms);

    const int K = params.num_messages;
    const int t = params.subset_size;
    const uint64_t chunk_bits = ipow(t, K);
    const auto labels = subset_labels(params.num_dbs, t);

    QueryPlan plan;
    plan.params = params;
    plan.desired = desired;
    plan.variant = variant;
    plan.queries.resize(params.num_dbs);
    for (int n = 0; n < params.num_dbs; ++n) plan.queries[n].db_index = n;

    // A side sum produced at the previous stage, waiting to be reused.
    struct Produced {
        int dpos;  // producer's rank within the block
        int db;
        int request;
        std::vector<Term> terms;
    };

    for (std::size_t r = 0; r < labels.size(); ++r) {
        const Label& block = labels[r];
        std::vector<uint64_t> fresh(K, 0);  // per-chunk consumption counters

        auto take_fresh = [&](int msg) -> Term {
            if (fresh[msg] >= chunk_bits)
                throw Error("internal: fresh-bit counter overran the chunk");
            uint32_t idx = (uint32_t)fresh[msg]++;
            return Term{(uint16_t)msg, (uint16_t)r, perms.delta[msg][r][idx]};
        };

        std::map<std::vector<int>, std::vector<Produced>> prev_sides;
        for (int s = 1; s <= K; ++s) {
            std::map<std::vector<int>, std::vector<Produced>> cur_sides;
            const auto types = subset_labels(K, s);
            for (int dpos = 0; dpos < t; ++dpos) {
                const int n = block[dpos];
                auto& out = plan.queries[n].requests;

                // Pair prior-stage side sums with fresh desired bits in
                // (producer rank, tuple-type rank, instance rank) order.
                struct Pending {
                    std::vector<Term> terms;
                    int side_db;
                    int side_request;
                    uint32_t out_pos;
                };
                std::vector<std::vector<Pending>> bucket(types.size());
                if (variant == SchemeVariant::standard && s >= 2) {
                    for (int ppos = 0; ppos < t; ++ppos) {
                        if (ppos == dpos) continue;
                        for (std::size_t tr = 0; tr < types.size(); ++tr) {
                            if (!label_contains(types[tr], desired)) continue;
                            std::vector<int> j_type = types[tr];
                            j_type.erase(
                                std::find(j_type.begin(), j_type.end(), desired));
                            for (const Produced& side : prev_sides[j_type]) {
                                if (side.dpos != ppos) continue;
                                Term f = take_fresh(desired);
                                Pending p;
                                p.terms.push_back(f);
                                p.terms.insert(p.terms.end(), side.terms.begin(),
                                               side.terms.end());
                                p.side_db = side.db;
                                p.side_request = side.request;
                                p.out_pos = f.position;
                                bucket[tr].push_back(std::move(p));
                            }
                        }
                    }
                }

                for (std::size_t tr = 0; tr < types.size(); ++tr) {
                    const auto& type = types[tr];
                    const bool has_desired = label_contains(type, desired);
                    Request proto;
                    proto.stage = (uint8_t)s;
                    proto.block = (uint16_t)r;
                    proto.type.assign(type.begin(), type.end());

                    if (has_desired) {
                        proto.carries_desired = true;
                        if (s == 1) {
                            Term f = take_fresh(desired);
                            Request req = proto;
                            req.terms = {f};
                            if (variant == SchemeVariant::standard)
                                plan.decode_map.push_back({n, (int)out.size(), -1, -1,
                                                           (uint16_t)r, f.position});
                            out.push_back(std::move(req));
                        } else if (variant == SchemeVariant::standard) {
                            for (Pending& p : bucket[tr]) {
                                Request req = proto;
                                req.terms = std::move(p.terms);
                                plan.decode_map.push_back({n, (int)out.size(), p.side_db,
                                                           p.side_request, (uint16_t)r,
                                                           p.out_pos});
                                out.push_back(std::move(req));
                            }
                        } else {
                            uint64_t count = ipow(t - 1, s - 1);
                            for (uint64_t i = 0; i < count; ++i) {
                                Request req = proto;
                                for (int j : type) req.terms.push_back(take_fresh(j));
                                out.push_back(std::move(req));
                            }
                        }
                    } else {
                        if (variant == SchemeVariant::skip_symmetry) continue;
                        uint64_t count = (s == 1) ? 1 : ipow(t - 1, s - 1);
                        for (uint64_t i = 0; i < count; ++i) {
                            Request req = proto;
                            for (int j : type) req.terms.push_back(take_fresh(j));
                            cur_sides[type].push_back(
                                {dpos, n, (int)out.size(), req.terms});
                            out.push_back(std::move(req));
                        }
                    }
                }
            }
            prev_sides = std::move(cur_sides);
        }
        if (variant == SchemeVariant::standard && fresh[desired] != chunk_bits)
            throw Error("internal: desired chunk not fully consumed by the block");
    }
    return plan;
}

Answer evaluate_answer(const Query& query, const StorageContent& storage) {
    const Parameters& p = storage.params;
    const uint64_t chunk_bits = ipow(p.subset_size, p.num_messages);
    const auto labels = subset_labels(p.num_dbs, p.subset_size);
    Answer a;
    a.db_index = storage.db_index;
    a.bits.reserve(query.requests.size());
    for (const Request& req : query.requests) {
        if (req.terms.empty()) throw ProtocolError("request carries no terms", 1);
        uint8_t bit = 0;
        for (const Term& term : req.terms) {
            if (term.message >= p.num_messages || term.label >= labels.size() ||
                term.position >= chunk_bits)
                throw ProtocolError("malformed term: index out of range", 1);
            if (!storage.has(term.message, term.label)) {
                std::ostringstream what;
                what << "chunk (message " << term.message << ", label {";
                const Label& l = labels[term.label];
                for (std::size_t i = 0; i < l.size(); ++i)
                    what << (i ? "," : "") << l[i];
                what << "}) is not stored on database " << storage.db_index;
                throw ProtocolError(what.str(), 2);
            }
            bit ^= storage.chunks[term.message][term.label].get(term.position) ? 1 : 0;
        }
        a.bits.push_back(bit);
    }
    return a;
}

BitVec decode_message(const QueryPlan& plan, const std::vector<Answer>& answers) {
    if (plan.variant != SchemeVariant::standard)
        throw ParameterError("only standard-scheme plans are decodable");
    const Parameters& p = plan.params;
    if ((int)answers.size() != p.num_dbs)
        throw StructuralError("expected one answer per database");
    for (int n = 0; n < p.num_dbs; ++n) {
        if (answers[n].db_index != n)
            throw StructuralError("answers out of database order");
        if (answers[n].bits.size() != plan.queries[n].requests.size())
            throw StructuralError("answer length does not match the query");
        for (uint8_t b : answers[n].bits)
            if (b > 1) throw StructuralError("answer bits must be 0 or 1");
    }

    const uint64_t chunk_bits = ipow(p.subset_size, p.num_messages);
    BitVec out(p.message_bits);
    std::vector<bool> written(p.message_bits, false);

    for (const DecodeEntry& e : plan.decode_map) {
        const Request& dr = plan.queries[e.db].requests[e.request];
        uint8_t value = answers[e.db].bits[e.request];
        if (e.side_db >= 0) {
            const Request& sr = plan.queries[e.side_db].requests[e.side_request];
            // The cancelled sum must be exactly the desired request minus its
            // fresh desired term, received from a different database at the
            // previous stage.
            if (e.side_db == e.db || sr.stage + 1 != dr.stage)
                throw DecodeError("side-information bookkeeping miss: wrong source");
            std::vector<Term> rest;
            bool dropped = false;
            for (const Term& term : dr.terms) {
                if (!dropped && term.message == plan.desired && term.label == e.label &&
                    term.position == e.position) {
                    dropped = true;
                    continue;
                }
                rest.push_back(term);
            }
            std::vector<Term> side_sorted = sr.terms;
            std::sort(rest.begin(), rest.end());
            std::sort(side_sorted.begin(), side_sorted.end());
            if (!dropped || rest != side_sorted)
                throw DecodeError("side-information bookkeeping miss: sums differ");
            value ^= answers[e.side_db].bits[e.side_request];
        }
        uint64_t out_bit = uint64_t(e.label) * chunk_bits + e.position;
        if (written[out_bit]) throw DecodeError("output position decoded twice");
        written[out_bit] = true;
        out.set(out_bit, value);
    }
    for (bool w : written)
        if (!w) throw DecodeError("decoded output incomplete");
    return out;
}

Rational download_cost(const QueryPlan& plan) {
    uint64_t total = 0;
    for (const Query& q : plan.queries) total += q.requests.size();
    return Rational(BigInt(total), BigInt(plan.params.message_bits));
}

std::vector<uint8_t> encode_query(const Query& query) {
    std::vector<uint8_t> out;
    for (const Request& req : query.requests) {
        if (req.terms.empty() || req.terms.size() > 255)
            throw StructuralError("request term count must be in [1, 255]");
        out.push_back(req.stage);
        out.push_back((uint8_t)req.terms.size());
        for (const Term& term : req.terms) {
            out.push_back(uint8_t(term.message >> 8));
            out.push_back(uint8_t(term.message));
            out.push_back(uint8_t(term.label >> 8));
            out.push_back(uint8_t(term.label));
            out.push_back(uint8_t(term.position >> 24));
            out.push_back(uint8_t(term.position >> 16));
            out.push_back(uint8_t(term.position >> 8));
            out.push_back(uint8_t(term.position));
        }
    }
    return out;
}

Query decode_query(const std::vector<uint8_t>& bytes, const Parameters& params,
                   int db_index) {
    const uint64_t chunk_bits = ipow(params.subset_size, params.num_messages);
    const std::size_t n_labels =
        binomial(params.num_dbs, params.subset_size).convert_to<std::size_t>();
    Query q;
    q.db_index = db_index;
    std::size_t off = 0;
    while (off < bytes.size()) {
        if (bytes.size() - off < 2) throw ProtocolError("truncated request header", 1);
        Request req;
        req.stage = bytes[off];
        std::size_t terms = bytes[off + 1];
        off += 2;
        if (req.stage < 1 || req.stage > params.num_messages)
            throw ProtocolError("request stage out of range", 1);
        if (terms == 0) throw ProtocolError("request carries no terms", 1);
        if (bytes.size() - off < terms * 8) throw ProtocolError("truncated term list", 1);
        for (std::size_t i = 0; i < terms; ++i) {
            Term term;
            term.message = (uint16_t(bytes[off]) << 8) | bytes[off + 1];
            term.label = (uint16_t(bytes[off + 2]) << 8) | bytes[off + 3];
            term.position = (uint32_t(bytes[off + 4]) << 24) |
                            (uint32_t(bytes[off + 5]) << 16) |
                            (uint32_t(bytes[off + 6]) << 8) | bytes[off + 7];
            off += 8;
            if (term.message >= params.num_messages || term.label >= n_labels ||
                term.position >= chunk_bits)
                throw ProtocolError("malformed term: index out of range", 1);
            req.terms.push_back(term);
        }
        // Reconstruct wire-derivable bookkeeping and enforce its invariants:
        // one block per request, distinct messages.
        req.block = req.terms[0].label;
        std::vector<uint8_t> msgs;
        for (const Term& term : req.terms) {
            if (term.label != req.block) throw ProtocolError("request mixes blocks", 1);
            msgs.push_back((uint8_t)term.message);
        }
        std::sort(msgs.begin(), msgs.end());
        if (std::adjacent_find(msgs.begin(), msgs.end()) != msgs.end())
            throw ProtocolError("request repeats a message", 1);
        req.type = std::move(msgs);
        q.requests.push_back(std::move(req));
    }
    return q;
}

std::vector<uint8_t> encode_answer(const Answer& answer) {
    std::vector<uint8_t> out((answer.bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < answer.bits.size(); ++i) {
        if (answer.bits[i] > 1) throw StructuralError("answer bits must be 0 or 1");
        if (answer.bits[i]) out[i >> 3] |= uint8_t(0x80u >> (i & 7));
    }
    return out;
}

Answer decode_answer(const std::vector<uint8_t>& bytes, int db_index,
                     std::size_t request_count) {
    if (bytes.size() != (request_count + 7) / 8)
        throw ProtocolError("answer has wrong byte length", 1);
    Answer a;
    a.db_index = db_index;
    a.bits.reserve(request_count);
    for (std::size_t i = 0; i < request_count; ++i)
        a.bits.push_back((bytes[i >> 3] >> (7 - (i & 7))) & 1);
    for (std::size_t i = request_count; i < bytes.size() * 8; ++i)
        if ((bytes[i >> 3] >> (7 - (i & 7))) & 1)
            throw ProtocolError("answer padding bits must be zero", 1);
    return a;
}

std::string query_transcript(const Query& query, const Parameters& params) {
    const auto labels = subset_labels(params.num_dbs, params.subset_size);
    std::ostringstream out;
    auto print_set = [&](std::ostream& os, const std::vector<int>& s) {
        os << '{';
        for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
        os << '}';
    };
    for (const Request& req : query.requests) {
        out << "db=" << query.db_index << " block=";
        print_set(out, labels[req.block]);
        out << " stage=" << (int)req.stage << " type={";
        for (std::size_t i = 0; i < req.type.size(); ++i)
            out << (i ? "," : "") << (int)req.type[i];
        out << "} terms=";
        for (std::size_t i = 0; i < req.terms.size(); ++i) {
            if (i) out << '+';
            out << '(' << req.terms[i].message << ',';
            print_set(out, labels[req.terms[i].label]);
            out << ',' << req.terms[i].position << ')';
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace scpir
