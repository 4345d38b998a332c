#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scpir/core_model.hpp"
#include "scpir/rational.hpp"

namespace scpir {

// One random permutation of [0, t^K) per chunk: delta[k][rank][i] is the
// storage-side position of the i-th fresh bit the client consumes from chunk
// (k, rank). Each permutation comes from its own generator seeded by mixing
// (seed, k, rank) through splitmix64, then Fisher-Yates: for i from size-1
// down to 1, draw j uniform in [0, i] by rejection sampling on mt19937_64
// and swap a[i] with a[j]. Every step is fully specified, so the same seed
// reproduces the same set on any platform.
struct PermutationSet {
    Parameters params;
    std::vector<std::vector<std::vector<uint32_t>>> delta;
};

PermutationSet sample_permutations(const Parameters& params, uint64_t seed);

// All permutations identity; used by the privacy auditor to expose the
// query skeleton (positions equal consumption indices).
PermutationSet identity_permutations(const Parameters& params);

// One summand of a coded-bit request: the stored bit of chunk
// (message, label rank) at a storage-side position.
struct Term {
    uint16_t message = 0;
    uint16_t label = 0;
    uint32_t position = 0;

    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term&, const Term&) = default;
};

// One downloaded bit: the XOR of the addressed stored bits. Only stage and
// terms travel on the wire; block/type/carries_desired are client-side
// bookkeeping reconstructible from the terms (except carries_desired, which
// is deliberately never recoverable by a database).
struct Request {
    uint8_t stage = 1;  // 1..K
    std::vector<Term> terms;

    uint16_t block = 0;         // label rank of the generating block
    std::vector<uint8_t> type;  // sorted message indices of the tuple-type
    bool carries_desired = false;
};

struct Query {
    int db_index = 0;
    std::vector<Request> requests;
};

struct Answer {
    int db_index = 0;
    std::vector<uint8_t> bits;  // one 0/1 per request, in request order
};

// standard = the real scheme. skip_symmetry = negative control: drops every
// tuple-type that excludes the desired message and pairs desired bits with
// fresh bits instead of prior-stage side sums. Cheaper, still decodable in
// spirit, but its query shape leaks the desired index.
enum class SchemeVariant { standard, skip_symmetry };

// How one desired-carrying request is decoded: XOR the request's answer bit
// with the answer bit of the side-information request it reused (stage >= 2),
// then write the result at (label, position) of the desired message.
struct DecodeEntry {
    int db = 0;
    int request = 0;
    int side_db = -1;
    int side_request = -1;
    uint16_t label = 0;
    uint32_t position = 0;
};

struct QueryPlan {
    Parameters params;
    int desired = 0;
    SchemeVariant variant = SchemeVariant::standard;
    std::vector<Query> queries;  // one per database
    std::vector<DecodeEntry> decode_map;
};

// Deterministic query-plan construction. Blocks (size-t labels) are processed
// in lexicographic rank order; within a block, stages 1..K; within a stage,
// databases in index order; within a database, tuple-types in rank order.
// Fresh bits of each chunk are consumed in increasing permuted order by one
// global per-chunk counter. Side sums produced at stage k-1 by the other
// databases of the block are reused in (producer rank, tuple-type rank,
// instance rank) order, each paired with the next fresh desired bit.
QueryPlan build_query_plan(const Parameters& params, int desired,
                           const PermutationSet& perms,
                           SchemeVariant variant = SchemeVariant::standard);

// XOR of the addressed stored bits, one answer bit per request.
// Throws ProtocolError when a term is malformed (code 1) or addresses a
// chunk this database does not store (code 2).
Answer evaluate_answer(const Query& query, const StorageContent& storage);

// Recovers the desired message exactly from all N answers. Verifies the
// side-information bookkeeping as it goes; any miss raises DecodeError.
BitVec decode_message(const QueryPlan& plan, const std::vector<Answer>& answers);

// Downloaded bits per message bit: total request count / L, exact.
Rational download_cost(const QueryPlan& plan);

// Canonical binary form. Per request: stage byte, term-count byte, then per
// term message (u16), label rank (u16), position (u32), all big-endian.
// Requests are concatenated; the container supplies the total length.
std::vector<uint8_t> encode_query(const Query& query);
Query decode_query(const std::vector<uint8_t>& bytes, const Parameters& params, int db_index);

// Answer bits packed 8 per byte, MSB first, in request order.
std::vector<uint8_t> encode_answer(const Answer& answer);
Answer decode_answer(const std::vector<uint8_t>& bytes, int db_index,
                     std::size_t request_count);

// Structured text form, one request per line.
std::string query_transcript(const Query& query, const Parameters& params);

}  // namespace scpir
