#pragma once

#include <cstdint>
#include <vector>

#include "scpir/bitvec.hpp"
#include "scpir/errors.hpp"
#include "scpir/rational.hpp"

namespace scpir {

// Problem instance: num_dbs non-colluding databases, num_messages messages,
// and a replication degree subset_size (each stored chunk lives on exactly
// that many databases). Storage fraction and per-message bit length follow
// from those three numbers.
struct Parameters {
    int num_dbs = 0;       // N >= 1
    int num_messages = 0;  // K >= 1
    int subset_size = 0;   // t, 1 <= t <= N
    Rational mu;           // per-database storage fraction, t/N
    uint64_t message_bits = 0;  // L = C(N,t) * t^K, bits per message
};

// A label names the set of databases a chunk is replicated on: a sorted
// subset of {0, ..., N-1} of size t. Labels are canonically ordered
// lexicographically; ranks index that order.
using Label = std::vector<int>;

// Validates ranges and derives mu and message_bits.
// Throws ParameterError naming the violated bound.
Parameters make_parameters(int num_dbs, int num_messages, int subset_size);

// All size-t subsets of {0,...,n-1} in lexicographic order.
std::vector<Label> subset_labels(int n, int t);

// Rank of a sorted size-t subset within the lexicographic order above.
int label_rank(const Label& label, int n);

bool label_contains(const Label& label, int db);

// Integer power (exact, no overflow checking beyond 64 bits; parameter
// validation keeps the operands small).
uint64_t ipow(uint64_t base, int exp);

// Every message split into chunks, one per label: chunks[k][rank] holds the
// t^K-bit slice of message k assigned to subset_labels(N,t)[rank].
struct SubmessageTable {
    Parameters params;
    std::vector<std::vector<BitVec>> chunks;

    // Throws StructuralError if any chunk is missing or has the wrong size.
    void validate() const;
};

// What one database stores: the chunks of every message whose label contains
// db_index. Absent chunks are left empty.
struct StorageContent {
    Parameters params;
    int db_index = 0;
    std::vector<std::vector<BitVec>> chunks;

    bool has(int message, int rank) const {
        return message >= 0 && message < (int)chunks.size() && rank >= 0 &&
               rank < (int)chunks[message].size() && chunks[message][rank].size() > 0;
    }
    const BitVec& at(int message, int rank) const {
        if (!has(message, rank)) throw ProtocolError("chunk not stored on this database", 2);
        return chunks[message][rank];
    }
};

// Fraction of the library stored at subset size l, normalized so that a
// complete placement satisfies sum_l C(N,l) x_l = 1.
struct PlacementFractions {
    int num_dbs = 0;
    std::vector<Rational> x;  // x[l-1] for l = 1..N

    // Nonnegativity and the size identity. Throws ParameterError.
    void validate() const;

    // sum_l l*C(N,l)*x_l <= mu*N
    bool fits_storage(const Rational& mu) const;
};

// Exact placement fractions of a (complete) sub-message table.
PlacementFractions placement_fractions(const SubmessageTable& table);

}  // namespace scpir
