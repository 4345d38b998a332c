#include "scpir/core_model.hpp"

#include <algorithm>
#include <string>

namespace scpir {

BigInt binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

BigInt falling_factorial(int n, int k) {
    BigInt r = 1;
    for (int i = 0; i < k; ++i) r *= n - i;
    return r;
}

uint64_t ipow(uint64_t base, int exp) {
    uint64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

Parameters make_parameters(int num_dbs, int num_messages, int subset_size) {
    if (num_dbs < 1)
        throw ParameterError("num_dbs must satisfy N >= 1, got " + std::to_string(num_dbs));
    if (num_messages < 1)
        throw ParameterError("num_messages must satisfy K >= 1, got " +
                             std::to_string(num_messages));
    if (subset_size < 1 || subset_size > num_dbs)
        throw ParameterError("subset_size must satisfy 1 <= t <= N, got t=" +
                             std::to_string(subset_size) + " with N=" + std::to_string(num_dbs));

    Parameters p;
    p.num_dbs = num_dbs;
    p.num_messages = num_messages;
    p.subset_size = subset_size;
    p.mu = Rational(subset_size, num_dbs);
    BigInt length = binomial(num_dbs, subset_size) * ipow(subset_size, num_messages);
    if (length > BigInt(uint64_t(1) << 62))
        throw ParameterError("message length C(N,t)*t^K exceeds the supported range");
    p.message_bits = length.convert_to<uint64_t>();
    return p;
}

std::vector<Label> subset_labels(int n, int t) {
    std::vector<Label> out;
    Label cur(t);
    // Standard lexicographic subset enumeration.
    for (int i = 0; i < t; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        int i = t - 1;
        while (i >= 0 && cur[i] == n - t + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < t; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

int label_rank(const Label& label, int n) {
    // Lexicographic rank of a sorted combination: count combinations that
    // precede it by fixing a smaller element at each slot.
    int t = (int)label.size();
    BigInt rank = 0;
    int prev = -1;
    for (int i = 0; i < t; ++i) {
        for (int c = prev + 1; c < label[i]; ++c) rank += binomial(n - c - 1, t - i - 1);
        prev = label[i];
    }
    return rank.convert_to<int>();
}

bool label_contains(const Label& label, int db) {
    return std::binary_search(label.begin(), label.end(), db);
}

void SubmessageTable::validate() const {
    const uint64_t chunk_bits = ipow(params.subset_size, params.num_messages);
    const std::size_t n_labels =
        binomial(params.num_dbs, params.subset_size).convert_to<std::size_t>();
    if (chunks.size() != (std::size_t)params.num_messages)
        throw StructuralError("sub-message table incomplete: expected " +
                              std::to_string(params.num_messages) + " messages");
    for (const auto& row : chunks) {
        if (row.size() != n_labels)
            throw StructuralError("sub-message table incomplete: expected " +
                                  std::to_string(n_labels) + " chunks per message");
        for (const auto& c : row)
            if (c.size() != chunk_bits)
                throw StructuralError("sub-message table chunk has wrong size: expected " +
                                      std::to_string(chunk_bits) + " bits");
    }
}

void PlacementFractions::validate() const {
    if ((int)x.size() != num_dbs)
        throw ParameterError("placement fractions must have one entry per subset size 1..N");
    Rational total = 0;
    for (int l = 1; l <= num_dbs; ++l) {
        if (x[l - 1] < 0) throw ParameterError("placement fractions must be nonnegative");
        total += Rational(binomial(num_dbs, l)) * x[l - 1];
    }
    if (total != 1)
        throw ParameterError("placement fractions must satisfy sum_l C(N,l) x_l = 1, got " +
                             to_string(total));
}

bool PlacementFractions::fits_storage(const Rational& mu) const {
    Rational used = 0;
    for (int l = 1; l <= num_dbs; ++l)
        used += Rational(l) * Rational(binomial(num_dbs, l)) * x[l - 1];
    return used <= mu * num_dbs;
}

PlacementFractions placement_fractions(const SubmessageTable& table) {
    table.validate();
    const Parameters& p = table.params;
    PlacementFractions f;
    f.num_dbs = p.num_dbs;
    f.x.assign(p.num_dbs, Rational(0));
    // x_l = (1 / (K * C(N,l))) * sum over chunks at subset size l of |chunk|/L.
    // Scheme tables place everything at l = t; the loop still reads sizes from
    // the table so the identity is computed, not assumed.
    Rational per_chunk_weight =
        Rational(1) / (Rational(p.num_messages) * Rational(binomial(p.num_dbs, p.subset_size)));
    for (const auto& row : table.chunks)
        for (const auto& c : row)
            f.x[p.subset_size - 1] +=
                per_chunk_weight * Rational(c.size()) / Rational(p.message_bits);
    f.validate();
    return f;
}

}  // namespace scpir
