#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "scpir/pir_protocol.hpp"
#include "scpir/rational.hpp"

namespace scpir {

// Canonical text form of one database's query: one line per request,
// "block:stage:(msg,label,pos)(msg,label,pos)...", terms sorted within the
// request, requests sorted by (block, stage, terms). Two queries addressing
// the same content canonicalize identically whatever order they were built
// in.
std::string canonical_query(const Query& query);

// Same, with positions stripped: "block:stage:{m1,m2,...}" per request.
// This is everything a database can see before the random relabeling of
// positions comes into play.
std::string shape_fingerprint(const Query& query);

// Exact distribution of the canonical query received by one database over
// the client's random permutations, for a fixed desired message. The query
// depends on each visible chunk's permutation only through its values on
// the positions the client actually consumes, so the enumeration runs over
// injections of those consumed sets into [0, t^K) rather than whole
// permutations. Throws ScaleError when the number of injection tuples
// exceeds 10^7; use verify_privacy_sampled beyond that.
std::map<std::string, Rational> exact_query_distribution(
    const Parameters& params, int db_index, int desired_index,
    SchemeVariant variant = SchemeVariant::standard);

struct PrivacyReport {
    bool pass = false;
    bool vacuous = false;  // statistic had a single bin (nothing to compare)
    std::string mode;      // "exact" or "sampled"
    int db_index = -1;

    // sampled mode
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
    uint64_t categories = 0;
    uint64_t trials = 0;

    // exact-mode failure evidence: one differing canonical query and its
    // probability under each desired index, or the differing shapes.
    std::string witness;
};

// Exact audit: the query distribution must be identical, as exact
// rationals, for every desired index. A shape mismatch (which already
// breaks privacy) short-circuits before any enumeration.
PrivacyReport verify_privacy_exact(const Parameters& params, int db_index,
                                   SchemeVariant variant = SchemeVariant::standard);

// Statistical audit for parameters beyond exact enumeration: draws `trials`
// independent query plans per desired index (seeds derived from `seed`,
// distinct per index and trial), bins a shape + positional fingerprint of
// the database's query, and runs a chi-square homogeneity test across
// desired indices. Passes iff p >= alpha. A single observed bin is a
// vacuous pass, flagged.
PrivacyReport verify_privacy_sampled(const Parameters& params, int db_index,
                                     uint64_t trials, uint64_t seed,
                                     double alpha = 0.01,
                                     SchemeVariant variant = SchemeVariant::standard);

}  // namespace scpir
