#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scpir/bounds.hpp"
#include "scpir/core_model.hpp"
#include "scpir/net.hpp"
#include "scpir/rational.hpp"

namespace scpir {

enum class MessageSource { seeded_random, all_zero, from_file };

enum class TrialMode { inproc, net };

struct TrialConfig {
    int num_dbs = 0;
    int num_messages = 0;
    int subset_size = 0;
    int desired_index = -1;  // -1: retrieve every message in turn
    uint64_t seed = 0;
    MessageSource source = MessageSource::seeded_random;
    std::string message_file;         // source == from_file
    TrialMode mode = TrialMode::inproc;
    std::vector<Endpoint> endpoints;  // mode == net: one per database, in order
};

// Report of one end-to-end run: pure scheme or memory-sharing composite.
// Every count is exact; cost = downloaded_total / desired_bits.
struct TrialReport {
    int num_dbs = 0;
    int num_messages = 0;
    Rational mu;                // storage level exercised
    uint64_t message_bits = 0;  // bits per message (composite: blended length)
    uint64_t downloaded_total = 0;
    std::vector<uint64_t> downloaded_per_db;
    uint64_t desired_bits = 0;
    Rational cost;
    Rational expected_cost;  // closed form for this storage level
    bool decode_exact = false;
    bool shape_invariant = false;
    uint64_t storage_bits_per_db = 0;
    // Memory-sharing composition: copies of the floor(muN) scheme and of the
    // next corner's scheme (pure trials: 1 and 0).
    uint64_t copies_low = 1;
    uint64_t copies_high = 0;
    int subset_low = 0;
    int subset_high = 0;
    std::vector<BitVec> decoded;  // one per retrieved message
    double wall_seconds = 0.0;
};

// Deterministic message library for (source, seed): num_messages messages of
// message_bits each. from_file reads num_messages byte-aligned bitstrings of
// ceil(message_bits/8) bytes each, MSB first.
std::vector<BitVec> make_messages(int num_messages, uint64_t message_bits,
                                  MessageSource source, uint64_t seed,
                                  const std::string& path = "");

// Full pipeline at a corner storage level t/N: placement, query, answer
// (in-process or over sockets), decode, exact accounting.
TrialReport run_trial(const TrialConfig& cfg);

// Memory sharing between corners floor(muN)/N and (floor(muN)+1)/N: each
// message is a blend of `copies_low` instances of the lower scheme and
// `copies_high` of the upper one, minimal integers realizing the blend
// exactly. Requires mu strictly between two corners (use run_trial at a
// corner) and caps either copy count at 10^6. cfg.subset_size is ignored;
// composite trials are in-process.
TrialReport run_memory_sharing(const TrialConfig& cfg, const Rational& mu);

struct SweepRow {
    Rational mu;
    Rational achievable;  // memory-sharing hull of the scheme corners
    Rational converse;    // max over the closed-form segment lines
    Rational lp;          // exact-rational LP optimum
    bool has_measured = false;
    Rational measured;  // run_trial cost when mu is a corner t/N
    bool decode_exact = true;
    bool violation = false;  // any disagreement among the columns above
};

struct SweepResult {
    int num_dbs = 0;
    int num_messages = 0;
    std::vector<SweepRow> rows;
    bool any_violation = false;
};

// Evaluates achievable/converse/LP on the grid and measures live trials at
// every corner contained in it. In net mode the measured trials run against
// freshly started local servers, one trio per corner, through real sockets.
SweepResult sweep(int num_dbs, int num_messages, const std::vector<Rational>& grid,
                  uint64_t seed, TrialMode mode = TrialMode::inproc);

// Corner points t/N plus `extra` evenly spaced interior points.
std::vector<Rational> sweep_grid(int num_dbs, int extra);

std::string sweep_to_csv(const SweepResult& result);

}  // namespace scpir
