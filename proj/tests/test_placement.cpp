#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "scpir/placement.hpp"

using namespace scpir;

namespace {

std::vector<BitVec> random_messages(const Parameters& p, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<BitVec> msgs;
    for (int k = 0; k < p.num_messages; ++k) {
        BitVec m(p.message_bits);
        for (uint64_t i = 0; i < p.message_bits; ++i) m.set(i, rng() & 1);
        msgs.push_back(std::move(m));
    }
    return msgs;
}

}  // namespace

TEST_CASE("split assigns message slices to chunks in label-rank order") {
    Parameters p = make_parameters(3, 3, 2);
    auto msgs = random_messages(p, 42);
    SubmessageTable table = split_messages(p, msgs);
    REQUIRE(table.chunks.size() == 3);
    for (int k = 0; k < 3; ++k) {
        REQUIRE(table.chunks[k].size() == 3);
        for (int r = 0; r < 3; ++r) {
            REQUIRE(table.chunks[k][r].size() == 8);
            for (int i = 0; i < 8; ++i)
                CHECK(table.chunks[k][r].get(i) == msgs[k].get(8 * r + i));
        }
    }
}

TEST_CASE("full replication uses a single chunk per message") {
    Parameters p = make_parameters(3, 2, 3);
    auto msgs = random_messages(p, 1);
    SubmessageTable table = split_messages(p, msgs);
    for (int k = 0; k < 2; ++k) {
        REQUIRE(table.chunks[k].size() == 1);
        CHECK(table.chunks[k][0] == msgs[k]);
    }
}

TEST_CASE("split/reassemble round-trips") {
    for (int n = 1; n <= 4; ++n)
        for (int t = 1; t <= n; ++t) {
            Parameters p = make_parameters(n, 3, t);
            auto msgs = random_messages(p, 100 * n + t);
            SubmessageTable table = split_messages(p, msgs);
            for (int k = 0; k < 3; ++k) CHECK(reassemble_message(table, k) == msgs[k]);
        }
}

TEST_CASE("split validates message shapes") {
    Parameters p = make_parameters(3, 3, 2);
    auto msgs = random_messages(p, 0);
    msgs.pop_back();
    CHECK_THROWS_AS(split_messages(p, msgs), StructuralError);
    msgs.push_back(BitVec(23));
    CHECK_THROWS_AS(split_messages(p, msgs), StructuralError);
}

TEST_CASE("place replicates each chunk on exactly its label") {
    Parameters p = make_parameters(3, 2, 2);
    auto msgs = random_messages(p, 5);
    SubmessageTable table = split_messages(p, msgs);
    auto dbs = place(table);
    REQUIRE(dbs.size() == 3);
    // Database 0 holds the chunks of labels {0,1} and {0,2} for both
    // messages and nothing of label {1,2}.
    for (int k = 0; k < 2; ++k) {
        CHECK(dbs[0].has(k, 0));
        CHECK(dbs[0].has(k, 1));
        CHECK_FALSE(dbs[0].has(k, 2));
        CHECK(dbs[0].at(k, 0) == table.chunks[k][0]);
    }
    CHECK_THROWS_AS(dbs[0].at(0, 2), ProtocolError);

    auto labels = subset_labels(3, 2);
    for (int n = 0; n < 3; ++n)
        for (int k = 0; k < 2; ++k)
            for (int r = 0; r < 3; ++r)
                CHECK(dbs[n].has(k, r) == label_contains(labels[r], n));
}

TEST_CASE("per-database storage equals the budget exactly") {
    // K * C(N-1, t-1) * t^K bits, which is mu*K*L.
    Parameters p332 = make_parameters(3, 3, 2);
    auto dbs = place(split_messages(p332, random_messages(p332, 7)));
    for (const auto& db : dbs) CHECK(storage_usage(db) == 48);

    Parameters p331 = make_parameters(3, 3, 1);
    for (const auto& db : place(split_messages(p331, random_messages(p331, 7))))
        CHECK(storage_usage(db) == 3);

    Parameters p422 = make_parameters(4, 2, 2);
    for (const auto& db : place(split_messages(p422, random_messages(p422, 7))))
        CHECK(storage_usage(db) == 24);

    for (int n = 1; n <= 6; ++n)
        for (int k = 1; k <= 4; ++k)
            for (int t = 1; t <= n; ++t) {
                Parameters p = make_parameters(n, k, t);
                auto placed = place(split_messages(p, random_messages(p, 11)));
                Rational budget = p.mu * p.num_messages * Rational(BigInt(p.message_bits));
                for (const auto& db : placed) {
                    CHECK(Rational(BigInt(storage_usage(db))) == budget);
                    uint64_t expect = (uint64_t)(binomial(n - 1, t - 1) *
                                                 BigInt(ipow(t, k)) * k)
                                          .convert_to<uint64_t>();
                    CHECK(storage_usage(db) == expect);
                }
            }
}

TEST_CASE("every message is fully covered by the union of all databases") {
    for (int n = 1; n <= 5; ++n)
        for (int t = 1; t <= n; ++t) {
            Parameters p = make_parameters(n, 2, t);
            auto msgs = random_messages(p, 3);
            auto dbs = place(split_messages(p, msgs));
            auto labels = subset_labels(n, t);
            for (int k = 0; k < 2; ++k)
                for (std::size_t r = 0; r < labels.size(); ++r) {
                    int holders = 0;
                    for (int d = 0; d < n; ++d)
                        if (dbs[d].has(k, (int)r)) ++holders;
                    CHECK(holders == t);
                }
        }
}

TEST_CASE("placement file round-trip and header layout") {
    Parameters p = make_parameters(3, 2, 2);
    auto msgs = random_messages(p, 9);
    SubmessageTable table = split_messages(p, msgs);
    auto bytes = placement_file_bytes(table);
    // 12-byte header + 2 messages * 3 chunks * 1 byte (4 bits rounds up).
    REQUIRE(bytes.size() == 12 + 6);
    CHECK(bytes[3] == 3);   // N
    CHECK(bytes[7] == 2);   // K
    CHECK(bytes[11] == 2);  // t
    CHECK(bytes[0] == 0);

    SubmessageTable back = parse_placement_file(bytes);
    CHECK(back.params.num_dbs == 3);
    CHECK(back.params.message_bits == p.message_bits);
    for (int k = 0; k < 2; ++k)
        for (int r = 0; r < 3; ++r) CHECK(back.chunks[k][r] == table.chunks[k][r]);

    std::string path = "placement_roundtrip.bin";
    save_placement_file(table, path);
    SubmessageTable loaded = load_placement_file(path);
    CHECK(loaded.chunks == table.chunks);
    std::remove(path.c_str());
}

TEST_CASE("placement file rejects corrupt input") {
    Parameters p = make_parameters(3, 2, 2);
    auto bytes = placement_file_bytes(split_messages(p, random_messages(p, 2)));
    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(parse_placement_file(truncated), StructuralError);
    auto padded = bytes;
    padded.push_back(0);
    CHECK_THROWS_AS(parse_placement_file(padded), StructuralError);
    std::vector<uint8_t> tiny(5, 0);
    CHECK_THROWS_AS(parse_placement_file(tiny), StructuralError);
    auto bad_header = bytes;
    bad_header[11] = 9;  // t > N
    CHECK_THROWS_AS(parse_placement_file(bad_header), ParameterError);
}
