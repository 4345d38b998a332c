#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <thread>

#include "scpir/harness.hpp"
#include "scpir/net.hpp"
#include "scpir/placement.hpp"

using namespace scpir;

namespace {

std::vector<StorageContent> build_storage(const Parameters& p, uint64_t seed) {
    return place(split_messages(
        p, make_messages(p.num_messages, p.message_bits,
                         MessageSource::seeded_random, seed)));
}

std::vector<uint8_t> request(uint8_t opcode, std::vector<uint8_t> body) {
    body.insert(body.begin(), opcode);
    return body;
}

struct RawClient {
    int fd = -1;
    explicit RawClient(uint16_t port) {
        addrinfo hints{}, *res = nullptr;
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        REQUIRE(::getaddrinfo("127.0.0.1", std::to_string(port).c_str(), &hints,
                              &res) == 0);
        fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        REQUIRE(fd >= 0);
        REQUIRE(::connect(fd, res->ai_addr, res->ai_addrlen) == 0);
        ::freeaddrinfo(res);
    }
    ~RawClient() {
        if (fd >= 0) ::close(fd);
    }
    std::vector<uint8_t> exchange(const std::vector<uint8_t>& payload) {
        write_frame(fd, payload);
        std::vector<uint8_t> reply;
        REQUIRE(read_frame(fd, reply));
        return reply;
    }
};

}  // namespace

TEST_CASE("endpoint parsing") {
    Endpoint e = parse_endpoint("127.0.0.1:8080");
    CHECK(e.host == "127.0.0.1");
    CHECK(e.port == 8080);
    CHECK(parse_endpoint("localhost:1").port == 1);
    CHECK_THROWS_AS(parse_endpoint("nocolon"), ParameterError);
    CHECK_THROWS_AS(parse_endpoint(":90"), ParameterError);
    CHECK_THROWS_AS(parse_endpoint("h:"), ParameterError);
    CHECK_THROWS_AS(parse_endpoint("h:abc"), ParameterError);
    CHECK_THROWS_AS(parse_endpoint("h:70000"), ParameterError);
    CHECK_THROWS_AS(parse_endpoint("h:0"), ParameterError);
}

TEST_CASE("framing round-trips and fails loudly on torn streams") {
    int pair[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, pair) == 0);

    std::vector<uint8_t> payload{1, 2, 3, 250};
    write_frame(pair[0], payload);
    write_frame(pair[0], {});  // empty frame is legal
    std::vector<uint8_t> got;
    REQUIRE(read_frame(pair[1], got));
    CHECK(got == payload);
    REQUIRE(read_frame(pair[1], got));
    CHECK(got.empty());

    // Clean close at a frame boundary reads as end-of-stream.
    ::close(pair[0]);
    CHECK_FALSE(read_frame(pair[1], got));
    ::close(pair[1]);

    // A frame cut short mid-payload is an error, not an EOF.
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, pair) == 0);
    const uint8_t torn[6] = {0, 0, 0, 9, 7, 7};  // promises 9 bytes, sends 2
    REQUIRE(::send(pair[0], torn, 6, 0) == 6);
    ::close(pair[0]);
    CHECK_THROWS_AS(read_frame(pair[1], got), ProtocolError);
    ::close(pair[1]);

    // An absurd length prefix is rejected before any allocation.
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, pair) == 0);
    const uint8_t huge[4] = {0xFF, 0xFF, 0xFF, 0xFF};
    REQUIRE(::send(pair[0], huge, 4, 0) == 4);
    CHECK_THROWS_AS(read_frame(pair[1], got), ProtocolError);
    ::close(pair[0]);
    ::close(pair[1]);
}

TEST_CASE("server answers queries exactly as the in-process evaluator") {
    Parameters p = make_parameters(3, 3, 2);
    auto storage = build_storage(p, 77);
    DatabaseServer server(storage[1]);
    REQUIRE(server.port() != 0);
    Endpoint ep{"127.0.0.1", server.port()};

    ServerInfo info = remote_info(ep);
    CHECK(info.num_dbs == 3);
    CHECK(info.num_messages == 3);
    CHECK(info.subset_size == 2);
    CHECK(info.db_index == 1);
    CHECK(info.storage_bits == storage_usage(storage[1]));

    for (int d = 0; d < 3; ++d) {
        QueryPlan plan = build_query_plan(p, d, sample_permutations(p, 100 + d));
        Answer local = evaluate_answer(plan.queries[1], storage[1]);
        Answer remote = query_remote(ep, plan.queries[1]);
        CHECK(remote.bits == local.bits);
        CHECK(remote.db_index == 1);
    }
}

TEST_CASE("malformed requests earn error frames and the connection survives") {
    Parameters p = make_parameters(3, 2, 2);
    auto storage = build_storage(p, 5);
    DatabaseServer server(storage[0]);
    RawClient client(server.port());

    // Unknown opcode.
    auto reply = client.exchange({9, 9, 9});
    REQUIRE_FALSE(reply.empty());
    CHECK(reply[0] == 1);

    // Truncated query body.
    QueryPlan plan = build_query_plan(p, 0, sample_permutations(p, 5));
    auto body = encode_query(plan.queries[0]);
    reply = client.exchange(request(1, {body.begin(), body.end() - 3}));
    REQUIRE_FALSE(reply.empty());
    CHECK(reply[0] != 0);

    // A query for chunks this database does not hold.
    QueryPlan other = build_query_plan(p, 0, sample_permutations(p, 5));
    reply = client.exchange(request(1, encode_query(other.queries[2])));
    REQUIRE_FALSE(reply.empty());
    CHECK(reply[0] == 2);
    CHECK(std::string(reply.begin() + 1, reply.end()).find("label") !=
          std::string::npos);

    // Same connection, now a well-formed query: still served.
    reply = client.exchange(request(1, body));
    REQUIRE_FALSE(reply.empty());
    CHECK(reply[0] == 0);
    Answer expect = evaluate_answer(plan.queries[0], storage[0]);
    Answer got = decode_answer({reply.begin() + 1, reply.end()}, 0,
                               plan.queries[0].requests.size());
    CHECK(got.bits == expect.bits);
}

TEST_CASE("a placement file can be served directly") {
    Parameters p = make_parameters(3, 2, 2);
    auto msgs = make_messages(2, p.message_bits, MessageSource::seeded_random, 31);
    SubmessageTable table = split_messages(p, msgs);
    std::string path = "served_placement.bin";
    save_placement_file(table, path);

    auto loaded = place(load_placement_file(path));
    DatabaseServer server(loaded[2]);
    Endpoint ep{"127.0.0.1", server.port()};
    CHECK(remote_info(ep).db_index == 2);

    QueryPlan plan = build_query_plan(p, 1, sample_permutations(p, 8));
    Answer remote = query_remote(ep, plan.queries[2]);
    CHECK(remote.bits == evaluate_answer(plan.queries[2], loaded[2]).bits);
    std::remove(path.c_str());
}

TEST_CASE("networked trial matches the in-process trial bit for bit") {
    Parameters p = make_parameters(3, 3, 2);
    const uint64_t seed = 99;
    auto storage = build_storage(p, seed);
    std::vector<std::unique_ptr<DatabaseServer>> servers;
    TrialConfig net_cfg;
    net_cfg.num_dbs = 3;
    net_cfg.num_messages = 3;
    net_cfg.subset_size = 2;
    net_cfg.desired_index = -1;
    net_cfg.seed = seed;
    net_cfg.mode = TrialMode::net;
    for (int db = 0; db < 3; ++db) {
        servers.push_back(std::make_unique<DatabaseServer>(storage[db]));
        net_cfg.endpoints.push_back(Endpoint{"127.0.0.1", servers[db]->port()});
    }

    TrialConfig local_cfg = net_cfg;
    local_cfg.mode = TrialMode::inproc;
    local_cfg.endpoints.clear();

    TrialReport net = run_trial(net_cfg);
    TrialReport local = run_trial(local_cfg);
    CHECK(net.cost == local.cost);
    CHECK(net.downloaded_per_db == local.downloaded_per_db);
    CHECK(net.storage_bits_per_db == local.storage_bits_per_db);
    CHECK(net.decode_exact);
    REQUIRE(net.decoded.size() == local.decoded.size());
    for (std::size_t i = 0; i < net.decoded.size(); ++i)
        CHECK(net.decoded[i] == local.decoded[i]);
}

TEST_CASE("trial rejects endpoints serving the wrong parameters") {
    Parameters p = make_parameters(3, 2, 2);
    auto storage = build_storage(p, 1);
    DatabaseServer s0(storage[0]);
    DatabaseServer s1(storage[1]);
    DatabaseServer s2(storage[2]);

    TrialConfig cfg;
    cfg.num_dbs = 3;
    cfg.num_messages = 2;
    cfg.subset_size = 2;
    cfg.desired_index = 0;
    cfg.seed = 1;
    cfg.mode = TrialMode::net;
    // Databases wired up in the wrong order.
    cfg.endpoints = {Endpoint{"127.0.0.1", s1.port()},
                     Endpoint{"127.0.0.1", s0.port()},
                     Endpoint{"127.0.0.1", s2.port()}};
    CHECK_THROWS_AS(run_trial(cfg), ProtocolError);
}

TEST_CASE("concurrent clients all decode exactly") {
    Parameters p = make_parameters(3, 3, 2);
    const uint64_t seed = 12;
    auto msgs = make_messages(3, p.message_bits, MessageSource::seeded_random, seed);
    auto storage = place(split_messages(p, msgs));
    std::vector<std::unique_ptr<DatabaseServer>> servers;
    std::vector<Endpoint> eps;
    for (int db = 0; db < 3; ++db) {
        servers.push_back(std::make_unique<DatabaseServer>(storage[db]));
        eps.push_back(Endpoint{"127.0.0.1", servers[db]->port()});
    }

    std::vector<int> ok(8, 0);
    std::vector<std::thread> clients;
    for (int c = 0; c < 8; ++c)
        clients.emplace_back([&, c] {
            int desired = c % 3;
            QueryPlan plan =
                build_query_plan(p, desired, sample_permutations(p, 1000 + c));
            std::vector<Answer> answers;
            for (int db = 0; db < 3; ++db)
                answers.push_back(query_remote(eps[db], plan.queries[db]));
            ok[c] = decode_message(plan, answers) == msgs[desired] ? 1 : 0;
        });
    for (auto& t : clients) t.join();
    for (int c = 0; c < 8; ++c) CHECK(ok[c] == 1);
}

TEST_CASE("networked sweep equals the in-process sweep byte for byte") {
    auto grid = sweep_grid(3, 2);
    std::string local = sweep_to_csv(sweep(3, 3, grid, 6, TrialMode::inproc));
    std::string net = sweep_to_csv(sweep(3, 3, grid, 6, TrialMode::net));
    CHECK(local == net);
    CHECK(local.find(",1\n") == std::string::npos);  // no violations anywhere
}

TEST_CASE("server stop is idempotent and unblocks clients") {
    Parameters p = make_parameters(2, 2, 2);
    auto storage = build_storage(p, 3);
    auto server = std::make_unique<DatabaseServer>(storage[0]);
    Endpoint ep{"127.0.0.1", server->port()};
    CHECK(remote_info(ep).num_dbs == 2);
    server->stop();
    server->stop();
    CHECK_THROWS_AS(remote_info(ep), ProtocolError);
}
