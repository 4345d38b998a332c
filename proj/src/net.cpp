#include "scpir/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <mutex>
#include <set>

#include "scpir/errors.hpp"

namespace scpir {

namespace {

constexpr uint32_t kMaxFrame = 16u << 20;

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd(o.fd) { o.fd = -1; }
    ~Fd() {
        if (fd >= 0) ::close(fd);
    }
    int release() {
        int f = fd;
        fd = -1;
        return f;
    }
};

void send_all(int fd, const uint8_t* data, std::size_t len) {
    while (len > 0) {
        ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
        if (n <= 0) throw ProtocolError("socket write failed", 3);
        data += n;
        len -= (std::size_t)n;
    }
}

// false on clean end-of-stream before the first byte.
bool recv_all(int fd, uint8_t* data, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, data + got, len - got, 0);
        if (n == 0) {
            if (got == 0) return false;
            throw ProtocolError("stream ended inside a frame", 3);
        }
        if (n < 0) throw ProtocolError("socket read failed", 3);
        got += (std::size_t)n;
    }
    return true;
}

uint32_t be32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) |
           uint32_t(p[3]);
}

void put32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back((uint8_t)(v >> 24));
    out.push_back((uint8_t)(v >> 16));
    out.push_back((uint8_t)(v >> 8));
    out.push_back((uint8_t)v);
}

Fd connect_to(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string port = std::to_string(ep.port);
    if (::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res) != 0 || !res)
        throw ProtocolError("cannot resolve " + ep.host, 3);
    Fd fd(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
    int ok = fd.fd >= 0 ? ::connect(fd.fd, res->ai_addr, res->ai_addrlen) : -1;
    ::freeaddrinfo(res);
    if (ok != 0)
        throw ProtocolError("cannot connect to " + ep.host + ":" + port, 3);
    return fd;
}

// Exchange one request frame for one response frame and unwrap the status.
std::vector<uint8_t> call(const Endpoint& ep, const std::vector<uint8_t>& request) {
    Fd fd = connect_to(ep);
    write_frame(fd.fd, request);
    std::vector<uint8_t> response;
    if (!read_frame(fd.fd, response))
        throw ProtocolError("server closed the connection without answering", 3);
    if (response.empty()) throw ProtocolError("empty response frame", 3);
    if (response[0] != 0)
        throw ProtocolError("server error: " +
                                std::string(response.begin() + 1, response.end()),
                            response[0]);
    return {response.begin() + 1, response.end()};
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw ParameterError("endpoint must be host:port, got '" + text + "'");
    Endpoint ep;
    ep.host = text.substr(0, colon);
    int port = 0;
    for (char c : text.substr(colon + 1)) {
        if (c < '0' || c > '9') throw ParameterError("endpoint port must be numeric");
        port = port * 10 + (c - '0');
        if (port > 65535) throw ParameterError("endpoint port out of range");
    }
    if (port == 0) throw ParameterError("endpoint port out of range");
    ep.port = (uint16_t)port;
    return ep;
}

void write_frame(int fd, const std::vector<uint8_t>& payload) {
    if (payload.size() > kMaxFrame) throw ProtocolError("frame too large", 3);
    uint8_t head[4] = {(uint8_t)(payload.size() >> 24), (uint8_t)(payload.size() >> 16),
                       (uint8_t)(payload.size() >> 8), (uint8_t)payload.size()};
    send_all(fd, head, 4);
    if (!payload.empty()) send_all(fd, payload.data(), payload.size());
}

bool read_frame(int fd, std::vector<uint8_t>& payload) {
    uint8_t head[4];
    if (!recv_all(fd, head, 4)) return false;
    uint32_t len = be32(head);
    if (len > kMaxFrame) throw ProtocolError("frame too large", 3);
    payload.resize(len);
    if (len > 0 && !recv_all(fd, payload.data(), len))
        throw ProtocolError("stream ended inside a frame", 3);
    return true;
}

struct DatabaseServer::Shared {
    StorageContent storage;
    std::mutex mutex;
    bool running = true;
    int listen_fd = -1;
    std::set<int> conns;
    std::vector<std::thread> workers;
};

namespace {

std::vector<uint8_t> handle_request(const StorageContent& storage,
                                    const std::vector<uint8_t>& request) {
    std::vector<uint8_t> out;
    try {
        if (request.empty()) throw ProtocolError("empty request", 1);
        if (request[0] == 1) {
            std::vector<uint8_t> body(request.begin() + 1, request.end());
            Query query = decode_query(body, storage.params, storage.db_index);
            Answer answer = evaluate_answer(query, storage);
            out.push_back(0);
            auto bits = encode_answer(answer);
            out.insert(out.end(), bits.begin(), bits.end());
            return out;
        }
        if (request[0] == 2) {
            out.push_back(0);
            put32(out, (uint32_t)storage.params.num_dbs);
            put32(out, (uint32_t)storage.params.num_messages);
            put32(out, (uint32_t)storage.params.subset_size);
            put32(out, (uint32_t)storage.db_index);
            uint64_t bits = 0;
            for (const auto& row : storage.chunks)
                for (const auto& chunk : row) bits += chunk.size();
            put32(out, (uint32_t)(bits >> 32));
            put32(out, (uint32_t)bits);
            return out;
        }
        throw ProtocolError("unknown opcode", 1);
    } catch (const ProtocolError& e) {
        out.clear();
        out.push_back(e.code > 0 && e.code < 256 ? (uint8_t)e.code : 3);
        const char* msg = e.what();
        out.insert(out.end(), msg, msg + std::strlen(msg));
    } catch (const std::exception& e) {
        out.clear();
        out.push_back(3);
        const char* msg = e.what();
        out.insert(out.end(), msg, msg + std::strlen(msg));
    }
    return out;
}

void serve_connection(std::shared_ptr<DatabaseServer::Shared> shared, int fd) {
    try {
        std::vector<uint8_t> request;
        while (read_frame(fd, request))
            write_frame(fd, handle_request(shared->storage, request));
    } catch (const std::exception&) {
        // Framing violation or torn connection: drop the peer.
    }
    std::lock_guard<std::mutex> lock(shared->mutex);
    shared->conns.erase(fd);
    ::close(fd);
}

}  // namespace

DatabaseServer::DatabaseServer(StorageContent storage, const std::string& host,
                               uint16_t port)
    : shared_(std::make_shared<Shared>()) {
    shared_->storage = std::move(storage);

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    std::string port_text = std::to_string(port);
    if (::getaddrinfo(host.c_str(), port_text.c_str(), &hints, &res) != 0 || !res)
        throw ProtocolError("cannot resolve listen host " + host, 3);
    Fd fd(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
    int one = 1;
    if (fd.fd >= 0) ::setsockopt(fd.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    int ok = fd.fd >= 0 ? ::bind(fd.fd, res->ai_addr, res->ai_addrlen) : -1;
    ::freeaddrinfo(res);
    if (ok != 0 || ::listen(fd.fd, 64) != 0)
        throw ProtocolError("cannot listen on " + host + ":" + port_text, 3);

    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd.fd, (sockaddr*)&addr, &len) != 0)
        throw ProtocolError("cannot read bound port", 3);
    port_ = ntohs(addr.sin_port);

    int listen_fd = fd.release();
    shared_->listen_fd = listen_fd;
    auto shared = shared_;
    accept_thread_ = std::thread([shared, listen_fd] {
        while (true) {
            int conn = ::accept(listen_fd, nullptr, nullptr);
            if (conn < 0) break;  // listener shut down
            std::lock_guard<std::mutex> lock(shared->mutex);
            if (!shared->running) {
                ::close(conn);
                break;
            }
            shared->conns.insert(conn);
            shared->workers.emplace_back(serve_connection, shared, conn);
        }
        ::close(listen_fd);
    });
}

int DatabaseServer::db_index() const { return shared_->storage.db_index; }

void DatabaseServer::stop() {
    std::vector<std::thread> workers;
    {
        std::lock_guard<std::mutex> lock(shared_->mutex);
        if (!shared_->running) return;
        shared_->running = false;
        ::shutdown(shared_->listen_fd, SHUT_RDWR);
        for (int fd : shared_->conns) ::shutdown(fd, SHUT_RDWR);
        workers.swap(shared_->workers);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    for (auto& w : workers) w.join();
}

DatabaseServer::~DatabaseServer() { stop(); }

Answer query_remote(const Endpoint& endpoint, const Query& query) {
    std::vector<uint8_t> request{1};
    auto body = encode_query(query);
    request.insert(request.end(), body.begin(), body.end());
    auto reply = call(endpoint, request);
    return decode_answer(reply, query.db_index, query.requests.size());
}

ServerInfo remote_info(const Endpoint& endpoint) {
    auto reply = call(endpoint, std::vector<uint8_t>{2});
    if (reply.size() != 24) throw ProtocolError("malformed info response", 3);
    ServerInfo info;
    info.num_dbs = (int)be32(reply.data());
    info.num_messages = (int)be32(reply.data() + 4);
    info.subset_size = (int)be32(reply.data() + 8);
    info.db_index = (int)be32(reply.data() + 12);
    info.storage_bits = (uint64_t(be32(reply.data() + 16)) << 32) | be32(reply.data() + 20);
    return info;
}

}  // namespace scpir
