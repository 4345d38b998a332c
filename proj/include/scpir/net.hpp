#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "scpir/core_model.hpp"
#include "scpir/pir_protocol.hpp"

namespace scpir {

// Wire protocol, one request/response pair per frame pair:
//   frame    = 4-byte big-endian payload length + payload (<= 16 MiB)
//   request  = opcode byte + body
//                opcode 1: body = encoded query        -> answer
//                opcode 2: empty body                  -> server info
//   response = status byte + body
//                status 0: body = encoded answer, or for info
//                          N,K,t,db as big-endian u32 then stored bit
//                          count as big-endian u64
//                status>0: body = UTF-8 error message (status mirrors the
//                          ProtocolError code; 3 = internal error)
// A malformed request body earns an error response; the connection stays up.

struct Endpoint {
    std::string host;
    uint16_t port = 0;
};

// "host:port"; numeric IPv4 or a resolvable name.
Endpoint parse_endpoint(const std::string& text);

void write_frame(int fd, const std::vector<uint8_t>& payload);
// Empty optional on clean end-of-stream at a frame boundary; throws
// ProtocolError on a frame cut short or oversized.
bool read_frame(int fd, std::vector<uint8_t>& payload);

struct ServerInfo {
    int num_dbs = 0;
    int num_messages = 0;
    int subset_size = 0;
    int db_index = 0;
    uint64_t storage_bits = 0;
};

// One database served over TCP. Handlers are stateless request processors
// over the read-only storage; each connection gets its own thread.
class DatabaseServer {
  public:
    // port 0 binds an ephemeral port; read it back with port().
    explicit DatabaseServer(StorageContent storage,
                            const std::string& host = "127.0.0.1",
                            uint16_t port = 0);
    ~DatabaseServer();
    DatabaseServer(const DatabaseServer&) = delete;
    DatabaseServer& operator=(const DatabaseServer&) = delete;

    uint16_t port() const { return port_; }
    int db_index() const;
    void stop();  // idempotent

    struct Shared;  // opaque; public so the connection handlers can hold it

  private:
    std::shared_ptr<Shared> shared_;
    std::thread accept_thread_;
    uint16_t port_ = 0;
};

// One-shot client calls: connect, exchange one frame pair, close.
Answer query_remote(const Endpoint& endpoint, const Query& query);
ServerInfo remote_info(const Endpoint& endpoint);

}  // namespace scpir
