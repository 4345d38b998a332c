#pragma once

#include <string>
#include <vector>

#include "scpir/core_model.hpp"

namespace scpir {

// Splits each L-bit message into C(N,t) chunks of t^K bits, assigned to
// subset labels in lexicographic rank order: chunk (k, rank) holds message
// bits [rank*t^K, (rank+1)*t^K). Throws StructuralError when the message
// count or any length is wrong.
SubmessageTable split_messages(const Parameters& params, const std::vector<BitVec>& messages);

// Inverse of the split for one message.
BitVec reassemble_message(const SubmessageTable& table, int message);

// Replicates each chunk onto exactly the databases its label names.
std::vector<StorageContent> place(const SubmessageTable& table);

// Bits stored on one database. Scheme placements use the budget exactly:
// K * C(N-1, t-1) * t^K = mu * K * L.
uint64_t storage_usage(const StorageContent& storage);

// Binary placement file: header N, K, t as unsigned 32-bit big-endian, then
// chunks in (message, label-rank) order, each chunk bit-packed MSB-first into
// its own ceil(t^K / 8) bytes.
std::vector<uint8_t> placement_file_bytes(const SubmessageTable& table);
SubmessageTable parse_placement_file(const std::vector<uint8_t>& bytes);
void save_placement_file(const SubmessageTable& table, const std::string& path);
SubmessageTable load_placement_file(const std::string& path);

}  // namespace scpir
