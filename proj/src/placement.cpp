#include "scpir/placement.hpp"

#include <cstdio>
#include <fstream>

namespace scpir {

SubmessageTable split_messages(const Parameters& params, const std::vector<BitVec>& messages) {
    if ((int)messages.size() != params.num_messages)
        throw StructuralError("expected " + std::to_string(params.num_messages) +
                              " messages, got " + std::to_string(messages.size()));
    for (const auto& m : messages)
        if (m.size() != params.message_bits)
            throw StructuralError("every message must be exactly " +
                                  std::to_string(params.message_bits) + " bits, got " +
                                  std::to_string(m.size()));

    const uint64_t chunk_bits = ipow(params.subset_size, params.num_messages);
    const auto labels = subset_labels(params.num_dbs, params.subset_size);
    SubmessageTable table;
    table.params = params;
    table.chunks.assign(params.num_messages, {});
    for (int k = 0; k < params.num_messages; ++k) {
        table.chunks[k].reserve(labels.size());
        for (std::size_t r = 0; r < labels.size(); ++r) {
            BitVec chunk(chunk_bits);
            for (uint64_t i = 0; i < chunk_bits; ++i)
                chunk.set(i, messages[k].get(r * chunk_bits + i));
            table.chunks[k].push_back(std::move(chunk));
        }
    }
    table.validate();
    return table;
}

BitVec reassemble_message(const SubmessageTable& table, int message) {
    table.validate();
    if (message < 0 || message >= table.params.num_messages)
        throw ParameterError("message index out of range");
    const uint64_t chunk_bits =
        ipow(table.params.subset_size, table.params.num_messages);
    BitVec out(table.params.message_bits);
    for (std::size_t r = 0; r < table.chunks[message].size(); ++r)
        for (uint64_t i = 0; i < chunk_bits; ++i)
            out.set(r * chunk_bits + i, table.chunks[message][r].get(i));
    return out;
}

std::vector<StorageContent> place(const SubmessageTable& table) {
    table.validate();
    const Parameters& p = table.params;
    const auto labels = subset_labels(p.num_dbs, p.subset_size);
    std::vector<StorageContent> dbs(p.num_dbs);
    for (int n = 0; n < p.num_dbs; ++n) {
        dbs[n].params = p;
        dbs[n].db_index = n;
        dbs[n].chunks.assign(p.num_messages, std::vector<BitVec>(labels.size()));
        for (int k = 0; k < p.num_messages; ++k)
            for (std::size_t r = 0; r < labels.size(); ++r)
                if (label_contains(labels[r], n)) dbs[n].chunks[k][r] = table.chunks[k][r];
    }
    return dbs;
}

uint64_t storage_usage(const StorageContent& storage) {
    uint64_t bits = 0;
    for (const auto& row : storage.chunks)
        for (const auto& c : row) bits += c.size();
    return bits;
}

std::vector<uint8_t> placement_file_bytes(const SubmessageTable& table) {
    table.validate();
    const Parameters& p = table.params;
    std::vector<uint8_t> out;
    auto put_u32 = [&](uint32_t v) {
        out.push_back(uint8_t(v >> 24));
        out.push_back(uint8_t(v >> 16));
        out.push_back(uint8_t(v >> 8));
        out.push_back(uint8_t(v));
    };
    put_u32((uint32_t)p.num_dbs);
    put_u32((uint32_t)p.num_messages);
    put_u32((uint32_t)p.subset_size);
    for (const auto& row : table.chunks)
        for (const auto& c : row) {
            auto bytes = c.to_bytes();
            out.insert(out.end(), bytes.begin(), bytes.end());
        }
    return out;
}

SubmessageTable parse_placement_file(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 12) throw StructuralError("placement file shorter than its header");
    auto get_u32 = [&](std::size_t off) {
        return (uint32_t(bytes[off]) << 24) | (uint32_t(bytes[off + 1]) << 16) |
               (uint32_t(bytes[off + 2]) << 8) | uint32_t(bytes[off + 3]);
    };
    uint32_t n = get_u32(0), k = get_u32(4), t = get_u32(8);
    if (n > 64 || k > 64 || t > 64)
        throw StructuralError("placement file header out of supported range");
    Parameters p = make_parameters((int)n, (int)k, (int)t);
    const uint64_t chunk_bits = ipow(p.subset_size, p.num_messages);
    const std::size_t chunk_bytes = (std::size_t)(chunk_bits + 7) / 8;
    const std::size_t n_labels = subset_labels(p.num_dbs, p.subset_size).size();
    const std::size_t expect = 12 + (std::size_t)p.num_messages * n_labels * chunk_bytes;
    if (bytes.size() != expect)
        throw StructuralError("placement file has " + std::to_string(bytes.size()) +
                              " bytes, expected " + std::to_string(expect));
    SubmessageTable table;
    table.params = p;
    table.chunks.assign(p.num_messages, {});
    std::size_t off = 12;
    for (int m = 0; m < p.num_messages; ++m)
        for (std::size_t r = 0; r < n_labels; ++r) {
            std::vector<uint8_t> cb(bytes.begin() + off, bytes.begin() + off + chunk_bytes);
            table.chunks[m].push_back(BitVec::from_bytes(cb, chunk_bits));
            off += chunk_bytes;
        }
    return table;
}

void save_placement_file(const SubmessageTable& table, const std::string& path) {
    auto bytes = placement_file_bytes(table);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StructuralError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), (std::streamsize)bytes.size());
    if (!out) throw StructuralError("short write to " + path);
}

SubmessageTable load_placement_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StructuralError("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return parse_placement_file(bytes);
}

}  // namespace scpir
