#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scpir/errors.hpp"

namespace scpir {

// Packed GF(2) bit vector. Bits are addressed 0..size()-1; serialization
// packs 8 bits per byte, most significant bit first.
class BitVec {
  public:
    BitVec() = default;
    explicit BitVec(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    std::size_t size() const { return nbits_; }

    bool get(std::size_t i) const {
        check_index(i);
        return (words_[i >> 6] >> (i & 63)) & 1;
    }

    void set(std::size_t i, bool v) {
        check_index(i);
        uint64_t mask = uint64_t(1) << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    void xor_with(const BitVec& other) {
        if (other.nbits_ != nbits_) throw StructuralError("BitVec xor: size mismatch");
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    }

    bool operator==(const BitVec& other) const {
        return nbits_ == other.nbits_ && words_ == other.words_;
    }
    bool operator!=(const BitVec& other) const { return !(*this == other); }

    // MSB-first byte packing: bit i lands in byte i/8 under mask 0x80 >> (i%8).
    std::vector<uint8_t> to_bytes() const {
        std::vector<uint8_t> out((nbits_ + 7) / 8, 0);
        for (std::size_t i = 0; i < nbits_; ++i)
            if (get(i)) out[i >> 3] |= uint8_t(0x80u >> (i & 7));
        return out;
    }

    static BitVec from_bytes(const std::vector<uint8_t>& bytes, std::size_t nbits) {
        if (bytes.size() != (nbits + 7) / 8)
            throw StructuralError("BitVec from_bytes: byte count does not match bit count");
        BitVec v(nbits);
        for (std::size_t i = 0; i < nbits; ++i)
            if (bytes[i >> 3] & (0x80u >> (i & 7))) v.set(i, true);
        return v;
    }

  private:
    void check_index(std::size_t i) const {
        if (i >= nbits_) throw StructuralError("BitVec: index out of range");
    }

    std::size_t nbits_ = 0;
    std::vector<uint64_t> words_;
};

}  // namespace scpir
