#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace msp {

// Plain bit vector. The word-level inner loops live in kern:: so the scalar
// and AVX2 variants can be swapped at runtime and cross-checked.
struct Bits {
    std::vector<uint64_t> w;
    size_t nbits = 0;

    Bits() = default;
    explicit Bits(size_t n) : w((n + 63) / 64, 0), nbits(n) {}

    bool get(size_t i) const { return (w[i >> 6] >> (i & 63)) & 1u; }
    void set(size_t i) { w[i >> 6] |= uint64_t(1) << (i & 63); }
    void clear(size_t i) { w[i >> 6] &= ~(uint64_t(1) << (i & 63)); }
    void assign(size_t i, bool v) { v ? set(i) : clear(i); }
    void flip(size_t i) { w[i >> 6] ^= uint64_t(1) << (i & 63); }
    size_t words() const { return w.size(); }

    bool operator==(const Bits& o) const { return nbits == o.nbits && w == o.w; }
    bool operator<(const Bits& o) const {
        if (nbits != o.nbits) return nbits < o.nbits;
        return w < o.w;
    }

    // Visits set bit positions in ascending order.
    template <class F>
    void for_each_set(F&& f) const {
        for (size_t wi = 0; wi < w.size(); ++wi) {
            uint64_t x = w[wi];
            while (x) {
                unsigned b = __builtin_ctzll(x);
                f(wi * 64 + b);
                x &= x - 1;
            }
        }
    }
};

namespace kern {

// Word-array kernels. All arrays have the same length n (in 64-bit words).
struct Ops {
    const char* name;
    // out = majority(a, b, c) bitwise
    void (*maj3)(const uint64_t* a, const uint64_t* b, const uint64_t* c,
                 uint64_t* out, size_t n);
    // out = a ^ b
    void (*xor2)(const uint64_t* a, const uint64_t* b, uint64_t* out, size_t n);
    // popcount(a & ~b)
    uint64_t (*andnot_pop)(const uint64_t* a, const uint64_t* b, size_t n);
    // popcount(a ^ b)
    uint64_t (*xor_pop)(const uint64_t* a, const uint64_t* b, size_t n);
    // a & ~b == 0, i.e. a subset of b
    bool (*subset)(const uint64_t* a, const uint64_t* b, size_t n);
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when unsupported by the CPU

// Active backend: "auto" picks AVX2 when available.
const Ops& ops();
void force_backend(const char* name);  // "auto" | "scalar" | "avx2"

}  // namespace kern

inline void bits_maj3(const Bits& a, const Bits& b, const Bits& c, Bits& out) {
    kern::ops().maj3(a.w.data(), b.w.data(), c.w.data(), out.w.data(), a.words());
}
inline void bits_xor(const Bits& a, const Bits& b, Bits& out) {
    kern::ops().xor2(a.w.data(), b.w.data(), out.w.data(), a.words());
}
inline uint64_t bits_xor_pop(const Bits& a, const Bits& b) {
    return kern::ops().xor_pop(a.w.data(), b.w.data(), a.words());
}
inline bool bits_subset(const Bits& a, const Bits& b) {
    return kern::ops().subset(a.w.data(), b.w.data(), a.words());
}
inline uint64_t bits_andnot_pop(const Bits& a, const Bits& b) {
    return kern::ops().andnot_pop(a.w.data(), b.w.data(), a.words());
}

}  // namespace msp
