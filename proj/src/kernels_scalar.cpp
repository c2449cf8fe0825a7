#include "mspace/bits.hpp"

namespace msp::kern {

static void s_maj3(const uint64_t* a, const uint64_t* b, const uint64_t* c,
                   uint64_t* out, size_t n) {
    for (size_t i = 0; i < n; ++i)
        out[i] = (a[i] & b[i]) | (b[i] & c[i]) | (c[i] & a[i]);
}

static void s_xor2(const uint64_t* a, const uint64_t* b, uint64_t* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] ^ b[i];
}

static uint64_t s_andnot_pop(const uint64_t* a, const uint64_t* b, size_t n) {
    uint64_t s = 0;
    for (size_t i = 0; i < n; ++i) s += __builtin_popcountll(a[i] & ~b[i]);
    return s;
}

static uint64_t s_xor_pop(const uint64_t* a, const uint64_t* b, size_t n) {
    uint64_t s = 0;
    for (size_t i = 0; i < n; ++i) s += __builtin_popcountll(a[i] ^ b[i]);
    return s;
}

static bool s_subset(const uint64_t* a, const uint64_t* b, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (a[i] & ~b[i]) return false;
    return true;
}

const Ops& scalar_ops() {
    static const Ops ops{"scalar", s_maj3, s_xor2, s_andnot_pop, s_xor_pop, s_subset};
    return ops;
}

}  // namespace msp::kern
