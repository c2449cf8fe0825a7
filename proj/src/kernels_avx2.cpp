// Compiled with -mavx2 (see CMakeLists); only ever called after a runtime
// CPU feature check in kernels.cpp.
#if defined(__AVX2__)

#include <immintrin.h>

#include "mspace/bits.hpp"

namespace msp::kern {

static void a_maj3(const uint64_t* a, const uint64_t* b, const uint64_t* c,
                   uint64_t* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        __m256i vc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c + i));
        __m256i r = _mm256_or_si256(
            _mm256_or_si256(_mm256_and_si256(va, vb), _mm256_and_si256(vb, vc)),
            _mm256_and_si256(vc, va));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), r);
    }
    for (; i < n; ++i) out[i] = (a[i] & b[i]) | (b[i] & c[i]) | (c[i] & a[i]);
}

static void a_xor2(const uint64_t* a, const uint64_t* b, uint64_t* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i),
                            _mm256_xor_si256(va, vb));
    }
    for (; i < n; ++i) out[i] = a[i] ^ b[i];
}

static uint64_t a_andnot_pop(const uint64_t* a, const uint64_t* b, size_t n) {
    uint64_t s = 0;
    size_t i = 0;
    alignas(32) uint64_t tmp[4];
    for (; i + 4 <= n; i += 4) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        _mm256_store_si256(reinterpret_cast<__m256i*>(tmp),
                           _mm256_andnot_si256(vb, va));
        s += __builtin_popcountll(tmp[0]) + __builtin_popcountll(tmp[1]) +
             __builtin_popcountll(tmp[2]) + __builtin_popcountll(tmp[3]);
    }
    for (; i < n; ++i) s += __builtin_popcountll(a[i] & ~b[i]);
    return s;
}

static uint64_t a_xor_pop(const uint64_t* a, const uint64_t* b, size_t n) {
    uint64_t s = 0;
    size_t i = 0;
    alignas(32) uint64_t tmp[4];
    for (; i + 4 <= n; i += 4) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        _mm256_store_si256(reinterpret_cast<__m256i*>(tmp),
                           _mm256_xor_si256(va, vb));
        s += __builtin_popcountll(tmp[0]) + __builtin_popcountll(tmp[1]) +
             __builtin_popcountll(tmp[2]) + __builtin_popcountll(tmp[3]);
    }
    for (; i < n; ++i) s += __builtin_popcountll(a[i] ^ b[i]);
    return s;
}

static bool a_subset(const uint64_t* a, const uint64_t* b, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        if (!_mm256_testz_si256(va, _mm256_andnot_si256(vb, va))) return false;
    }
    for (; i < n; ++i)
        if (a[i] & ~b[i]) return false;
    return true;
}

const Ops* avx2_ops_impl() {
    static const Ops ops{"avx2", a_maj3, a_xor2, a_andnot_pop, a_xor_pop, a_subset};
    return &ops;
}

}  // namespace msp::kern

#else

namespace msp::kern {
struct Ops;
const Ops* avx2_ops_impl() { return nullptr; }
}  // namespace msp::kern

#endif
