#include <atomic>
#include <cstring>
#include <stdexcept>

#include "mspace/bits.hpp"

namespace msp::kern {

const Ops* avx2_ops_impl();

const Ops* avx2_ops() {
    static const Ops* p = [] {
        if (!__builtin_cpu_supports("avx2")) return static_cast<const Ops*>(nullptr);
        return avx2_ops_impl();
    }();
    return p;
}

static std::atomic<const Ops*> g_active{nullptr};

const Ops& ops() {
    const Ops* p = g_active.load(std::memory_order_relaxed);
    if (!p) {
        p = avx2_ops() ? avx2_ops() : &scalar_ops();
        g_active.store(p, std::memory_order_relaxed);
    }
    return *p;
}

void force_backend(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&scalar_ops());
    } else if (std::strcmp(name, "avx2") == 0) {
        if (!avx2_ops()) throw std::runtime_error("avx2 not supported on this CPU");
        g_active.store(avx2_ops());
    } else if (std::strcmp(name, "auto") == 0) {
        g_active.store(avx2_ops() ? avx2_ops() : &scalar_ops());
    } else {
        throw std::runtime_error(std::string("unknown kernel backend: ") + name);
    }
}

}  // namespace msp::kern
