#include "probelight/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace probelight::kernels {

namespace {

const KernelTable& select() {
    const KernelTable* wide = avx2_table();
    if (const char* forced = std::getenv("PROBELIGHT_SIMD")) {
        const std::string_view name(forced);
        if (name == "scalar")
            return scalar_table();
        if (name == "avx2" && wide)
            return *wide;
    }
    return wide ? *wide : scalar_table();
}

} // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

} // namespace probelight::kernels
