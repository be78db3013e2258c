#include "barc/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace barc::kernels {

void branch_outputs_serial(const FlatPatterns& bank, std::span<const cd> r_interp, std::span<const cd> w,
                           std::span<cd> z_out) {
    const std::size_t nb = bank.size();
    for (std::size_t b = 0; b < nb; ++b) z_out[b] = branch_output(bank, b, r_interp, w);
}

void branch_outputs_omp(const FlatPatterns& bank, std::span<const cd> r_interp, std::span<const cd> w,
                        std::span<cd> z_out) {
    const auto nb = static_cast<long>(bank.size());
    // Small banks are not worth a fork/join.
#pragma omp parallel for schedule(static) if (nb >= 256)
    for (long b = 0; b < nb; ++b)
        z_out[static_cast<std::size_t>(b)] = branch_output(bank, static_cast<std::size_t>(b), r_interp, w);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace barc::kernels
