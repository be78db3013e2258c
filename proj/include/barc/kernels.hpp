#pragma once

// Branch-evaluation kernel: z_b = w^H D_b r_I for every pattern in a bank.
// The serial version is the reference; the OpenMP version must produce
// bit-identical outputs (each branch is an independent dot product, so there
// is no cross-thread reduction).

#include <span>
#include <vector>

#include "barc/numerics.hpp"

namespace barc::kernels {

enum class Exec { serial, parallel };

/// Flat pattern storage: offsets for branch b live at [b*rank, (b+1)*rank).
struct FlatPatterns {
    int rank = 0;
    std::vector<int> offsets;
    std::size_t size() const noexcept { return rank == 0 ? 0 : offsets.size() / static_cast<std::size_t>(rank); }
};

void branch_outputs_serial(const FlatPatterns& bank, std::span<const cd> r_interp, std::span<const cd> w,
                           std::span<cd> z_out);

void branch_outputs_omp(const FlatPatterns& bank, std::span<const cd> r_interp, std::span<const cd> w,
                        std::span<cd> z_out);

inline void branch_outputs(Exec exec, const FlatPatterns& bank, std::span<const cd> r_interp,
                           std::span<const cd> w, std::span<cd> z_out) {
    if (exec == Exec::parallel)
        branch_outputs_omp(bank, r_interp, w, z_out);
    else
        branch_outputs_serial(bank, r_interp, w, z_out);
}

/// Output of one branch.
inline cd branch_output(const FlatPatterns& bank, std::size_t b, std::span<const cd> r_interp,
                        std::span<const cd> w) {
    const int* off = bank.offsets.data() + b * static_cast<std::size_t>(bank.rank);
    cd z{};
    for (int j = 0; j < bank.rank; ++j) z += std::conj(w[static_cast<std::size_t>(j)]) * r_interp[static_cast<std::size_t>(off[j])];
    return z;
}

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

}  // namespace barc::kernels
