#pragma once

// Synchronous DS-CDMA uplink: spreading codes, multipath constraint
// matrices, Clarke fading and chip-rate received-vector synthesis.

#include <cstdint>
#include <vector>

#include "barc/numerics.hpp"
#include "barc/random.hpp"

namespace barc::chan {

struct SpreadingCode {
    std::vector<double> chips;  // +-1/sqrt(N)
    int length() const noexcept { return static_cast<int>(chips.size()); }
};

SpreadingCode random_code(int n, Rng& rng);

/// M×L_p matrix of one-chip shifted copies of a code, M = N + L_p - 1.
struct ConstraintMatrix {
    ComplexMat matrix;
    int n = 0;
    int lp = 0;
    int m() const noexcept { return n + lp - 1; }
};

ConstraintMatrix build_constraint_matrix(const SpreadingCode& code, int lp);

/// p = C h.
ComplexVec effective_signature(const ConstraintMatrix& c, std::span<const cd> h);

struct MultipathChannel {
    int lp = 1;
    std::vector<int> delays;              // chip offsets, delays[0] == 0, strictly increasing
    std::vector<double> relative_powers_db;  // relative to path 0
    std::vector<double> path_powers;      // linear, normalized to unit total

    int num_paths() const noexcept { return static_cast<int>(delays.size()); }
};

enum class FadingModel { clarke, fixed };

/// Per-path complex gain sequences. gains[path][symbol], unit mean-square.
struct FadingProcess {
    double normalized_doppler = 0.0;
    std::vector<std::vector<cd>> gains;
};

/// Sum-of-sinusoids Clarke/Jakes synthesis, `oscillators` >= 16 per path.
FadingProcess clarke_fading(double normalized_doppler, int num_symbols, int num_paths, std::uint64_t seed,
                            int oscillators = 16);

/// Unit, zero-phase gains for every symbol (deterministic channel).
FadingProcess fixed_fading(int num_symbols, int num_paths);

enum class Modulation { qpsk, bpsk };

int bits_per_symbol(Modulation mod) noexcept;

struct User {
    SpreadingCode code;
    ConstraintMatrix constraint;
    MultipathChannel channel;
    double amplitude = 1.0;
    // Streams, populated by attach_streams. Stream index s corresponds to
    // frame index s - 1, so frame i sees symbols s-1, s, s+1 around s = i + 1.
    FadingProcess fading;
    std::vector<cd> symbols;

    /// L_p channel taps at stream index s.
    ComplexVec taps(int s) const;
};

struct UserEnsemble {
    int n = 0;
    int lp = 1;
    std::vector<User> users;  // users[0] is the desired user
    int num_frames = 0;

    int m() const noexcept { return n + lp - 1; }
    int k() const noexcept { return static_cast<int>(users.size()); }
};

/// Draws K users: random binary codes, 3-path channels (0/-3/-6 dB, spacings
/// uniform on {1,2} chips), log-normal amplitudes with `power_std_db` spread.
UserEnsemble draw_user_ensemble(int k, int n, int lp, double power_std_db, std::uint64_t seed);

struct StreamOptions {
    int num_frames = 0;
    double normalized_doppler = 0.0;
    FadingModel fading = FadingModel::clarke;
    Modulation modulation = Modulation::qpsk;
    int oscillators = 16;
};

/// Draws fading and symbol streams covering frames [0, num_frames).
void attach_streams(UserEnsemble& ens, const StreamOptions& opts, std::uint64_t fading_seed,
                    std::uint64_t symbol_seed);

struct ReceivedFrame {
    ComplexVec r;
    cd truth;  // desired user's symbol
    double noise_var = 0.0;
};

/// Noiseless signal part of frame i: current symbol through C_k h_k plus the
/// ISI tail of symbol i-1 and head of symbol i+1.
ComplexVec signal_part(const UserEnsemble& ens, int frame);

/// Full received frame i with circular Gaussian noise of variance noise_var per chip.
ReceivedFrame synthesize_received(const UserEnsemble& ens, int frame, double noise_var, Rng& noise_rng);

/// Noiseless covariance of frame i given the channels in effect (symbols
/// unit-energy and independent).
ComplexMat signal_covariance(const UserEnsemble& ens, int frame);

/// Effective signature of user k at frame i.
ComplexVec user_signature(const UserEnsemble& ens, int user, int frame);

/// Per-chip noise variance giving the desired user's Eb/N0, with energy
/// measured as A_1^2 times the unit expected channel energy.
double noise_variance_for_ebn0(double amplitude, double ebn0_db, Modulation mod);

}  // namespace barc::chan
