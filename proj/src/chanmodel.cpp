#include "barc/chanmodel.hpp"

#include <cmath>
#include <numbers>

namespace barc::chan {

SpreadingCode random_code(int n, Rng& rng) {
    if (n < 1) throw invalid_argument("random_code: N must be positive");
    SpreadingCode c;
    c.chips.resize(static_cast<std::size_t>(n));
    const double a = 1.0 / std::sqrt(static_cast<double>(n));
    for (double& chip : c.chips) chip = rng.coin() ? a : -a;
    return c;
}

ConstraintMatrix build_constraint_matrix(const SpreadingCode& code, int lp) {
    if (lp < 1) throw invalid_argument("build_constraint_matrix: L_p must be positive");
    if (code.chips.empty()) throw invalid_argument("build_constraint_matrix: empty code");
    ConstraintMatrix c;
    c.n = code.length();
    c.lp = lp;
    c.matrix = ComplexMat(static_cast<std::size_t>(c.m()), static_cast<std::size_t>(lp));
    for (int col = 0; col < lp; ++col)
        for (int chip = 0; chip < c.n; ++chip)
            c.matrix(static_cast<std::size_t>(chip + col), static_cast<std::size_t>(col)) = code.chips[static_cast<std::size_t>(chip)];
    return c;
}

ComplexVec effective_signature(const ConstraintMatrix& c, std::span<const cd> h) {
    if (h.size() != static_cast<std::size_t>(c.lp))
        throw invalid_argument("effective_signature: channel length does not match constraint matrix");
    return c.matrix * h;
}

FadingProcess clarke_fading(double normalized_doppler, int num_symbols, int num_paths, std::uint64_t seed,
                            int oscillators) {
    if (!(normalized_doppler >= 0.0)) throw invalid_argument("clarke_fading: negative Doppler");
    if (num_symbols < 1) throw invalid_argument("clarke_fading: need at least one symbol");
    if (num_paths < 0) throw invalid_argument("clarke_fading: negative path count");
    if (oscillators < 16) throw invalid_argument("clarke_fading: at least 16 oscillators required");

    using std::numbers::pi;
    FadingProcess fp;
    fp.normalized_doppler = normalized_doppler;
    fp.gains.assign(static_cast<std::size_t>(num_paths), std::vector<cd>(static_cast<std::size_t>(num_symbols)));
    Rng rng(seed);
    const double wd = 2.0 * pi * normalized_doppler;
    const double amp = 1.0 / std::sqrt(static_cast<double>(oscillators));
    std::vector<double> freq(static_cast<std::size_t>(oscillators));
    std::vector<double> phase(static_cast<std::size_t>(oscillators));
    for (auto& path : fp.gains) {
        // Arrival angles are evenly spread with a common random rotation, so
        // each angle is marginally uniform and the autocorrelation is J0.
        const double theta = rng.uniform(-pi, pi);
        for (int n = 0; n < oscillators; ++n) {
            const double alpha = (2.0 * pi * n + theta) / oscillators;
            freq[static_cast<std::size_t>(n)] = wd * std::cos(alpha);
            phase[static_cast<std::size_t>(n)] = rng.uniform(-pi, pi);
        }
        for (int t = 0; t < num_symbols; ++t) {
            cd g{};
            for (int n = 0; n < oscillators; ++n)
                g += std::polar(1.0, freq[static_cast<std::size_t>(n)] * t + phase[static_cast<std::size_t>(n)]);
            path[static_cast<std::size_t>(t)] = amp * g;
        }
    }
    return fp;
}

FadingProcess fixed_fading(int num_symbols, int num_paths) {
    FadingProcess fp;
    fp.gains.assign(static_cast<std::size_t>(num_paths), std::vector<cd>(static_cast<std::size_t>(num_symbols), cd(1.0)));
    return fp;
}

int bits_per_symbol(Modulation mod) noexcept { return mod == Modulation::qpsk ? 2 : 1; }

ComplexVec User::taps(int s) const {
    ComplexVec h(static_cast<std::size_t>(channel.lp));
    for (int p = 0; p < channel.num_paths(); ++p) {
        const auto pp = static_cast<std::size_t>(p);
        h[static_cast<std::size_t>(channel.delays[pp])] +=
            std::sqrt(channel.path_powers[pp]) * fading.gains[pp][static_cast<std::size_t>(s)];
    }
    return h;
}

namespace {

constexpr double kPathPowersDb[3] = {0.0, -3.0, -6.0};

MultipathChannel draw_channel(int lp, Rng& rng) {
    MultipathChannel ch;
    ch.lp = lp;
    const int paths = std::min(3, lp);
    if (paths == 1) {
        ch.delays = {0};
    } else if (lp == 2) {
        ch.delays = {0, 1};
    } else {
        // Redraw until the layout fits inside the L_p window.
        for (;;) {
            ch.delays = {0};
            for (int p = 1; p < paths; ++p) ch.delays.push_back(ch.delays.back() + rng.uniform_int(1, 2));
            if (ch.delays.back() <= lp - 1) break;
        }
    }
    double total = 0.0;
    for (int p = 0; p < paths; ++p) {
        ch.relative_powers_db.push_back(kPathPowersDb[p]);
        const double lin = std::pow(10.0, kPathPowersDb[p] / 10.0);
        ch.path_powers.push_back(lin);
        total += lin;
    }
    for (double& pw : ch.path_powers) pw /= total;
    return ch;
}

}  // namespace

UserEnsemble draw_user_ensemble(int k, int n, int lp, double power_std_db, std::uint64_t seed) {
    if (k < 0) throw invalid_argument("draw_user_ensemble: negative user count");
    if (n < 1 || lp < 1) throw invalid_argument("draw_user_ensemble: N and L_p must be positive");
    if (power_std_db < 0.0) throw invalid_argument("draw_user_ensemble: negative power spread");
    UserEnsemble ens;
    ens.n = n;
    ens.lp = lp;
    Rng rng(seed);
    for (int u = 0; u < k; ++u) {
        User user;
        user.code = random_code(n, rng);
        user.constraint = build_constraint_matrix(user.code, lp);
        user.channel = draw_channel(lp, rng);
        const double db = power_std_db * rng.normal();
        user.amplitude = std::pow(10.0, db / 20.0);
        ens.users.push_back(std::move(user));
    }
    return ens;
}

void attach_streams(UserEnsemble& ens, const StreamOptions& opts, std::uint64_t fading_seed,
                    std::uint64_t symbol_seed) {
    if (opts.num_frames < 0) throw invalid_argument("attach_streams: negative frame count");
    ens.num_frames = opts.num_frames;
    const int len = opts.num_frames + 2;
    Rng sym_rng(symbol_seed);
    const double q = 1.0 / std::sqrt(2.0);
    for (std::size_t u = 0; u < ens.users.size(); ++u) {
        User& user = ens.users[u];
        const int paths = user.channel.num_paths();
        user.fading = opts.fading == FadingModel::clarke
                          ? clarke_fading(opts.normalized_doppler, len, paths, derive_seed(fading_seed, u), opts.oscillators)
                          : fixed_fading(len, paths);
        user.symbols.resize(static_cast<std::size_t>(len));
        for (cd& b : user.symbols) {
            if (opts.modulation == Modulation::qpsk)
                b = cd(sym_rng.coin() ? q : -q, sym_rng.coin() ? q : -q);
            else
                b = cd(sym_rng.coin() ? 1.0 : -1.0, 0.0);
        }
    }
}

namespace {

void check_frame(const UserEnsemble& ens, int frame) {
    if (frame < 0 || frame >= ens.num_frames) throw invalid_argument("frame index outside attached streams");
}

}  // namespace

ComplexVec user_signature(const UserEnsemble& ens, int user, int frame) {
    check_frame(ens, frame);
    const User& u = ens.users.at(static_cast<std::size_t>(user));
    return effective_signature(u.constraint, u.taps(frame + 1));
}

ComplexVec signal_part(const UserEnsemble& ens, int frame) {
    check_frame(ens, frame);
    const int m = ens.m();
    const int n = ens.n;
    ComplexVec r(static_cast<std::size_t>(m));
    const int s = frame + 1;
    for (const User& u : ens.users) {
        const ComplexVec cur = effective_signature(u.constraint, u.taps(s));
        const cd bc = u.amplitude * u.symbols[static_cast<std::size_t>(s)];
        for (int i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] += bc * cur[static_cast<std::size_t>(i)];
        if (m > n) {
            // Tail of the previous symbol's chip convolution and head of the next.
            const ComplexVec prev = effective_signature(u.constraint, u.taps(s - 1));
            const ComplexVec next = effective_signature(u.constraint, u.taps(s + 1));
            const cd bp = u.amplitude * u.symbols[static_cast<std::size_t>(s - 1)];
            const cd bn = u.amplitude * u.symbols[static_cast<std::size_t>(s + 1)];
            for (int i = 0; i + n < m; ++i) r[static_cast<std::size_t>(i)] += bp * prev[static_cast<std::size_t>(i + n)];
            for (int i = n; i < m; ++i) r[static_cast<std::size_t>(i)] += bn * next[static_cast<std::size_t>(i - n)];
        }
    }
    return r;
}

ReceivedFrame synthesize_received(const UserEnsemble& ens, int frame, double noise_var, Rng& noise_rng) {
    if (noise_var < 0.0) throw invalid_argument("synthesize_received: negative noise variance");
    ReceivedFrame f;
    f.r = signal_part(ens, frame);
    if (noise_var > 0.0)
        for (cd& x : f.r) x += noise_rng.complex_normal(noise_var);
    f.truth = ens.users.empty() ? cd{} : ens.users[0].symbols[static_cast<std::size_t>(frame + 1)];
    f.noise_var = noise_var;
    return f;
}

ComplexMat signal_covariance(const UserEnsemble& ens, int frame) {
    check_frame(ens, frame);
    const auto m = static_cast<std::size_t>(ens.m());
    const int n = ens.n;
    ComplexMat cov(m, m);
    auto add_outer = [&](const ComplexVec& x, double power) {
        for (std::size_t i = 0; i < m; ++i) {
            if (x[i] == cd{}) continue;
            for (std::size_t j = 0; j < m; ++j) cov(i, j) += power * x[i] * std::conj(x[j]);
        }
    };
    const int s = frame + 1;
    for (const User& u : ens.users) {
        const double pw = u.amplitude * u.amplitude;
        add_outer(effective_signature(u.constraint, u.taps(s)), pw);
        if (static_cast<int>(m) > n) {
            const ComplexVec prev = effective_signature(u.constraint, u.taps(s - 1));
            const ComplexVec next = effective_signature(u.constraint, u.taps(s + 1));
            ComplexVec tail(m), head(m);
            for (std::size_t i = 0; i + static_cast<std::size_t>(n) < m; ++i) tail[i] = prev[i + static_cast<std::size_t>(n)];
            for (std::size_t i = static_cast<std::size_t>(n); i < m; ++i) head[i] = next[i - static_cast<std::size_t>(n)];
            add_outer(tail, pw);
            add_outer(head, pw);
        }
    }
    return cov;
}

double noise_variance_for_ebn0(double amplitude, double ebn0_db, Modulation mod) {
    const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
    return amplitude * amplitude / (static_cast<double>(bits_per_symbol(mod)) * ebn0);
}

}  // namespace barc::chan
