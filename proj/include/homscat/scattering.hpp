#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "homscat/errors.hpp"
#include "homscat/homoclinic.hpp"
#include "homscat/model.hpp"
#include "homscat/types.hpp"

namespace homscat {

// ---------------------------------------------------------------------------
// Linearization along the homoclinic orbit and its rotating-frame form.
// ---------------------------------------------------------------------------

// Coupling blocks of one derotated step:
//   xi_{n+1}  = mu xi_n      + F_n zeta_n
//   eta_{n+1} = mu^{-1} eta_n + G_n zeta_n
//   chi_{n+1} = chi_n        + H_n zeta_n
struct CouplingBlocks {
    Row4 F = Row4::Zero();
    Row4 G = Row4::Zero();
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    double norm() const {
        return std::max({F.cwiseAbs().maxCoeff(), G.cwiseAbs().maxCoeff(), H.cwiseAbs().maxCoeff()});
    }
};

struct LinearizationSequence {
    int n_max = 0;
    int N = 1;  // settle index the rotating frames are anchored to
    double mu = 0, alpha = 0;
    Mat4 limit = Mat4::Identity();
    std::vector<Mat4> L;  // step matrices T_{q_n} -> T_{q_{n+1}}, n in [-n_max, n_max-1]

    bool derotated = false;
    std::vector<CouplingBlocks> fwd;  // index i: step at n = N + i,    i in [0, n_max-1-N]
    std::vector<CouplingBlocks> bwd;  // index i: step at n = -N - i,   i in [1, n_max-N]

    DecayFit tail_fit_fwd, tail_fit_bwd;
    double mu1 = 0;       // certified geometric bound base, in [mu, 1)
    double C_bound = 0;   // certified prefactor: ||blocks at n|| <= C_bound mu1^{|n|}

    const Mat4& step(int n) const { return L[static_cast<size_t>(n + n_max)]; }
    double kappa() const { return std::max(mu, mu1); }

    const CouplingBlocks& fwd_block(int n) const { return fwd[static_cast<size_t>(n - N)]; }
    const CouplingBlocks& bwd_block(int n) const { return bwd[static_cast<size_t>(-n - N)]; }

    static Mat4 frame(int k, double alpha) { return block_diag(Mat2::Identity(), rotation2(k * alpha)); }
};

inline LinearizationSequence linearize_along_orbit(const MapModel& model, const HomoclinicOrbit& orbit,
                                                   int N = 1, double tol_symp = 1e-9) {
    LinearizationSequence seq;
    seq.n_max = orbit.n_max;
    seq.N = std::max(1, N);
    seq.mu = model.params.mu;
    seq.alpha = model.params.alpha;
    seq.limit = one_elliptic_linear(seq.mu, seq.alpha);
    seq.L.reserve(2 * orbit.n_max);
    for (int n = -orbit.n_max; n < orbit.n_max; ++n) {
        const Mat4 Ln = model.first_return.jacobian_unchecked(orbit.at(n));
        const double r = symplecticity_residual(Ln);
        if (r > tol_symp)
            throw NonSymplecticJacobian("linearize_along_orbit: step matrix residual " + std::to_string(r));
        seq.L.push_back(Ln);
    }
    // geometric tail certificate on || L_n - limit ||, gluing step excluded
    std::vector<double> df, db;
    for (int n = 0; n < orbit.n_max; ++n) df.push_back((seq.step(n) - seq.limit).cwiseAbs().maxCoeff());
    for (int n = -2; n >= -orbit.n_max; --n) db.push_back((seq.step(n) - seq.limit).cwiseAbs().maxCoeff());
    seq.tail_fit_fwd = fit_decay(df);
    seq.tail_fit_bwd = fit_decay(db);
    for (const auto* f : {&seq.tail_fit_fwd, &seq.tail_fit_bwd}) {
        if (!f->exact_zero && (f->rate <= 0 || f->rate >= 1.0))
            throw DecayFitFailure("linearize_along_orbit: tail blocks do not decay geometrically");
        if (!f->exact_zero && f->max_residual > 3.0)
            throw DecayFitFailure("linearize_along_orbit: tail decay is not log-linear (bad orbit?)");
    }
    double rate = seq.mu;
    if (!seq.tail_fit_fwd.exact_zero) rate = std::max(rate, seq.tail_fit_fwd.rate);
    if (!seq.tail_fit_bwd.exact_zero) rate = std::max(rate, seq.tail_fit_bwd.rate);
    seq.mu1 = std::min(rate, 0.99);
    double C = 0;
    for (int n = 0; n < orbit.n_max; ++n)
        C = std::max(C, df[static_cast<size_t>(n)] / std::pow(seq.mu1, n));
    for (size_t i = 0; i < db.size(); ++i)
        C = std::max(C, db[i] / std::pow(seq.mu1, static_cast<double>(i + 2)));
    seq.C_bound = C;
    return seq;
}

// Rotating-frame change zeta_n = S_{n-N} psi_n (forward) and
// zeta_n = S_{n+N} psi_n (backward); the center block of the limit matrix
// becomes the identity.  Idempotent: a derotated sequence is returned as is.
inline LinearizationSequence derotate(const LinearizationSequence& in) {
    if (in.derotated) return in;
    LinearizationSequence seq = in;
    const double mu = seq.mu, alpha = seq.alpha;
    auto blocks_of = [mu](const Mat4& Lhat) {
        CouplingBlocks b;
        b.F = Lhat.row(0) - Row4(mu, 0, 0, 0);
        b.G = Lhat.row(1) - Row4(0, 1.0 / mu, 0, 0);
        b.H = Lhat.bottomRows<2>();
        b.H(0, 2) -= 1.0;
        b.H(1, 3) -= 1.0;
        return b;
    };
    seq.fwd.clear();
    for (int n = seq.N; n < seq.n_max; ++n) {
        const Mat4 Lhat = LinearizationSequence::frame(n + 1 - seq.N, alpha).transpose() * seq.step(n) *
                          LinearizationSequence::frame(n - seq.N, alpha);
        seq.fwd.push_back(blocks_of(Lhat));
    }
    seq.bwd.clear();
    seq.bwd.push_back(CouplingBlocks{});  // placeholder for i = 0 (never used)
    for (int n = -seq.N - 1; n >= -seq.n_max; --n) {
        const Mat4 Lhat = LinearizationSequence::frame(n + 1 + seq.N, alpha).transpose() * seq.step(n) *
                          LinearizationSequence::frame(n + seq.N, alpha);
        seq.bwd.push_back(blocks_of(Lhat));
    }
    seq.derotated = true;
    return seq;
}

// ---------------------------------------------------------------------------
// Bounded-solution boundary value problem (contraction operator).
// ---------------------------------------------------------------------------

enum class BvpDirection { forward, backward };

// Forward problem: scalar = xi at index N, chi_limit = lim chi_n (n -> +inf).
// Backward problem: scalar = eta at index -N, chi_limit = lim (n -> -inf).
struct BvpBoundaryData {
    double scalar = 0;
    Vec2 chi_limit = Vec2::Zero();
    BvpDirection direction = BvpDirection::forward;
};

struct BoundedSeqSolution {
    BvpDirection direction = BvpDirection::forward;
    int N = 0, T = 0;
    std::vector<Vec4> zeta;  // i = 0..T; forward: n = N+i, backward: n = -N-i
    double residual = 0;          // achieved fixed-point residual (sup norm)
    double tail_bound = 0;        // certified bound on the discarded tail
    double lipschitz_measured = 0;  // max ratio of successive correction norms
    int iterations = 0;

    const Vec4& at_boundary() const { return zeta.front(); }
};

// Theoretical contraction bound from the Lemma-3 estimates with the
// certified (C, kappa); < 1 guarantees the fixed-point iteration contracts.
inline double bvp_lipschitz_bound(const LinearizationSequence& seq, int N, int T) {
    const double C = seq.C_bound, k = seq.kappa();
    double xi_sup = 0;
    for (int n = N + 1; n <= N + T; ++n)
        xi_sup = std::max(xi_sup, C * std::pow(k, n - 1) * (n - N));
    const double eta_b = C * std::pow(k, N + 1) / (1 - k * k);
    const double chi_b = C * std::pow(k, N) / (1 - k);
    return std::max({xi_sup, eta_b, chi_b});
}

inline int contraction_threshold(const LinearizationSequence& seq, int T = 64) {
    for (int N = 1; N < seq.n_max; ++N)
        if (bvp_lipschitz_bound(seq, N, T) < 1.0) return N;
    return seq.n_max;
}

inline BoundedSeqSolution solve_bvp(const LinearizationSequence& seq, const BvpBoundaryData& data,
                                    int T = 0, double tol_bvp = 1e-10, int max_iter = 200) {
    if (!seq.derotated) throw ValidationError("solve_bvp: sequence must be derotated first");
    const double mu = seq.mu, k = seq.kappa();
    const int N = seq.N;
    if (T <= 0) {
        // smallest T with C kappa^T < tol/10
        const double C = std::max(seq.C_bound, 1e-30);
        T = static_cast<int>(std::ceil(std::log(tol_bvp / (10 * C)) / std::log(k)));
        T = std::clamp(T, 8, seq.n_max - N - 1);
    }
    if (N + T > seq.n_max - 1)
        throw ValidationError("solve_bvp: N + T exceeds the stored linearization range");
    const double L_bound = bvp_lipschitz_bound(seq, N, T);
    if (L_bound >= 1.0)
        throw NoContraction("solve_bvp: contraction bound >= 1; increase N (settle index too small)");

    const bool fw = data.direction == BvpDirection::forward;
    auto block = [&](int j) -> const CouplingBlocks& {
        return fw ? seq.fwd_block(N + j) : seq.bwd_block(-N - j);
    };

    std::vector<Vec4> z(T + 1, Vec4::Zero()), nz(T + 1, Vec4::Zero());
    for (int i = 0; i <= T; ++i) {
        z[i][fw ? 0 : 1] = std::pow(mu, i) * data.scalar;
        z[i].tail<2>() = data.chi_limit;
    }
    // right-hand sides of the truncated integral system
    auto apply_T = [&](const std::vector<Vec4>& in, std::vector<Vec4>& out) {
        if (fw) {
            for (int i = 0; i <= T; ++i) {
                double xi = std::pow(mu, i) * data.scalar;
                for (int j = 0; j < i; ++j) xi += std::pow(mu, i - 1 - j) * (block(j).F * in[j])(0);
                double eta = 0;
                for (int j = i; j <= T; ++j) eta -= std::pow(mu, j + 1 - i) * (block(j).G * in[j])(0);
                Vec2 chi = data.chi_limit;
                for (int j = i; j <= T; ++j) chi -= block(j).H * in[j];
                out[i] << xi, eta, chi[0], chi[1];
            }
        } else {
            for (int i = 0; i <= T; ++i) {
                double xi = 0;
                for (int j = i + 1; j <= T; ++j) xi += std::pow(mu, j - i - 1) * (block(j).F * in[j])(0);
                double eta = std::pow(mu, i) * data.scalar;
                for (int j = 1; j <= i; ++j) eta -= std::pow(mu, i + 1 - j) * (block(j).G * in[j])(0);
                Vec2 chi = data.chi_limit;
                for (int j = i + 1; j <= T; ++j) chi += block(j).H * in[j];
                out[i] << xi, eta, chi[0], chi[1];
            }
        }
    };

    BoundedSeqSolution sol;
    sol.direction = data.direction;
    sol.N = N;
    sol.T = T;
    double prev_corr = -1;
    for (int it = 0; it < max_iter; ++it) {
        apply_T(z, nz);
        double corr = 0;
        for (int i = 0; i <= T; ++i) corr = std::max(corr, (nz[i] - z[i]).cwiseAbs().maxCoeff());
        std::swap(z, nz);
        sol.iterations = it + 1;
        if (prev_corr > 0 && corr > 0)
            sol.lipschitz_measured = std::max(sol.lipschitz_measured, corr / prev_corr);
        prev_corr = corr;
        if (corr <= tol_bvp * 0.01) break;
    }
    sol.zeta = z;
    sol.tail_bound = seq.C_bound * std::pow(k, T) / (1 - k);
    apply_T(z, nz);  // achieved fixed-point residual
    double res = 0;
    for (int i = 0; i <= T; ++i) res = std::max(res, (nz[i] - z[i]).cwiseAbs().maxCoeff());
    sol.residual = res;
    return sol;
}

// Residual of the stepwise difference system (the paper's consistency
// computation): checks zeta_{n+1} against the one-step recursion at every
// interior index.
inline double bvp_stepwise_residual(const LinearizationSequence& seq, const BoundedSeqSolution& sol) {
    const double mu = seq.mu;
    const bool fw = sol.direction == BvpDirection::forward;
    double worst = 0;
    for (int i = 0; i + 1 <= sol.T; ++i) {
        // step from node i to node i+1: forward uses block at n = N+i,
        // backward the step from n = -N-(i+1) to -N-i uses block at -N-(i+1)
        const CouplingBlocks& b = fw ? seq.fwd_block(sol.N + i) : seq.bwd_block(-sol.N - (i + 1));
        const Vec4& zfrom = fw ? sol.zeta[i] : sol.zeta[i + 1];
        const Vec4& zto = fw ? sol.zeta[i + 1] : sol.zeta[i];
        Vec4 pred;
        pred[0] = mu * zfrom[0] + (b.F * zfrom)(0);
        pred[1] = zfrom[1] / mu + (b.G * zfrom)(0);
        pred.tail<2>() = zfrom.tail<2>() + b.H * zfrom;
        worst = std::max(worst, (pred - zto).cwiseAbs().maxCoeff());
    }
    return worst;
}

// Max violation of the Lemma-4 linearity relations I-III over random samples.
struct LinearityReport {
    double max_violation_I = 0, max_violation_II = 0, max_violation_III = 0;
    double max_violation() const {
        return std::max({max_violation_I, max_violation_II, max_violation_III});
    }
};

inline LinearityReport verify_linearity(const LinearizationSequence& seq, int n_samples = 100,
                                        unsigned long seed = 7, int T = 0,
                                        BvpDirection dir = BvpDirection::forward) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    LinearityReport rep;
    auto solve = [&](double s, const Vec2& c) { return solve_bvp(seq, {s, c, dir}, T); };
    auto diff = [](const BoundedSeqSolution& A, const BoundedSeqSolution& B,
                   const BoundedSeqSolution& C, double ca, double cb) {
        double worst = 0;
        for (size_t i = 0; i < A.zeta.size(); ++i)
            worst = std::max(worst, (ca * A.zeta[i] + cb * B.zeta[i] - C.zeta[i]).cwiseAbs().maxCoeff());
        return worst;
    };
    for (int s = 0; s < n_samples; ++s) {
        const double x1 = U(rng), x2 = U(rng), al = U(rng), be = U(rng);
        const Vec2 c1(U(rng), U(rng)), c2(U(rng), U(rng));
        // I:   zeta(x1, c1) + zeta(x2, 0) = zeta(x1 + x2, c1)
        auto A = solve(x1, c1), B = solve(x2, Vec2::Zero()), C = solve(x1 + x2, c1);
        rep.max_violation_I = std::max(rep.max_violation_I, diff(A, B, C, 1, 1));
        // II:  alpha-homogeneity and additivity with zero center data
        auto D = solve(al * x1 + be * x2, Vec2::Zero());
        auto E = solve(x1, Vec2::Zero());
        rep.max_violation_II = std::max(rep.max_violation_II, diff(E, B, D, al, be));
        // III: linearity in the center limit
        auto F = solve(0, c1), G = solve(0, c2), H = solve(0, Vec2(al * c1 + be * c2));
        rep.max_violation_III = std::max(rep.max_violation_III, diff(F, G, H, al, be));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Scattering map.
// ---------------------------------------------------------------------------

struct ScatteringMap {
    Mat2 A = Mat2::Identity();  // co-rotating frames anchored at indices -N (source) and N (target)
    int N = 0;
    double alpha = 0;
    double det_residual = 0;  // |det A - 1|

    // N-independent fixed-frame representative R_{-N a} A R_{-(N-1) a}
    Mat2 fixed_frame() const { return rotation2(-N * alpha) * A * rotation2(-(N - 1) * alpha); }
};

inline Mat4 transport_matrix(const LinearizationSequence& seq, int N) {
    Mat4 S = Mat4::Identity();
    for (int n = -N; n <= N - 1; ++n) S = seq.step(n) * S;
    return S;
}

inline ScatteringMap build_scattering_map(const LinearizationSequence& seq_in, int T = 0,
                                          double tol_trans = 1e-9) {
    const LinearizationSequence seq = derotate(seq_in);
    const int N = seq.N;
    const Mat4 S = transport_matrix(seq, N);

    auto bsolve = [&](double s, const Vec2& c) {
        return solve_bvp(seq, {s, c, BvpDirection::backward}, T).at_boundary();
    };
    auto fsolve = [&](double s, const Vec2& c) {
        return solve_bvp(seq, {s, c, BvpDirection::forward}, T).at_boundary();
    };
    const Vec4 du = bsolve(1.0, Vec2::Zero());       // unstable tangent line direction at -N
    const Vec4 w1 = fsolve(1.0, Vec2::Zero());       // stable tangent at N
    const Vec4 w2 = fsolve(0.0, Vec2(1, 0));
    const Vec4 w3 = fsolve(0.0, Vec2(0, 1));

    // intersection of the transported line with the forward bounded subspace:
    //   S z_b + t S du = c1 w1 + c2 w2 + c3 w3
    Mat4 Amat;
    Amat.col(0) = S * du;
    Amat.col(1) = -w1;
    Amat.col(2) = -w2;
    Amat.col(3) = -w3;
    Vec4 colnorm;
    for (int c = 0; c < 4; ++c) {
        colnorm[c] = Amat.col(c).norm();
        if (colnorm[c] == 0) throw TransversalityFailure("build_scattering_map: degenerate basis vector");
        Amat.col(c) /= colnorm[c];
    }
    const Eigen::FullPivLU<Mat4> lu(Amat);
    if (std::abs(lu.determinant()) < tol_trans)
        throw TransversalityFailure(
            "build_scattering_map: transported line is parallel to the bounded subspace");

    ScatteringMap out;
    out.N = N;
    out.alpha = seq.alpha;
    for (int col = 0; col < 2; ++col) {
        const Vec4 zb = bsolve(0.0, col == 0 ? Vec2(1, 0) : Vec2(0, 1));
        const Vec4 rhs = -(S * zb);
        Vec4 sol = lu.solve(rhs);
        for (int c = 0; c < 4; ++c) sol[c] /= colnorm[c];
        out.A(0, col) = sol[2];
        out.A(1, col) = sol[3];
    }
    out.det_residual = std::abs(out.A.determinant() - 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Transversality report (Lemma 1 determinant identity).
// ---------------------------------------------------------------------------

struct TransversalityReport {
    double d11 = 0;          // the single decisive block entry of Df^{2N}
    double direct_det = 0;   // 4x4 determinant [L l^u | basis of T W^cs]
    double Delta = 0;        // subsystem determinant, pre-identity form
    double identity_residual = 0;  // |Delta - d11^2|
    BlockIdentityReport blocks;
    bool pass = false;
};

inline TransversalityReport check_transversality_matrix(const Mat4& L, double tol_trans = 1e-9) {
    const Lemma1Blocks B = lemma1_blocks(L);
    TransversalityReport r;
    r.d11 = B.d(0, 0);
    {
        // det [ L l^u | e_x | e_u | e_v ] in the permuted (x,u,y,v) ordering
        Eigen::Matrix4d M;
        M.col(0) << B.b(0, 0), B.b(1, 0), B.d(0, 0), B.d(1, 0);
        M.col(1) << 1, 0, 0, 0;
        M.col(2) << 0, 1, 0, 0;
        M.col(3) << 0, 0, 0, 1;
        r.direct_det = M.determinant();
    }
    const auto& a = B.a;
    const auto& b = B.b;
    const auto& c = B.c;
    const auto& d = B.d;
    r.Delta = (d(0, 0) * a(1, 1) - b(1, 0) * c(0, 1)) * (d(1, 1) * d(0, 0) - d(1, 0) * d(0, 1)) -
              (b(1, 1) * d(0, 0) - b(1, 0) * d(0, 1)) * (d(0, 0) * c(1, 1) - d(1, 0) * c(0, 1));
    r.identity_residual = std::abs(r.Delta - r.d11 * r.d11);
    r.blocks = check_symplectic_block_identities(L);
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    r.pass = std::abs(r.d11) > tol_trans * scale;
    if (!r.pass) throw TransversalityFailure("check_transversality: d11 vanishes (W^u tangent to W^cs)");
    return r;
}

inline TransversalityReport check_transversality(const LinearizationSequence& seq, int N,
                                                 double tol_trans = 1e-9) {
    return check_transversality_matrix(transport_matrix(seq, N), tol_trans);
}

// ---------------------------------------------------------------------------
// Genericity: roots of  rho(theta) = |A (cos, sin)|^2 - 1.
// ---------------------------------------------------------------------------

enum class GenericityClass { generic, degenerate_rotation, near_degenerate };

struct GenericityReport {
    GenericityClass classification = GenericityClass::near_degenerate;
    std::vector<double> roots;          // in [0, 2pi), increasing
    std::vector<double> root_slopes;    // rho'(theta_i)
    double rho_grid_max = 0;            // max |rho| on the scan grid
    double min_crossing_angle = 0;      // between E and S(E) at the roots
    Mat2 A = Mat2::Identity();

    bool generic() const { return classification == GenericityClass::generic; }
};

inline double genericity_rho(const Mat2& A, double theta) {
    const Vec2 w = A * Vec2(std::cos(theta), std::sin(theta));
    return w.squaredNorm() - 1.0;
}

inline double genericity_rho_prime(const Mat2& A, double theta) {
    const Vec2 u(std::cos(theta), std::sin(theta));
    const Vec2 up(-std::sin(theta), std::cos(theta));
    return 2.0 * (A * u).dot(A * up);
}

inline GenericityReport check_genericity(const Mat2& A, int grid = 4096, double tol_root = 1e-6,
                                         double tol_rotation = 1e-12) {
    GenericityReport rep;
    rep.A = A;
    std::vector<double> rho(grid + 1);
    for (int i = 0; i <= grid; ++i) rho[i] = genericity_rho(A, 2 * kPi * i / grid);
    rep.rho_grid_max = 0;
    for (double r : rho) rep.rho_grid_max = std::max(rep.rho_grid_max, std::abs(r));
    if (rep.rho_grid_max <= tol_rotation) {
        rep.classification = GenericityClass::degenerate_rotation;
        return rep;
    }
    // sign-change brackets, refined by bisection
    for (int i = 0; i < grid; ++i) {
        const double a = rho[i], b = rho[i + 1];
        if (a == 0.0 || a * b < 0) {
            double lo = 2 * kPi * i / grid, hi = 2 * kPi * (i + 1) / grid;
            double flo = a;
            for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = genericity_rho(A, mid);
                if ((flo <= 0 && fm <= 0) || (flo >= 0 && fm >= 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            rep.roots.push_back(0.5 * (lo + hi));
        }
    }
    // near-degenerate: local |rho| minima touching zero without sign change
    bool touching = false;
    for (int i = 1; i < grid; ++i) {
        if (std::abs(rho[i]) < 1e-8 && rho[i - 1] * rho[i + 1] > 0 && std::abs(rho[i - 1]) > std::abs(rho[i]) &&
            std::abs(rho[i + 1]) > std::abs(rho[i]))
            touching = true;
    }
    for (double th : rep.roots) rep.root_slopes.push_back(genericity_rho_prime(A, th));
    const bool all_simple = std::all_of(rep.root_slopes.begin(), rep.root_slopes.end(),
                                        [&](double s) { return std::abs(s) > tol_root; });
    if (rep.roots.size() == 4 && all_simple && !touching) {
        rep.classification = GenericityClass::generic;
        // crossing angle between the circle and A(circle) at each root
        rep.min_crossing_angle = kPi;
        for (double th : rep.roots) {
            // point on both curves: P = A u(th) with |P| = 1
            const Vec2 P = A * Vec2(std::cos(th), std::sin(th));
            const Vec2 t1(-P[1], P[0]);  // tangent of the unit circle at P
            const Vec2 t2 = A * Vec2(-std::sin(th), std::cos(th));  // tangent of A(circle)
            double ang = std::acos(std::clamp(std::abs(t1.dot(t2)) / (t1.norm() * t2.norm()), 0.0, 1.0));
            rep.min_crossing_angle = std::min(rep.min_crossing_angle, ang);
        }
    } else {
        rep.classification = GenericityClass::near_degenerate;
    }
    return rep;
}

inline GenericityReport check_genericity(const ScatteringMap& S, int grid = 4096,
                                         double tol_root = 1e-6) {
    return check_genericity(S.A, grid, tol_root);
}

}  // namespace homscat
