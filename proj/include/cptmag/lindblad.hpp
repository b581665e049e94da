#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cptmag/errors.hpp"

namespace cptmag {

// Reference model: steady state of the Lambda (three-level) system under two
// optical couplings, spontaneous decay from |e> and ground-state dephasing.
// Used to justify and cross-check the fast phenomenological lineshape; not on
// any hot path.
struct LambdaSystemParams {
    double rabi_1 = 0.0;               // rad/s, leg |1> <-> |e>
    double rabi_2 = 0.0;               // rad/s, leg |2> <-> |e>
    double gamma = 0.0;                // rad/s, excited-state decay rate (1/lifetime)
    double gamma_s = 0.0;              // rad/s, ground-state dephasing rate
    double one_photon_detuning = 0.0;  // rad/s, common optical detuning
    double raman_detuning = 0.0;       // rad/s, two-photon (Raman) detuning
    double branch_1 = 0.5;             // fraction of Gamma decaying into |1>

    void validate() const {
        if (!(gamma > 0.0)) throw UsageError("lambda system: gamma must be > 0");
        if (rabi_1 < 0.0 || rabi_2 < 0.0) throw UsageError("lambda system: rabi must be >= 0");
        if (gamma_s < 0.0) throw UsageError("lambda system: gamma_s must be >= 0");
        if (branch_1 < 0.0 || branch_1 > 1.0)
            throw UsageError("lambda system: branch_1 must lie in [0, 1]");
    }
};

namespace detail {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Column-stacking Kronecker product (a otimes b).
inline CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Liouvillian acting on vec(rho) with column stacking, for which
// vec(A rho B) = (B^T otimes A) vec(rho).
inline CMat liouvillian(const CMat& h, const std::vector<CMat>& jumps) {
    const Eigen::Index d = h.rows();
    const CMat eye = CMat::Identity(d, d);
    const std::complex<double> im(0.0, 1.0);
    CMat m = -im * (kron(eye, h) - kron(h.transpose(), eye));
    for (const CMat& l : jumps) {
        const CMat ldl = l.adjoint() * l;
        m += kron(l.conjugate(), l) - 0.5 * kron(eye, ldl) - 0.5 * kron(ldl.transpose(), eye);
    }
    return m;
}

// Solve M vec(rho) = 0 with the trace-one constraint replacing the first
// equation; `kept` selects which vec indices participate (all of them for the
// full problem, a subset for projected references), and `diag` lists the kept
// positions that are diagonal elements of rho.
inline CVec steady_vec(const CMat& m, const std::vector<int>& kept, const std::vector<int>& diag) {
    const Eigen::Index n = static_cast<Eigen::Index>(kept.size());
    CMat a(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) a(r, c) = m(kept[static_cast<std::size_t>(r)], kept[static_cast<std::size_t>(c)]);
    a.row(0).setZero();
    for (int dpos : diag) a(0, dpos) = 1.0;
    CVec b = CVec::Zero(n);
    b(0) = 1.0;
    Eigen::FullPivLU<CMat> lu(a);
    if (!lu.isInvertible())
        throw ConvergenceError("lindblad: steady state is not unique (singular system)");
    return lu.solve(b);
}

// Full steady-state density matrix of an ergodic Lindblad system.
inline CMat steady_density(const CMat& h, const std::vector<CMat>& jumps) {
    const Eigen::Index d = h.rows();
    std::vector<int> kept, diag;
    for (Eigen::Index i = 0; i < d * d; ++i) kept.push_back(static_cast<int>(i));
    for (Eigen::Index i = 0; i < d; ++i) diag.push_back(static_cast<int>(i * d + i));
    const CVec v = steady_vec(liouvillian(h, jumps), kept, diag);
    CMat rho(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) rho(i, j) = v(j * d + i);
    return rho;
}

// Hamiltonian in the rotating frame, basis {|1>, |2>, |e>}: the Raman
// detuning is split symmetrically between the two ground states (rho_ee is
// then exactly even in the Raman detuning), the one-photon detuning sits on
// the excited state.
inline CMat lambda_hamiltonian(const LambdaSystemParams& p) {
    CMat h = CMat::Zero(3, 3);
    h(0, 0) = +0.5 * p.raman_detuning;
    h(1, 1) = -0.5 * p.raman_detuning;
    h(2, 2) = -p.one_photon_detuning;
    h(0, 2) = h(2, 0) = 0.5 * p.rabi_1;
    h(1, 2) = h(2, 1) = 0.5 * p.rabi_2;
    return h;
}

inline std::vector<CMat> lambda_jumps(const LambdaSystemParams& p) {
    std::vector<CMat> jumps;
    CMat l1 = CMat::Zero(3, 3);
    l1(0, 2) = std::sqrt(p.branch_1 * p.gamma);
    CMat l2 = CMat::Zero(3, 3);
    l2(1, 2) = std::sqrt((1.0 - p.branch_1) * p.gamma);
    CMat l3 = CMat::Zero(3, 3);
    const double s = std::sqrt(p.gamma_s / 2.0);
    l3(0, 0) = s;
    l3(1, 1) = -s;  // dephases rho_12 at exactly gamma_s
    jumps.push_back(l1);
    jumps.push_back(l2);
    jumps.push_back(l3);
    return jumps;
}

// Two-level {|g>, |e>} subproblem used when one leg is dark and all decay
// returns to the coupled ground state (the only ergodic component).
inline CMat two_level_density(double delta_g, double delta_e, double rabi, double gamma,
                              double gamma_s) {
    CMat h = CMat::Zero(2, 2);
    h(0, 0) = delta_g;
    h(1, 1) = delta_e;
    h(0, 1) = h(1, 0) = 0.5 * rabi;
    std::vector<CMat> jumps;
    CMat l = CMat::Zero(2, 2);
    l(0, 1) = std::sqrt(gamma);
    jumps.push_back(l);
    if (gamma_s > 0.0) {
        CMat ld = CMat::Zero(2, 2);
        ld(0, 0) = std::sqrt(gamma_s / 2.0);
        jumps.push_back(ld);
    }
    return steady_density(h, jumps);
}

}  // namespace detail

// Steady-state density matrix (basis {|1>, |2>, |e>}). Systems with a dark
// uncoupled ground state are handled by solving their ergodic component:
// - both legs off: no optical excitation; decay branching fixes the ground mix;
// - one leg off with all decay returning to the coupled ground state: exact
//   two-level problem on {coupled ground, excited};
// - one leg off with any decay into the uncoupled state: that state is an
//   absorbing sink and the steady state is its pure state.
inline Eigen::Matrix3cd lambda_steady_state(const LambdaSystemParams& p) {
    p.validate();
    Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();

    const bool leg1 = p.rabi_1 > 0.0, leg2 = p.rabi_2 > 0.0;
    if (!leg1 && !leg2) {
        rho(0, 0) = p.branch_1;
        rho(1, 1) = 1.0 - p.branch_1;
        return rho;
    }
    if (!leg2) {
        if (p.branch_1 == 1.0) {
            const auto r2 = detail::two_level_density(+0.5 * p.raman_detuning,
                                                      -p.one_photon_detuning, p.rabi_1, p.gamma,
                                                      p.gamma_s);
            rho(0, 0) = r2(0, 0);
            rho(0, 2) = r2(0, 1);
            rho(2, 0) = r2(1, 0);
            rho(2, 2) = r2(1, 1);
        } else {
            rho(1, 1) = 1.0;  // |2> is an absorbing sink
        }
        return rho;
    }
    if (!leg1) {
        if (p.branch_1 == 0.0) {
            const auto r2 = detail::two_level_density(-0.5 * p.raman_detuning,
                                                      -p.one_photon_detuning, p.rabi_2, p.gamma,
                                                      p.gamma_s);
            rho(1, 1) = r2(0, 0);
            rho(1, 2) = r2(0, 1);
            rho(2, 1) = r2(1, 0);
            rho(2, 2) = r2(1, 1);
        } else {
            rho(0, 0) = 1.0;  // |1> is an absorbing sink
        }
        return rho;
    }

    const auto full = detail::steady_density(detail::lambda_hamiltonian(p), detail::lambda_jumps(p));
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) rho(i, j) = full(i, j);
    return rho;
}

// Excited-state population of the steady state.
inline double rho_ee_lindblad(const LambdaSystemParams& p) {
    return lambda_steady_state(p)(2, 2).real();
}

// Reference without ground-state coherence: the same system with rho_12 and
// rho_21 projected out of the dynamics. This removes the CPT interference and
// leaves only the smooth one-photon (saturation) envelope, which is what the
// dip factorizes against in the lineshape cross-checks.
inline double rho_ee_lindblad_no_coherence(const LambdaSystemParams& p) {
    p.validate();
    const auto m = detail::liouvillian(detail::lambda_hamiltonian(p), detail::lambda_jumps(p));
    // Column-stacked vec indices: drop 1 = (2,1) and 3 = (1,2) entries of rho.
    const std::vector<int> kept = {0, 2, 4, 5, 6, 7, 8};
    const std::vector<int> diag = {0, 3, 6};  // rho_11, rho_22, rho_ee among kept
    const auto v = detail::steady_vec(m, kept, diag);
    return v(6).real();
}

}  // namespace cptmag
