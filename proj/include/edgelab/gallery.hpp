#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "edgelab/chain.hpp"
#include "edgelab/transfer.hpp"  // Rational

namespace edgelab {

/// Slow-variance lattice family: q_n = 2^{floor(c log2 n)}, p_n = floor(n^-beta q_n),
/// a_n = p_n / q_n; the chain is iid fair signs with f_n = a_n Y_n.
struct BetaParams {
    double beta = 0.3;
    double c = 0.35;
    int target_order = 3;  // smallest failing order s; admissible c in (beta, s_beta)

    double s_beta() const { return (target_order - 1) * (0.5 - beta); }
    void validate() const;
    std::int64_t q(int n) const;  // n is 1-based
    std::int64_t p(int n) const;
    Rational a(int n) const;
};

std::pair<ChainSpec, AdditiveFunctional> make_beta_lattice_chain(const BetaParams& params,
                                                                 int N);

struct CantorParams {
    int p = 3;
    int k = 1;

    int q() const { return (p - 1) * k; }
    int base() const { return p + q(); }
    double alpha() const;
    void validate() const;
};

/// Exact Cantor-function value from the base-(p+q) digit string of x in [0,1];
/// result has denominator p^len.
Rational cantor_eval(const CantorParams& params, const std::vector<int>& digits);

/// Leb{x : p^n f(x) not in Z}, computed by subtracting the plateau intervals
/// of the first n construction steps.
Rational plateau_measure(const CantorParams& params, int n);

/// iid uniform on M_disc = 2*(p+q)^depth cells of [-1,1]; f is the odd
/// extension of the Cantor function, exact on the cell lattice p^{-depth}.
std::pair<ChainSpec, AdditiveFunctional> make_cantor_iid_chain(const CantorParams& params,
                                                               int M_disc, int N);

/// Discretized circle with seeded circulant kernels (densities in [0.5, 2])
/// and Cantor-profile functionals of Holder exponent alpha, grid Holder
/// norm <= 1.
std::pair<ChainSpec, AdditiveFunctional> make_circle_holder_chain(int M_disc,
                                                                  double alpha,
                                                                  std::uint64_t seed,
                                                                  int N);

/// Generic elliptic chain: kernels (1-eta) uniform + eta seeded noise, f
/// uniform in [-K, K] (scaled n^{-decay_beta} when set; rounded to (1/64)Z in
/// the lattice variant).
std::pair<ChainSpec, AdditiveFunctional> make_elliptic_random_chain(
    int M, double K, std::uint64_t seed, int N,
    std::optional<double> decay_beta = std::nullopt, bool lattice = false,
    double eta = 0.6);

}  // namespace edgelab
