#pragma once

#include <complex>
#include <vector>

#include "edgelab/chain.hpp"

namespace edgelab {

/// Conditional law of X_n given (X_{n-1}, X_{n+1}); out[y](x,z) = b(y|x,z).
/// 0-based time: valid for 1 <= n <= N-1.
std::vector<Eigen::MatrixXd> bridge_kernel(const ChainSpec& chain, int n);

/// u_n^2 = E[Gamma(P_n)^2] for the hexagon based at time n (0-based, needs
/// tables f_{n-2}, f_{n-1}, f_n, so 2 <= n <= N-1). Evaluated by a cycle
/// contraction in O(M^3).
double hexagon_u2(const ChainSpec& chain, const AdditiveFunctional& f, int n);

/// d_n^2(xi) = 4 E[sin^2(xi Gamma(P_n)/2)] = 2 - 2 Re E[e^{i xi Gamma}].
double hexagon_d2(const ChainSpec& chain, const AdditiveFunctional& f, int n,
                  double xi);
Eigen::VectorXd hexagon_d2(const ChainSpec& chain, const AdditiveFunctional& f,
                           int n, const Eigen::VectorXd& xi_grid);

/// O(M^6) oracles: direct sums over all hexagon tuples.
double hexagon_u2_brute(const ChainSpec& chain, const AdditiveFunctional& f, int n);
double hexagon_d2_brute(const ChainSpec& chain, const AdditiveFunctional& f, int n,
                        double xi);

struct HexagonStats {
    std::vector<int> n_range;  // hexagon base times, 2..N-1
    Eigen::VectorXd u2;
    Eigen::VectorXd xi;
    Eigen::MatrixXd d2;  // d2(i, j) = d_{n_range[i]}^2(xi(j))
    Eigen::VectorXd D;   // D(j) = sum_n d_n^2(xi_j)
};

HexagonStats hexagon_stats(const ChainSpec& chain, const AdditiveFunctional& f,
                           int N, const Eigen::VectorXd& xi_grid);

struct WindowReport {
    int start = 0, len = 0;
    double var = 0, sum_u2 = 0, ratio = 0;  // ratio = (var+1)/(sum_u2+1)
};

/// Windows are (start, len) pairs of step ranges [start, start+len);
/// hexagon bases run over start+2 .. start+len-1.
std::vector<WindowReport> sandwich_check(const ChainSpec& chain,
                                         const AdditiveFunctional& f,
                                         const std::vector<std::pair<int, int>>& windows);

struct DecayFit {
    double c = 0, C = 0;        // pointwise bound |Phi| <= C e^{-c D}
    double intercept_ls = 0;    // least-squares intercept, for reporting
    bool inconclusive = false;  // all D_N below 1
    int violations = 0;         // grid points breaking the fitted bound
};

DecayFit decay_check(const ChainSpec& chain, const AdditiveFunctional& f, int N,
                     const Eigen::VectorXd& xi_grid);

/// Violations of d_n^2(xi) >= xi^2 u_n^2 / 2 on {xi : ||f||_inf |xi| <= delta}.
std::vector<std::pair<int, double>> small_xi_check(const ChainSpec& chain,
                                                   const AdditiveFunctional& f,
                                                   int n_lo, int n_hi,
                                                   const Eigen::VectorXd& xi_grid,
                                                   double delta = 0.1);

}  // namespace edgelab
