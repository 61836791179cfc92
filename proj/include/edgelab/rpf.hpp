#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "edgelab/chain.hpp"

namespace edgelab {

/// Default validated radius for the RPF sweeps.
double rpf_default_radius(const AdditiveFunctional& f);

/// RPF triplets (lambda_j, h_j, nu_j) for j = 0..N on the chain padded by a
/// rank-one kernel on the right (single absorbing state, f = 0); the left pad
/// collapses to nu_0 = mu1 exactly.
struct PressureTable {
    std::complex<double> z;
    std::vector<std::complex<double>> lambdas;           // lambda_j, j = 0..N-1
    std::vector<std::complex<double>> pressures;         // Pi_j, continuous branch
    std::vector<Eigen::VectorXcd> h;                     // h_j, j = 0..N
    std::vector<Eigen::VectorXcd> nu;                    // nu_j, j = 0..N
    std::vector<double> residual_primal, residual_dual;  // per j
    double max_residual = 0;
};

/// One dual forward + one primal backward sweep; exact triplets on the padded
/// chain. Throws out_of_range beyond the validated radius and runtime_error if
/// any residual exceeds 1e-6. Pressures come from pressure_path_sum (branch
/// continued along the straight path 0 -> z).
PressureTable rpf_sweep(const ChainSpec& chain, const AdditiveFunctional& f,
                        std::complex<double> z, double z0 = -1);

/// || R_z^{j,n} 1 / lambda_{j,n} - nu_{j+n}(1) h_j ||_inf for each n in n_list,
/// plus the fitted geometric ratio delta.
struct ConvergenceAudit {
    std::vector<int> n_list;
    std::vector<double> norms;
    double delta_fit = 0;
};

ConvergenceAudit exp_convergence_audit(const ChainSpec& chain,
                                       const AdditiveFunctional& f,
                                       std::complex<double> z, int j,
                                       const std::vector<int>& n_list);

/// Pi_{j,n}(z) = sum_{s=j}^{j+n-1} Pi_s(z) with the branch tracked along the
/// straight path from 0 to z; also reports Gamma_{j,n}(z) = log E[e^{z S_{j,n}}]
/// on the same branch and the difference.
struct PressureSumReport {
    std::complex<double> pi_sum, gamma, diff;
};

PressureSumReport pressure_sum(const ChainSpec& chain, const AdditiveFunctional& f,
                               std::complex<double> z, int j, int n);

/// g^{(k)}(center) by the Cauchy contour formula with trapezoidal quadrature,
/// doubling the node count until the value moves by <= 1e-9 (relative for
/// large values). Throws on non-convergence.
std::complex<double> cauchy_derivative(
    const std::function<std::complex<double>(std::complex<double>)>& g,
    std::complex<double> center, int k, double radius, int nodes = 64);

/// Lambda_n(t) = log E[e^{it S_n / sigma_n}] + t^2/2 at complex t, branch
/// anchored by continuation from 0 along the real axis to Re(t) and then in
/// the imaginary direction. sigma must be sigma_n of the length-n prefix.
std::complex<double> lambda_fn(const ChainSpec& chain, const AdditiveFunctional& f,
                               int n, double sigma, std::complex<double> t);

struct GrowthAuditRow {
    int n = 0;
    double sigma = 0;
    double value = 0;  // sigma^{k-2} * sup_{|t|<=delta_k sigma} |Lambda^{(k)}(t)|
};

/// Assumption-style boundedness audit; derivative by Cauchy contours over a
/// 32-point real-t grid in [-delta_k sigma_n, delta_k sigma_n].
std::vector<GrowthAuditRow> growth_audit(const ChainSpec& chain,
                                         const AdditiveFunctional& f,
                                         const std::vector<int>& N_list, int k,
                                         double delta_k = 0.1);

/// |Lambda^{(k)}(t)| <= D_k E|S|^k on |t| <= 1/(2 sqrt(E S^2)) for a discrete
/// law given by atoms/probs; Lambda^{(k)} via the log-derivative composition
/// of phi^{(j)}(t)/phi(t).
struct CharFnLogBound {
    double D_fit = 0;        // sup over grid of |Lambda^{(k)}| / E|S|^k
    double min_abs_phi = 1;  // over the checked range
    bool phi_ok = false;     // |phi| >= 1/2 everywhere on the range
};

CharFnLogBound charfn_log_bound_check(const Eigen::VectorXd& atoms,
                                      const Eigen::VectorXd& probs, int k,
                                      int t_points = 33);

}  // namespace edgelab
