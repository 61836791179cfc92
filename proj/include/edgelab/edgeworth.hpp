#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "edgelab/chain.hpp"
#include "edgelab/transfer.hpp"

namespace edgelab {

struct CumulantTable {
    double sigma = 0;
    Eigen::VectorXd gammas;      // gammas(k) = Gamma_k for k = 1..K (index 0 unused)
    Eigen::VectorXd normalized;  // normalized(j) = a_j = Gamma_j/(j! sigma^2), j = 3..K
};

/// alpha(j) = E[S^j] for j = 0..K. Throws on degenerate variance.
CumulantTable cumulants_from_moments(const Eigen::VectorXd& alpha);

/// Derivatives of log phi at a point, given psi_j = phi^{(j)}/phi; same
/// composition sum as the cumulant formula. out(k) = (log phi)^{(k)}, k=1..K.
std::vector<std::complex<double>> log_derivatives(
    const std::vector<std::complex<double>>& psi);

/// Dense polynomial, c(k) = coefficient of x^k.
struct Poly {
    Eigen::VectorXd c;
    double eval(double x) const;
    int degree() const;
};

/// Probabilists' Hermite polynomial He_k, exact integer coefficients.
Poly hermite_poly(int k);

/// A_j polynomials, j = 1..r, from normalized cumulants a_j (a(j) valid for
/// 3 <= j <= r+2, so a must have size >= r+3). A_j is stored as the real
/// coefficients c_k of sum_k c_k i^k t^k (the i^k is implicit: the i-power
/// always equals the t-power).
std::vector<Poly> aj_polynomials(const Eigen::VectorXd& a, int r);

/// Termwise c_k i^k t^k -> c_k He_k(z).
Poly hermite_translate(const Poly& A);

struct EdgeworthExpansion {
    int r = 0;
    double sigma = 0;
    std::vector<Poly> A;      // A_1..A_r in i^k t^k form
    std::vector<Poly> P;      // P_1..P_r in z (density level: FT of phi P_j is e^{-t^2/2} A_j)
    std::vector<Poly> P_cdf;  // antiderivative level, used by the expansion CDF

    /// E_{r,N}(z) = Phi(z) + phi(z) sum_j sigma^{-j} P_cdf_j(z); the Stieltjes
    /// transform of this function is e^{-t^2/2}(1 + sum_j sigma^{-j} A_j(t)),
    /// matching the characteristic function of the normalized sum.
    double operator()(double z) const;
};

EdgeworthExpansion expansion_from_cumulants(const CumulantTable& cum, int r);
EdgeworthExpansion build_expansion(const ChainSpec& chain, const AdditiveFunctional& f,
                                   int r, int N = -1);

Eigen::VectorXd expansion_cdf(const EdgeworthExpansion& e, const Eigen::VectorXd& z_grid);

double normal_cdf(double z);
double normal_pdf(double z);

/// 2 int_{-T}^{T} |(f-g)/t| dt + 24 g_density_sup / (pi T).
double esseen_bound(const std::function<std::complex<double>(double)>& f_char,
                    const std::function<std::complex<double>(double)>& g_char,
                    double T, double g_density_sup);

/// Right-continuous step CDF: F(i) = P(S <= x(i)), x strictly increasing.
struct StepCdf {
    Eigen::VectorXd x;
    Eigen::VectorXd F;
};

/// Step CDF of (S - mean)/sigma from an exact lattice pmf.
StepCdf step_cdf_from_pmf(const LatticePMF& pmf, double mean, double sigma);
StepCdf step_cdf_from_samples(const EmpiricalCdf& cdf);

/// sup_t |F(t) - G(t)| with both one-sided values at every jump of F;
/// between jumps G is bracketed with the supplied Lipschitz constant and
/// refined until the possible improvement is below 1e-10.
double kolmogorov_distance(const StepCdf& F, const std::function<double(double)>& G,
                           double g_lipschitz = 1.0);

}  // namespace edgelab
