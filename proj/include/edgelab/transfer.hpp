#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "edgelab/chain.hpp"

namespace edgelab {

using Rational = boost::multiprecision::cpp_rational;

/// E = value * exp(log_scale); keeps characteristic functions representable
/// when |Phi| underflows double range.
struct ScaledComplex {
    std::complex<double> value{1.0, 0.0};
    double log_scale = 0.0;

    std::complex<double> collapse() const { return value * std::exp(log_scale); }
    double log_abs() const { return log_scale + std::log(std::abs(value)); }
};

/// E[e^{z S_N}] by the transfer recursion v_{t+1}(y) = sum_x v_t(x) e^{z f_t(x,y)} R_t(x,y),
/// with per-step sup-norm renormalization. z = i*xi gives the characteristic function.
ScaledComplex transfer_mgf(const ChainSpec& chain, const AdditiveFunctional& f,
                           std::complex<double> z, bool center = true, int N = -1);

struct CharFnTable {
    std::vector<double> xi;
    std::vector<std::complex<double>> values;
    std::vector<double> log_abs;
    bool centered = true;
};

CharFnTable char_fn(const ChainSpec& chain, const AdditiveFunctional& f,
                    const std::vector<double>& xi_grid, bool center = true,
                    int N = -1);

/// Moments E[S_N^j], j = 0..k_max (centered when `center`).
/// Throws if any intermediate magnitude exceeds 1e300.
Eigen::VectorXd exact_moments(const ChainSpec& chain, const AdditiveFunctional& f,
                              int k_max, bool center = true, int N = -1);

struct LatticePMF {
    std::int64_t q = 1;      // atoms live on (1/q)Z
    std::int64_t k_min = 0;  // first atom is k_min/q
    Eigen::VectorXd p;
    std::vector<Rational> p_exact;  // filled in rational mode only
    std::string provenance = "exact";

    double atom_value(std::ptrdiff_t i) const {
        return double(k_min + std::int64_t(i)) / double(q);
    }
    std::ptrdiff_t size() const { return p.size(); }
    double max_atom() const { return p.size() ? p.maxCoeff() : 0.0; }
    /// smallest gap between consecutive atoms of positive mass, in units of 1/q
    std::int64_t min_support_gap() const;
};

/// Exact distribution of S_N over the lattice (1/L)Z by dynamic programming.
/// Rational mode keeps every probability exact (requires kernel entries that
/// are exact binary fractions, which all gallery lattice chains satisfy).
LatticePMF lattice_distribution(const ChainSpec& chain, const AdditiveFunctional& f,
                                bool rational_mode = false, int N = -1);

struct EmpiricalCdf {
    Eigen::VectorXd sorted;  // centered-normalized samples
    double dkw_halfwidth = 0;
    double sigma = 0;
    double mean = 0;

    double operator()(double t) const;
};

/// Monte Carlo CDF of (S_N - E S_N)/sigma_N with a DKW band at delta = 1e-3.
EmpiricalCdf cdf_estimate(const ChainSpec& chain, const AdditiveFunctional& f,
                          std::int64_t n_paths, std::uint64_t seed, int N = -1);

/// Integral of |Phi_N(x)/x| over delta <= |x| <= B*sigma_N^{r-1} with Phi_N
/// the characteristic function of the centered (not normalized) S_N.
double tail_integral(const ChainSpec& chain, const AdditiveFunctional& f,
                     double delta, double B, int r, int N = -1);

/// Characteristic function of the centered S_N evaluated from an exact pmf
/// (fast incremental phase accumulation).
std::complex<double> pmf_char_fn(const LatticePMF& pmf, double mean, double x);

}  // namespace edgelab
