#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace edgelab {

/// Finite inhomogeneous Markov chain with reference measures.
///
/// Time indices are 0-based: state spaces X_0..X_N, kernels[t] is the
/// M_t x M_{t+1} stochastic matrix moving X_t -> X_{t+1}, reference[t]
/// holds the strictly positive weights on X_{t+1} (uniform when a chain
/// is built without explicit reference data), mu1 is the law of X_0.
struct ChainSpec {
    std::vector<Eigen::MatrixXd> kernels;
    std::vector<Eigen::VectorXd> reference;
    Eigen::VectorXd mu1;
    double eps0 = 0.1;

    int n_steps() const { return static_cast<int>(kernels.size()); }
    int size(int t) const;
    std::vector<int> sizes() const;

    /// Throws std::invalid_argument on dimension mismatches, rows not
    /// summing to 1 within 1e-12, or non-positive reference weights.
    /// Renormalization is deliberately refused.
    void check_structure() const;
};

/// The tables f_t(x,y), one M_t x M_{t+1} matrix per kernel.
/// When `lattice_den` is set every value is num/lattice_den with the
/// integer numerators kept exactly in `lattice_num`.
struct AdditiveFunctional {
    std::vector<Eigen::MatrixXd> tables;
    std::optional<std::int64_t> lattice_den;
    std::vector<Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>> lattice_num;
    std::vector<std::string> labels;

    double norm_sup() const;
    bool has_label(const std::string& l) const;
    void check_against(const ChainSpec& chain) const;
};

struct EllipticityReport {
    double eps_upper = 0;     // sup of one-step densities p_t(x,y)
    double eps_two_step = 0;  // inf of two-step densities
    bool pass = false;
};

/// Eq-style ellipticity audit: densities p_t(x,y) = R_t(x,y)/m_{t+1}(y)
/// must satisfy sup p <= 1/eps0 and the two-step lower bound >= eps0.
EllipticityReport validate_ellipticity(const ChainSpec& chain);

/// Laws of X_0..X_N obtained by pushing mu1 through the kernels.
std::vector<Eigen::VectorXd> marginal_laws(const ChainSpec& chain);

/// Per-step means E[f_t(X_t, X_{t+1})].
Eigen::VectorXd step_means(const ChainSpec& chain, const AdditiveFunctional& f);

struct PathSampleResult {
    Eigen::VectorXd sums;                       // S_N per path
    std::vector<std::vector<int>> paths;        // filled only when keep_paths
};

/// Seed-deterministic sampling of S_N = sum f_t(X_t, X_{t+1}).
/// `center` subtracts E[f_t] per summand.
PathSampleResult sample_paths(const ChainSpec& chain, const AdditiveFunctional& f,
                              std::int64_t n_paths, std::uint64_t seed,
                              bool center = false, bool keep_paths = false);

/// Exact Cov(f_n(X_n,X_{n+1}), f_{n+k}(X_{n+k},X_{n+k+1})), 0-based n.
double mixing_covariance(const ChainSpec& chain, const AdditiveFunctional& f,
                         int n, int k);

/// Joint law P(X_t = x, X_{t+1} = y) as an M_t x M_{t+1} matrix.
Eigen::MatrixXd pair_law(const ChainSpec& chain, int t);

/// Length-N prefix of a chain/functional pair (kernels and tables 0..N-1).
std::pair<ChainSpec, AdditiveFunctional> prefix(const ChainSpec& chain,
                                                const AdditiveFunctional& f, int N);

}  // namespace edgelab
