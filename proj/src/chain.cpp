#include "edgelab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace edgelab {

namespace {
constexpr double kRowSumTol = 1e-12;
}

int ChainSpec::size(int t) const {
    if (t < 0 || t > n_steps()) throw std::out_of_range("ChainSpec::size");
    if (t == 0) return static_cast<int>(mu1.size());
    return static_cast<int>(kernels[t - 1].cols());
}

std::vector<int> ChainSpec::sizes() const {
    std::vector<int> s(n_steps() + 1);
    for (int t = 0; t <= n_steps(); ++t) s[t] = size(t);
    return s;
}

void ChainSpec::check_structure() const {
    const int N = n_steps();
    if (N < 1) throw std::invalid_argument("chain needs at least one kernel");
    if (mu1.size() != kernels[0].rows())
        throw std::invalid_argument("mu1 length does not match first kernel");
    if (std::abs(mu1.sum() - 1.0) > kRowSumTol || mu1.minCoeff() < 0)
        throw std::invalid_argument("mu1 is not a probability vector");
    if (!reference.empty() && static_cast<int>(reference.size()) != N)
        throw std::invalid_argument("reference weight count does not match kernels");
    for (int t = 0; t < N; ++t) {
        const auto& R = kernels[t];
        if (t + 1 < N && R.cols() != kernels[t + 1].rows())
            throw std::invalid_argument("kernel dimensions are inconsistent");
        if (R.minCoeff() < 0)
            throw std::invalid_argument("kernel has a negative entry");
        for (int x = 0; x < R.rows(); ++x)
            if (std::abs(R.row(x).sum() - 1.0) > kRowSumTol)
                throw std::invalid_argument("kernel row does not sum to 1");
        if (!reference.empty()) {
            const auto& m = reference[t];
            if (m.size() != R.cols())
                throw std::invalid_argument("reference weights have wrong length");
            if (m.minCoeff() <= 0)
                throw std::invalid_argument("reference weight must be strictly positive");
            if (std::abs(m.sum() - 1.0) > kRowSumTol)
                throw std::invalid_argument("reference weights do not sum to 1");
        }
    }
}

double AdditiveFunctional::norm_sup() const {
    double m = 0;
    for (const auto& tab : tables) m = std::max(m, tab.cwiseAbs().maxCoeff());
    return m;
}

bool AdditiveFunctional::has_label(const std::string& l) const {
    return std::find(labels.begin(), labels.end(), l) != labels.end();
}

void AdditiveFunctional::check_against(const ChainSpec& chain) const {
    if (static_cast<int>(tables.size()) != chain.n_steps())
        throw std::invalid_argument("functional table count does not match kernels");
    for (int t = 0; t < chain.n_steps(); ++t)
        if (tables[t].rows() != chain.kernels[t].rows() ||
            tables[t].cols() != chain.kernels[t].cols())
            throw std::invalid_argument("functional table has wrong shape");
    if (lattice_den) {
        if (*lattice_den <= 0) throw std::invalid_argument("lattice denominator must be positive");
        if (lattice_num.size() != tables.size())
            throw std::invalid_argument("lattice numerators missing");
        for (std::size_t t = 0; t < tables.size(); ++t)
            for (int x = 0; x < tables[t].rows(); ++x)
                for (int y = 0; y < tables[t].cols(); ++y)
                    if (std::abs(tables[t](x, y) -
                                 double(lattice_num[t](x, y)) / double(*lattice_den)) > 1e-12)
                        throw std::invalid_argument("lattice numerators disagree with tables");
    }
}

static Eigen::VectorXd reference_or_uniform(const ChainSpec& chain, int t) {
    if (!chain.reference.empty()) return chain.reference[t];
    const int m = static_cast<int>(chain.kernels[t].cols());
    return Eigen::VectorXd::Constant(m, 1.0 / m);
}

EllipticityReport validate_ellipticity(const ChainSpec& chain) {
    chain.check_structure();
    EllipticityReport rep;
    const int N = chain.n_steps();
    double sup_density = 0;
    for (int t = 0; t < N; ++t) {
        Eigen::VectorXd m = reference_or_uniform(chain, t);
        for (int y = 0; y < m.size(); ++y) {
            if (m(y) == 0) throw std::invalid_argument("zero reference weight");
            sup_density = std::max(sup_density, chain.kernels[t].col(y).maxCoeff() / m(y));
        }
    }
    double inf_two = std::numeric_limits<double>::infinity();
    for (int t = 0; t + 1 < N; ++t) {
        // sum_y p_t(x,y) p_{t+1}(y,z) m_{t+1}(y) = (R_t R_{t+1})(x,z) / m_{t+2}(z)
        Eigen::MatrixXd two = chain.kernels[t] * chain.kernels[t + 1];
        Eigen::VectorXd m2 = reference_or_uniform(chain, t + 1);
        for (int z = 0; z < two.cols(); ++z)
            inf_two = std::min(inf_two, two.col(z).minCoeff() / m2(z));
    }
    if (N == 1) {
        // single-kernel chain: report the one-step lower bound instead
        Eigen::VectorXd m = reference_or_uniform(chain, 0);
        inf_two = std::numeric_limits<double>::infinity();
        for (int y = 0; y < m.size(); ++y)
            inf_two = std::min(inf_two, chain.kernels[0].col(y).minCoeff() / m(y));
    }
    rep.eps_upper = sup_density;
    rep.eps_two_step = inf_two;
    rep.pass = inf_two >= chain.eps0 && sup_density <= 1.0 / chain.eps0;
    return rep;
}

std::vector<Eigen::VectorXd> marginal_laws(const ChainSpec& chain) {
    std::vector<Eigen::VectorXd> mu(chain.n_steps() + 1);
    mu[0] = chain.mu1;
    for (int t = 0; t < chain.n_steps(); ++t)
        mu[t + 1] = chain.kernels[t].transpose() * mu[t];
    return mu;
}

Eigen::MatrixXd pair_law(const ChainSpec& chain, int t) {
    auto mu = marginal_laws(chain);
    return mu[t].asDiagonal() * chain.kernels[t];
}

Eigen::VectorXd step_means(const ChainSpec& chain, const AdditiveFunctional& f) {
    auto mu = marginal_laws(chain);
    Eigen::VectorXd means(chain.n_steps());
    for (int t = 0; t < chain.n_steps(); ++t) {
        Eigen::MatrixXd joint = mu[t].asDiagonal() * chain.kernels[t];
        means(t) = joint.cwiseProduct(f.tables[t]).sum();
    }
    return means;
}

PathSampleResult sample_paths(const ChainSpec& chain, const AdditiveFunctional& f,
                              std::int64_t n_paths, std::uint64_t seed,
                              bool center, bool keep_paths) {
    chain.check_structure();
    f.check_against(chain);
    const int N = chain.n_steps();
    PathSampleResult out;
    out.sums.resize(n_paths);
    if (n_paths == 0) return out;

    Eigen::VectorXd means = center ? step_means(chain, f)
                                   : Eigen::VectorXd::Zero(N);
    // row-wise cumulative kernels for inverse-transform sampling
    std::vector<Eigen::MatrixXd> cum(N);
    for (int t = 0; t < N; ++t) {
        cum[t] = chain.kernels[t];
        for (int x = 0; x < cum[t].rows(); ++x)
            for (int y = 1; y < cum[t].cols(); ++y) cum[t](x, y) += cum[t](x, y - 1);
    }
    Eigen::VectorXd cmu = chain.mu1;
    for (int x = 1; x < cmu.size(); ++x) cmu(x) += cmu(x - 1);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto drawv = [&](const Eigen::MatrixXd& c, int row) {
        double u = unif(rng);
        const int m = static_cast<int>(c.cols());
        int i = 0;
        while (i + 1 < m && u > c(row, i)) ++i;
        return i;
    };
    auto draw0 = [&]() {
        double u = unif(rng);
        int i = 0;
        while (i + 1 < cmu.size() && u > cmu(i)) ++i;
        return i;
    };
    if (keep_paths) out.paths.resize(n_paths);
    for (std::int64_t p = 0; p < n_paths; ++p) {
        int x = draw0();
        double s = 0;
        std::vector<int>* path = keep_paths ? &out.paths[p] : nullptr;
        if (path) { path->clear(); path->push_back(x); }
        for (int t = 0; t < N; ++t) {
            int y = drawv(cum[t], x);
            s += f.tables[t](x, y) - means(t);
            x = y;
            if (path) path->push_back(x);
        }
        out.sums(p) = s;
    }
    return out;
}

double mixing_covariance(const ChainSpec& chain, const AdditiveFunctional& f,
                         int n, int k) {
    const int N = chain.n_steps();
    if (n < 0 || k < 0 || n + k >= N)
        throw std::out_of_range("mixing_covariance index out of range");
    auto mu = marginal_laws(chain);
    Eigen::VectorXd means = step_means(chain, f);
    if (k == 0) {
        Eigen::MatrixXd joint = mu[n].asDiagonal() * chain.kernels[n];
        double m2 = joint.cwiseProduct(f.tables[n].cwiseProduct(f.tables[n])).sum();
        return m2 - means(n) * means(n);
    }
    // signed measure at time n+1: a(y) = sum_x mu_n(x) R_n(x,y) f_n(x,y)
    Eigen::VectorXd a = (mu[n].asDiagonal() * chain.kernels[n])
                            .cwiseProduct(f.tables[n])
                            .colwise()
                            .sum()
                            .transpose();
    for (int t = n + 1; t < n + k; ++t) a = chain.kernels[t].transpose() * a;
    Eigen::MatrixXd joint2 = a.asDiagonal() * chain.kernels[n + k];
    double cross = joint2.cwiseProduct(f.tables[n + k]).sum();
    return cross - means(n) * means(n + k);
}

std::pair<ChainSpec, AdditiveFunctional> prefix(const ChainSpec& chain,
                                                const AdditiveFunctional& f, int N) {
    if (N < 1 || N > chain.n_steps())
        throw std::invalid_argument("prefix length out of range");
    ChainSpec c;
    c.kernels.assign(chain.kernels.begin(), chain.kernels.begin() + N);
    if (!chain.reference.empty())
        c.reference.assign(chain.reference.begin(), chain.reference.begin() + N);
    c.mu1 = chain.mu1;
    c.eps0 = chain.eps0;
    AdditiveFunctional g;
    g.tables.assign(f.tables.begin(), f.tables.begin() + N);
    g.lattice_den = f.lattice_den;
    if (!f.lattice_num.empty())
        g.lattice_num.assign(f.lattice_num.begin(), f.lattice_num.begin() + N);
    g.labels = f.labels;
    return {std::move(c), std::move(g)};
}

}  // namespace edgelab
