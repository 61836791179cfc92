#include "edgelab/gallery.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace edgelab {

namespace {

using boost::multiprecision::cpp_int;

cpp_int ipow(cpp_int b, int e) {
    cpp_int r = 1;
    while (e-- > 0) r *= b;
    return r;
}

}  // namespace

void BetaParams::validate() const {
    if (!(beta > 0 && beta < 0.5)) throw std::invalid_argument("beta must be in (0, 1/2)");
    if (target_order <= 1.0 / (1.0 - 2.0 * beta))
        throw std::invalid_argument("target order must exceed 1/(1-2 beta)");
    if (!(c > beta && c < s_beta())) {
        std::ostringstream os;
        os << "c must lie in (" << beta << ", " << s_beta() << ")";
        throw std::invalid_argument(os.str());
    }
}

std::int64_t BetaParams::q(int n) const {
    if (n < 1) throw std::out_of_range("n must be >= 1");
    const int e = int(std::floor(c * std::log2(double(n)) + 1e-12));
    return std::int64_t(1) << e;
}

std::int64_t BetaParams::p(int n) const {
    return std::int64_t(std::floor(std::pow(double(n), -beta) * double(q(n)) + 1e-12));
}

Rational BetaParams::a(int n) const { return Rational(p(n), q(n)); }

std::pair<ChainSpec, AdditiveFunctional> make_beta_lattice_chain(const BetaParams& params,
                                                                 int N) {
    params.validate();
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    ChainSpec chain;
    chain.mu1 = Eigen::VectorXd::Constant(2, 0.5);
    chain.eps0 = 0.5;
    Eigen::MatrixXd fair = Eigen::MatrixXd::Constant(2, 2, 0.5);
    chain.kernels.assign(N, fair);

    AdditiveFunctional f;
    const std::int64_t L = params.q(N);
    f.lattice_den = L;
    for (int t = 0; t < N; ++t) {
        const int n = t + 1;
        const std::int64_t num = params.p(n) * (L / params.q(n));
        Eigen::MatrixXd tab(2, 2);
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> nm(2, 2);
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) {
                nm(x, y) = (y == 1 ? num : -num);
                tab(x, y) = double(nm(x, y)) / double(L);
            }
        f.tables.push_back(tab);
        f.lattice_num.push_back(nm);
    }
    f.labels = {"reducible-by-construction", "lattice"};
    return {std::move(chain), std::move(f)};
}

double CantorParams::alpha() const { return std::log(double(p)) / std::log(double(base())); }

void CantorParams::validate() const {
    if (p < 3 || k < 1) throw std::invalid_argument("need p >= 3 and k >= 1");
}

Rational cantor_eval(const CantorParams& params, const std::vector<int>& digits) {
    params.validate();
    const int B = params.base(), kk = params.k;
    const int len = int(digits.size());
    const cpp_int den = ipow(params.p, len);
    cpp_int num = 0;
    cpp_int place = den;  // p^{len - j} at digit j
    for (int j = 0; j < len; ++j) {
        const int d = digits[j];
        if (d < 0 || d >= B) throw std::invalid_argument("digit out of range");
        place /= params.p;
        if (d % (kk + 1) == 0) {
            num += cpp_int(d / (kk + 1)) * place;
        } else {
            num += cpp_int(d / (kk + 1) + 1) * place;  // plateau value, then stop
            break;
        }
    }
    return Rational(num, den);
}

Rational plateau_measure(const CantorParams& params, int n) {
    params.validate();
    if (n < 0) throw std::out_of_range("n must be >= 0");
    // step m removes (p-1) p^{m-1} plateau intervals of length k (p+q)^{-m}
    Rational rem = 1;
    cpp_int pcount = 1;  // p^{m-1}
    for (int m = 1; m <= n; ++m) {
        rem -= Rational(cpp_int(params.p - 1) * params.k * pcount, ipow(params.base(), m));
        pcount *= params.p;
    }
    return rem;
}

namespace {

std::vector<int> base_digits(std::int64_t v, int base, int len) {
    std::vector<int> d(len, 0);
    for (int i = len - 1; i >= 0; --i) {
        d[i] = int(v % base);
        v /= base;
    }
    return d;
}

}  // namespace

std::pair<ChainSpec, AdditiveFunctional> make_cantor_iid_chain(const CantorParams& params,
                                                               int M_disc, int N) {
    params.validate();
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    const int B = params.base();
    int depth = 0;
    std::int64_t half = 1;
    while (2 * half < M_disc) {
        half *= B;
        ++depth;
    }
    if (2 * half != M_disc)
        throw std::invalid_argument("M_disc must be 2*(p+q)^depth");

    const cpp_int Lbig = ipow(params.p, depth);
    const std::int64_t L = Lbig.convert_to<std::int64_t>();
    Eigen::VectorXd Fval(M_disc);
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> Fnum(M_disc);
    for (std::int64_t j = 0; j < half; ++j) {
        Rational v = cantor_eval(params, base_digits(j, B, depth));
        const std::int64_t num =
            cpp_int(boost::multiprecision::numerator(v) *
                    (Lbig / boost::multiprecision::denominator(v)))
                .convert_to<std::int64_t>();
        Fnum(half + j) = num;                // cell [j, j+1)/half of [0, 1)
        Fnum(half - 1 - j) = -num;           // mirrored cell of [-1, 0)
        Fval(half + j) = double(num) / double(L);
        Fval(half - 1 - j) = -Fval(half + j);
    }

    ChainSpec chain;
    chain.mu1 = Eigen::VectorXd::Constant(M_disc, 1.0 / M_disc);
    chain.eps0 = 0.5;
    chain.kernels.assign(N, Eigen::MatrixXd::Constant(M_disc, M_disc, 1.0 / M_disc));

    AdditiveFunctional f;
    f.lattice_den = L;
    Eigen::MatrixXd tab(M_disc, M_disc);
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> nm(M_disc, M_disc);
    for (int x = 0; x < M_disc; ++x)
        for (int y = 0; y < M_disc; ++y) {
            tab(x, y) = Fval(y);
            nm(x, y) = Fnum(y);
        }
    f.tables.assign(N, tab);
    f.lattice_num.assign(N, nm);
    f.labels = {"reducible-by-construction", "lattice"};
    return {std::move(chain), std::move(f)};
}

std::pair<ChainSpec, AdditiveFunctional> make_circle_holder_chain(int M_disc,
                                                                  double alpha,
                                                                  std::uint64_t seed,
                                                                  int N) {
    if (M_disc < 16) throw std::invalid_argument("M_disc must be >= 16");
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    // closest Cantor exponent realizable with small (p, k)
    CantorParams cp;
    double best = 1e9;
    for (int p : {3, 4, 5, 7})
        for (int k = 1; k <= 5; ++k) {
            CantorParams cand{p, k};
            if (std::abs(cand.alpha() - alpha) < best) {
                best = std::abs(cand.alpha() - alpha);
                cp = cand;
            }
        }
    const int B = cp.base();
    int depth = 1;
    while (std::pow(double(B), depth + 1) <= M_disc) ++depth;

    // base profile: Cantor function of the tent coordinate, continuous around
    // the circle, then normalized to sup-norm 1
    Eigen::VectorXd g(M_disc);
    const double Bd = std::pow(double(B), depth);
    for (int x = 0; x < M_disc; ++x) {
        const double theta = double(x) / M_disc;
        const double u = 1.0 - std::abs(2.0 * theta - 1.0);
        std::int64_t cell = std::min<std::int64_t>(std::int64_t(u * Bd), std::int64_t(Bd) - 1);
        g(x) = cantor_eval(cp, base_digits(cell, B, depth)).convert_to<double>();
    }
    // sup normalization: grid Holder norm stays uniformly bounded (about 2.1
    // for the tent coordinate) and the full value range is 1, which keeps the
    // self-similar spectral dips of the profile at moderate frequencies
    const double norm = g.cwiseAbs().maxCoeff();
    if (norm > 0) g /= norm;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ChainSpec chain;
    chain.mu1 = Eigen::VectorXd::Constant(M_disc, 1.0 / M_disc);
    chain.eps0 = 0.5;
    AdditiveFunctional f;
    for (int t = 0; t < N; ++t) {
        const double a1 = 0.15 + 0.2 * unif(rng);
        const double a2 = 0.35 * unif(rng) * (0.45 - a1) / 0.45;
        const double ph1 = 2.0 * M_PI * unif(rng), ph2 = 2.0 * M_PI * unif(rng);
        Eigen::MatrixXd R(M_disc, M_disc);
        for (int x = 0; x < M_disc; ++x) {
            double rowsum = 0;
            for (int y = 0; y < M_disc; ++y) {
                const double s = 2.0 * M_PI * double(y - x) / M_disc;
                R(x, y) = 1.0 + a1 * std::sin(s + ph1) + a2 * std::sin(2.0 * s + ph2);
                rowsum += R(x, y);
            }
            R.row(x) /= rowsum;
        }
        chain.kernels.push_back(R);
        // post-hoc density audit: p(x,y) = M R(x,y) must stay in [0.5, 2]
        const double lo = M_disc * R.minCoeff(), hi = M_disc * R.maxCoeff();
        if (lo < 0.5 || hi > 2.0)
            throw std::runtime_error("circle kernel density left [0.5, 2]");

        // whole-cell rotations and sign flips keep every step's values on the
        // common profile lattice, so the self-similar resonances line up
        const int offset = int(rng() % std::uint64_t(M_disc));
        const double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
        Eigen::MatrixXd tab(M_disc, M_disc);
        for (int x = 0; x < M_disc; ++x)
            for (int y = 0; y < M_disc; ++y)
                tab(x, y) = sign * g((y + offset) % M_disc);
        f.tables.push_back(tab);
    }
    f.labels = {"irreducible", "holder-circle"};
    return {std::move(chain), std::move(f)};
}

std::pair<ChainSpec, AdditiveFunctional> make_elliptic_random_chain(
    int M, double K, std::uint64_t seed, int N, std::optional<double> decay_beta,
    bool lattice, double eta) {
    if (M < 2 || N < 1 || K <= 0) throw std::invalid_argument("bad chain parameters");
    if (eta < 0 || eta > 0.7) throw std::invalid_argument("eta must be in [0, 0.7]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ChainSpec chain;
    chain.mu1 = Eigen::VectorXd::Constant(M, 1.0 / M);
    chain.eps0 = 0.1;
    AdditiveFunctional f;
    if (lattice) f.lattice_den = 64;
    for (int t = 0; t < N; ++t) {
        Eigen::MatrixXd R(M, M);
        for (int x = 0; x < M; ++x) {
            Eigen::VectorXd noise(M);
            for (int y = 0; y < M; ++y) noise(y) = unif(rng);
            noise /= noise.sum();
            for (int y = 0; y < M; ++y) R(x, y) = (1.0 - eta) / M + eta * noise(y);
        }
        chain.kernels.push_back(R);

        const double scale = decay_beta ? std::pow(double(t + 1), -*decay_beta) : 1.0;
        Eigen::MatrixXd tab(M, M);
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> nm(M, M);
        for (int x = 0; x < M; ++x)
            for (int y = 0; y < M; ++y) tab(x, y) = 2.0 * unif(rng) - 1.0;
        // pin the sup norm to exactly K * scale so decay checks are identities
        tab *= K * scale / tab.cwiseAbs().maxCoeff();
        for (int x = 0; x < M; ++x)
            for (int y = 0; y < M; ++y)
                if (lattice) {
                    nm(x, y) = std::int64_t(std::llround(tab(x, y) * 64.0));
                    tab(x, y) = double(nm(x, y)) / 64.0;
                }
        f.tables.push_back(tab);
        if (lattice) f.lattice_num.push_back(nm);
    }
    f.labels = {"irreducible"};
    if (lattice) f.labels.push_back("lattice");
    return {std::move(chain), std::move(f)};
}

}  // namespace edgelab
