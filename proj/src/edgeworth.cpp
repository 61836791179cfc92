#include "edgelab/edgeworth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edgelab/quadrature.hpp"

namespace edgelab {

namespace {

// Composition sum behind the cumulant formula:
// Gamma_k = sum_v (-1)^{v-1}/v sum_{k_1+..+k_v=k, k_i>=1} k!/(prod k_i!) prod alpha_{k_i}.
// Works verbatim for log-derivatives with alpha -> phi^{(j)}/phi.
template <class T>
std::vector<T> cumulants_impl(const std::vector<T>& alpha) {
    const int K = static_cast<int>(alpha.size()) - 1;  // alpha[1..K]
    std::vector<double> fact(K + 1, 1.0);
    for (int j = 1; j <= K; ++j) fact[j] = fact[j - 1] * j;
    std::vector<T> gamma(K + 1, T(0));
    for (int k = 1; k <= K; ++k) {
        T total(0);
        // enumerate compositions of k by DFS; track product of alpha/k_i!
        struct Frame { int remaining, parts; T prod; };
        std::vector<Frame> stack{{k, 0, T(1)}};
        while (!stack.empty()) {
            Frame fr = stack.back();
            stack.pop_back();
            if (fr.remaining == 0) {
                const double sgn = (fr.parts % 2 == 1) ? 1.0 : -1.0;
                total += fr.prod * T(sgn * fact[k] / fr.parts);
                continue;
            }
            for (int ki = 1; ki <= fr.remaining; ++ki)
                stack.push_back({fr.remaining - ki, fr.parts + 1,
                                 fr.prod * alpha[ki] * T(1.0 / fact[ki])});
        }
        gamma[k] = total;
    }
    return gamma;
}

}  // namespace

CumulantTable cumulants_from_moments(const Eigen::VectorXd& alpha) {
    const int K = static_cast<int>(alpha.size()) - 1;
    if (K < 2) throw std::invalid_argument("need moments up to order 2 at least");
    std::vector<double> a(K + 1, 0.0);
    for (int j = 1; j <= K; ++j) a[j] = alpha(j);
    auto gamma = cumulants_impl(a);
    CumulantTable tab;
    tab.gammas.setZero(K + 1);
    for (int k = 1; k <= K; ++k) tab.gammas(k) = gamma[k];
    if (tab.gammas(2) <= 0) throw std::invalid_argument("degenerate variance");
    tab.sigma = std::sqrt(tab.gammas(2));
    tab.normalized.setZero(K + 1);
    double fact = 2.0;
    for (int j = 3; j <= K; ++j) {
        fact *= j;
        tab.normalized(j) = tab.gammas(j) / (fact * tab.gammas(2));
    }
    return tab;
}

std::vector<std::complex<double>> log_derivatives(
    const std::vector<std::complex<double>>& psi) {
    return cumulants_impl(psi);
}

double Poly::eval(double x) const {
    double v = 0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) v = v * x + c(k);
    return v;
}

int Poly::degree() const {
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k)
        if (c(k) != 0) return k;
    return 0;
}

Poly hermite_poly(int k) {
    // He_{k+1} = z He_k - k He_{k-1}, exact in integers
    std::vector<Eigen::VectorXd> he(k + 1);
    he[0] = Eigen::VectorXd::Ones(1);
    if (k >= 1) {
        he[1].setZero(2);
        he[1](1) = 1;
    }
    for (int m = 2; m <= k; ++m) {
        he[m].setZero(m + 1);
        he[m].segment(1, m) += he[m - 1];
        he[m].head(m - 1) -= (m - 1) * he[m - 2];
    }
    return {he[k]};
}

std::vector<Poly> aj_polynomials(const Eigen::VectorXd& a, int r) {
    if (r < 1) throw std::invalid_argument("r must be >= 1");
    if (a.size() < r + 3)
        throw std::invalid_argument("need normalized cumulants up to order r+2");
    std::vector<Poly> A(r);
    for (int j = 1; j <= r; ++j) {
        Poly& Aj = A[j - 1];
        Aj.c.setZero(3 * j + 1);
        for (int m = 1; m <= j; ++m) {
            // ordered tuples (k_1..k_m), k_i >= 3, sum = 2m + j
            const int target = 2 * m + j;
            struct Frame { int remaining, parts; double prod; };
            std::vector<Frame> stack{{target, 0, 1.0}};
            double fact_m = 1;
            for (int i = 2; i <= m; ++i) fact_m *= i;
            double coeff = 0;
            while (!stack.empty()) {
                Frame fr = stack.back();
                stack.pop_back();
                if (fr.parts == m) {
                    if (fr.remaining == 0) coeff += fr.prod;
                    continue;
                }
                const int left = m - fr.parts;
                for (int ki = 3; ki <= fr.remaining - 3 * (left - 1); ++ki)
                    stack.push_back({fr.remaining - ki, fr.parts + 1, fr.prod * a(ki)});
            }
            Aj.c(j + 2 * m) += coeff / fact_m;
        }
    }
    return A;
}

Poly hermite_translate(const Poly& A) {
    Poly P;
    P.c.setZero(A.c.size());
    for (int k = 0; k < A.c.size(); ++k) {
        if (A.c(k) == 0) continue;
        Poly he = hermite_poly(k);
        P.c.head(he.c.size()) += A.c(k) * he.c;
    }
    return P;
}

double EdgeworthExpansion::operator()(double z) const {
    double corr = 0, s = 1;
    for (int j = 1; j <= r; ++j) {
        s /= sigma;
        corr += s * P_cdf[j - 1].eval(z);
    }
    return normal_cdf(z) + normal_pdf(z) * corr;
}

EdgeworthExpansion expansion_from_cumulants(const CumulantTable& cum, int r) {
    EdgeworthExpansion e;
    e.r = r;
    e.sigma = cum.sigma;
    if (r == 0) return e;
    if (cum.normalized.size() < r + 3)
        throw std::invalid_argument("cumulant table too short for requested order");
    e.A = aj_polynomials(cum.normalized, r);
    for (const Poly& Aj : e.A) {
        e.P.push_back(hermite_translate(Aj));
        // CDF-level counterpart: integrating phi(z) He_k(z) gives
        // -phi(z) He_{k-1}(z), so the Stieltjes transform of
        // phi * P_cdf matches A_j against the characteristic function
        Poly Q;
        Q.c.setZero(std::max<Eigen::Index>(Aj.c.size() - 1, 1));
        for (int k = 1; k < Aj.c.size(); ++k) {
            if (Aj.c(k) == 0) continue;
            Poly he = hermite_poly(k - 1);
            Q.c.head(he.c.size()) -= Aj.c(k) * he.c;
        }
        e.P_cdf.push_back(std::move(Q));
    }
    return e;
}

EdgeworthExpansion build_expansion(const ChainSpec& chain, const AdditiveFunctional& f,
                                   int r, int N) {
    const int k_max = std::max(r + 2, 2);
    Eigen::VectorXd mom = exact_moments(chain, f, k_max, /*center=*/true, N);
    CumulantTable cum = cumulants_from_moments(mom);
    return expansion_from_cumulants(cum, r);
}

Eigen::VectorXd expansion_cdf(const EdgeworthExpansion& e, const Eigen::VectorXd& z_grid) {
    Eigen::VectorXd out(z_grid.size());
    for (int i = 0; i < z_grid.size(); ++i) out(i) = e(z_grid(i));
    return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double esseen_bound(const std::function<std::complex<double>(double)>& f_char,
                    const std::function<std::complex<double>(double)>& g_char,
                    double T, double g_density_sup) {
    if (T <= 0) throw std::invalid_argument("T must be positive");
    auto integrand = [&](double t) {
        if (std::abs(t) < 1e-14) t = t < 0 ? -1e-14 : 1e-14;
        return std::abs(f_char(t) - g_char(t)) / std::abs(t);
    };
    QuadratureOptions opt;
    double integral = adaptive_simpson(integrand, -T, 0.0, opt) +
                      adaptive_simpson(integrand, 0.0, T, opt);
    return 2.0 * integral + 24.0 * g_density_sup / (M_PI * T);
}

StepCdf step_cdf_from_pmf(const LatticePMF& pmf, double mean, double sigma) {
    if (sigma <= 0) throw std::invalid_argument("sigma must be positive");
    StepCdf cdf;
    std::vector<double> xs, Fs;
    double acc = 0;
    for (std::ptrdiff_t i = 0; i < pmf.p.size(); ++i) {
        if (pmf.p(i) <= 0) continue;
        acc += pmf.p(i);
        xs.push_back((pmf.atom_value(i) - mean) / sigma);
        Fs.push_back(acc);
    }
    cdf.x = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
    cdf.F = Eigen::Map<Eigen::VectorXd>(Fs.data(), Fs.size());
    return cdf;
}

StepCdf step_cdf_from_samples(const EmpiricalCdf& ecdf) {
    StepCdf cdf;
    const auto& s = ecdf.sorted;
    std::vector<double> xs, Fs;
    const double n = double(s.size());
    for (int i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s(i + 1) == s(i)) continue;
        xs.push_back(s(i));
        Fs.push_back(double(i + 1) / n);
    }
    cdf.x = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
    cdf.F = Eigen::Map<Eigen::VectorXd>(Fs.data(), Fs.size());
    return cdf;
}

double kolmogorov_distance(const StepCdf& F, const std::function<double(double)>& G,
                           double g_lipschitz) {
    const int n = static_cast<int>(F.x.size());
    if (n == 0) throw std::invalid_argument("empty step CDF");
    for (int i = 1; i < n; ++i)
        if (F.F(i) < F.F(i - 1) - 1e-15) throw std::invalid_argument("non-monotone CDF");
    double best = 0;
    for (int i = 0; i < n; ++i) {
        const double g = G(F.x(i));
        best = std::max(best, std::abs(F.F(i) - g));
        best = std::max(best, std::abs((i ? F.F(i - 1) : 0.0) - g));
    }
    // between jumps F is flat; bracket G by its Lipschitz constant and refine
    struct Seg { double a, b, Fv, Ga, Gb; };
    std::vector<Seg> stack;
    auto push = [&](double a, double b, double Fv) {
        stack.push_back({a, b, Fv, G(a), G(b)});
    };
    push(F.x(0) - 16.0, F.x(0), 0.0);
    for (int i = 0; i + 1 < n; ++i) push(F.x(i), F.x(i + 1), F.F(i));
    push(F.x(n - 1), F.x(n - 1) + 16.0, F.F(n - 1));
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        const double ends = std::max(std::abs(s.Fv - s.Ga), std::abs(s.Fv - s.Gb));
        best = std::max(best, ends);
        const double bound = ends + g_lipschitz * (s.b - s.a) / 2.0;
        if (bound <= best + 1e-10 || s.b - s.a <= 1e-12) continue;
        const double m = 0.5 * (s.a + s.b), Gm = G(m);
        best = std::max(best, std::abs(s.Fv - Gm));
        stack.push_back({s.a, m, s.Fv, s.Ga, Gm});
        stack.push_back({m, s.b, s.Fv, Gm, s.Gb});
    }
    return best;
}

}  // namespace edgelab
