#include "edgelab/rpf.hpp"

#include <cmath>
#include <stdexcept>

#include "edgelab/edgeworth.hpp"
#include "edgelab/transfer.hpp"

namespace edgelab {

namespace {

// dual forward sweep at a fixed z: lambdas[j] and (optionally) nu[j];
// f is taken centered by `means`
void dual_sweep(const ChainSpec& chain, const AdditiveFunctional& f,
                const Eigen::VectorXd& means, std::complex<double> z,
                std::vector<std::complex<double>>& lambdas,
                std::vector<Eigen::VectorXcd>* nu) {
    const int N = chain.n_steps();
    lambdas.assign(N, {});
    Eigen::VectorXcd v = chain.mu1.cast<std::complex<double>>();
    if (nu) {
        nu->assign(N + 1, {});
        (*nu)[0] = v;
    }
    for (int j = 0; j < N; ++j) {
        const auto& R = chain.kernels[j];
        const auto& ft = f.tables[j];
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(R.cols());
        for (int y = 0; y < R.cols(); ++y)
            for (int x = 0; x < R.rows(); ++x)
                if (R(x, y) != 0)
                    w(y) += v(x) * R(x, y) * std::exp(z * (ft(x, y) - means(j)));
        const std::complex<double> lam = w.sum();
        if (std::abs(lam) == 0) throw std::runtime_error("vanishing RPF eigenvalue");
        lambdas[j] = lam;
        v = w / lam;
        if (nu) (*nu)[j + 1] = v;
    }
}

double unwrap_to(double prev, double raw) {
    const double two_pi = 2.0 * M_PI;
    double d = raw - prev;
    d -= two_pi * std::round(d / two_pi);
    return prev + d;
}

// branch-continued log lambda_j along the straight path 0 -> z
std::vector<std::complex<double>> tracked_pressures(const ChainSpec& chain,
                                                    const AdditiveFunctional& f,
                                                    const Eigen::VectorXd& means,
                                                    std::complex<double> z) {
    const int N = chain.n_steps();
    for (int steps = 16; steps <= 256; steps *= 2) {
        std::vector<double> args(N, 0.0);
        std::vector<std::complex<double>> lam;
        bool ok = true;
        for (int s = 1; s <= steps && ok; ++s) {
            dual_sweep(chain, f, means, z * (double(s) / steps), lam, nullptr);
            for (int j = 0; j < N; ++j) {
                const double raw = std::arg(lam[j]);
                const double next = unwrap_to(args[j], raw);
                if (std::abs(next - args[j]) > M_PI / 2) {
                    ok = false;
                    break;
                }
                args[j] = next;
            }
        }
        if (!ok) continue;
        std::vector<std::complex<double>> out(N);
        for (int j = 0; j < N; ++j)
            out[j] = {std::log(std::abs(lam[j])), args[j]};
        return out;
    }
    throw std::runtime_error("pressure branch tracking failed along the path");
}

// branch-continued log E[e^{z S}] along the straight path 0 -> z
std::complex<double> tracked_log_mgf(const ChainSpec& chain, const AdditiveFunctional& f,
                                     std::complex<double> z) {
    for (int steps = 8; steps <= 256; steps *= 2) {
        double arg = 0;
        double log_abs = 0;
        bool ok = true;
        for (int s = 1; s <= steps && ok; ++s) {
            ScaledComplex m = transfer_mgf(chain, f, z * (double(s) / steps), true);
            const double next = unwrap_to(arg, std::arg(m.value));
            if (std::abs(next - arg) > M_PI / 2) {
                ok = false;
                break;
            }
            arg = next;
            log_abs = m.log_abs();
        }
        if (ok) return {log_abs, arg};
    }
    throw std::runtime_error("log-mgf branch tracking failed along the path");
}

ChainSpec prefix_chain(const ChainSpec& chain, int start, int len,
                       const std::vector<Eigen::VectorXd>& mu) {
    ChainSpec sub;
    sub.eps0 = chain.eps0;
    sub.mu1 = mu[start];
    for (int t = start; t < start + len; ++t) sub.kernels.push_back(chain.kernels[t]);
    return sub;
}

AdditiveFunctional slice_functional(const AdditiveFunctional& f, int start, int len) {
    AdditiveFunctional g;
    for (int t = start; t < start + len; ++t) g.tables.push_back(f.tables[t]);
    return g;
}

}  // namespace

double rpf_default_radius(const AdditiveFunctional& f) {
    const double norm = f.norm_sup();
    return norm > 0 ? std::min(0.5, 0.25 / norm) : 0.5;
}

PressureTable rpf_sweep(const ChainSpec& chain, const AdditiveFunctional& f,
                        std::complex<double> z, double z0) {
    if (z0 < 0) z0 = rpf_default_radius(f);
    if (std::abs(z) > z0 + 1e-15)
        throw std::out_of_range("z outside the validated RPF disk");
    const int N = chain.n_steps();
    const Eigen::VectorXd means = step_means(chain, f);

    PressureTable tab;
    tab.z = z;
    dual_sweep(chain, f, means, z, tab.lambdas, &tab.nu);
    tab.pressures = tracked_pressures(chain, f, means, z);

    // primal backward from 1 at the rank-one right pad: h_N = 1
    tab.h.assign(N + 1, {});
    tab.h[N] = Eigen::VectorXcd::Ones(chain.size(N));
    for (int j = N - 1; j >= 0; --j) {
        const auto& R = chain.kernels[j];
        const auto& ft = f.tables[j];
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(R.rows());
        for (int x = 0; x < R.rows(); ++x)
            for (int y = 0; y < R.cols(); ++y)
                if (R(x, y) != 0)
                    v(x) += R(x, y) * std::exp(z * (ft(x, y) - means(j))) * tab.h[j + 1](y);
        tab.h[j] = v / tab.lambdas[j];
    }

    tab.residual_primal.assign(N, 0.0);
    tab.residual_dual.assign(N, 0.0);
    for (int j = 0; j < N; ++j) {
        const auto& R = chain.kernels[j];
        const auto& ft = f.tables[j];
        Eigen::VectorXcd rp = Eigen::VectorXcd::Zero(R.rows());
        Eigen::VectorXcd rd = Eigen::VectorXcd::Zero(R.cols());
        for (int x = 0; x < R.rows(); ++x)
            for (int y = 0; y < R.cols(); ++y)
                if (R(x, y) != 0) {
                    const std::complex<double> wz =
                        R(x, y) * std::exp(z * (ft(x, y) - means(j)));
                    rp(x) += wz * tab.h[j + 1](y);
                    rd(y) += wz * tab.nu[j](x);
                }
        rp -= tab.lambdas[j] * tab.h[j];
        rd -= tab.lambdas[j] * tab.nu[j + 1];
        tab.residual_primal[j] = rp.cwiseAbs().maxCoeff();
        tab.residual_dual[j] = rd.cwiseAbs().maxCoeff();
        tab.max_residual = std::max({tab.max_residual, tab.residual_primal[j],
                                     tab.residual_dual[j]});
    }
    if (tab.max_residual > 1e-6)
        throw std::runtime_error("RPF sweep residual above 1e-6");
    return tab;
}

ConvergenceAudit exp_convergence_audit(const ChainSpec& chain,
                                       const AdditiveFunctional& f,
                                       std::complex<double> z, int j,
                                       const std::vector<int>& n_list) {
    PressureTable tab = rpf_sweep(chain, f, z);
    const Eigen::VectorXd means = step_means(chain, f);
    ConvergenceAudit audit;
    audit.n_list = n_list;
    for (int n : n_list) {
        if (j + n > chain.n_steps()) throw std::out_of_range("audit window exceeds chain");
        Eigen::VectorXcd v = Eigen::VectorXcd::Ones(chain.size(j + n));
        for (int s = j + n - 1; s >= j; --s) {
            const auto& R = chain.kernels[s];
            const auto& ft = f.tables[s];
            Eigen::VectorXcd w = Eigen::VectorXcd::Zero(R.rows());
            for (int x = 0; x < R.rows(); ++x)
                for (int y = 0; y < R.cols(); ++y)
                    if (R(x, y) != 0)
                        w(x) += R(x, y) * std::exp(z * (ft(x, y) - means(s))) * v(y);
            v = w / tab.lambdas[s];
        }
        // nu_{j+n}(1) = 1 by normalization, so compare against h_j directly
        audit.norms.push_back((v - tab.h[j]).cwiseAbs().maxCoeff());
    }
    // geometric fit on the norms that are numerically meaningful
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < audit.norms.size(); ++i) {
        if (audit.norms[i] < 1e-14) continue;
        const double x = audit.n_list[i], y = std::log(audit.norms[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    audit.delta_fit = m >= 2 ? std::exp((m * sxy - sx * sy) / (m * sxx - sx * sx)) : 0.0;
    return audit;
}

PressureSumReport pressure_sum(const ChainSpec& chain, const AdditiveFunctional& f,
                               std::complex<double> z, int j, int n) {
    if (j < 0 || n < 1 || j + n > chain.n_steps())
        throw std::out_of_range("pressure_sum window out of range");
    const Eigen::VectorXd means = step_means(chain, f);
    auto pressures = tracked_pressures(chain, f, means, z);
    PressureSumReport rep;
    rep.pi_sum = 0;
    for (int s = j; s < j + n; ++s) rep.pi_sum += pressures[s];
    auto mu = marginal_laws(chain);
    ChainSpec sub = prefix_chain(chain, j, n, mu);
    AdditiveFunctional fsub = slice_functional(f, j, n);
    rep.gamma = tracked_log_mgf(sub, fsub, z);
    rep.diff = rep.gamma - rep.pi_sum;
    return rep;
}

std::complex<double> cauchy_derivative(
    const std::function<std::complex<double>(std::complex<double>)>& g,
    std::complex<double> center, int k, double radius, int nodes) {
    if (nodes < 8 * std::max(1, k)) nodes = 8 * std::max(1, k);
    double kfac = 1;
    for (int i = 2; i <= k; ++i) kfac *= i;
    std::complex<double> prev = 0;
    bool have_prev = false;
    for (; nodes <= 1024; nodes *= 2) {
        std::complex<double> acc = 0;
        for (int m = 0; m < nodes; ++m) {
            const double th = 2.0 * M_PI * m / nodes;
            acc += g(center + std::polar(radius, th)) * std::polar(1.0, -k * th);
        }
        const std::complex<double> val = acc * kfac / (double(nodes) * std::pow(radius, k));
        if (have_prev && std::abs(val - prev) <= 1e-9 * std::max(1.0, std::abs(val)))
            return val;
        prev = val;
        have_prev = true;
    }
    throw std::runtime_error("cauchy_derivative did not converge");
}

std::complex<double> lambda_fn(const ChainSpec& chain, const AdditiveFunctional& f,
                               int n, double sigma, std::complex<double> t) {
    // walk along the real axis to Re(t), then vertically, unwrapping the
    // imaginary part of log E[e^{it S/sigma}] + t^2/2 (the Lambda branch)
    auto raw = [&](std::complex<double> w) {
        ScaledComplex m =
            transfer_mgf(chain, f, std::complex<double>(0, 1) * w / sigma, true, n);
        std::complex<double> lg(m.log_abs(), std::arg(m.value));
        return lg + 0.5 * w * w;
    };
    const double step = std::max(0.02 * sigma, 1e-6);
    double arg = 0;
    std::complex<double> val;
    auto advance = [&](std::complex<double> w) {
        val = raw(w);
        arg = unwrap_to(arg, val.imag());
    };
    const double xr = t.real();
    const int nx = int(std::ceil(std::abs(xr) / step));
    for (int i = 1; i <= nx; ++i) advance(std::complex<double>(xr * i / nx, 0));
    const double yi = t.imag();
    const int ny = int(std::ceil(std::abs(yi) / step));
    for (int i = 1; i <= ny; ++i) advance(std::complex<double>(xr, yi * i / ny));
    if (nx == 0 && ny == 0) advance(t);
    return {val.real(), arg};
}

std::vector<GrowthAuditRow> growth_audit(const ChainSpec& chain,
                                         const AdditiveFunctional& f,
                                         const std::vector<int>& N_list, int k,
                                         double delta_k) {
    if (k < 3) throw std::invalid_argument("growth_audit needs k >= 3");
    std::vector<GrowthAuditRow> out;
    for (int n : N_list) {
        Eigen::VectorXd mom = exact_moments(chain, f, 2, true, n);
        const double sigma = std::sqrt(std::max(0.0, mom(2)));
        if (sigma < 1e-6) throw std::runtime_error("degenerate variance in growth_audit");
        const double radius = 0.05 * sigma;

        // real-axis branch walk out to the largest anchor we will need
        const double reach = delta_k * sigma + radius;
        auto raw = [&](std::complex<double> w) {
            ScaledComplex m =
                transfer_mgf(chain, f, std::complex<double>(0, 1) * w / sigma, true, n);
            std::complex<double> lg(m.log_abs(), std::arg(m.value));
            return lg + 0.5 * w * w;
        };
        const int walk_pts = 64;
        std::vector<double> wx(2 * walk_pts + 1), warg(2 * walk_pts + 1);
        std::vector<std::complex<double>> wval(2 * walk_pts + 1);
        for (int side = -1; side <= 1; side += 2) {
            double arg = 0;
            for (int i = 0; i <= walk_pts; ++i) {
                const double x = side * reach * i / walk_pts;
                std::complex<double> v = raw({x, 0.0});
                arg = unwrap_to(arg, v.imag());
                const int idx = walk_pts + side * i;
                wx[idx] = x;
                warg[idx] = arg;
                wval[idx] = {v.real(), arg};
            }
        }
        auto anchor_arg = [&](double x) {
            // nearest walked point; warg is the continued branch there
            int best = 0;
            for (int i = 1; i < int(wx.size()); ++i)
                if (std::abs(wx[i] - x) < std::abs(wx[best] - x)) best = i;
            return warg[best];
        };

        GrowthAuditRow row;
        row.n = n;
        row.sigma = sigma;
        const int grid_pts = 32;
        for (int gi = 0; gi < grid_pts; ++gi) {
            const double t0 = -delta_k * sigma +
                              2.0 * delta_k * sigma * gi / (grid_pts - 1);
            // contour values with sequential unwrap, anchored at theta = 0
            auto deriv_at = [&](int nodes) {
                std::vector<std::complex<double>> vals(nodes);
                double arg = anchor_arg(t0 + radius);
                for (int m = 0; m < nodes; ++m) {
                    const double th = 2.0 * M_PI * m / nodes;
                    std::complex<double> v = raw(std::complex<double>(t0, 0) +
                                                 std::polar(radius, th));
                    arg = unwrap_to(arg, v.imag());
                    vals[m] = {v.real(), arg};
                }
                double kfac = 1;
                for (int i = 2; i <= k; ++i) kfac *= i;
                std::complex<double> acc = 0;
                for (int m = 0; m < nodes; ++m) {
                    const double th = 2.0 * M_PI * m / nodes;
                    acc += vals[m] * std::polar(1.0, -k * th);
                }
                return acc * kfac / (double(nodes) * std::pow(radius, k));
            };
            std::complex<double> d64 = deriv_at(64);
            std::complex<double> d128 = deriv_at(128);
            if (std::abs(d128 - d64) > 1e-9 * std::max(1.0, std::abs(d128)))
                d128 = deriv_at(256);
            row.value = std::max(row.value,
                                 std::pow(sigma, k - 2) * std::abs(d128));
        }
        out.push_back(row);
    }
    return out;
}

CharFnLogBound charfn_log_bound_check(const Eigen::VectorXd& atoms,
                                      const Eigen::VectorXd& probs, int k,
                                      int t_points) {
    if (atoms.size() != probs.size() || atoms.size() == 0)
        throw std::invalid_argument("bad atom list");
    double m2 = 0, mk = 0;
    for (int i = 0; i < atoms.size(); ++i) {
        m2 += probs(i) * atoms(i) * atoms(i);
        mk += probs(i) * std::pow(std::abs(atoms(i)), k);
    }
    if (m2 <= 0) throw std::invalid_argument("degenerate law");
    const double t_max = 1.0 / (2.0 * std::sqrt(m2));
    CharFnLogBound rep;
    rep.phi_ok = true;
    for (int g = 0; g < t_points; ++g) {
        const double t = -t_max + 2.0 * t_max * g / (t_points - 1);
        std::vector<std::complex<double>> psi(k + 1);
        std::complex<double> phi = 0;
        for (int i = 0; i < atoms.size(); ++i)
            phi += probs(i) * std::polar(1.0, t * atoms(i));
        psi[0] = 1;
        for (int j = 1; j <= k; ++j) {
            std::complex<double> d = 0;
            for (int i = 0; i < atoms.size(); ++i)
                d += probs(i) * std::pow(std::complex<double>(0, atoms(i)), j) *
                     std::polar(1.0, t * atoms(i));
            psi[j] = d / phi;
        }
        rep.min_abs_phi = std::min(rep.min_abs_phi, std::abs(phi));
        if (std::abs(phi) < 0.5) rep.phi_ok = false;
        auto lam = log_derivatives(psi);
        rep.D_fit = std::max(rep.D_fit, std::abs(lam[k]) / mk);
    }
    return rep;
}

}  // namespace edgelab
