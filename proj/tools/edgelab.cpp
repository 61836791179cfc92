// edgelab command-line front end: wires the library modules into the
// verification experiments and emits CSV/JSON reports.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgelab/chain.hpp"
#include "edgelab/chain_io.hpp"
#include "edgelab/edgeworth.hpp"
#include "edgelab/gallery.hpp"
#include "edgelab/hexagon.hpp"
#include "edgelab/quadrature.hpp"
#include "edgelab/rpf.hpp"
#include "edgelab/transfer.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace edgelab;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 42;
    bool exact = false;
    bool mc = false;
    int threads = 1;
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

json load_config(const Options& opt) {
    if (opt.config_path.empty()) return json::object();
    std::ifstream in(opt.config_path);
    if (!in) throw std::invalid_argument("cannot open config: " + opt.config_path);
    json j;
    in >> j;
    return j;
}

void write_manifest(const Options& opt, const std::string& subcommand,
                    const json& config) {
    fs::create_directories(opt.out_dir);
    json m;
    m["subcommand"] = subcommand;
    m["config_hash"] = fnv1a(config.dump());
    m["seed"] = opt.seed;
    m["mode"] = opt.mc ? "mc" : "exact";
    m["threads"] = opt.threads;
    std::ofstream(fs::path(opt.out_dir) / "manifest.json") << m.dump(2) << "\n";
}

std::ofstream open_out(const Options& opt, const std::string& name) {
    fs::create_directories(opt.out_dir);
    std::ofstream out(fs::path(opt.out_dir) / name);
    out.precision(17);
    return out;
}

/// Chain source: {"chain_file": path} or {"generator": {"name": ..., ...}}.
std::pair<ChainSpec, AdditiveFunctional> load_input(const json& cfg,
                                                    std::uint64_t seed) {
    if (cfg.contains("chain_file")) {
        auto file = load_chain_json(cfg["chain_file"].get<std::string>());
        return {std::move(file.chain), std::move(file.f)};
    }
    if (!cfg.contains("generator"))
        throw std::invalid_argument("config needs \"chain_file\" or \"generator\"");
    const json& g = cfg["generator"];
    const std::string name = g.at("name").get<std::string>();
    const int N = g.value("N", 256);
    if (name == "beta-lattice") {
        BetaParams p;
        p.beta = g.value("beta", 0.3);
        p.c = g.value("c", 0.35);
        p.target_order = g.value("target_order", 3);
        return make_beta_lattice_chain(p, N);
    }
    if (name == "cantor-iid") {
        CantorParams p;
        p.p = g.value("p", 3);
        p.k = g.value("k", 1);
        return make_cantor_iid_chain(p, g.value("M_disc", 2 * 125), N);
    }
    if (name == "circle-holder")
        return make_circle_holder_chain(g.value("M_disc", 250),
                                        g.value("alpha", std::log(3) / std::log(5)),
                                        g.value("seed", seed), N);
    if (name == "elliptic") {
        std::optional<double> decay;
        if (g.contains("decay_beta") && !g["decay_beta"].is_null())
            decay = g["decay_beta"].get<double>();
        return make_elliptic_random_chain(g.value("M", 4), g.value("K", 1.0),
                                          g.value("seed", seed), N, decay,
                                          g.value("lattice", false),
                                          g.value("eta", 0.6));
    }
    throw std::invalid_argument("unknown generator: " + name);
}

std::vector<int> n_sweep(const json& cfg, std::vector<int> fallback) {
    if (cfg.contains("N_list")) {
        auto list = cfg["N_list"].get<std::vector<int>>();
        for (size_t i = 1; i < list.size(); ++i)
            if (list[i] <= list[i - 1])
                throw std::invalid_argument("N_list must be strictly increasing");
        return list;
    }
    return fallback;
}

Eigen::VectorXd xi_grid_from(const json& cfg, double lo, double hi, int pts) {
    lo = cfg.value("xi_min", lo);
    hi = cfg.value("xi_max", hi);
    pts = cfg.value("xi_points", pts);
    return Eigen::VectorXd::LinSpaced(pts, lo, hi);
}

/// CDF of the normalized sum, exact when the functional is a lattice one
/// (or --exact forces it), Monte Carlo otherwise. Returns the step CDF, the
/// DKW half width (0 in exact mode), and sigma.
struct CdfResult {
    StepCdf cdf;
    double sigma = 0;
    double band = 0;
    std::string method;
};

CdfResult make_cdf(const ChainSpec& chain, const AdditiveFunctional& f,
                   const Options& opt, std::int64_t n_paths) {
    CdfResult out;
    Eigen::VectorXd mom = exact_moments(chain, f, 2, true);
    out.sigma = std::sqrt(mom(2));
    if (out.sigma < 1e-8) throw std::invalid_argument("degenerate variance");
    if (f.lattice_den && !opt.mc) {
        LatticePMF pmf = lattice_distribution(chain, f);
        Eigen::VectorXd raw = exact_moments(chain, f, 1, false);
        out.cdf = step_cdf_from_pmf(pmf, raw(1), out.sigma);
        out.method = "exact";
        return out;
    }
    EmpiricalCdf e = cdf_estimate(chain, f, n_paths, opt.seed);
    out.cdf = step_cdf_from_samples(e);
    out.band = e.dkw_halfwidth;
    out.method = "mc";
    return out;
}

// ---------------------------------------------------------------- commands

int cmd_validate(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    chain.check_structure();
    f.check_against(chain);
    EllipticityReport rep = validate_ellipticity(chain);
    json out;
    out["n_steps"] = chain.n_steps();
    out["eps0"] = chain.eps0;
    out["sup_density"] = rep.eps_upper;
    out["two_step_inf"] = rep.eps_two_step;
    out["ellipticity_pass"] = rep.pass;
    out["f_sup_norm"] = f.norm_sup();
    out["lattice"] = bool(f.lattice_den);
    if (f.lattice_den) out["lattice_den"] = *f.lattice_den;
    out["labels"] = f.labels;
    open_out(opt, "validate.json") << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_char_fn(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    Eigen::VectorXd grid = xi_grid_from(cfg, 0.0, 10.0, 201);
    std::vector<double> xs(grid.data(), grid.data() + grid.size());
    CharFnTable tab = char_fn(chain, f, xs);
    auto out = open_out(opt, "char_fn.csv");
    out << "xi,re,im,abs\n";
    for (size_t i = 0; i < tab.xi.size(); ++i)
        out << tab.xi[i] << "," << tab.values[i].real() << ","
            << tab.values[i].imag() << "," << std::exp(tab.log_abs[i]) << "\n";
    return 0;
}

int cmd_cumulants(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    const int k_max = cfg.value("k_max", 6);
    CumulantTable cum = cumulants_from_moments(exact_moments(chain, f, k_max));
    auto out = open_out(opt, "cumulants.csv");
    out << "k,gamma_k,a_k\n";
    for (int k = 1; k <= k_max; ++k)
        out << k << "," << cum.gammas(k) << ","
            << (k >= 3 ? cum.normalized(k) : 0.0) << "\n";
    json meta;
    meta["sigma"] = cum.sigma;
    open_out(opt, "cumulants.json") << meta.dump(2) << "\n";
    return 0;
}

int cmd_berry_esseen(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    std::vector<int> Ns = n_sweep(cfg, {64, 128, 256, 512, 1024});
    const std::int64_t n_paths = cfg.value("n_paths", std::int64_t(1000000));
    auto out = open_out(opt, "berry_esseen.csv");
    out << "N,sigma,dist,dist_times_sigma,method,band\n";
    for (int N : Ns) {
        if (N > chain.n_steps()) break;
        auto [c, g] = prefix(chain, f, N);
        CdfResult r = make_cdf(c, g, opt, n_paths);
        if (r.method == "mc" && r.band >= 0.1 / r.sigma) {
            double eps = 0.1 / r.sigma;
            std::int64_t need =
                std::int64_t(std::ceil(std::log(2.0 / 1e-3) / (2 * eps * eps)));
            std::cerr << "MC budget too small at N=" << N << ": need n_paths >= "
                      << need << "\n";
            return 2;
        }
        double dist = kolmogorov_distance(r.cdf, normal_cdf);
        out << N << "," << r.sigma << "," << dist << "," << dist * r.sigma << ","
            << r.method << "," << r.band << "\n";
    }
    return 0;
}

int cmd_edgeworth(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    std::vector<int> Ns = n_sweep(cfg, {256, 512, 1024});
    std::vector<int> orders = cfg.value("orders", std::vector<int>{1, 2});
    const std::int64_t n_paths = cfg.value("n_paths", std::int64_t(1000000));
    auto out = open_out(opt, "edgeworth.csv");
    out << "N,r,dist,dist_times_sigma_pow_r,tail_integral_times_sigma_pow_r\n";
    for (int N : Ns) {
        if (N > chain.n_steps()) break;
        auto [c, g] = prefix(chain, f, N);
        CdfResult cd = make_cdf(c, g, opt, n_paths);
        for (int r : orders) {
            EdgeworthExpansion e = build_expansion(c, g, r);
            double dist = kolmogorov_distance(cd.cdf, [&](double z) { return e(z); },
                                              2.0);
            double tail = std::numeric_limits<double>::quiet_NaN();
            if (cfg.value("tail", false)) {
                double delta = cfg.value("tail_delta", 0.1);
                double B = cfg.value("tail_B", 1.0);
                tail = tail_integral(c, g, delta, B, r) * std::pow(cd.sigma, r);
            }
            out << N << "," << r << "," << dist << ","
                << dist * std::pow(cd.sigma, r) << "," << tail << "\n";
        }
    }
    return 0;
}

int cmd_expansion_test(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    const int r = cfg.value("r", 3);
    EdgeworthExpansion e = build_expansion(chain, f, r);
    json out;
    out["r"] = e.r;
    out["sigma"] = e.sigma;
    for (int j = 0; j < r; ++j) {
        out["A"].push_back(std::vector<double>(e.A[j].c.data(),
                                               e.A[j].c.data() + e.A[j].c.size()));
        out["P"].push_back(std::vector<double>(e.P[j].c.data(),
                                               e.P[j].c.data() + e.P[j].c.size()));
    }
    // FT identity: int e^{itz} phi(z) P_j(z) dz = e^{-t^2/2} A_j(t) with
    // A_j read as sum_k c_k (it)^k.
    double worst = 0;
    for (int j = 1; j <= std::min(r, 3); ++j) {
        const Poly& P = e.P[j - 1];
        const Poly& A = e.A[j - 1];
        for (double t = -5; t <= 5 + 1e-9; t += 0.5) {
            auto re = [&](double z) {
                return std::cos(t * z) * normal_pdf(z) * P.eval(z);
            };
            auto im = [&](double z) {
                return std::sin(t * z) * normal_pdf(z) * P.eval(z);
            };
            std::complex<double> ft(adaptive_simpson(re, -12, 12, {}),
                                    adaptive_simpson(im, -12, 12, {}));
            std::complex<double> rhs = 0, itp = 1;
            for (int k = 0; k < A.c.size(); ++k, itp *= std::complex<double>(0, t))
                rhs += A.c(k) * itp;
            rhs *= std::exp(-t * t / 2);
            worst = std::max(worst, std::abs(ft - rhs));
        }
    }
    out["ft_identity_max_err"] = worst;
    open_out(opt, "expansion.json") << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    return worst <= 1e-8 ? 0 : 1;
}

int cmd_hexagon(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    const int N = cfg.value("N", chain.n_steps());
    Eigen::VectorXd grid = xi_grid_from(cfg, 0.25, 4.0, 16);
    HexagonStats st = hexagon_stats(chain, f, N, grid);
    auto u2 = open_out(opt, "hexagon_u2.csv");
    u2 << "n,u2\n";
    for (size_t i = 0; i < st.n_range.size(); ++i)
        u2 << st.n_range[i] << "," << st.u2(i) << "\n";
    auto d2 = open_out(opt, "hexagon_d2.csv");
    d2 << "n,xi,d2\n";
    for (size_t i = 0; i < st.n_range.size(); ++i)
        for (int j = 0; j < st.xi.size(); ++j)
            d2 << st.n_range[i] << "," << st.xi(j) << "," << st.d2(i, j) << "\n";
    DecayFit fit = decay_check(chain, f, N, grid);
    json out;
    out["c"] = fit.c;
    out["C"] = fit.C;
    out["violations"] = fit.violations;
    out["inconclusive"] = fit.inconclusive;
    auto viol = small_xi_check(chain, f, 2, N - 1,
                               Eigen::VectorXd::LinSpaced(9, 0.0125, 0.1) /
                                   std::max(f.norm_sup(), 1e-12));
    out["small_xi_violations"] = viol.size();
    open_out(opt, "hexagon_fit.json") << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    return (fit.violations == 0 && viol.empty()) ? 0 : 1;
}

int cmd_pressure(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    const double z0 = rpf_default_radius(f);
    std::vector<std::complex<double>> zs;
    if (cfg.contains("z_points"))
        for (const auto& p : cfg["z_points"])
            zs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    else
        for (int i = 0; i < 16; ++i) {
            double th = 2 * M_PI * i / 16;
            zs.push_back(0.9 * z0 * std::complex<double>(std::cos(th), std::sin(th)));
        }
    auto out = open_out(opt, "pressure.csv");
    out << "re_z,im_z,j,re_lambda,im_lambda,re_pi,im_pi,residual\n";
    double max_res = 0;
    for (auto z : zs) {
        PressureTable tab = rpf_sweep(chain, f, z, z0);
        max_res = std::max(max_res, tab.max_residual);
        for (size_t j = 0; j < tab.lambdas.size(); ++j)
            out << z.real() << "," << z.imag() << "," << j << ","
                << tab.lambdas[j].real() << "," << tab.lambdas[j].imag() << ","
                << tab.pressures[j].real() << "," << tab.pressures[j].imag() << ","
                << std::max(tab.residual_primal[j], tab.residual_dual[j]) << "\n";
    }
    json rep;
    rep["z0"] = z0;
    rep["max_residual"] = max_res;
    if (cfg.value("audits", false)) {
        ConvergenceAudit ca = exp_convergence_audit(
            chain, f, 0.5 * z0, 0, {1, 2, 4, 8, 16, 24, 32});
        rep["delta_fit"] = ca.delta_fit;
        std::vector<int> Ns = n_sweep(cfg, {64, 128, 256, 512});
        for (int k : {3, 4}) {
            auto rows = growth_audit(chain, f, Ns, k);
            for (const auto& row : rows)
                rep["growth_audit"].push_back(
                    {{"n", row.n}, {"k", k}, {"sigma", row.sigma}, {"value", row.value}});
        }
    }
    open_out(opt, "pressure.json") << rep.dump(2) << "\n";
    std::cout << rep.dump(2) << "\n";
    return max_res <= 1e-9 ? 0 : 1;
}

int cmd_counterexample(const Options& opt, const json& cfg) {
    auto [chain, f] = load_input(cfg, opt.seed);
    if (!f.lattice_den) throw std::invalid_argument("lattice functional required");
    std::vector<int> Ns = n_sweep(cfg, {64, 256, 1024});
    auto out = open_out(opt, "counterexample.csv");
    out << "N,max_atom,gap,prob_offlattice\n";
    std::optional<CantorParams> cp;
    if (cfg.contains("generator") && cfg["generator"].value("name", "") == "cantor-iid") {
        cp = CantorParams{};
        cp->p = cfg["generator"].value("p", 3);
        cp->k = cfg["generator"].value("k", 1);
    }
    const double ce = cfg.value("k_exponent_c", 0.5);
    for (int N : Ns) {
        if (N > chain.n_steps()) break;
        auto [c, g] = prefix(chain, f, N);
        LatticePMF pmf = lattice_distribution(c, g);
        double gap = double(pmf.min_support_gap()) / double(pmf.q);
        double prob = 0;
        if (cp) {
            // union bound P(k_N S_N not integer) <= N * P(k_N f not integer)
            int nhat = std::max(1, int(std::floor(ce * std::log(double(N)) /
                                                  std::log(double(cp->p)))));
            prob = std::min(1.0, N * plateau_measure(*cp, nhat).convert_to<double>());
        }
        out << N << "," << pmf.max_atom() << "," << gap << "," << prob << "\n";
    }
    return 0;
}

int cmd_gallery(const Options& opt, const json& cfg) {
    const int N = cfg.value("N", 1024);
    fs::create_directories(opt.out_dir);
    auto emit = [&](const std::string& name, const ChainSpec& c,
                    const AdditiveFunctional& g, const json& prov) {
        save_chain_json((fs::path(opt.out_dir) / (name + ".json")).string(), c, g,
                        prov.dump());
        std::cout << name << ".json\n";
    };
    {
        BetaParams p;
        auto [c, g] = make_beta_lattice_chain(p, N);
        emit("beta_lattice", c, g,
             {{"name", "beta-lattice"}, {"beta", p.beta}, {"c", p.c}, {"N", N}});
    }
    // JSON files stay modest; the big discretizations are meant to be built
    // in-process via the generator config block.
    {
        CantorParams p;
        int M = cfg.value("cantor_M_disc", 50);
        auto [c, g] = make_cantor_iid_chain(p, M, std::min(N, 128));
        emit("cantor_iid", c, g,
             {{"name", "cantor-iid"}, {"p", p.p}, {"k", p.k}, {"M_disc", M}});
    }
    {
        int M = cfg.value("circle_M_disc", 64);
        auto [c, g] = make_circle_holder_chain(M, std::log(3) / std::log(5),
                                               opt.seed, std::min(N, 128));
        emit("circle_holder", c, g,
             {{"name", "circle-holder"}, {"M_disc", M}, {"seed", opt.seed}});
    }
    {
        auto [c, g] = make_elliptic_random_chain(4, 1.0, opt.seed, std::min(N, 512));
        emit("elliptic", c, g, {{"name", "elliptic"}, {"M", 4}, {"seed", opt.seed}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"edgelab: Berry-Esseen / Edgeworth laboratory for inhomogeneous chains"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config_path, "JSON config file");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--seed", opt.seed, "RNG seed");
    app.add_option("--threads", opt.threads, "worker threads (recorded; evaluation is serial)");
    auto* ex = app.add_flag("--exact", opt.exact, "force exact lattice evaluation");
    app.add_flag("--mc", opt.mc, "force Monte Carlo evaluation")->excludes(ex);

    std::vector<std::pair<std::string, int (*)(const Options&, const json&)>> cmds = {
        {"validate", cmd_validate},       {"char-fn", cmd_char_fn},
        {"cumulants", cmd_cumulants},     {"edgeworth", cmd_edgeworth},
        {"berry-esseen", cmd_berry_esseen}, {"expansion-test", cmd_expansion_test},
        {"hexagon", cmd_hexagon},         {"pressure", cmd_pressure},
        {"counterexample", cmd_counterexample}, {"gallery", cmd_gallery},
    };
    for (auto& [name, fn] : cmds) app.add_subcommand(name)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = load_config(opt);
        for (auto& [name, fn] : cmds)
            if (app.got_subcommand(name)) {
                write_manifest(opt, name, cfg);
                return fn(opt, cfg);
            }
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
