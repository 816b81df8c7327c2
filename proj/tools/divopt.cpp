#include "divopt/barrier.hpp"
#include "divopt/constant_bound.hpp"
#include "divopt/free_boundary.hpp"
#include "divopt/mc.hpp"
#include "divopt/model.hpp"
#include "divopt/occupation.hpp"
#include "divopt/series.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

using nlohmann::json;
using namespace divopt;

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<double> parse_grid(const std::string& spec)
{
    double lo, hi, step;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || !(step > 0.0))
        throw validation_error("x-grid must be LO:HI:STEP with STEP > 0");
    std::vector<double> g;
    for (double v = lo; v <= hi + 1e-9 * step; v += step)
        g.push_back(v);
    return g;
}

std::string sanitize(std::string msg)
{
    for (char& c : msg)
        if (c == ',' || c == '\n')
            c = ';';
    return msg;
}

int cmd_check(const ModelParams& p, std::ostream& os)
{
    json out;
    out["params"] = {{"mu", p.mu},       {"sigma", p.sigma}, {"delta", p.delta},
                     {"gamma", p.gamma}, {"xi", p.xi},       {"Delta", p.capital_delta}};
    const OptimalityCheck oc = is_constant_strategy_optimal(p);
    out["applicable"] = oc.applicable;
    if (oc.applicable) {
        out["threshold"] = oc.threshold;
        out["optimal"] = oc.optimal;
        out["verdict"] =
            oc.optimal ? "constant payout optimal" : "not optimal; barrier analysis recommended";
        out["default_barrier"] = default_barrier(p);
    } else {
        out["threshold"] = nullptr;
        out["optimal"] = nullptr;
        out["verdict"] = "inapplicable: requires mu > 0";
    }
    json rs = json::array();
    for (int n = 1; n <= 5; ++n) {
        const RootSet r = roots(p, n);
        rs.push_back({{"n", n}, {"eta", r.eta}, {"theta", r.theta}, {"zeta", r.zeta}});
    }
    out["roots"] = rs;
    os << out.dump(2) << "\n";
    return 0;
}

int cmd_bound(const ModelParams& p, const std::string& mode, double t,
              const std::vector<double>& grid, int N, double q_opt, std::ostream& os)
{
    os << "x,v_value,bound_above,bound_below,bound_approx,total,error\n";
    const TruncationConfig tc;

    CoefficientTable tab;
    if (mode == "barrier") {
        const double q = q_opt >= 0.0 ? q_opt : default_barrier(p);
        tab = build_coefficients(p, {q, N});
    }
    for (double x : grid) {
        try {
            double v, above, below, approx, total;
            if (mode == "constant") {
                v = v_xi(p, tc, t, x).value;
                const GoodnessBound gb = goodness_constant(p, tc, t, x);
                above = gb.value;
                below = 0.0;
                approx = 0.0;
                total = gb.total();
            } else {
                v = v_approx(p, tab, t, x);
                const BarrierBound bb = goodness_barrier(p, tab, t, x);
                above = bb.above;
                below = bb.below;
                approx = bb.approx;
                total = bb.total();
            }
            os << fmt(x) << ',' << fmt(v) << ',' << fmt(above) << ',' << fmt(below) << ','
               << fmt(approx) << ',' << fmt(total) << ",\n";
        } catch (const std::exception& e) {
            os << fmt(x) << ",,,,,," << sanitize(e.what()) << "\n";
        }
    }
    return 0;
}

int cmd_simulate(const ModelParams& p, const std::string& strat_spec, double t,
                 const std::vector<double>& grid, const SimConfig& sim, std::ostream& os)
{
    StrategySpec strategy = ConstantRate{p.xi};
    double const_rate = p.xi;
    bool is_constant = true;
    if (strat_spec == "constant") {
        // keep defaults
    } else if (strat_spec.rfind("constant:", 0) == 0) {
        const_rate = std::stod(strat_spec.substr(9));
        if (const_rate < 0.0 || const_rate > p.xi)
            throw validation_error("constant rate must lie in [0, xi]");
        strategy = ConstantRate{const_rate};
    } else if (strat_spec == "barrier") {
        strategy = Barrier{default_barrier(p)};
        is_constant = false;
    } else if (strat_spec.rfind("barrier:", 0) == 0) {
        const double q = std::stod(strat_spec.substr(8));
        if (q < 0.0)
            throw validation_error("barrier level must be >= 0");
        strategy = Barrier{q};
        is_constant = false;
    } else {
        throw validation_error("strategy must be constant[:C] or barrier[:Q]");
    }

    os << "t,x,mean,stderr,closed_form,diff_in_se\n";
    const TruncationConfig tc;
    for (double x : grid) {
        try {
            const McEstimate e = simulate_performance(p, strategy, t, x, sim);
            std::string closed, diff;
            if (is_constant) {
                double cf = 0.0;
                if (const_rate > 0.0 && x > 0.0) {
                    const ModelParams pc =
                        make_params(p.mu, p.sigma, p.delta, p.gamma, const_rate);
                    cf = v_xi(pc, tc, t, x).value;
                }
                closed = fmt(cf);
                diff = fmt((e.mean - cf) / std::max(e.stderr_, 1e-300));
            }
            os << fmt(t) << ',' << fmt(x) << ',' << fmt(e.mean) << ',' << fmt(e.stderr_) << ','
               << closed << ',' << diff << "\n";
        } catch (const std::exception& ex) {
            os << fmt(t) << ',' << fmt(x) << ",,,," << sanitize(ex.what()) << "\n";
        }
    }
    return 0;
}

int cmd_freeboundary(const ModelParams& p, int order, double tol, std::ostream& os)
{
    const FreeBoundarySolution sol = solve_free_boundary(p, order, tol);
    json out;
    out["order"] = sol.K;
    out["solved"] = sol.solved;
    out["experimental"] = true;
    json J = json::array(), L = json::array(), a = json::array(), res = json::array();
    for (int k = 1; k <= sol.solved; ++k) {
        J.push_back(sol.J[k]);
        L.push_back(sol.L[k]);
        res.push_back(sol.residuals[k]);
    }
    for (int k = 0; k < sol.solved; ++k)
        a.push_back(sol.a[k]);
    out["coefficients"] = {{"J", J}, {"L", L}, {"a", a}};
    out["residuals"] = res;
    out["diverged"] = sol.diverged;
    if (sol.diverged)
        out["divergence_order"] = sol.divergence_order;
    os << out.dump(2) << "\n";
    return 0;
}

int cmd_verify(const ModelParams& p, std::ostream& os)
{
    int failures = 0;
    const auto report = [&](bool ok, const std::string& name) {
        os << (ok ? "ok   - " : "FAIL - ") << name << "\n";
        if (!ok)
            ++failures;
    };

    std::mt19937 gen(12345);
    std::uniform_real_distribution<double> U(0.05, 2.0);

    // characteristic roots satisfy their quadratics
    {
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            const ModelParams rp = make_params(U(gen) - 1.0, U(gen), U(gen), U(gen), U(gen));
            for (int n = 1; n <= 50; ++n) {
                const RootSet r = roots(rp, n);
                const double h = 0.5 * rp.sigma * rp.sigma;
                worst = std::max(worst, std::abs(h * r.eta * r.eta + (rp.mu - rp.xi) * r.eta
                                                 - rp.delta * n));
                worst = std::max(worst, std::abs(h * r.theta * r.theta + rp.mu * r.theta
                                                 - rp.delta * n));
                worst = std::max(worst, std::abs(h * r.zeta * r.zeta + rp.mu * r.zeta
                                                 - rp.delta * n));
            }
        }
        report(worst <= 1e-10, "root residuals <= 1e-10");
    }

    const TruncationConfig tc;
    report(std::abs(v_xi(p, tc, 0.7, 0.0).value) <= 1e-11, "v_xi(t,0) = 0");
    report(std::abs(v_xi(p, tc, 0.3, 1e3).value - value_limit(p, 0.3)) <= 1e-8,
           "v_xi(t,x) -> value_limit");

    // goodness bound vanishes whenever the constant strategy is optimal
    {
        const ModelParams po = make_params(0.15, 1.0, 0.05, 0.2, 0.15);
        report(goodness_constant(po, tc, 0.0, 5.0).total() <= 1e-12,
               "goodness_constant = 0 in the optimal regime");
    }

    // smooth fit of the barrier approximation
    {
        bool ok = true;
        try {
            const double q = std::max(default_barrier(p), 0.5);
            const CoefficientTable tab = build_coefficients(p, {q, 12});
            for (double t : {0.0, 1.0}) {
                ok = ok && std::abs(barrier_F(p, tab, t, q) - barrier_G(p, tab, t, q)) <= 1e-9;
                ok = ok && std::abs(barrier_F_x(p, tab, t, q) - barrier_G_x(p, tab, t, q)) <= 1e-9;
                ok = ok && std::abs(barrier_G(p, tab, t, 0.0)) <= 1e-14;
            }
        } catch (const std::exception&) {
            ok = false;
        }
        report(ok, "barrier smooth fit at q");
    }

    // the two kernel evaluation paths agree
    {
        double worst = 0.0;
        const OccupationKernel k =
            make_kernel({p.mu - p.xi, p.mu, p.sigma, p.delta * 2.0});
        for (double x : {0.5, 2.0, 7.0})
            for (double y : {0.3, 2.0, 9.0}) {
                const double a = kernel_f(k, x, y);
                const double b = kernel_f_n(p, 2, x, y);
                worst = std::max(worst, std::abs(a - b) / std::max(1e-300, std::abs(b)));
            }
        report(worst <= 1e-12, "kernel_f matches kernel_f_n");
    }

    // Monte Carlo runs are reproducible
    {
        SimConfig sim;
        sim.n_paths = 200;
        sim.dt = 1e-2;
        const McEstimate a = simulate_performance(p, ConstantRate{p.xi}, 0.0, 2.0, sim);
        const McEstimate b = simulate_performance(p, ConstantRate{p.xi}, 0.0, 2.0, sim);
        report(a.mean == b.mean && a.stderr_ == b.stderr_, "MC determinism");
    }

    os << (failures == 0 ? "all checks passed\n" : "checks failed\n");
    return failures == 0 ? 0 : 3;
}

template <typename T>
void pick(const CLI::Option* opt, T& var, const json& section, const char* key)
{
    if (opt->count() == 0 && section.is_object() && section.contains(key))
        var = section.at(key).get<T>();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"certified suboptimality bounds for restricted dividend strategies"};
    app.require_subcommand(1);

    std::string config_path, output_path;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--output", output_path, "write results to this file instead of stdout");

    double mu = 0.15, sigma = 1.0, delta = 0.05, gamma = 0.2, xi = 1.0;
    auto* o_mu = app.add_option("--mu", mu, "surplus drift");
    auto* o_sigma = app.add_option("--sigma", sigma, "volatility");
    auto* o_delta = app.add_option("--delta", delta, "discount rate");
    auto* o_gamma = app.add_option("--gamma", gamma, "risk aversion");
    auto* o_xi = app.add_option("--xi", xi, "maximal dividend rate");

    // model options may appear after the subcommand as well
    app.fallthrough();

    auto* c_check = app.add_subcommand("check", "optimality classification and roots");

    auto* c_bound = app.add_subcommand("bound", "certified bound curve over an x grid");
    std::string mode = "constant", xgrid = "0:10:0.5";
    double t = 0.0, q_opt = -1.0;
    int N = 20;
    auto* o_mode =
        c_bound->add_option("--mode", mode)->check(CLI::IsMember({"constant", "barrier"}));
    auto* o_t = c_bound->add_option("--t", t, "evaluation time");
    auto* o_grid = c_bound->add_option("--x-grid", xgrid, "LO:HI:STEP");
    auto* o_N = c_bound->add_option("--N", N, "barrier series order");
    auto* o_q = c_bound->add_option("--q", q_opt, "barrier level (default: default_barrier)");

    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo strategy performance");
    std::string strategy = "constant", sim_grid = "0:10:1";
    double sim_t = 0.0, dt = 1e-3;
    long paths = 100000;
    std::uint64_t seed = 0x5eed0001u;
    auto* o_strat = c_sim->add_option("--strategy", strategy, "constant[:C] or barrier[:Q]");
    auto* o_paths = c_sim->add_option("--paths", paths);
    auto* o_dt = c_sim->add_option("--dt", dt);
    auto* o_seed = c_sim->add_option("--seed", seed);
    auto* o_st = c_sim->add_option("--t", sim_t, "evaluation time");
    auto* o_sgrid = c_sim->add_option("--x-grid", sim_grid, "LO:HI:STEP");

    auto* c_fb = app.add_subcommand("freeboundary", "experimental power-series solver");
    int order = 10;
    double tol = 1e-11;
    auto* o_order = c_fb->add_option("--order", order);
    auto* o_tol = c_fb->add_option("--tol", tol);

    auto* c_verify = app.add_subcommand("verify", "run the invariant suite");

    for (CLI::App* sub : {c_check, c_bound, c_sim, c_fb, c_verify})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        json cfg = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            cfg = json::parse(in);
        }
        pick(o_mu, mu, cfg, "mu");
        pick(o_sigma, sigma, cfg, "sigma");
        pick(o_delta, delta, cfg, "delta");
        pick(o_gamma, gamma, cfg, "gamma");
        pick(o_xi, xi, cfg, "xi");

        const json b_cfg = cfg.value("bound", json::object());
        pick(o_mode, mode, b_cfg, "mode");
        pick(o_t, t, b_cfg, "t");
        pick(o_grid, xgrid, b_cfg, "x_grid");
        pick(o_N, N, b_cfg, "N");
        pick(o_q, q_opt, b_cfg, "q");

        const json s_cfg = cfg.value("simulate", json::object());
        pick(o_strat, strategy, s_cfg, "strategy");
        pick(o_paths, paths, s_cfg, "paths");
        pick(o_dt, dt, s_cfg, "dt");
        pick(o_seed, seed, s_cfg, "seed");
        pick(o_st, sim_t, s_cfg, "t");
        pick(o_sgrid, sim_grid, s_cfg, "x_grid");

        const json f_cfg = cfg.value("freeboundary", json::object());
        pick(o_order, order, f_cfg, "order");
        pick(o_tol, tol, f_cfg, "tol");

        const ModelParams p = make_params(mu, sigma, delta, gamma, xi);

        std::ofstream file;
        if (!output_path.empty()) {
            file.open(output_path);
            if (!file)
                throw validation_error("cannot open output file: " + output_path);
        }
        std::ostream& os = output_path.empty() ? std::cout : file;

        if (c_check->parsed())
            return cmd_check(p, os);
        if (c_bound->parsed())
            return cmd_bound(p, mode, t, parse_grid(xgrid), N, q_opt, os);
        if (c_sim->parsed()) {
            SimConfig sim;
            sim.dt = dt;
            sim.n_paths = paths;
            sim.seed = seed;
            return cmd_simulate(p, strategy, sim_t, parse_grid(sim_grid), sim, os);
        }
        if (c_fb->parsed())
            return cmd_freeboundary(p, order, tol, os);
        if (c_verify->parsed())
            return cmd_verify(p, os);
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
