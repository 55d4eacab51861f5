// SPDX-License-Identifier: Apache-2.0
//
// dliq: closed-form value function, free boundaries, HJB residual
// certification and Monte-Carlo validation for optimal liquidation under
// default risk. Machine-readable output only (JSON / CSV).
//
// Exit codes: 0 success (and verification passed), 1 verification
// failure, 2 usage / config / domain error.

#include "dliq/config.hpp"
#include "dliq/figures.hpp"
#include "dliq/hjb.hpp"
#include "dliq/simulate.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using dliq::detail::fmt17;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream f(out_path);
    if (!f)
        throw dliq::Error(dliq::ErrorCode::ConfigError, "cannot open output path: " + out_path);
    f << text << "\n";
}

std::string boundaries_json(const dliq::ValueContext& ctx) {
    const auto& b = ctx.bounds;
    std::string s = "{";
    s += "\"n0\":" + fmt17(b.n0) + ",\"n1\":" + fmt17(b.n1) + ",\"F0\":" + fmt17(b.f0) +
         ",\"kappa\":" + fmt17(b.kappa) + ",\"g_lambda\":[";
    for (int i = 0; i <= 14; ++i) {
        const double y = 0.5 * i;
        if (i)
            s += ",";
        s += "{\"y\":" + fmt17(y) + ",\"g\":" + fmt17(dliq::g_lambda(y, ctx.params, b)) + "}";
    }
    s += "],\"b\":[";
    for (int i = 0; i <= 14; ++i) {
        const double y = 0.5 * i;
        if (i)
            s += ",";
        s += "{\"y\":" + fmt17(y) + ",\"b\":" + fmt17(dliq::b_coeff(y, ctx.params, b)) + "}";
    }
    s += "]}";
    return s;
}

std::string estimate_json(const dliq::McEstimate& e, double analytic_v, dliq::RegionLabel region) {
    std::string s = "{";
    s += "\"mean\":" + fmt17(e.mean) + ",\"std_error\":" + fmt17(e.std_error) +
         ",\"n_paths\":" + std::to_string(e.n_paths) + ",\"dt\":" + fmt17(e.dt) +
         ",\"t_max\":" + fmt17(e.t_max);
    s += ",\"estimator\":\"" + std::string(dliq::to_string(e.estimator)) + "\"";
    s += ",\"policy\":\"" + std::string(dliq::to_string(e.policy.kind)) + "\"";
    s += ",\"analytic_value\":" + fmt17(analytic_v);
    s += ",\"region\":\"" + std::string(dliq::to_string(region)) + "\"";
    const double z = e.std_error > 0.0 ? (e.mean - analytic_v) / e.std_error : 0.0;
    s += ",\"z_score\":" + fmt17(z);
    s += "}";
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal liquidation in a defaultable market"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    double opt_x = 1.0, opt_y = 1.0, opt_w = 0.0;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "model config JSON")->required();
        cmd->add_option("--out", out_path, "output path (default: stdout)");
    };
    auto add_point = [&](CLI::App* cmd) {
        cmd->add_option("--x", opt_x, "impacted price")->required();
        cmd->add_option("--y", opt_y, "remaining inventory")->required();
        cmd->add_option("--w", opt_w, "credit-index value")->required();
    };

    auto* c_bound = app.add_subcommand("boundaries", "exponents and free boundaries");
    add_config(c_bound);

    auto* c_value = app.add_subcommand("value", "value, region and derivatives at a point");
    add_config(c_value);
    add_point(c_value);

    auto* c_region = app.add_subcommand("region", "region label at a point");
    add_config(c_region);
    add_point(c_region);

    auto* c_vhjb = app.add_subcommand("verify-hjb", "variational-inequality residuals on a grid");
    add_config(c_vhjb);
    dliq::GridSpec grid;
    c_vhjb->add_option("--nx", grid.nx, "grid points in x");
    c_vhjb->add_option("--ny", grid.ny, "grid points in y");
    c_vhjb->add_option("--xmin", grid.x_min);
    c_vhjb->add_option("--xmax", grid.x_max);
    c_vhjb->add_option("--ymin", grid.y_min);
    c_vhjb->add_option("--ymax", grid.y_max);
    double corrupt_b = 1.0;
    c_vhjb->add_option("--corrupt-b", corrupt_b, "negative-control hook: scale B(y)")
        ->group(""); // hidden
    int threads = 0;
    c_vhjb->add_option("--threads", threads, "worker cap (unused; evaluation is sequential)");

    auto* c_vid = app.add_subcommand("verify-identities", "construction identity suite");
    add_config(c_vid);
    std::vector<double> y_grid = {0.1, 0.5, 1.0, 1.5, 3.0, 7.0};
    c_vid->add_option("--ys", y_grid, "inventory levels to check");

    auto* c_sim = app.add_subcommand("simulate", "Monte-Carlo estimate under a policy");
    add_config(c_sim);
    add_point(c_sim);
    dliq::SimConfig sim;
    std::string policy_name = "optimal", estimator_name = "survival", csv_path;
    double sell_time = 1.0;
    c_sim->add_option("--policy", policy_name, "optimal|immediate|sell-at|hold");
    c_sim->add_option("--estimator", estimator_name, "survival|sampled");
    c_sim->add_option("--paths", sim.n_paths, "number of paths");
    c_sim->add_option("--dt", sim.dt, "step size");
    c_sim->add_option("--tmax", sim.t_max, "horizon truncation");
    c_sim->add_option("--seed", sim.seed, "RNG seed");
    c_sim->add_option("--threads", sim.threads, "worker threads (0 = hardware)");
    c_sim->add_option("--sell-time", sell_time, "t0 for --policy sell-at");
    c_sim->add_option("--csv", csv_path, "per-path record dump (debugging)");

    auto* c_fig = app.add_subcommand("figures", "figure datasets as CSV");
    add_config(c_fig);
    std::string figure_id, out_dir = ".";
    c_fig->add_option("--figure", figure_id, "f1|f2|f3|f4")->required();
    c_fig->add_option("--out-dir", out_dir, "output directory");
    c_fig->add_option("--threads", threads, "worker cap (unused; evaluation is sequential)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        const dliq::ModelParams params = dliq::params_from_file(config_path);

        if (*c_bound) {
            dliq::ValueContext ctx(params);
            emit(boundaries_json(ctx), out_path);
            return 0;
        }

        if (*c_value || *c_region) {
            dliq::ValueContext ctx(params);
            const dliq::State s{opt_x, opt_y, opt_w};
            const dliq::RegionLabel r = dliq::classify(s, ctx);
            if (*c_region) {
                emit(std::string("{\"region\":\"") + dliq::to_string(r) + "\"}", out_path);
                return 0;
            }
            dliq::ValueDerivatives d{};
            if (s.y == 0.0) {
                d = dliq::ValueDerivatives{0.0, 0.0, 0.0, 0.0};
            } else {
                dliq::State se = s;
                // On a branch edge, evaluate on the selling side.
                for (double e : dliq::branch_edges(s.y, s.w >= params.barrier, ctx))
                    if (std::abs(s.x - e) <= dliq::kEdgeTol * std::max(1.0, e))
                        se.x = e * (1.0 + 10.0 * dliq::kEdgeTol);
                d = dliq::value_derivatives(se, ctx);
            }
            std::string j = "{\"x\":" + fmt17(s.x) + ",\"y\":" + fmt17(s.y) +
                            ",\"w\":" + fmt17(s.w) + ",\"value\":" + fmt17(dliq::value(s, ctx)) +
                            ",\"region\":\"" + dliq::to_string(r) + "\"" +
                            ",\"derivatives\":{\"v_x\":" + fmt17(d.v_x) +
                            ",\"v_xx\":" + fmt17(d.v_xx) + ",\"v_y\":" + fmt17(d.v_y) + "}}";
            emit(j, out_path);
            return 0;
        }

        if (*c_vhjb) {
            dliq::ValueContext ctx(params);
            ctx.bounds.b_scale = corrupt_b;
            const dliq::ResidualReport rep = dliq::verify_hjb(ctx, grid);
            emit(rep.to_json(), out_path);
            return rep.passed ? 0 : 1;
        }

        if (*c_vid) {
            dliq::ValueContext ctx(params);
            const dliq::IdentityReport rep = dliq::verify_appendix_identities(ctx, y_grid);
            emit(rep.to_json(), out_path);
            return rep.passed ? 0 : 1;
        }

        if (*c_sim) {
            if (policy_name == "optimal")
                sim.policy = dliq::Policy::optimal();
            else if (policy_name == "immediate")
                sim.policy = dliq::Policy::immediate();
            else if (policy_name == "sell-at")
                sim.policy = dliq::Policy::sell_at(sell_time);
            else if (policy_name == "hold")
                sim.policy = dliq::Policy::hold();
            else
                throw dliq::Error(dliq::ErrorCode::ConfigError, "unknown policy: " + policy_name);
            if (estimator_name == "survival")
                sim.estimator = dliq::Estimator::SurvivalWeighted;
            else if (estimator_name == "sampled")
                sim.estimator = dliq::Estimator::SampledDefault;
            else
                throw dliq::Error(dliq::ErrorCode::ConfigError,
                                  "unknown estimator: " + estimator_name);
            dliq::ValueContext ctx(params);
            const dliq::State s{opt_x, opt_y, opt_w};
            const dliq::McEstimate est = dliq::estimate(s, ctx, sim);
            if (!csv_path.empty()) {
                std::ofstream f(csv_path);
                if (!f)
                    throw dliq::Error(dliq::ErrorCode::ConfigError,
                                      "cannot open csv path: " + csv_path);
                f << "path_id,defaulted,default_time,discounted_gain,final_inventory\n";
                for (std::int64_t i = 0; i < sim.n_paths; ++i) {
                    auto rng = dliq::SplitMix64::substream(sim.seed, i);
                    const auto r = dliq::run_path(s, ctx, sim, rng);
                    f << i << ',' << (r.defaulted ? 1 : 0) << ',' << fmt17(r.default_time) << ','
                      << fmt17(r.discounted_gain) << ',' << fmt17(r.final_inventory) << '\n';
                }
            }
            emit(estimate_json(est, dliq::value(s, ctx), dliq::classify(s, ctx)), out_path);
            return 0;
        }

        if (*c_fig) {
            namespace fs = std::filesystem;
            fs::create_directories(out_dir);
            dliq::ValueContext ctx(params);
            const auto xs = dliq::default_x_grid();
            if (figure_id == "f1") {
                dliq::write_f1_csv(dliq::dataset_f1(ctx, xs, dliq::default_y_grid()),
                                   (fs::path(out_dir) / "f1_curves.csv").string(),
                                   (fs::path(out_dir) / "f1_markers.csv").string());
            } else if (figure_id == "f2") {
                dliq::ValueContext c2(params);
                dliq::enable_s_cache(c2, 7.0);
                dliq::write_f1_csv(dliq::dataset_f2(c2, xs, dliq::default_y_grid()),
                                   (fs::path(out_dir) / "f2_curves.csv").string(),
                                   (fs::path(out_dir) / "f2_markers.csv").string());
            } else if (figure_id == "f3") {
                std::vector<double> ys(100);
                for (int i = 0; i < 100; ++i)
                    ys[i] = 7.0 * (i + 1) / 100.0;
                dliq::write_f3_csv(dliq::dataset_f3(params, ys, dliq::f3_lambda_sweep()),
                                   (fs::path(out_dir) / "f3_boundaries.csv").string());
            } else if (figure_id == "f4") {
                dliq::write_f4_csv(dliq::dataset_f4(params, xs, 1.5, dliq::f4_lambda_sweep()),
                                   (fs::path(out_dir) / "f4_curves.csv").string());
            } else {
                throw dliq::Error(dliq::ErrorCode::ConfigError, "unknown figure: " + figure_id);
            }
            return 0;
        }
    } catch (const dliq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
