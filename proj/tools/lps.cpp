// lps: command-line workbench for the enstrophy/L4 growth optimisation problems.
#include "lps/adjoint.hpp"
#include "lps/analysis.hpp"
#include "lps/log.hpp"
#include "lps/manifold.hpp"
#include "lps/workbench.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace lps;

namespace {

enum Exit { ok = 0, validation = 2, numerical = 3, io = 4 };

/// Manifest fields that can be overridden from the command line.
struct Overrides {
    std::optional<int> resolution, max_iterations, random_starts, snapshot_every, save_stride;
    std::optional<double> nu, dt, ell, kmax;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir, initial_guess;
    bool force = false;
    bool quiet = false;

    void attach(CLI::App* app) {
        app->add_option("--n,--resolution", resolution, "grid points per direction");
        app->add_option("--dt", dt, "time step");
        app->add_option("--nu", nu, "viscosity");
        app->add_option("--ell", ell, "Sobolev length scale");
        app->add_option("--seed", seed, "random seed of the initial guess");
        app->add_option("--kmax", kmax, "wavenumber cutoff of the random initial guess");
        app->add_option("--max-iterations", max_iterations, "optimizer iteration cap");
        app->add_option("--random-starts", random_starts, "independent random starts per family");
        app->add_option("--snapshot-every", snapshot_every, "iterate snapshot cadence (0: final only)");
        app->add_option("--save-stride", save_stride, "forward checkpoint stride");
        app->add_option("--initial-guess", initial_guess, "snapshot used as the initial guess");
        app->add_option("-o,--output", output_dir, "output directory (relative to LPS_OUTPUT_ROOT)");
        app->add_flag("--force", force, "rerun and overwrite existing run directories");
        app->add_flag("-q,--quiet", quiet, "suppress progress output");
    }

    void apply(RunManifest& m) const {
        if (resolution) m.resolution = *resolution;
        if (max_iterations) m.max_iterations = *max_iterations;
        if (random_starts) m.random_starts = *random_starts;
        if (snapshot_every) m.snapshot_every = *snapshot_every;
        if (save_stride) m.save_stride = *save_stride;
        if (nu) m.nu = *nu;
        if (dt) m.dt = *dt;
        if (ell) m.ell = *ell;
        if (kmax) m.kmax = *kmax;
        if (seed) m.seed = *seed;
        if (output_dir) m.output_dir = *output_dir;
        if (initial_guess) m.initial_guess = *initial_guess;
    }
};

void print_summary(const RunSummary& s) {
    std::printf("%-18s %-10s %12s %10s %6s %14s %-20s\n", "hash", "status", "param", "T", "iters", "objective",
                "branch");
    for (const auto& r : s.rows) {
        std::printf("%-18s %-10s %12.6g %10.4g %6d %14.6e %-20s\n", r.hash.c_str(), r.status.c_str(),
                    r.constraint_param, r.T, r.iterations, r.objective, r.branch_tag.c_str());
    }
    std::printf("executed %d, skipped %d, failed %d -> %s\n", s.executed, s.skipped, s.failed,
                (s.root / "summary.json").string().c_str());
}

int execute(RunManifest m, const Overrides& o) {
    o.apply(m);
    m.validate();
    RunOptions opts;
    opts.force = o.force;
    opts.threads = resolve_thread_count();
    opts.verbose = !o.quiet;
    const auto summary = run_manifest(m, resolve_output_dir(m.output_dir), opts);
    print_summary(summary);
    return summary.failed ? Exit::numerical : Exit::ok;
}

fs::path summary_root(const std::string& dir) {
    const fs::path root = resolve_output_dir(dir);
    if (!fs::exists(root / "summary.json")) throw IoError("no summary.json under " + root.string());
    return root;
}

// Verification suites -------------------------------------------------------------

SpectralVectorField taylor_green(const WaveGrid& g) {
    constexpr double tp = 2.0 * std::numbers::pi;
    const int n = g.n();
    PhysicalVectorField p{PhysicalField(g), PhysicalField(g), PhysicalField(g)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                const double x = double(i) / n, y = double(j) / n;
                p[0].values[g.physical_index(i, j, l)] = std::sin(tp * x) * std::cos(tp * y);
                p[1].values[g.physical_index(i, j, l)] = -std::cos(tp * x) * std::sin(tp * y);
            }
    return to_spectral(p, FieldRole::velocity);
}

struct Check {
    std::string name;
    double value;
    double limit;
    bool pass;
};

std::vector<Check> verify_taylor_green(int n, double dt, double T, double nu) {
    const WaveGrid g(n);
    const auto u0 = taylor_green(g);
    SolverConfig c;
    c.n = n;
    c.dt = dt;
    c.t_final = T;
    c.nu = nu;
    c.save_stride = c.step_count();
    const auto traj = solve_forward(u0, c);
    const auto exact = std::exp(-8.0 * std::numbers::pi * std::numbers::pi * nu * T) * u0;
    const double err = norm(traj.states.back() - exact, Pairing::l2()) / norm(exact, Pairing::l2());
    return {{"taylor-green relative L2 error", err, 1e-6, err < 1e-6}};
}

std::vector<Check> verify_kappa(int n, double dt, double T, double nu, double p, int directions) {
    const WaveGrid g(n);
    SolverConfig c;
    c.n = n;
    c.dt = dt;
    c.t_final = T;
    c.nu = nu;
    const auto u0 = retract(random_solenoidal(g, 7), ConstraintSpec::l4(std::pow(100.0, 0.25)));
    const auto ge = evaluate_gradient(u0, c, p);
    c.store_states = false;
    auto phi = [&](const SpectralVectorField& u) { return objective_phi(solve_forward(u, c), p); };
    double worst = 0.0;
    for (int d = 0; d < directions; ++d) {
        const auto dir = random_solenoidal(g, 100 + d);
        const double adj = inner_product(ge.l2_gradient, dir, Pairing::l2());
        for (double e : {1e-7, 1e-6, 1e-5, 1e-4}) {
            const double fd = (phi(u0 + e * dir) - phi(u0 - e * dir)) / (2 * e);
            worst = std::max(worst, std::abs(adj / fd - 1.0));
        }
    }
    return {{"kappa |ratio - 1| (p=" + std::to_string(p) + ")", worst, 1e-3, worst <= 1e-3}};
}

std::vector<Check> verify_invariants(int n, double nu) {
    const WaveGrid g(n);
    std::vector<Check> out;
    SolverConfig c;
    c.n = n;
    c.dt = 1e-4;
    c.t_final = 5e-3;
    c.nu = nu;
    const auto audit = audit_energy_balance(solve_forward(2.0 * random_solenoidal(g, 3), c));
    const double eb = audit.max_residual_rate / audit.K0;
    out.push_back({"energy balance residual / K0", eb, 1e-6, eb < 1e-6});

    const SobolevConfig sob{2.0};
    double tang = 0.0, retr = 0.0, riesz = 0.0;
    for (const auto& spec : {ConstraintSpec::l4(2.0), ConstraintSpec::h34_dot(3.0), ConstraintSpec::energy(0.7)}) {
        for (unsigned s = 0; s < 3; ++s) {
            const auto point = retract(random_solenoidal(g, 300 + s), spec);
            retr = std::max(retr, std::abs(constraint_residual(point, spec)) / spec.value);
            const auto t = project_tangent(random_solenoidal(g, 400 + s, 8.0), point, spec, sob);
            tang = std::max(tang, tangency_residual(t, point, spec, sob));
        }
    }
    const auto gl2 = random_solenoidal(g, 50);
    const auto gs = sobolev_gradient(gl2, sob);
    for (unsigned s = 0; s < 5; ++s) {
        const auto z = random_solenoidal(g, 60 + s, 8.0);
        const double rhs = inner_product(gl2, z, Pairing::l2());
        riesz = std::max(riesz, std::abs(inner_product(gs, z, Pairing::h34(sob.ell)) - rhs) / std::abs(rhs));
    }
    out.push_back({"tangency residual", tang, 1e-8, tang < 1e-8});
    out.push_back({"retraction residual", retr, 1e-12, retr < 1e-12});
    out.push_back({"Riesz identity mismatch", riesz, 1e-10, riesz < 1e-10});
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lps: optimal growth of Navier-Stokes initial data on the periodic cube"};
    app.require_subcommand(1);

    // optimize
    auto* opt = app.add_subcommand("optimize", "optimise a single problem instance");
    std::string problem = "problem2";
    double param = 0.0, horizon = 0.0;
    Overrides opt_over;
    opt->add_option("--problem", problem, "problem1 | problem2 | problem3")->capture_default_str();
    opt->add_option("--param", param, "constraint parameter: B^4, S^2 or K0")->required();
    opt->add_option("--T", horizon, "time horizon")->required();
    opt_over.attach(opt);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run every family of a JSON manifest");
    std::string manifest_path;
    Overrides sweep_over;
    sweep->add_option("manifest", manifest_path, "manifest file")->required();
    sweep_over.attach(sweep);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "fits and bound audits over a sweep summary");
    std::string analyze_dir;
    analyze->add_option("dir", analyze_dir, "sweep output directory")->required();

    // export
    auto* exportc = app.add_subcommand("export", "write figure CSV bundles from a sweep summary");
    std::string export_dir, export_out;
    exportc->add_option("dir", export_dir, "sweep output directory")->required();
    exportc->add_option("--out", export_out, "destination directory (default: <dir>/plots)");

    // verify
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite = "all";
    int vn = 32, directions = 3;
    double vp = 8.0;
    verify->add_option("suite", suite, "taylor-green | kappa | invariants | all")
        ->check(CLI::IsMember({"taylor-green", "kappa", "invariants", "all"}))
        ->capture_default_str();
    verify->add_option("--n", vn, "grid size (energy balance needs 32 or more)")->capture_default_str();
    verify->add_option("--p", vp, "objective exponent for the kappa test")->capture_default_str();
    verify->add_option("--directions", directions, "random directions for the kappa test")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Exit::ok : Exit::validation;
    }

    try {
        if (*opt) {
            if (opt_over.quiet) set_log_sink({});
            RunManifest m;
            m.problem = problem_kind_from_string(problem);
            m.constraint_params = {param};
            m.horizons = {horizon};
            m.output_dir = "lps-optimize";
            return execute(m, opt_over);
        }
        if (*sweep) {
            if (sweep_over.quiet) set_log_sink({});
            return execute(load_manifest(manifest_path), sweep_over);
        }
        if (*analyze) {
            const auto s = load_summary(summary_root(analyze_dir));
            std::cout << analyze_summary(s);
            return Exit::ok;
        }
        if (*exportc) {
            const auto s = load_summary(summary_root(export_dir));
            const fs::path out = export_out.empty() ? s.root / "plots" : resolve_output_dir(export_out);
            for (const auto& p : export_plot_data(s, out)) std::cout << p.string() << '\n';
            return Exit::ok;
        }
        if (*verify) {
            std::vector<Check> checks;
            auto add = [&](std::vector<Check> c) { checks.insert(checks.end(), c.begin(), c.end()); };
            if (suite == "taylor-green" || suite == "all") add(verify_taylor_green(vn, 1e-4, 0.02, 0.01));
            if (suite == "kappa" || suite == "all") add(verify_kappa(vn, 5e-4, 0.01, 0.01, vp, directions));
            if (suite == "invariants" || suite == "all") add(verify_invariants(vn, 0.01));
            bool all = true;
            for (const auto& c : checks) {
                std::printf("%s  %-40s %.3e (limit %.0e)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit);
                all = all && c.pass;
            }
            return all ? Exit::ok : Exit::numerical;
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return Exit::validation;
    } catch (const NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return Exit::numerical;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return Exit::io;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return Exit::io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::numerical;
    }
    return Exit::ok;
}
