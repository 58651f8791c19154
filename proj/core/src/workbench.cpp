#include "lps/workbench.hpp"

#include "lps/analysis.hpp"
#include "lps/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace lps {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::string num(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double jget(const json& j, const char* key, double fallback = 0.0) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<double>();
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + p.string());
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw IoError("error writing " + tmp.string());
    }
    fs::rename(tmp, p, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + p.string() + ": " + ec.message());
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

// Manifest ----------------------------------------------------------------------

const std::set<std::string>& manifest_keys() {
    static const std::set<std::string> k = {"problem", "B4", "S2", "K0", "T", "seed", "resolution", "nu", "dt",
                                            "ell", "save_stride", "output_dir", "random_starts", "snapshot_every",
                                            "max_iterations", "kmax", "continuation", "initial_guess"};
    return k;
}

// A bare number is accepted as a one-element list.
std::vector<double> number_list(const json& j, const std::string& key) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ValidationError("manifest key '" + key + "' must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ValidationError("manifest key '" + key + "' must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

template <class T>
T typed(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ValidationError("manifest key '" + key + "' has the wrong type");
    }
}

// Run execution -------------------------------------------------------------------

struct Member {
    double param = 0.0;
    double T = 0.0;
};

struct Family {
    int start = 0;
    std::vector<Member> members;
};

std::vector<Family> enumerate_families(const RunManifest& m) {
    std::vector<Family> out;
    if (m.constraint_params.empty() || m.horizons.empty()) return out;
    for (int r = 0; r < m.random_starts; ++r) {
        if (m.continuation == ContinuationAxis::horizon) {
            for (double c : m.constraint_params) {
                Family f{r, {}};
                for (double T : m.horizons) f.members.push_back({c, T});
                out.push_back(std::move(f));
            }
        } else {
            for (double T : m.horizons) {
                Family f{r, {}};
                for (double c : m.constraint_params) f.members.push_back({c, T});
                out.push_back(std::move(f));
            }
        }
    }
    return out;
}

json run_identity(const RunManifest& m, const Member& mem, int start, const std::string& seeded_from) {
    return json{{"format", kFormatVersion},
                {"problem", to_string(m.problem)},
                {"constraint_param", mem.param},
                {"T", mem.T},
                {"resolution", m.resolution},
                {"nu", m.nu},
                {"dt", m.dt},
                {"ell", m.ell},
                {"save_stride", m.save_stride},
                {"max_iterations", m.max_iterations},
                {"kmax", m.kmax},
                {"seed", m.seed},
                {"start", start},
                {"seeded_from", seeded_from}};
}

json row_to_json(const SummaryRow& r) {
    return json{{"hash", r.hash},
                {"problem", r.problem},
                {"constraint_kind", r.constraint_kind},
                {"constraint_param", r.constraint_param},
                {"constraint_value", r.constraint_value},
                {"T", r.T},
                {"start", r.start},
                {"status", r.status},
                {"reason", r.reason},
                {"converged", r.converged},
                {"iterations", r.iterations},
                {"objective", jnum(r.objective)},
                {"branch_tag", r.branch_tag},
                {"K0", jnum(r.K0)},
                {"E0", jnum(r.E0)},
                {"l4_norm0", jnum(r.l4_norm0)},
                {"h34_norm0", jnum(r.h34_norm0)},
                {"l4_rate0", jnum(r.l4_rate0)},
                {"max_enstrophy", jnum(r.max_enstrophy)},
                {"gn_ratio_p4", jnum(r.gn_ratio_p4)},
                {"xi", r.xi ? jnum(*r.xi) : json(nullptr)},
                {"theta", r.theta ? jnum(*r.theta) : json(nullptr)},
                {"run_dir", r.run_dir}};
}

SummaryRow row_from_json(const json& j) {
    SummaryRow r;
    r.hash = j.value("hash", "");
    r.problem = j.value("problem", "");
    r.constraint_kind = j.value("constraint_kind", "");
    r.constraint_param = jget(j, "constraint_param");
    r.constraint_value = jget(j, "constraint_value");
    r.T = jget(j, "T");
    r.start = j.value("start", 0);
    r.status = j.value("status", "");
    r.reason = j.value("reason", "");
    r.converged = j.value("converged", false);
    r.iterations = j.value("iterations", 0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.objective = jget(j, "objective", nan);
    r.branch_tag = j.value("branch_tag", "");
    r.K0 = jget(j, "K0", nan);
    r.E0 = jget(j, "E0", nan);
    r.l4_norm0 = jget(j, "l4_norm0", nan);
    r.h34_norm0 = jget(j, "h34_norm0", nan);
    r.l4_rate0 = jget(j, "l4_rate0", nan);
    r.max_enstrophy = jget(j, "max_enstrophy", nan);
    r.gn_ratio_p4 = jget(j, "gn_ratio_p4", nan);
    if (j.contains("xi") && !j["xi"].is_null()) r.xi = j["xi"].get<double>();
    if (j.contains("theta") && !j["theta"].is_null()) r.theta = j["theta"].get<double>();
    r.run_dir = j.value("run_dir", "");
    return r;
}

json report_to_json(const OptimizationReport& rep) {
    json its = json::array();
    for (const auto& it : rep.iterations) {
        its.push_back({{"iteration", it.iteration},
                       {"objective", jnum(it.objective)},
                       {"tau", jnum(it.tau)},
                       {"gradient_norm", jnum(it.gradient_norm)},
                       {"constraint_residual", jnum(it.constraint_residual)},
                       {"tangency", jnum(it.tangency)},
                       {"evaluations", it.evaluations},
                       {"wall_seconds", jnum(it.wall_seconds)}});
    }
    return json{{"problem", to_string(rep.problem.which)},
                {"constraint_kind", to_string(rep.problem.constraint.kind)},
                {"constraint_value", rep.problem.constraint.value},
                {"objective_exponent", rep.problem.objective_exponent},
                {"T", rep.problem.T},
                {"converged", rep.converged},
                {"restarted_from_fallback", rep.restarted},
                {"reason", rep.reason},
                {"branch_tag", rep.branch_tag},
                {"final_objective", jnum(rep.final_objective)},
                {"iterations", its}};
}

std::string diagnostics_csv(const TrajectoryStore& traj) {
    std::ostringstream os;
    os << "t,K,E,E1,E2,E3,l4_norm,l2_norm,h34_seminorm,max_velocity\n";
    for (const auto& d : traj.diagnostics) {
        os << num(d.t) << ',' << num(d.K) << ',' << num(d.E) << ',' << num(d.Ei[0]) << ',' << num(d.Ei[1]) << ','
           << num(d.Ei[2]) << ',' << num(d.l4_norm) << ',' << num(d.l2_norm) << ',' << num(d.h34_seminorm) << ','
           << num(d.max_velocity) << '\n';
    }
    return os.str();
}

struct MemberResult {
    SummaryRow row;
    std::optional<SpectralVectorField> optimum;
    bool skipped = false;
};

class Runner {
public:
    Runner(const RunManifest& m, fs::path root, const RunOptions& o) : m_(m), root_(std::move(root)), opt_(o) {}

    std::vector<MemberResult> run_family(const Family& fam) {
        std::vector<MemberResult> out;
        const WaveGrid grid(m_.resolution);
        SpectralVectorField guess;
        std::string seeded_from;
        if (!m_.initial_guess.empty()) {
            guess = read_snapshot(m_.initial_guess);
            if (guess.grid() != grid) throw ValidationError("initial guess resolution does not match manifest");
            seeded_from = "file:" + hex64(fnv1a64(read_text(m_.initial_guess)));
        } else {
            guess = random_solenoidal(grid, m_.seed + std::uint64_t(fam.start), m_.kmax);
            seeded_from = "random";
        }
        const SpectralVectorField family_seed = guess;
        for (const Member& mem : fam.members) {
            MemberResult res = run_member(mem, fam.start, guess, seeded_from, family_seed);
            if (res.optimum) {
                guess = *res.optimum;
                seeded_from = res.row.hash;
            }
            out.push_back(std::move(res));
        }
        return out;
    }

private:
    MemberResult run_member(const Member& mem, int start, const SpectralVectorField& guess,
                            const std::string& seeded_from, const SpectralVectorField& family_seed) {
        const json id = run_identity(m_, mem, start, seeded_from);
        const std::string hash = hex64(fnv1a64(id.dump()));
        const fs::path dir = root_ / "runs" / hash;
        const fs::path status_file = dir / "status.json";
        MemberResult res;

        std::error_code ec;
        if (fs::exists(dir, ec)) {
            const bool finished = fs::exists(status_file, ec);
            if (finished && !opt_.force) {
                const json st = parse_json(read_text(status_file), status_file.string());
                res.row = row_from_json(st.at("row"));
                res.row.run_dir = dir.string();
                if (res.row.status == "ok") res.optimum = read_snapshot(dir / "u0_opt.lpsf");
                res.skipped = true;
                if (opt_.verbose) log_info("skip completed run " + hash);
                return res;
            }
            if (!opt_.force) {
                throw ValidationError("run directory " + dir.string() +
                                      " exists but is incomplete; rerun with --force to overwrite");
            }
            fs::remove_all(dir, ec);
            if (ec) throw IoError("cannot clear " + dir.string() + ": " + ec.message());
        }
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
        write_text(dir / "spec.json", json{{"hash", hash}, {"identity", id}}.dump(2) + "\n");

        SummaryRow& row = res.row;
        row.hash = hash;
        row.problem = to_string(m_.problem);
        row.constraint_kind = to_string(problem_constraint(m_.problem));
        row.constraint_param = mem.param;
        row.constraint_value = m_.constraint_value(mem.param);
        row.T = mem.T;
        row.start = start;
        row.run_dir = dir.string();

        SolverConfig sc;
        sc.nu = m_.nu;
        sc.dt = m_.dt;
        sc.n = m_.resolution;
        sc.save_stride = m_.save_stride;
        const ProblemSpec prob = ProblemSpec::make(m_.problem, row.constraint_value, mem.T, sc, SobolevConfig{m_.ell});

        OptimizerOptions oo;
        oo.max_iterations = m_.max_iterations;
        oo.fallback_guess = family_seed;
        if (m_.snapshot_every > 0) {
            oo.observer = [&](const IterationRecord& r, const SpectralVectorField& u) {
                if (r.iteration % m_.snapshot_every != 0) return;
                char name[32];
                std::snprintf(name, sizeof name, "iter_%05d.lpsf", r.iteration);
                write_snapshot(dir / "iterates" / name, u);
            };
        }
        if (opt_.verbose) {
            std::ostringstream os;
            os << "run " << hash << " " << row.problem << " " << m_.param_name() << "=" << mem.param << " T=" << mem.T
               << " start=" << start;
            log_info(os.str());
        }
        try {
            OptimizationReport rep = optimize(prob, guess, oo);
            write_snapshot(dir / "u0_opt.lpsf", rep.final_u0);
            write_text(dir / "report.json", report_to_json(rep).dump(2) + "\n");

            SolverConfig fc = prob.solver_config();
            const TrajectoryStore traj = solve_forward(rep.final_u0, fc);
            write_text(dir / "diagnostics.csv", diagnostics_csv(traj));

            const EnstrophyAudit ea = audit_enstrophy_bounds(traj, m_.nu);
            const EnergyBalanceAudit eb = audit_energy_balance(traj);
            const DiagnosticsRecord& d0 = traj.diagnostics.front();
            row.status = "ok";
            row.reason = rep.reason;
            row.converged = rep.converged;
            row.iterations = int(rep.iterations.size()) - 1;
            row.objective = rep.final_objective;
            row.branch_tag = rep.branch_tag;
            row.K0 = d0.K;
            row.E0 = d0.E;
            row.l4_norm0 = d0.l4_norm;
            row.h34_norm0 = d0.h34_seminorm;
            row.l4_rate0 = instantaneous_l4_rate(rep.final_u0, m_.nu);
            row.max_enstrophy = ea.max_enstrophy;
            row.gn_ratio_p4 = audit_gn_inequality(rep.final_u0, 4.0);
            json analysis{{"enstrophy_rate_bound_holds", ea.rate_bound_holds},
                          {"enstrophy_envelope_holds", ea.envelope_holds},
                          {"min_rate_margin", jnum(ea.min_rate_margin)},
                          {"max_enstrophy", jnum(ea.max_enstrophy)},
                          {"blowup_time_bound", jnum(ea.blowup_time_bound)},
                          {"energy_balance_max_residual_rate", jnum(eb.max_residual_rate)},
                          {"gn_ratio_p2", jnum(audit_gn_inequality(rep.final_u0, 2.0))},
                          {"gn_ratio_p4", jnum(row.gn_ratio_p4)},
                          {"gn_ratio_p6", jnum(audit_gn_inequality(rep.final_u0, 6.0))},
                          {"l4_rate0", jnum(row.l4_rate0)}};
            if (m_.problem == ProblemKind::problem3) {
                try {
                    row.xi = xi_ratio(traj, row.K0);
                    row.theta = theta_limit(rep.final_u0, m_.nu);
                    analysis["xi"] = jnum(*row.xi);
                    analysis["theta"] = jnum(*row.theta);
                } catch (const ValidationError& e) {
                    analysis["xi_error"] = e.what();
                }
            }
            write_text(dir / "analysis.json", analysis.dump(2) + "\n");
            res.optimum = std::move(rep.final_u0);
        } catch (const NumericalAbort& e) {
            row.status = "failed";
            row.reason = std::string("numerical abort: ") + e.what();
            log_warning("run " + hash + " failed: " + e.what());
        }
        write_text(status_file, json{{"row", row_to_json(row)}}.dump(2) + "\n");
        return res;
    }

    const RunManifest& m_;
    fs::path root_;
    RunOptions opt_;
};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<SummaryRow> ok_rows(const RunSummary& s) {
    std::vector<SummaryRow> out;
    for (const auto& r : s.rows) {
        if (r.status == "ok") out.push_back(r);
    }
    return out;
}

json fit_json(const PowerLawFit& f) {
    return json{{"prefactor", jnum(f.prefactor)}, {"prefactor_stderr", jnum(f.prefactor_stderr)},
                {"exponent", jnum(f.exponent)},   {"exponent_stderr", jnum(f.exponent_stderr)},
                {"r_squared", jnum(f.r_squared)}, {"points", f.points}};
}

json fit_json(const SaturationFit& f) {
    return json{{"psi", jnum(f.psi)},
                {"alpha", jnum(f.alpha)},
                {"beta", jnum(f.beta)},
                {"psi_stderr", jnum(f.psi_stderr)},
                {"alpha_stderr", jnum(f.alpha_stderr)},
                {"beta_stderr", jnum(f.beta_stderr)},
                {"residual_norm", jnum(f.residual_norm)},
                {"iterations", f.iterations},
                {"converged", f.converged}};
}

// Max objective over random starts for each (group key, x).
template <class Key>
std::map<Key, std::map<double, const SummaryRow*>> best_by(const std::vector<SummaryRow>& rows,
                                                           Key (*key)(const SummaryRow&),
                                                           double (*x)(const SummaryRow&)) {
    std::map<Key, std::map<double, const SummaryRow*>> out;
    for (const auto& r : rows) {
        auto& slot = out[key(r)][x(r)];
        if (!slot || r.objective > slot->objective) slot = &r;
    }
    return out;
}

double key_T(const SummaryRow& r) { return r.T; }
double key_param(const SummaryRow& r) { return r.constraint_param; }

std::vector<double> fit_grid(double lo, double hi, int n) {
    std::vector<double> out;
    if (!(lo > 0.0) || !(hi > lo)) return out;
    for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
    return out;
}

}  // namespace

// Manifest API ----------------------------------------------------------------------

void RunManifest::validate() const {
    for (double v : constraint_params) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("sweep values must be positive: " + param_name());
    }
    for (double v : horizons) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("sweep values must be positive: T");
    }
    if (resolution < 4 || resolution % 2) throw ValidationError("resolution must be an even integer >= 4");
    if (!(nu > 0.0)) throw ValidationError("nu must be positive");
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(ell > 0.0)) throw ValidationError("ell must be positive");
    if (save_stride < 1) throw ValidationError("save_stride must be >= 1");
    if (random_starts < 1) throw ValidationError("random_starts must be >= 1");
    if (snapshot_every < 0) throw ValidationError("snapshot_every must be >= 0");
    if (max_iterations < 0) throw ValidationError("max_iterations must be >= 0");
    if (!(kmax >= 1.0)) throw ValidationError("kmax must be >= 1");
    if (output_dir.empty()) throw ValidationError("output_dir must not be empty");
}

double RunManifest::constraint_value(double param) const {
    switch (problem) {
        case ProblemKind::problem1: return std::pow(param, 0.25);
        case ProblemKind::problem2: return std::sqrt(param);
        case ProblemKind::problem3: return param;
    }
    return param;
}

std::string RunManifest::param_name() const {
    switch (problem) {
        case ProblemKind::problem1: return "B4";
        case ProblemKind::problem2: return "S2";
        case ProblemKind::problem3: return "K0";
    }
    return "S2";
}

RunManifest parse_manifest(const std::string& text) {
    const json j = parse_json(text, "invalid manifest JSON");
    if (!j.is_object()) throw ValidationError("manifest must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (!manifest_keys().count(k)) throw ValidationError("unknown manifest key '" + k + "'");
    }
    RunManifest m;
    if (!j.contains("problem")) throw ValidationError("manifest requires 'problem'");
    m.problem = problem_kind_from_string(typed<std::string>(j["problem"], "problem"));
    const std::string pkey = m.param_name();
    for (const char* k : {"B4", "S2", "K0"}) {
        if (j.contains(k) && pkey != k) {
            throw ValidationError(std::string("manifest key '") + k + "' does not apply to " + to_string(m.problem));
        }
    }
    if (j.contains(pkey)) m.constraint_params = number_list(j[pkey], pkey);
    if (j.contains("T")) m.horizons = number_list(j["T"], "T");
    if (j.contains("seed")) m.seed = typed<std::uint64_t>(j["seed"], "seed");
    if (j.contains("resolution")) m.resolution = typed<int>(j["resolution"], "resolution");
    if (j.contains("nu")) m.nu = typed<double>(j["nu"], "nu");
    if (j.contains("dt")) m.dt = typed<double>(j["dt"], "dt");
    if (j.contains("ell")) m.ell = typed<double>(j["ell"], "ell");
    if (j.contains("save_stride")) m.save_stride = typed<int>(j["save_stride"], "save_stride");
    if (j.contains("output_dir")) m.output_dir = typed<std::string>(j["output_dir"], "output_dir");
    if (j.contains("random_starts")) m.random_starts = typed<int>(j["random_starts"], "random_starts");
    if (j.contains("snapshot_every")) m.snapshot_every = typed<int>(j["snapshot_every"], "snapshot_every");
    if (j.contains("max_iterations")) m.max_iterations = typed<int>(j["max_iterations"], "max_iterations");
    if (j.contains("kmax")) m.kmax = typed<double>(j["kmax"], "kmax");
    if (j.contains("initial_guess")) m.initial_guess = typed<std::string>(j["initial_guess"], "initial_guess");
    if (j.contains("continuation")) {
        const auto c = typed<std::string>(j["continuation"], "continuation");
        if (c == "T") m.continuation = ContinuationAxis::horizon;
        else if (c == "constraint") m.continuation = ContinuationAxis::constraint;
        else throw ValidationError("continuation must be 'T' or 'constraint'");
    }
    m.validate();
    return m;
}

RunManifest load_manifest(const fs::path& path) { return parse_manifest(read_text(path)); }

std::string manifest_to_json(const RunManifest& m) {
    json j{{"problem", to_string(m.problem)},
           {m.param_name(), m.constraint_params},
           {"T", m.horizons},
           {"seed", m.seed},
           {"resolution", m.resolution},
           {"nu", m.nu},
           {"dt", m.dt},
           {"ell", m.ell},
           {"save_stride", m.save_stride},
           {"output_dir", m.output_dir},
           {"random_starts", m.random_starts},
           {"snapshot_every", m.snapshot_every},
           {"max_iterations", m.max_iterations},
           {"kmax", m.kmax},
           {"continuation", m.continuation == ContinuationAxis::horizon ? "T" : "constraint"}};
    if (!m.initial_guess.empty()) j["initial_guess"] = m.initial_guess;
    return j.dump(2) + "\n";
}

// Run API ---------------------------------------------------------------------------

RunSummary run_manifest(const RunManifest& manifest, const fs::path& root, const RunOptions& options) {
    manifest.validate();
    RunSummary summary;
    summary.root = root;
    summary.manifest = manifest;
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create output directory " + root.string() + ": " + ec.message());
    write_text(root / "manifest.json", manifest_to_json(manifest));

    const std::vector<Family> families = enumerate_families(manifest);
    std::vector<std::vector<MemberResult>> results(families.size());
    std::vector<std::exception_ptr> errors(families.size());
    Runner runner(manifest, root, options);

    const int workers = std::max(1, std::min<int>(options.threads, int(families.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < families.size(); i = next++) {
            try {
                results[i] = runner.run_family(families[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (auto& fam : results) {
        for (auto& r : fam) {
            if (r.skipped) ++summary.skipped;
            else ++summary.executed;
            if (r.row.status != "ok") ++summary.failed;
            summary.rows.push_back(std::move(r.row));
        }
    }
    write_summary(summary);
    return summary;
}

void write_summary(const RunSummary& s) {
    json rows = json::array();
    for (const auto& r : s.rows) rows.push_back(row_to_json(r));
    json j{{"format", kFormatVersion},
           {"manifest", parse_json(manifest_to_json(s.manifest), "manifest")},
           {"executed", s.executed},
           {"skipped", s.skipped},
           {"failed", s.failed},
           {"rows", rows}};
    write_text(s.root / "summary.json", j.dump(2) + "\n");

    std::ostringstream os;
    os << "hash,problem,constraint_kind,constraint_param,constraint_value,T,start,status,converged,iterations,"
          "objective,branch_tag,K0,E0,l4_norm0,h34_norm0,l4_rate0,max_enstrophy,gn_ratio_p4,xi,theta\n";
    for (const auto& r : s.rows) {
        os << r.hash << ',' << r.problem << ',' << r.constraint_kind << ',' << num(r.constraint_param) << ','
           << num(r.constraint_value) << ',' << num(r.T) << ',' << r.start << ',' << r.status << ','
           << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << num(r.objective) << ',' << r.branch_tag << ','
           << num(r.K0) << ',' << num(r.E0) << ',' << num(r.l4_norm0) << ',' << num(r.h34_norm0) << ','
           << num(r.l4_rate0) << ',' << num(r.max_enstrophy) << ',' << num(r.gn_ratio_p4) << ','
           << (r.xi ? num(*r.xi) : "") << ',' << (r.theta ? num(*r.theta) : "") << '\n';
    }
    write_text(s.root / "summary.csv", os.str());
}

RunSummary load_summary(const fs::path& root) {
    const fs::path p = root / "summary.json";
    if (!fs::exists(p)) throw IoError("no summary.json under " + root.string());
    const json j = parse_json(read_text(p), p.string());
    RunSummary s;
    s.root = root;
    try {
        s.manifest = parse_manifest(j.at("manifest").dump());
        s.executed = j.value("executed", 0);
        s.skipped = j.value("skipped", 0);
        s.failed = j.value("failed", 0);
        for (const auto& r : j.at("rows")) s.rows.push_back(row_from_json(r));
    } catch (const json::exception& e) {
        throw ValidationError("malformed summary " + p.string() + ": " + e.what());
    }
    return s;
}

// Analysis over a summary ---------------------------------------------------------------

std::string analyze_summary(const RunSummary& s) {
    const auto rows = ok_rows(s);
    json out{{"problem", to_string(s.manifest.problem)},
             {"parameter", s.manifest.param_name()},
             {"runs", s.rows.size()},
             {"successful_runs", rows.size()}};

    // Objective vs constraint parameter at fixed T (max over starts).
    json vs_param = json::array();
    for (const auto& [T, pts] : best_by<double>(rows, key_T, key_param)) {
        std::vector<Sample> samples;
        for (const auto& [x, r] : pts) samples.emplace_back(x, r->objective);
        json e{{"T", T}, {"points", samples.size()}};
        if (samples.size() >= 2) e["fit"] = fit_json(fit_power_law(samples));
        vs_param.push_back(e);
    }
    out["objective_vs_" + s.manifest.param_name()] = vs_param;

    // Objective vs T at fixed constraint parameter.
    json vs_T = json::array();
    for (const auto& [c, pts] : best_by<double>(rows, key_param, key_T)) {
        std::vector<Sample> samples;
        for (const auto& [x, r] : pts) samples.emplace_back(x, r->objective);
        bool decreasing = true;
        for (std::size_t i = 1; i < samples.size(); ++i) decreasing &= samples[i].second < samples[i - 1].second;
        json e{{s.manifest.param_name(), c}, {"points", samples.size()}, {"decreasing_in_T", decreasing}};
        if (samples.size() >= 2) {
            const BlowupReport b = lps_blowup_monitor(samples);
            e["blowup_flag"] = b.flagged;
            e["blowup_reason"] = b.reason;
        }
        if (s.manifest.problem == ProblemKind::problem3 && samples.size() >= 3) {
            std::vector<Sample> tpsi;
            for (const auto& [T, v] : samples) tpsi.emplace_back(T, T * v);
            e["saturation_fit"] = fit_json(fit_saturation(tpsi));
        }
        vs_T.push_back(e);
    }
    out["objective_vs_T"] = vs_T;

    // Instantaneous rate and maximum enstrophy scalings at the shortest horizon.
    if (!rows.empty()) {
        double tmin = rows.front().T;
        for (const auto& r : rows) tmin = std::min(tmin, r.T);
        std::vector<Sample> rate, ens;
        for (const auto& r : rows) {
            if (r.T != tmin) continue;
            const double b4 = std::pow(r.l4_norm0, 4);
            if (r.l4_rate0 > 0.0 && b4 > 0.0) rate.emplace_back(b4, r.l4_rate0);
            if (r.E0 > 0.0 && r.max_enstrophy > 0.0) ens.emplace_back(r.E0, r.max_enstrophy);
        }
        json e{{"T", tmin}};
        if (rate.size() >= 2) e["l4_rate_vs_B4"] = fit_json(fit_power_law(rate));
        if (ens.size() >= 2) e["max_enstrophy_vs_E0"] = fit_json(fit_power_law(ens));
        out["shortest_horizon"] = e;
    }

    if (s.manifest.problem == ProblemKind::problem3) {
        bool ordering = true;
        for (const auto& r : rows) {
            if (r.xi && r.theta) ordering &= *r.theta > *r.xi;
        }
        json xi = json::array();
        for (const auto& [c, pts] : best_by<double>(rows, key_param, key_T)) {
            bool increasing_as_T_decreases = true;
            double prev = -1.0;
            for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
                if (!it->second->xi) continue;
                if (prev >= 0.0) increasing_as_T_decreases &= *it->second->xi > prev;
                prev = *it->second->xi;
            }
            xi.push_back({{"K0", c}, {"xi_increasing_as_T_decreases", increasing_as_T_decreases}});
        }
        out["theta_exceeds_xi"] = ordering;
        out["xi_trend"] = xi;
    }
    const std::string text = out.dump(2) + "\n";
    write_text(s.root / "analysis.json", text);
    return text;
}

// Export -------------------------------------------------------------------------------

std::vector<fs::path> export_plot_data(const RunSummary& s, const fs::path& dir) {
    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::string& body) {
        write_text(dir / name, body);
        written.push_back(dir / name);
    };
    const std::string pname = s.manifest.param_name();
    const auto rows = ok_rows(s);

    {
        std::ostringstream os;
        os << "hash,problem," << pname << ",T,start,branch_tag,t,l4_norm,status\n";
        for (const auto& r : s.rows) {
            const fs::path p = fs::path(r.run_dir) / "diagnostics.csv";
            std::error_code ec;
            if (r.status != "ok" || !fs::exists(p, ec)) {
                os << r.hash << ',' << r.problem << ',' << num(r.constraint_param) << ',' << num(r.T) << ','
                   << r.start << ',' << r.branch_tag << ",,,absent\n";
                continue;
            }
            std::istringstream in(read_text(p));
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                std::vector<std::string> cells;
                std::stringstream ls(line);
                for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
                if (cells.size() < 7) continue;
                os << r.hash << ',' << r.problem << ',' << num(r.constraint_param) << ',' << num(r.T) << ','
                   << r.start << ',' << r.branch_tag << ',' << cells[0] << ',' << cells[6] << ",ok\n";
            }
        }
        emit("l4_evolution.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "problem," << pname << ",T,start,branch_tag,objective,status\n";
        for (const auto& r : s.rows) {
            os << r.problem << ',' << num(r.constraint_param) << ',' << num(r.T) << ',' << r.start << ','
               << r.branch_tag << ',' << (r.status == "ok" ? num(r.objective) : "") << ','
               << (r.status == "ok" ? "ok" : "absent") << '\n';
        }
        emit("objective_vs_T.csv", os.str());
    }
    // Power-law series with fit overlays, split by T and branch.
    auto power_series = [&](const std::string& name, const std::string& xname, const std::string& yname,
                            auto xfun, auto yfun, auto keep) {
        std::ostringstream os;
        os << "series,T,branch_tag," << xname << ',' << yname << ",fit_prefactor,fit_exponent\n";
        std::map<std::pair<double, std::string>, std::vector<Sample>> groups;
        for (const auto& r : rows) {
            if (!keep(r)) continue;
            const double x = xfun(r), y = yfun(r);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            groups[{r.T, r.branch_tag}].emplace_back(x, y);
            os << "data," << num(r.T) << ',' << csv_escape(r.branch_tag) << ',' << num(x) << ',' << num(y) << ",,\n";
        }
        for (auto& [key, pts] : groups) {
            std::sort(pts.begin(), pts.end());
            if (pts.size() < 2 || pts.front().first == pts.back().first) continue;
            bool positive = true;
            for (const auto& [x, y] : pts) positive &= x > 0.0 && y > 0.0;
            if (!positive) continue;
            const PowerLawFit f = fit_power_law(pts);
            for (double x : fit_grid(pts.front().first, pts.back().first, 25)) {
                os << "fit," << num(key.first) << ',' << csv_escape(key.second) << ',' << num(x) << ',' << num(f(x))
                   << ',' << num(f.prefactor) << ',' << num(f.exponent) << '\n';
            }
        }
        emit(name, os.str());
    };
    power_series(
        "max_objective_vs_constraint.csv", pname, "objective", [](const SummaryRow& r) { return r.constraint_param; },
        [](const SummaryRow& r) { return r.objective; }, [](const SummaryRow&) { return true; });
    power_series(
        "l4_rate_vs_B4.csv", "B4", "l4_rate0", [](const SummaryRow& r) { return std::pow(r.l4_norm0, 4); },
        [](const SummaryRow& r) { return r.l4_rate0; }, [](const SummaryRow& r) { return r.problem == "problem1"; });
    power_series(
        "max_enstrophy_vs_E0.csv", "E0", "max_enstrophy", [](const SummaryRow& r) { return r.E0; },
        [](const SummaryRow& r) { return r.max_enstrophy; }, [](const SummaryRow&) { return true; });
    {
        std::ostringstream os;
        os << "series,K0,T,T_objective,psi,alpha,beta,status\n";
        if (s.manifest.problem != ProblemKind::problem3) {
            os << "absent,,,,,,,not a problem3 summary\n";
        } else {
            for (const auto& [c, pts] : best_by<double>(rows, key_param, key_T)) {
                std::vector<Sample> tpsi;
                for (const auto& [T, r] : pts) {
                    tpsi.emplace_back(T, T * r->objective);
                    os << "data," << num(c) << ',' << num(T) << ',' << num(T * r->objective) << ",,,,ok\n";
                }
                if (tpsi.size() < 3) continue;
                const SaturationFit f = fit_saturation(tpsi);
                for (double T : fit_grid(tpsi.front().first, tpsi.back().first, 25)) {
                    os << "fit," << num(c) << ',' << num(T) << ',' << num(f(T)) << ',' << num(f.psi) << ','
                       << num(f.alpha) << ',' << num(f.beta) << ',' << (f.converged ? "ok" : "not-converged") << '\n';
                }
            }
        }
        emit("saturation_vs_T.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "K0,T,start,xi,theta,status\n";
        for (const auto& r : s.rows) {
            const bool have = r.status == "ok" && r.xi && r.theta;
            os << num(r.constraint_param) << ',' << num(r.T) << ',' << r.start << ',' << (have ? num(*r.xi) : "")
               << ',' << (have ? num(*r.theta) : "") << ',' << (have ? "ok" : "absent") << '\n';
        }
        emit("xi_theta_vs_K0.csv", os.str());
    }
    return written;
}

// Snapshots ----------------------------------------------------------------------------

void write_snapshot(const fs::path& path, const SpectralVectorField& field) {
    const WaveGrid& g = field.grid();
    const json header{{"format", "lps-spectral-field"},
                      {"version", kFormatVersion},
                      {"n", g.n()},
                      {"shape", {3, g.n(), g.n(), g.nz_half()}},
                      {"layout", "component,i,j,l (l fastest); half spectrum l in [0, n/2]"},
                      {"scalar", "complex128"},
                      {"endianness", "little"},
                      {"normalization", "f_hat(k) = n^-3 sum_x f(x) exp(-2 pi i k.x)"},
                      {"label", to_string(field.role())}};
    std::string blob = header.dump() + "\n";
    const std::size_t count = g.spectral_size();
    std::string data(3 * count * 16, '\0');
    char* p = data.data();
    for (int c = 0; c < 3; ++c) {
        for (const Complex& z : field[c].coeffs()) {
            double parts[2] = {z.real(), z.imag()};
            for (double v : parts) {
                std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
                for (int b = 0; b < 8; ++b) *p++ = char((bits >> (8 * b)) & 0xff);
            }
        }
    }
    write_text(path, blob + data);
}

SpectralVectorField read_snapshot(const fs::path& path) {
    const std::string blob = read_text(path);
    const auto nl = blob.find('\n');
    if (nl == std::string::npos) throw ValidationError("snapshot " + path.string() + " has no header");
    const json h = parse_json(blob.substr(0, nl), "snapshot header " + path.string());
    if (h.value("format", "") != "lps-spectral-field") throw ValidationError("not an lps snapshot: " + path.string());
    if (h.value("endianness", "") != "little" || h.value("scalar", "") != "complex128") {
        throw ValidationError("unsupported snapshot encoding in " + path.string());
    }
    const int n = h.value("n", 0);
    if (n < 2 || n % 2) throw ValidationError("invalid grid size in snapshot " + path.string());
    const WaveGrid g(n);
    const std::size_t count = g.spectral_size();
    if (blob.size() - nl - 1 != 3 * count * 16) throw ValidationError("snapshot payload size mismatch: " + path.string());
    SpectralVectorField f(g);
    const std::string label = h.value("label", "unspecified");
    for (FieldRole r : {FieldRole::velocity, FieldRole::adjoint, FieldRole::perturbation, FieldRole::gradient}) {
        if (to_string(r) == label) f.set_role(r);
    }
    const unsigned char* p = reinterpret_cast<const unsigned char*>(blob.data() + nl + 1);
    auto next = [&] {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= std::uint64_t(*p++) << (8 * b);
        return std::bit_cast<double>(bits);
    };
    for (int c = 0; c < 3; ++c) {
        for (auto& z : f[c].coeffs()) {
            const double re = next();
            const double im = next();
            z = Complex(re, im);
        }
    }
    return f;
}

// Utilities ------------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

fs::path resolve_output_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv("LPS_OUTPUT_ROOT"); root && *root) return fs::path(root) / p;
    return fs::current_path() / p;
}

int resolve_thread_count() {
    const char* v = std::getenv("LPS_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) throw ValidationError(std::string("LPS_THREADS must be a positive integer, got '") + v + "'");
    return int(n);
}

}  // namespace lps
