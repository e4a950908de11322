// dwlab: command-line front end for the deformed Wigner fluctuation lab.
//
// Exit codes: 0 all checks passed, 1 an acceptance threshold was violated
// (or a numerical failure made a check impossible), 2 configuration error.

#include "dwlab/config.hpp"
#include "dwlab/ensemble.hpp"
#include "dwlab/errors.hpp"
#include "dwlab/freeconv.hpp"
#include "dwlab/infinitesimal.hpp"
#include "dwlab/montecarlo.hpp"
#include "dwlab/spectral.hpp"
#include "dwlab/testfn.hpp"
#include "dwlab/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dwlab;

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kConfigError = 2;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out_dir = ".";
    std::string format = "both";
};

struct Context {
    Options opt;
    Config cfg;
    std::string command;

    bool want_csv() const { return opt.format != "json"; }
    bool want_json() const { return opt.format != "csv"; }

    std::uint64_t seed(const std::string& block) const {
        if (opt.seed) return *opt.seed;
        if (cfg.has(block + ".seed")) return static_cast<std::uint64_t>(cfg.get_int(block + ".seed"));
        if (cfg.has("experiment.seed")) return static_cast<std::uint64_t>(cfg.get_int("experiment.seed"));
        throw ConfigError("command '" + command + "' is stochastic and needs a seed (--seed or " + block + ".seed)");
    }

    std::vector<std::string> metadata(std::optional<std::uint64_t> seed) const {
        std::vector<std::string> m{"dwlab " DWLAB_VERSION, "command " + command,
                                   "config_digest " + hex_digest(cfg.digest())};
        if (seed) m.push_back("seed " + std::to_string(*seed));
        return m;
    }
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// A table written as CSV (with `#` metadata and column notes) and mirrored as JSON.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> notes;  // "column: meaning"
    std::vector<std::vector<json>> rows;

    void add(std::vector<json> row) { rows.push_back(std::move(row)); }

    void write(const Context& ctx, const std::string& stem, std::optional<std::uint64_t> seed) const {
        const auto meta = ctx.metadata(seed);
        fs::create_directories(ctx.opt.out_dir);
        if (ctx.want_csv()) {
            std::ofstream out(fs::path(ctx.opt.out_dir) / (stem + ".csv"));
            for (const auto& m : meta) out << "# " << m << '\n';
            for (const auto& n : notes) out << "# " << n << '\n';
            for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
            out << '\n';
            for (const auto& row : rows) {
                for (std::size_t c = 0; c < row.size(); ++c) {
                    if (c) out << ',';
                    if (row[c].is_string()) out << row[c].get<std::string>();
                    else if (row[c].is_boolean()) out << (row[c].get<bool>() ? "true" : "false");
                    else if (row[c].is_number_float()) out << num(row[c].get<double>());
                    else out << row[c].dump();
                }
                out << '\n';
            }
        }
        if (ctx.want_json()) {
            json j;
            j["metadata"] = meta;
            j["notes"] = notes;
            j["columns"] = columns;
            j["rows"] = json::array();
            for (const auto& row : rows) {
                json obj = json::object();
                for (std::size_t c = 0; c < row.size(); ++c) obj[columns[c]] = row[c];
                j["rows"].push_back(obj);
            }
            std::ofstream(fs::path(ctx.opt.out_dir) / (stem + ".json")) << j.dump(1) << '\n';
        }
    }
};

std::vector<cplx> theory_grid(const Config& cfg) {
    if (cfg.has("theory.z_grid")) return cfg.get_complexes("theory.z_grid");
    if (cfg.has("experiment.z_grid")) return cfg.get_complexes("experiment.z_grid");
    throw ConfigError("no z grid configured (theory.z_grid or experiment.z_grid)");
}

std::vector<std::pair<std::size_t, std::size_t>> pair_list(const Config& cfg, const std::string& key, std::size_t m) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (cfg.has(key)) {
        for (const auto& item : cfg.get_list(key)) {
            const auto parts = split(item, ':');
            if (parts.size() != 2) throw ConfigError("pair '" + item + "' must be i:j");
            out.emplace_back(std::stoul(parts[0]), std::stoul(parts[1]));
            if (out.back().first >= m || out.back().second >= m) throw ConfigError("pair index out of range");
        }
    } else {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i; j < m; ++j) out.emplace_back(i, j);
    }
    return out;
}

FluctuationParams fluctuation_params(const Config& cfg, const EnsembleParams& e) {
    const std::string mode = cfg.get_string("theory.mode", "finite_n");
    if (mode == "finite_n") return FluctuationParams::finite_n(e);
    if (mode == "limit")
        return FluctuationParams::limit(cfg.get_double("theory.sigma2", e.sigma2), cfg.get_double("theory.s2", e.s2),
                                        cfg.get_double("theory.tau", e.tau), cfg.get_double("theory.kappa", e.kappa),
                                        e.nu());
    throw ConfigError("theory.mode must be finite_n or limit");
}

// ---------------------------------------------------------------------------

int cmd_theory(const Context& ctx) {
    const auto ens = EnsembleParams::from_config(ctx.cfg.block("ensemble"));
    const auto p = fluctuation_params(ctx.cfg, ens);
    const auto grid = theory_grid(ctx.cfg);
    // The same formulas with nu = delta_0 against the undeformed closed forms.
    FluctuationParams flat = p;
    flat.nu = AtomicMeasure::dirac(0.0);

    Table bias;
    bias.columns = {"re_z", "im_z", "re_beta", "im_beta", "re_beta_tilde", "im_beta_tilde", "re_omega1", "im_omega1",
                    "bias_bound", "baoxie_residual"};
    bias.notes = {"beta: limiting bias of Tr R(z), the 1/N correction to N G_rho(z)",
                  "beta_tilde: same bracket over 2 omega'^3, beta = omega' beta_tilde",
                  "bias_bound: explicit finite-N upper bound on |beta_N(z)| (finite_n mode only, else nan)",
                  "baoxie_residual: |beta - b0| with the deformation replaced by delta_0"};
    for (cplx z : grid) {
        const auto s = subordination(p, z);
        const cplx b = beta_at(p, s), bt = beta_tilde(p, z);
        const double bound = p.mode == FluctuationMode::FiniteN ? bias_bound(p, z) : std::nan("");
        const double resid = std::abs(beta(flat, z) - bao_xie_b0(p.sigma2, p.s2, p.tau, p.kappa, z));
        bias.add({z.real(), z.imag(), b.real(), b.imag(), bt.real(), bt.imag(), s.omega1.real(), s.omega1.imag(), bound,
                  resid});
    }

    Table kernel;
    kernel.columns = {"i", "j", "re_z1", "im_z1", "re_z2", "im_z2", "re_gamma", "im_gamma", "re_gamma_conj",
                      "im_gamma_conj", "branch_margin", "valid", "baoxie_residual"};
    kernel.notes = {"gamma: covariance kernel Gamma(z1, z2), limit of Cov(Tr R(z1), Tr R(z2))",
                    "gamma_conj: Gamma(z1, conj z2), limit of E[(Tr R(z1) - m1) conj(Tr R(z2) - m2)]",
                    "branch_margin: min(|1 - sigma2 I|, |1 - tau I|); values at or below 1e-6 are flagged invalid",
                    "baoxie_residual: |Gamma - C0| with the deformation replaced by delta_0"};
    for (const auto& [i, j] : pair_list(ctx.cfg, "theory.pairs", grid.size())) {
        const cplx z1 = grid[i], z2 = grid[j];
        const auto k = gamma_kernel(p, z1, z2);
        const auto kc = gamma_kernel(p, z1, std::conj(z2));
        const auto kf = gamma_kernel(flat, z1, z2);
        const double resid = std::abs(kf.Gamma - bao_xie_C0(p.sigma2, p.s2, p.tau, p.kappa, z1, z2));
        kernel.add({i, j, z1.real(), z1.imag(), z2.real(), z2.imag(), k.Gamma.real(), k.Gamma.imag(), kc.Gamma.real(),
                    kc.Gamma.imag(), std::min(k.branch_margin, kc.branch_margin), k.valid && kc.valid, resid});
    }
    bias.write(ctx, "theory_bias", std::nullopt);
    kernel.write(ctx, "theory_kernel", std::nullopt);
    return kPass;
}

ExperimentPlan load_plan(const Context& ctx) {
    Config cfg = ctx.cfg;
    cfg.set("experiment.seed", std::to_string(ctx.seed("experiment")));
    return ExperimentPlan::from_config(cfg);
}

int cmd_simulate(const Context& ctx) {
    const auto plan = load_plan(ctx);
    const auto report = run(plan, ctx.opt.threads);
    fs::create_directories(ctx.opt.out_dir);
    // The full report is the input of `compare`, so it is always written.
    std::ofstream(fs::path(ctx.opt.out_dir) / "simulate_report.json") << report.to_json() << '\n';
    if (ctx.want_csv()) {
        std::ofstream out(fs::path(ctx.opt.out_dir) / "simulate_z.csv");
        report.write_csv(out, ctx.metadata(plan.master_seed));
    }
    Table pairs;
    pairs.columns = {"i", "j", "re_z1", "im_z1", "re_z2", "im_z2", "re_cov", "im_cov", "cov_se", "re_cov_conj",
                     "im_cov_conj", "cov_conj_se"};
    pairs.notes = {"cov: sample E[(Tr R(z1) - m1)(Tr R(z2) - m2)], jackknife SE",
                   "cov_conj: sample E[(Tr R(z1) - m1) conj(Tr R(z2) - m2)], jackknife SE"};
    for (const auto& e : report.pairs)
        pairs.add({e.i, e.j, e.z1.real(), e.z1.imag(), e.z2.real(), e.z2.imag(), e.cov.real(), e.cov.imag(), e.cov_se,
                   e.cov_conj.real(), e.cov_conj.imag(), e.cov_conj_se});
    pairs.write(ctx, "simulate_pairs", plan.master_seed);
    return kPass;
}

int cmd_compare(const Context& ctx) {
    // Relative report paths are taken from the output directory, where simulate put them.
    fs::path path = ctx.cfg.get_string("compare.report");
    if (path.is_relative()) path = fs::path(ctx.opt.out_dir) / path;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open report '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto report = EstimatorReport::from_json(buf.str());

    const auto ens = EnsembleParams::from_config(ctx.cfg.block("ensemble"));
    if (ens.digest() != report.params_hash) throw ConfigError("report was produced with different ensemble parameters");
    const auto grid = theory_grid(ctx.cfg);
    if (grid.size() != report.z.size()) throw ConfigError("theory grid and report grid differ in length");
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (std::abs(grid[k] - report.z[k].z) > 1e-12 * (1.0 + std::abs(grid[k])))
            throw ConfigError("theory grid point " + format_complex(grid[k]) + " does not match the report");

    const auto p = fluctuation_params(ctx.cfg, ens);
    const double max_bias = ctx.cfg.get_double("compare.max_bias_ratio", 3.0);
    const double max_cov = ctx.cfg.get_double("compare.max_cov_ratio", 3.0);
    const double min_ks = ctx.cfg.get_double("compare.min_ks_pvalue", 0.01);
    const bool bounds = ctx.cfg.get_bool("compare.check_variance_bounds", true);
    bool ok = true;

    Table zt;
    zt.columns = {"re_z", "im_z", "re_bias_hat", "im_bias_hat", "re_beta", "im_beta", "bias_se", "bias_ratio",
                  "var_hat", "bound_crude", "bound_refined", "bounds_ok", "pass"};
    zt.notes = {"bias_hat: mean Tr R(z) - N G_rho_N(z)", "beta: bias formula evaluated with the configured theory mode",
                "bias_ratio: |bias_hat - beta| / bias_se", "bound_crude: 4N/|Im z|^2",
                "bound_refined: 2 |Im z|^-4 N (s_N^2 + 2 sigma_N^-2 m_N)"};
    const auto vb = variance_bound_check(report, ens);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& e = report.z[k];
        const cplx b = beta(p, e.z);
        const double ratio = std::abs(e.bias_hat - b) / e.bias_se;
        const bool pass = ratio <= max_bias && (!bounds || vb[k].pass);
        ok = ok && pass;
        zt.add({e.z.real(), e.z.imag(), e.bias_hat.real(), e.bias_hat.imag(), b.real(), b.imag(), e.bias_se, ratio,
                e.var_hat, vb[k].crude, vb[k].refined, vb[k].pass, pass});
    }

    std::vector<cplx> theory;
    for (const auto& pe : report.pairs) theory.push_back(gamma_value(p, pe.z1, pe.z2));
    const auto direct = covariance_check(report, theory);
    std::vector<cplx> theory_conj;
    for (const auto& pe : report.pairs) theory_conj.push_back(gamma_value(p, pe.z1, std::conj(pe.z2)));
    Table ct;
    ct.columns = {"i", "j", "pairing", "re_empirical", "im_empirical", "re_gamma", "im_gamma", "se", "ratio", "pass"};
    ct.notes = {"pairing direct: Cov(Tr R(z1), Tr R(z2)) against Gamma(z1, z2)",
                "pairing conjugated: E[(X1 - m1) conj(X2 - m2)] against Gamma(z1, conj z2)"};
    for (const auto& r : direct) {
        const bool pass = r.ratio <= max_cov;
        ok = ok && pass;
        ct.add({r.i, r.j, "direct", r.empirical.real(), r.empirical.imag(), r.theory.real(), r.theory.imag(), r.se,
                r.ratio, pass});
    }
    for (std::size_t k = 0; k < report.pairs.size(); ++k) {
        const auto& pe = report.pairs[k];
        const double ratio = std::abs(pe.cov_conj - theory_conj[k]) / pe.cov_conj_se;
        const bool pass = ratio <= max_cov;
        ok = ok && pass;
        ct.add({pe.i, pe.j, "conjugated", pe.cov_conj.real(), pe.cov_conj.imag(), theory_conj[k].real(),
                theory_conj[k].imag(), pe.cov_conj_se, ratio, pass});
    }

    Table nt;
    nt.columns = {"statistic", "mean", "variance", "skewness", "skewness_se", "excess_kurtosis", "kurtosis_se",
                  "ks_statistic", "ks_pvalue", "degenerate", "pass"};
    nt.notes = {"ks_pvalue: Kolmogorov-Smirnov against a normal with fitted mean and variance (needs M >= 500)"};
    for (const auto& s : normality_check(report)) {
        const bool pass = s.degenerate || !s.distributional || s.ks_pvalue > min_ks;
        ok = ok && pass;
        nt.add({s.id, s.mean, s.variance, s.skewness, s.skewness_se, s.excess_kurtosis, s.kurtosis_se, s.ks_statistic,
                s.ks_pvalue, s.degenerate, pass});
    }

    zt.write(ctx, "compare_z", report.master_seed);
    ct.write(ctx, "compare_pairs", report.master_seed);
    nt.write(ctx, "compare_normality", report.master_seed);
    std::cout << (ok ? "compare: all thresholds met\n" : "compare: threshold violated\n");
    return ok ? kPass : kViolation;
}

int cmd_density(const Context& ctx) {
    const auto ens = EnsembleParams::from_config(ctx.cfg.block("ensemble"));
    const auto nu = ens.nu();
    const double v = ens.sigma2;
    const Window win = support_window(nu, v);
    const double lo = ctx.cfg.get_double("density.x_min", win.lo), hi = ctx.cfg.get_double("density.x_max", win.hi);
    const auto points = ctx.cfg.get_int("density.points", 401);
    if (points < 2 || !(hi > lo)) throw ConfigError("density grid needs points >= 2 and x_max > x_min");

    Table dt;
    dt.columns = {"x", "density", "error_estimate", "accuracy_warning"};
    dt.notes = {"density: rho_N = semicircle(N sigma_N^2) boxplus nu_N, by Stieltjes inversion"};
    for (long long i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const auto d = density(nu, v, x);
        dt.add({x, d.value, d.error, d.accuracy_warning});
    }
    Table it;
    it.columns = {"test_function", "integral", "error_estimate"};
    it.notes = {"integral: int phi d rho_N, the deterministic equivalent of N^-1 sum phi(lambda_i)"};
    if (ctx.cfg.has("density.test_functions"))
        for (const auto& spec : ctx.cfg.get_list("density.test_functions", ';')) {
            const auto r = integrate_against_rho(nu, v, TestFunction::from_spec(spec));
            it.add({spec, r.value, r.error});
        }
    dt.write(ctx, "density", std::nullopt);
    it.write(ctx, "density_integrals", std::nullopt);
    return kPass;
}

GeneratorFactory generator_factory(const Config& cfg) {
    std::vector<std::pair<std::string, std::string>> specs;
    if (cfg.has("infinitesimal.generators"))
        for (const auto& item : cfg.get_list("infinitesimal.generators", ';')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("generator '" + item + "' must be name=spec");
            specs.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
        }
    return [specs](std::size_t n) {
        GeneratorMap g;
        for (const auto& [name, spec] : specs) g[name] = generator_from_spec(spec, n);
        return g;
    };
}

int cmd_infinitesimal(const Context& ctx) {
    const Config& cfg = ctx.cfg;
    const auto words = cfg.get_list("infinitesimal.words", ';');
    if (words.empty()) throw ConfigError("infinitesimal.words is empty");
    std::vector<std::size_t> dims;
    for (double d : cfg.get_doubles("infinitesimal.dims")) dims.push_back(static_cast<std::size_t>(d));
    if (dims.size() < 3) throw ConfigError("infinitesimal.dims needs at least three values");
    const double v = cfg.get_double("infinitesimal.v", 1.0);
    const auto factory = generator_factory(cfg);
    const std::size_t mc_samples = static_cast<std::size_t>(cfg.get_int("infinitesimal.mc_samples", 0));
    const std::size_t mc_n = static_cast<std::size_t>(cfg.get_int("infinitesimal.mc_n", 50));
    std::optional<std::uint64_t> seed;
    if (mc_samples > 0) seed = ctx.seed("infinitesimal");
    // Validate every word and generator before doing any work.
    std::vector<PairedWord> parsed;
    for (const auto& w : words) parsed.push_back(PairedWord::parse(w));
    (void)factory(dims.front());

    Table rt;
    rt.columns = {"word", "n", "re_xi", "im_xi", "re_free", "im_free", "re_correction", "im_correction"};
    rt.notes = {"xi: exact E[N^-1 Tr(word)] by Wick enumeration", "free: free-product prediction over non-crossing pairings",
                "correction: xi - free, expected O(N^-2)"};
    Table st;
    st.columns = {"word", "slope", "identically_zero", "mc_n", "mc_mean_re", "mc_mean_im", "mc_se", "mc_ratio", "pass"};
    st.notes = {"slope: least-squares slope of log|correction| against log N, must be <= -1.9",
                "mc_ratio: |Monte Carlo mean - xi| / SE at N = mc_n, must be <= 4"};
    bool ok = true;
    for (std::size_t w = 0; w < parsed.size(); ++w) {
        const auto rep = infinitesimal_check(parsed[w], dims, v, factory);
        for (const auto& r : rep.results)
            rt.add({rep.word, r.n_dim, r.xi.real(), r.xi.imag(), r.free.real(), r.free.imag(), r.correction.real(),
                    r.correction.imag()});
        bool pass = rep.pass;
        if (mc_samples > 0) {
            const auto cc = monte_carlo_cross_check(parsed[w], mc_n, v, mc_samples, factory(mc_n), *seed + w);
            pass = pass && cc.pass;
            st.add({rep.word, rep.slope, rep.identically_zero, mc_n, cc.mc_mean.real(), cc.mc_mean.imag(), cc.mc_se,
                    cc.ratio, pass});
        } else {
            st.add({rep.word, rep.slope, rep.identically_zero, 0, nullptr, nullptr, nullptr, nullptr, pass});
        }
        ok = ok && pass;
    }
    rt.write(ctx, "infinitesimal", seed);
    st.write(ctx, "infinitesimal_summary", seed);
    std::cout << (ok ? "infinitesimal: all words pass\n" : "infinitesimal: violation\n");
    return ok ? kPass : kViolation;
}

int cmd_identities(const Context& ctx) {
    const Config& cfg = ctx.cfg;
    EnsembleParams ens;
    if (cfg.has("ensemble.n")) {
        ens = EnsembleParams::from_config(cfg.block("ensemble"));
    } else {
        const auto n = static_cast<std::size_t>(cfg.get_int("identities.n", 50));
        ens = EnsembleParams::make(n, EntryLaw::gaussian_complex(), 1.0, std::nullopt, std::vector<double>(n, 0.0));
    }
    const std::size_t samples = static_cast<std::size_t>(cfg.get_int("identities.samples", 100));
    const auto grid = cfg.has("identities.z_grid") ? cfg.get_complexes("identities.z_grid")
                                                   : std::vector<cplx>{{0, 0.5}, {1, 1}, {-1.5, 0.2}};
    if (samples < 2 || grid.empty()) throw ConfigError("identities needs samples >= 2 and a non-empty z grid");
    for (cplx z : grid)
        if (z.imag() == 0.0) throw ConfigError("identities z grid must avoid the real axis");
    const std::uint64_t seed = ctx.seed("identities");

    Table t;
    t.columns = {"sample", "re_z", "im_z", "schur_diagonal", "schur_trace", "schur_tol", "minor_trace_gap",
                 "minor_bound", "resolvent_identity", "resolvent_tol", "norm_ratio", "im_identity", "lipschitz_diff",
                 "lipschitz_bound", "pass"};
    t.notes = {"schur_*: residuals of the two Schur complement formulas, tolerance 1e-8 N / |Im z|^2",
               "minor_trace_gap: |Tr R - Tr R^(k)|, bounded by 1/|Im z|",
               "resolvent_identity: max entry residual of R1 - R2 = R1((z2 - z1) + M1 - M2)R2 against sample+1",
               "norm_ratio: ||R(z)|| |Im z|, at most 1", "im_identity: relative residual of Im Tr R = -Im z sum |z - l|^-2",
               "lipschitz_*: |Tr arctan(M1) - Tr arctan(M2)| against sum |l_i(M1) - l_i(M2)|"};
    bool ok = true;
    WignerSample next = sample(ens, seed, 0);
    for (std::size_t m = 0; m < samples; ++m) {
        const WignerSample cur = std::move(next);
        next = sample(ens, seed, m + 1);
        const auto spec = eigenvalues(cur), spec_next = eigenvalues(next);
        const auto lip = lipschitz_check(spec, spec_next, TestFunction::arctan(), 1.0);
        const std::size_t k = m % ens.n;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const cplx z = grid[g];
            const auto sr = verify_schur(cur.matrix, k, z);
            const auto ri = verify_resolvent_identity(cur.matrix, next.matrix, z, grid[(g + 1) % grid.size()]);
            const double nr = resolvent_norm_ratio(spec, z), im = im_identity_residual(spec, z);
            const double bound = 1.0 / std::abs(z.imag());
            const bool pass = sr.ok() && sr.minor_trace_gap <= bound * (1.0 + 1e-12) && ri.ok() &&
                              nr <= 1.0 + 1e-12 && im <= 1e-10 && lip.ok();
            ok = ok && pass;
            t.add({m, z.real(), z.imag(), sr.diagonal_residual, sr.trace_residual, sr.tolerance, sr.minor_trace_gap,
                   bound, ri.residual, ri.tolerance, nr, im, lip.difference, lip.bound, pass});
        }
    }
    t.write(ctx, "identities", seed);
    std::cout << (ok ? "identities: all residuals within tolerance\n" : "identities: residual above tolerance\n");
    return ok ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dwlab: fluctuations of linear spectral statistics of deformed Wigner matrices"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config_path, "configuration file")->required();
    app.add_option("--seed", opt.seed, "master seed (overrides the config)");
    app.add_option("--threads", opt.threads, "worker threads, 0 = hardware concurrency; results do not depend on it");
    app.add_option("--out-dir", opt.out_dir, "output directory");
    app.add_option("--format", opt.format, "output format")->check(CLI::IsMember({"csv", "json", "both"}));

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"theory", "bias, kernel and bias-bound tables"},
        {"simulate", "Monte Carlo run, writes the estimator report"},
        {"compare", "join a report with theory, exit 1 on threshold violations"},
        {"density", "deterministic-equivalent density and integrals"},
        {"infinitesimal", "exact pairing moments and the O(N^-2) check"},
        {"identities", "spectral identity suite on sampled matrices"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    Context ctx;
    ctx.opt = opt;
    ctx.command = app.get_subcommands().front()->get_name();
    try {
        ctx.cfg = Config::load(opt.config_path);
        if (ctx.command == "theory") return cmd_theory(ctx);
        if (ctx.command == "simulate") return cmd_simulate(ctx);
        if (ctx.command == "compare") return cmd_compare(ctx);
        if (ctx.command == "density") return cmd_density(ctx);
        if (ctx.command == "infinitesimal") return cmd_infinitesimal(ctx);
        if (ctx.command == "identities") return cmd_identities(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParameterError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InputError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: malformed number (" << e.what() << ")\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kViolation;
    }
    return kConfigError;
}
