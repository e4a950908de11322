#include "dwlab/montecarlo.hpp"

#include "dwlab/errors.hpp"
#include "dwlab/spectral.hpp"
#include "dwlab/testfn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <thread>

namespace dwlab {

namespace {

using json = nlohmann::json;

// Fixed-order pairwise summation: the result depends only on the data.
template <class T>
T pairwise_sum(const T* p, std::size_t n) {
    if (n <= 8) {
        T acc{};
        for (std::size_t i = 0; i < n; ++i) acc += p[i];
        return acc;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(p, h) + pairwise_sum(p + h, n - h);
}

template <class T>
T pairwise_mean(const std::vector<T>& v) {
    return pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

json to_j(cplx z) { return json::array({z.real(), z.imag()}); }
cplx from_j(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::string z_label(cplx z) { return format_complex(z); }

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// plan

void ExperimentPlan::validate() const {
    params.validate();
    if (samples < 2) throw ConfigError("sample count must be at least 2");
    if (z_grid.empty()) throw ConfigError("z grid is empty");
    for (cplx z : z_grid)
        if (!(std::abs(z.imag()) >= im_floor))
            throw ConfigError("grid point " + format_complex(z) + " is closer to the real axis than the floor");
    for (const auto& [i, j] : pairs)
        if (i >= z_grid.size() || j >= z_grid.size()) throw ConfigError("covariance pair index out of range");
    if (delta && !(*delta > 0.0)) throw ConfigError("truncation level must be positive");
    for (const auto& spec : test_functions) (void)TestFunction::from_spec(spec);
}

ExperimentPlan ExperimentPlan::from_config(const Config& cfg) {
    ExperimentPlan plan;
    plan.params = EnsembleParams::from_config(cfg.block("ensemble"));
    const Config ex = cfg.block("experiment");
    plan.samples = static_cast<std::size_t>(ex.get_int("samples"));
    plan.z_grid = ex.get_complexes("z_grid");
    if (ex.has("pairs")) {
        for (const auto& item : ex.get_list("pairs")) {
            const auto parts = split(item, ':');
            if (parts.size() != 2) throw ConfigError("pair '" + item + "' must be i:j");
            plan.pairs.emplace_back(std::stoul(parts[0]), std::stoul(parts[1]));
        }
    }
    if (ex.has("test_functions")) plan.test_functions = ex.get_list("test_functions", ';');
    plan.master_seed = static_cast<std::uint64_t>(ex.get_int("seed", 0));
    plan.truncate = ex.get_bool("truncate", false);
    if (ex.has("delta")) plan.delta = ex.get_double("delta");
    plan.im_floor = ex.get_double("im_floor", 0.1);
    plan.validate();
    return plan;
}

Config ExperimentPlan::to_config() const {
    Config cfg;
    const Config ens = params.to_config();
    for (const auto& [k, v] : ens.values()) cfg.set("ensemble." + k, v);
    cfg.set("experiment.samples", std::to_string(samples));
    std::string zs;
    for (cplx z : z_grid) zs += (zs.empty() ? "" : ", ") + format_complex(z);
    cfg.set("experiment.z_grid", zs);
    std::string ps;
    for (const auto& [i, j] : pairs) ps += (ps.empty() ? "" : ", ") + std::to_string(i) + ":" + std::to_string(j);
    if (!ps.empty()) cfg.set("experiment.pairs", ps);
    std::string tf;
    for (const auto& t : test_functions) tf += (tf.empty() ? "" : "; ") + t;
    if (!tf.empty()) cfg.set("experiment.test_functions", tf);
    cfg.set("experiment.seed", std::to_string(master_seed));
    cfg.set("experiment.truncate", truncate ? "true" : "false");
    if (delta) cfg.set("experiment.delta", format_double(*delta));
    cfg.set("experiment.im_floor", format_double(im_floor));
    return cfg;
}

// ---------------------------------------------------------------------------
// statistics

double kolmogorov_pvalue(double d, std::size_t n) {
    const double rn = std::sqrt(static_cast<double>(n));
    const double lambda = (rn + 0.12 + 0.11 / rn) * d;
    if (lambda < 0.2) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        q += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

std::pair<cplx, double> covariance_with_se(const std::vector<cplx>& x, const std::vector<cplx>& y, bool conjugate) {
    const std::size_t m = x.size();
    if (m != y.size() || m < 3) throw ParameterError("covariance needs >= 3 paired samples");
    const cplx mx = pairwise_mean(x), my = pairwise_mean(y);
    std::vector<cplx> prod(m);
    for (std::size_t i = 0; i < m; ++i) {
        const cplx dy = y[i] - my;
        prod[i] = (x[i] - mx) * (conjugate ? std::conj(dy) : dy);
    }
    const cplx s = pairwise_sum(prod.data(), m);
    const double md = static_cast<double>(m);
    const cplx cov = s / (md - 1.0);
    // Leave-one-out covariance in closed form from the centered products.
    std::vector<cplx> loo(m);
    for (std::size_t i = 0; i < m; ++i) loo[i] = (s - prod[i] * (md / (md - 1.0))) / (md - 2.0);
    const cplx loo_mean = pairwise_mean(loo);
    std::vector<double> dev(m);
    for (std::size_t i = 0; i < m; ++i) dev[i] = std::norm(loo[i] - loo_mean);
    const double se = std::sqrt((md - 1.0) / md * pairwise_sum(dev.data(), m));
    return {cov, se};
}

StatisticSummary summarize(const std::string& id, const std::vector<double>& x) {
    StatisticSummary s;
    s.id = id;
    const std::size_t n = x.size();
    if (n < 3) throw ParameterError("summary statistics need >= 3 samples");
    const double nd = static_cast<double>(n);
    s.mean = pairwise_mean(x);
    std::vector<double> d(n), d2(n), d3(n), d4(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = x[i] - s.mean;
        d2[i] = d[i] * d[i];
        d3[i] = d2[i] * d[i];
        d4[i] = d2[i] * d2[i];
    }
    const double s2 = pairwise_sum(d2.data(), n), s3 = pairwise_sum(d3.data(), n), s4 = pairwise_sum(d4.data(), n);
    s.variance = s2 / (nd - 1.0);
    s.distributional = n >= 500;
    if (s.variance < 1e-14) {
        s.degenerate = true;
        return s;
    }

    auto shape = [](double k, double t1, double t2, double t3, double t4) {
        const double mu = t1 / k;
        const double m2 = t2 / k - mu * mu;
        const double m3 = t3 / k - 3.0 * mu * t2 / k + 2.0 * mu * mu * mu;
        const double m4 = t4 / k - 4.0 * mu * t3 / k + 6.0 * mu * mu * t2 / k - 3.0 * mu * mu * mu * mu;
        return std::pair{m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
    };
    std::tie(s.skewness, s.excess_kurtosis) = shape(nd, 0.0, s2, s3, s4);
    std::vector<double> sk(n), ku(n);
    for (std::size_t i = 0; i < n; ++i)
        std::tie(sk[i], ku[i]) = shape(nd - 1.0, -d[i], s2 - d2[i], s3 - d3[i], s4 - d4[i]);
    auto jack_se = [&](std::vector<double>& v) {
        const double mean = pairwise_mean(v);
        for (double& e : v) e = (e - mean) * (e - mean);
        return std::sqrt((nd - 1.0) / nd * pairwise_sum(v.data(), n));
    };
    s.skewness_se = jack_se(sk);
    s.kurtosis_se = jack_se(ku);

    if (s.distributional) {
        std::vector<double> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        const double sigma = std::sqrt(s.variance);
        double dmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = 0.5 * std::erfc(-sorted[i] / (sigma * std::numbers::sqrt2));
            dmax = std::max({dmax, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
        }
        s.ks_statistic = dmax;
        s.ks_pvalue = kolmogorov_pvalue(dmax, n);
    }
    return s;
}

double variance_bound_crude(const EnsembleParams& params, cplx z) {
    return 4.0 * static_cast<double>(params.n) / (z.imag() * z.imag());
}

double variance_bound_refined(const EnsembleParams& params, cplx z) {
    const double y = std::abs(z.imag());
    const double n = static_cast<double>(params.n);
    return 2.0 / (y * y * y * y) * n * (params.s_n2() + 2.0 * params.m_n() / params.sigma_n2());
}

// ---------------------------------------------------------------------------
// run

EstimatorReport run(const ExperimentPlan& plan, unsigned threads) {
    plan.validate();
    const EnsembleParams& params = plan.params;
    const std::size_t m = plan.samples;
    const std::size_t nz = plan.z_grid.size();
    std::vector<TestFunction> tfs;
    for (const auto& spec : plan.test_functions) tfs.push_back(TestFunction::from_spec(spec));
    const double delta = plan.delta.value_or(plan.truncate ? choose_delta(params.n) : 0.0);

    EstimatorReport rep;
    rep.version = DWLAB_VERSION;
    rep.master_seed = plan.master_seed;
    rep.samples = m;
    rep.params_hash = params.digest();
    rep.params_text = params.to_config().to_text();
    rep.n = params.n;
    rep.truncated = plan.truncate;
    rep.traces.assign(nz, std::vector<cplx>(m));
    rep.linear.assign(tfs.size(), std::vector<double>(m));
    for (const auto& t : tfs) rep.test_functions.push_back(t.id());

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, m));

    std::atomic<std::size_t> next{0};
    std::mutex fail_mutex;
    std::size_t fail_index = m;
    std::string fail_message;
    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= m) return;
            try {
                WignerSample s = sample(params, plan.master_seed, idx);
                if (plan.truncate) s = truncate_center_homogenize(s, params, delta);
                const Spectrum spec = eigenvalues(s);
                for (std::size_t k = 0; k < nz; ++k) rep.traces[k][idx] = trace_resolvent(spec, plan.z_grid[k]);
                for (std::size_t f = 0; f < tfs.size(); ++f) rep.linear[f][idx] = linear_statistic(spec, tfs[f]).value.real();
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (idx < fail_index) {
                    fail_index = idx;
                    fail_message = e.what();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (fail_index < m)
        throw SampleError("sample " + std::to_string(fail_index) + " failed: " + fail_message, fail_index);

    const FluctuationParams fp = FluctuationParams::finite_n(params);
    const double n = static_cast<double>(params.n);
    for (std::size_t k = 0; k < nz; ++k) {
        const cplx z = plan.z_grid[k];
        const auto sol = subordination(fp, z);
        ZEstimate e{};
        e.z = z;
        e.mean_trace = pairwise_mean(rep.traces[k]);
        e.deterministic = n * sol.G;
        e.bias_hat = e.mean_trace - e.deterministic;
        const auto [var, var_se] = covariance_with_se(rep.traces[k], rep.traces[k], true);
        e.var_hat = var.real();
        e.var_se = var_se;
        e.bias_se = std::sqrt(e.var_hat / static_cast<double>(m));
        e.omega_tilde = z - params.sigma_n2() * e.mean_trace;
        e.beta_theory = beta_at(fp, sol);
        e.gamma_conj_theory = gamma_kernel(fp, z, std::conj(z)).Gamma;
        e.bias_bound = bias_bound(fp, z);
        e.variance_bound_crude = variance_bound_crude(params, z);
        e.variance_bound_refined = variance_bound_refined(params, z);
        rep.z.push_back(e);
    }

    auto pairs = plan.pairs;
    if (pairs.empty())
        for (std::size_t i = 0; i < nz; ++i)
            for (std::size_t j = i; j < nz; ++j) pairs.emplace_back(i, j);
    for (const auto& [i, j] : pairs) {
        PairEstimate p{};
        p.i = i;
        p.j = j;
        p.z1 = plan.z_grid[i];
        p.z2 = plan.z_grid[j];
        std::tie(p.cov, p.cov_se) = covariance_with_se(rep.traces[i], rep.traces[j], false);
        std::tie(p.cov_conj, p.cov_conj_se) = covariance_with_se(rep.traces[i], rep.traces[j], true);
        const KernelValue g = gamma_kernel(fp, p.z1, p.z2);
        const KernelValue gc = gamma_kernel(fp, p.z1, std::conj(p.z2));
        p.gamma_theory = g.Gamma;
        p.gamma_conj_theory = gc.Gamma;
        rep.pairs.push_back(p);
    }
    rep.statistics = normality_check(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// checks

std::vector<CovarianceRow> covariance_check(const EstimatorReport& report, const std::vector<cplx>& theory) {
    if (theory.size() != report.pairs.size()) throw ConfigError("theory table does not match the covariance pairs");
    std::vector<CovarianceRow> rows;
    for (std::size_t k = 0; k < report.pairs.size(); ++k) {
        const auto& p = report.pairs[k];
        const double ratio = std::abs(p.cov - theory[k]) / p.cov_se;
        rows.push_back({p.i, p.j, p.z1, p.z2, p.cov, theory[k], p.cov_se, ratio, ratio > 3.0});
    }
    return rows;
}

std::vector<CovarianceRow> covariance_check_conjugated(const EstimatorReport& report) {
    std::vector<CovarianceRow> rows;
    for (const auto& p : report.pairs) {
        const double ratio = std::abs(p.cov_conj - p.gamma_conj_theory) / p.cov_conj_se;
        rows.push_back({p.i, p.j, p.z1, std::conj(p.z2), p.cov_conj, p.gamma_conj_theory, p.cov_conj_se, ratio,
                        ratio > 3.0});
    }
    return rows;
}

std::vector<StatisticSummary> normality_check(const EstimatorReport& report) {
    std::vector<StatisticSummary> out;
    for (std::size_t k = 0; k < report.traces.size(); ++k) {
        const auto& t = report.traces[k];
        std::vector<double> re(t.size()), im(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            re[i] = t[i].real();
            im[i] = t[i].imag();
        }
        const std::string label = "TrR(" + z_label(report.z.at(k).z) + ")";
        out.push_back(summarize(label + ".re", re));
        out.push_back(summarize(label + ".im", im));
    }
    for (std::size_t f = 0; f < report.linear.size(); ++f) out.push_back(summarize(report.test_functions[f], report.linear[f]));
    return out;
}

std::vector<VarianceBoundRow> variance_bound_check(const EstimatorReport& report, const EnsembleParams& params) {
    std::vector<VarianceBoundRow> rows;
    for (const auto& e : report.z) {
        const double crude = variance_bound_crude(params, e.z);
        const double refined = variance_bound_refined(params, e.z);
        const double slack = 1.0 + 5.0 * e.var_se / e.var_hat;
        rows.push_back({e.z, e.var_hat, e.var_se, crude, refined, e.var_hat <= crude * slack && e.var_hat <= refined * slack});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// serialisation

std::string EstimatorReport::to_json() const {
    json j;
    j["version"] = version;
    j["master_seed"] = master_seed;
    j["samples"] = samples;
    j["params_hash"] = params_hash;
    j["params"] = params_text;
    j["n"] = n;
    j["truncated"] = truncated;
    j["z"] = json::array();
    for (const auto& e : z) {
        j["z"].push_back({{"z", to_j(e.z)},
                          {"mean_trace", to_j(e.mean_trace)},
                          {"deterministic", to_j(e.deterministic)},
                          {"bias_hat", to_j(e.bias_hat)},
                          {"bias_se", e.bias_se},
                          {"var_hat", e.var_hat},
                          {"var_se", e.var_se},
                          {"omega_tilde", to_j(e.omega_tilde)},
                          {"beta_theory", to_j(e.beta_theory)},
                          {"gamma_conj_theory", to_j(e.gamma_conj_theory)},
                          {"bias_bound", e.bias_bound},
                          {"variance_bound_crude", e.variance_bound_crude},
                          {"variance_bound_refined", e.variance_bound_refined}});
    }
    j["pairs"] = json::array();
    for (const auto& p : pairs) {
        j["pairs"].push_back({{"i", p.i},
                              {"j", p.j},
                              {"z1", to_j(p.z1)},
                              {"z2", to_j(p.z2)},
                              {"cov", to_j(p.cov)},
                              {"cov_se", p.cov_se},
                              {"cov_conj", to_j(p.cov_conj)},
                              {"cov_conj_se", p.cov_conj_se},
                              {"gamma_theory", to_j(p.gamma_theory)},
                              {"gamma_conj_theory", to_j(p.gamma_conj_theory)}});
    }
    j["test_functions"] = test_functions;
    j["traces"] = json::array();
    for (const auto& t : traces) {
        json row = json::array();
        for (cplx v : t) row.push_back(to_j(v));
        j["traces"].push_back(row);
    }
    j["linear"] = linear;
    j["statistics"] = json::array();
    for (const auto& s : statistics) {
        j["statistics"].push_back({{"id", s.id},
                                   {"mean", s.mean},
                                   {"variance", s.variance},
                                   {"skewness", s.skewness},
                                   {"skewness_se", s.skewness_se},
                                   {"excess_kurtosis", s.excess_kurtosis},
                                   {"kurtosis_se", s.kurtosis_se},
                                   {"ks_statistic", s.ks_statistic},
                                   {"ks_pvalue", s.ks_pvalue},
                                   {"degenerate", s.degenerate},
                                   {"distributional", s.distributional}});
    }
    return j.dump(1);
}

EstimatorReport EstimatorReport::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed report JSON: ") + e.what());
    }
    EstimatorReport r;
    try {
        r.version = j.at("version").get<std::string>();
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        r.samples = j.at("samples").get<std::size_t>();
        r.params_hash = j.at("params_hash").get<std::uint64_t>();
        r.params_text = j.at("params").get<std::string>();
        r.n = j.at("n").get<std::size_t>();
        r.truncated = j.at("truncated").get<bool>();
        for (const auto& e : j.at("z")) {
            ZEstimate z{};
            z.z = from_j(e.at("z"));
            z.mean_trace = from_j(e.at("mean_trace"));
            z.deterministic = from_j(e.at("deterministic"));
            z.bias_hat = from_j(e.at("bias_hat"));
            z.bias_se = e.at("bias_se").get<double>();
            z.var_hat = e.at("var_hat").get<double>();
            z.var_se = e.at("var_se").get<double>();
            z.omega_tilde = from_j(e.at("omega_tilde"));
            z.beta_theory = from_j(e.at("beta_theory"));
            z.gamma_conj_theory = from_j(e.at("gamma_conj_theory"));
            z.bias_bound = e.at("bias_bound").get<double>();
            z.variance_bound_crude = e.at("variance_bound_crude").get<double>();
            z.variance_bound_refined = e.at("variance_bound_refined").get<double>();
            r.z.push_back(z);
        }
        for (const auto& e : j.at("pairs")) {
            PairEstimate p{};
            p.i = e.at("i").get<std::size_t>();
            p.j = e.at("j").get<std::size_t>();
            p.z1 = from_j(e.at("z1"));
            p.z2 = from_j(e.at("z2"));
            p.cov = from_j(e.at("cov"));
            p.cov_se = e.at("cov_se").get<double>();
            p.cov_conj = from_j(e.at("cov_conj"));
            p.cov_conj_se = e.at("cov_conj_se").get<double>();
            p.gamma_theory = from_j(e.at("gamma_theory"));
            p.gamma_conj_theory = from_j(e.at("gamma_conj_theory"));
            r.pairs.push_back(p);
        }
        r.test_functions = j.at("test_functions").get<std::vector<std::string>>();
        for (const auto& row : j.at("traces")) {
            std::vector<cplx> t;
            for (const auto& v : row) t.push_back(from_j(v));
            r.traces.push_back(std::move(t));
        }
        r.linear = j.at("linear").get<std::vector<std::vector<double>>>();
        for (const auto& e : j.at("statistics")) {
            StatisticSummary s;
            s.id = e.at("id").get<std::string>();
            s.mean = e.at("mean").get<double>();
            s.variance = e.at("variance").get<double>();
            s.skewness = e.at("skewness").get<double>();
            s.skewness_se = e.at("skewness_se").get<double>();
            s.excess_kurtosis = e.at("excess_kurtosis").get<double>();
            s.kurtosis_se = e.at("kurtosis_se").get<double>();
            s.ks_statistic = e.at("ks_statistic").get<double>();
            s.ks_pvalue = e.at("ks_pvalue").get<double>();
            s.degenerate = e.at("degenerate").get<bool>();
            s.distributional = e.at("distributional").get<bool>();
            r.statistics.push_back(s);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("report JSON is missing a field: ") + e.what());
    }
    return r;
}

void EstimatorReport::write_csv(std::ostream& out, const std::vector<std::string>& metadata) const {
    for (const auto& line : metadata) out << "# " << line << '\n';
    out << "# version=" << version << " seed=" << master_seed << " samples=" << samples
        << " params_hash=" << hex_digest(params_hash) << '\n';
    out << "re_z,im_z,re_mean,im_mean,re_bias_hat,im_bias_hat,re_beta_theory,im_beta_theory,se,var_hat,"
           "re_gamma_theory,im_gamma_theory,bias_bound,variance_bound_crude,variance_bound_refined\n";
    out << std::setprecision(17);
    for (const auto& e : z) {
        out << e.z.real() << ',' << e.z.imag() << ',' << e.mean_trace.real() << ',' << e.mean_trace.imag() << ','
            << e.bias_hat.real() << ',' << e.bias_hat.imag() << ',' << e.beta_theory.real() << ','
            << e.beta_theory.imag() << ',' << e.bias_se << ',' << e.var_hat << ',' << e.gamma_conj_theory.real() << ','
            << e.gamma_conj_theory.imag() << ',' << e.bias_bound << ',' << e.variance_bound_crude << ','
            << e.variance_bound_refined << '\n';
    }
}

}  // namespace dwlab
