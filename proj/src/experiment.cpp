#include "mlmc/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "mlmc/parallel.hpp"

namespace mlmc {

const char* to_string(Problem p) {
    switch (p) {
    case Problem::HarmonicSet1: return "harmonic_set1";
    case Problem::HarmonicSet2: return "harmonic_set2";
    case Problem::DoubleWell: return "double_well";
    case Problem::Custom: return "custom";
    }
    return "?";
}

Problem problem_from_string(const std::string& name) {
    if (name == "harmonic_set1") return Problem::HarmonicSet1;
    if (name == "harmonic_set2") return Problem::HarmonicSet2;
    if (name == "double_well") return Problem::DoubleWell;
    if (name == "custom") return Problem::Custom;
    throw input_error("unknown problem: " + name);
}

MethodInfo method_info(const std::string& tag) {
    MethodInfo m;
    m.tag = tag;
    if (tag == "MC-EMG") {
        m.scheme = Scheme::EulerMaruyama;
        m.M0 = 4;
        m.weak_order = 1;
        m.mc_baseline = true;
    } else if (tag == "EMG" || tag == "EMG+" || tag == "EMGe" || tag == "EMGe+") {
        m.scheme = Scheme::EulerMaruyama;
        m.M0 = (tag == "EMG+" || tag == "EMGe+") ? 8 : 4;
        m.weak_order = 1;
        m.extrapolate = tag == "EMGe" || tag == "EMGe+";
    } else if (tag == "SEG" || tag == "SEGe") {
        m.scheme = Scheme::SymplecticEulerOU;
        m.M0 = 4;
        m.weak_order = 1;
        m.extrapolate = tag == "SEGe";
    } else if (tag == "SVG") {
        m.scheme = Scheme::StormerVerletOU;
        m.M0 = 4;
        m.weak_order = 2;
    } else if (tag == "SVGe") {
        // fourth order after extrapolation: keep L = 2 and scale M0 instead
        m.scheme = Scheme::StormerVerletOU;
        m.M0 = 4;
        m.weak_order = 2;
        m.extrapolate = true;
        m.fixed_level = true;
        m.L_fixed = 2;
    } else if (tag == "SE3-" || tag == "SE3" || tag == "SE3+") {
        m.scheme = Scheme::SymplecticEulerOU;
        m.M0 = tag == "SE3-" ? 4 : (tag == "SE3" ? 8 : 16);
        m.weak_order = 1;
        m.dist = DistributionKind::ThreePoint;
        m.exact_coarse = true;
    } else if (tag == "SE4") {
        m.scheme = Scheme::SymplecticEulerOU;
        m.M0 = 8;
        m.weak_order = 1;
        m.dist = DistributionKind::FourPoint;
        m.exact_coarse = true;
    } else {
        throw input_error("unknown method tag: " + tag);
    }
    return m;
}

// --- config parsing --------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("config: bad number for " + key + ": '" + s + "'");
    }
}

long long parse_int(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("config: bad integer for " + key + ": '" + s + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw input_error("config: bad boolean for " + key + ": '" + s + "'");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t calibration_seed(const SuiteConfig& cfg, const std::string& tag, double T) {
    return mix_seed(mix_seed(cfg.seed, fnv1a(tag)), std::bit_cast<std::uint64_t>(T));
}

// Near stationarity the pilot corrections can drown in their own noise at
// fine levels; walk towards coarser pilot levels until the bias constant is
// resolvable.
Calibration calibrate_with_fallback(const MlmcConfig& base, const LangevinModel& model,
                                    const QoI& qoi, long long pilot_samples,
                                    std::uint64_t seed, int threads, int pilot_level) {
    for (int pl = pilot_level; pl >= 1; --pl) {
        try {
            return calibrate_levels(base, model, qoi, pilot_samples, seed, threads, pl);
        } catch (const calibration_error&) {
            if (pl == 1) throw;
        }
    }
    throw calibration_error("calibrate_with_fallback: unreachable");
}

} // namespace

SuiteConfig parse_config_text(const std::string& text) {
    SuiteConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw input_error("config line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "problem") cfg.problem = problem_from_string(val);
        else if (key == "method" || key == "methods") cfg.methods = split_list(val);
        else if (key == "eps") {
            cfg.eps_list.clear();
            for (const std::string& e : split_list(val))
                cfg.eps_list.push_back(parse_double(key, e));
        } else if (key == "T") {
            cfg.T_list.clear();
            for (const std::string& t : split_list(val))
                cfg.T_list.push_back(parse_double(key, t));
        } else if (key == "repeat") cfg.repeat = (int)parse_int(key, val);
        else if (key == "seed") cfg.seed = (std::uint64_t)parse_int(key, val);
        else if (key == "threads") cfg.threads = (int)parse_int(key, val);
        else if (key == "pilot") cfg.pilot_samples = parse_int(key, val);
        else if (key == "pilot_level") cfg.pilot_level = (int)parse_int(key, val);
        else if (key == "budget") cfg.leaf_budget = (std::uint64_t)parse_int(key, val);
        else if (key == "bias_samples") cfg.bias_samples = parse_int(key, val);
        else if (key == "recompute_reference") cfg.recompute_reference = parse_bool(key, val);
        else if (key == "reference") cfg.reference_override = parse_double(key, val);
        else if (key == "potential") cfg.custom_potential = val;
        else if (key == "qoi") cfg.custom_qoi = val;
        else if (key == "omega0") cfg.omega0 = parse_double(key, val);
        else if (key == "lambda") cfg.lambda = parse_double(key, val);
        else if (key == "sigma") cfg.sigma = parse_double(key, val);
        else if (key == "qmin") cfg.qmin = parse_double(key, val);
        else if (key == "q0") cfg.q0 = parse_double(key, val);
        else if (key == "p0") cfg.p0 = parse_double(key, val);
        else if (key == "bias_levels") {
            cfg.bias_levels.clear();
            for (const std::string& l : split_list(val))
                cfg.bias_levels.push_back((int)parse_int(key, l));
        } else
            throw input_error("config: unknown key '" + key + "'");
    }
    return cfg;
}

SuiteConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// --- problems and references ----------------------------------------------

LangevinModel problem_model(const SuiteConfig& cfg, double T) {
    switch (cfg.problem) {
    case Problem::HarmonicSet1:
        return make_model_1d(4.0, 2.0, Harmonic{1.0}, -1.0, -1.0, T);
    case Problem::HarmonicSet2:
        return make_model_1d(9.0, 3.0, Harmonic{1.0}, -1.0, -1.0, T);
    case Problem::DoubleWell:
        return make_model_1d(2.0, 4.0, DoubleWell{1.0, 1.0}, -1.0, -1.0, T);
    case Problem::Custom: {
        Potential pot = cfg.custom_potential == "double_well"
                            ? Potential(DoubleWell{cfg.omega0, cfg.qmin})
                            : Potential(Harmonic{cfg.omega0});
        return make_model_1d(cfg.lambda, cfg.sigma, pot, cfg.q0, cfg.p0, T);
    }
    }
    throw input_error("problem_model: bad problem");
}

QoI problem_qoi(const SuiteConfig& cfg) {
    if (cfg.problem == Problem::DoubleWell) return ShiftedSquare{1.0};
    if (cfg.problem == Problem::Custom && cfg.custom_qoi == "shifted_square")
        return ShiftedSquare{cfg.qmin};
    return GaussianBump{};
}

namespace {

/// Reference values for the standard double-well configuration
/// (omega0 = qmin = 1, lambda = 2, sigma = 4, X0 = (-1,-1)).
const std::map<double, double> kDoubleWellReference = {
    {1.0, 4.52782626985},
    {2.0, 6.11075602345},
    {4.0, 7.11570774835},
    {8.0, 7.2125872733},
};

double recompute_reference(const SuiteConfig& cfg, double T) {
    // Independent verification run: extrapolated Stormer-Verlet at eps = 1e-5.
    SuiteConfig fine = cfg;
    fine.recompute_reference = false;
    const LangevinModel model = problem_model(fine, T);
    const QoI qoi = problem_qoi(fine);
    MlmcConfig base;
    base.scheme = Scheme::StormerVerletOU;
    base.M0 = 4;
    base.weak_order = 2;
    base.extrapolate = true;
    base.eps_max = 1e-5;
    const Calibration cal = calibrate_with_fallback(
        base, model, qoi, 20000, mix_seed(cfg.seed, fnv1a("reference")), cfg.threads,
        cfg.pilot_level);
    base.L = std::max(1, cal.level_for_eps(base.eps_max));
    const MlmcResult res =
        run(base, model, qoi, mix_seed(cfg.seed, fnv1a("reference_run")), cfg.threads);
    return res.estimate;
}

} // namespace

double reference_value(const SuiteConfig& cfg, double T) {
    if (cfg.reference_override) return *cfg.reference_override;
    if (cfg.recompute_reference) return recompute_reference(cfg, T);

    const LangevinModel model = problem_model(cfg, T);
    const QoI qoi = problem_qoi(cfg);
    if (std::holds_alternative<Harmonic>(model.potential) &&
        std::holds_alternative<GaussianBump>(qoi) && model.sigma > 0.0)
        return exact_qoi_expectation(harmonic_exact_law(model, T), qoi);

    if (cfg.problem == Problem::DoubleWell) {
        for (const auto& [t, v] : kDoubleWellReference)
            if (std::abs(t - T) < 1e-12) return v;
    }
    throw input_error(
        "reference_value: no reference known; set `reference =` or "
        "`recompute_reference = true`");
}

// --- suite execution --------------------------------------------------------

namespace {

SummaryRow make_summary_row(const SuiteConfig& cfg, const MethodInfo& mi, double T,
                            double eps, int rep, const MlmcConfig& rc,
                            const MlmcResult& res, double reference,
                            double cpu_seconds) {
    SummaryRow row;
    row.problem = to_string(cfg.problem);
    row.method = mi.tag;
    row.T = T;
    row.eps = eps;
    row.rep = rep;
    row.seed = cfg.seed;
    row.estimate = res.estimate;
    row.reference = reference;
    row.abs_error = std::abs(res.estimate - reference);
    row.stat_error = res.stat_error_est;
    row.error_over_eps = (row.abs_error + row.stat_error) / eps;
    row.bias_est = res.bias_est;
    row.total_cost = res.total_cost;
    row.levels = rc.L;
    row.M0 = rc.M0;
    row.wall_time = res.wall_time;
    row.cpu_time = cpu_seconds;
    row.walltime_times_eps2 = res.wall_time * eps * eps;
    row.walltime_times_eps2_over_T = row.walltime_times_eps2 / T;
    return row;
}

} // namespace

SuiteResult run_suite(const SuiteConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.methods.empty()) throw input_error("run_suite: no methods configured");
    if (cfg.eps_list.empty()) throw input_error("run_suite: no eps values configured");
    if (cfg.repeat < 1) throw input_error("run_suite: repeat must be >= 1");

    SuiteResult out;
    for (const double T : cfg.T_list) {
        const LangevinModel model = problem_model(cfg, T);
        const QoI qoi = problem_qoi(cfg);
        const double reference = reference_value(cfg, T);

        for (const std::string& tag : cfg.methods) {
            const MethodInfo mi = method_info(tag);
            if (mi.mc_baseline) {
                for (const double eps : cfg.eps_list)
                    for (int rep = 0; rep < cfg.repeat; ++rep)
                        out.summary.push_back(mc_baseline(cfg, T, eps, rep));
                continue;
            }

            MlmcConfig base;
            base.scheme = mi.scheme;
            // Method tags fix the coarsest step size at T = 1; longer end
            // times keep h_0 and scale the step count, so the cost grows
            // linearly with T and the coarse level stays stable.
            base.M0 = (int)std::ceil(mi.M0 * std::max(T, 1.0) - 1e-12);
            base.dist = mi.dist;
            base.extrapolate = mi.extrapolate;
            base.exact_coarse = mi.exact_coarse;
            base.weak_order = mi.weak_order;
            base.leaf_budget = cfg.leaf_budget;
            base.L = std::max(1, cfg.pilot_level); // placeholder until calibrated

            const Calibration cal = calibrate_with_fallback(
                base, model, qoi, cfg.pilot_samples, calibration_seed(cfg, tag, T),
                cfg.threads, cfg.pilot_level);

            // Level-0 inter-level bias of the discrete regime, attached to
            // every run of this method.
            std::optional<double> level0_bias;
            if (mi.dist != DistributionKind::Gaussian && cfg.bias_samples > 0) {
                const InterLevelBiasResult r = inter_level_bias(
                    base, model, qoi, 0, cfg.bias_samples,
                    mix_seed(cfg.seed, fnv1a("bias")), cfg.threads);
                level0_bias = r.bias;
            }

            int max_L = 0;
            for (const double eps : cfg.eps_list) {
                MlmcConfig rc = base;
                rc.eps_max = eps;
                if (mi.fixed_level) {
                    rc.L = mi.L_fixed;
                    rc.M0 = cal.coarsest_steps_for_eps(eps, mi.L_fixed);
                } else {
                    rc.L = cal.level_for_eps(eps);
                }
                if (rc.extrapolate) rc.L = std::max(rc.L, 1);
                max_L = std::max(max_L, rc.L);

                for (int rep = 0; rep < cfg.repeat; ++rep) {
                    const std::uint64_t run_seed = mix_seed(cfg.seed, (std::uint64_t)rep);
                    const std::clock_t c0 = std::clock();
                    MlmcResult res = run(rc, model, qoi, run_seed, cfg.threads);
                    res.inter_level_bias = level0_bias;
                    const double cpu = double(std::clock() - c0) / CLOCKS_PER_SEC;

                    out.summary.push_back(make_summary_row(cfg, mi, T, eps, rep, rc,
                                                           res, reference, cpu));
                    for (const LevelStats& s : res.per_level) {
                        LevelRow lr;
                        lr.problem = to_string(cfg.problem);
                        lr.method = tag;
                        lr.T = T;
                        lr.eps = eps;
                        lr.rep = rep;
                        lr.level = s.level;
                        lr.h = s.h;
                        lr.N = s.N;
                        lr.yhat = s.yhat();
                        lr.vhat = s.vhat();
                        lr.cost = s.cost;
                        out.levels.push_back(lr);
                    }
                }
            }

            if (mi.dist != DistributionKind::Gaussian && cfg.bias_samples > 0) {
                SuiteConfig sweep = cfg;
                sweep.bias_levels.clear();
                for (int l = 0; l <= max_L; ++l) sweep.bias_levels.push_back(l);
                const std::vector<BiasRow> rows = bias_sweep(sweep, tag, T);
                out.bias.insert(out.bias.end(), rows.begin(), rows.end());
            }
        }
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_summary_csv(out_dir / "summary.csv", out.summary);
        write_levels_csv(out_dir / "levels.csv", out.levels);
        if (!out.bias.empty()) write_bias_csv(out_dir / "level_bias.csv", out.bias);
    }
    return out;
}

SummaryRow mc_baseline(const SuiteConfig& cfg, double T, double eps, int rep) {
    const MethodInfo mi = method_info("MC-EMG");
    const LangevinModel model = problem_model(cfg, T);
    const QoI qoi = problem_qoi(cfg);
    const double reference = reference_value(cfg, T);
    const std::uint64_t seed = mix_seed(cfg.seed, (std::uint64_t)rep);

    MlmcConfig base;
    base.scheme = mi.scheme;
    base.M0 = (int)std::ceil(mi.M0 * std::max(T, 1.0) - 1e-12);
    base.weak_order = mi.weak_order;
    base.L = 1;
    const Calibration cal = calibrate_with_fallback(
        base, model, qoi, cfg.pilot_samples, calibration_seed(cfg, mi.tag, T),
        cfg.threads, cfg.pilot_level);
    const int L = cal.level_for_eps(eps);
    const int steps = base.M0 << L;

    const auto t0 = std::chrono::steady_clock::now();
    const std::clock_t c0 = std::clock();

    const long long pilot_n = std::max<long long>(cfg.pilot_samples, 1000);
    auto run_block = [&](long long lo, long long hi) {
        return sample_in_parallel_ctx(
            lo, hi, cfg.threads,
            [&] { return SinglePathSampler(mi.scheme, model, steps, qoi); },
            [&](SinglePathSampler& path, long long i, double& v, double& c) {
                IncrementSource src(DistributionKind::Gaussian, seed,
                                    streams::id(streams::kBaseline, L, i));
                v = path(src);
                c = double(steps);
            });
    };
    const SampleSums pilot = run_block(0, pilot_n);
    const long long n_main = (long long)std::ceil(2.0 / (eps * eps) * pilot.variance());
    const SampleSums main = run_block(pilot_n, pilot_n + std::max<long long>(n_main, 2));

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double cpu = double(std::clock() - c0) / CLOCKS_PER_SEC;

    SummaryRow row;
    row.problem = to_string(cfg.problem);
    row.method = mi.tag;
    row.T = T;
    row.eps = eps;
    row.rep = rep;
    row.seed = cfg.seed;
    row.estimate = main.mean();
    row.reference = reference;
    row.abs_error = std::abs(row.estimate - reference);
    row.stat_error = main.std_error();
    row.error_over_eps = (row.abs_error + row.stat_error) / eps;
    row.bias_est = cal.eps_for_level(L) / cal.bias_split;
    row.total_cost = pilot.cost + main.cost;
    row.levels = L;
    row.M0 = base.M0;
    row.wall_time = wall;
    row.cpu_time = cpu;
    row.walltime_times_eps2 = wall * eps * eps;
    row.walltime_times_eps2_over_T = row.walltime_times_eps2 / T;
    return row;
}

std::vector<BiasRow> bias_sweep(const SuiteConfig& cfg, const std::string& method_tag,
                                double T) {
    const MethodInfo mi = method_info(method_tag);
    if (mi.dist == DistributionKind::Gaussian)
        throw input_error("bias_sweep: method " + method_tag +
                          " does not use a discrete distribution");
    const LangevinModel model = problem_model(cfg, T);
    const QoI qoi = problem_qoi(cfg);

    MlmcConfig base;
    base.scheme = mi.scheme;
    base.M0 = (int)std::ceil(mi.M0 * std::max(T, 1.0) - 1e-12);
    base.dist = mi.dist;
    base.weak_order = mi.weak_order;

    std::vector<BiasRow> rows;
    for (const int level : cfg.bias_levels) {
        const InterLevelBiasResult r =
            inter_level_bias(base, model, qoi, level, cfg.bias_samples,
                             mix_seed(cfg.seed, fnv1a("bias")), cfg.threads);
        BiasRow row;
        row.problem = to_string(cfg.problem);
        row.method = method_tag;
        row.T = T;
        row.level = level;
        row.h = T / double(base.M0 << level);
        row.abs_bias = std::abs(r.bias);
        row.std_error = r.std_error;
        row.samples = r.samples;
        rows.push_back(row);
    }
    return rows;
}

// --- CSV --------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<SummaryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write " + path.string());
    out << "problem,method,T,eps,rep,seed,estimate,reference,abs_error_vs_reference,"
           "stat_error,error_over_eps,bias_est,total_cost,levels,M0,wall_time,"
           "cpu_time,walltime_times_eps2,walltime_times_eps2_over_T\n";
    for (const SummaryRow& r : rows) {
        out << r.problem << ',' << r.method << ',' << format_double(r.T) << ','
            << format_double(r.eps) << ',' << r.rep << ',' << r.seed << ','
            << format_double(r.estimate) << ',' << format_double(r.reference) << ','
            << format_double(r.abs_error) << ',' << format_double(r.stat_error) << ','
            << format_double(r.error_over_eps) << ',' << format_double(r.bias_est)
            << ',' << format_double(r.total_cost) << ',' << r.levels << ',' << r.M0
            << ',' << format_double(r.wall_time) << ',' << format_double(r.cpu_time)
            << ',' << format_double(r.walltime_times_eps2) << ','
            << format_double(r.walltime_times_eps2_over_T) << '\n';
    }
}

void write_levels_csv(const std::filesystem::path& path,
                      const std::vector<LevelRow>& rows) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write " + path.string());
    out << "problem,method,T,eps,rep,level,h,N,yhat,vhat,cost\n";
    for (const LevelRow& r : rows) {
        out << r.problem << ',' << r.method << ',' << format_double(r.T) << ','
            << format_double(r.eps) << ',' << r.rep << ',' << r.level << ','
            << format_double(r.h) << ',' << r.N << ',' << format_double(r.yhat)
            << ',' << format_double(r.vhat) << ',' << format_double(r.cost) << '\n';
    }
}

void write_bias_csv(const std::filesystem::path& path,
                    const std::vector<BiasRow>& rows) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write " + path.string());
    out << "problem,method,T,level,h,abs_bias,std_error,samples\n";
    for (const BiasRow& r : rows) {
        out << r.problem << ',' << r.method << ',' << format_double(r.T) << ','
            << r.level << ',' << format_double(r.h) << ','
            << format_double(r.abs_bias) << ',' << format_double(r.std_error) << ','
            << r.samples << '\n';
    }
}

} // namespace mlmc
