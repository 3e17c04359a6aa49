#pragma once

// Benchmark harness: flat key = value run configs, experiment setup, CSV
// serialization and the run / compare commands used by the cbmm tool.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cbmm/data.hpp"
#include "cbmm/errors.hpp"
#include "cbmm/metrics.hpp"
#include "cbmm/problems.hpp"
#include "cbmm/solvers.hpp"

namespace cbmm {

enum class Experiment { synthetic, dro };
enum class Algorithm { cb_min_max, cb_min_max_simplex, restart, pdg, pdg_entropic };
enum class DroGapMode { none, final, all };

inline const char* to_string(Experiment e) { return e == Experiment::synthetic ? "synthetic" : "dro"; }

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::cb_min_max: return "cb_min_max";
        case Algorithm::cb_min_max_simplex: return "cb_min_max_simplex";
        case Algorithm::restart: return "restart";
        case Algorithm::pdg: return "pdg";
        case Algorithm::pdg_entropic: return "pdg_entropic";
    }
    return "?";
}

inline const char* to_string(DroGapMode m) {
    switch (m) {
        case DroGapMode::none: return "none";
        case DroGapMode::final: return "final";
        case DroGapMode::all: return "all";
    }
    return "?";
}

/// Raw key/value pairs before validation. Later sources override earlier ones.
using ConfigMap = std::map<std::string, std::string>;

/// Every accepted config key; each one is also a `--key` flag of the tool.
inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "experiment", "algorithm", "T", "epsilon_prime", "centering", "coin_sign",
        "rho", "radius_x", "radius_y", "x0", "y0",
        "lambda", "radius", "regularizer_sign",
        "train", "test", "positive_labels", "negative_labels", "test_fraction", "seed",
        "gen_samples", "gen_features", "gen_flip",
        "epsilon0", "epsilon", "theta", "complexity_constant",
        "eta_x", "eta_y", "grad_bound_x", "grad_bound_y", "record_every", "timing", "dro_gap", "output",
    };
    return keys;
}

struct RunConfig {
    Experiment experiment = Experiment::synthetic;
    Algorithm algorithm = Algorithm::cb_min_max;
    std::size_t T = 1000;
    double epsilon_prime = 1.0;
    Centering centering = Centering::origin;
    CoinSign coin_sign = CoinSign::regret;

    // synthetic
    double rho = 0.5;
    double radius_x = 5.0;
    double radius_y = 5.0;
    double x0 = 1.0;
    double y0 = 1.0;

    // dro (rho above doubles as the w-regularizer, default 1e-4 for dro)
    double lambda = 1e-4;
    double radius = 1e5;
    int regularizer_sign = +1;
    std::string train_path;
    std::string test_path;
    std::string positive_labels = "1";
    std::string negative_labels = "-1";
    double test_fraction = 0.2;
    std::uint64_t seed = 42;
    std::size_t gen_samples = 200;
    std::size_t gen_features = 20;
    double gen_flip = 0.1;

    // restart
    double epsilon0 = 4.0;
    double epsilon = 0.25;
    double theta = 0.25;
    double complexity_constant = 100.0;

    std::optional<double> eta_x;
    std::optional<double> eta_y;
    /// Replace the problem's gradient-norm bounds used for pre-scaling.
    std::optional<double> grad_bound_x;
    std::optional<double> grad_bound_y;
    std::size_t record_every = 0;
    bool timing = false;
    DroGapMode dro_gap = DroGapMode::final;
    std::string output;

    /// Output file after the CBMM_OUTPUT_DIR override.
    std::string output_file() const {
        namespace fs = std::filesystem;
        fs::path p = output.empty() ? fs::path(std::string(to_string(experiment)) + "_" + to_string(algorithm) + ".csv")
                                    : fs::path(output);
        if (const char* dir = std::getenv("CBMM_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
            p = fs::path(dir) / p.filename();
        }
        return p.string();
    }
};

namespace detail {

inline double config_double(const std::string& key, const std::string& v) {
    try {
        return parse_double(trim(v), 0);
    } catch (const ParseError&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

inline std::uint64_t config_uint(const std::string& key, const std::string& v) {
    const auto s = trim(v);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

inline bool config_bool(const std::string& key, const std::string& v) {
    const auto s = trim(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline void require_positive(const std::string& key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be positive");
}

}  // namespace detail

/// Parse `key = value` lines; `#` starts a comment.
inline ConfigMap parse_config_text(std::string_view text) {
    ConfigMap out;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        out[key] = std::string(detail::trim(line.substr(eq + 1)));
    }
    return out;
}

inline ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Entries of `top` replace those of `base`.
inline ConfigMap merge(ConfigMap base, const ConfigMap& top) {
    for (const auto& [k, v] : top) base[k] = v;
    return base;
}

/// Validate and convert. Throws ConfigError.
inline RunConfig make_config(const ConfigMap& m) {
    const auto& keys = config_keys();
    for (const auto& [k, v] : m) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown config key '" + k + "'");
    }
    auto get = [&](const char* k) -> const std::string* {
        const auto it = m.find(k);
        return it == m.end() ? nullptr : &it->second;
    };

    RunConfig c;
    if (auto v = get("experiment")) {
        if (*v == "synthetic") c.experiment = Experiment::synthetic;
        else if (*v == "dro") c.experiment = Experiment::dro;
        else throw ConfigError("experiment must be synthetic or dro, got '" + *v + "'");
    }
    if (auto v = get("algorithm")) {
        if (*v == "cb_min_max") c.algorithm = Algorithm::cb_min_max;
        else if (*v == "cb_min_max_simplex") c.algorithm = Algorithm::cb_min_max_simplex;
        else if (*v == "restart") c.algorithm = Algorithm::restart;
        else if (*v == "pdg") c.algorithm = Algorithm::pdg;
        else if (*v == "pdg_entropic") c.algorithm = Algorithm::pdg_entropic;
        else throw ConfigError("unknown algorithm '" + *v + "'");
    }
    if (c.experiment == Experiment::dro) c.rho = 1e-4;

    if (auto v = get("T")) c.T = detail::config_uint("T", *v);
    if (auto v = get("epsilon_prime")) c.epsilon_prime = detail::config_double("epsilon_prime", *v);
    if (auto v = get("centering")) {
        if (*v == "origin") c.centering = Centering::origin;
        else if (*v == "x0") c.centering = Centering::initial_point;
        else throw ConfigError("centering must be origin or x0");
    }
    if (auto v = get("coin_sign")) {
        if (*v == "regret") c.coin_sign = CoinSign::regret;
        else if (*v == "literal") c.coin_sign = CoinSign::literal;
        else throw ConfigError("coin_sign must be regret or literal");
    }
    if (auto v = get("rho")) c.rho = detail::config_double("rho", *v);
    if (auto v = get("radius_x")) c.radius_x = detail::config_double("radius_x", *v);
    if (auto v = get("radius_y")) c.radius_y = detail::config_double("radius_y", *v);
    if (auto v = get("x0")) c.x0 = detail::config_double("x0", *v);
    if (auto v = get("y0")) c.y0 = detail::config_double("y0", *v);
    if (auto v = get("lambda")) c.lambda = detail::config_double("lambda", *v);
    if (auto v = get("radius")) c.radius = detail::config_double("radius", *v);
    if (auto v = get("regularizer_sign")) {
        const double s = detail::config_double("regularizer_sign", *v);
        if (s != 1.0 && s != -1.0) throw ConfigError("regularizer_sign must be +1 or -1");
        c.regularizer_sign = static_cast<int>(s);
    }
    if (auto v = get("train")) c.train_path = *v;
    if (auto v = get("test")) c.test_path = *v;
    if (auto v = get("positive_labels")) c.positive_labels = *v;
    if (auto v = get("negative_labels")) c.negative_labels = *v;
    if (auto v = get("test_fraction")) c.test_fraction = detail::config_double("test_fraction", *v);
    if (auto v = get("seed")) c.seed = detail::config_uint("seed", *v);
    if (auto v = get("gen_samples")) c.gen_samples = detail::config_uint("gen_samples", *v);
    if (auto v = get("gen_features")) c.gen_features = detail::config_uint("gen_features", *v);
    if (auto v = get("gen_flip")) c.gen_flip = detail::config_double("gen_flip", *v);
    if (auto v = get("epsilon0")) c.epsilon0 = detail::config_double("epsilon0", *v);
    if (auto v = get("epsilon")) c.epsilon = detail::config_double("epsilon", *v);
    if (auto v = get("theta")) c.theta = detail::config_double("theta", *v);
    if (auto v = get("complexity_constant")) c.complexity_constant = detail::config_double("complexity_constant", *v);
    if (auto v = get("eta_x")) c.eta_x = detail::config_double("eta_x", *v);
    if (auto v = get("eta_y")) c.eta_y = detail::config_double("eta_y", *v);
    if (auto v = get("grad_bound_x")) c.grad_bound_x = detail::config_double("grad_bound_x", *v);
    if (auto v = get("grad_bound_y")) c.grad_bound_y = detail::config_double("grad_bound_y", *v);
    if (auto v = get("record_every")) {
        c.record_every = detail::config_uint("record_every", *v);
        if (c.record_every == 0) throw ConfigError("record_every must be positive");
    }
    if (auto v = get("timing")) c.timing = detail::config_bool("timing", *v);
    if (auto v = get("dro_gap")) {
        if (*v == "none") c.dro_gap = DroGapMode::none;
        else if (*v == "final") c.dro_gap = DroGapMode::final;
        else if (*v == "all") c.dro_gap = DroGapMode::all;
        else throw ConfigError("dro_gap must be none, final or all");
    }
    if (auto v = get("output")) c.output = *v;

    if (c.T == 0) throw ConfigError("T must be positive");
    detail::require_positive("epsilon_prime", c.epsilon_prime);
    if (c.eta_x) detail::require_positive("eta_x", *c.eta_x);
    if (c.eta_y) detail::require_positive("eta_y", *c.eta_y);
    if (c.grad_bound_x) detail::require_positive("grad_bound_x", *c.grad_bound_x);
    if (c.grad_bound_y) detail::require_positive("grad_bound_y", *c.grad_bound_y);

    if (c.experiment == Experiment::synthetic) {
        detail::require_positive("rho", c.rho);
        detail::require_positive("radius_x", c.radius_x);
        detail::require_positive("radius_y", c.radius_y);
        if (!(std::abs(c.x0) <= c.radius_x) || !(std::abs(c.y0) <= c.radius_y)) {
            throw ConfigError("x0/y0 must lie inside the box");
        }
        if (c.algorithm == Algorithm::cb_min_max_simplex || c.algorithm == Algorithm::pdg_entropic) {
            throw ConfigError(std::string(to_string(c.algorithm)) + " needs a simplex dual; use experiment = dro");
        }
    } else {
        if (!(c.rho >= 0.0) || !(c.lambda >= 0.0)) throw ConfigError("rho and lambda must be non-negative");
        detail::require_positive("radius", c.radius);
        if (c.train_path.empty() && (c.gen_samples < 2 || c.gen_features == 0)) {
            throw ConfigError("generated dataset needs gen_samples >= 2 and gen_features >= 1");
        }
        if (!(c.gen_flip >= 0.0 && c.gen_flip <= 1.0)) throw ConfigError("gen_flip must be in [0, 1]");
        if (!c.train_path.empty() && c.test_path.empty() && c.test_fraction != 0.0 &&
            !(c.test_fraction > 0.0 && c.test_fraction < 1.0)) {
            throw ConfigError("test_fraction must be in (0, 1), or 0 for no split");
        }
    }
    if (c.algorithm == Algorithm::restart) {
        try {
            RestartSchedule{c.epsilon0, c.epsilon, c.theta, c.complexity_constant}.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    return c;
}

/// Training and optional test data for a DRO run.
struct DroData {
    Dataset train;
    std::optional<Dataset> test;
};

/// Loads, remaps and splits per the config. Throws DataError.
inline DroData prepare_dro_data(const RunConfig& c) {
    DroData out;
    if (c.train_path.empty()) {
        // Generated data is used whole for training.
        out.train = generate_dataset(c.gen_samples, c.gen_features, c.seed, c.gen_flip);
        return out;
    }
    LabelRemap map = [&] {
        try {
            return LabelRemap::parse(c.positive_labels, c.negative_labels);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("label lists: ") + e.what());
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }();
    Dataset train = remap_labels(load_libsvm(c.train_path), map);
    if (!c.test_path.empty()) {
        Dataset test = remap_labels(load_libsvm(c.test_path), map);
        harmonize_dimension(train, test);
        out.train = std::move(train);
        out.test = std::move(test);
    } else if (c.test_fraction > 0.0) {
        try {
            auto [tr, te] = split(train, c.test_fraction, c.seed);
            out.train = std::move(tr);
            out.test = std::move(te);
        } catch (const InvalidArgument& e) {
            throw DataError(std::string("split: ") + e.what());
        }
    } else {
        out.train = std::move(train);
    }
    if (out.train.dimension == 0) throw DataError("training set has no features");
    return out;
}

struct RunResult {
    SolverOutput output;
    std::string summary;
};

/// Oracle view with replaced gradient bounds.
template <SaddleOracle Oracle>
struct BoundOverride {
    const Oracle& inner;
    double gx;
    double gy;

    double value(ConstSpan x, ConstSpan y) const { return inner.value(x, y); }
    OracleAnswer subgradients(ConstSpan x, ConstSpan y) const { return inner.subgradients(x, y); }
    double bound_x() const { return gx; }
    double bound_y() const { return gy; }
};

namespace detail {

/// Calls fn with the problem itself or with its bound-overriding view.
template <class Problem, class Fn>
SolverOutput with_bounds(const Problem& prob, const RunConfig& c, Fn&& fn) {
    if (!c.grad_bound_x && !c.grad_bound_y) return fn(prob);
    return fn(BoundOverride<Problem>{prob, c.grad_bound_x.value_or(prob.bound_x()),
                                     c.grad_bound_y.value_or(prob.bound_y())});
}

inline SolverOptions base_options(const RunConfig& c) {
    SolverOptions o;
    o.epsilon_prime = c.epsilon_prime;
    o.centering = c.centering;
    o.coin_sign = c.coin_sign;
    o.record_every = c.record_every;
    o.record_time = c.timing;
    return o;
}

inline std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : std::string("na"); }

inline RunResult run_synthetic(const RunConfig& c) {
    const SyntheticProblem prob(c.rho, c.radius_x, c.radius_y);
    const FeasibleSet X = prob.x_set();
    const FeasibleSet Y = prob.y_set();
    const Vector x0{c.x0};
    const Vector y0{c.y0};

    SolverOptions opt = base_options(c);
    opt.recorder = [&prob](const Snapshot& s, RunRecord& r) {
        const GapEstimate g = duality_gap(prob, s.x_bar, s.y_bar);
        r.gap = g.value;
        r.gap_exact = g.exact;
        r.dist_to_opt = std::hypot(s.x_bar[0], s.y_bar[0]);
        r.dist_to_opt_last = std::hypot(s.x_last[0], s.y_last[0]);
    };

    SolverOutput out = with_bounds(prob, c, [&](const auto& oracle) -> SolverOutput {
        switch (c.algorithm) {
            case Algorithm::cb_min_max: return cb_min_max(oracle, X, Y, x0, y0, c.T, opt);
            case Algorithm::restart:
                return restart_cb_min_max(oracle, X, Y, x0, y0,
                                          RestartSchedule{c.epsilon0, c.epsilon, c.theta, c.complexity_constant},
                                          opt);
            case Algorithm::pdg: {
                const double ex = c.eta_x.value_or(pdg_default_step(X.diameter(), oracle.bound_x(), c.T));
                const double ey = c.eta_y.value_or(pdg_default_step(Y.diameter(), oracle.bound_y(), c.T));
                return primal_dual_gradient(oracle, X, Y, x0, y0, c.T, ex, ey, DualGeometry::euclidean, opt);
            }
            default: throw ConfigError("algorithm not available for the synthetic experiment");
        }
    });
    const RunRecord& last = out.trace.back();
    std::ostringstream s;
    s << "experiment=synthetic algorithm=" << to_string(c.algorithm) << " iterations=" << last.iteration
      << " final_gap=" << fmt(last.gap) << " final_dist=" << fmt(last.dist_to_opt);
    return {std::move(out), s.str()};
}

inline RunResult run_dro(const RunConfig& c) {
    DroData data = prepare_dro_data(c);
    const DroProblem prob(std::move(data.train), {c.radius, c.lambda, c.rho, c.regularizer_sign});
    const std::optional<Dataset>& test = data.test;
    const FeasibleSet W = prob.w_set();
    const FeasibleSet P = prob.p_set();
    const Vector w0(prob.dimension(), 0.0);
    const Vector p0 = prob.uniform();
    const bool gap_every_row = c.dro_gap == DroGapMode::all;

    SolverOptions opt = base_options(c);
    opt.recorder = [&prob, &test, gap_every_row](const Snapshot& s, RunRecord& r) {
        r.train_loss = hinge_losses(prob.data(), s.x_bar).mean;
        if (test) r.test_loss = hinge_losses(*test, s.x_bar).mean;
        r.robust_objective = robust_objective(prob, s.x_bar);
        if (gap_every_row) {
            const GapEstimate g = duality_gap(prob, s.x_bar, s.y_bar);
            r.gap = g.value;
            r.gap_exact = g.exact;
        }
    };

    SolverOutput out = with_bounds(prob, c, [&](const auto& oracle) -> SolverOutput {
        switch (c.algorithm) {
            case Algorithm::cb_min_max: return cb_min_max(oracle, W, P, w0, p0, c.T, opt);
            case Algorithm::cb_min_max_simplex: return cb_min_max_simplex(oracle, W, w0, p0, c.T, opt);
            case Algorithm::restart:
                return restart_cb_min_max(oracle, W, P, w0, p0,
                                          RestartSchedule{c.epsilon0, c.epsilon, c.theta, c.complexity_constant},
                                          opt);
            case Algorithm::pdg:
            case Algorithm::pdg_entropic: {
                const DroSteps steps = pdg_dro_steps(prob.params().radius, prob.num_samples(), oracle.bound_x(),
                                                     oracle.bound_y(), c.T);
                const bool entropic = c.algorithm == Algorithm::pdg_entropic;
                const double ep = entropic ? steps.eta_p : pdg_default_step(P.diameter(), oracle.bound_y(), c.T);
                return primal_dual_gradient(oracle, W, P, w0, p0, c.T, c.eta_x.value_or(steps.eta_w),
                                            c.eta_y.value_or(ep),
                                            entropic ? DualGeometry::entropic : DualGeometry::euclidean, opt);
            }
        }
        throw ConfigError("unknown algorithm");
    });
    RunRecord& last = out.trace.back();
    if (c.dro_gap == DroGapMode::final) {
        const GapEstimate g = duality_gap(prob, out.x_bar, out.y_bar);
        last.gap = g.value;
        last.gap_exact = g.exact;
    }
    std::ostringstream s;
    s << "experiment=dro algorithm=" << to_string(c.algorithm) << " iterations=" << last.iteration
      << " final_gap=" << fmt(last.gap) << (last.gap && !last.gap_exact ? " (approx)" : "")
      << " train_loss=" << fmt(last.train_loss) << " test_loss=" << fmt(last.test_loss)
      << " robust_objective=" << fmt(last.robust_objective);
    return {std::move(out), s.str()};
}

}  // namespace detail

/// Runs the configured solver. Throws ConfigError, DataError, NumericalError.
inline RunResult execute(const RunConfig& c) {
    return c.experiment == Experiment::synthetic ? detail::run_synthetic(c) : detail::run_dro(c);
}

inline constexpr const char* kCsvHeader =
    "iteration,elapsed_s,gap,gap_exact,dist_to_opt,train_loss,test_loss,robust_objective";

namespace detail {

inline void csv_cells(std::ostream& out, const RunRecord& r) {
    auto cell = [&out](const std::optional<double>& v) {
        out << ',';
        if (v) out << format_double(*v);
    };
    out << r.iteration;
    cell(r.elapsed_seconds);
    cell(r.gap);
    out << ',';
    if (r.gap) out << (r.gap_exact ? '1' : '0');
    cell(r.dist_to_opt);
    cell(r.train_loss);
    cell(r.test_loss);
    cell(r.robust_objective);
}

}  // namespace detail

inline std::string to_csv(const std::vector<RunRecord>& trace) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& r : trace) {
        detail::csv_cells(out, r);
        out << '\n';
    }
    return out.str();
}

/// Writes through a sibling temp file and renames, so readers never see a
/// partial file.
inline void write_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out << text;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw DataError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw DataError("cannot rename to '" + path + "': " + ec.message());
    }
}

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitData = 3, kExitNumerical = 4 };

/// Maps the active exception to an exit code and reports it on `err`.
inline int report_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        err << "numerical error at iteration " << e.iteration() << ": " << e.what() << '\n';
        return kExitNumerical;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

/// `run`: execute, write the CSV, print the summary.
inline int run_command(const ConfigMap& m, std::ostream& out, std::ostream& err) {
    try {
        const RunConfig c = make_config(m);
        RunResult r = execute(c);
        const std::string path = c.output_file();
        write_atomic(path, to_csv(r.output.trace));
        out << r.summary << " output=" << path << '\n';
        return kExitOk;
    } catch (...) {
        return report_exception(err);
    }
}

struct Comparison {
    std::string label_a;
    std::string label_b;
    std::string merged_csv;
    std::string verdict;
};

/// Checks that two configs describe the same problem instance and budget.
inline void require_comparable(const RunConfig& a, const RunConfig& b) {
    auto fail = [](const std::string& what) { throw ConfigError("compare: configs differ in " + what); };
    if (a.experiment != b.experiment) fail("experiment");
    if (a.T != b.T) fail("T");
    if (a.experiment == Experiment::synthetic) {
        if (a.x0 != b.x0 || a.y0 != b.y0) fail("initialization");
        if (a.rho != b.rho || a.radius_x != b.radius_x || a.radius_y != b.radius_y) fail("problem parameters");
    } else {
        if (a.rho != b.rho || a.lambda != b.lambda || a.radius != b.radius || a.regularizer_sign != b.regularizer_sign) {
            fail("problem parameters");
        }
        if (a.train_path != b.train_path || a.test_path != b.test_path || a.seed != b.seed ||
            a.positive_labels != b.positive_labels || a.negative_labels != b.negative_labels ||
            a.test_fraction != b.test_fraction || a.gen_samples != b.gen_samples ||
            a.gen_features != b.gen_features || a.gen_flip != b.gen_flip) {
            fail("data");
        }
    }
}

/// Runs both configs (concurrently) and merges their traces.
inline Comparison compare(const RunConfig& a, const RunConfig& b) {
    require_comparable(a, b);
    auto fa = std::async(std::launch::async, [&a] { return execute(a); });
    RunResult rb = execute(b);
    RunResult ra = fa.get();

    Comparison cmp;
    cmp.label_a = to_string(a.algorithm);
    cmp.label_b = to_string(b.algorithm);
    if (cmp.label_a == cmp.label_b) {
        cmp.label_a += "_a";
        cmp.label_b += "_b";
    }
    std::ostringstream csv;
    csv << "algorithm," << kCsvHeader << '\n';
    for (const auto* side : {&ra, &rb}) {
        const std::string& label = side == &ra ? cmp.label_a : cmp.label_b;
        for (const auto& r : side->output.trace) {
            csv << label << ',';
            detail::csv_cells(csv, r);
            csv << '\n';
        }
    }
    cmp.merged_csv = csv.str();

    const RunRecord& la = ra.output.trace.back();
    const RunRecord& lb = rb.output.trace.back();
    const bool synthetic = a.experiment == Experiment::synthetic;
    const char* metric = synthetic ? "dist" : "train_loss";
    const double va = synthetic ? *la.dist_to_opt : *la.train_loss;
    const double vb = synthetic ? *lb.dist_to_opt : *lb.train_loss;
    if (va == vb) {
        cmp.verdict = "tie";
    } else {
        cmp.verdict = (va < vb ? to_string(a.algorithm) : to_string(b.algorithm));
        cmp.verdict += std::string(" lower final ") + metric;
    }
    return cmp;
}

/// `compare`: run both sides, write the merged CSV, print the verdict.
inline int compare_command(const ConfigMap& a, const ConfigMap& b, std::ostream& out, std::ostream& err) {
    try {
        const RunConfig ca = make_config(a);
        const RunConfig cb = make_config(b);
        const Comparison cmp = compare(ca, cb);
        RunConfig sink = ca;
        if (sink.output.empty()) sink.output = "compare.csv";
        const std::string path = sink.output_file();
        write_atomic(path, cmp.merged_csv);
        out << cmp.verdict << " output=" << path << '\n';
        return kExitOk;
    } catch (...) {
        return report_exception(err);
    }
}

}  // namespace cbmm
