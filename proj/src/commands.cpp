#include "mabm/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mabm/csv.hpp"
#include "mabm/stats.hpp"

namespace mabm {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kHistogramBins = 50;
constexpr double kLowerBand = 0.25;
constexpr double kUpperBand = 0.75;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string optional_text(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

/// Runs fn(0..count-1) on up to `jobs` threads; rethrows the first failure.
template <class Fn>
void run_cells(std::size_t count, int jobs, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct ChainResult {
    PassageStats passage;
    double mean_x = 0.0;
};

/// Herding chain from n_c = 0 with an optional thinned trajectory.
ChainResult run_herding(const HerdingParams& params, std::int64_t steps, std::uint64_t seed,
                        std::int64_t every, std::ostream* trajectory) {
    Random rng(derive_seed(seed, 0));
    HerdingChain chain(params, HerdingState{});
    SwitchDetector detector(kLowerBand, kUpperBand);
    const double n = params.n_agents();
    double sum_x = 0.0;
    if (trajectory) *trajectory << "t,n_c,x\n" << "0,0,0\n";
    detector.observe(0.0);
    chain.run(steps, rng, [&](const HerdingState& s) {
        const double x = s.n_c / n;
        detector.observe(x);
        sum_x += x;
        if (trajectory && s.t % every == 0) *trajectory << s.t << ',' << s.n_c << ',' << format_double(x) << '\n';
    });
    ChainResult r;
    r.passage = detector.stats();
    if (params.delta() == 0.0 && params.k1() == params.k2() && params.epsilon() > 0.0 &&
        params.epsilon() < 1.0 && params.beta() > 0.0)
        r.passage.t0_analytic = mean_first_passage_time(params);
    r.mean_x = steps > 0 ? sum_x / static_cast<double>(steps) : 0.0;
    return r;
}

void write_passage(std::ostream& out, const ChainResult& r) {
    out << "key,value\n"
        << "lower_band," << format_double(kLowerBand) << '\n'
        << "upper_band," << format_double(kUpperBand) << '\n'
        << "n_switches," << r.passage.n_switches << '\n'
        << "t0_analytic," << optional_text(r.passage.t0_analytic) << '\n'
        << "t0_empirical," << optional_text(r.passage.t0_empirical) << '\n'
        << "t0_stderr," << optional_text(r.passage.t0_stderr) << '\n'
        << "t1," << optional_text(r.passage.t1) << '\n'
        << "t2," << optional_text(r.passage.t2) << '\n'
        << "mean_x," << format_double(r.mean_x) << '\n';
}

std::vector<std::string> cmd_herding(const RunManifest& m, const Config& c, std::int64_t steps) {
    const fs::path traj = fs::path(m.out_dir) / "herding.csv";
    const fs::path summary = fs::path(m.out_dir) / "herding_summary.csv";
    auto out = open_output(traj);
    out << artifact_header(m, c);
    const ChainResult r = run_herding(c.herding, steps, m.seed, m.every, &out);
    close_output(out, traj);
    auto sout = open_output(summary);
    sout << artifact_header(m, c);
    write_passage(sout, r);
    close_output(sout, summary);
    return {traj.string(), summary.string()};
}

void write_curve_file(const fs::path& path, const std::string& header, const DensityCurve& curve,
                      std::vector<std::string>& written) {
    auto out = open_output(path);
    out << header;
    write_csv(out, curve);
    close_output(out, path);
    written.push_back(path.string());
}

std::vector<std::string> cmd_stationary(const RunManifest& m, const Config& c, std::int64_t steps) {
    std::vector<std::string> written;
    const std::string header = artifact_header(m, c);
    const auto& h = c.herding;
    const DensityCurve numeric = stationary_numeric(h);
    write_curve_file(fs::path(m.out_dir) / "stationary_numeric.csv", header, numeric, written);
    std::optional<DensityCurve> symmetric;
    if (h.k1() == h.k2() && h.k1() > 0.0) {
        symmetric = stationary_symmetric(h.epsilon());
        write_curve_file(fs::path(m.out_dir) / "stationary_symmetric.csv", header, *symmetric, written);
    }
    std::optional<DensityCurve> approx;
    if (h.r()) {
        approx = stationary_approx(h);
        write_curve_file(fs::path(m.out_dir) / "stationary_approx.csv", header, *approx, written);
    }

    Random rng(derive_seed(m.seed, 0));
    HerdingChain chain(h, HerdingState{h.n_agents() / 2, 0});
    OccupancyHistogram hist(h.n_agents());
    chain.run(steps, rng, [&](const HerdingState& s) { hist.add(s.n_c); });
    const auto masses = hist.bin_masses(kHistogramBins);
    const fs::path hpath = fs::path(m.out_dir) / "stationary_histogram.csv";
    auto hout = open_output(hpath);
    hout << header << "x,density\n";
    for (std::size_t b = 0; b < masses.size(); ++b)
        hout << format_double((b + 0.5) / kHistogramBins) << ','
             << format_double(masses[b] * kHistogramBins) << '\n';
    close_output(hout, hpath);
    written.push_back(hpath.string());

    const fs::path spath = fs::path(m.out_dir) / "stationary_summary.csv";
    auto sout = open_output(spath);
    sout << header << "key,value\n";
    if (h.k1() == h.k2() && h.k1() > 0.0)
        sout << "modality," << to_string(stationary_modality(h.epsilon())) << '\n';
    sout << "numeric_modality," << to_string(classify_modality(numeric)) << '\n'
         << "numeric_mean_x," << format_double(numeric.mean()) << '\n'
         << "histogram_mean_x," << format_double(hist.mean_fraction()) << '\n'
         << "l1_histogram_numeric," << format_double(l1_distance(masses, numeric.bin_masses(kHistogramBins)))
         << '\n';
    if (symmetric) {
        sout << "l1_histogram_symmetric,"
             << format_double(l1_distance(masses, symmetric->bin_masses(kHistogramBins))) << '\n'
             << "l1_numeric_symmetric," << format_double(l1_distance(numeric, *symmetric)) << '\n';
    }
    if (approx) sout << "l1_approx_numeric," << format_double(l1_distance(*approx, numeric)) << '\n';
    close_output(sout, spath);
    written.push_back(spath.string());
    return written;
}

std::vector<std::string> cmd_simulate(const RunManifest& m, const Config& c, std::int64_t steps) {
    const SimulationOutput output = run(c.market, steps, m.seed);
    const fs::path path = fs::path(m.out_dir) / "simulate.csv";
    auto out = open_output(path);
    out << artifact_header(m, c);
    write_csv(out, output);
    close_output(out, path);
    return {path.string()};
}

std::vector<std::string> cmd_soi(const RunManifest& m, const Config& c, std::int64_t steps) {
    std::vector<int> n0s = m.n0_values;
    if (n0s.empty()) n0s = {5000, 3000, 500, 100, 50};
    std::vector<SimulationOutput> outputs(n0s.size());
    std::vector<std::string> written(n0s.size());
    run_cells(n0s.size(), m.jobs, [&](std::size_t i) {
        SoiConfig soi = c.soi;
        soi.n0 = n0s[i];
        soi.n_pool = std::max(soi.n_pool, soi.n0);
        outputs[i] = run_soi(c.market, soi, steps, m.seed);
        const fs::path path = fs::path(m.out_dir) / ("soi_n0_" + std::to_string(n0s[i]) + ".csv");
        auto out = open_output(path);
        out << artifact_header(m, c, "n0 = " + std::to_string(n0s[i]));
        write_csv(out, outputs[i]);
        close_output(out, path);
        written[i] = path.string();
    });

    // Common band centre: geometric mean over runs of the late-time mean N.
    double log_sum = 0.0;
    for (const auto& o : outputs) {
        const std::size_t from = o.n_series.size() * 4 / 5;
        double s = 0.0;
        for (std::size_t t = from; t < o.n_series.size(); ++t) s += o.n_series[t];
        log_sum += std::log(s / static_cast<double>(o.n_series.size() - from));
    }
    const double n_star = std::exp(log_sum / static_cast<double>(outputs.size()));
    std::vector<ConvergenceSummary> rows;
    for (std::size_t i = 0; i < outputs.size(); ++i)
        rows.push_back(summarize_convergence(outputs[i], n0s[i], n_star));
    const fs::path path = fs::path(m.out_dir) / "soi_convergence.csv";
    auto out = open_output(path);
    out << artifact_header(m, c, "n_star = " + format_double(n_star));
    write_convergence_csv(out, rows);
    close_output(out, path);
    written.push_back(path.string());
    return written;
}

std::vector<double> load_returns(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input '" + path + "'");
    const CsvTable table = read_csv(in);
    for (const auto& col : table.columns)
        if (col == "return") return table.numeric_column("return");
    const auto prices = table.numeric_column("price");
    std::vector<double> returns;
    for (std::size_t i = 1; i < prices.size(); ++i) returns.push_back(prices[i] - prices[i - 1]);
    return returns;
}

std::vector<std::string> cmd_stats(const RunManifest& m, const Config& c) {
    if (m.input_path.empty()) throw std::invalid_argument("stats: --input is required");
    const auto returns = load_returns(m.input_path);
    const StatsReport report = analyze(returns, m.max_lag);
    const std::string header = artifact_header(m, c, "input = " + m.input_path);
    std::vector<std::string> written;
    const auto emit = [&](const std::string& name, auto&& body) {
        const fs::path path = fs::path(m.out_dir) / name;
        auto out = open_output(path);
        out << header;
        body(out);
        close_output(out, path);
        written.push_back(path.string());
    };
    emit("stats_report.csv", [&](std::ostream& o) { write_report_csv(o, report); });
    emit("acf_returns.csv", [&](std::ostream& o) { write_acf_csv(o, report.acf_returns); });
    emit("acf_squared.csv", [&](std::ostream& o) { write_acf_csv(o, report.acf_squared); });
    return written;
}

std::string file_token(const std::string& value) {
    std::string out;
    for (char ch : value) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') ? ch : '_';
    return out;
}

std::vector<std::string> cmd_sweep(const RunManifest& m, const ConfigDocument& base, std::int64_t steps) {
    if (m.param.empty()) throw std::invalid_argument("sweep: --param is required");
    if (m.values.empty()) throw std::invalid_argument("sweep: --values is required");
    if (m.replicates < 1) throw std::invalid_argument("sweep: --replicates >= 1 required");
    if (m.sweep_mode != "herding" && m.sweep_mode != "simulate")
        throw std::invalid_argument("sweep: --mode must be herding or simulate");
    const auto& keys = valid_keys();
    if (std::find(keys.begin(), keys.end(), m.param) == keys.end())
        throw std::invalid_argument("sweep: unknown parameter '" + m.param + "'");

    // Resolve every cell up front so a bad value fails before any work.
    std::vector<Config> configs;
    for (const auto& v : m.values) {
        ConfigDocument doc = base;
        doc[m.param] = v;
        configs.push_back(resolve(doc));
    }
    const auto reps = static_cast<std::size_t>(m.replicates);
    const std::size_t cells = configs.size() * reps;
    std::vector<std::string> rows(cells);
    std::vector<std::string> written(cells);
    run_cells(cells, m.jobs, [&](std::size_t cell) {
        const std::size_t vi = cell / reps;
        const std::size_t rep = cell % reps;
        const Config& c = configs[vi];
        RunManifest cell_manifest = m;
        cell_manifest.seed = derive_seed(m.seed, cell);
        const fs::path path = fs::path(m.out_dir) / ("sweep_" + file_token(m.param) + "_" +
                                                     file_token(m.values[vi]) + "_r" +
                                                     std::to_string(rep) + ".csv");
        auto out = open_output(path);
        out << artifact_header(cell_manifest, c,
                               "sweep " + m.param + " = " + m.values[vi] + ", replicate " + std::to_string(rep) +
                                   ", master seed " + std::to_string(m.seed));
        std::ostringstream row;
        row << m.param << ',' << m.values[vi] << ',' << rep << ',' << cell_manifest.seed << ',';
        if (m.sweep_mode == "herding") {
            const ChainResult r = run_herding(c.herding, steps, cell_manifest.seed, m.every, &out);
            row << r.passage.n_switches << ',' << optional_text(r.passage.t0_empirical) << ','
                << optional_text(r.passage.t1) << ',' << optional_text(r.passage.t2) << ','
                << format_double(r.mean_x);
        } else {
            const SimulationOutput o = run(c.market, steps, cell_manifest.seed);
            write_csv(out, o);
            double mean_x = 0.0;
            for (double x : o.x_series) mean_x += x;
            mean_x /= static_cast<double>(o.x_series.size());
            const auto ra = acf(o.returns, 1);
            const auto rs = volatility_acf(o.returns, 1);
            row << format_double(excess_kurtosis(o.returns)) << ',' << format_double(ra[0]) << ','
                << format_double(rs[0]) << ',' << format_double(mean_x);
        }
        close_output(out, path);
        rows[cell] = row.str();
        written[cell] = path.string();
    });

    const fs::path path = fs::path(m.out_dir) / "sweep_summary.csv";
    auto out = open_output(path);
    out << artifact_header(m, resolve(base), "sweep " + m.param + ", mode " + m.sweep_mode);
    if (m.sweep_mode == "herding")
        out << "param,value,replicate,seed,n_switches,t0_empirical,t1,t2,mean_x\n";
    else
        out << "param,value,replicate,seed,excess_kurtosis,acf_returns_1,acf_squared_1,mean_x\n";
    for (const auto& r : rows) out << r << '\n';
    close_output(out, path);
    written.push_back(path.string());
    return written;
}

}  // namespace

std::string_view to_string(Subcommand s) {
    switch (s) {
        case Subcommand::Herding: return "herding";
        case Subcommand::Stationary: return "stationary";
        case Subcommand::Simulate: return "simulate";
        case Subcommand::Soi: return "soi";
        case Subcommand::Stats: return "stats";
        case Subcommand::Sweep: return "sweep";
    }
    return "unknown";
}

std::int64_t default_steps(Subcommand s) {
    switch (s) {
        case Subcommand::Stationary: return 10'000'000;
        case Subcommand::Soi: return 2'000'000;
        default: return 1'000'000;
    }
}

std::string artifact_header(const RunManifest& manifest, const Config& config, std::string_view extra) {
    std::ostringstream h;
    h << "mabm " << kToolVersion << '\n'
      << "subcommand = " << to_string(manifest.subcommand) << '\n'
      << "seed = " << manifest.seed << '\n'
      << "steps = " << manifest.steps.value_or(default_steps(manifest.subcommand)) << '\n';
    if (!extra.empty()) h << extra << '\n';
    h << describe(config);
    std::ostringstream out;
    write_comment_header(out, h.str());
    return out.str();
}

ConfigDocument load_document(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_document(text.str());
}

std::vector<std::string> run_subcommand(const RunManifest& m) {
    if (m.every < 1) throw std::invalid_argument("--every >= 1 required");
    const std::int64_t steps = m.steps.value_or(default_steps(m.subcommand));
    if (steps < 0) throw std::invalid_argument("--steps >= 0 required");
    const ConfigDocument doc = load_document(m.config_path);
    fs::create_directories(m.out_dir);
    if (m.subcommand == Subcommand::Sweep) return cmd_sweep(m, doc, steps);
    const Config c = resolve(doc);
    switch (m.subcommand) {
        case Subcommand::Herding: return cmd_herding(m, c, steps);
        case Subcommand::Stationary: return cmd_stationary(m, c, steps);
        case Subcommand::Simulate: return cmd_simulate(m, c, steps);
        case Subcommand::Soi: return cmd_soi(m, c, steps);
        case Subcommand::Stats: return cmd_stats(m, c);
        case Subcommand::Sweep: break;
    }
    throw std::logic_error("unhandled subcommand");
}

}  // namespace mabm
