#include <xtproc/cli.hpp>
#include <xtproc/dependence.hpp>
#include <xtproc/io.hpp>
#include <xtproc/mda_harness.hpp>
#include <xtproc/spectral_sim.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace xtproc {
namespace cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> commands = {"simulate", "simulate-mv", "exponent", "extremal-coeff",
                                           "cdf", "m-alpha", "mda-check"};

bool is_simulation(const std::string& c)
{
    return c == "simulate" || c == "simulate-mv" || c == "mda-check";
}

std::string env_name(const std::string& flag)
{
    std::string out = env_prefix;
    for (char ch : flag) out += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

[[noreturn]] void usage(const std::string& msg)
{
    throw Error(ErrorCode::UsageError, msg);
}

std::vector<std::string> json_to_tokens(const json& v)
{
    std::vector<std::string> out;
    if (v.is_array()) {
        for (const auto& e : v) {
            auto sub = json_to_tokens(e);
            out.insert(out.end(), sub.begin(), sub.end());
        }
    } else if (v.is_string()) {
        out.push_back(v.get<std::string>());
    } else if (v.is_number_unsigned()) {
        out.push_back(std::to_string(v.get<std::uint64_t>()));
    } else if (v.is_number_integer()) {
        out.push_back(std::to_string(v.get<std::int64_t>()));
    } else if (v.is_number()) {
        out.push_back(io::format_double(v.get<double>()));
    } else {
        usage("unsupported config value " + v.dump());
    }
    return out;
}

// Splices values from a JSON config file into the argument list, skipping
// keys already given as flags or through the environment.
std::vector<std::string> merge_config_file(std::vector<std::string> args)
{
    std::string config_path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) usage("--config needs a path");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (config_path.empty()) return kept;

    std::ifstream in(config_path);
    if (!in) usage("cannot open config file '" + config_path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        usage("config file is not valid JSON: " + std::string(e.what()));
    }
    if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];
    if (!doc.is_object()) usage("config file must hold a JSON object");

    std::set<std::string> given;
    bool has_command = false;
    for (std::size_t i = 1; i < kept.size(); ++i) {
        const auto& a = kept[i];
        if (std::find(commands.begin(), commands.end(), a) != commands.end()) has_command = true;
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    }

    std::vector<std::string> merged{kept.empty() ? std::string("xtproc") : kept.front()};
    if (!has_command) {
        if (!doc.contains("command") || !doc["command"].is_string()) usage("no command given on the command line or in the config file");
        merged.push_back(doc["command"].get<std::string>());
    } else {
        // keep the user's subcommand position
    }
    std::vector<std::string> from_file;
    for (const auto& [key, value] : doc.items()) {
        if (key == "command") continue;
        if (given.count(key) || std::getenv(env_name(key).c_str())) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) from_file.push_back("--" + key);
            continue;
        }
        if (value.is_null()) continue;
        from_file.push_back("--" + key);
        for (auto& tok : json_to_tokens(value)) from_file.push_back(tok);
    }
    if (has_command) {
        // command-line arguments first, so the subcommand precedes file options
        merged.insert(merged.end(), kept.begin() + 1, kept.end());
        merged.insert(merged.end(), from_file.begin(), from_file.end());
    } else {
        merged.insert(merged.end(), from_file.begin(), from_file.end());
        merged.insert(merged.end(), kept.begin() + 1, kept.end());
    }
    return merged;
}

std::vector<VectorXd> parse_grid(const std::string& text, Eigen::Index d)
{
    std::vector<VectorXd> grid;
    std::stringstream ss(text);
    std::string point;
    while (std::getline(ss, point, ';')) {
        const auto fields = io::split_csv_line(point);
        if (static_cast<Eigen::Index>(fields.size()) != d) {
            usage("grid point '" + point + "' has " + std::to_string(fields.size()) + " coordinates, expected " + std::to_string(d));
        }
        VectorXd z(d);
        for (Eigen::Index j = 0; j < d; ++j) z[j] = io::parse_double(fields[static_cast<std::size_t>(j)]);
        if (!(z.array() > 0.0).all()) usage("grid points must be strictly positive");
        grid.push_back(z);
    }
    if (grid.empty()) usage("--grid is empty");
    return grid;
}

void validate(RunConfig& c, const std::set<std::string>& given)
{
    const auto& cmd = c.command;
    auto need = [&](bool present, const std::string& flag) {
        if (!present) usage(cmd + " requires --" + flag);
    };
    auto positive = [&](const std::optional<double>& v, const std::string& flag) {
        if (v && !(*v > 0.0 && std::isfinite(*v))) usage("--" + flag + " must be positive and finite");
    };

    need(c.alpha.has_value(), cmd == "mda-check" ? "nu" : "alpha");
    positive(c.alpha, "alpha");
    positive(c.spectral_nu, "spectral-nu");

    if (is_simulation(cmd)) need(c.seed.has_value(), "seed");
    if (cmd == "m-alpha" && c.m_alpha_method == "mc") need(c.seed.has_value(), "seed");
    if (c.m_alpha_method != "analytic" && c.m_alpha_method != "mc") usage("--m-alpha-method must be analytic or mc");
    if (c.m_alpha_method == "mc" && c.m_alpha_samples < 10000) usage("--m-alpha-samples must be >= 10000");

    if (cmd == "simulate-mv") {
        need(c.spectral_nu.has_value(), "spectral-nu");
    }
    if (c.spectral_nu && (cmd == "simulate-mv" || cmd == "m-alpha") && !(*c.alpha < *c.spectral_nu)) {
        throw Error(ErrorCode::InfiniteMoment,
                    "alpha=" + io::format_double(*c.alpha) + " must be below spectral-nu=" +
                        io::format_double(*c.spectral_nu) + " for a finite m_alpha");
    }

    if (cmd != "m-alpha") {
        const int routes = (!c.matrix.empty()) + c.rho.has_value() + (!c.corr.empty());
        if (routes != 1) usage(cmd + " needs exactly one of --matrix, --rho, or --corr with --sites");
        if (c.rho && !(std::abs(*c.rho) < 1.0)) usage("--rho must lie strictly inside (-1, 1)");
        if (!c.corr.empty()) {
            try {
                parse_correlation_family(c.corr);
            } catch (const Error& e) {
                usage(e.what());
            }
            need(!c.sites.empty(), "sites");
            need(c.range.has_value(), "range");
            positive(c.range, "range");
            if (parse_correlation_family(c.corr) == CorrelationFamily::powered_exponential) {
                need(c.power.has_value(), "power");
                if (!(*c.power > 0.0 && *c.power <= 2.0)) usage("--power must lie in (0, 2]");
            }
        }
    }

    if (!given.count("truncation-c")) {
        c.spectral.truncation_c = cmd == "simulate-mv" ? default_truncation_student_t : default_truncation_gaussian;
    }
    if (!given.count("replicates")) c.spectral.replicates = cmd == "mda-check" ? 5000 : 1000;
    try {
        c.spectral.validate();
        c.qmc.validate();
    } catch (const Error& e) {
        usage(e.what());
    }
    if (c.seed) c.spectral.seed = *c.seed;

    if (cmd == "exponent" || cmd == "cdf") {
        need(!c.z.empty(), "z");
        for (double v : c.z) {
            if (!(v >= 0.0) || std::isnan(v)) usage("--z entries must be non-negative");
        }
    }
    if (cmd == "mda-check") {
        if (c.block_size < 1) usage("--block-size must be >= 1");
        if (!(c.bias_allowance >= 0.0)) usage("--bias-allowance must be non-negative");
        if (c.sampler != "variance-mixture" && c.sampler != "radial") usage("--sampler must be variance-mixture or radial");
        if (c.norming != "asymptotic" && c.norming != "exact") usage("--norming must be asymptotic or exact");
        for (auto n : c.sweep) if (n < 1) usage("--sweep block sizes must be >= 1");
    }
    if (cmd == "simulate" || cmd == "simulate-mv") need(!c.out_dir.empty(), "out-dir");
    if (c.prefix.empty()) c.prefix = cmd;
    if (c.prefix.find('/') != std::string::npos || c.prefix.find('\\') != std::string::npos || c.prefix == "." || c.prefix == "..") {
        usage("--prefix must be a plain file name");
    }
}

struct ResolvedCorrelation
{
    MatrixXd corr;
    std::vector<std::string> ids;
};

ResolvedCorrelation resolve_correlation(const RunConfig& c)
{
    ResolvedCorrelation out;
    if (c.rho) {
        out.corr = MatrixXd::Identity(2, 2);
        out.corr(0, 1) = out.corr(1, 0) = *c.rho;
        return out;
    }
    if (!c.matrix.empty()) {
        CorrelationSpec spec(io::read_matrix_csv(fs::path(c.matrix)));
        if (!c.sites.empty()) {
            auto sites = io::read_sites_csv(fs::path(c.sites));
            out.corr = build_correlation_matrix(spec, sites.sites);
            out.ids = std::move(sites.ids);
        } else {
            out.corr = spec.matrix();
        }
        return out;
    }
    auto sites = io::read_sites_csv(fs::path(c.sites));
    const ParametricCorrelation rho(parse_correlation_family(c.corr), *c.range, c.power.value_or(1.0));
    out.corr = build_correlation_matrix(CorrelationSpec(rho), sites.sites);
    out.ids = std::move(sites.ids);
    return out;
}

fs::path output_path(const RunConfig& c, const std::string& extension)
{
    return fs::path(c.out_dir) / (c.prefix + extension);
}

void ensure_out_dir(const RunConfig& c)
{
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + c.out_dir + "': " + ec.message());
}

void write_json_file(const fs::path& path, const json& doc)
{
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    f << doc.dump(2) << '\n';
}

json metadata(const RunConfig& c, double wall_seconds)
{
    json meta;
    meta["config"] = c.to_json();
    meta["version"] = version;
    meta["generator"] = std::string(RandomStream::generator_name);
    if (c.seed) meta["seed"] = *c.seed;
    meta["wall_time_seconds"] = wall_seconds;
    return meta;
}

QmcSettings qmc_for(const RunConfig& c) { return c.qmc; }

std::string plus_minus(double value, double err)
{
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(6) << value << " ± " << err;
    return ss.str();
}

int run_simulate(const RunConfig& c, std::ostream& out, double& m_alpha_used, json& extra)
{
    const auto resolved = resolve_correlation(c);
    const auto chol = numerics::cholesky_with_jitter(resolved.corr);
    const TailIndex alpha(*c.alpha);
    std::vector<FieldReplicate<double>> reps;
    if (c.command == "simulate") {
        m_alpha_used = numerics::m_alpha_gaussian(alpha);
        extra["m_alpha"] = {{"value", m_alpha_used}, {"std_error", 0.0}, {"method", "analytic"}};
        extra["spectral"] = "gaussian";
        reps = simulate_replicates(c.spectral, c.threads, [&](RandomStream& s) {
            return simulate_extremal_t_field(alpha, chol, c.spectral, s);
        });
    } else {
        MAlphaEstimate m;
        if (c.m_alpha_method == "analytic") {
            m = MAlphaEstimate::analytic(numerics::m_alpha_student_t(alpha, *c.spectral_nu));
        } else {
            RandomStream s(*c.seed, std::uint64_t{1} << 63);
            m = estimate_m_alpha_mc(alpha, *c.spectral_nu, c.m_alpha_samples, s);
        }
        m_alpha_used = m.value;
        extra["m_alpha"] = {{"value", m.value}, {"std_error", m.std_error}, {"method", to_string(m.method)}};
        extra["spectral"] = "elliptical_t";
        reps = simulate_replicates(c.spectral, c.threads, [&](RandomStream& s) {
            return simulate_extremal_t_mv(alpha, *c.spectral_nu, chol, m, c.spectral, s);
        });
    }
    std::uint64_t truncated = 0;
    for (const auto& r : reps) truncated += r.truncation_triggered;
    extra["truncated_replicates"] = truncated;
    extra["sites"] = resolved.corr.rows();
    if (!resolved.ids.empty()) extra["site_ids"] = resolved.ids;

    ensure_out_dir(c);
    const auto csv = output_path(c, ".csv");
    std::ofstream f(csv);
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + csv.string() + "'");
    io::write_replicates_csv(f, reps);
    extra["outputs"] = {csv.string()};
    out << "wrote " << reps.size() << " replicates x " << resolved.corr.rows() << " sites to " << csv.string()
        << " (" << truncated << " truncated)\n";
    return exit_ok;
}

} // namespace

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json j;
    j["command"] = command;
    if (alpha) j["alpha"] = *alpha;
    if (spectral_nu) j["spectral-nu"] = *spectral_nu;
    if (!corr.empty()) j["corr"] = corr;
    if (range) j["range"] = *range;
    if (power) j["power"] = *power;
    if (!sites.empty()) j["sites"] = sites;
    if (!matrix.empty()) j["matrix"] = matrix;
    if (rho) j["rho"] = *rho;
    j["truncation-c"] = spectral.truncation_c;
    j["max-points"] = spectral.max_points;
    j["replicates"] = spectral.replicates;
    if (seed) j["seed"] = *seed;
    j["threads"] = threads;
    j["qmc-points"] = qmc.lattice_points;
    j["qmc-randomizations"] = qmc.randomizations;
    j["qmc-target-error"] = qmc.target_error;
    j["qmc-max-points"] = qmc.max_lattice_points;
    j["qmc-seed"] = qmc.seed;
    if (!z.empty()) j["z"] = z;
    if (!grid.empty()) j["grid"] = grid;
    j["m-alpha-method"] = m_alpha_method;
    j["m-alpha-samples"] = m_alpha_samples;
    j["block-size"] = block_size;
    j["bias-allowance"] = bias_allowance;
    if (!sweep.empty()) j["sweep"] = sweep;
    j["sampler"] = sampler;
    j["norming"] = norming;
    if (!out_dir.empty()) j["out-dir"] = out_dir;
    j["prefix"] = prefix;
    if (json) j["json"] = true;
    return j;
}

ParseResult parse_config(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    ParseResult result;
    RunConfig c;
    CLI::App app{"Simulation and dependence evaluation for extremal t max-stable processes", "xtproc"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1, 1);

    std::uint64_t replicates = 1000;
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    auto reg = [&](CLI::Option* o, const std::string& name) {
        o->envname(env_name(name));
        opts.emplace_back(name, o);
        return o;
    };
    reg(app.add_option("--alpha,--nu", c.alpha, "tail index alpha (= general degrees of freedom nu)"), "alpha");
    reg(app.add_option("--spectral-nu", c.spectral_nu, "degrees of freedom of elliptical t spectral vectors"), "spectral-nu");
    reg(app.add_option("--corr", c.corr, "correlation family: exponential, gaussian, powered_exponential"), "corr");
    reg(app.add_option("--range", c.range, "correlation range r > 0"), "range");
    reg(app.add_option("--power", c.power, "powered exponential power in (0, 2]"), "power");
    reg(app.add_option("--sites", c.sites, "sites CSV with header id,x1,...,xp"), "sites");
    reg(app.add_option("--matrix", c.matrix, "explicit correlation matrix CSV (no header)"), "matrix");
    reg(app.add_option("--rho", c.rho, "bivariate correlation (d = 2 shortcut)"), "rho");
    reg(app.add_option("--truncation-c", c.spectral.truncation_c, "effective bound on the spectral vectors"), "truncation-c");
    reg(app.add_option("--max-points", c.spectral.max_points, "cap on Poisson points per replicate"), "max-points");
    reg(app.add_option("--replicates", replicates, "number of replicates or blocks"), "replicates");
    reg(app.add_option("--seed", c.seed, "64-bit seed (mandatory for simulation commands)"), "seed");
    reg(app.add_option("--threads", c.threads, "worker threads (0 = all cores)"), "threads");
    reg(app.add_option("--qmc-points", c.qmc.lattice_points, "initial QMC points per randomization"), "qmc-points");
    reg(app.add_option("--qmc-randomizations", c.qmc.randomizations, "independent QMC randomizations"), "qmc-randomizations");
    reg(app.add_option("--qmc-target-error", c.qmc.target_error, "target 3-sigma QMC error"), "qmc-target-error");
    reg(app.add_option("--qmc-max-points", c.qmc.max_lattice_points, "QMC point budget per randomization"), "qmc-max-points");
    reg(app.add_option("--qmc-seed", c.qmc.seed, "seed for the QMC random shifts"), "qmc-seed");
    reg(app.add_option("--z", c.z, "evaluation point, comma or space separated")->delimiter(',')->expected(1, -1), "z");
    reg(app.add_option("--grid", c.grid, "MDA grid points 'z1,z2;z1,z2;...'"), "grid");
    reg(app.add_option("--m-alpha-method", c.m_alpha_method, "analytic or mc"), "m-alpha-method");
    reg(app.add_option("--m-alpha-samples", c.m_alpha_samples, "Monte Carlo draws for m_alpha"), "m-alpha-samples");
    reg(app.add_option("--block-size", c.block_size, "MDA block size n"), "block-size");
    reg(app.add_option("--bias-allowance", c.bias_allowance, "absolute allowance for pre-asymptotic bias"), "bias-allowance");
    reg(app.add_option("--sweep", c.sweep, "block sizes for the bias-trend diagnostic")->delimiter(',')->expected(1, -1), "sweep");
    reg(app.add_option("--sampler", c.sampler, "t draws: variance-mixture or radial"), "sampler");
    reg(app.add_option("--norming", c.norming, "a_n: asymptotic or exact"), "norming");
    reg(app.add_option("--out-dir", c.out_dir, "directory receiving all output files"), "out-dir");
    reg(app.add_option("--prefix", c.prefix, "output file name stem (default: command name)"), "prefix");
    reg(app.add_flag("--json", c.json, "print the result object as JSON"), "json");

    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
    }
    app.add_option("--config", "JSON config file; flags override its values");

    try {
        const auto args = merge_config_file(raw_args);
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            result.exit_code = app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
            return result;
        }
        for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
        std::set<std::string> given;
        for (const auto& [name, o] : opts) {
            if (o->count() > 0) given.insert(name);
        }
        c.spectral.replicates = replicates;
        validate(c, given);
    } catch (const Error& e) {
        err << "xtproc: error[" << to_string(e.code()) << "]: " << e.what() << '\n';
        result.exit_code = exit_usage;
        return result;
    }
    result.config = std::move(c);
    return result;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    try {
        json extra;
        int status = exit_ok;
        const TailIndex alpha(*c.alpha);

        if (c.command == "simulate" || c.command == "simulate-mv") {
            double m_alpha_used = 0.0;
            status = run_simulate(c, out, m_alpha_used, extra);
        } else if (c.command == "exponent" || c.command == "cdf" || c.command == "extremal-coeff") {
            const auto resolved = resolve_correlation(c);
            json res;
            if (c.command == "cdf") {
                const VectorXd z = Eigen::Map<const VectorXd>(c.z.data(), static_cast<Eigen::Index>(c.z.size()));
                const auto p = extremal_t_cdf(z, alpha, resolved.corr, qmc_for(c));
                res = {{"value", p.value}, {"error_estimate", p.error_estimate}, {"points_used", p.points_used},
                       {"budget_exceeded", p.budget_exceeded}};
            } else {
                const VectorXd z = c.command == "extremal-coeff"
                    ? VectorXd::Ones(resolved.corr.rows())
                    : VectorXd(Eigen::Map<const VectorXd>(c.z.data(), static_cast<Eigen::Index>(c.z.size())));
                const auto m = exponent_function(z, alpha, resolved.corr, qmc_for(c));
                res = {{"value", m.is_infinite() ? json("inf") : json(m.value)}, {"error_estimate", m.error_estimate},
                       {"points_used", m.points_used}, {"budget_exceeded", m.budget_exceeded}};
                if (c.command == "extremal-coeff" && resolved.corr.rows() == 2) {
                    res["closed_form"] = bivariate_extremal_coefficient_closed(alpha, resolved.corr(0, 1));
                }
            }
            res["inputs"] = c.to_json();
            if (c.json) {
                out << res.dump(2) << '\n';
            } else {
                const double v = res["value"].is_string() ? std::numeric_limits<double>::infinity() : res["value"].get<double>();
                out << plus_minus(v, res["error_estimate"].get<double>());
                if (res.contains("closed_form")) {
                    out << " (closed form " << std::fixed << std::setprecision(6) << res["closed_form"].get<double>() << ")";
                }
                if (res["budget_exceeded"].get<bool>()) out << " [QMC budget exceeded]";
                out << '\n';
            }
            if (res["budget_exceeded"].get<bool>()) {
                err << "xtproc: warning[QmcBudgetExceeded]: target error not reached within the point budget\n";
            }
            if (!c.out_dir.empty()) {
                ensure_out_dir(c);
                write_json_file(output_path(c, ".result.json"), res);
                extra["outputs"] = {output_path(c, ".result.json").string()};
            }
        } else if (c.command == "m-alpha") {
            MAlphaEstimate m;
            std::string family = "gaussian";
            if (c.spectral_nu) {
                family = "student_t";
                if (c.m_alpha_method == "analytic") {
                    m = MAlphaEstimate::analytic(numerics::m_alpha_student_t(alpha, *c.spectral_nu));
                } else {
                    RandomStream s(*c.seed, 0);
                    m = estimate_m_alpha_mc(alpha, *c.spectral_nu, c.m_alpha_samples, s);
                }
            } else if (c.m_alpha_method == "analytic") {
                m = MAlphaEstimate::analytic(numerics::m_alpha_gaussian(alpha));
            } else {
                // Gaussian spectral fields: Monte Carlo of E[(W+)^alpha]
                RandomStream s(*c.seed, 0);
                double mean = 0.0, m2 = 0.0;
                for (std::uint64_t i = 0; i < c.m_alpha_samples; ++i) {
                    const double w = s.normal();
                    const double x = w > 0.0 ? std::pow(w, alpha.value()) : 0.0;
                    const double delta = x - mean;
                    mean += delta / static_cast<double>(i + 1);
                    m2 += delta * (x - mean);
                }
                m = {mean, std::sqrt(m2 / static_cast<double>(c.m_alpha_samples - 1) / static_cast<double>(c.m_alpha_samples)),
                     MAlphaMethod::monte_carlo};
            }
            json res = {{"value", m.value}, {"std_error", m.std_error}, {"method", to_string(m.method)},
                        {"spectral", family}, {"inputs", c.to_json()}};
            if (c.json) out << res.dump(2) << '\n';
            else out << plus_minus(m.value, m.std_error) << " (" << to_string(m.method) << ", " << family << ")\n";
            if (!c.out_dir.empty()) {
                ensure_out_dir(c);
                write_json_file(output_path(c, ".result.json"), res);
                extra["outputs"] = {output_path(c, ".result.json").string()};
            }
        } else if (c.command == "mda-check") {
            const auto resolved = resolve_correlation(c);
            const Eigen::Index d = resolved.corr.rows();
            const auto grid = c.grid.empty() ? default_mda_grid(d) : parse_grid(c.grid, d);
            MdaOptions opts;
            opts.bias_allowance = c.bias_allowance;
            opts.threads = c.threads;
            opts.sampler = c.sampler == "radial" ? TSampler::radial : TSampler::variance_mixture;
            opts.norming = c.norming == "exact" ? NormingRule::exact_quantile : NormingRule::asymptotic;
            const auto report = run_mda_check(*c.alpha, resolved.corr, c.block_size, c.spectral.replicates, grid,
                                              qmc_for(c), *c.seed, opts);
            json res;
            res["nu"] = report.nu;
            res["block_size"] = report.block_size;
            res["replicates"] = report.replicates;
            res["bias_allowance"] = report.bias_allowance;
            res["max_abs_gap"] = report.max_abs_gap;
            res["all_pass"] = report.all_pass();
            for (const auto& p : report.points) {
                res["points"].push_back({{"z", std::vector<double>(p.z.data(), p.z.data() + p.z.size())},
                                         {"empirical", p.empirical}, {"theoretical", p.theoretical},
                                         {"theoretical_error", p.theoretical_error}, {"gap", p.gap},
                                         {"binomial_3se", p.binomial_3se}, {"band", p.band}, {"pass", p.pass}});
            }
            if (!c.sweep.empty()) {
                const auto gaps = mda_bias_sweep(*c.alpha, resolved.corr, c.sweep, c.spectral.replicates, grid,
                                                 qmc_for(c), *c.seed, opts);
                for (std::size_t i = 0; i < gaps.size(); ++i) {
                    res["sweep"].push_back({{"block_size", c.sweep[i]}, {"max_abs_gap", gaps[i]}});
                }
            }
            if (c.json) {
                out << res.dump(2) << '\n';
            } else {
                io::write_mda_csv(out, report);
                if (res.contains("sweep")) {
                    for (const auto& s : res["sweep"]) {
                        out << "sweep n=" << s["block_size"].get<std::uint64_t>() << " max_abs_gap="
                            << io::format_double(s["max_abs_gap"].get<double>()) << '\n';
                    }
                }
                out << (report.all_pass() ? "PASS" : "FAIL") << " max_abs_gap=" << io::format_double(report.max_abs_gap) << '\n';
            }
            if (!c.out_dir.empty()) {
                ensure_out_dir(c);
                write_json_file(output_path(c, ".report.json"), res);
                std::ofstream f(output_path(c, ".csv"));
                if (!f) throw Error(ErrorCode::IoError, "cannot write " + output_path(c, ".csv").string());
                io::write_mda_csv(f, report);
                extra["outputs"] = {output_path(c, ".report.json").string(), output_path(c, ".csv").string()};
            }
            if (!report.all_pass()) status = exit_failure;
        }

        if (!c.out_dir.empty()) {
            json meta = metadata(c, elapsed());
            meta.update(extra);
            write_json_file(output_path(c, ".json"), meta);
        }
        return status;
    } catch (const Error& e) {
        err << "xtproc: error[" << to_string(e.code()) << "]: " << e.what() << '\n';
        return e.code() == ErrorCode::UsageError ? exit_usage : exit_failure;
    } catch (const std::exception& e) {
        err << "xtproc: error[Internal]: " << e.what() << '\n';
        return exit_failure;
    }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    auto parsed = parse_config(args, out, err);
    if (!parsed.config) return parsed.exit_code;
    return run(*parsed.config, out, err);
}

} // namespace cli
} // namespace xtproc
