#pragma once
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>
#include <json.hpp>
#include <xtproc/core_types.hpp>

namespace xtproc {
namespace cli {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* env_prefix = "XTPROC_";

enum ExitCode : int
{
    exit_ok = 0,
    exit_failure = 1,
    exit_usage = 2,
};

/// Fully validated run description. Field names mirror the long flag names.
struct RunConfig
{
    std::string command;

    std::optional<double> alpha;
    std::optional<double> spectral_nu;

    std::string corr;  // parametric family name
    std::optional<double> range;
    std::optional<double> power;
    std::string sites;
    std::string matrix;
    std::optional<double> rho;

    SpectralSettings spectral;
    QmcSettings qmc;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;

    std::vector<double> z;
    std::string grid;

    std::string m_alpha_method = "analytic";
    std::uint64_t m_alpha_samples = 1000000;

    std::uint64_t block_size = 10000;
    double bias_allowance = 0.01;
    std::vector<std::uint64_t> sweep;
    std::string sampler = "variance-mixture";
    std::string norming = "asymptotic";

    std::string out_dir;
    std::string prefix;
    bool json = false;

    /// Config object that reproduces this run when passed back via --config.
    nlohmann::json to_json() const;
};

struct ParseResult
{
    std::optional<RunConfig> config;
    int exit_code = exit_ok;
};

/// Parses flags, XTPROC_* environment variables and an optional JSON
/// config file (`--config path`, flags win over file values). Usage errors
/// are reported on err with exit code 2; --help prints to out with code 0.
ParseResult parse_config(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Executes a validated config, writing results to out and any files under
/// config.out_dir. Returns the process exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_config followed by run.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cli
} // namespace xtproc
