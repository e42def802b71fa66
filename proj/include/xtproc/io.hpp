#pragma once
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>
#include <xtproc/core_types.hpp>
#include <xtproc/mda_harness.hpp>
#include <xtproc/spectral_sim.hpp>

namespace xtproc {
namespace io {

struct SitesFile
{
    std::vector<std::string> ids;
    SiteSet sites;
};

/// CSV with header `id,x1,...,xp`, one row per site.
SitesFile read_sites_csv(std::istream& in);
SitesFile read_sites_csv(const std::filesystem::path& path);

/// d x d CSV without header.
MatrixXd read_matrix_csv(std::istream& in);
MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// `replicate,points_used,truncated,z_1..z_d`, one row per replicate.
void write_replicates_csv(std::ostream& out, const std::vector<FieldReplicate<double>>& reps);

/// `z,empirical,theoretical,gap,band,pass`; z is written as `z1;z2;...`.
void write_mda_csv(std::ostream& out, const MdaReport& report);

/// Splits one CSV line on commas and trims surrounding blanks.
std::vector<std::string> split_csv_line(const std::string& line);

double parse_double(const std::string& field);

} // namespace io
} // namespace xtproc
