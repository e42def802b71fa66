#include <xtproc/io.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace xtproc {
namespace io {

namespace {

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    return in;
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& field)
{
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw Error(ErrorCode::IoError, "not a number: '" + field + "'");
    return v;
}

SitesFile read_sites_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "sites file is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "id") {
        throw Error(ErrorCode::IoError, "sites header must be `id,x1,...,xp`");
    }
    const std::size_t p = header.size() - 1;
    for (std::size_t j = 0; j < p; ++j) {
        if (header[j + 1] != "x" + std::to_string(j + 1)) {
            throw Error(ErrorCode::IoError, "sites header column " + std::to_string(j + 2) + " must be x" + std::to_string(j + 1));
        }
    }
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != p + 1) {
            throw Error(ErrorCode::IoError, "sites line " + std::to_string(line_no) + " has " +
                                                std::to_string(fields.size()) + " fields, expected " + std::to_string(p + 1));
        }
        ids.push_back(fields[0]);
        std::vector<double> row;
        for (std::size_t j = 0; j < p; ++j) row.push_back(parse_double(fields[j + 1]));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::IoError, "sites file has no rows");
    MatrixXd coords(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < p; ++j) coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return {std::move(ids), SiteSet(std::move(coords))};
}

SitesFile read_sites_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_sites_csv(in);
}

MatrixXd read_matrix_csv(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<double> row;
        for (const auto& f : split_csv_line(line)) row.push_back(parse_double(f));
        rows.push_back(std::move(row));
    }
    const auto d = rows.size();
    if (d == 0) throw Error(ErrorCode::IoError, "matrix file is empty");
    MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        if (rows[i].size() != d) {
            throw Error(ErrorCode::DimensionMismatch, "matrix row " + std::to_string(i + 1) + " has " +
                                                          std::to_string(rows[i].size()) + " entries, expected " + std::to_string(d));
        }
        for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

MatrixXd read_matrix_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_matrix_csv(in);
}

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_replicates_csv(std::ostream& out, const std::vector<FieldReplicate<double>>& reps)
{
    const Eigen::Index d = reps.empty() ? 0 : reps.front().values.size();
    out << "replicate,points_used,truncated";
    for (Eigen::Index j = 0; j < d; ++j) out << ",z_" << (j + 1);
    out << '\n';
    for (std::size_t r = 0; r < reps.size(); ++r) {
        out << r << ',' << reps[r].points_used << ',' << (reps[r].truncation_triggered ? 1 : 0);
        for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(reps[r].values[j]);
        out << '\n';
    }
}

void write_mda_csv(std::ostream& out, const MdaReport& report)
{
    out << "z,empirical,theoretical,gap,band,pass\n";
    for (const auto& p : report.points) {
        for (Eigen::Index j = 0; j < p.z.size(); ++j) out << (j ? ";" : "") << format_double(p.z[j]);
        out << ',' << format_double(p.empirical) << ',' << format_double(p.theoretical) << ','
            << format_double(p.gap) << ',' << format_double(p.band) << ',' << (p.pass ? 1 : 0) << '\n';
    }
}

} // namespace io
} // namespace xtproc
