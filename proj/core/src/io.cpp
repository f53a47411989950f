#include "worstrisk/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace worstrisk {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // normalize negative zero
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps line endings stable
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

void write_curve_panel_csv(const CurvePanel& panel, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "realization,channel,t,value\n";
  const auto& grid = *panel.grid();
  for (std::size_t r = 0; r < panel.size(); ++r) {
    for (int c = 0; c <= panel.covariate_count(); ++c) {
      const std::string name = c == 0 ? "Y" : "X" + std::to_string(c);
      const auto& ch = panel.channel(c);
      for (std::size_t i = 0; i < grid.size(); ++i)
        out << r << ',' << name << ',' << format_double(grid[i]) << ','
            << format_double(ch(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)))
            << '\n';
    }
  }
}

CurvePanel read_curve_panel_csv(const std::filesystem::path& path, const std::string& label) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty panel file " + path.string());
  // rows keyed by (realization, channel); grid from the first block
  std::map<int, std::map<std::string, std::vector<double>>> rows;
  std::vector<double> grid_points;
  bool grid_done = false;
  std::string first_key;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 4) throw IoError("malformed panel row: " + line);
    const int r = std::stoi(f[0]);
    const std::string& ch = f[1];
    const std::string key = f[0] + "/" + ch;
    if (first_key.empty()) first_key = key;
    if (key == first_key) {
      if (grid_done) throw IoError("repeated panel block: " + key);
      grid_points.push_back(std::stod(f[2]));
    }
    rows[r][ch].push_back(std::stod(f[3]));
    if (key != first_key) grid_done = true;
  }
  if (grid_points.size() < 2) throw IoError("panel grid too small in " + path.string());
  auto grid = make_grid(grid_points);
  const auto n = rows.size();
  if (n == 0) throw IoError("panel has no realizations");
  const auto channel_count = rows.begin()->second.size();
  std::vector<Eigen::MatrixXd> channels(
      channel_count,
      Eigen::MatrixXd(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid->size())));
  std::size_t r_idx = 0;
  for (const auto& [r, chans] : rows) {
    (void)r;
    if (chans.size() != channel_count) throw IoError("ragged channels in " + path.string());
    for (const auto& [name, vals] : chans) {
      const int c = name == "Y" ? 0 : std::stoi(name.substr(1));
      if (vals.size() != grid->size()) throw IoError("ragged grid in " + path.string());
      for (std::size_t i = 0; i < vals.size(); ++i)
        channels[static_cast<std::size_t>(c)](static_cast<Eigen::Index>(r_idx),
                                              static_cast<Eigen::Index>(i)) = vals[i];
    }
    ++r_idx;
  }
  return CurvePanel(grid, std::move(channels), label);
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& col_labels,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < col_labels.size(); ++j)
    out << (j ? "," : "") << col_labels[j];
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty matrix file " + path.string());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    std::vector<double> row;
    row.reserve(f.size());
    for (const auto& s : f) row.push_back(std::stod(s));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw IoError("ragged matrix in " + path.string());
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

void write_beta_kernel_csv(const BetaKernel& beta, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "covariate,k,l,lambda\n";
  for (int i = 0; i < beta.covariates(); ++i) {
    const auto& c = beta.coeff(i);
    for (Eigen::Index k = 0; k < c.rows(); ++k)
      for (Eigen::Index l = 0; l < c.cols(); ++l)
        out << (i + 1) << ',' << (k + 1) << ',' << (l + 1) << ',' << format_double(c(k, l))
            << '\n';
  }
}

std::vector<Eigen::MatrixXd> read_beta_coeffs_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty kernel file " + path.string());
  struct Entry {
    int i, k, l;
    double v;
  };
  std::vector<Entry> entries;
  int max_i = 0, max_k = 0, max_l = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 4) throw IoError("malformed kernel row: " + line);
    Entry e{std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stod(f[3])};
    max_i = std::max(max_i, e.i);
    max_k = std::max(max_k, e.k);
    max_l = std::max(max_l, e.l);
    entries.push_back(e);
  }
  std::vector<Eigen::MatrixXd> coeff(static_cast<std::size_t>(max_i),
                                     Eigen::MatrixXd::Zero(max_k, max_l));
  for (const auto& e : entries)
    coeff[static_cast<std::size_t>(e.i - 1)](e.k - 1, e.l - 1) = e.v;
  return coeff;
}

void emit_surface(const BetaKernel& beta, int covariate, int resolution,
                  const std::filesystem::path& path) {
  if (resolution < 2) throw DomainError("surface resolution must be at least 2");
  auto out = open_out(path);
  out << "t,tau,value\n";
  const double lo = beta.row_basis()->t_start();
  const double hi = beta.row_basis()->t_end();
  const double h = (hi - lo) / static_cast<double>(resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    const double t = i + 1 == resolution ? hi : lo + h * i;
    for (int j = 0; j < resolution; ++j) {
      const double tau = j + 1 == resolution ? hi : lo + h * j;
      out << format_double(t) << ',' << format_double(tau) << ','
          << format_double(beta.eval(t, tau, covariate)) << '\n';
    }
  }
}

void write_decomposition_csv(const DecompositionReport& report,
                             const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "candidate_id,admissible,risk,is_scaled_A\n";
  for (const auto& c : report.candidates)
    out << c.id << ',' << (c.admissible ? 1 : 0) << ',' << format_double(c.risk) << ','
        << (c.is_scaled_shift ? 1 : 0) << '\n';
  out << "# summary," << (report.pass ? "PASS" : "FAIL")
      << ",gamma=" << format_double(report.gamma)
      << ",decomposition=" << format_double(report.decomposition)
      << ",max_candidate=" << format_double(report.max_candidate_risk)
      << ",scaled_shift=" << format_double(report.scaled_shift_risk) << '\n';
}

void write_estimation_csv(const std::vector<EstimationRecord>& records,
                          const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "n,seed,gamma,route,coeff_error,frobenius_error,runtime_ms\n";
  for (const auto& r : records)
    out << r.n << ',' << r.seed << ',' << format_double(r.gamma) << ',' << r.route << ','
        << format_double(r.coeff_error) << ',' << format_double(r.frobenius_error) << ','
        << format_double(r.runtime_ms) << '\n';
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace worstrisk
