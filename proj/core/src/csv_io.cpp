#include "phigpr/csv_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "phigpr/config_file.hpp"
#include "phigpr/errors.hpp"

namespace phigpr {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open: " + path);
  return in;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_num(const std::string& s, const std::string& path) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ContractError("bad numeric field '" + s + "' in " + path);
  return v;
}

std::string fmt(double v) { return ConfigFile::format_double(v); }

void check_lengths(const PosteriorSeries& s) {
  const Eigen::Index n = s.times.size();
  if (s.mean.size() != n || s.stddev.size() != n ||
      (s.truth.size() != 0 && s.truth.size() != n))
    throw ContractError("posterior series '" + s.channel + "' has mismatched lengths");
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  const int ng = traj.n_gen();
  const Eigen::Index nt = traj.n_times();
  if (traj.theta.rows() != nt || traj.omega.rows() != nt || traj.wind.rows() != nt ||
      traj.omega.cols() != ng || traj.wind.cols() != ng)
    throw ContractError("write_trajectory_csv: inconsistent trajectory shape");
  std::ofstream out = open_out(path);
  out << "t";
  for (int k = 1; k <= ng; ++k) out << ",theta_" << k;
  for (int k = 1; k <= ng; ++k) out << ",omega_" << k;
  for (int k = 1; k <= ng; ++k) out << ",pwind_" << k;
  out << "\n";
  for (Eigen::Index i = 0; i < nt; ++i) {
    out << fmt(traj.times[i]);
    for (int k = 0; k < ng; ++k) out << ',' << fmt(traj.theta(i, k));
    for (int k = 0; k < ng; ++k) out << ',' << fmt(traj.omega(i, k));
    for (int k = 0; k < ng; ++k) out << ',' << fmt(traj.wind(i, k));
    out << "\n";
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ContractError("empty file: " + path);
  std::vector<std::string> header = split_row(line);
  if (header.empty() || header[0] != "t" || (header.size() - 1) % 3 != 0)
    throw ContractError("not a trajectory table: " + path);
  const int ng = static_cast<int>((header.size() - 1) / 3);
  std::vector<double> times;
  std::vector<double> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row = split_row(line);
    if (static_cast<int>(row.size()) != 1 + 3 * ng)
      throw ContractError("ragged row in " + path);
    times.push_back(parse_num(row[0], path));
    for (std::size_t i = 1; i < row.size(); ++i) cells.push_back(parse_num(row[i], path));
  }
  const Eigen::Index nt = static_cast<Eigen::Index>(times.size());
  Trajectory traj;
  traj.times = Eigen::Map<Eigen::VectorXd>(times.data(), nt);
  traj.theta.resize(nt, ng);
  traj.omega.resize(nt, ng);
  traj.wind.resize(nt, ng);
  for (Eigen::Index i = 0; i < nt; ++i) {
    const double* row = cells.data() + i * 3 * ng;
    for (int k = 0; k < ng; ++k) traj.theta(i, k) = row[k];
    for (int k = 0; k < ng; ++k) traj.omega(i, k) = row[ng + k];
    for (int k = 0; k < ng; ++k) traj.wind(i, k) = row[2 * ng + k];
  }
  return traj;
}

void write_posterior_csv(const std::string& path, const std::vector<PosteriorSeries>& series) {
  bool with_truth = !series.empty();
  for (const PosteriorSeries& s : series) {
    check_lengths(s);
    if (s.truth.size() == 0) with_truth = false;
  }
  std::ofstream out = open_out(path);
  out << "channel,t,mean,std,lower2,upper2";
  if (with_truth) out << ",truth";
  out << "\n";
  for (const PosteriorSeries& s : series) {
    for (Eigen::Index i = 0; i < s.times.size(); ++i) {
      out << s.channel << ',' << fmt(s.times[i]) << ',' << fmt(s.mean[i]) << ','
          << fmt(s.stddev[i]) << ',' << fmt(s.mean[i] - 2.0 * s.stddev[i]) << ','
          << fmt(s.mean[i] + 2.0 * s.stddev[i]);
      if (with_truth) out << ',' << fmt(s.truth[i]);
      out << "\n";
    }
  }
}

std::vector<PosteriorSeries> read_posterior_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ContractError("empty file: " + path);
  std::vector<std::string> header = split_row(line);
  bool with_truth = header.size() == 7 && header[6] == "truth";
  if (!(header.size() == 6 || with_truth) || header[0] != "channel" || header[1] != "t")
    throw ContractError("not a posterior table: " + path);

  std::vector<PosteriorSeries> out;
  std::vector<std::vector<double>> t, m, sd, tr;
  auto series_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i].channel == name) return i;
    out.push_back({name, {}, {}, {}, {}});
    t.emplace_back();
    m.emplace_back();
    sd.emplace_back();
    tr.emplace_back();
    return out.size() - 1;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row = split_row(line);
    if (row.size() != header.size()) throw ContractError("ragged row in " + path);
    std::size_t si = series_index(row[0]);
    t[si].push_back(parse_num(row[1], path));
    m[si].push_back(parse_num(row[2], path));
    sd[si].push_back(parse_num(row[3], path));
    if (with_truth) tr[si].push_back(parse_num(row[6], path));
  }
  for (std::size_t si = 0; si < out.size(); ++si) {
    const Eigen::Index n = static_cast<Eigen::Index>(t[si].size());
    out[si].times = Eigen::Map<Eigen::VectorXd>(t[si].data(), n);
    out[si].mean = Eigen::Map<Eigen::VectorXd>(m[si].data(), n);
    out[si].stddev = Eigen::Map<Eigen::VectorXd>(sd[si].data(), n);
    if (with_truth) out[si].truth = Eigen::Map<Eigen::VectorXd>(tr[si].data(), n);
  }
  return out;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out = open_out(path);
  out << "generator,quantity,window,lpp,coverage,rmse\n";
  for (const MetricsRow& r : rows)
    out << r.generator << ',' << r.quantity << ',' << r.window << ',' << fmt(r.lpp) << ','
        << fmt(r.coverage) << ',' << fmt(r.rmse) << "\n";
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ContractError("empty file: " + path);
  if (split_row(line) != std::vector<std::string>{"generator", "quantity", "window", "lpp",
                                                  "coverage", "rmse"})
    throw ContractError("not a metrics table: " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_row(line);
    if (f.size() != 6) throw ContractError("ragged row in " + path);
    MetricsRow r;
    r.generator = static_cast<int>(parse_num(f[0], path));
    r.quantity = f[1];
    r.window = f[2];
    r.lpp = parse_num(f[3], path);
    r.coverage = parse_num(f[4], path);
    r.rmse = parse_num(f[5], path);
    rows.push_back(r);
  }
  return rows;
}

void write_moment_curves_csv(const std::string& path, const Eigen::VectorXd& grid,
                             const std::vector<StateChannel>& channels,
                             const std::vector<Eigen::VectorXd>& means,
                             const std::vector<Eigen::VectorXd>& stds) {
  if (channels.empty() || means.size() != channels.size() || stds.size() != channels.size())
    throw ContractError("moment curves: channel/column mismatch");
  for (std::size_t c = 0; c < channels.size(); ++c)
    if (means[c].size() != grid.size() || stds[c].size() != grid.size())
      throw ContractError("moment curves: column length off the grid");
  std::ofstream out = open_out(path);
  out << "t";
  for (const StateChannel& ch : channels) out << ",mean_" << channel_label(ch);
  for (const StateChannel& ch : channels) out << ",std_" << channel_label(ch);
  out << "\n";
  for (Eigen::Index a = 0; a < grid.size(); ++a) {
    out << fmt(grid[a]);
    for (std::size_t c = 0; c < channels.size(); ++c) out << ',' << fmt(means[c][a]);
    for (std::size_t c = 0; c < channels.size(); ++c) out << ',' << fmt(stds[c][a]);
    out << "\n";
  }
}

void write_moment_curves_csv(const std::string& path, const MomentTable& table) {
  std::vector<Eigen::VectorXd> stds;
  for (int c = 0; c < table.n_channels(); ++c) {
    Eigen::VectorXd s(table.grid.size());
    for (Eigen::Index a = 0; a < table.grid.size(); ++a) {
      double var = table.pair(c, c)(a, a);
      s[a] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    stds.push_back(std::move(s));
  }
  write_moment_curves_csv(path, table.grid, table.channels, table.means, stds);
}

void write_columns_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<Eigen::VectorXd>& columns) {
  if (header.size() != columns.size() || columns.empty())
    throw ContractError("write_columns_csv: header/column mismatch");
  for (const Eigen::VectorXd& c : columns)
    if (c.size() != columns[0].size())
      throw ContractError("write_columns_csv: unequal column lengths");
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (Eigen::Index r = 0; r < columns[0].size(); ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << (i ? "," : "") << fmt(columns[i][r]);
    out << "\n";
  }
}

}  // namespace phigpr
