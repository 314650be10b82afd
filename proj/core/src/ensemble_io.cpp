#include "phigpr/ensemble_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "phigpr/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "container writes raw little-endian words");

namespace phigpr {
namespace {

constexpr char kMagic[8] = {'P', 'G', 'B', 'I', 'N', '0', '1', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindEnsemble = 1;
constexpr std::uint32_t kKindMomentTable = 2;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw ContractError("cannot open for writing: " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw ContractError("write failed: " + path_);
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void i32(std::int32_t v) { bytes(&v, 4); }
  void f64s(const double* p, std::size_t n) { bytes(p, 8 * n); }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw ContractError("cannot open: " + path);
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw ContractError("truncated container: " + path_);
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, 8);
    return v;
  }
  std::int32_t i32() {
    std::int32_t v;
    bytes(&v, 4);
    return v;
  }
  void f64s(double* p, std::size_t n) { bytes(p, 8 * n); }
  void expect_end() {
    char c;
    in_.read(&c, 1);
    if (!in_.eof()) throw ContractError("trailing bytes in container: " + path_);
  }
  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
};

void write_header(Writer& w, std::uint32_t kind) {
  w.bytes(kMagic, 8);
  w.u32(kVersion);
  w.u32(kind);
}

void read_header(Reader& r, std::uint32_t want_kind) {
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw ContractError("not a grid binary container: " + r.path());
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw ContractError("unsupported container version " + std::to_string(version) + ": " +
                        r.path());
  std::uint32_t kind = r.u32();
  if (kind != want_kind)
    throw ContractError("container holds payload kind " + std::to_string(kind) +
                        ", expected " + std::to_string(want_kind) + ": " + r.path());
}

// Matrices are stored row-major; Eigen's default is column-major, so rows are
// staged through a transposed copy.
void write_matrix(Writer& w, const Eigen::MatrixXd& m) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  w.f64s(rm.data(), static_cast<std::size_t>(rm.size()));
}

Eigen::MatrixXd read_matrix(Reader& r, Eigen::Index rows, Eigen::Index cols) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  r.f64s(rm.data(), static_cast<std::size_t>(rm.size()));
  return rm;
}

constexpr std::uint64_t kDimLimit = 1ull << 32;

}  // namespace

void write_ensemble(const std::string& path, const Ensemble& ens) {
  if (ens.members.empty()) throw ContractError("write_ensemble: empty ensemble");
  if (ens.seeds.size() != ens.members.size())
    throw ContractError("write_ensemble: seed list does not match member count");
  const Trajectory& first = ens.members.front();
  for (const Trajectory& m : ens.members)
    if (m.n_times() != first.n_times() || m.n_gen() != first.n_gen() ||
        (m.times.array() != first.times.array()).any())
      throw ContractError("write_ensemble: members disagree on the time grid");

  Writer w(path);
  write_header(w, kKindEnsemble);
  w.u32(static_cast<std::uint32_t>(first.n_gen()));
  w.u64(ens.members.size());
  w.u64(static_cast<std::uint64_t>(first.n_times()));
  w.f64s(first.times.data(), static_cast<std::size_t>(first.times.size()));
  for (std::uint64_t s : ens.seeds) w.u64(s);
  for (const Trajectory& m : ens.members) {
    write_matrix(w, m.theta);
    write_matrix(w, m.omega);
    write_matrix(w, m.wind);
  }
}

Ensemble read_ensemble(const std::string& path) {
  Reader r(path);
  read_header(r, kKindEnsemble);
  std::uint32_t ng = r.u32();
  std::uint64_t nm = r.u64();
  std::uint64_t nt = r.u64();
  if (ng == 0 || nm == 0 || nt == 0 || nm > kDimLimit || nt > kDimLimit)
    throw ContractError("implausible ensemble dimensions: " + path);

  Ensemble ens;
  Eigen::VectorXd times(static_cast<Eigen::Index>(nt));
  r.f64s(times.data(), nt);
  ens.seeds.resize(nm);
  for (std::uint64_t i = 0; i < nm; ++i) ens.seeds[i] = r.u64();
  ens.members.resize(nm);
  for (std::uint64_t i = 0; i < nm; ++i) {
    Trajectory& m = ens.members[i];
    m.times = times;
    m.theta = read_matrix(r, static_cast<Eigen::Index>(nt), ng);
    m.omega = read_matrix(r, static_cast<Eigen::Index>(nt), ng);
    m.wind = read_matrix(r, static_cast<Eigen::Index>(nt), ng);
  }
  r.expect_end();
  return ens;
}

void write_moment_table(const std::string& path, const MomentTable& table) {
  const Eigen::Index nc = table.n_channels();
  const Eigen::Index nt = table.grid.size();
  if (nc == 0 || nt == 0) throw ContractError("write_moment_table: empty table");
  if (static_cast<Eigen::Index>(table.means.size()) != nc ||
      static_cast<Eigen::Index>(table.pair_cov.size()) != nc * (nc + 1) / 2)
    throw ContractError("write_moment_table: inconsistent table");

  Writer w(path);
  write_header(w, kKindMomentTable);
  w.u32(static_cast<std::uint32_t>(nc));
  w.u64(static_cast<std::uint64_t>(nt));
  w.u64(static_cast<std::uint64_t>(table.n_members));
  for (const StateChannel& ch : table.channels) {
    w.u32(static_cast<std::uint32_t>(ch.kind));
    w.i32(ch.index);
    w.i32(ch.reference);
  }
  w.f64s(table.grid.data(), static_cast<std::size_t>(nt));
  for (const Eigen::VectorXd& mean : table.means) {
    if (mean.size() != nt) throw ContractError("write_moment_table: mean length mismatch");
    w.f64s(mean.data(), static_cast<std::size_t>(nt));
  }
  for (const Eigen::MatrixXd& block : table.pair_cov) {
    if (block.rows() != nt || block.cols() != nt)
      throw ContractError("write_moment_table: covariance block shape mismatch");
    write_matrix(w, block);
  }
}

MomentTable read_moment_table(const std::string& path) {
  Reader r(path);
  read_header(r, kKindMomentTable);
  std::uint32_t nc = r.u32();
  std::uint64_t nt = r.u64();
  std::uint64_t nm = r.u64();
  if (nc == 0 || nt == 0 || nt > kDimLimit)
    throw ContractError("implausible moment table dimensions: " + path);

  MomentTable table;
  table.n_members = static_cast<int>(nm);
  table.channels.resize(nc);
  for (std::uint32_t c = 0; c < nc; ++c) {
    std::uint32_t kind = r.u32();
    if (kind > static_cast<std::uint32_t>(ChannelKind::OmegaRel))
      throw ContractError("unknown channel kind in " + path);
    table.channels[c].kind = static_cast<ChannelKind>(kind);
    table.channels[c].index = r.i32();
    table.channels[c].reference = r.i32();
  }
  table.grid.resize(static_cast<Eigen::Index>(nt));
  r.f64s(table.grid.data(), nt);
  table.means.resize(nc);
  for (std::uint32_t c = 0; c < nc; ++c) {
    table.means[c].resize(static_cast<Eigen::Index>(nt));
    r.f64s(table.means[c].data(), nt);
  }
  table.pair_cov.resize(static_cast<std::size_t>(nc) * (nc + 1) / 2);
  for (Eigen::MatrixXd& block : table.pair_cov)
    block = read_matrix(r, static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nt));
  r.expect_end();
  return table;
}

}  // namespace phigpr
