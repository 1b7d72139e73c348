#include "mmue/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mmue/error.hpp"

namespace mmue::io {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += v[i];
  }
  return out;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError(fmt::format("not an integer: '{}'", s));
  return v;
}

}  // namespace

const std::string* CsvTable::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

const std::string& CsvTable::meta_value(const std::string& key) const {
  if (const auto* v = find_meta(key)) return *v;
  throw ParseError(fmt::format("missing header field '{}'", key));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ParseError(fmt::format("missing column '{}'", name));
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

double parse_double(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw ParseError(fmt::format("not a number: '{}'", s));
  return v;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
  for (const auto& [k, v] : table.meta) out << "# " << k << '=' << v << '\n';
  if (!table.columns.empty()) out << join(table.columns, ',') << '\n';
  for (const auto& row : table.rows) out << join(row, ',') << '\n';
  if (!out) throw Error(fmt::format("write to {} failed", path.string()));
}

CsvTable read_csv(const fs::path& path, bool has_column_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open {}", path.string()));
  CsvTable t;
  std::string line;
  bool header_done = !has_column_header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(fmt::format("bad header line in {}: {}", path.string(), line));
      t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header_done) {
      t.columns = split(line, ',');
      header_done = true;
      continue;
    }
    t.rows.push_back(split(line, ','));
    if (!t.columns.empty() && t.rows.back().size() != t.columns.size())
      throw ParseError(fmt::format("{}: row {} has {} fields, expected {}", path.string(), t.rows.size(),
                                   t.rows.back().size(), t.columns.size()));
  }
  return t;
}

void write_vector(const fs::path& path, const Eigen::VectorXd& v, const std::string& name,
                  const std::vector<std::pair<std::string, std::string>>& meta) {
  CsvTable t;
  t.meta = meta;
  t.meta.emplace_back("length", std::to_string(v.size()));
  t.columns = {"index", name};
  t.rows.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) t.rows.push_back({std::to_string(i), format_double(v(i))});
  write_csv(path, t);
}

Eigen::VectorXd read_vector(const fs::path& path, const std::string& name) {
  const CsvTable t = read_csv(path);
  const std::size_t c = t.column(name);
  Eigen::VectorXd v(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_double(t.rows[i][c]);
  return v;
}

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m,
                  const std::vector<std::pair<std::string, std::string>>& meta) {
  CsvTable t;
  t.meta = {{"rows", std::to_string(m.rows())}, {"cols", std::to_string(m.cols())}};
  t.meta.insert(t.meta.end(), meta.begin(), meta.end());
  t.rows.resize(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto& row = t.rows[static_cast<std::size_t>(i)];
    row.reserve(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(format_double(m(i, j)));
  }
  write_csv(path, t);
}

Eigen::MatrixXd read_matrix(const fs::path& path) {
  const CsvTable t = read_csv(path, false);
  const auto rows = parse_int(t.meta_value("rows"));
  const auto cols = parse_int(t.meta_value("cols"));
  if (static_cast<long long>(t.rows.size()) != rows) throw ParseError(fmt::format("{}: expected {} rows", path.string(), rows));
  Eigen::MatrixXd m(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    if (static_cast<long long>(r.size()) != cols) throw ParseError(fmt::format("{}: row {} has wrong width", path.string(), i));
    for (long long j = 0; j < cols; ++j) m(i, j) = parse_double(r[static_cast<std::size_t>(j)]);
  }
  return m;
}

std::vector<std::pair<std::string, std::string>> prior_meta(const SignalPrior& prior) {
  std::vector<std::pair<std::string, std::string>> meta = {{"sparsity", format_double(prior.sparsity)}};
  if (const auto* g = std::get_if<GaussianSlab>(&prior.slab)) {
    meta.emplace_back("slab", "gaussian");
    meta.emplace_back("slab_variance", format_double(g->variance));
  } else {
    const auto& w = std::get<WeibullSlab>(prior.slab);
    meta.emplace_back("slab", "weibull");
    meta.emplace_back("slab_scale", format_double(w.scale));
    meta.emplace_back("slab_shape", format_double(w.shape));
  }
  return meta;
}

SignalPrior prior_from_meta(const CsvTable& t) {
  const double p = parse_double(t.meta_value("sparsity"));
  const std::string& slab = t.meta_value("slab");
  if (slab == "gaussian") return SignalPrior::gaussian(p, parse_double(t.meta_value("slab_variance")));
  if (slab == "weibull")
    return SignalPrior::weibull(p, parse_double(t.meta_value("slab_scale")), parse_double(t.meta_value("slab_shape")));
  throw ParseError(fmt::format("unknown slab '{}'", slab));
}

std::vector<std::pair<std::string, std::string>> channel_meta(const OutputChannel& channel) {
  if (const auto* a = std::get_if<AwgnChannel>(&channel))
    return {{"channel", "awgn"}, {"noise_variance", format_double(a->noise_variance)}};
  return {{"channel", "poisson"}, {"poisson_scale", format_double(std::get<PoissonChannel>(channel).scale)}};
}

OutputChannel channel_from_meta(const CsvTable& t) {
  const std::string& kind = t.meta_value("channel");
  if (kind == "awgn") return AwgnChannel{parse_double(t.meta_value("noise_variance"))};
  if (kind == "poisson") return PoissonChannel{parse_double(t.meta_value("poisson_scale"))};
  throw ParseError(fmt::format("unknown channel '{}'", kind));
}

void save_instance(const fs::path& dir, const ProblemInstance& inst) {
  fs::create_directories(dir);
  auto meta = prior_meta(inst.prior);
  const auto cm = channel_meta(inst.channel);
  meta.insert(meta.end(), cm.begin(), cm.end());
  meta.emplace_back("seed", std::to_string(inst.seed));
  write_matrix(dir / "phi.csv", inst.phi, meta);
  write_vector(dir / "x.csv", inst.x, "x");
  write_vector(dir / "w.csv", inst.w, "w");
  write_vector(dir / "y.csv", inst.y, "y");
}

ProblemInstance load_instance(const fs::path& dir) {
  ProblemInstance inst;
  const CsvTable header = read_csv(dir / "phi.csv", false);
  inst.prior = prior_from_meta(header);
  inst.channel = channel_from_meta(header);
  inst.seed = static_cast<Seed>(std::stoull(header.meta_value("seed")));
  inst.phi = read_matrix(dir / "phi.csv");
  inst.y = read_vector(dir / "y.csv", "y");
  if (fs::exists(dir / "x.csv")) inst.x = read_vector(dir / "x.csv", "x");
  else inst.x = Eigen::VectorXd::Zero(inst.phi.cols());
  if (fs::exists(dir / "w.csv")) inst.w = read_vector(dir / "w.csv", "w");
  else inst.w = Eigen::VectorXd::Zero(inst.phi.rows());
  validate(inst.prior);
  validate(inst.channel);
  if (inst.y.size() != inst.phi.rows() || inst.x.size() != inst.phi.cols())
    throw ParseError(fmt::format("instance in {} has inconsistent dimensions", dir.string()));
  return inst;
}

void write_gamp_result(const fs::path& path, const ScalarChannelResult& r) {
  CsvTable t;
  std::vector<std::string> traj;
  for (double m : r.mu_trajectory) traj.push_back(format_double(m));
  t.meta = {{"mu", format_double(r.mu)},
            {"iterations_run", std::to_string(r.iterations_run)},
            {"mu_trajectory", join(traj, ';')},
            {"floor_hits", std::to_string(r.floor_hits)},
            {"damped_retry", r.damped_retry ? "1" : "0"},
            {"mean_removed", r.mean_removed ? "1" : "0"}};
  t.columns = {"index", "q", "x_mmse", "x_var"};
  for (Eigen::Index j = 0; j < r.q.size(); ++j)
    t.rows.push_back({std::to_string(j), format_double(r.q(j)), format_double(r.x_mmse(j)), format_double(r.x_var(j))});
  write_csv(path, t);
}

ScalarChannelResult read_gamp_result(const fs::path& path) {
  const CsvTable t = read_csv(path);
  ScalarChannelResult r;
  r.mu = parse_double(t.meta_value("mu"));
  r.iterations_run = static_cast<int>(parse_int(t.meta_value("iterations_run")));
  const std::string& traj = t.meta_value("mu_trajectory");
  if (!traj.empty())
    for (const auto& s : split(traj, ';')) r.mu_trajectory.push_back(parse_double(s));
  if (const auto* f = t.find_meta("floor_hits")) r.floor_hits = static_cast<int>(parse_int(*f));
  if (const auto* f = t.find_meta("damped_retry")) r.damped_retry = *f == "1";
  if (const auto* f = t.find_meta("mean_removed")) r.mean_removed = *f == "1";
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  r.q.resize(n);
  r.x_mmse.resize(n);
  r.x_var.resize(n);
  const std::size_t cq = t.column("q"), cm = t.column("x_mmse"), cv = t.column("x_var");
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& row = t.rows[static_cast<std::size_t>(j)];
    r.q(j) = parse_double(row[cq]);
    r.x_mmse(j) = parse_double(row[cm]);
    r.x_var(j) = parse_double(row[cv]);
  }
  return r;
}

void write_estimate(const fs::path& path, const Eigen::VectorXd& estimate,
                    const std::vector<std::pair<std::string, std::string>>& meta) {
  write_vector(path, estimate, "estimate", meta);
}

}  // namespace mmue::io
