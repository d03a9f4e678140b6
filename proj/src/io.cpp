#include "lvlingam/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lvlingam/errors.hpp"

namespace lvlingam::io {

namespace {

[[noreturn]] void parse_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::Parse, field + ": " + what);
}

const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) parse_error(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_error(where + "." + key, "missing");
  return *it;
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) parse_error(field, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) parse_error(field, "expected an integer");
  return j.get<int>();
}

int vertex(const Json& j, const std::string& field, int p) {
  const int v = integer(j, field);
  if (v < 1 || v > p) parse_error(field, "vertex " + std::to_string(v) + " outside 1.." + std::to_string(p));
  return v - 1;
}

std::string vname(int v) { return "V" + std::to_string(v + 1); }

const char* family_name(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Uniform: return "uniform";
    case NoiseFamily::Laplace: return "laplace";
    case NoiseFamily::Gaussian: return "gaussian";
  }
  return "uniform";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Path: return "path";
    case Verdict::NoPath: return "no_path";
    case Verdict::Undecided: return "undecided";
  }
  return "undecided";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    parse_error("line " + std::to_string(row + 1) + ", column " + std::to_string(col + 1),
                "not a number: '" + t + "'");
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

Json to_json(const LinearSem& sem) {
  Json j;
  j["num_vertices"] = sem.num_vertices();
  Json obs = Json::array();
  for (int v : sem.observed()) obs.push_back(v + 1);
  j["observed"] = obs;
  Json edges = Json::array();
  for (const auto& e : sem.graph().edges()) edges.push_back({{"from", e.from + 1}, {"to", e.to + 1}, {"weight", e.weight}});
  j["edges"] = edges;
  Json noise = Json::array();
  for (const auto& s : sem.sources()) noise.push_back({{"family", family_name(s.family)}, {"params", s.params}});
  j["noise"] = noise;
  const Matrix& mix = sem.noise_mix();
  if (!(mix.rows() == mix.cols() && mix.isIdentity(0.0))) j["noise_mix"] = matrix_json(mix);
  return j;
}

LinearSem sem_from_json(const Json& j) {
  const int p = integer(need(j, "num_vertices", "graph"), "graph.num_vertices");
  if (p < 1) parse_error("graph.num_vertices", "must be at least 1");
  const Json& jo = need(j, "observed", "graph");
  if (!jo.is_array()) parse_error("graph.observed", "expected an array");
  std::vector<int> observed;
  for (std::size_t i = 0; i < jo.size(); ++i) observed.push_back(vertex(jo[i], "graph.observed[" + std::to_string(i) + "]", p));
  const Json& je = need(j, "edges", "graph");
  if (!je.is_array()) parse_error("graph.edges", "expected an array");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string at = "graph.edges[" + std::to_string(i) + "]";
    edges.push_back({vertex(need(je[i], "from", at), at + ".from", p), vertex(need(je[i], "to", at), at + ".to", p),
                     number(need(je[i], "weight", at), at + ".weight")});
  }
  std::vector<NoiseSpec> sources;
  if (auto it = j.find("noise"); it != j.end()) {
    if (!it->is_array()) parse_error("graph.noise", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string at = "graph.noise[" + std::to_string(i) + "]";
      const Json& f = need((*it)[i], "family", at);
      NoiseSpec s;
      const std::string name = f.is_string() ? f.get<std::string>() : "";
      if (name == "uniform") s.family = NoiseFamily::Uniform;
      else if (name == "laplace") s.family = NoiseFamily::Laplace;
      else if (name == "gaussian") s.family = NoiseFamily::Gaussian;
      else parse_error(at + ".family", "expected uniform, laplace or gaussian");
      const Json& ps = need((*it)[i], "params", at);
      if (!ps.is_array()) parse_error(at + ".params", "expected an array");
      for (std::size_t q = 0; q < ps.size(); ++q) s.params.push_back(number(ps[q], at + ".params[" + std::to_string(q) + "]"));
      sources.push_back(std::move(s));
    }
  }
  std::optional<Matrix> mix;
  if (auto it = j.find("noise_mix"); it != j.end()) mix = matrix_from_json(*it, "graph.noise_mix");
  try {
    return LinearSem(Dag(p, std::move(edges)), std::move(observed), std::move(sources), std::move(mix));
  } catch (const Error& e) {
    parse_error("graph", e.what());
  }
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) parse_error(field, "expected an array of rows");
  const auto rows = j.size();
  const auto cols = rows ? j[0].size() : 0;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) parse_error(field + "[" + std::to_string(r) + "]", "ragged row");
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = number(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

Json to_json(const SupportMatrix& s) {
  Json sup = Json::array();
  for (Eigen::Index r = 0; r < s.support.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < s.support.cols(); ++c) row.push_back(static_cast<bool>(s.support(r, c)));
    sup.push_back(row);
  }
  Json order = Json::array();
  for (int c : s.column_order) order.push_back(c + 1);
  return Json{{"support", sup},        {"mean", matrix_json(s.mean)}, {"stderr", matrix_json(s.stderr_)},
              {"alpha", s.alpha},      {"column_order", order},       {"replicates", s.replicates}};
}

SupportMatrix support_from_json(const Json& j) {
  SupportMatrix s;
  s.mean = matrix_from_json(need(j, "mean", "support"), "support.mean");
  s.stderr_ = matrix_from_json(need(j, "stderr", "support"), "support.stderr");
  s.alpha = number(need(j, "alpha", "support"), "support.alpha");
  s.replicates = integer(need(j, "replicates", "support"), "support.replicates");
  const Json& sup = need(j, "support", "support");
  s.support = BoolMatrix::Constant(s.mean.rows(), s.mean.cols(), false);
  if (!sup.is_array() || static_cast<Eigen::Index>(sup.size()) != s.mean.rows())
    parse_error("support.support", "shape differs from support.mean");
  for (Eigen::Index r = 0; r < s.mean.rows(); ++r) {
    if (!sup[r].is_array() || static_cast<Eigen::Index>(sup[r].size()) != s.mean.cols())
      parse_error("support.support", "shape differs from support.mean");
    for (Eigen::Index c = 0; c < s.mean.cols(); ++c) {
      if (!sup[r][c].is_boolean()) parse_error("support.support", "expected booleans");
      s.support(r, c) = sup[r][c].get<bool>();
    }
  }
  const Json& order = need(j, "column_order", "support");
  if (!order.is_array()) parse_error("support.column_order", "expected an array");
  for (std::size_t i = 0; i < order.size(); ++i)
    s.column_order.push_back(integer(order[i], "support.column_order[" + std::to_string(i) + "]") - 1);
  return s;
}

Json to_json(const PathVerdictMatrix& v, const std::vector<std::string>& names) {
  Json verdicts = Json::array(), counts = Json::array();
  for (int i = 0; i < v.size(); ++i) {
    Json row = Json::array(), crow = Json::array();
    for (int k = 0; k < v.size(); ++k) {
      row.push_back(verdict_name(v.verdict[i][k]));
      crow.push_back({v.counts[i][k][0], v.counts[i][k][1]});
    }
    verdicts.push_back(row);
    counts.push_back(crow);
  }
  return Json{{"variables", names}, {"verdicts", verdicts}, {"counts", counts}};
}

PathVerdictMatrix verdicts_from_json(const Json& j) {
  const Json& vs = need(j, "verdicts", "verdicts");
  const Json& cs = need(j, "counts", "verdicts");
  if (!vs.is_array() || !cs.is_array() || vs.size() != cs.size()) parse_error("verdicts", "malformed matrices");
  const int p = static_cast<int>(vs.size());
  PathVerdictMatrix v;
  v.verdict.assign(p, std::vector<Verdict>(p, Verdict::NoPath));
  v.counts.assign(p, std::vector<std::array<int, 2>>(p, {0, 0}));
  for (int i = 0; i < p; ++i)
    for (int k = 0; k < p; ++k) {
      const std::string at = "verdicts.verdicts[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      if (!vs[i].is_array() || static_cast<int>(vs[i].size()) != p || !vs[i][k].is_string()) parse_error(at, "expected a verdict");
      const auto s = vs[i][k].get<std::string>();
      if (s == "path") v.verdict[i][k] = Verdict::Path;
      else if (s == "no_path") v.verdict[i][k] = Verdict::NoPath;
      else if (s == "undecided") v.verdict[i][k] = Verdict::Undecided;
      else parse_error(at, "unknown verdict '" + s + "'");
      const std::string cat = "verdicts.counts[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      if (!cs[i].is_array() || static_cast<int>(cs[i].size()) != p || !cs[i][k].is_array() || cs[i][k].size() != 2)
        parse_error(cat, "expected a pair");
      v.counts[i][k] = {integer(cs[i][k][0], cat), integer(cs[i][k][1], cat)};
    }
  return v;
}

Json mixing_json(const MixingEstimate& est, const std::vector<std::string>& names) {
  Json sel = Json::array();
  for (const auto& c : est.selection.candidates) {
    Json row{{"k", c.k}, {"failed", c.failed}};
    if (!c.failed) {
      row["holdout_cost"] = c.holdout_cost;
      row["coherence"] = c.geometry.coherence;
      row["min_norm_ratio"] = c.geometry.min_norm_ratio;
      row["admissible"] = c.admissible;
      row["converged"] = c.fit.converged;
    }
    sel.push_back(row);
  }
  return Json{{"variables", names},
              {"k", est.k},
              {"lambda", est.problem.lambda},
              {"contrast_sign", est.problem.sign},
              {"entries", matrix_json(est.mixing.entries)},
              {"raw", matrix_json(est.raw)},
              {"selection", sel},
              {"warnings", est.selection.warnings}};
}

Json effects_json(const DiscoveryResult& r, const std::vector<std::string>& names) {
  Json j;
  Json order = Json::array();
  if (r.order)
    for (int v : r.order->order.sequence()) order.push_back(names.at(v));
  j["order"] = order;
  j["verdicts"] = to_json(r.verdicts, names)["verdicts"];
  Json dropped = Json::array();
  if (r.order)
    for (const auto& e : r.order->dropped) dropped.push_back({{"from", names.at(e.from)}, {"to", names.at(e.to)}});
  j["dropped"] = dropped;
  Json cands = Json::array();
  if (r.candidates)
    for (const auto& c : r.candidates->candidates) {
      Json choice = Json::array();
      for (int x : c.choice) choice.push_back(x + 1);
      cands.push_back({{"matrix", matrix_json(c.matrix)}, {"choice", choice}});
    }
  j["candidates"] = cands;
  j["unique"] = r.unique ? matrix_json(*r.unique) : Json(nullptr);
  j["multiplicity"] = r.unique ? 1LL : (r.candidates ? r.candidates->multiplicity : 0LL);
  if (r.candidates) {
    j["r"] = r.candidates->r;
    j["rejected_singular"] = r.candidates->rejected_singular;
    j["has_duplicates"] = r.candidates->has_duplicates;
  }
  j["warnings"] = r.warnings;
  return j;
}

Json report_json(const LinearSem& sem, const MinimalityReport& report, const Reduction& reduction) {
  auto target = [](const std::optional<int>& t) { return t ? Json(vname(*t)) : Json(nullptr); };
  Json abs = Json::array();
  for (const auto& e : report.absorbable) {
    Json ts = Json::array();
    for (const auto& t : e.targets) ts.push_back(target(t));
    abs.push_back({{"latent", vname(e.latent)}, {"targets", ts}});
  }
  Json actions = Json::array();
  for (const auto& a : reduction.actions)
    actions.push_back({{"absorbed", vname(a.absorbed)}, {"target", target(a.target)}, {"scalar", a.scalar}});
  Json remaining = Json::array();
  for (int v : sem.latent())
    if (reduction.index_map[v] >= 0) remaining.push_back(vname(v));
  return Json{{"is_minimal", report.is_minimal},
              {"count_identifiable", report.count_identifiable},
              {"absorbable", abs},
              {"reduction", {{"actions", actions}, {"remaining_latents", remaining}}}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << contents;
    if (!out.flush()) throw Error(ErrorKind::Io, "cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot write " + path.string() + ": " + ec.message());
}

Json read_json(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string samples_csv(const SampleMatrix& s) {
  std::string out;
  for (int i = 0; i < s.variables(); ++i) {
    if (i) out += ',';
    out += i < static_cast<int>(s.names.size()) ? s.names[i] : "X" + std::to_string(i + 1);
  }
  out += '\n';
  for (int t = 0; t < s.samples(); ++t) {
    for (int i = 0; i < s.variables(); ++i) {
      if (i) out += ',';
      out += format_double(s.values(i, t));
    }
    out += '\n';
  }
  return out;
}

SampleMatrix parse_samples_csv(const std::string& text) {
  const auto ls = lines(text);
  if (ls.empty()) parse_error("samples", "empty file");
  SampleMatrix s;
  for (const auto& h : split(ls[0], ',')) s.names.push_back(trim(h));
  const auto p = s.names.size();
  s.values.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(ls.size() - 1));
  for (std::size_t r = 1; r < ls.size(); ++r) {
    const auto cells = split(ls[r], ',');
    if (cells.size() != p)
      parse_error("line " + std::to_string(r + 1), "expected " + std::to_string(p) + " fields, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < p; ++c)
      s.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r - 1)) = parse_number(cells[c], r, c);
  }
  return s;
}

PriceTable parse_prices_csv(const std::string& text) {
  const auto ls = lines(text);
  if (ls.empty()) parse_error("prices", "empty file");
  PriceTable t;
  const auto header = split(ls[0], ',');
  if (header.size() < 2) parse_error("prices header", "need a date column and at least one series");
  for (std::size_t c = 1; c < header.size(); ++c) t.names.push_back(trim(header[c]));
  const auto m = t.names.size();
  t.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(ls.size() - 1));
  for (std::size_t r = 1; r < ls.size(); ++r) {
    const auto cells = split(ls[r], ',');
    if (cells.size() != m + 1)
      parse_error("line " + std::to_string(r + 1), "expected " + std::to_string(m + 1) + " fields, got " + std::to_string(cells.size()));
    t.dates.push_back(trim(cells[0]));
    for (std::size_t c = 0; c < m; ++c) {
      const std::string cell = trim(cells[c + 1]);
      const bool missing = cell.empty() || cell == "NA" || cell == "nan" || cell == "NaN";
      t.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r - 1)) =
          missing ? std::nan("") : parse_number(cell, r, c + 1);
    }
  }
  return t;
}

std::string returns_csv(const PriceTable& r) {
  std::string out = "date";
  for (const auto& n : r.names) out += "," + n;
  out += '\n';
  for (std::size_t t = 0; t < r.dates.size(); ++t) {
    out += r.dates[t];
    for (Eigen::Index i = 0; i < r.values.rows(); ++i) out += "," + format_double(r.values(i, static_cast<Eigen::Index>(t)));
    out += '\n';
  }
  return out;
}

std::string benchmark_csv(const BenchmarkResult& r) {
  std::string out = "p,n,mean_error,stderr,graphs,failures,mean_error_observed\n";
  for (const auto& c : r.cells)
    out += std::to_string(c.p) + "," + std::to_string(c.n) + "," + format_double(c.mean_error) + "," +
           format_double(c.stderr_) + "," + std::to_string(c.graphs) + "," + std::to_string(c.failures) + "," +
           format_double(c.mean_error_observed) + "\n";
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace lvlingam::io
