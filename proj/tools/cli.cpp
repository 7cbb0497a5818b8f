#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <fmt/core.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "ckit/chernoff.hpp"
#include "ckit/chernoff_bregman.hpp"
#include "ckit/divergences.hpp"
#include "ckit/errors.hpp"
#include "ckit/expfam.hpp"
#include "ckit/oracle.hpp"

namespace ckit::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string number(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.17g}", v);
}

void write_json(const Json& j, std::ostream& os, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(k).dump() << ": ";
        write_json(v, os, indent + 2);
      }
      os << "\n" << close << "}";
      break;
    }
    case Json::value_t::array: {
      // Arrays of numbers stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      os << "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << (flat ? ", " : ",");
        first = false;
        if (!flat) os << "\n" << pad;
        write_json(v, os, indent + 2);
      }
      if (!flat && !j.empty()) os << "\n" << close;
      os << "]";
      break;
    }
    case Json::value_t::number_float: os << number(j.get<double>()); break;
    default: os << j.dump(); break;
  }
}

void write_csv(const Table& t, std::ostream& os) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << number(row[c]);
    os << "\n";
  }
}

// One-row CSV of a flat result object; arrays expand to name_0, name_1, ...
void write_object_csv(const Json& j, std::ostream& os) {
  std::vector<std::string> names, cells;
  for (const auto& [k, v] : j.items()) {
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        names.push_back(fmt::format("{}_{}", k, i));
        cells.push_back(v[i].is_number_float() ? number(v[i].get<double>()) : v[i].dump());
      }
    } else {
      names.push_back(k);
      if (v.is_number_float()) {
        cells.push_back(number(v.get<double>()));
      } else if (v.is_string()) {
        cells.push_back(v.get<std::string>());
      } else {
        cells.push_back(v.dump());
      }
    }
  }
  for (std::size_t c = 0; c < names.size(); ++c) os << (c ? "," : "") << names[c];
  os << "\n";
  for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "," : "") << cells[c];
  os << "\n";
}

Json table_json(const std::string& command, const Table& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) rows.push_back(r);
  return Json{{"command", command}, {"columns", t.columns}, {"rows", rows}};
}

Error usage(const std::string& msg) { return Error(ErrorCode::InvalidArgument, msg); }

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::string_view rest(s);
  while (true) {
    const auto comma = rest.find(',');
    std::string_view tok = rest.substr(0, comma);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw usage(fmt::format("{}: cannot parse '{}' as a number", what, tok));
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

Json read_job(const std::string& path, std::istream& in) {
  std::stringstream buf;
  if (path == "-" || path.empty()) {
    buf << in.rdbuf();
  } else {
    std::ifstream f(path);
    if (!f) throw usage(fmt::format("cannot open '{}'", path));
    buf << f.rdbuf();
  }
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw usage(fmt::format("invalid JSON job: {}", e.what()));
  }
}

Vector json_vector(const Json& job, const char* key) {
  if (!job.contains(key)) throw usage(fmt::format("job is missing '{}'", key));
  const Json& v = job[key];
  if (!v.is_array() || v.empty()) throw usage(fmt::format("'{}' must be a non-empty array of numbers", key));
  Vector out;
  for (const auto& e : v) {
    if (!e.is_number()) throw usage(fmt::format("'{}' must contain only numbers", key));
    out.push_back(e.get<double>());
  }
  return out;
}

SpdMatrix json_matrix(const Json& job, const char* key) {
  if (!job.contains(key)) throw usage(fmt::format("job is missing '{}'", key));
  const Json& m = job[key];
  if (!m.is_array() || m.empty()) throw usage(fmt::format("'{}' must be a non-empty nested array", key));
  std::vector<std::vector<double>> rows;
  for (const auto& r : m) {
    if (!r.is_array()) throw usage(fmt::format("'{}' must be an array of rows", key));
    std::vector<double> row;
    for (const auto& e : r) {
      if (!e.is_number()) throw usage(fmt::format("'{}' must contain only numbers", key));
      row.push_back(e.get<double>());
    }
    if (row.size() != m.size()) {
      throw Error(ErrorCode::DimMismatch,
                  fmt::format("'{}' has {} rows but a row of length {}", key, m.size(), row.size()));
    }
    rows.push_back(std::move(row));
  }
  return SpdMatrix(Matrix::from_nested(rows));
}

double json_eps(const Json& job, double fallback) {
  if (!job.contains("eps")) return fallback;
  if (!job["eps"].is_number()) throw usage("'eps' must be a number");
  return job["eps"].get<double>();
}

GaussianParams json_gaussian(const Json& job, const char* mu_key, const char* cov_key) {
  Vector mu = json_vector(job, mu_key);
  SpdMatrix cov = json_matrix(job, cov_key);
  if (mu.size() != cov.dim()) {
    throw Error(ErrorCode::DimMismatch, fmt::format("'{}' has dimension {} but '{}' has dimension {}", mu_key,
                                                    mu.size(), cov_key, cov.dim()));
  }
  return {std::move(mu), std::move(cov)};
}

std::pair<GaussianParams, GaussianParams> json_pair(const Json& job) {
  if (!job.is_object()) throw usage("job must be a JSON object");
  GaussianParams p1 = json_gaussian(job, "mu1", "cov1");
  GaussianParams p2 = json_gaussian(job, "mu2", "cov2");
  if (p1.dim() != p2.dim()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("first distribution has dimension {} but second has dimension {}", p1.dim(), p2.dim()));
  }
  return {std::move(p1), std::move(p2)};
}

Json result_json(const std::string& command, const ChernoffResult& r) {
  return Json{{"command", command},
              {"alpha_star", r.alpha_star},
              {"value", r.value},
              {"method", std::string(to_string(r.method))},
              {"iterations", r.iterations},
              {"residual", r.residual},
              {"degenerate", r.degenerate}};
}

struct Options {
  // Defaults to JSON for results and CSV for curves.
  std::optional<std::string> format;
  // gauss1d and the 1D pair used by curves
  std::optional<double> mu1, v1, mu2, v2;
  double eps = kDefaultEps;
  std::string method = "closed";
  std::string input;
  // scaled
  std::size_t dim = 1;
  double s = 0.5;
  // curves; each command has its own default
  std::optional<int> points;
  // cbd / redundancy
  std::string family = "gauss1d";
  std::string p1, p2;
  int bc_iters = 1000;
  double tol = 1e-10;
  // oracle
  std::string p, q;
  std::string op = "grid";
  double alpha = 0.5;
  int grid = 101;
  double refine_tol = 1e-9;
  double quad_tol = 1e-12;
  std::uint64_t n = 1000000;
  std::uint64_t seed = 1;
};

// The pair for curve commands: a JSON job (MVN) or the four 1D flags.
std::pair<GaussianParams, GaussianParams> curve_pair(const Options& o, std::istream& in) {
  if (!o.input.empty()) return json_pair(read_job(o.input, in));
  if (!o.mu1 || !o.v1 || !o.mu2 || !o.v2) {
    throw usage("give either --input or all of --mu1 --v1 --mu2 --v2");
  }
  return {GaussianParams::univariate(*o.mu1, *o.v1), GaussianParams::univariate(*o.mu2, *o.v2)};
}

void add_pair_flags(CLI::App* cmd, Options& o, bool required) {
  auto* a = cmd->add_option("--mu1", o.mu1, "mean of the first normal");
  auto* b = cmd->add_option("--v1", o.v1, "variance of the first normal");
  auto* c = cmd->add_option("--mu2", o.mu2, "mean of the second normal");
  auto* d = cmd->add_option("--v2", o.v2, "variance of the second normal");
  if (required)
    for (auto* opt : {a, b, c, d}) opt->required();
}

void emit(const Json& j, const Options& o, std::ostream& out) {
  if (o.format.value_or("json") == "csv") {
    write_object_csv(j, out);
  } else {
    write_json(j, out);
    out << "\n";
  }
}

void emit_table(const std::string& command, const Table& t, const Options& o, std::ostream& out) {
  if (o.format.value_or("csv") == "json") {
    write_json(table_json(command, t), out);
    out << "\n";
  } else {
    write_csv(t, out);
  }
}

Json cmd_gauss1d(const Options& o, spdlog::logger& log) {
  ChernoffResult r;
  if (o.method == "closed") {
    r = chernoff::chernoff_gauss1d_closed(*o.mu1, *o.v1, *o.mu2, *o.v2);
  } else {
    r = chernoff::chernoff_bisect(chernoff::uni_gaussian_pair(*o.mu1, *o.v1, *o.mu2, *o.v2), o.eps);
  }
  log.info("gauss1d: {} after {} iterations", to_string(r.method), r.iterations);
  return result_json("gauss1d", r);
}

Json cmd_gaussnd(const Options& o, std::istream& in, spdlog::logger& log) {
  const Json job = read_job(o.input, in);
  const auto [p1, p2] = json_pair(job);
  const ChernoffResult r = chernoff::chernoff_gauss_nd(p1, p2, json_eps(job, o.eps));
  log.info("gaussnd: d = {}, {} iterations", p1.dim(), r.iterations);
  Json j = result_json("gaussnd", r);
  j["dim"] = p1.dim();
  return j;
}

Json cmd_centered(const Options& o, std::istream& in, spdlog::logger& log) {
  const Json job = read_job(o.input, in);
  if (!job.is_object()) throw usage("job must be a JSON object");
  const SpdMatrix s1 = json_matrix(job, "cov1");
  const SpdMatrix s2 = json_matrix(job, "cov2");
  if (s1.dim() != s2.dim()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("'cov1' has dimension {} but 'cov2' has dimension {}", s1.dim(), s2.dim()));
  }
  const ChernoffResult r = chernoff::chernoff_centered(s1, s2, json_eps(job, o.eps));
  log.info("centered: d = {}, {} iterations", s1.dim(), r.iterations);
  Json j = result_json("centered", r);
  j["dim"] = s1.dim();
  j["spectrum"] = generalized_spectrum(s1, s2);
  return j;
}

Json cmd_scaled(const Options& o) {
  Json j = result_json("scaled", chernoff::chernoff_scaled_centered(o.dim, o.s));
  j["dim"] = o.dim;
  j["s"] = o.s;
  return j;
}

Table cmd_bhatt_curve(const Options& o, std::istream& in) {
  const int points = o.points.value_or(201);
  if (points < 1) throw usage("--points must be at least 1");
  const auto [g1, g2] = curve_pair(o, in);
  const std::size_t d = g1.dim();
  const Family fam = d == 1 ? Family::uni_gaussian() : Family::mvn(d);
  const NaturalParam t1 = d == 1 ? expfam::uni_natural(g1.mean[0], g1.cov(0, 0)) : expfam::natural_from_gaussian(g1);
  const NaturalParam t2 = d == 1 ? expfam::uni_natural(g2.mean[0], g2.cov(0, 0)) : expfam::natural_from_gaussian(g2);
  Table t{{"alpha", "D_B_alpha", "F_pq_alpha"}, {}};
  for (int k = 1; k <= points; ++k) {
    const double a = k / (points + 1.0);
    const double db = div::bhattacharyya_alpha(fam, a, t1, t2);
    t.rows.push_back({a, db, 0.0 - db});
  }
  return t;
}

Table cmd_geodesics(const Options& o, std::istream& in) {
  const int points = o.points.value_or(11);
  if (points < 2) throw usage("--points must be at least 2");
  const auto [g1, g2] = curve_pair(o, in);
  const std::size_t d = g1.dim();
  Table t;
  t.columns.push_back("alpha");
  for (const char* which : {"e", "m"}) {
    for (std::size_t i = 0; i < d; ++i) t.columns.push_back(fmt::format("{}_mu_{}", which, i));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) t.columns.push_back(fmt::format("{}_cov_{}_{}", which, i, k));
  }
  for (int k = 0; k < points; ++k) {
    const double a = k + 1 == points ? 1.0 : k / (points - 1.0);
    std::vector<double> row{a};
    for (const GeodesicPoint& gp : {chernoff::geodesic_e(g1, g2, a), chernoff::geodesic_m(g1, g2, a)}) {
      row.insert(row.end(), gp.params.mean.begin(), gp.params.mean.end());
      const auto cov = gp.params.cov.matrix().data();
      row.insert(row.end(), cov.begin(), cov.end());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Json cmd_cbd(const Options& o, spdlog::logger& log) {
  const std::vector<double> a = parse_list(o.p1, "--p1");
  const std::vector<double> b = parse_list(o.p2, "--p2");
  std::optional<Family> fam;
  NaturalParam t1, t2;
  std::optional<RedundancyResult> coding;
  if (o.family == "gauss1d") {
    if (a.size() != 2 || b.size() != 2) throw usage("gauss1d parameters are 'mu,variance'");
    fam = Family::uni_gaussian();
    t1 = expfam::uni_natural(a[0], a[1]);
    t2 = expfam::uni_natural(b[0], b[1]);
  } else {
    // The reverse problem for categorical sources is the minimax redundancy,
    // which also validates the simplex points.
    coding = cbd::minimax_redundancy(a, b, o.tol);
    fam = Family::categorical(a.size());
    t1 = expfam::theta_from_ordinary(*fam, {a});
    t2 = expfam::theta_from_ordinary(*fam, {b});
  }
  const BallResult fwd = cbd::forward_cbd(*fam, t1, t2, o.tol);
  const BallResult rev = coding ? coding->ball : cbd::reverse_cbd(*fam, t1, t2, o.tol);
  const BallResult bc = cbd::forward_cbd_bc(*fam, t1, t2, o.bc_iters);
  log.info("cbd: golden section {} / {} iterations", fwd.iterations, rev.iterations);
  Json j{{"command", "cbd"},
         {"family", o.family},
         {"forward", fwd.radius},
         {"alpha_star", fwd.alpha_star},
         {"forward_gap", fwd.gap},
         {"reverse", rev.radius},
         {"reverse_alpha_star", rev.alpha_star},
         {"reverse_gap", rev.gap},
         {"bc_radius", bc.radius},
         {"bc_alpha", bc.alpha_star},
         {"bc_iterations", bc.iterations},
         {"degenerate", fwd.degenerate}};
  if (coding) j["coding"] = coding->coding;
  return j;
}

Json cmd_redundancy(const Options& o) {
  const RedundancyResult r =
      cbd::minimax_redundancy(parse_list(o.p1, "--p1"), parse_list(o.p2, "--p2"), o.tol);
  return Json{{"command", "redundancy"},
              {"redundancy", r.redundancy},
              {"coding", r.coding},
              {"alpha_star", r.ball.alpha_star},
              {"gap", r.ball.gap},
              {"iterations", r.ball.iterations},
              {"degenerate", r.ball.degenerate}};
}

Json cmd_oracle(const Options& o, spdlog::logger& log) {
  const Density1D p = Density1D::parse(o.p);
  const Density1D q = Density1D::parse(o.q);
  Json j{{"command", "oracle"}, {"op", o.op}, {"p", p.describe()}, {"q", q.describe()}};
  if (o.op == "rho") {
    const double rho = oracle::bhattacharyya_coeff_quad(p, q, o.alpha, o.quad_tol);
    j["alpha"] = o.alpha;
    j["rho"] = rho;
    j["bhattacharyya"] = -std::log(rho);
    j["abs_tol"] = o.quad_tol;
  } else if (o.op == "grid") {
    const oracle::GridResult g = oracle::chernoff_grid(p, q, o.grid, o.refine_tol, o.quad_tol);
    log.info("oracle grid: {} quadratures", g.evaluations);
    j["alpha_star"] = g.alpha;
    j["value"] = g.value;
    j["grid"] = o.grid;
    j["evaluations"] = g.evaluations;
    j["refine_tol"] = o.refine_tol;
    j["abs_tol"] = o.quad_tol;
  } else {
    const oracle::McResult m = oracle::kld_monte_carlo(p, q, o.n, o.seed);
    j["estimate"] = m.estimate;
    j["std_error"] = m.std_error;
    j["n"] = m.n;
    j["seed"] = o.seed;
  }
  return j;
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("chernoff-kit", sink);
  log->set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("CHERNOFF_KIT_LOG")) {
    const std::string s(env);
    if (s == "error" || s == "warn" || s == "info" || s == "debug") level = spdlog::level::from_str(s);
  }
  log->set_level(level);
  return log;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  Options o;
  CLI::App app{"Chernoff information and related divergences", "chernoff-kit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));

  auto* gauss1d = app.add_subcommand("gauss1d", "Chernoff information of two univariate normals");
  add_pair_flags(gauss1d, o, true);
  gauss1d->add_option("--eps", o.eps, "bisection tolerance on alpha");
  gauss1d->add_option("--method", o.method, "closed or bisect")->check(CLI::IsMember({"closed", "bisect"}));

  auto* gaussnd = app.add_subcommand("gaussnd", "Chernoff information of two multivariate normals");
  gaussnd->add_option("--input", o.input, "JSON job {mu1, cov1, mu2, cov2, eps}; '-' or omitted reads stdin");
  gaussnd->add_option("--eps", o.eps, "bisection tolerance when the job has no eps");

  auto* centered = app.add_subcommand("centered", "Chernoff information of two centered normals");
  centered->add_option("--input", o.input, "JSON job {cov1, cov2, eps}; '-' or omitted reads stdin");
  centered->add_option("--eps", o.eps, "root tolerance when the job has no eps");

  auto* scaled = app.add_subcommand("scaled", "closed form for N(0, S) against N(0, s S)");
  scaled->add_option("--dim", o.dim, "dimension")->required()->check(CLI::PositiveNumber);
  scaled->add_option("--s", o.s, "covariance scale")->required();

  auto* curve = app.add_subcommand("bhatt-curve", "skewed Bhattacharyya distance on an open alpha grid (CSV)");
  add_pair_flags(curve, o, false);
  curve->add_option("--input", o.input, "JSON job {mu1, cov1, mu2, cov2} instead of the 1D flags");
  curve->add_option("--points", o.points, "number of alpha values (default 201)");

  auto* geo = app.add_subcommand("geodesics", "e- and m-geodesics between two normals (CSV)");
  add_pair_flags(geo, o, false);
  geo->add_option("--input", o.input, "JSON job {mu1, cov1, mu2, cov2} instead of the 1D flags");
  geo->add_option("--points", o.points, "number of alpha values including both ends (default 11)");

  auto* cbd_cmd = app.add_subcommand("cbd", "forward, reverse and Badoiu-Clarkson Chernoff-Bregman divergences");
  cbd_cmd->add_option("--family", o.family, "gauss1d or categorical")
      ->check(CLI::IsMember({"gauss1d", "categorical"}));
  cbd_cmd->add_option("--p1", o.p1, "'mu,variance' or a probability vector")->required();
  cbd_cmd->add_option("--p2", o.p2, "'mu,variance' or a probability vector")->required();
  cbd_cmd->add_option("--bc-iters", o.bc_iters, "Badoiu-Clarkson steps");
  cbd_cmd->add_option("--tol", o.tol, "golden-section tolerance");

  auto* red = app.add_subcommand("redundancy", "minimax redundancy of two categorical sources");
  red->add_option("--p1", o.p1, "probability vector")->required();
  red->add_option("--p2", o.p2, "probability vector")->required();
  red->add_option("--tol", o.tol, "golden-section tolerance");

  auto* orc = app.add_subcommand("oracle", "quadrature and Monte-Carlo checks for 1D densities");
  orc->add_option("--p", o.p, "density, e.g. normal:0,1 exponential:1 halfnormal:1 cauchy:0,1")->required();
  orc->add_option("--q", o.q, "density")->required();
  orc->add_option("--op", o.op, "rho, grid or kld-mc")->check(CLI::IsMember({"rho", "grid", "kld-mc"}));
  orc->add_option("--alpha", o.alpha, "skew for --op rho");
  orc->add_option("--grid", o.grid, "alpha grid size for --op grid");
  orc->add_option("--refine-tol", o.refine_tol, "golden-section bracket width for --op grid");
  orc->add_option("--tol", o.quad_tol, "absolute quadrature tolerance");
  orc->add_option("--n", o.n, "Monte-Carlo sample size");
  orc->add_option("--seed", o.seed, "Monte-Carlo seed");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*gauss1d) {
      emit(cmd_gauss1d(o, *log), o, out);
    } else if (*gaussnd) {
      emit(cmd_gaussnd(o, in, *log), o, out);
    } else if (*centered) {
      emit(cmd_centered(o, in, *log), o, out);
    } else if (*scaled) {
      emit(cmd_scaled(o), o, out);
    } else if (*curve) {
      emit_table("bhatt-curve", cmd_bhatt_curve(o, in), o, out);
    } else if (*geo) {
      emit_table("geodesics", cmd_geodesics(o, in), o, out);
    } else if (*cbd_cmd) {
      emit(cmd_cbd(o, *log), o, out);
    } else if (*red) {
      emit(cmd_redundancy(o), o, out);
    } else if (*orc) {
      emit(cmd_oracle(o, *log), o, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_validation() ? kUsage : kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  out.flush();
  return kOk;
}

}  // namespace ckit::cli
