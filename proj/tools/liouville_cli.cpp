#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "liouville/earthquake.hpp"
#include "liouville/series.hpp"

using nlohmann::json;
using namespace liouville;

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return buf;
}

std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument("empty number list: " + s);
  return out;
}

struct Options {
  double base_x = 0.5;
  double base_y = std::sqrt(3.0) / 2.0;
  std::string phi = "bump";
  double ell = 1.0;
  double delta = 0.5;
  std::string cocycle = "seeded:7,0.3";
  double radius = 4.0;
  double t0 = 0.0;
  std::string steps = "0.02,0.01,0.005";
  double tol = 1e-3;
  // loose enough that the mollified-indicator ladder settles within the
  // level budget; smooth integrands stop levels earlier anyway
  double quad_tol = 5e-7;
  int base_grid = 16;
  int max_levels = 5;
  int fixed_level = -1;
  std::string geodesic = "0/1,1/0";
  std::string triangle;
  std::string radii = "2,3,4";
  std::string output, csv, plot, config;

  HPoint base() const { return HPoint{base_x, base_y}; }
  QuadratureSpec quad() const {
    QuadratureSpec q;
    q.base_grid = base_grid;
    q.refinement_tol = quad_tol;
    q.max_levels = max_levels;
    q.fixed_level = fixed_level;
    return q;
  }
};

void apply_config_file(Options& o) {
  if (o.config.empty()) return;
  std::ifstream in(o.config);
  if (!in) throw std::invalid_argument("cannot open config file: " + o.config);
  json j = json::parse(in);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "base-x") o.base_x = v.get<double>();
    else if (k == "base-y") o.base_y = v.get<double>();
    else if (k == "phi") o.phi = v.get<std::string>();
    else if (k == "ell") o.ell = v.get<double>();
    else if (k == "delta") o.delta = v.get<double>();
    else if (k == "cocycle") o.cocycle = v.get<std::string>();
    else if (k == "radius") o.radius = v.get<double>();
    else if (k == "t0") o.t0 = v.get<double>();
    else if (k == "steps") o.steps = v.get<std::string>();
    else if (k == "tol") o.tol = v.get<double>();
    else if (k == "quad-tol") o.quad_tol = v.get<double>();
    else if (k == "base-grid") o.base_grid = v.get<int>();
    else if (k == "max-levels") o.max_levels = v.get<int>();
    else if (k == "fixed-level") o.fixed_level = v.get<int>();
    else if (k == "geodesic") o.geodesic = v.get<std::string>();
    else if (k == "triangle") o.triangle = v.get<std::string>();
    else if (k == "radii") o.radii = v.get<std::string>();
    else if (k == "output") o.output = v.get<std::string>();
    else if (k == "csv") o.csv = v.get<std::string>();
    else if (k == "plot") o.plot = v.get<std::string>();
    else throw std::invalid_argument("unknown config key: " + k);
  }
}

TestFunction make_phi(const Options& o) {
  if (o.phi == "crossing-mass")
    return make_crossing_mass(o.base(), o.ell, o.delta);
  for (TestFunction& f : builtin_test_functions(o.base()))
    if (f.name() == o.phi) return f;
  throw std::invalid_argument(
      "unknown test function: " + o.phi +
      " (try bump, holder05, holder08, a -sym variant, or crossing-mass)");
}

TransverseCocycle make_cocycle(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("cocycle spec needs kind:args, got " + spec);
  std::string kind = spec.substr(0, colon);
  std::string args = spec.substr(colon + 1);
  std::vector<std::string> parts;
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (kind == "dirac") {
    if (parts.size() != 2)
      throw std::invalid_argument("dirac spec needs two fractions");
    return make_dirac(Leaf(parse_fraction(parts[0]), parse_fraction(parts[1])));
  }
  if (kind == "depth-decay") {
    if (parts.size() != 2)
      throw std::invalid_argument("depth-decay spec needs base,ratio");
    return make_depth_decay(std::stod(parts[0]), std::stod(parts[1]));
  }
  if (kind == "seeded") {
    if (parts.size() != 2)
      throw std::invalid_argument("seeded spec needs seed,bound");
    return make_seeded_bounded(std::stoll(parts[0]), std::stod(parts[1]));
  }
  throw std::invalid_argument("unknown cocycle kind: " + kind);
}

Geodesic parse_geodesic(const std::string& s, const HPoint& O) {
  auto comma = s.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("geodesic spec needs two fractions: " + s);
  Fraction a = parse_fraction(s.substr(0, comma));
  Fraction b = parse_fraction(s.substr(comma + 1));
  (void)O;
  return Geodesic(a.boundary(), b.boundary());
}

json report_json(const DerivativeReport& r) {
  json j;
  json ps = json::array();
  for (auto& p : r.partial_sums) ps.push_back({p.first, p.second});
  j["partial_sums"] = ps;
  json bt = json::array();
  for (auto& p : r.boundary_terms) bt.push_back({p.first, p.second});
  j["boundary_terms"] = bt;
  j["tail_bound"] = r.tail_bound;
  j["fd_value"] = r.fd_value;
  j["fd_error"] = r.fd_error;
  j["fd_warning"] = r.fd_warning;
  j["series_value"] = r.series_value;
  j["identity_sum"] = r.identity_sum;
  j["agreement"] = r.agreement;
  j["vn_gap"] = r.vn_gap;
  j["decay_rows"] = r.decay_table.size();
  return j;
}

void write_decay_csv(std::ostream& os, const TestFunction& phi,
                     const std::vector<DecayRow>& rows) {
  os << "id,depth,D,u,sigma,kernel,abs_term,envelope\n";
  char buf[200];
  double nu = phi.holder_exponent();
  double norm = phi.holder_norm_bound();
  for (const DecayRow& r : rows) {
    double env = norm * (1.0 + r.depth) *
                 std::exp(-(1.0 + nu) * r.D - std::abs(r.u));
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  r.id, r.depth, r.D, r.u, r.sigma, r.kernel,
                  std::abs(r.sigma * r.kernel), env);
    os << buf;
  }
}

void write_decay_plot(std::ostream& os, const std::string& csv) {
  os << "set datafile separator ','\n"
     << "set logscale y\n"
     << "set xlabel 'distance to the side'\n"
     << "set ylabel 'term size'\n"
     << "plot '" << csv << "' every ::1 using 3:7 with points title 'terms', \\\n"
     << "     '" << csv << "' every ::1 using 3:8 with lines title 'envelope'\n";
}

void write_boundary_plot(std::ostream& os, const std::string& csv) {
  os << "set datafile separator ','\n"
     << "set logscale y\n"
     << "set xlabel 'truncation radius'\n"
     << "set ylabel '|boundary term|'\n"
     << "plot '" << csv << "' every ::1 using 1:3 with linespoints title ''\n";
}

// stdout always gets the JSON document; --output duplicates it to a file
int emit(const Options& o, const std::string& command, json result, int code) {
  json doc;
  doc["command"] = command;
  json cfg;
  cfg["base-x"] = o.base_x;
  cfg["base-y"] = o.base_y;
  cfg["phi"] = o.phi;
  cfg["ell"] = o.ell;
  cfg["delta"] = o.delta;
  cfg["cocycle"] = o.cocycle;
  cfg["radius"] = o.radius;
  cfg["t0"] = o.t0;
  cfg["steps"] = o.steps;
  cfg["tol"] = o.tol;
  cfg["quad-tol"] = o.quad_tol;
  cfg["base-grid"] = o.base_grid;
  cfg["max-levels"] = o.max_levels;
  cfg["fixed-level"] = o.fixed_level;
  cfg["geodesic"] = o.geodesic;
  cfg["triangle"] = o.triangle;
  cfg["radii"] = o.radii;
  doc["config"] = cfg;
  json hashed;
  hashed["command"] = command;
  hashed["config"] = cfg;
  doc["config_hash"] = hex64(fnv1a(hashed.dump()));
  doc["result"] = result;
  doc["timestamp"] = iso_timestamp();
  std::string text = doc.dump(2);
  std::cout << text << std::endl;
  if (!o.output.empty()) {
    std::ofstream out(o.output);
    if (!out) throw std::invalid_argument("cannot write " + o.output);
    out << text << '\n';
  }
  return code;
}

int run_integrate(const Options& o) {
  TestFunction phi = make_phi(o);
  QuadratureReport qr;
  json res;
  int code = 0;
  try {
    res["value"] = liouville_integral(phi, o.quad(), &qr);
  } catch (const QuadratureError& e) {
    res["error"] = e.what();
    res["last_estimate"] = e.last_estimate;
    code = 2;
  }
  res["estimates"] = qr.estimates;
  res["converged"] = qr.converged;
  res["support_radius"] = phi.support_radius();
  res["norm_bound"] = phi.holder_norm_bound();
  if (!o.csv.empty()) {
    std::ofstream c(o.csv);
    c << "level,estimate\n";
    char buf[64];
    for (size_t k = 0; k < qr.estimates.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%.12g\n", k, qr.estimates[k]);
      c << buf;
    }
  }
  return emit(o, "integrate", res, code);
}

int run_kernel(const Options& o) {
  TestFunction phi = make_phi(o);
  QuadratureReport qr;
  json res;
  int code = 0;
  try {
    if (!o.triangle.empty()) {
      std::vector<Fraction> v;
      std::stringstream ss(o.triangle);
      std::string item;
      while (std::getline(ss, item, ',')) v.push_back(parse_fraction(item));
      if (v.size() != 3)
        throw std::invalid_argument("triangle spec needs three fractions");
      // the facing side is the one separating the base point from the
      // opposite vertex
      HPoint O = o.base();
      int facing = -1;
      for (int k = 0; k < 3; ++k) {
        Geodesic s(v[size_t(k)].boundary(), v[size_t((k + 1) % 3)].boundary());
        double sv = side_value(s, O) * side_value(s, v[size_t((k + 2) % 3)].boundary());
        if (sv < 0.0) facing = k;
      }
      if (facing < 0)
        throw std::invalid_argument("base point lies inside the triangle");
      auto side = [&](int k) {
        return oriented_with_left(
            Geodesic(v[size_t(k % 3)].boundary(), v[size_t((k + 1) % 3)].boundary()),
            O);
      };
      res["value"] = kernel_triangle_sides(phi, side(facing), side(facing + 1),
                                           side(facing + 2), o.quad(), &qr);
      res["mode"] = "triangle";
    } else {
      Geodesic g = parse_geodesic(o.geodesic, o.base());
      res["value"] = kernel_geodesic(phi, g, o.quad(), &qr);
      res["mode"] = "geodesic";
    }
  } catch (const QuadratureError& e) {
    res["error"] = e.what();
    res["last_estimate"] = e.last_estimate;
    code = 2;
  }
  res["converged"] = qr.converged;
  return emit(o, "kernel", res, code);
}

int run_series(const Options& o, bool scan) {
  TestFunction phi = make_phi(o);
  TransverseCocycle sd = make_cocycle(o.cocycle);
  json res;
  int code = 0;
  DerivativeReport rep;
  try {
    rep = tangent_series_value(phi, sd, o.radius, o.quad());
  } catch (const SeriesError& e) {
    rep = e.report;
    res["error"] = e.what();
    code = 2;
  }
  res.update(report_json(rep));
  if (scan) {
    // per-unit-shell maximum of the decay ratio, the number the envelope
    // comparisons look at
    json shells = json::array();
    int nb = int(std::ceil(o.radius));
    std::vector<double> mx(size_t(nb), 0.0);
    for (const DecayRow& r : rep.decay_table) {
      int b = std::min(nb - 1, std::max(0, int(r.D)));
      mx[size_t(b)] = std::max(mx[size_t(b)], r.ratio);
    }
    for (int b = 0; b < nb; ++b) shells.push_back(mx[size_t(b)]);
    res["shell_ratio_max"] = shells;
  }
  if (!o.csv.empty()) {
    std::ofstream c(o.csv);
    write_decay_csv(c, phi, rep.decay_table);
  }
  if (!o.plot.empty()) {
    if (o.csv.empty())
      throw std::invalid_argument("--plot needs --csv for the data file");
    std::ofstream p(o.plot);
    write_decay_plot(p, o.csv);
  }
  return emit(o, scan ? "decay-scan" : "series", res, code);
}

int run_verify(const Options& o, bool whole) {
  TestFunction phi = make_phi(o);
  TransverseCocycle sd = make_cocycle(o.cocycle);
  std::vector<double> steps = parse_doubles(o.steps);
  json res;
  DerivativeReport rep;
  if (whole) {
    rep = verify_series_derivative(phi, sd, o.radius, steps, o.quad());
  } else {
    FareyArena arena(o.base(), o.radius);
    std::vector<int> fam = arena.spanning_family(o.radius);
    rep = verify_finite_truncation(phi, sd, arena, fam, steps, o.quad(), o.t0);
  }
  res.update(report_json(rep));
  res["tol"] = o.tol;
  bool pass = rep.agreement <= o.tol;
  res["pass"] = pass;
  if (!o.csv.empty()) {
    std::ofstream c(o.csv);
    write_decay_csv(c, phi, rep.decay_table);
  }
  if (!o.plot.empty()) {
    if (o.csv.empty())
      throw std::invalid_argument("--plot needs --csv for the data file");
    std::ofstream p(o.plot);
    write_decay_plot(p, o.csv);
  }
  return emit(o, whole ? "verify-derivative" : "verify-identity", res,
              pass ? 0 : 2);
}

int run_boundary_scan(const Options& o) {
  TestFunction phi = make_phi(o);
  TransverseCocycle sd = make_cocycle(o.cocycle);
  std::vector<double> radii = parse_doubles(o.radii);
  double rmax = 0.0;
  for (double r : radii) rmax = std::max(rmax, r);
  FareyArena arena(o.base(), rmax);
  json res;
  json rows = json::array();
  for (double r : radii) {
    double b = boundary_term(phi, sd, r, o.quad(), arena);
    rows.push_back({r, b});
  }
  res["boundary_terms"] = rows;
  if (!o.csv.empty()) {
    std::ofstream c(o.csv);
    c << "radius,boundary,abs_boundary\n";
    char buf[96];
    for (auto& row : rows) {
      double r = row[0].get<double>(), b = row[1].get<double>();
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", r, b, std::abs(b));
      c << buf;
    }
  }
  if (!o.plot.empty()) {
    if (o.csv.empty())
      throw std::invalid_argument("--plot needs --csv for the data file");
    std::ofstream p(o.plot);
    write_boundary_plot(p, o.csv);
  }
  return emit(o, "boundary-scan", res, 0);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  // resolve --config before building the app so file values become defaults
  // that explicit flags then override
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") o.config = argv[i + 1];
  try {
    apply_config_file(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{
      "Geodesic-space integrals against the boundary-pair measure, shear "
      "deformations along the rational tessellation, and the first-order "
      "deformation series with finite-difference verification."};
  app.require_subcommand(1);
  // let the shared options below also appear after the subcommand name
  app.fallthrough();
  app.add_option("--config", o.config, "JSON file with option defaults");
  app.add_option("--base-x", o.base_x, "base point, real part");
  app.add_option("--base-y", o.base_y, "base point, height");
  app.add_option("--output", o.output, "also write the JSON document here");
  app.add_option("--csv", o.csv, "write tabular data here");
  app.add_option("--plot", o.plot, "write a gnuplot script reading --csv");
  app.add_option("--quad-tol", o.quad_tol, "quadrature refinement tolerance");
  app.add_option("--base-grid", o.base_grid, "cells per quarter circle");
  app.add_option("--max-levels", o.max_levels, "dyadic refinement levels");
  app.add_option("--fixed-level", o.fixed_level,
                 "evaluate exactly this level (-1 = adaptive)");

  auto add_phi = [&](CLI::App* c) {
    c->add_option("--phi", o.phi, "test function name");
    c->add_option("--ell", o.ell, "crossing-mass segment length");
    c->add_option("--delta", o.delta, "crossing-mass mollification width");
  };
  auto add_cocycle = [&](CLI::App* c) {
    c->add_option("--cocycle", o.cocycle,
                  "dirac:a,b | depth-decay:base,ratio | seeded:seed,bound");
    c->add_option("--radius", o.radius, "truncation radius");
  };

  CLI::App* integrate = app.add_subcommand(
      "integrate", "integral of the test function over geodesics");
  add_phi(integrate);

  CLI::App* kernel = app.add_subcommand(
      "kernel", "first-order shear kernel of a geodesic or triangle");
  add_phi(kernel);
  kernel->add_option("--geodesic", o.geodesic, "two fractions, oriented");
  kernel->add_option("--triangle", o.triangle, "three fractions");

  CLI::App* series =
      app.add_subcommand("series", "truncated deformation series");
  add_phi(series);
  add_cocycle(series);

  CLI::App* vident = app.add_subcommand(
      "verify-identity",
      "finite-truncation derivative identity at one spanning family");
  add_phi(vident);
  add_cocycle(vident);
  vident->add_option("--t0", o.t0, "base time of the derivative");
  vident->add_option("--steps", o.steps, "descending FD step sizes");
  vident->add_option("--tol", o.tol, "agreement tolerance (exit 2 beyond)");

  CLI::App* vderiv = app.add_subcommand(
      "verify-derivative", "series vs finite differences at one truncation");
  add_phi(vderiv);
  add_cocycle(vderiv);
  vderiv->add_option("--steps", o.steps, "descending FD step sizes");
  vderiv->add_option("--tol", o.tol, "agreement tolerance (exit 2 beyond)");

  CLI::App* decay = app.add_subcommand(
      "decay-scan", "per-term decay table of the truncated series");
  add_phi(decay);
  add_cocycle(decay);

  CLI::App* bscan = app.add_subcommand(
      "boundary-scan", "boundary terms across truncation radii");
  add_phi(bscan);
  bscan->add_option("--cocycle", o.cocycle,
                    "dirac:a,b | depth-decay:base,ratio | seeded:seed,bound");
  bscan->add_option("--radii", o.radii, "comma-separated truncation radii");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (integrate->parsed()) return run_integrate(o);
    if (kernel->parsed()) return run_kernel(o);
    if (series->parsed()) return run_series(o, false);
    if (vident->parsed()) return run_verify(o, false);
    if (vderiv->parsed()) return run_verify(o, true);
    if (decay->parsed()) return run_series(o, true);
    if (bscan->parsed()) return run_boundary_scan(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "usage error: no subcommand\n";
  return 1;
}
