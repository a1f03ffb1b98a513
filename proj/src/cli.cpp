#include "nelliptic/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "nelliptic/fixtures.hpp"
#include "nelliptic/geometry.hpp"
#include "nelliptic/grid.hpp"
#include "nelliptic/minimax.hpp"
#include "nelliptic/parallel.hpp"
#include "nelliptic/probe.hpp"
#include "nelliptic/regularity.hpp"
#include "nelliptic/report.hpp"
#include "nelliptic/solver.hpp"
#include "nelliptic/text.hpp"

namespace nelliptic {
namespace {

Eigen::VectorXd parse_point(const std::string& text) {
  const std::vector<double> v = parse_double_list(text);
  require(!v.empty(), ErrorKind::invalid_input, "empty point '" + text + "'");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// "lo,hi" gives a square; "lo1,hi1,lo2,hi2" a rectangle.
GridFunction box_grid(const std::string& box, double h) {
  const std::vector<double> v = parse_double_list(box);
  require(v.size() == 2 || v.size() == 4, ErrorKind::invalid_input, "--box expects lo,hi or lo1,hi1,lo2,hi2");
  require(h > 0, ErrorKind::invalid_input, "--h must be positive");
  const Eigen::Vector2d lo(v[0], v.size() == 4 ? v[2] : v[0]);
  const Eigen::Vector2d hi(v[1], v.size() == 4 ? v[3] : v[1]);
  return GridFunction::box(lo, hi, h);
}

/// A grid file when the path exists, otherwise an expression in x1, x2.
GridFunction field_on(const GridFunction& geometry, const std::string& source, const std::string& flag) {
  if (std::filesystem::is_regular_file(source)) {
    GridFunction g = load_grid(source);
    require(g.same_geometry(geometry), ErrorKind::invalid_input, flag + ": grid file does not match the domain grid");
    return g;
  }
  GridFunction g = geometry.like();
  g.fill(parse_expression(source));
  return g;
}

std::pair<OperatorSpec, double> parse_constraint(const std::string& text) {
  const auto colon = text.rfind(':');
  require(colon != std::string::npos && colon > 0, ErrorKind::invalid_input, "--constrain expects <op>:<f0>");
  return {OperatorSpec::parse(text.substr(0, colon)), parse_double(text.substr(colon + 1))};
}

std::string example_spec(const std::string& name) {
  if (name == "pmc") return "pmc:0.3";
  if (name == "hq") return "hq:0.5";
  if (name == "slag") return "slag:0.5";
  if (name == "power") return "power:1.5";
  return name;
}

struct Options {
  int threads = 1;

  std::string op, input, fixture, box, f, g, out_path, side = "both", eq = "linear", sign = "plus", constrain,
      csv, point, h_list, A, b, log, envelope, contact;
  double rho = 1.0, h = 0.0, lambda = 1.0, Lambda = 1.0, b0 = 0.0, eta = 0.5, r0 = 0.5, tol = 1e-9,
         damping = 0.5, delta = 0.1, vtol = 1e-6, inflation = 0.1, radius = 0.5, domain_radius = 4.0;
  std::optional<double> vrho, norm_bound;
  int n = 2, samples = 2000, degree = 1, levels = 8, lattice = 8, directions = 8, max_iters = 200, slopes = 32,
      rays = 256;
  std::uint64_t seed = 1;
};

class Command {
 public:
  Command(std::ostream& out, const Options& o) : out_(out), o_(o) {}

  void emit(const std::string& kind, const Json& config, Json payload) {
    Json record{{"kind", kind}, {"config", config}};
    for (auto& [k, v] : payload.items()) record[k] = std::move(v);
    const std::string line = record.dump();
    out_ << line << '\n';
    if (!o_.log.empty()) {
      std::ofstream log(o_.log, std::ios::app);
      require(static_cast<bool>(log), ErrorKind::invalid_input, "cannot append to " + o_.log);
      log << line << '\n';
    }
  }

  Json base(const std::string& command) const { return {{"command", command}, {"threads", o_.threads}}; }

  GridFunction input_grid(Json& config) const {
    if (!o_.input.empty()) {
      config["input"] = o_.input;
      return load_grid(o_.input);
    }
    require(!o_.fixture.empty() && !o_.box.empty(), ErrorKind::usage, "need --input <grid> or --fixture with --box and --h");
    config["fixture"] = o_.fixture;
    config["box"] = o_.box;
    config["h"] = o_.h;
    GridFunction u = box_grid(o_.box, o_.h);
    u.fill(fixture(o_.fixture).eval);
    return u;
  }

  void probe() {
    const OperatorSpec op = OperatorSpec::parse(o_.op);
    ProbeOptions options;
    options.samples = o_.samples;
    options.seed = o_.seed;
    options.threads = o_.threads;
    Json config = base("probe");
    config.update({{"op", op.to_string()}, {"rho", o_.rho}, {"n", o_.n}, {"samples", options.samples},
                   {"seed", options.seed}, {"certify_margin", options.certify_margin},
                   {"modulus_levels", options.modulus_levels}, {"modulus_samples", options.modulus_samples}});
    config_ = config;
    kind_ = "probe";
    emit("probe", config, to_json(ellipticity_probe(op, o_.rho, o_.n, options)));
  }

  void solve() {
    Json config = base("solve");
    GridFunction geometry;
    if (!o_.input.empty()) {
      config["grid"] = o_.input;
      geometry = load_grid(o_.input);
    } else {
      require(!o_.box.empty(), ErrorKind::usage, "solve needs --grid <file> or --box with --h");
      config["box"] = o_.box;
      config["h"] = o_.h;
      geometry = box_grid(o_.box, o_.h);
    }
    require(!o_.f.empty() && !o_.g.empty(), ErrorKind::usage, "solve needs --f and --g");
    SolveConfig sc;
    sc.stencil_directions = o_.directions;
    sc.tol = o_.tol;
    sc.max_iters = o_.max_iters;
    sc.damping = o_.damping;
    sc.delta_guard = o_.delta;
    sc.threads = o_.threads;
    config.update({{"eq", o_.eq}, {"f", o_.f}, {"g", o_.g}, {"out", o_.out_path}, {"log", o_.log},
                   {"stencil_directions", sc.stencil_directions}, {"tol", sc.tol}, {"max_iters", sc.max_iters},
                   {"damping", sc.damping}, {"delta_guard", sc.delta_guard}});
    config_ = config;
    kind_ = "solve";
    const GridFunction f = field_on(geometry, o_.f, "--f");
    const GridFunction g = field_on(geometry, o_.g, "--g");
    SolveResult r;
    if (o_.eq == "linear") {
      const std::vector<double> a = o_.A.empty() ? std::vector<double>{1, 0, 1} : parse_double_list(o_.A);
      const std::vector<double> b = o_.b.empty() ? std::vector<double>{0, 0} : parse_double_list(o_.b);
      require(a.size() == 3 && b.size() == 2, ErrorKind::invalid_input, "--A expects a11,a12,a22 and --b expects b1,b2");
      config_["A"] = a;
      config_["b"] = b;
      r = solve_linear(SymMatrixd::from_dense(Eigen::Matrix2d{{a[0], a[1]}, {a[1], a[2]}}), Eigen::Vector2d(b[0], b[1]),
                       f, g, sc);
    } else if (o_.eq == "pucci") {
      require(o_.sign == "plus" || o_.sign == "minus", ErrorKind::usage, "--sign must be plus or minus");
      config_.update({{"lambda", o_.lambda}, {"Lambda", o_.Lambda}, {"sign", o_.sign}});
      r = solve_pucci(o_.lambda, o_.Lambda, o_.sign == "plus" ? PucciSign::plus : PucciSign::minus, f, g, sc);
    } else if (o_.eq == "ma") {
      r = solve_monge_ampere(f, g, sc);
    } else {
      r = solve_mean_curvature(f, g, sc);
    }
    if (!o_.out_path.empty()) save_grid(o_.out_path, r.u);
    emit("solve", config_, to_json(r));
  }

  void fit() {
    Json config = base("fit");
    require(!o_.point.empty(), ErrorKind::usage, "fit needs --point");
    const Eigen::VectorXd x0 = parse_point(o_.point);
    std::optional<FitConstraint> constraint;
    if (!o_.constrain.empty()) {
      const auto [op, f0] = parse_constraint(o_.constrain);
      constraint = FitConstraint{op, f0};
    }
    config.update({{"point", to_json(x0)}, {"degree", o_.degree}, {"radius", o_.radius}, {"lattice", o_.lattice},
                   {"constrain", o_.constrain.empty() ? Json(nullptr) : Json(o_.constrain)}});
    SampledFunction samples;
    if (!o_.fixture.empty()) {
      config["fixture"] = o_.fixture;
      samples = fixture(o_.fixture).sample(ball_lattice(x0, o_.radius, o_.lattice));
    } else {
      samples = input_grid(config).sample();
    }
    config_ = config;
    kind_ = "fit";
    emit("fit", config, to_json(minimax_fit(samples, x0, o_.radius, o_.degree, constraint)));
  }

  void analyze() {
    Json config = base("analyze");
    require(!o_.point.empty(), ErrorKind::usage, "analyze needs --point");
    const Eigen::VectorXd x0 = parse_point(o_.point);
    CampanatoConfig cc;
    cc.k = o_.degree;
    cc.eta = o_.eta;
    cc.r0 = o_.r0;
    cc.levels = o_.levels;
    cc.lattice = o_.lattice;
    cc.norm_bound = o_.norm_bound;
    cc.threads = o_.threads;
    if (!o_.constrain.empty()) {
      const auto [op, f0] = parse_constraint(o_.constrain);
      cc.constraint = FitConstraint{op, f0};
    }
    config.update({{"point", to_json(x0)}, {"degree", cc.k}, {"eta", cc.eta}, {"r0", cc.r0}, {"levels", cc.levels},
                   {"lattice", cc.lattice},
                   {"constrain", o_.constrain.empty() ? Json(nullptr) : Json(o_.constrain)},
                   {"norm_bound", cc.norm_bound ? Json(*cc.norm_bound) : Json(nullptr)},
                   {"csv", o_.csv}});
    std::vector<double> radii;
    for (int m = 0; m <= cc.levels; ++m) radii.push_back(cc.r0 * std::pow(cc.eta, m));
    RegularityReport report;
    std::vector<std::pair<double, double>> osc;
    if (!o_.fixture.empty()) {
      config["fixture"] = o_.fixture;
      config_ = config;
      kind_ = "regularity";
      const AnalyticFunction u = fixture(o_.fixture);
      report = campanato_table(u, x0, cc);
      osc = oscillation_profile(u, x0, radii);
    } else {
      require(!o_.input.empty(), ErrorKind::usage, "analyze needs --input <grid> or --fixture");
      config["input"] = o_.input;
      config_ = config;
      kind_ = "regularity";
      const GridFunction u = load_grid(o_.input);
      report = campanato_table(u, x0, cc);
      osc = oscillation_profile(u, x0, radii);
    }
    if (!o_.csv.empty()) {
      std::ofstream os(o_.csv);
      require(static_cast<bool>(os), ErrorKind::invalid_input, "cannot write " + o_.csv);
      write_campanato_csv(os, report, osc);
    }
    Json payload = to_json(report);
    Json profile = Json::array();
    for (const auto& [r, v] : osc) profile.push_back({r, v});
    payload["oscillation"] = profile;
    payload["oscillation_slope"] = log_log_slope(osc);
    emit("regularity", config_, payload);
  }

  void check() {
    Json config = base("check");
    const OperatorSpec op = OperatorSpec::parse(o_.op);
    require(!o_.f.empty(), ErrorKind::usage, "check needs --f");
    ViscosityOptions vo;
    vo.side = parse_side(o_.side);
    vo.tol = o_.vtol;
    vo.rho = o_.vrho;
    vo.slopes = o_.slopes;
    vo.inflation = o_.inflation;
    vo.threads = o_.threads;
    config.update({{"op", op.to_string()}, {"f", o_.f}, {"side", to_string(vo.side)}, {"tol", vo.tol},
                   {"rho", vo.rho ? Json(*vo.rho) : Json(nullptr)}, {"slopes", vo.slopes},
                   {"inflation", vo.inflation}});
    const GridFunction u = input_grid(config);
    config_ = config;
    kind_ = "viscosity";
    const GridFunction f = field_on(u, o_.f, "--f");
    emit("viscosity", config_, to_json(check_viscosity(u, op, f, vo)));
  }

  void abp() {
    Json config = base("abp");
    require(!o_.f.empty(), ErrorKind::usage, "abp needs --f");
    config.update({{"f", o_.f}, {"lambda", o_.lambda}, {"Lambda", o_.Lambda}, {"b0", o_.b0},
                   {"envelope", o_.envelope}, {"contact", o_.contact}});
    const GridFunction u = input_grid(config);
    config_ = config;
    kind_ = "abp";
    const GridFunction f = field_on(u, o_.f, "--f");
    const AbpReport report = abp_check(u, f, o_.lambda, o_.Lambda, o_.b0);
    if (!o_.envelope.empty() || !o_.contact.empty()) {
      const EnvelopeResult env = lower_convex_envelope(u);
      if (!o_.envelope.empty()) save_grid(o_.envelope, env.restrict_to_domain(env.gamma));
      if (!o_.contact.empty()) {
        GridFunction c = u.like();
        const std::vector<char> on = env.contact_on_domain();
        for (int i = 0; i < c.size(); ++i) c[i] = on[i] ? 1.0 : 0.0;
        save_grid(o_.contact, c);
      }
    }
    emit("abp", config_, to_json(report));
  }

  void normalize() {
    Json config = base("normalize");
    require(!o_.h_list.empty(), ErrorKind::usage, "normalize needs --h <list>");
    const std::vector<double> hs = parse_double_list(o_.h_list);
    SectionOptions so;
    so.rays = o_.rays;
    so.domain_radius = o_.domain_radius;
    config.update({{"h", hs}, {"rays", so.rays}, {"domain_radius", so.domain_radius}});
    std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&, double)> sec;
    int n = 0;
    std::optional<AnalyticFunction> analytic;
    std::optional<GridFunction> grid;
    if (!o_.fixture.empty()) {
      config["fixture"] = o_.fixture;
      analytic = fixture(o_.fixture);
      n = analytic->dim;
      sec = [&](const Eigen::VectorXd& x0, double h) { return section(*analytic, x0, h, so); };
    } else {
      require(!o_.input.empty(), ErrorKind::usage, "normalize needs --fixture or --input");
      config["input"] = o_.input;
      grid = load_grid(o_.input);
      n = grid->dim();
      sec = [&](const Eigen::VectorXd& x0, double h) { return section(*grid, x0, h, so); };
    }
    const Eigen::VectorXd x0 = o_.point.empty() ? Eigen::VectorXd::Zero(n) : parse_point(o_.point);
    config["point"] = to_json(x0);
    config_ = config;
    kind_ = "normalize";
    Json sections = Json::array();
    for (double h : hs) sections.push_back(to_json(john_normalize(sec(x0, h), h, n)));
    emit("normalize", config_, {{"sections", sections}});
  }

  void fixtures_list() {
    for (const auto& name : fixture_names()) {
      const AnalyticFunction u = fixture(example_spec(name));
      out_ << Json{{"kind", "fixture"}, {"name", name}, {"example", u.spec()}, {"dim", u.dim},
                   {"op", u.op ? Json(u.op->to_string()) : Json(nullptr)}, {"description", u.description}}
                  .dump()
           << '\n';
    }
  }

  void fixtures_eval() {
    require(!o_.fixture.empty() && !o_.point.empty(), ErrorKind::usage, "fixtures eval needs --fixture and --point");
    const AnalyticFunction u = fixture(o_.fixture);
    const Eigen::VectorXd x = parse_point(o_.point);
    require(x.size() == u.dim, ErrorKind::invalid_input, "--point dimension does not match the fixture");
    Json config = base("fixtures eval");
    config.update({{"fixture", u.spec()}, {"point", to_json(x)}});
    config_ = config;
    kind_ = "fixture";
    Json payload{{"value", u.eval(x)}, {"singular_distance", u.singular_distance(x)}};
    if (u.singular_distance(x) > 0) {
      payload["gradient"] = to_json(u.grad(x));
      payload["hessian"] = to_json(u.hess(x));
      if (u.op) {
        payload["op"] = u.op->to_string();
        payload["rhs"] = u.rhs(x);
        payload["residual"] = u.residual(x);
      }
    }
    emit("fixture", config_, payload);
  }

  /// Config and kind of the record being produced, for error reports.
  Json config_;
  std::string kind_;

 private:
  std::ostream& out_;
  const Options& o_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.threads = default_threads();
  CLI::App app{"Numerical experiments for locally uniformly elliptic equations", "nelliptic"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "Worker threads (default NELLIPTIC_THREADS or 1)")->check(CLI::PositiveNumber);

  auto* probe = app.add_subcommand("probe", "Measure ellipticity and structure constants of an operator");
  probe->add_option("--op", o.op, "Operator spec, e.g. mc, pucci+:1:2, sigma:2")->required();
  probe->add_option("--rho", o.rho, "Probe radius")->capture_default_str();
  probe->add_option("--n", o.n, "Dimension")->capture_default_str();
  probe->add_option("--samples", o.samples)->capture_default_str();
  probe->add_option("--seed", o.seed)->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Solve a Dirichlet problem on a grid");
  solve->add_option("--eq", o.eq, "linear, pucci, ma or mc")
      ->check(CLI::IsMember({"linear", "pucci", "ma", "mc"}))
      ->capture_default_str();
  solve->add_option("--grid", o.input, "Grid file giving the domain");
  solve->add_option("--box", o.box, "lo,hi or lo1,hi1,lo2,hi2");
  solve->add_option("--h", o.h, "Grid spacing");
  solve->add_option("--f", o.f, "Right-hand side: grid file or expression");
  solve->add_option("--g", o.g, "Boundary data: grid file or expression");
  solve->add_option("--out", o.out_path, "Write the solution grid here");
  solve->add_option("--log", o.log, "Append the report record to this JSON-lines file");
  solve->add_option("--A", o.A, "linear: a11,a12,a22 (default identity)");
  solve->add_option("--b", o.b, "linear: drift b1,b2 (default 0)");
  solve->add_option("--lambda", o.lambda)->capture_default_str();
  solve->add_option("--Lambda", o.Lambda)->capture_default_str();
  solve->add_option("--sign", o.sign, "pucci: plus or minus")->capture_default_str();
  solve->add_option("--directions", o.directions, "Wide stencil directions")->capture_default_str();
  solve->add_option("--tol", o.tol)->capture_default_str();
  solve->add_option("--max-iters", o.max_iters)->capture_default_str();
  solve->add_option("--damping", o.damping)->capture_default_str();
  solve->add_option("--delta", o.delta, "mc: small-data guard")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Minimax polynomial fit on one ball");
  auto* analyze = app.add_subcommand("analyze", "Campanato decay table and exponent estimate at a point");
  for (auto* sub : {fit, analyze}) {
    sub->add_option("--input", o.input, "Grid file");
    sub->add_option("--fixture", o.fixture, "Fixture name:theta");
    sub->add_option("--point", o.point, "Comma-separated coordinates");
    sub->add_option("--degree", o.degree)->capture_default_str();
    sub->add_option("--lattice", o.lattice, "Samples per half-axis for analytic inputs")->capture_default_str();
    sub->add_option("--constrain", o.constrain, "<op>:<f0>");
  }
  fit->add_option("--radius", o.radius)->capture_default_str();
  fit->add_option("--box", o.box);
  fit->add_option("--h", o.h);
  analyze->add_option("--eta", o.eta)->capture_default_str();
  analyze->add_option("--r0", o.r0)->capture_default_str();
  analyze->add_option("--levels", o.levels)->capture_default_str();
  analyze->add_option("--norm-bound", o.norm_bound);
  analyze->add_option("--csv", o.csv, "Write r,E,osc here");

  auto* check = app.add_subcommand("check", "Discrete viscosity sub/supersolution test");
  auto* abp = app.add_subcommand("abp", "ABP maximum principle quantities");
  for (auto* sub : {check, abp}) {
    sub->add_option("--input", o.input, "Grid file");
    sub->add_option("--fixture", o.fixture, "Sample a fixture instead (with --box and --h)");
    sub->add_option("--box", o.box);
    sub->add_option("--h", o.h);
    sub->add_option("--f", o.f, "Right-hand side: grid file or expression");
  }
  check->add_option("--op", o.op)->required();
  check->add_option("--side", o.side, "sub, super or both")->capture_default_str();
  check->add_option("--tol", o.vtol)->capture_default_str();
  check->add_option("--rho", o.vrho, "Bound on admissible test functions");
  check->add_option("--slopes", o.slopes)->capture_default_str();
  check->add_option("--inflation", o.inflation)->capture_default_str();
  abp->add_option("--lambda", o.lambda)->capture_default_str();
  abp->add_option("--Lambda", o.Lambda)->capture_default_str();
  abp->add_option("--b0", o.b0)->capture_default_str();
  abp->add_option("--envelope", o.envelope, "Write the convex envelope of -u^- here");
  abp->add_option("--contact", o.contact, "Write the contact set (1 on contact, 0 elsewhere) here");

  auto* normalize = app.add_subcommand("normalize", "Sections and their John normalization");
  normalize->add_option("--fixture", o.fixture);
  normalize->add_option("--input", o.input);
  normalize->add_option("--point", o.point, "Default: origin");
  normalize->add_option("--h", o.h_list, "Comma-separated section heights");
  normalize->add_option("--rays", o.rays)->capture_default_str();
  normalize->add_option("--domain-radius", o.domain_radius)->capture_default_str();

  auto* fixtures = app.add_subcommand("fixtures", "Closed-form fixtures");
  fixtures->require_subcommand(1);
  auto* list = fixtures->add_subcommand("list");
  auto* eval = fixtures->add_subcommand("eval");
  eval->add_option("--fixture", o.fixture)->required();
  eval->add_option("--point", o.point)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage;
  }

  Command cmd(out, o);
  try {
    if (*probe) cmd.probe();
    else if (*solve) cmd.solve();
    else if (*fit) cmd.fit();
    else if (*analyze) cmd.analyze();
    else if (*check) cmd.check();
    else if (*abp) cmd.abp();
    else if (*normalize) cmd.normalize();
    else if (*list) cmd.fixtures_list();
    else if (*eval) cmd.fixtures_eval();
    return exit_ok;
  } catch (const Error& e) {
    const bool usage =
        e.kind() == ErrorKind::usage || e.kind() == ErrorKind::invalid_input || e.kind() == ErrorKind::parameter;
    if (e.kind() == ErrorKind::usage) err << "error: " << e.what() << "\n\n" << app.help();
    else err << "error: " << e.what() << '\n';
    if (!cmd.kind_.empty()) cmd.emit(cmd.kind_, cmd.config_, {{"error", to_json(e)}});
    return usage ? exit_usage : exit_numeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (!cmd.kind_.empty()) cmd.emit(cmd.kind_, cmd.config_, {{"error", {{"kind", "internal"}, {"message", e.what()}}}});
    return exit_numeric;
  }
}

}  // namespace nelliptic
