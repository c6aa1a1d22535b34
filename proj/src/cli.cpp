#include "negcurv/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "negcurv/convergence.hpp"
#include "negcurv/errors.hpp"
#include "negcurv/field_io.hpp"
#include "negcurv/instability.hpp"
#include "negcurv/scenarios.hpp"

namespace negcurv::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

using Schema = std::map<std::string, std::string>;

const std::map<std::string, Schema>& schemas() {
    static const std::map<std::string, Schema> s{
        {"curvature",
         {{"surface.id", "hyperbolic-paraboloid"},
          {"surface.n", "2"},
          {"surface.epsilon", "0.1"},
          {"surface.coefficients", ""},
          {"grid.points", "64"},
          {"grid.lo", "-1"},
          {"grid.hi", "1"}}},
        {"linearize-check",
         {{"surface.id", "hyperbolic-paraboloid"},
          {"surface.n", "3"},
          {"surface.epsilon", "0.1"},
          {"surface.coefficients", ""},
          {"grid.points", "33"},
          {"grid.lo", "-0.5"},
          {"grid.hi", "0.5"},
          {"check.epsilon", "1e-5"},
          {"check.tol", "1e-6"}}},
        {"solve-linear",
         {{"scenario.id", "manufactured"},
          {"scenario.n", "2"},
          {"grid.points", "129"},
          {"solver.form", "linearized"},
          {"solver.cfl_limit", "1"},
          {"energy.weights", "1,2,4,8,16,32,64,128,256"}}},
        {"solve-nonlinear",
         {{"grid.points", "128"},
          {"surface.epsilon", "0.01"},
          {"solver.tol", "1e-9"},
          {"solver.max_iterations", "10"},
          {"solver.admissibility_bound", "1"},
          {"smoothing.widths", ""}}},
        {"instability",
         {{"instability.delta", "0.005"},
          {"instability.zeta_extent", "1"},
          {"instability.zeta_bar_extent", "8"},
          {"instability.tol", "0.01"},
          {"growth.t_min", "1"},
          {"growth.t_max", "4"},
          {"cross_check.enabled", "false"},
          {"cross_check.t0", "2"},
          {"cross_check.t1", "3.5"},
          {"cross_check.points", "129"}}},
        {"localization",
         {{"scenario.n", "3"},
          {"grid.per_unit", "32"},
          {"perturbation.kind", "tautological"},
          {"perturbation.tol_factor", "5"}}},
        {"convergence",
         {{"check.id", "conformal-identity"},
          {"check.levels", "16,32,64"},
          {"check.dim", "3"},
          {"check.samples", "3"}}},
    };
    return s;
}

const Schema& common_schema() {
    static const Schema s{{"run.seed", "1"}};
    return s;
}

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorKind::ConfigError, message); }

bool known_key(const Schema& schema, const std::string& key) {
    return schema.count(key) != 0 || common_schema().count(key) != 0;
}

/// Line of `section.key` in an INI file, 0 if not found.
int line_of(const std::filesystem::path& file, const std::string& key) {
    std::ifstream in(file);
    std::string line, section;
    for (int number = 1; std::getline(in, line); ++number) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == ';' || line[first] == '#') continue;
        if (line[first] == '[') {
            const auto close = line.find(']', first);
            section = line.substr(first + 1, close - first - 1);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string name = line.substr(first, eq - first);
        name.erase(name.find_last_not_of(" \t") + 1);
        if ((section.empty() ? name : section + "." + name) == key) return number;
    }
    return 0;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_number(const std::string& key, const std::string& text) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(x))
        config_error("key '" + key + "': expected a number, got '" + text + "'");
    return x;
}

// ---------------------------------------------------------------------------
// Artifacts

class Artifacts {
public:
    explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) config_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream os(dir_ / name, std::ios::binary);
        if (!os) config_error("cannot write " + (dir_ / name).string());
        os << content;
        if (!os) config_error("write failed for " + (dir_ / name).string());
        files_[name] = sha256_hex(content);
        sizes_[name] = content.size();
    }

    void json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

    nlohmann::json listing() const {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [name, hash] : files_) out.push_back({{"path", name}, {"sha256", hash}, {"bytes", sizes_.at(name)}});
        return out;
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> files_;
    std::map<std::string, std::size_t> sizes_;
};

/// Columns of equal length with a header row.
std::string columns_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& cols) {
    std::ostringstream os;
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << "\n";
    const std::size_t rows = cols.empty() ? 0 : cols[0].size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << format_double(cols[c][r]);
        os << "\n";
    }
    return os.str();
}

/// Grid coordinates followed by one column per field.
std::string fields_csv(const GridSpec& grid, const std::vector<std::string>& names,
                       const std::vector<const ScalarField*>& fields) {
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols(grid.dim + fields.size());
    for (int a = 0; a < grid.dim; ++a) header.push_back("x" + std::to_string(a));
    header.insert(header.end(), names.begin(), names.end());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Point x = grid.position(p);
        for (int a = 0; a < grid.dim; ++a) cols[a].push_back(x[a]);
        for (std::size_t f = 0; f < fields.size(); ++f) cols[grid.dim + f].push_back((*fields[f])[p]);
    }
    return columns_csv(header, cols);
}

std::string mask_csv(const GridSpec& grid, const Mask& mask) {
    std::ostringstream os;
    write_mask_csv(os, grid, mask);
    return os.str();
}

/// Outcome of a subcommand: the report body and whether its verdict passed.
struct Outcome {
    nlohmann::json report;
    bool passed = true;
    bool numerical_failure = false;
};

// ---------------------------------------------------------------------------
// Subcommands

CatalogSurface surface_from(const RunConfig& c, int n) {
    const std::string& id = c.text("surface.id");
    if (id == "hyperbolic-paraboloid") return CatalogSurface::hyperbolic_paraboloid(n);
    if (id == "quadratic-form") {
        const std::vector<double> coeffs = c.numbers("surface.coefficients");
        if (static_cast<int>(coeffs.size()) != n)
            config_error("key 'surface.coefficients': expected " + std::to_string(n) + " entries");
        return CatalogSurface::quadratic_form(coeffs);
    }
    if (id == "perturbed-paraboloid") {
        BumpFunction b;
        b.dim = n;
        for (int k = 0; k < n; ++k) {
            b.center[k] = 0.1 * k;
            b.radius[k] = 0.8;
        }
        return CatalogSurface::perturbed_paraboloid(n, c.number("surface.epsilon"), b);
    }
    config_error("key 'surface.id': unknown surface '" + id + "'");
}

GridSpec cube_from(const RunConfig& c, int n) {
    const long pts = c.integer("grid.points");
    if (pts < 5) config_error("key 'grid.points': need at least 5 points");
    return GridSpec::cube(n, c.number("grid.lo"), c.number("grid.hi"), static_cast<std::size_t>(pts));
}

int dimension(const RunConfig& c, const std::string& key) {
    const long n = c.integer(key);
    if (n != 2 && n != 3) config_error("key '" + key + "': n must be 2 or 3");
    return static_cast<int>(n);
}

double sup_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
}

Outcome run_curvature(const RunConfig& c, Artifacts& out) {
    const int n = dimension(c, "surface.n");
    const GraphSurface s = GraphSurface::analytic(cube_from(c, n), surface_from(c, n));
    const GridSpec& g = s.grid();
    const ScalarField k = psi(s);
    const ScalarField kfd = psi(GraphSurface::finite_difference(s.u()));
    ScalarField fd_error(g);
    for (std::size_t p = 0; p < g.size(); ++p) fd_error[p] = kfd[p] - k[p];

    Outcome o;
    o.report = {{"points", g.size()}, {"fd_max_error", sup_abs(fd_error)}};
    std::vector<std::string> names{"K", "K_fd"};
    std::vector<const ScalarField*> fields{&k, &kfd};
    ScalarField closed(g), closed_error(g);
    if (c.text("surface.id") == "hyperbolic-paraboloid") {
        for (std::size_t p = 0; p < g.size(); ++p) {
            const Point x = g.position(p);
            double r2 = 0.0;
            for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
            closed[p] = -std::pow(1.0 + r2, -0.5 * (n + 2));
            closed_error[p] = k[p] - closed[p];
        }
        const double err = sup_abs(closed_error);
        o.report["closed_form_max_error"] = err;
        o.passed = err <= 1e-12;
        names.insert(names.end(), {"K_closed", "error"});
        fields.insert(fields.end(), {&closed, &closed_error});
    } else {
        o.report["closed_form_max_error"] = nullptr;
    }
    out.write("curvature.csv", fields_csv(g, names, fields));
    return o;
}

/// Random polynomial of total degree <= 4, coefficients in [-1, 1].
ScalarField random_polynomial(const GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coefficient(-1.0, 1.0);
    std::vector<std::pair<std::array<int, 3>, double>> terms;
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; a + b <= 4; ++b)
            for (int d = 0; a + b + d <= 4; ++d) {
                if (g.dim < 3 && d > 0) continue;
                terms.push_back({{a, b, d}, coefficient(rng)});
            }
    return ScalarField::sample(g, [&](const Point& x) {
        double s = 0.0;
        for (const auto& [e, k] : terms) s += k * std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
        return s;
    });
}

Outcome run_linearize_check(const RunConfig& c, Artifacts& out) {
    const int n = dimension(c, "surface.n");
    const GraphSurface exact = GraphSurface::analytic(cube_from(c, n), surface_from(c, n));
    const GridSpec& g = exact.grid();
    const GraphSurface s = GraphSurface::finite_difference(exact.u());
    const ScalarField v = random_polynomial(g, c.seed());
    const double eps = c.number("check.epsilon");
    if (!(eps > 0.0)) config_error("key 'check.epsilon': must be positive");

    // Frechet check: central difference of psi along v against the linearized operator.
    ScalarField up = s.u(), um = s.u();
    for (std::size_t p = 0; p < g.size(); ++p) {
        up[p] += eps * v[p];
        um[p] -= eps * v[p];
    }
    const ScalarField kp = psi(GraphSurface::finite_difference(up));
    const ScalarField km = psi(GraphSurface::finite_difference(um));
    const ScalarField lv = apply_linearized(s, v);
    ScalarField frechet(g);
    for (std::size_t p = 0; p < g.size(); ++p) frechet[p] = (kp[p] - km[p]) / (2 * eps) - lv[p];
    const double lv_scale = std::max(sup_abs(lv), 1e-300);
    const double frechet_rel = sup_abs(frechet) / lv_scale;

    // Geometric identity on the analytic surface, interior points only.
    ScalarField identity(g);
    const ScalarField lva = apply_linearized(exact, v);
    if (n >= 3) {
        const ScalarField box = apply_box(lorentzian_metric(exact), v);
        const ScalarField f = conformal_factor(exact);
        for (std::size_t p = 0; p < g.size(); ++p) identity[p] = box[p] - f[p] * lva[p];
    } else {
        const ScalarField box = apply_box(hessian(exact), v);
        const VectorField b = first_order_coeffs_n2(exact);
        const VectorField dv = gradient(v);
        const ScalarField k = psi(exact);
        for (std::size_t p = 0; p < g.size(); ++p)
            identity[p] = k[p] * (box[p] + b(p, 0) * dv(p, 0) + b(p, 1) * dv(p, 1)) - lva[p];
    }
    double identity_max = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const MultiIndex idx = g.unravel(p);
        bool inner = true;
        for (int a = 0; a < n; ++a) inner = inner && idx[a] >= 2 && idx[a] + 2 < g.points[a];
        if (inner) identity_max = std::max(identity_max, std::abs(identity[p]));
    }

    out.write("linearize.csv", fields_csv(g, {"v", "Lv", "frechet_defect", "identity_defect"},
                                          {&v, &lv, &frechet, &identity}));
    Outcome o;
    o.report = {{"frechet_relative_defect", frechet_rel},
                {"identity", n >= 3 ? "conformal" : "first-order"},
                {"identity_max_defect", identity_max},
                {"h", g.spacing[0]}};
    o.passed = frechet_rel <= c.number("check.tol");
    return o;
}

OperatorForm form_from(const RunConfig& c) {
    const std::string& f = c.text("solver.form");
    if (f == "linearized") return OperatorForm::Linearized;
    if (f == "geometric") return OperatorForm::Geometric;
    config_error("key 'solver.form': expected 'linearized' or 'geometric', got '" + f + "'");
}

void write_energy(const LinearSolveReport& r, const std::vector<double>& weights, Artifacts& out, Outcome& o) {
    std::vector<std::vector<double>> trace(3);
    for (double a : weights) {
        const EnergyTrace e = energy(r.v, r.domain, a, &r.g, &r.initial_velocity);
        for (std::size_t j = 0; j < e.times.size(); ++j) {
            trace[0].push_back(a);
            trace[1].push_back(e.times[j]);
            trace[2].push_back(e.leaf_energy[j]);
        }
    }
    out.write("energy.csv", columns_csv({"a", "t", "E"}, trace));
    const EnergyEstimateReport est = verify_energy_estimate(r, weights);
    out.write("energy_constants.csv", columns_csv({"a", "C_emp"}, {est.weights, est.constants}));
    o.report["energy"] = est.to_json();
}

Outcome run_solve_linear(const RunConfig& c, Artifacts& out) {
    const std::string& scenario = c.text("scenario.id");
    const long pts = c.integer("grid.points");
    if (pts < 9) config_error("key 'grid.points': need at least 9 points");
    const std::vector<double> weights = c.numbers("energy.weights");
    if (weights.empty()) config_error("key 'energy.weights': need at least one weight");
    Outcome o;
    if (scenario == "manufactured") {
        const ManufacturedLinear m = manufactured_linear(static_cast<std::size_t>(pts));
        LinearSolveOptions opt;
        opt.form = form_from(c);
        opt.cfl_limit = c.number("solver.cfl_limit");
        const LinearSolveReport r = solve_linear(m.u, m.f, m.data, m.domain, opt);
        const GridSpec& g = r.v.grid();
        const ScalarField exact = ScalarField::sample(g, ManufacturedLinear::exact);
        out.write("solution.csv", fields_csv(g, {"v", "v_exact"}, {&r.v, &exact}));
        out.write("domain_mask.csv", mask_csv(g, r.domain.domain_mask()));
        o.report = {{"scenario", scenario}, {"h", g.spacing[1]}, {"dt", g.spacing[0]},
                    {"max_error", m.error(r.v)}, {"cfl_ratio", r.cfl_ratio}};
        write_energy(r, weights, out, o);
        o.passed = o.report["energy"]["stabilized_weight"] != nullptr;
    } else if (scenario == "blob") {
        const FiniteSpeedReport r = finite_speed_check(dimension(c, "scenario.n"), static_cast<std::size_t>(pts));
        const GridSpec& g = r.solve.v.grid();
        out.write("solution.csv", fields_csv(g, {"v"}, {&r.solve.v}));
        out.write("cone_mask.csv", mask_csv(g, r.cone));
        out.write("domain_mask.csv", mask_csv(g, r.solve.domain.domain_mask()));
        o.report = r.to_json();
        o.report["scenario"] = scenario;
        write_energy(r.solve, weights, out, o);
        o.passed = r.outside_relative <= 1e-10;
    } else {
        config_error("key 'scenario.id': expected 'manufactured' or 'blob', got '" + scenario + "'");
    }
    return o;
}

Outcome run_solve_nonlinear(const RunConfig& c, Artifacts& out) {
    const long pts = c.integer("grid.points");
    if (pts < 16) config_error("key 'grid.points': need at least 16 points");
    const ManufacturedNewton m = manufactured_newton(static_cast<std::size_t>(pts), c.number("surface.epsilon"));
    NonlinearProblem p = m.problem();
    p.tol = c.number("solver.tol");
    p.max_iterations = static_cast<int>(c.integer("solver.max_iterations"));
    p.admissibility_bound = c.number("solver.admissibility_bound");
    p.smoothing.widths = c.numbers("smoothing.widths");
    const IterationReport r = solve_nonlinear(p);

    std::vector<std::vector<double>> hist(4);
    for (std::size_t k = 0; k < r.residuals.size(); ++k) {
        hist[0].push_back(static_cast<double>(k));
        hist[1].push_back(r.residuals[k]);
        hist[2].push_back(k < r.corrections.size() ? r.corrections[k] : 0.0);
        hist[3].push_back(k < r.signature_preserved.size() && !r.signature_preserved[k] ? 0.0 : 1.0);
    }
    out.write("residuals.csv", columns_csv({"iteration", "residual", "correction", "signature_preserved"}, hist));
    const GridSpec& g = r.u.grid();
    out.write("solution.csv", fields_csv(g, {"u", "u_star"}, {&r.u, &m.star.u()}));

    double cauchy = 0.0;
    for (std::size_t i = 0; i < 2 * g.leaf_size(); ++i) cauchy = std::max(cauchy, std::abs(r.u[i] - m.base.u()[i]));
    bool contracting = true;
    for (std::size_t k = 0; k + 1 < r.residuals.size(); ++k) contracting = contracting && r.residuals[k + 1] <= r.residuals[k] / 10;

    Outcome o;
    o.report = r.to_json();
    o.report["max_error"] = m.error(r.u);
    o.report["cauchy_defect"] = cauchy;
    o.report["contracting"] = contracting;
    o.numerical_failure = !r.converged;
    o.passed = r.converged;
    return o;
}

Outcome run_instability(const RunConfig& c, Artifacts& out) {
    const NullGrid grid = solve_double_null(c.number("instability.delta"), c.number("instability.zeta_extent"),
                                            c.number("instability.zeta_bar_extent"));
    const GrowthReport growth = verify_growth_bound(grid, c.number("instability.tol"));

    std::vector<std::vector<double>> line(3);
    if (grid.covers(0.0, 1.0)) {
        const std::size_t j = grid.index(1.0);
        for (std::size_t i = 0; i < grid.nbar; ++i) {
            const double zb = grid.zeta_bar(i);
            line[0].push_back(zb);
            line[1].push_back(grid(i, j));
            line[2].push_back(zb * zb / 3.0);
        }
    }
    out.write("growth.csv", columns_csv({"zeta_bar", "v", "bound"}, line));

    const double t0 = c.number("growth.t_min"), t1 = c.number("growth.t_max");
    const TxResample tx = to_txcoords(grid, tx_grid_for(grid, t1));
    out.write("sup.csv", columns_csv({"t", "sup_abs"}, {tx.times, tx.sup_abs}));

    Outcome o;
    o.report = {{"growth", growth.to_json()},
                {"sup_strictly_increasing", tx.strictly_increasing(t0, t1)},
                {"t_min", t0},
                {"t_max", t1}};
    if (grid.covers(8.0, 1.0)) o.report["v_8_1"] = grid.interpolate(8.0, 1.0);
    o.passed = growth.ok() && tx.strictly_increasing(t0, t1);
    if (c.flag("cross_check.enabled")) {
        const CrossCheckReport x = cross_check_linear(grid, c.number("cross_check.t0"), c.number("cross_check.t1"),
                                                      static_cast<std::size_t>(c.integer("cross_check.points")));
        o.report["cross_check"] = x.to_json();
    }
    return o;
}

Outcome run_localization(const RunConfig& c, Artifacts& out) {
    const int n = dimension(c, "scenario.n");
    const long per_unit = c.integer("grid.per_unit");
    if (per_unit < 8 || per_unit > 1024) config_error("key 'grid.per_unit': expected 8..1024");
    const LocalizationScenario s = localization_scenario(n, static_cast<int>(per_unit));
    const std::string& kind = c.text("perturbation.kind");
    ScalarField eta;
    if (kind == "tautological") {
        eta = tautological_eta(s.u, s.phi, 0.0, true, s.domain);
    } else if (kind == "generic") {
        eta = s.phi;
    } else {
        config_error("key 'perturbation.kind': expected 'tautological' or 'generic', got '" + kind + "'");
    }
    const double tol = c.number("perturbation.tol_factor") * s.h * s.h;
    const KernelScan scan = scan_kernel(eta, s.u, s.domain);
    const LocalizationReport loc = check_support_localization(eta, s.u, s.domain, tol, scan.orthogonal(tol));

    std::vector<std::vector<double>> table(4);
    for (std::size_t i = 0; i < scan.samples.size(); ++i) {
        table[0].push_back(static_cast<double>(i));
        table[1].push_back(scan.samples[i].value);
        table[2].push_back(scan.samples[i].normalization);
        table[3].push_back(scan.samples[i].relative);
    }
    out.write("pairings.csv", columns_csv({"sample", "value", "normalization", "relative"}, table));
    const GridSpec& g = s.u.grid();
    out.write("support_mask.csv", mask_csv(g, loc.support));
    out.write("future_mask.csv", mask_csv(g, loc.future));
    out.write("past_mask.csv", mask_csv(g, loc.past));
    out.write("domain_mask.csv", mask_csv(g, s.domain.domain_mask()));
    out.write("solution.csv", fields_csv(g, {"eta", "v"}, {&eta, &loc.v}));

    Outcome o;
    o.report = {{"kind", kind}, {"h", s.h}, {"tol", tol}, {"kernel", scan.to_json()}, {"localization", loc.to_json()}};
    o.passed = loc.forward_ok && loc.diamond_ok;
    return o;
}

Outcome run_convergence(const RunConfig& c, Artifacts& out) {
    ConvergenceOptions opt;
    opt.levels.clear();
    for (double l : c.numbers("check.levels")) {
        if (l != std::floor(l)) config_error("key 'check.levels': levels must be integers");
        opt.levels.push_back(static_cast<int>(l));
    }
    opt.seed = c.seed();
    opt.dim = static_cast<int>(c.integer("check.dim"));
    opt.samples = static_cast<int>(c.integer("check.samples"));
    const ConvergenceReport r = convergence_harness(c.text("check.id"), opt);
    std::vector<std::vector<double>> table(3);
    for (const ConvergenceLevel& l : r.levels) {
        table[0].push_back(l.level);
        table[1].push_back(l.h);
        table[2].push_back(l.error);
    }
    out.write("convergence.csv", columns_csv({"level", "h", "error"}, table));
    Outcome o;
    o.report = r.to_json();
    o.passed = r.passed();
    return o;
}

using Handler = Outcome (*)(const RunConfig&, Artifacts&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> h{
        {"curvature", run_curvature},           {"linearize-check", run_linearize_check},
        {"solve-linear", run_solve_linear},     {"solve-nonlinear", run_solve_nonlinear},
        {"instability", run_instability},       {"localization", run_localization},
        {"convergence", run_convergence},
    };
    return h;
}

nlohmann::json versions() {
    return {{"negcurv", kVersion},
            {"compiler", __VERSION__},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"openssl", OPENSSL_VERSION_TEXT},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

/// Shorthand flags of each subcommand and the keys they set.
const std::map<std::string, std::vector<std::pair<std::string, std::string>>>& shorthands() {
    static const std::map<std::string, std::vector<std::pair<std::string, std::string>>> s{
        {"curvature", {{"surface", "surface.id"}, {"n", "surface.n"}, {"grid", "grid.points"}}},
        {"linearize-check", {{"surface", "surface.id"}, {"n", "surface.n"}, {"grid", "grid.points"}}},
        {"solve-linear", {{"scenario", "scenario.id"}, {"n", "scenario.n"}, {"grid", "grid.points"}}},
        {"solve-nonlinear", {{"grid", "grid.points"}}},
        {"instability", {{"delta", "instability.delta"}}},
        {"localization", {{"n", "scenario.n"}, {"perturbation", "perturbation.kind"}}},
        {"convergence", {{"check", "check.id"}, {"levels", "check.levels"}, {"dim", "check.dim"}}},
    };
    return s;
}

}  // namespace

std::vector<std::string> subcommands() {
    std::vector<std::string> out;
    for (const auto& [name, schema] : schemas()) out.push_back(name);
    return out;
}

const std::string& RunConfig::text(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) config_error("key '" + key + "' is not defined for " + subcommand);
    return it->second;
}

double RunConfig::number(const std::string& key) const { return parse_number(key, text(key)); }

long RunConfig::integer(const std::string& key) const {
    const std::string& t = text(key);
    long x = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || ptr != t.data() + t.size())
        config_error("key '" + key + "': expected an integer, got '" + t + "'");
    return x;
}

bool RunConfig::flag(const std::string& key) const {
    const std::string& t = text(key);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    config_error("key '" + key + "': expected true or false, got '" + t + "'");
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& item : split(text(key), ',')) out.push_back(parse_number(key, item));
    return out;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values) j[k] = v;
    return {{"subcommand", subcommand}, {"values", j}};
}

RunConfig load_config(const std::string& subcommand, const std::optional<std::filesystem::path>& config_file,
                      const std::vector<std::pair<std::string, std::string>>& overrides,
                      const std::filesystem::path& out_dir) {
    const auto it = schemas().find(subcommand);
    if (it == schemas().end()) config_error("unknown subcommand '" + subcommand + "'");
    const Schema& schema = it->second;
    RunConfig c;
    c.subcommand = subcommand;
    c.out_dir = out_dir;
    c.values = schema;
    c.values.insert(common_schema().begin(), common_schema().end());

    if (config_file) {
        if (!std::filesystem::exists(*config_file)) config_error("config file not found: " + config_file->string());
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(config_file->string(), tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            config_error(e.filename() + ":" + std::to_string(e.line()) + ": " + e.message());
        }
        for (const auto& [section, body] : tree) {
            if (body.empty()) {
                config_error(config_file->string() + ":" + std::to_string(line_of(*config_file, section)) +
                             ": key '" + section + "' must sit inside a section");
            }
            for (const auto& [key, value] : body) {
                const std::string full = section + "." + key;
                if (!known_key(schema, full)) {
                    config_error(config_file->string() + ":" + std::to_string(line_of(*config_file, full)) +
                                 ": unknown key '" + full + "' for " + subcommand);
                }
                c.values[full] = trim(value.data());
            }
        }
    }
    for (const auto& [key, value] : overrides) {
        if (!known_key(schema, key)) config_error("unknown key '" + key + "' for " + subcommand);
        c.values[key] = trim(value);
    }
    return c;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prescribed negative Gauss curvature: solvers and verification experiments", "negcurv"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    struct Common {
        std::string config;
        std::vector<std::string> sets;
        std::string out = "negcurv-out";
        std::map<std::string, std::string> flags;
    };
    std::map<std::string, Common> common;
    for (const std::string& name : subcommands()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        Common& cm = common[name];
        sub->add_option("--config", cm.config, "INI file with [section] key = value entries");
        sub->add_option("--set", cm.sets, "override section.key=value")->allow_extra_args(false);
        sub->add_option("--out", cm.out, "output directory")->capture_default_str();
        for (const auto& [flag, key] : shorthands().at(name))
            sub->add_option("--" + flag, cm.flags[key], "sets " + key);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << e.what() << "\n\n" << app.help();
        return 1;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const Common& cm = common[name];
    const auto started = std::chrono::steady_clock::now();
    try {
        std::vector<std::pair<std::string, std::string>> overrides;
        for (const auto& [key, value] : cm.flags)
            if (!value.empty()) overrides.emplace_back(key, value);
        for (const std::string& s : cm.sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) config_error("--set expects section.key=value, got '" + s + "'");
            overrides.emplace_back(trim(s.substr(0, eq)), s.substr(eq + 1));
        }
        const std::optional<std::filesystem::path> file =
            cm.config.empty() ? std::nullopt : std::optional<std::filesystem::path>(cm.config);
        const RunConfig config = load_config(name, file, overrides, cm.out);

        Artifacts artifacts(config.out_dir);
        Outcome o = handlers().at(name)(config, artifacts);
        o.report["subcommand"] = name;
        o.report["passed"] = o.passed;
        artifacts.json("config.json", config.to_json());
        artifacts.json("report.json", o.report);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const nlohmann::json manifest{{"subcommand", name},    {"config", config.to_json()["values"]},
                                      {"versions", versions()}, {"wall_clock_seconds", seconds},
                                      {"results", o.report},    {"files", artifacts.listing()}};
        std::ofstream(config.out_dir / "manifest.json") << manifest.dump(2) << "\n";

        out << name << ": " << (o.passed ? "passed" : "failed") << " (" << config.out_dir.string() << ")\n";
        if (o.numerical_failure) {
            err << "numerical failure: the iteration did not converge\n";
            return 2;
        }
        return o.passed ? 0 : 1;
    } catch (const Error& e) {
        err << "negcurv " << name << ": " << e.what() << "\n";
        return e.is_numerical() ? 2 : 1;
    } catch (const std::exception& e) {
        err << "negcurv " << name << ": " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace negcurv::cli
