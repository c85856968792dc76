// curvflow command-line tool: builds prescribed-curvature fields from fluid
// states, diagnoses them, verifies shear-flow embeddings, checks the
// momentum/curvature consistency identities and runs the Couette onset
// computations. See README.md for the file formats.

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curvflow/continuum.hpp"
#include "curvflow/dynamics.hpp"
#include "curvflow/embedding.hpp"
#include "curvflow/fields.hpp"
#include "curvflow/geometry.hpp"
#include "curvflow/io.hpp"
#include "curvflow/onset.hpp"
#include "curvflow/poisson.hpp"
#include "curvflow/version.hpp"

namespace {

using curvflow::json;

struct Config {
    double reynolds = 2900.0;   // Reichardt oil experiment
    double anchor_x3 = 0.8;
    double anchor_u1 = 0.4;
    double plate_speed = 1.0;
    double poisson_tol = 1e-10;
    double tau = 1e-10;
    int fd_order = 2;

    json to_json() const {
        json j;
        j["reynolds"] = reynolds;
        j["anchor"] = {anchor_x3, anchor_u1};
        j["plate_speed"] = plate_speed;
        j["poisson_tol"] = poisson_tol;
        j["tau"] = tau;
        j["fd_order"] = fd_order;
        return j;
    }
};

/// Defaults < config file (CURVFLOW_CONFIG) < command-line flags.
Config load_config() {
    Config cfg;
    const char* path = std::getenv("CURVFLOW_CONFIG");
    if (!path || !*path) return cfg;
    std::ifstream in(path);
    if (!in) throw curvflow::validation_error(std::string("config file not readable: ") + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw curvflow::validation_error(std::string("config file parse error: ") + e.what());
    }
    if (j.contains("reynolds")) cfg.reynolds = j["reynolds"].get<double>();
    if (j.contains("anchor")) {
        const auto a = j["anchor"].get<std::array<double, 2>>();
        cfg.anchor_x3 = a[0];
        cfg.anchor_u1 = a[1];
    }
    if (j.contains("plate_speed")) cfg.plate_speed = j["plate_speed"].get<double>();
    if (j.contains("poisson_tol")) cfg.poisson_tol = j["poisson_tol"].get<double>();
    if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
    if (j.contains("fd_order")) cfg.fd_order = j["fd_order"].get<int>();
    return cfg;
}

void emit_report(const curvflow::ReportBuilder& rb, const std::string& path) {
    const std::string text = rb.finalize().dump(2) + "\n";
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        std::ofstream out(path);
        if (!out) throw curvflow::validation_error("cannot open report path '" + path + "'");
        out << text;
    }
}

std::array<double, 2> parse_pair(const std::string& s, const std::string& what) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw curvflow::validation_error(what + ": expected two comma-separated values, got '" + s + "'");
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw curvflow::validation_error(what + ": bad number in '" + s + "'");
    }
}

json definiteness_to_json(const curvflow::DefinitenessReport& rep, bool per_node) {
    json j;
    j["tau"] = rep.tau;
    j["all_nondegenerate"] = rep.all_nondegenerate;
    j["all_positive_definite"] = rep.all_positive_definite;
    j["min_scaled_det"] = rep.min_scaled_det;
    std::size_t nondeg = 0, pd = 0;
    double min_l2 = std::numeric_limits<double>::infinity();
    double min_det = std::numeric_limits<double>::infinity(), max_det = -min_det;
    for (const auto& nd : rep.nodes) {
        nondeg += nd.nondegenerate;
        pd += nd.positive_definite;
        min_l2 = std::min(min_l2, nd.eigenvalues[1]);
        min_det = std::min(min_det, nd.det);
        max_det = std::max(max_det, nd.det);
    }
    j["nodes"] = rep.nodes.size();
    j["nondegenerate_nodes"] = nondeg;
    j["positive_definite_nodes"] = pd;
    j["min_lambda2"] = min_l2;
    j["det_range"] = {min_det, max_det};
    if (per_node) {
        json rows = json::array();
        for (const auto& nd : rep.nodes) {
            json r;
            r["det"] = nd.det;
            r["minor1"] = nd.minor1;
            r["minor2"] = nd.minor2;
            r["nondegenerate"] = nd.nondegenerate;
            r["positive_definite"] = nd.positive_definite;
            r["eigenvalues"] = nd.eigenvalues;
            rows.push_back(std::move(r));
        }
        j["per_node"] = std::move(rows);
    }
    return j;
}

const std::vector<std::string> rhat_components = {"r1212", "r1313", "r2323", "r1213", "r1223", "r1323"};
const std::vector<std::string> metric_components = {"g11", "g22", "g33", "g12", "g13", "g23"};

curvflow::FieldData curvature_to_fielddata(const curvflow::Curvature3& R) {
    curvflow::FieldData fd;
    fd.grid = R.grid;
    fd.components = rhat_components;
    fd.fields.assign(R.comp.begin(), R.comp.end());
    return fd;
}

curvflow::Curvature3 curvature_from_fielddata(const curvflow::FieldData& fd) {
    curvflow::Curvature3 R(fd.grid);
    for (std::size_t c = 0; c < 6; ++c) R.comp[c] = fd.field(rhat_components[c]);
    return R;
}

/// Checks that the PD verdict from the minors matches all-eigenvalues-positive.
bool definiteness_self_check(const curvflow::DefinitenessReport& rep, double tau) {
    for (const auto& nd : rep.nodes) {
        const double scale = std::max({std::abs(nd.eigenvalues[0]), std::abs(nd.eigenvalues[2]), 1e-300});
        const bool eig_pd = nd.eigenvalues[2] > tau * scale;
        const bool ambiguous = std::abs(nd.eigenvalues[2]) <= 2.0 * tau * scale; // within tolerance of the boundary
        if (!ambiguous && eig_pd != nd.positive_definite) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

int run_rhat(const Config& cfg, const std::string& state_path, const std::string& model_name,
             double gamma, const std::string& p_path, const std::string& law_path,
             const std::string& deformation_path, const std::string& out_path,
             const std::string& report_path, const std::string& encoding, bool per_node) {
    using namespace curvflow;
    const FieldData state_file = read_field_file(state_path);
    ScalarField rho = state_file.field("rho");
    VectorField u(state_file.field("u1"), state_file.field("u2"), state_file.field("u3"));

    std::optional<StressModel> model;
    if (model_name == "euler-i" || model_name == "ns") {
        if (p_path.empty()) throw validation_error("model " + model_name + " requires --p <fieldfile>");
        const FieldData pf = read_field_file(p_path);
        ScalarField p = pf.field("p");
        require_same_grid(p.grid, rho.grid, "rhat --p");
        model = model_name == "ns" ? StressModel::navier_stokes(std::move(p), gamma)
                                   : StressModel::euler_incompressible(std::move(p));
    } else if (model_name == "euler-c") {
        if (law_path.empty()) throw validation_error("model euler-c requires --pressure-law <csv>");
        std::ifstream in(law_path);
        if (!in) throw validation_error("cannot open pressure law '" + law_path + "'");
        std::string line;
        std::vector<double> rr, pp;
        if (!std::getline(in, line) || line.substr(0, 6) != "rho,p")
            throw validation_error("pressure law csv must start with header 'rho,p'");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto pair = parse_pair(line, "pressure law row");
            rr.push_back(pair[0]);
            pp.push_back(pair[1]);
        }
        model = StressModel::euler_compressible(PressureLaw(std::move(rr), std::move(pp)));
    } else if (model_name == "neo") {
        if (deformation_path.empty()) throw validation_error("model neo requires --deformation <fieldfile>");
        const FieldData ff = read_field_file(deformation_path);
        Matrix3Field F(ff.grid);
        const char* names[9] = {"f11", "f12", "f13", "f21", "f22", "f23", "f31", "f32", "f33"};
        for (int c = 0; c < 9; ++c) F.comp[static_cast<std::size_t>(c)] = ff.field(names[c]);
        require_same_grid(F.grid, rho.grid, "rhat --deformation");
        // For the neo-Hookean law the state's rho is the reference density.
        ScalarField current = density_from_deformation(rho, F);
        model = StressModel::neo_hookean(std::move(F));
        rho = std::move(current);
    } else {
        throw validation_error("unknown model '" + model_name + "' (expected euler-c|euler-i|ns|neo)");
    }

    ContinuumState state = continuum_state(*model, std::move(rho), std::move(u));
    RhatBuild built = build_rhat(state);
    const DefinitenessReport rep = definiteness_report(built.matrix, cfg.tau);

    write_field_file(out_path, curvature_to_fielddata(built.tensor),
                     encoding == "binary" ? FieldEncoding::binary : FieldEncoding::csv);

    ReportBuilder rb("rhat", cfg.to_json());
    json& sec = rb.section("build_rhat");
    sec["grid"] = grid_to_json(state.rho.grid);
    sec["model"] = model_name;
    sec["max_divergence"] = state.max_divergence;
    sec["divergence_flagged"] = state.divergence_flagged;
    sec["output"] = out_path;
    rb.section("definiteness_report") = definiteness_to_json(rep, per_node);

    // matrix -> tensor -> matrix must be the identity bit for bit
    bool roundtrip = true;
    const Curvature3 back = rhat_curvature_from_matrix(built.matrix);
    for (std::size_t c = 0; c < 6 && roundtrip; ++c)
        roundtrip = back.comp[c].values == built.tensor.comp[c].values;
    rb.self_check("matrix_tensor_roundtrip_bit_exact", roundtrip);
    rb.self_check("minors_match_eigenvalue_signs", definiteness_self_check(rep, cfg.tau));
    emit_report(rb, report_path);
    return 0;
}

int run_diagnose(const Config& cfg, const std::string& rhat_path, const std::string& report_path,
                 bool per_node) {
    using namespace curvflow;
    const Curvature3 R = curvature_from_fielddata(read_field_file(rhat_path));
    const RhatField M = rhat_matrix_from_curvature(R);
    const DefinitenessReport rep = definiteness_report(M, cfg.tau);

    ReportBuilder rb("diagnose", cfg.to_json());
    rb.section("definiteness_report") = definiteness_to_json(rep, per_node);
    rb.self_check("minors_match_eigenvalue_signs", definiteness_self_check(rep, cfg.tau));
    emit_report(rb, report_path);
    return 0;
}

int run_jet(const Config& cfg, const std::vector<double>& r0v, const std::string& grid_spec,
            const std::string& out_path, const std::string& report_path) {
    using namespace curvflow;
    if (r0v.size() != 6)
        throw validation_error("--rhat-at-point needs 6 values (r1212,r1313,r2323,r1213,r1223,r1323)");
    const auto gs = parse_pair(grid_spec, "--grid");
    const int n = static_cast<int>(gs[0]);
    const double h = gs[1];
    if (n < 5 || n % 2 == 0) throw validation_error("--grid: node count must be odd and >= 5");

    CurvatureValues r0;
    for (std::size_t c = 0; c < 6; ++c) r0.c[c] = r0v[c];
    const JetMetric jet = normal_jet_metric(r0);

    auto residual_at = [&](double spacing) {
        const Grid3 grid = Grid3::centered_cube(n, spacing);
        const Metric3 g = jet.sample(grid);
        const Curvature3 R = riemann_curvature(g, cfg.fd_order);
        const std::size_t center = grid.index(n / 2, n / 2, n / 2);
        double err = 0.0;
        for (std::size_t c = 0; c < 6; ++c) err = std::max(err, std::abs(R.comp[c].values[center] - r0.c[c]));
        return std::pair<Metric3, double>(g, err);
    };

    const auto [g_h, err_h] = residual_at(h);
    const auto [g_h2, err_h2] = residual_at(0.5 * h);

    write_field_file(out_path, {g_h.grid, metric_components,
                                std::vector<ScalarField>(g_h.g.begin(), g_h.g.end())});

    ReportBuilder rb("jet", cfg.to_json());
    json& sec = rb.section("normal_jet_metric");
    sec["r0"] = r0.c;
    sec["spd_radius"] = jet.spd_radius;
    sec["grid"] = grid_to_json(g_h.grid);
    sec["output"] = out_path;
    json& rt = rb.section("riemann_curvature");
    rt["roundtrip_residual_h"] = err_h;
    rt["roundtrip_residual_h_over_2"] = err_h2;
    rt["reduction_factor"] = err_h2 > 0.0 ? err_h / err_h2 : std::numeric_limits<double>::infinity();

    const Sym3 origin_metric = jet.evaluate({0.0, 0.0, 0.0});
    bool identity = true;
    for (int i = 1; i <= 3 && identity; ++i)
        for (int j = i; j <= 3 && identity; ++j)
            identity = origin_metric(i, j) == (i == j ? 1.0 : 0.0);
    rb.self_check("metric_is_identity_at_origin", identity);
    rb.self_check("roundtrip_second_order", err_h2 <= err_h / 3.5 + 1e-12);
    emit_report(rb, report_path);
    return 0;
}

int run_poisson(const Config& cfg, const std::string& u_path, const std::string& out_path,
                const std::string& report_path, const std::string& encoding) {
    using namespace curvflow;
    const FieldData uf = read_field_file(u_path);
    const VectorField u(uf.field("u1"), uf.field("u2"), uf.field("u3"));
    const PoissonResult result = solve_pressure_poisson(u, cfg.poisson_tol);

    write_field_file(out_path, {result.pressure.grid, {"p"}, {result.pressure}},
                     encoding == "binary" ? FieldEncoding::binary : FieldEncoding::csv);

    ReportBuilder rb("poisson", cfg.to_json());
    json& sec = rb.section("solve_pressure_poisson");
    sec["grid"] = grid_to_json(u.grid);
    sec["iterations"] = result.iterations;
    sec["relative_residual"] = result.relative_residual;
    sec["max_norm_residual"] = result.max_norm_residual;
    sec["pressure_mean"] = result.pressure.mean();
    sec["output"] = out_path;
    rb.self_check("residual_below_tolerance", result.max_norm_residual <=
                                                  cfg.poisson_tol * std::max(1.0, momentum_flux_rhs(u).max_abs()));
    rb.self_check("zero_mean_gauge", std::abs(result.pressure.mean()) <= 1e-12 * std::max(1.0, result.pressure.max_abs()));
    emit_report(rb, report_path);
    return 0;
}

int run_embed(const Config& cfg, const std::string& profile_path, double B, const std::string& axis_name,
              const std::string& out_prefix, const std::string& report_path) {
    using namespace curvflow;
    const ProfileSamples prof = read_profile_csv(profile_path);
    const double hs = prof.spacing();
    for (std::size_t k = 0; k + 1 < prof.x3.size(); ++k)
        if (std::abs((prof.x3[k + 1] - prof.x3[k]) - hs) > 1e-9 * std::max(1.0, hs))
            throw validation_error("embed: profile must be uniformly spaced");
    const ShearAxis axis = axis_name == "x2" ? ShearAxis::x2 : ShearAxis::x3;

    const ShearEmbedding emb =
        build_shear_embedding(std::span<const double>(prof.u1), prof.x3.front(), hs, B, axis);
    const FundamentalForms forms = fundamental_forms(emb, cfg.fd_order);

    // Verification grid: profile axis matches the samples, 5 nodes across.
    const int pd = axis == ShearAxis::x2 ? 2 : 3;
    std::array<int, 3> dims{5, 5, 5};
    dims[static_cast<std::size_t>(pd - 1)] = emb.count();
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    origin[static_cast<std::size_t>(pd - 1)] = emb.s0;
    const Grid3 grid(dims, {hs, hs, hs}, origin,
                     {Boundary::clamped, Boundary::clamped, Boundary::clamped});
    const InducedMetricResult induced = induced_metric(emb, grid, cfg.fd_order);
    const TargetMetric target = TargetMetric::of(emb);
    const double E = energy(target, grid);

    double h_roundtrip = 0.0;
    for (int m = 0; m < emb.count(); ++m)
        h_roundtrip = std::max(h_roundtrip, std::abs(forms.h4[static_cast<std::size_t>(m)] -
                                                     emb.u1sq[static_cast<std::size_t>(m)]));

    if (!out_prefix.empty()) {
        std::ofstream out(out_prefix + "_embedding.csv");
        if (!out) throw validation_error("embed: cannot open '" + out_prefix + "_embedding.csv'");
        out << "s,f,fprime,u1sq,h4\n";
        for (int m = 0; m < emb.count(); ++m) {
            const auto mi = static_cast<std::size_t>(m);
            out << format_double17(emb.s_at(m)) << ',' << format_double17(emb.f[mi]) << ','
                << format_double17(emb.fp[mi]) << ',' << format_double17(emb.u1sq[mi]) << ','
                << format_double17(forms.h4[mi]) << '\n';
        }
    }

    ReportBuilder rb("embed", cfg.to_json());
    json& sec = rb.section("build_shear_embedding");
    sec["B"] = B;
    sec["axis"] = axis_name;
    sec["samples"] = emb.count();
    sec["spacing"] = hs;
    sec["max_abs_fprime"] = *std::max_element(emb.fp.begin(), emb.fp.end(),
                                              [](double a, double b) { return std::abs(a) < std::abs(b); });
    sec["defining_relation"] = "f'' = -u1^2 sqrt(B^2 + f'^2), f(0) = f'(0) = 0";
    sec["fprime_closed_form"] = "f' = -B sinh(int_0^s u1^2)";
    sec["arctan_variant"] = "f' = B arctan(-B int_0^s u1^2): recorded only; it does not satisfy the defining relation and is not used";
    json& im = rb.section("induced_metric");
    im["grid"] = grid_to_json(grid);
    im["isometry_residual"] = induced.max_residual;
    json& ff = rb.section("fundamental_forms");
    ff["orthonormality_residual"] = forms.orthonormality_residual;
    ff["gauss_lhs_max"] = forms.gauss_lhs_max;
    ff["gauss_residual"] = forms.gauss_residual;
    ff["codazzi_residual"] = forms.codazzi_residual;
    ff["h4_roundtrip_max_error"] = h_roundtrip;
    rb.section("energy")["box_integral_tr_gstar"] = E;

    rb.self_check("normal_frame_orthonormal", forms.orthonormality_residual <= 1e-10);
    rb.self_check("gauss_lhs_exactly_zero", forms.gauss_lhs_max == 0.0);
    rb.self_check("codazzi_exactly_zero", forms.codazzi_residual == 0.0);
    emit_report(rb, report_path);
    return 0;
}

int run_dynamics_check(const Config& cfg, const std::string& metric_name, double h, double eps,
                       const std::string& report_path) {
    using namespace curvflow;
    auto closure = [&](double, double x2, double x3) {
        Sym3 g = Sym3::identity();
        if (metric_name == "sin-perturbation") g(1, 1) += eps * std::sin(x2) * std::sin(x3);
        else if (metric_name != "delta")
            throw validation_error("dynamics-check: unknown metric '" + metric_name +
                                   "' (expected delta|sin-perturbation)");
        return g;
    };

    auto discrepancy_at = [&](double spacing) {
        const int n = std::max(8, static_cast<int>(std::lround(2.0 * M_PI / spacing)));
        const Grid3 grid({5, n, n}, {spacing, 2.0 * M_PI / n, 2.0 * M_PI / n}, {0.0, 0.0, 0.0},
                         {Boundary::periodic, Boundary::periodic, Boundary::periodic});
        const Metric3 g = Metric3::sample(grid, closure);
        const Christoffel3 gm = christoffel(g, cfg.fd_order);
        const Curvature3 R = riemann_curvature(g, cfg.fd_order);
        const VectorField A = momentum_rhs(gm, R);
        const VectorField F = flux_divergence_of_curvature(R, cfg.fd_order);
        double maxA = 0.0, disc = 0.0;
        for (int i = 1; i <= 3; ++i) {
            maxA = std::max(maxA, A[i].max_abs());
            for (std::size_t m = 0; m < A[i].values.size(); ++m)
                disc = std::max(disc, std::abs(A[i].values[m] + F[i].values[m]));
        }
        return std::pair<double, double>(maxA, disc);
    };

    const auto [maxA_h, disc_h] = discrepancy_at(h);
    const auto [maxA_h2, disc_h2] = discrepancy_at(0.5 * h);

    ReportBuilder rb("dynamics-check", cfg.to_json());
    json& sec = rb.section("momentum_rhs");
    sec["metric"] = metric_name;
    sec["eps"] = eps;
    sec["max_abs_A_h"] = maxA_h;
    sec["max_abs_A_h_over_2"] = maxA_h2;
    json& fc = rb.section("flux_divergence_of_curvature");
    fc["identity"] = "momentum_rhs + divergence of the curvature rows -> 0 under refinement";
    fc["discrepancy_h"] = disc_h;
    fc["discrepancy_h_over_2"] = disc_h2;
    fc["reduction_factor"] = disc_h2 > 0.0 ? disc_h / disc_h2 : std::numeric_limits<double>::infinity();
    rb.self_check("bianchi_consistency_second_order", disc_h2 <= disc_h / 3.5 + 1e-13);
    emit_report(rb, report_path);
    return 0;
}

int run_onset_fit(const Config& cfg, const std::string& anchor_spec, double reynolds,
                  const std::string& report_path) {
    using namespace curvflow;
    double x3 = cfg.anchor_x3, u1 = cfg.anchor_u1;
    if (!anchor_spec.empty()) {
        const auto a = parse_pair(anchor_spec, "--anchor");
        x3 = a[0];
        u1 = a[1];
    }
    const ProfileFit fit = fit_profile(x3, u1, reynolds);

    ReportBuilder rb("onset fit", cfg.to_json());
    json& sec = rb.section("fit_profile");
    sec["anchor"] = {fit.anchor_x3, fit.anchor_u1};
    sec["reynolds"] = fit.reynolds;
    json exact;
    exact["a"] = fit.a;
    exact["sqrt_p0"] = fit.sqrt_p0;
    exact["p0"] = fit.p0;
    sec["exact"] = std::move(exact);
    json paper;
    paper["a"] = fit.paper_a;
    paper["sqrt_p0"] = fit.paper_sqrt_p0;
    paper["p0"] = fit.paper_p0;
    sec["paper_rounding"] = std::move(paper);

    rb.self_check("anchor_reproduced",
                  std::abs(critical_profile_eval(fit.a, fit.anchor_x3) - fit.anchor_u1) <= 1e-12);
    rb.self_check("a_equals_sqrt_p0_times_re",
                  std::abs(fit.sqrt_p0 * fit.reynolds - fit.a) <= 4e-16 * std::abs(fit.a));
    emit_report(rb, report_path);
    return 0;
}

int run_onset_profile(double a, int n, const std::string& out_path) {
    using namespace curvflow;
    if (n < 2) throw validation_error("onset profile: need --n >= 2");
    std::vector<double> x3(static_cast<std::size_t>(n)), u1(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double x = -1.0 + 2.0 * k / (n - 1);
        x3[static_cast<std::size_t>(k)] = x;
        u1[static_cast<std::size_t>(k)] = critical_profile_eval(a, x);
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << "x3,u1\n";
        for (int k = 0; k < n; ++k)
            std::cout << format_double17(x3[static_cast<std::size_t>(k)]) << ','
                      << format_double17(u1[static_cast<std::size_t>(k)]) << '\n';
    } else {
        write_profile_csv(out_path, x3, u1);
    }
    return 0;
}

int run_onset_scan(const Config& cfg, const std::string& profile_path, double p0,
                   const std::string& range_spec, const std::string& out_path,
                   const std::string& report_path) {
    using namespace curvflow;
    const ProfileSamples prof = read_profile_csv(profile_path);
    const std::vector<double> u1p = profile_derivative(prof.x3, prof.u1);
    const auto range = parse_pair(range_spec, "--gamma-range");
    const TransitionScan scan = transition_scan(prof.x3, prof.u1, u1p, p0, range[0], range[1]);

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw validation_error("onset scan: cannot open '" + out_path + "'");
        out << "x3,u1,u1p,gamma_crit,in_range\n";
        for (const auto& pt : scan.points)
            out << format_double17(pt.x3) << ',' << format_double17(pt.u1) << ',' << format_double17(pt.u1p)
                << ',' << (pt.in_range ? format_double17(pt.gamma_crit) : "nan") << ','
                << (pt.in_range ? 1 : 0) << '\n';
    }

    ReportBuilder rb("onset scan", cfg.to_json());
    json& sec = rb.section("transition_scan");
    sec["p0"] = p0;
    sec["gamma_range"] = {range[0], range[1]};
    sec["points"] = scan.points.size();
    sec["in_range"] = scan.in_range_count;
    if (scan.in_range_count) {
        sec["min_gamma_crit"] = scan.min_gamma;
        sec["min_gamma_crit_at_x3"] = scan.min_gamma_x3;
        sec["max_gamma_crit"] = scan.max_gamma;
        sec["max_gamma_crit_at_x3"] = scan.max_gamma_x3;
    }
    if (!out_path.empty()) sec["output"] = out_path;

    // bisection vs the closed form, the two independent routes
    bool agree = true;
    for (const auto& pt : scan.points) {
        if (!pt.in_range) continue;
        const double closed = critical_gamma(p0, pt.u1, pt.u1p);
        if (std::abs(closed - pt.gamma_crit) > 1e-10 * std::max(1.0, closed)) agree = false;
    }
    rb.self_check("bisection_matches_closed_form", agree);
    emit_report(rb, report_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvflow: fluid states to prescribed curvature, shear embeddings, Couette onset"};
    app.set_version_flag("--version", curvflow::version_string);
    app.require_subcommand(1);

    Config cfg;
    try {
        cfg = load_config();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    // rhat
    auto* rhat = app.add_subcommand("rhat", "Build the curvature field of a continuum state");
    std::string state_path, model_name, p_path, law_path, deformation_path;
    std::string out_path = "rhat_out.field", report_path, encoding = "csv";
    double gamma = 0.0;
    bool per_node = false;
    rhat->add_option("--state", state_path, "state field file (rho,u1,u2,u3)")->required();
    rhat->add_option("--model", model_name, "euler-c|euler-i|ns|neo")->required();
    rhat->add_option("--gamma", gamma, "viscosity for --model ns");
    rhat->add_option("--p", p_path, "pressure field file (component p)");
    rhat->add_option("--pressure-law", law_path, "csv rho,p table for --model euler-c");
    rhat->add_option("--deformation", deformation_path, "field file f11..f33 for --model neo");
    rhat->add_option("--out", out_path, "output curvature field file");
    rhat->add_option("--report", report_path, "report path (default stdout)");
    rhat->add_option("--encoding", encoding, "csv|binary payload");
    rhat->add_flag("--per-node", per_node, "include per-node diagnostics in the report");

    // diagnose
    auto* diagnose = app.add_subcommand("diagnose", "Definiteness diagnostics of a curvature field");
    std::string diag_rhat, diag_report;
    bool diag_per_node = false;
    diagnose->add_option("--rhat", diag_rhat, "curvature field file")->required();
    diagnose->add_option("--report", diag_report, "report path (default stdout)");
    diagnose->add_flag("--per-node", diag_per_node, "include per-node diagnostics");

    // jet
    auto* jet = app.add_subcommand("jet", "Quadratic metric jet for point curvature data");
    std::vector<double> jet_r0;
    std::string jet_grid = "9,0.05", jet_out = "jet_metric.field", jet_report;
    jet->add_option("--rhat-at-point", jet_r0, "6 values r1212,r1313,r2323,r1213,r1223,r1323")
        ->required()
        ->delimiter(',')
        ->expected(6);
    jet->add_option("--grid", jet_grid, "n,h: odd node count and spacing of the centered cube");
    jet->add_option("--out", jet_out, "output metric field file");
    jet->add_option("--report", jet_report, "report path (default stdout)");

    // poisson
    auto* poisson = app.add_subcommand("poisson", "Pressure from the incompressible momentum balance");
    std::string poisson_u, poisson_out = "pressure_out.field", poisson_report, poisson_encoding = "csv";
    poisson->add_option("--u", poisson_u, "velocity field file (u1,u2,u3), periodic grid")->required();
    poisson->add_option("--out", poisson_out, "output pressure field file");
    poisson->add_option("--report", poisson_report, "report path (default stdout)");
    poisson->add_option("--encoding", poisson_encoding, "csv|binary payload");

    // embed
    auto* embed = app.add_subcommand("embed", "Shear-flow embedding verification");
    std::string embed_profile, embed_axis = "x2", embed_prefix = "embed_out", embed_report;
    double embed_B = 1.0;
    embed->add_option("--profile", embed_profile, "profile csv (x3,u1)")->required();
    embed->add_option("--B", embed_B, "embedding scale B > 0")->required();
    embed->add_option("--axis", embed_axis, "profile axis: x2|x3");
    embed->add_option("--out-prefix", embed_prefix, "prefix for the embedding sample csv");
    embed->add_option("--report", embed_report, "report path (default stdout)");

    // dynamics-check
    auto* dyn = app.add_subcommand("dynamics-check", "Momentum/curvature consistency identity check");
    std::string dyn_metric = "sin-perturbation", dyn_report;
    double dyn_h = 0.1, dyn_eps = 0.01;
    dyn->add_option("--metric", dyn_metric, "delta|sin-perturbation");
    dyn->add_option("--h", dyn_h, "grid spacing (also checked at h/2)")->required();
    dyn->add_option("--eps", dyn_eps, "perturbation amplitude");
    dyn->add_option("--report", dyn_report, "report path (default stdout)");

    // onset
    auto* onset = app.add_subcommand("onset", "Couette onset computations");
    onset->require_subcommand(1);
    auto* ofit = onset->add_subcommand("fit", "Fit the critical profile to an anchor point");
    std::string fit_anchor, fit_report;
    double fit_re = cfg.reynolds;
    ofit->add_option("--anchor", fit_anchor, "x3,u1 anchor (default from config)");
    ofit->add_option("--re", fit_re, "Reynolds number");
    ofit->add_option("--report", fit_report, "report path (default stdout)");

    auto* oprof = onset->add_subcommand("profile", "Emit the critical profile as csv");
    double prof_a = 4.611;
    int prof_n = 101;
    std::string prof_out;
    oprof->add_option("--a", prof_a, "profile exponent")->required();
    oprof->add_option("--n", prof_n, "sample count on [-1, 1]");
    oprof->add_option("--out", prof_out, "output csv (default stdout)");

    auto* oscan = onset->add_subcommand("scan", "Per-point critical gamma scan of a profile");
    std::string scan_profile, scan_range, scan_out = "scan_out.csv", scan_report;
    double scan_p0 = 0.0;
    oscan->add_option("--profile", scan_profile, "profile csv (x3,u1)")->required();
    oscan->add_option("--p0", scan_p0, "end pressure")->required();
    oscan->add_option("--gamma-range", scan_range, "lo,hi bisection bracket")->required();
    oscan->add_option("--out", scan_out, "per-point csv output");
    oscan->add_option("--report", scan_report, "report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (rhat->parsed())
            return run_rhat(cfg, state_path, model_name, gamma, p_path, law_path, deformation_path,
                            out_path, report_path, encoding, per_node);
        if (diagnose->parsed()) return run_diagnose(cfg, diag_rhat, diag_report, diag_per_node);
        if (jet->parsed()) return run_jet(cfg, jet_r0, jet_grid, jet_out, jet_report);
        if (poisson->parsed()) return run_poisson(cfg, poisson_u, poisson_out, poisson_report, poisson_encoding);
        if (embed->parsed()) return run_embed(cfg, embed_profile, embed_B, embed_axis, embed_prefix, embed_report);
        if (dyn->parsed()) return run_dynamics_check(cfg, dyn_metric, dyn_h, dyn_eps, dyn_report);
        if (onset->parsed()) {
            if (ofit->parsed()) return run_onset_fit(cfg, fit_anchor, fit_re, fit_report);
            if (oprof->parsed()) return run_onset_profile(prof_a, prof_n, prof_out);
            if (oscan->parsed()) return run_onset_scan(cfg, scan_profile, scan_p0, scan_range, scan_out, scan_report);
        }
    } catch (const curvflow::validation_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const curvflow::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
