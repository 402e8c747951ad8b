#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <corner_spectrum/corner_spectrum.hpp>

using namespace corner;
using json = nlohmann::json;

namespace {

enum class Format { csv, svg, json };

enum Exit { ok = 0, usage = 1, contrast = 2, regime = 3, resolution = 4 };

struct RunConfig {
    double mu = std::numeric_limits<double>::quiet_NaN();
    double omega = pi / 2;
    double gamma = 0.0;
    std::vector<double> band{-0.1, 1.0, 5.0};
    int grid_t = 0;
    int grid_eta = 0;
    int grid_theta = 0;
    std::string out;
    Format format = Format::json;
    Settings settings;

    RadialGrid t_grid() const { return {settings.t_min, settings.t_max, grid_t ? grid_t : settings.grid_t}; }
    LineGrid line_grid() const { return {settings.eta_max, grid_eta ? grid_eta : settings.grid_eta}; }
    std::shared_ptr<const AngularGrid> angular() const {
        return std::make_shared<const AngularGrid>(omega, grid_theta ? grid_theta : settings.grid_theta,
                                                   settings.panels);
    }
    void require_mu() const {
        if (std::isnan(mu)) throw DomainError("--mu is required for this command");
    }
};

class UsageError : public Error {
public:
    using Error::Error;
};

/// Writes to --out when given, stdout otherwise.
template <class F>
void emit(const RunConfig& cfg, F&& write) {
    if (cfg.out.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream os(cfg.out, std::ios::binary);
    if (!os) throw UsageError("cannot open '" + cfg.out + "' for writing");
    write(os);
}

void require_format(const RunConfig& cfg, std::initializer_list<Format> allowed, const char* cmd) {
    for (auto f : allowed)
        if (f == cfg.format) return;
    throw UsageError(std::string(cmd) + ": output format not supported by this command");
}

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

// spectrum --------------------------------------------------------------

void cmd_spectrum(const RunConfig& cfg) {
    cfg.require_mu();
    require_format(cfg, {Format::json, Format::csv}, "spectrum");
    const Band band(cfg.band[0], cfg.band[1], cfg.band[2]);
    SpectrumOptions opts;
    opts.root_tolerance = cfg.settings.root_tolerance;
    const auto rep = find_spectrum(cfg.mu, cfg.omega, band, opts);
    if (cfg.format == Format::csv) {
        emit(cfg, [&](std::ostream& os) {
            os << "re,im,multiplicity,kernel_dim\n";
            for (const auto& r : rep.roots)
                os << io::format_double(r.lambda.real()) << ',' << io::format_double(r.lambda.imag()) << ','
                   << r.multiplicity << ',' << r.kernel_dim << '\n';
        });
        return;
    }
    json j;
    j["mu"] = cfg.mu;
    j["omega"] = cfg.omega;
    j["band"] = {{"re_min", band.re_min}, {"re_max", band.re_max}, {"im_max", band.im_max}};
    j["regime"] = std::string(to_string(rep.regime));
    j["roots"] = json::array();
    for (const auto& r : rep.roots)
        j["roots"].push_back({{"re", r.lambda.real()},
                              {"im", r.lambda.imag()},
                              {"multiplicity", r.multiplicity},
                              {"kernel_dim", r.kernel_dim}});
    if (CornerConfig(cfg.omega).is_right_angle() && cfg.mu < 0.0) {
        json cf;
        double worst = 0.0;
        for (const auto& r : rep.roots) worst = std::max(worst, std::abs(closed_form_determinant(r.lambda, cfg.mu, cfg.omega)));
        cf["max_determinant_at_roots"] = worst;
        if (rep.regime == Regime::IndexConjecturedYes || is_critical_endpoint(cfg.mu)) {
            const double l1 = lambda1(cfg.mu);
            double dist = std::numeric_limits<double>::infinity();
            for (const auto& r : rep.roots) dist = std::min(dist, std::abs(r.lambda - l1));
            cf["lambda1"] = l1;
            cf["distance_to_nearest_root"] = dist;
        } else {
            const double e = eta(cfg.mu);
            double dist = std::numeric_limits<double>::infinity();
            for (const auto& r : rep.roots) dist = std::min(dist, std::abs(r.lambda - cplx(0.0, e)));
            cf["eta"] = e;
            cf["distance_to_nearest_root"] = dist;
        }
        j["closed_form"] = cf;
    }
    emit(cfg, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

// sweep -----------------------------------------------------------------

struct SweepRow {
    double mu;
    std::string status;
    std::string regime;
    double lambda1 = std::numeric_limits<double>::quiet_NaN();
    double eta = std::numeric_limits<double>::quiet_NaN();
};

SweepRow sweep_row(double mu) {
    SweepRow r{mu, "ok", ""};
    if (mu == 0.0 || mu == -1.0) {
        r.status = "excluded";
        return r;
    }
    const Regime g = classify(mu);
    r.regime = std::string(to_string(g));
    if (g == Regime::EllipticContrast) return r;
    if (g == Regime::IndexConjecturedYes || is_critical_endpoint(mu)) r.lambda1 = lambda1(mu);
    if (g == Regime::IndexConjecturedNo) r.eta = eta(mu);
    return r;
}

std::string cell(double v) { return std::isnan(v) ? std::string() : io::format_double(v); }

void cmd_sweep(const RunConfig& cfg, double mu_min, double mu_max, double step) {
    require_format(cfg, {Format::csv, Format::svg, Format::json}, "sweep");
    if (!(step > 0.0)) throw UsageError("sweep: --step must be positive");
    if (!(mu_max >= mu_min)) throw UsageError("sweep: --mu-max must not be below --mu-min");
    if (!CornerConfig(cfg.omega).is_right_angle())
        throw UsageError("sweep: the closed-form exponents are tabulated at omega = pi/2 only");
    const int n = static_cast<int>(std::floor((mu_max - mu_min) / step + 1e-9)) + 1;
    std::vector<double> mus(n);
    for (int i = 0; i < n; ++i) {
        double m = mu_min + i * step;
        for (double special : {-3.0, -1.0, -1.0 / 3.0, 0.0})
            if (std::abs(m - special) <= 1e-9 * step) m = special;
        mus[i] = m;
    }
    std::vector<SweepRow> rows(n);
    const int workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < workers; ++w)
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (int i = w; i < n; i += workers) rows[i] = sweep_row(mus[i]);
        }));
    for (auto& j : jobs) j.get();

    if (cfg.format == Format::csv) {
        emit(cfg, [&](std::ostream& os) {
            os << "mu,lambda1,eta,regime,status\n";
            for (const auto& r : rows)
                os << io::format_double(r.mu) << ',' << cell(r.lambda1) << ',' << cell(r.eta) << ',' << r.regime << ','
                   << r.status << '\n';
        });
    } else if (cfg.format == Format::json) {
        json j = json::array();
        for (const auto& r : rows) {
            json e{{"mu", r.mu}, {"regime", r.regime}, {"status", r.status}};
            e["lambda1"] = std::isnan(r.lambda1) ? json() : json(r.lambda1);
            e["eta"] = std::isnan(r.eta) ? json() : json(r.eta);
            j.push_back(e);
        }
        emit(cfg, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    } else {
        svg::Plot plot("Leading exponents at the right angle", "mu", "exponent");
        svg::Series l1{"lambda1(mu)", "#1f77b4", {}}, et{"eta(mu)", "#d62728", {}};
        for (const auto& r : rows) {
            l1.points.emplace_back(r.mu, r.lambda1);
            et.points.emplace_back(r.mu, r.eta);
        }
        plot.add(std::move(l1));
        plot.add(std::move(et));
        if (mu_min <= critical_high && mu_max >= critical_low)
            plot.shade({std::max(mu_min, critical_low), std::min(mu_max, critical_high), "critical interval"});
        emit(cfg, [&](std::ostream& os) { plot.write(os); });
    }
}

// singular-function -----------------------------------------------------

void cmd_singular_function(const RunConfig& cfg, int index) {
    cfg.require_mu();
    require_format(cfg, {Format::csv, Format::svg, Format::json}, "singular-function");
    if (index < 0 || index > 1) throw UsageError("singular-function: --index must be 0 or 1");
    require_valid_contrast(cfg.mu);
    cplx lambda0 = 0.0;
    std::optional<AngularFunction> phi;
    if (index == 0) {
        phi = kernel_at(0.0, cfg.mu, cfg.omega).front();
        for (const auto& f : kernel_at(0.0, cfg.mu, cfg.omega))
            if (detail::is_constant(f, cfg.omega)) phi = f;
    } else {
        const auto inv = singular_term_inventory(cfg.mu, cfg.omega);
        if (!inv.h1_nontrivial_singular)
            throw RegimeError("singular-function: mu = " + io::format_double(cfg.mu) + " (" +
                              std::string(to_string(inv.regime)) + ") has no H1 singular term with Re lambda in (0, 1)");
        for (const auto& t : inv.terms)
            if (t.in_H1 && t.lambda0 != cplx(0.0) && !phi) {
                phi = t.angular;
                lambda0 = t.lambda0;
            }
    }
    const double nrm = phi->l2_norm(AngularGrid(cfg.omega, 128, 8));
    const int per_sector = cfg.settings.profile_nodes / 2;
    if (per_sector < 2) throw UsageError("profile_nodes must be at least 4");
    std::vector<std::pair<double, cplx>> samples;
    for (Sector s : {Sector::Minus, Sector::Plus}) {
        const double a = phi->sector_begin(s), b = phi->sector_end(s);
        for (int i = 0; i < per_sector; ++i) {
            const double th = i == per_sector - 1 ? b : a + (b - a) * i / (per_sector - 1);
            samples.emplace_back(th, phi->evaluate(th, s).value / nrm);
        }
    }
    if (cfg.format == Format::csv) {
        emit(cfg, [&](std::ostream& os) {
            os << "theta,phi_re,phi_im\n";
            for (auto [th, v] : samples)
                os << io::format_double(th) << ',' << io::format_double(v.real()) << ',' << io::format_double(v.imag())
                   << '\n';
        });
    } else if (cfg.format == Format::json) {
        json j{{"mu", cfg.mu}, {"omega", cfg.omega}, {"index", index}, {"lambda", complex_json(lambda0)}};
        j["theta"] = json::array();
        j["phi"] = json::array();
        for (auto [th, v] : samples) {
            j["theta"].push_back(th);
            j["phi"].push_back(complex_json(v));
        }
        emit(cfg, [&](std::ostream& os) { os << j.dump() << '\n'; });
    } else {
        svg::Plot plot("Angular profile, index " + std::to_string(index), "theta", "phi");
        svg::Series re{"Re phi", "#1f77b4", {}}, im{"Im phi", "#d62728", {}};
        for (auto [th, v] : samples) {
            re.points.emplace_back(th, v.real());
            im.points.emplace_back(th, v.imag());
        }
        plot.add(std::move(re));
        plot.add(std::move(im));
        emit(cfg, [&](std::ostream& os) { plot.write(os); });
    }
}

// solve1d ---------------------------------------------------------------

std::vector<ExpTerm> parse_terms(const std::vector<std::string>& specs) {
    std::vector<ExpTerm> out;
    for (const auto& s : specs) {
        const auto f = io::split_fields(s);
        if (f.size() != 3) throw UsageError("term '" + s + "' must read coeff,power,rate");
        const double p = io::parse_double(f[1]);
        if (p != std::floor(p)) throw UsageError("term '" + s + "': power must be an integer");
        out.push_back({io::parse_double(f[0]), static_cast<int>(p), io::parse_double(f[2])});
    }
    return out;
}

void cmd_solve1d(const RunConfig& cfg, double a_plus, double a_minus, const std::vector<std::string>& h_plus,
                 const std::vector<std::string>& h_minus, const std::string& method, double length, double step) {
    require_format(cfg, {Format::csv, Format::json}, "solve1d");
    const MaterialPair mp(a_plus, a_minus);
    const auto rhs = HalfLineRHS::from_terms(parse_terms(h_minus), parse_terms(h_plus), length, step);
    Solve1DMethod m = Solve1DMethod::Auto;
    if (method == "closed") m = Solve1DMethod::ClosedForm;
    else if (method == "fd") m = Solve1DMethod::FiniteDifference;
    const auto sol = solve_1d(mp, rhs, m);
    if (cfg.format == Format::csv) {
        emit(cfg, [&](std::ostream& os) {
            os << "y,w_re,w_im\n";
            for (std::size_t i = sol.w_minus.y.size(); i-- > 1;)
                os << io::format_double(sol.w_minus.y[i]) << ',' << io::format_double(sol.w_minus.values[i].real())
                   << ',' << io::format_double(sol.w_minus.values[i].imag()) << '\n';
            for (std::size_t i = 0; i < sol.w_plus.y.size(); ++i)
                os << io::format_double(sol.w_plus.y[i]) << ',' << io::format_double(sol.w_plus.values[i].real())
                   << ',' << io::format_double(sol.w_plus.values[i].imag()) << '\n';
        });
        return;
    }
    json j{{"a_plus", a_plus},
           {"a_minus", a_minus},
           {"method", method},
           {"value_at_0", complex_json(sol.traces.value)},
           {"deriv_plus_at_0", complex_json(sol.traces.deriv_plus)},
           {"deriv_minus_at_0", complex_json(sol.traces.deriv_minus)},
           {"continuity_residual", sol.continuity_residual()},
           {"transmission_residual", sol.transmission_residual(mp)}};
    emit(cfg, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

// invert-line and residue -----------------------------------------------

RadialFunction load_or_build(const RunConfig& cfg, const std::string& in, const std::string& source, cplx lambda0) {
    if (!in.empty()) {
        std::ifstream is(in, std::ios::binary);
        if (!is) throw UsageError("cannot open '" + in + "'");
        return io::read_radial_csv(is, cfg.omega, cfg.settings.panels);
    }
    const auto mp = MaterialPair::from_contrast(cfg.mu);
    const auto tg = cfg.t_grid();
    const auto g = cfg.angular();
    auto coeff = [&](Sector s) { return s == Sector::Minus ? mp.a_minus() : mp.a_plus(); };
    // Smooth bump in t supported in (-3, 1) and its derivatives.
    auto bump = [](double t) -> std::array<double, 3> {
        const double s = (t + 1.0) / 2.0;
        if (std::abs(s) >= 1.0) return {0.0, 0.0, 0.0};
        const double q = 1.0 - s * s, b = std::exp(-1.0 / q);
        const double g1 = -2.0 * s / (q * q), g2 = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
        return {b, b * g1 / 2.0, b * (g1 * g1 + g2) / 4.0};
    };
    if (source == "zero") return RadialFunction::zero(tg, g);
    if (source == "bump")
        return RadialFunction::sample(
            tg, g, [&](double t, double th, Sector) { return cplx(bump(t)[0] * (1.0 + 0.5 * std::cos(th))); }, true);
    if (source == "regular")
        // a Delta (psi(r) * 1): the constant satisfies both interface conditions.
        return RadialFunction::sample(
            tg, g, [&](double t, double, Sector s) { return cplx(coeff(s) * bump(t)[2] * std::exp(-2.0 * t)); }, true);
    if (source == "planted") {
        // a Delta (chi r^lambda0 phi) with chi = 1 - smooth step over t in [-1, 0.5].
        const auto phi = kernel_at(lambda0, cfg.mu, cfg.omega).front();
        auto step = [](double t, double t0, double t1) -> std::array<double, 3> {
            const double x = (t1 - t) / (t1 - t0);
            if (x <= 0.0) return {0.0, 0.0, 0.0};
            if (x >= 1.0) return {1.0, 0.0, 0.0};
            auto f = [](double y) -> std::array<double, 3> {
                const double e = std::exp(-1.0 / y);
                return {e, e / (y * y), e * (1.0 / (y * y * y * y) - 2.0 / (y * y * y))};
            };
            const auto a = f(x), b0 = f(1.0 - x);
            const std::array<double, 3> b{b0[0], -b0[1], b0[2]};
            const double d = a[0] + b[0], d1 = a[1] + b[1], d2 = a[2] + b[2];
            const double s1 = (a[1] * d - a[0] * d1) / (d * d);
            const double s2 = ((a[2] * d - a[0] * d2) * d - 2.0 * d1 * (a[1] * d - a[0] * d1)) / (d * d * d);
            const double dx = -1.0 / (t1 - t0);
            return {a[0] / d, s1 * dx, s2 * dx * dx};
        };
        return RadialFunction::sample(
            tg, g,
            [&](double t, double th, Sector s) {
                const auto c = step(t, -1.0, 0.5);
                return coeff(s) * (c[2] + 2.0 * lambda0 * c[1]) * std::exp((lambda0 - 2.0) * t) *
                       phi.evaluate(th, s).value;
            },
            true);
    }
    throw UsageError("unknown --source '" + source + "' (expected zero, bump, regular or planted)");
}

void write_data(const RadialFunction& g, const std::string& path) {
    if (path.empty()) return;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UsageError("cannot open '" + path + "'");
    io::write_radial_csv(os, g);
}

void cmd_invert_line(const RunConfig& cfg, const std::string& in, const std::string& source,
                     const std::string& line_out, const std::string& data_out) {
    cfg.require_mu();
    require_format(cfg, {Format::csv, Format::json}, "invert-line");
    const auto mp = MaterialPair::from_contrast(cfg.mu);
    const auto g = load_or_build(cfg, in, source, 0.0);
    write_data(g, data_out);
    const auto lg = cfg.line_grid();
    const auto w = invert_on_line(mp, cfg.omega, g, cfg.gamma, lg);
    if (!line_out.empty()) {
        const auto& tg = g.t_grid();
        Matrix h = g.values();
        for (int k = 0; k < tg.nodes; ++k) h.row(k) *= std::exp(2.0 * tg.t(k));
        const auto line = mellin_forward(RadialFunction(tg, g.angular_ptr(), std::move(h)), 1.0 - cfg.gamma, lg);
        std::ofstream os(line_out, std::ios::binary);
        if (!os) throw UsageError("cannot open '" + line_out + "'");
        io::write_line_csv(os, line);
        std::ofstream side(line_out + ".json", std::ios::binary);
        side << json{{"xi", line.xi},
                     {"eta_max", lg.eta_max},
                     {"eta_nodes", lg.nodes},
                     {"omega", cfg.omega},
                     {"nodes_per_sector", g.angular().nodes_per_sector()},
                     {"panels_per_sector", g.angular().panels_per_sector()},
                     {"content", "transform of r^2 g"}}
                    .dump()
             << '\n';
    }
    if (cfg.format == Format::csv) {
        emit(cfg, [&](std::ostream& os) { io::write_radial_csv(os, w); });
        return;
    }
    json j{{"mu", cfg.mu},
           {"omega", cfg.omega},
           {"gamma", cfg.gamma},
           {"xi", 1.0 - cfg.gamma},
           {"data_norm_K0", weighted_norm(g, {0, cfg.gamma})},
           {"solution_norm_K2", weighted_norm(w, {2, cfg.gamma})},
           {"max_abs_solution", w.values().cwiseAbs().maxCoeff()}};
    emit(cfg, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void cmd_residue(const RunConfig& cfg, const std::vector<double>& lambda_in, const std::string& in,
                 const std::string& source, const std::string& data_out) {
    cfg.require_mu();
    require_format(cfg, {Format::csv, Format::json}, "residue");
    const auto mp = MaterialPair::from_contrast(cfg.mu);
    cplx lambda0;
    if (lambda_in.empty()) {
        const auto inv = singular_term_inventory(cfg.mu, cfg.omega);
        if (!inv.h1_nontrivial_singular)
            throw RegimeError("residue: no singular exponent with Re lambda in (0, 1) for this contrast; pass --lambda");
        for (const auto& t : inv.terms)
            if (t.in_H1 && t.lambda0 != cplx(0.0)) {
                lambda0 = t.lambda0;
                break;
            }
    } else {
        lambda0 = cplx(lambda_in[0], lambda_in.size() > 1 ? lambda_in[1] : 0.0);
    }
    const auto g = load_or_build(cfg, in, source, lambda0);
    write_data(g, data_out);
    ResidueOptions opts;
    opts.contour_nodes = cfg.settings.contour_nodes;
    opts.radius_tolerance = cfg.settings.radius_tolerance;
    const auto sc = singular_coefficient(mp, cfg.omega, g, lambda0, opts);
    if (cfg.format == Format::csv) {
        emit(cfg, [&](std::ostream& os) {
            os << "q,theta,value_re,value_im\n";
            for (std::size_t q = 0; q < sc.log_terms.size(); ++q)
                for (int i = 0; i < g.angular().size(); ++i)
                    os << q << ',' << io::format_double(g.angular().node(i)) << ','
                       << io::format_double(sc.log_terms[q][i].real()) << ','
                       << io::format_double(sc.log_terms[q][i].imag()) << '\n';
        });
        return;
    }
    json j{{"mu", cfg.mu},
           {"omega", cfg.omega},
           {"lambda0", complex_json(sc.lambda0)},
           {"coefficient", complex_json(sc.coefficient)},
           {"radii", sc.radii},
           {"radius_spread", sc.radius_spread},
           {"log_power_max", static_cast<int>(sc.log_terms.size()) - 1}};
    j["coefficients"] = json::array();
    for (const auto& row : sc.coefficients) {
        json r = json::array();
        for (auto c : row) r.push_back(complex_json(c));
        j["coefficients"].push_back(r);
    }
    emit(cfg, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corner singularities of the two-material transmission problem"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::map<std::string, Format> formats{{"csv", Format::csv}, {"svg", Format::svg}, {"json", Format::json}};

    auto common = [&](CLI::App* c) {
        c->add_option("--mu", cfg.mu, "Contrast a+/a-");
        c->add_option("--omega", cfg.omega, "Opening of the minus sector in radians")->capture_default_str();
        c->add_option("--gamma", cfg.gamma, "Weight index of the target space")->capture_default_str();
        c->add_option("--band", cfg.band, "re_min re_max im_max")->expected(3)->capture_default_str();
        c->add_option("--grid-t", cfg.grid_t, "Nodes in t = log r");
        c->add_option("--grid-eta", cfg.grid_eta, "Nodes on the integration line");
        c->add_option("--grid-theta", cfg.grid_theta, "Angular nodes per sector");
        c->add_option("--out", cfg.out, "Output path (stdout when omitted)");
        c->add_option("--format", cfg.format, "csv, svg or json")->transform(CLI::CheckedTransformer(formats));
    };

    auto* spectrum = app.add_subcommand("spectrum", "Roots of the determinant in a band");
    common(spectrum);

    double mu_min = -5.0, mu_max = -0.01, step = 0.01;
    auto* sweep = app.add_subcommand("sweep", "Tabulate lambda1 and eta over a contrast range");
    common(sweep);
    sweep->add_option("--mu-min", mu_min)->capture_default_str();
    sweep->add_option("--mu-max", mu_max)->capture_default_str();
    sweep->add_option("--step", step)->capture_default_str();

    int index = 1;
    auto* singular = app.add_subcommand("singular-function", "Angular profile of a singular term");
    common(singular);
    singular->add_option("--index", index, "0: constant, 1: leading singular exponent")->capture_default_str();

    double a_plus = 1.0, a_minus = -2.0, length = 40.0, h = 1.0 / 128;
    std::vector<std::string> h_plus{"1,0,1"}, h_minus;
    std::string method = "auto";
    auto* solve1d = app.add_subcommand("solve1d", "Half-line transmission model");
    common(solve1d);
    solve1d->add_option("--a-plus", a_plus)->capture_default_str();
    solve1d->add_option("--a-minus", a_minus)->capture_default_str();
    solve1d->add_option("--h-plus", h_plus, "Terms coeff,power,rate of h on y > 0")->capture_default_str();
    solve1d->add_option("--h-minus", h_minus, "Terms coeff,power,rate of h on y < 0");
    solve1d->add_option("--method", method)->check(CLI::IsMember({"auto", "closed", "fd"}))->capture_default_str();
    solve1d->add_option("--length", length)->capture_default_str();
    solve1d->add_option("--step", h)->capture_default_str();

    std::string in, source = "bump", line_out, data_out;
    auto* invert = app.add_subcommand("invert-line", "Solve a Delta w = g through the line Re lambda = 1 - gamma");
    common(invert);
    invert->add_option("--in", in, "RadialFunction CSV with columns t,theta,value_re,value_im");
    invert->add_option("--source", source, "Built-in data when --in is absent: zero, bump, regular, planted")
        ->capture_default_str();
    invert->add_option("--line-out", line_out, "Also write the line transform CSV (and a .json sidecar)");
    invert->add_option("--data-out", data_out, "Also write the data g as a RadialFunction CSV");

    std::vector<double> lambda_in;
    std::string residue_source = "planted";
    auto* residue = app.add_subcommand("residue", "Singular coefficient at a spectrum point");
    common(residue);
    residue->add_option("--lambda", lambda_in, "Spectrum point: re [im]")->expected(1, 2);
    residue->add_option("--in", in, "RadialFunction CSV");
    residue->add_option("--source", residue_source, "Built-in data when --in is absent: planted, regular, bump")
        ->capture_default_str();
    residue->add_option("--data-out", data_out, "Also write the data g as a RadialFunction CSV");

    // Each subcommand starts from its own default format.
    for (auto [sub, fmt] : {std::pair{spectrum, Format::json}, std::pair{sweep, Format::csv},
                            std::pair{singular, Format::csv}, std::pair{solve1d, Format::json},
                            std::pair{invert, Format::csv}, std::pair{residue, Format::json}})
        sub->preparse_callback([&cfg, fmt = fmt](std::size_t) { cfg.format = fmt; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        cfg.settings = Settings::from_environment();
        if (*spectrum) cmd_spectrum(cfg);
        else if (*sweep) cmd_sweep(cfg, mu_min, mu_max, step);
        else if (*singular) cmd_singular_function(cfg, index);
        else if (*solve1d) cmd_solve1d(cfg, a_plus, a_minus, h_plus, h_minus, method, length, h);
        else if (*invert) cmd_invert_line(cfg, in, source, line_out, data_out);
        else if (*residue) cmd_residue(cfg, lambda_in, in, residue_source, data_out);
    } catch (const ExcludedContrastError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return contrast;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const RegimeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return regime;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return regime;
    } catch (const EmptyKernelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return regime;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return resolution;
    }
    return ok;
}
