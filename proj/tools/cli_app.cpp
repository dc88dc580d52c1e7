#include "cli_app.hpp"

#include "fspec/csv.hpp"
#include "fspec/products.hpp"
#include "fspec/setdim.hpp"
#include "fspec/spectrum.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fspec::cli {

namespace {

namespace fs = std::filesystem;

struct ThetaGrid {
    double start = 0.0, stop = 1.0;
    int count = 5;
    std::string text = "0:1:5";

    Vec values() const {
        Vec v;
        for (int i = 0; i < count; ++i)
            v.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
        return v;
    }
};

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw InputError(what + ": cannot parse \"" + s + "\" as a number");
    return v;
}

ThetaGrid parse_theta(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.size() != 3) throw InputError("--theta: expected START:STOP:COUNT, got \"" + s + "\"");
    ThetaGrid g;
    g.text = s;
    g.start = parse_double(parts[0], "--theta START");
    g.stop = parse_double(parts[1], "--theta STOP");
    const double c = parse_double(parts[2], "--theta COUNT");
    if (c < 1 || c != std::floor(c)) throw InputError("--theta: COUNT must be a positive integer");
    g.count = static_cast<int>(c);
    if (!(g.start >= 0.0 && g.stop <= 1.0 && (g.count == 1 || g.start < g.stop)))
        throw InputError("--theta: need 0 <= START < STOP <= 1");
    return g;
}

Vec parse_list(const std::string& s, const std::string& what) {
    Vec v;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) v.push_back(parse_double(tok, what));
    if (v.empty()) throw InputError(what + ": empty list");
    return v;
}

// Everything a command needs, echoed verbatim into the provenance sidecars.
struct RunConfig {
    std::string command;
    std::vector<std::string> measures;
    std::vector<std::string> clouds;
    std::string theta = "0:1:5";
    double r_max = 0.0;
    long budget = 4096;
    double alpha = 0.0;
    std::uint64_t seed = 1;
    std::string out = ".";
    std::vector<std::string> z;
    std::string r_list;
    double s = -1.0;

    ThetaGrid grid() const { return parse_theta(theta); }

    Budgets budgets() const {
        if (budget < 1000) throw InputError("--budget must be at least 1000");
        if (r_max != 0.0 && r_max < 4.0) throw InputError("--rmax must be at least 4");
        if (alpha < 0.0) throw InputError("--alpha must be positive");
        Budgets b;
        b.r_max = r_max;
        b.shell_budget = static_cast<std::size_t>(budget);
        b.seed = seed;
        b.lattice.alpha = alpha;
        return b;
    }

    std::map<std::string, std::string> provenance() const {
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (const auto& x : v) s += (s.empty() ? "" : ";") + x;
            return s;
        };
        std::map<std::string, std::string> m{
            {"command", command},
            {"tool_version", kToolVersion},
            {"theta", theta},
            {"rmax", r_max == 0.0 ? "default" : csv::num(r_max)},
            {"budget", std::to_string(budget)},
            {"alpha", alpha == 0.0 ? "default" : csv::num(alpha)},
            {"seed", std::to_string(seed)},
        };
        if (!measures.empty()) m["measure"] = join(measures);
        if (!clouds.empty()) m["cloud"] = join(clouds);
        if (!z.empty()) m["z"] = join(z);
        if (!r_list.empty()) m["r"] = r_list;
        if (s >= 0.0) m["s"] = csv::num(s);
        return m;
    }
};

// Single writer: results are rendered to strings first, then written here.
class Output {
public:
    explicit Output(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.out) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw InputError("--out: cannot create directory " + cfg.out);
    }

    void write(const std::string& name, const std::string& body,
               const std::map<std::string, std::string>& extra = {}) {
        const fs::path p = dir_ / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw InputError("--out: cannot write " + p.string());
        f << body;
        if (!f) throw InputError("--out: write failed for " + p.string());
        auto prov = cfg_.provenance();
        prov["file"] = name;
        for (const auto& [k, v] : extra) prov[k] = v;
        csv::write_provenance(p.string() + ".provenance", prov);
    }

private:
    const RunConfig& cfg_;
    fs::path dir_;
};

MeasureSpec one_measure(const RunConfig& cfg) {
    if (cfg.measures.size() != 1) throw InputError("expected exactly one --measure");
    return load_measure(cfg.measures[0]);
}

PointCloud one_cloud(const RunConfig& cfg) {
    if (cfg.clouds.size() != 1) throw InputError("expected exactly one --cloud");
    return load_cloud(cfg.clouds[0]);
}

int cmd_ft(const RunConfig& cfg) {
    const MeasureSpec spec = one_measure(cfg);
    const int d = spec.ambient_dim();
    std::vector<Vec> zs;
    for (const auto& t : cfg.z) {
        Vec z = parse_list(t, "--z");
        if (static_cast<int>(z.size()) != d)
            throw InputError("--z \"" + t + "\": expected " + std::to_string(d) + " coordinates");
        zs.push_back(std::move(z));
    }
    if (zs.empty()) {
        // Probe set: each axis direction at the dyadic radii up to R_max.
        const double rmax = cfg.r_max > 0.0 ? cfg.r_max : 64.0;
        zs.push_back(Vec(d, 0.0));
        for (double r = 1.0; r <= rmax; r *= 2.0)
            for (int a = 0; a < d; ++a) {
                Vec z(d, 0.0);
                z[a] = r;
                zs.push_back(std::move(z));
            }
    }
    std::ostringstream o;
    for (int a = 0; a < d; ++a) o << 'z' << a << ',';
    o << "re,im,abs,abs_err\n";
    for (const Vec& z : zs) {
        const FourierValue v = fourier_eval(spec, z);
        for (double x : z) o << csv::num(x) << ',';
        o << csv::num(v.value.real()) << ',' << csv::num(v.value.imag()) << ',' << csv::num(std::abs(v.value)) << ','
          << csv::num(v.abs_err) << '\n';
    }
    Output(cfg).write("ft.csv", o.str());
    return kExitOk;
}

int cmd_spectrum(const RunConfig& cfg) {
    const MeasureSpec spec = one_measure(cfg);
    const Budgets b = cfg.budgets();
    const double rmax = b.r_max > 0.0 ? b.r_max : default_shell_rmax(spec);
    const ShellSampler sampler(spec, rmax, b.shell_budget, b.seed);
    const SpectrumCurve c = spectrum_curve(sampler, cfg.grid().values(), b.lattice);
    std::ostringstream o;
    write_spectrum_csv(o, c);
    Output out(cfg);
    out.write("spectrum.csv", o.str(), {{"rmax_used", csv::num(rmax)}, {"shell_method", sampler.uses_quadrature() ? "quadrature" : "monte-carlo"}});
    std::ostringstream sh;
    write_shell_stats_csv(sh, sampler.stats(1.0));
    out.write("shells_theta1.csv", sh.str(), {{"rmax_used", csv::num(rmax)}});
    return kExitOk;
}

int cmd_examples(const RunConfig& cfg) {
    const Vec thetas = cfg.grid().values();
    Budgets b = cfg.budgets();
    auto estimate = [&](const MeasureSpec& spec) {
        Budgets bb = b;
        if (bb.r_max == 0.0) bb.r_max = default_shell_rmax(spec);
        return spectrum_curve(spec, thetas, bb);
    };
    auto cube = [](int d) { return MeasureSpec::uniform_cube(d); };
    auto family = [&](const std::string& key, auto make, auto predict) {
        std::ostringstream o;
        o << key << ",theta,predicted,estimated,lower,upper,flag\n";
        for (int p = 1; p <= 6; ++p) {
            const MeasureSpec spec = make(p);
            std::optional<SpectrumCurve> est;
            if (spec.ambient_dim() <= 3) est = estimate(spec);
            for (std::size_t i = 0; i < thetas.size(); ++i) {
                o << p << ',' << csv::num(thetas[i]) << ',' << csv::num(predict(p, thetas[i])) << ',';
                if (est)
                    o << csv::num(est->dims[i]) << ',' << csv::num(est->lower[i]) << ',' << csv::num(est->upper[i])
                      << ',' << to_string(est->flags[i]) << '\n';
                else
                    o << ",,,\n";
            }
        }
        return o.str();
    };
    Output out(cfg);
    out.write("examples_lebesgue.csv", family("d", cube, lebesgue_prediction));
    out.write("examples_sphere1_cube.csv",
              family("n", [&](int n) { return MeasureSpec::product(MeasureSpec::sphere(1), cube(n)); },
                     [](int n, double th) { return cylinder_prediction(1, n, th); }));
    out.write("examples_sphere_cube1.csv",
              family("k", [&](int k) { return MeasureSpec::product(MeasureSpec::sphere(k), cube(1)); },
                     [](int k, double th) { return cylinder_prediction(k, 1, th); }));
    std::ostringstream kinks;
    kinks << "k,kink_theta\n";
    for (int k = 1; k <= 6; ++k)
        if (const auto t = cylinder_kink(k)) kinks << k << ',' << csv::num(*t) << '\n';
    out.write("examples_kinks.csv", kinks.str());
    return kExitOk;
}

Vec default_r_list(const PointCloud& c) {
    // Dyadic scales from 1/2 down to a few nearest-neighbour spacings, at most 12.
    double delta = std::numeric_limits<double>::infinity();
    if (c.size() <= 4096)
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j) {
                double s = 0.0;
                for (int a = 0; a < c.dim(); ++a) s += (c[i][a] - c[j][a]) * (c[i][a] - c[j][a]);
                delta = std::min(delta, std::sqrt(s));
            }
    Vec r;
    for (int k = 1; k <= 12; ++k) {
        const double x = std::ldexp(1.0, -k);
        if (std::isfinite(delta) && x < 2.0 * delta && r.size() >= 3) break;
        r.push_back(x);
    }
    return r;
}

Vec r_list(const RunConfig& cfg, const PointCloud& c) {
    Vec r = cfg.r_list.empty() ? default_r_list(c) : parse_list(cfg.r_list, "--r");
    for (double x : r)
        if (!(x > 0.0)) throw InputError("--r: scales must be positive");
    return r;
}

int cmd_capacity(const RunConfig& cfg) {
    const PointCloud cloud = one_cloud(cfg);
    const double s = cfg.s >= 0.0 ? cfg.s : 0.5 * cloud.dim();
    std::vector<CapacityResult> rows;
    for (double r : r_list(cfg, cloud)) rows.push_back(capacity(cloud, r, s));
    std::ostringstream o;
    write_capacity_csv(o, rows);
    Output(cfg).write("capacity.csv", o.str());
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const CapacityResult& c) { return c.converged; });
    return ok ? kExitOk : kExitAnomaly;
}

int cmd_boxdim(const RunConfig& cfg) {
    const PointCloud cloud = one_cloud(cfg);
    const Vec r = r_list(cfg, cloud);
    const Vec svals = cfg.s >= 0.0 ? Vec{cfg.s} : default_s_sequence(cloud.dim());
    const BoxDimFourier bf = box_dim_fourier(cloud, svals, r);
    const ProfileDims bc = box_counting(cloud, r);
    std::ostringstream o;
    o << "method,s,upper,lower\n";
    for (std::size_t i = 0; i < bf.s_values.size(); ++i)
        o << "capacity," << csv::num(bf.s_values[i]) << ',' << csv::num(bf.profiles[i].upper) << ','
          << csv::num(bf.profiles[i].lower) << '\n';
    o << "capacity_limit,," << csv::num(bf.upper) << ',' << csv::num(bf.lower) << '\n';
    o << "box_counting,," << csv::num(bc.upper) << ',' << csv::num(bc.lower) << '\n';
    Output(cfg).write("boxdim.csv", o.str());
    return kExitOk;
}

std::string bound_detail_csv(const BoundReport& r) {
    std::ostringstream o;
    o << "theta,lhs,lhs_lo,lhs_hi,mu,mu_lo,mu_hi,nu,nu_lo,nu_hi,lower_lo,lower_hi,upper_min_lo,upper_min_hi,"
         "upper_max_lo,upper_max_hi,verdict,upper_verdict\n";
    for (const auto& x : r.records) {
        o << csv::num(x.theta);
        for (const Banded* b : {&x.lhs, &x.mu, &x.nu}) o << ',' << csv::num(b->value) << ',' << csv::num(b->lo) << ',' << csv::num(b->hi);
        for (const Banded* b : {&x.lower, &x.upper_min, &x.upper_max}) o << ',' << csv::num(b->lo) << ',' << csv::num(b->hi);
        o << ',' << to_string(x.verdict) << ',' << to_string(x.upper_verdict) << '\n';
    }
    return o.str();
}

int cmd_product_check(const RunConfig& cfg) {
    const Vec thetas = cfg.grid().values();
    const Budgets b = cfg.budgets();
    Output out(cfg);
    if (cfg.measures.size() == 2 && cfg.clouds.empty()) {
        const BoundReport rep = check_product_bounds(load_measure(cfg.measures[0]), load_measure(cfg.measures[1]), thetas, b);
        std::ostringstream o;
        write_bound_report_csv(o, rep);
        out.write("product_check.csv", o.str());
        out.write("product_check_bands.csv", bound_detail_csv(rep));
        return rep.violations() == 0 ? kExitOk : kExitAnomaly;
    }
    if (cfg.clouds.size() == 2 && cfg.measures.empty()) {
        const PointCloud x = load_cloud(cfg.clouds[0]), y = load_cloud(cfg.clouds[1]);
        const SetBoundReport rep = check_set_product_bounds(x, default_candidates(x), y, default_candidates(y), thetas, b);
        const std::map<std::string, std::string> extra{{"rmax_used", csv::num(rep.r_max)},
                                                       {"candidates_x", std::to_string(rep.candidates_x)},
                                                       {"candidates_y", std::to_string(rep.candidates_y)},
                                                       {"upper_direction", "INFORMATIVE"}};
        std::ostringstream o;
        write_bound_report_csv(o, rep.report);
        out.write("product_check.csv", o.str(), extra);
        out.write("product_check_bands.csv", bound_detail_csv(rep.report), extra);
        const SalemReport s = salem_product_check(x, y, b);
        std::ostringstream so;
        so << "fourier_dim,fourier_lo,fourier_hi,hausdorff_proxy_x,hausdorff_proxy_y,hausdorff_proxy,verdict\n"
           << csv::num(s.fourier_dim.value) << ',' << csv::num(s.fourier_dim.lo) << ',' << csv::num(s.fourier_dim.hi)
           << ',' << csv::num(s.hausdorff_proxy_x) << ',' << csv::num(s.hausdorff_proxy_y) << ','
           << csv::num(s.hausdorff_proxy) << ',' << to_string(s.verdict) << '\n';
        out.write("salem_check.csv", so.str());
        return rep.report.violations() == 0 ? kExitOk : kExitAnomaly;
    }
    throw InputError("product-check needs either two --measure files or two --cloud files");
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Fourier spectrum estimation for measures and point clouds", "fspec"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--theta", cfg.theta, "theta grid START:STOP:COUNT")->capture_default_str();
        sub->add_option("--rmax", cfg.r_max, "largest shell radius");
        sub->add_option("--budget", cfg.budget, "samples per shell")->capture_default_str();
        sub->add_option("--alpha", cfg.alpha, "lattice spacing");
        sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
        sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    };
    auto* ft = app.add_subcommand("ft", "evaluate the Fourier transform");
    ft->add_option("--measure", cfg.measures, "measure JSON file")->required();
    ft->add_option("--z", cfg.z, "frequency, comma separated (repeatable)");
    common(ft);
    auto* spectrum = app.add_subcommand("spectrum", "Fourier spectrum curve");
    spectrum->add_option("--measure", cfg.measures, "measure JSON file")->required();
    common(spectrum);
    auto* examples = app.add_subcommand("examples", "predicted and estimated example curves");
    common(examples);
    auto* cap = app.add_subcommand("capacity", "capacity of a point cloud");
    cap->add_option("--cloud", cfg.clouds, "point cloud CSV")->required();
    cap->add_option("--r", cfg.r_list, "comma separated scales");
    cap->add_option("--s", cfg.s, "kernel exponent");
    common(cap);
    auto* box = app.add_subcommand("boxdim", "box dimension via capacities and box counting");
    box->add_option("--cloud", cfg.clouds, "point cloud CSV")->required();
    box->add_option("--r", cfg.r_list, "comma separated scales");
    box->add_option("--s", cfg.s, "single kernel exponent instead of the default sequence");
    common(box);
    auto* prod = app.add_subcommand("product-check", "product bound sandwich");
    prod->add_option("--measure", cfg.measures, "two measure JSON files");
    prod->add_option("--cloud", cfg.clouds, "two point cloud CSVs");
    common(prod);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (ft->parsed()) cfg.command = "ft";
        if (spectrum->parsed()) cfg.command = "spectrum";
        if (examples->parsed()) cfg.command = "examples";
        if (cap->parsed()) cfg.command = "capacity";
        if (box->parsed()) cfg.command = "boxdim";
        if (prod->parsed()) cfg.command = "product-check";
        if (cfg.command == "ft") return cmd_ft(cfg);
        if (cfg.command == "spectrum") return cmd_spectrum(cfg);
        if (cfg.command == "examples") return cmd_examples(cfg);
        if (cfg.command == "capacity") return cmd_capacity(cfg);
        if (cfg.command == "boxdim") return cmd_boxdim(cfg);
        return cmd_product_check(cfg);
    } catch (const InputError& e) {
        std::cerr << "fspec: input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const BudgetError& e) {
        std::cerr << "fspec: budget exceeded: " << e.what() << '\n';
        return kExitInput;
    } catch (const QuadratureError& e) {
        std::cerr << "fspec: quadrature failed: " << e.what() << '\n';
        return kExitAnomaly;
    }
}

}  // namespace fspec::cli
