#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "ddessm/ddessm.hpp"

namespace cli {

using namespace ddessm;
using io::ordered_json;
using io::CsvWriter;

inline constexpr const char* tool_version = "0.1.0";

struct GlobalFlags {
    double tol_root = 1e-12;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct RunManifest {
    std::string subcommand;
    std::string system_hash;
    ordered_json flags = ordered_json::object();
    std::vector<std::string> outputs;

    [[nodiscard]] ordered_json to_json() const {
        ordered_json j;
        j["tool"] = "ddessm";
        j["version"] = tool_version;
        j["subcommand"] = subcommand;
        if (!system_hash.empty()) j["system_fnv1a"] = system_hash;
        j["flags"] = flags;
        j["outputs"] = outputs;
        return j;
    }
};

inline RootOptions root_options(const GlobalFlags& g) {
    RootOptions o;
    o.tol_root = g.tol_root;
    return o;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers; results must be written by index.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < count; i += threads) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline ordered_json error_json(const std::exception& e) {
    if (const auto* d = dynamic_cast<const Error*>(&e))
        return {{"error", std::string(to_string(d->code()))}, {"message", d->detail()}};
    return {{"error", "Exception"}, {"message", e.what()}};
}

// ---------------------------------------------------------------- initial histories

/// const:<v>, eigen:<re>,<im>[,<amp>], random:<amp>.
inline History make_history(const DDESystem& sys, const std::string& spec, std::uint64_t seed) {
    const int n = sys.n();
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "const") {
        const double v = arg.empty() ? 1.0 : std::stod(arg);
        return [n, v](double) { return VecC::Constant(n, v); };
    }
    if (kind == "eigen") {
        std::vector<double> parts;
        std::size_t pos = 0;
        while (pos <= arg.size()) {
            const auto next = arg.find(',', pos);
            parts.push_back(std::stod(arg.substr(pos, next - pos)));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        require(!parts.empty(), ErrorCode::InvalidArgument, "eigen history needs a root");
        const cplx l(parts[0], parts.size() > 1 ? parts[1] : 0.0);
        const double amp = parts.size() > 2 ? parts[2] : 0.1;
        const auto e = eigen_data(CharMatrix(sys.kernel()), l);
        return [e, amp](double th) { return VecC((amp * std::exp(e.lambda * th) * e.c).real().cast<cplx>()); };
    }
    if (kind == "random") {
        const double amp = arg.empty() ? 0.1 : std::stod(arg);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        constexpr int modes = 4;
        MatR a(n, modes), b(n, modes);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < modes; ++k) a(i, k) = u(rng), b(i, k) = u(rng);
        const double h = sys.h();
        return [a, b, amp, h, n](double th) {
            VecC v = VecC::Zero(n);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < modes; ++k)
                    v[i] += amp / (k + 1) * (a(i, k) * std::cos(pi * k * th / h) + b(i, k) * std::sin(pi * (k + 1) * th / h));
            return v;
        };
    }
    throw Error(ErrorCode::InvalidArgument, "unknown history '" + spec + "' (const:<v>, eigen:<re>,<im>[,<amp>], random:<amp>)");
}

// ---------------------------------------------------------------- pipeline

struct PipelineOptions {
    double gamma = -1.0;
    std::optional<double> depth;
    int k_max = 10;
    std::optional<double> rho;       ///< cutoff radius
    std::optional<double> beta2;     ///< F-form shift
    double simulate_t = 0.0;         ///< 0 skips the validation run
    std::string history = "random:0.05";
};

inline ordered_json pipeline(const DDESystem& sys, const PipelineOptions& opt, const GlobalFlags& g) {
    ordered_json doc;
    doc["system"] = {{"label", sys.label()}, {"n", sys.n()}, {"h", sys.h()},
                     {"atoms", sys.kernel().atoms().size()}, {"densities", sys.kernel().densities().size()},
                     {"polynomial", sys.jet().polynomial()}, {"jet_zero", sys.jet().is_zero()}};
    ordered_json errors = ordered_json::array();
    auto stage = [&](const char* name, const std::function<void()>& body) {
        try {
            body();
            return true;
        } catch (const std::exception& e) {
            auto j = error_json(e);
            j["stage"] = name;
            errors.push_back(j);
            return false;
        }
    };

    SpectrumSlice slice;
    const bool have_spectrum = stage("spectrum", [&] {
        slice = roots_right_of(sys.kernel(), opt.gamma, root_options(g), opt.depth);
        doc["spectrum"] = io::to_json(slice);
    });

    std::optional<SpectralProjector> proj;
    if (have_spectrum && !slice.roots.empty())
        stage("projection", [&] {
            proj.emplace(sys.kernel(), slice.values(), root_options(g).tol_deriv);
            ordered_json p = ordered_json::array();
            for (const auto& e : proj->eigen()) p.push_back(io::to_json(e));
            doc["projection"] = {{"eigen", p}, {"norm", proj->norm()}};
        });

    if (have_spectrum && !slice.roots.empty())
        stage("nonresonance", [&] {
            const auto vals = slice.values();
            const bool stable = std::all_of(vals.begin(), vals.end(), [](cplx z) { return z.real() < 0.0; });
            const bool unstable = std::all_of(vals.begin(), vals.end(), [](cplx z) { return z.real() > 0.0; });
            if (!stable && !unstable) {
                doc["nonresonance"] = {{"status", "not_applicable"}, {"reason", "retained roots on both sides of the axis"}};
                return;
            }
            std::vector<cplx> spectrum = vals;
            for (const auto& r : slice.below) spectrum.push_back(r.value);
            const auto rep = nonresonance_check(spectrum, slice.complete_to, vals,
                                                stable ? SubsetKind::stable : SubsetKind::unstable);
            ordered_json v = ordered_json::array();
            for (const auto& r : rep.violations)
                v.push_back({{"order", r.order}, {"sum", io::to_json(r.combination)}, {"target", io::to_json(r.target)}});
            doc["nonresonance"] = {{"kind", stable ? "stable" : "unstable"}, {"order", rep.r},
                                   {"satisfied", rep.satisfied}, {"violations", v}};
        });

    std::optional<SSMModel> model;
    if (have_spectrum && !slice.roots.empty())
        stage("ssm", [&] {
            model = expansion_coeffs(sys, slice, smoothness_degree(slice, opt.k_max));
            auto j = io::to_json(*model);
            if (model->dim() == 1 && model->lambda(0).imag() == 0.0) {
                const auto r = reduce_real(*model);
                j["reduced"] = {{"lambda", r.lambda}, {"c2", r.c2}, {"c3", r.c3}};
            }
            doc["ssm"] = j;
            if (model->dim() == 2 && model->lambda(0).imag() > 0.0) {
                const auto nf = normal_form(*model);
                auto n = io::to_json(nf);
                try {
                    const auto lc = predict_limit_cycle(nf);
                    n["limit_cycle"] = io::to_json(lc);
                    if (lc.exists) n["limit_cycle"]["amplitude"] = predicted_amplitude(nf, lc.radius);
                } catch (const Error& e) {
                    n["limit_cycle"] = error_json(e);
                }
                doc["normal_form"] = n;
            }
        });

    ordered_json certs = ordered_json::object();
    if (have_spectrum && !slice.roots.empty()) {
        stage("certificate.gap", [&] {
            if (!slice.beta()) {
                certs["gap"] = {{"verdict", "not_applicable"}, {"reason", "no root found below the cut"}};
                return;
            }
            const auto dc = dichotomy_series(slice);
            certs["gap"] = io::to_json(certify_gap(sys, slice, dc, {300, opt.k_max}));
        });
        if (opt.rho)
            stage("certificate.cutoff", [&] {
                const auto r = certify_with_cutoff(sys, *opt.rho, slice, dichotomy_series(slice));
                auto j = io::to_json(r.certificate);
                j["rho_crit"] = r.rho_crit;
                certs["cutoff"] = j;
            });
    }
    stage("certificate.small_delay", [&] { certs["small_delay"] = io::to_json(certify_small_delay(sys)); });
    if (opt.beta2) stage("certificate.f_form", [&] { certs["f_form"] = io::to_json(certify_f_form(sys, *opt.beta2)); });
    doc["certificates"] = certs;

    if (opt.simulate_t > 0.0)
        stage("simulation", [&] {
            const auto tr = integrate(sys, make_history(sys, opt.history, g.seed), opt.simulate_t);
            ordered_json s{{"t_end", tr.t_end()}, {"dt", tr.dt()}, {"history", opt.history}};
            s["final_state"] = std::vector<double>(tr.state(tr.steps()).data(),
                                                   tr.state(tr.steps()).data() + sys.n());
            const double t0 = std::min(tr.t_end(), std::max(sys.h(), 0.25 * tr.t_end()));
            if (t0 < tr.t_end()) s["decay_exponent"] = measure_decay(tr, t0, tr.t_end()).exponent;
            if (model) {
                try {
                    s["distance_to_manifold"] = distance_to_manifold(tr, *model, tr.t_end());
                } catch (const Error& e) {
                    s["distance_to_manifold"] = error_json(e);
                }
            }
            doc["simulation"] = s;
        });
    doc["errors"] = errors;
    return doc;
}

// ---------------------------------------------------------------- reproduce

/// Real roots of det Delta on [lo, hi] by sign changes on a grid, refined with TOMS 748.
inline std::vector<double> real_roots(const DelayKernel& k, double lo, double hi, int grid = 4000) {
    const CharMatrix chi(k);
    auto f = [&](double x) { return chi.det(cplx(x, 0.0)).value.real(); };
    std::vector<double> out;
    double x0 = lo, f0 = f(lo);
    for (int i = 1; i <= grid; ++i) {
        const double x1 = lo + (hi - lo) * i / grid, f1 = f(x1);
        if (f0 == 0.0) out.push_back(x0);
        else if (f0 * f1 < 0.0) {
            std::uintmax_t it = 200;
            const auto r = boost::math::tools::toms748_solve(f, x0, x1, f0, f1,
                                                             boost::math::tools::eps_tolerance<double>(52), it);
            out.push_back(0.5 * (r.first + r.second));
        }
        x0 = x1, f0 = f1;
    }
    std::sort(out.rbegin(), out.rend());
    return out;
}

/// Largest x in [lo, hi] with pred(x) true, assuming pred is true then false.
inline double threshold(const std::function<bool(double)>& pred, double lo, double hi, double tol = 1e-6) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (pred(mid) ? lo : hi) = mid;
    }
    return lo;
}

inline std::string path_in(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

/// tau_R data for x' = -x(t - h) + (x - sin x): alpha = lambda_1, beta = lambda_2.
/// For h < 1/e the two real roots are the rightmost ones, so a real-axis scan suffices.
inline CurveRequest tau_r_request(double h) {
    const auto sys = catalog::delayed_sine(h);
    const double L = std::log(1.0 / h);
    const auto r = real_roots(sys.kernel(), -(L + 2.0 * std::log(L) + 3.0) / h, -0.5);
    require(r.size() >= 2, ErrorCode::NotComputed, "expected two real roots for h < 1/e");
    CurveRequest q;
    q.alpha = r[0];
    q.beta = r[1];
    q.lip = sys.lip_global();
    q.h = h;
    return q;
}

inline void reproduce_cushing(const std::string& dir, const GlobalFlags& g, RunManifest& man, ordered_json& report) {
    const auto ro = root_options(g);
    CsvWriter roots_csv(path_in(dir, "cushing_roots.csv"), {"b", "re", "im", "multiplicity"});
    man.outputs.push_back("cushing_roots.csv");
    ordered_json cases = ordered_json::array();
    for (double b : {-0.3, -3.0}) {
        const auto sys = catalog::cushing(1.0, b);
        const auto wide = roots_right_of(sys.kernel(), -8.0, ro);
        for (const auto& r : wide.roots) roots_csv.row({b, r.value.real(), r.value.imag(), double(r.multiplicity)});

        const auto slice = roots_right_of(sys.kernel(), -5.0, ro);
        ordered_json c;
        c["b"] = b;
        c["spectrum"] = io::to_json(slice);
        const auto sigma = restrict_slice(slice, -1.0);
        const auto m = expansion_coeffs(sys, sigma, smoothness_degree(sigma, 10));
        ordered_json xi = ordered_json::array();
        for (const auto& e : m.eigen) xi.push_back({{"lambda", io::to_json(e.lambda)}, {"xi", io::to_json(e.xi(0, 0))}});
        c["xi"] = xi;
        c["ssm"] = io::to_json(m);
        if (m.dim() == 1) {
            const auto r = reduce_real(m);
            c["reduced"] = {{"lambda", r.lambda}, {"c3", r.c3}};
        } else {
            ordered_json pf = ordered_json::object();
            for (const auto& [ab, v] : reduce_planar(m).terms)
                pf[std::to_string(ab.first) + std::to_string(ab.second)] = {v[0], v[1]};
            c["planar_field"] = pf;
        }
        if (b == -0.3) {
            const double a_max = (sigma.alpha() - *sigma.beta()) / (64.0 * std::log(2.0));
            const auto sys_a = catalog::cushing(0.9 * a_max, b);
            c["gap_threshold_a"] = a_max;
            c["gap_certificate"] = io::to_json(certify_gap(sys_a, sigma, dichotomy_series(sigma)));
            c["small_delay_certificate"] = io::to_json(certify_small_delay(sys_a));
        }
        cases.push_back(c);
    }
    report["cushing"] = cases;
}

inline void reproduce_small_delay(const std::string& dir, const GlobalFlags& g, RunManifest& man, ordered_json& report) {
    const auto ro = root_options(g);
    ordered_json out;

    // real roots against h
    {
        const int count = 68;
        std::vector<std::vector<double>> rows(count);
        parallel_for(count, g.threads, [&](int i) {
            const double h = 0.02 + (1.0 / std::numbers::e - 0.02 - 1e-4) * i / (count - 1);
            const auto q = tau_r_request(h);
            rows[i] = {h, q.alpha, q.beta};
        });
        CsvWriter csv(path_in(dir, "small_delay_real_roots.csv"), {"h", "lambda1", "lambda2"});
        for (const auto& r : rows) csv.row(r);
        man.outputs.push_back("small_delay_real_roots.csv");
    }

    // tau_R at the two delays
    {
        CsvWriter csv(path_in(dir, "small_delay_rate_curves.csv"), {"h", "s", "tau"});
        ordered_json curves = ordered_json::array();
        for (double h : {0.065, 0.13}) {
            const auto q = tau_r_request(h);
            const auto c = tau_curves(q);
            for (std::size_t k = 0; k < c.s.size(); ++k) csv.row({h, c.s[k], c.values[k]});
            ordered_json j{{"h", h}, {"lambda1", q.alpha}, {"lambda2", q.beta},
                           {"minimum", c.params.minimum() * c.lip_n}};
            if (c.roots) j["crossings"] = {c.roots->gamma2, c.roots->gamma1};
            curves.push_back(j);
        }
        out["tau_r"] = curves;
        man.outputs.push_back("small_delay_rate_curves.csv");
    }

    // thresholds
    out["small_delay_threshold_h"] = threshold(
        [](double h) { return certify_small_delay(catalog::delayed_sine(h)).certified(); }, 0.01, 0.2);
    out["tau_r_threshold_h"] = threshold(
        [&](double h) { return tau_curves(tau_r_request(h)).roots.has_value(); }, 0.065, 0.2, 1e-4);
    {
        const auto sys = catalog::delayed_sine(0.065);
        const auto s = restrict_slice(roots_right_of(sys.kernel(), -5.0, ro, 400.0), -1.5);
        out["gap_certificate_h0065"] = io::to_json(certify_gap(sys, s, dichotomy_series(s)));
        out["small_delay_certificate_h0065"] = io::to_json(certify_small_delay(sys));
    }

    // F-form: h_max against beta2
    {
        const double lip_f = 3.0;
        CsvWriter csv(path_in(dir, "f_form_hmax.csv"), {"beta2", "h_max"});
        const double lo = -1000.0, hi = beta2_boundary(lip_f) - 1.0;
        for (int i = 0; i < 50; ++i) {
            const double b2 = lo + (hi - lo) * i / 49.0;
            csv.row({b2, h_max(b2, lip_f)});
        }
        out["f_form_boundary_beta2"] = beta2_boundary(lip_f);
        out["f_form_certificate"] = io::to_json(certify_f_form(lip_f, 0.002, -500.0));
        man.outputs.push_back("f_form_hmax.csv");
    }

    // overlay of the two decay curves at h = 0.002
    {
        CsvWriter csv(path_in(dir, "rate_curve_overlay.csv"), {"variant", "s", "value"});
        auto qr = tau_r_request(0.002);
        CurveRequest qf;
        qf.variant = CurveVariant::F;
        qf.lip = 3.0;
        qf.beta2 = -500.0;
        qf.h = 0.002;
        const auto cr = tau_curves(qr), cf = tau_curves(qf);
        for (std::size_t k = 0; k < cr.s.size(); ++k) csv.row({0.0, cr.s[k], cr.values[k]});
        for (std::size_t k = 0; k < cf.s.size(); ++k) csv.row({1.0, cf.s[k], cf.values[k]});
        ordered_json j;
        if (cr.roots) j["tau_r_crossings"] = {cr.roots->gamma2, cr.roots->gamma1};
        if (cf.roots) j["tau_f_crossings"] = {cf.roots->gamma2, cf.roots->gamma1};
        if (cr.roots && cf.roots)
            j["intervals_overlap"] = std::max(cr.roots->gamma2, cf.roots->gamma2) < std::min(cr.roots->gamma1, cf.roots->gamma1);
        out["overlay_h0002"] = j;
        man.outputs.push_back("rate_curve_overlay.csv");
    }
    report["small_delay"] = out;
}

inline void reproduce_hopf(const std::string& dir, const GlobalFlags& g, RunManifest& man, ordered_json& report) {
    const auto ro = root_options(g);
    ordered_json out;
    const int count = 11;
    std::vector<std::vector<double>> rows(count);
    std::vector<double> rho_w(count), rho_l(count);
    parallel_for(count, g.threads, [&](int i) {
        const double h = pi / 2.0 + 0.01 * (i + 0.5) * 10.0 / count;
        const auto sys = catalog::delayed_cubic(h);
        const auto s = roots_right_of(sys.kernel(), -0.5, ro, 20.0);
        const auto m = expansion_coeffs(sys, s, smoothness_degree(s, 10));
        const auto nf = normal_form(m);
        const auto lc = predict_limit_cycle(nf);
        const cplx k30 = nf.coefficient(3, 0)(0.0)[0], k21 = nf.coefficient(2, 1)(0.0)[0];
        rows[i] = {h, nf.lambda.real(), nf.lambda.imag(), nf.beta21.real(), nf.beta21.imag(), k30.real(), k30.imag(),
                   k21.real(), k21.imag(), lc.radius, lc.frequency, predicted_amplitude(nf, lc.radius)};
        const auto dc = dichotomy_series(s);
        rho_w[i] = certify_with_cutoff(sys, 1e-3, s, dc, CutoffMode::weighted).rho_crit;
        rho_l[i] = certify_with_cutoff(sys, 1e-3, s, dc, CutoffMode::literal).rho_crit;
    });
    CsvWriter csv(path_in(dir, "hopf_table.csv"),
                  {"h", "re_lambda", "im_lambda", "re_beta21", "im_beta21", "re_K30", "im_K30", "re_K21", "im_K21",
                   "radius", "frequency", "amplitude", "rho_crit_weighted", "rho_crit_literal"});
    for (int i = 0; i < count; ++i) {
        auto r = rows[i];
        r.push_back(rho_w[i]);
        r.push_back(rho_l[i]);
        csv.row(r);
    }
    man.outputs.push_back("hopf_table.csv");
    out["rho_crit_weighted"] = *std::min_element(rho_w.begin(), rho_w.end());
    out["rho_crit_literal"] = *std::min_element(rho_l.begin(), rho_l.end());

    const double h = pi / 2.0 + 0.05;
    const auto sys = catalog::delayed_cubic(h);
    const auto s = roots_right_of(sys.kernel(), -0.5, ro, 20.0);
    const auto nf = normal_form(expansion_coeffs(sys, s, smoothness_degree(s, 10)));
    const auto lc = predict_limit_cycle(nf);
    const auto tr = integrate(sys, [](double) { return VecC::Constant(1, 0.1); }, 500.0);
    const auto cyc = extract_limit_cycle(tr, 400.0);
    out["h"] = h;
    out["normal_form"] = io::to_json(nf);
    out["predicted"] = {{"radius", lc.radius}, {"period", lc.period()}, {"amplitude", predicted_amplitude(nf, lc.radius)}};
    out["simulated"] = {{"amplitude", cyc.amplitude}, {"period", cyc.period}, {"dt", tr.dt()}};
    {
        CsvWriter ts(path_in(dir, "hopf_trajectory.csv"), {"t", "x_1"});
        for (std::size_t k = 0; k <= tr.steps(); k += 4) ts.row({tr.time(k), tr.state(k)[0]});
        man.outputs.push_back("hopf_trajectory.csv");
    }
    report["hopf"] = out;
}

} // namespace cli
