#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "analysis.hpp"

namespace {

using namespace cli;

struct SystemArg {
    std::string path;
    DDESystem system;
    std::string hash;

    void load() {
        const auto text = io::read_text(path);
        hash = io::hex(io::fnv1a(text));
        try {
            system = io::parse_system(text);
        } catch (const Error& e) {
            throw Error(e.code(), path + ": " + e.detail());
        }
    }
};

void emit(const ordered_json& doc, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << doc.dump(2) << '\n';
    else
        io::write_json(out, doc);
}

ordered_json global_json(const GlobalFlags& g) {
    return {{"tol_root", g.tol_root}, {"seed", g.seed}, {"threads", g.threads}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral submanifolds and inertial manifolds of delay equations"};
    app.require_subcommand(1);
    GlobalFlags g;
    app.add_option("--tol-root", g.tol_root, "residual tolerance for polished roots")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for random histories")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for parameter sweeps")->capture_default_str();

    SystemArg sys;
    double gamma = -1.0;
    std::optional<double> depth;
    std::string out;

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "characteristic roots right of a cut");
    std::string csv;
    spectrum->add_option("--system", sys.path, "system JSON file")->required()->check(CLI::ExistingFile);
    spectrum->add_option("--gamma", gamma, "cut line")->required();
    spectrum->add_option("--depth", depth, "search depth below the cut for the next band");
    spectrum->add_option("--csv", csv, "write re, im, multiplicity to this file");
    spectrum->add_flag("--json", "print the slice as JSON (default unless --csv is given)");
    spectrum->add_option("--out", out, "write the JSON to this file instead of stdout");

    // xi
    auto* xi = app.add_subcommand("xi", "eigenvectors and resolvent residues of the retained roots");
    xi->add_option("--system", sys.path)->required()->check(CLI::ExistingFile);
    xi->add_option("--gamma", gamma)->required();
    xi->add_option("--out", out, "JSON output file (default stdout)");

    // ssm
    auto* ssm = app.add_subcommand("ssm", "cubic expansion of the spectral submanifold");
    int order = 3;
    std::string style = "graph";
    ssm->add_option("--system", sys.path)->required()->check(CLI::ExistingFile);
    ssm->add_option("--gamma", gamma)->required();
    ssm->add_option("--depth", depth);
    ssm->add_option("--order", order)->check(CLI::Range(1, 3))->capture_default_str();
    ssm->add_option("--style", style)->check(CLI::IsMember({"graph", "nf"}))->capture_default_str();
    ssm->add_flag("--json", "JSON output (the only format)");
    ssm->add_option("--out", out, "JSON output file (default stdout)");

    // im-check
    auto* im = app.add_subcommand("im-check", "inertial manifold certificates");
    std::string route = "gap";
    std::optional<double> beta2, rho;
    std::string mode = "weighted";
    im->add_option("--system", sys.path)->required()->check(CLI::ExistingFile);
    im->add_option("--route", route)->check(CLI::IsMember({"gap", "small-delay", "f-form", "cutoff"}))->capture_default_str();
    im->add_option("--gamma", gamma, "cut separating retained roots (gap, cutoff)");
    im->add_option("--depth", depth);
    im->add_option("--beta2", beta2, "shift for the f-form route");
    im->add_option("--rho", rho, "ball radius for the cutoff route");
    im->add_option("--mode", mode, "cutoff constants")->check(CLI::IsMember({"weighted", "literal"}))->capture_default_str();
    im->add_flag("--json", "JSON output (the only format)");
    im->add_option("--out", out, "JSON output file (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "method-of-steps integration");
    std::string history = "const:1";
    double t_end = 10.0, dt = 0.0;
    sim->add_option("--system", sys.path)->required()->check(CLI::ExistingFile);
    sim->add_option("--history", history, "const:<v> | eigen:<re>,<im>[,<amp>] | random:<amp>")->capture_default_str();
    sim->add_option("--t-end", t_end)->capture_default_str();
    sim->add_option("--dt", dt, "step (0 = automatic)")->capture_default_str();
    sim->add_option("--csv", csv, "CSV output (t, x_1..x_n)")->required();

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "regenerate the worked examples as CSV/JSON");
    std::string example = "all";
    std::string out_dir = "artifacts";
    rep->add_option("example", example)->check(CLI::IsMember({"cushing", "small-delay", "hopf", "all"}))->capture_default_str();
    rep->add_option("--out", out_dir, "output directory")->capture_default_str();

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "spectrum, projections, SSM, certificates and optional simulation");
    PipelineOptions popt;
    pipe->add_option("--system", sys.path)->required()->check(CLI::ExistingFile);
    pipe->add_option("--gamma", popt.gamma)->required();
    pipe->add_option("--depth", popt.depth);
    pipe->add_option("--rho", popt.rho, "also run the cutoff route with this radius");
    pipe->add_option("--beta2", popt.beta2, "also run the f-form route");
    pipe->add_option("--simulate", popt.simulate_t, "validation run length (0 = skip)")->capture_default_str();
    pipe->add_option("--history", popt.history)->capture_default_str();
    pipe->add_option("--out", out, "JSON output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    RunManifest man;
    man.subcommand = app.get_subcommands().front()->get_name();
    man.flags = global_json(g);
    try {
        if (!sys.path.empty()) {
            sys.load();
            man.system_hash = sys.hash;
        }
        const auto ro = root_options(g);

        if (*spectrum) {
            const auto s = roots_right_of(sys.system.kernel(), gamma, ro, depth);
            man.flags.update({{"gamma", gamma}, {"depth", depth ? ordered_json(*depth) : ordered_json()}});
            if (!csv.empty()) {
                io::CsvWriter w(csv, {"re", "im", "multiplicity"});
                for (const auto& r : s.roots) w.row({r.value.real(), r.value.imag(), double(r.multiplicity)});
                man.outputs.push_back(csv);
            }
            if (csv.empty() || spectrum->count("--json") > 0 || !out.empty()) {
                ordered_json doc{{"manifest", man.to_json()}, {"spectrum", io::to_json(s)}};
                emit(doc, out);
            }
        } else if (*xi) {
            const auto s = roots_right_of(sys.system.kernel(), gamma, ro);
            man.flags["gamma"] = gamma;
            const CharMatrix chi(sys.system.kernel());
            ordered_json roots = ordered_json::array();
            for (const auto& r : s.roots) {
                if (r.multiplicity > 1) {
                    roots.push_back({{"lambda", io::to_json(r.value)}, {"multiplicity", r.multiplicity}});
                    continue;
                }
                auto e = io::to_json(eigen_data(chi, r.value, ro.tol_deriv));
                e["det_derivative"] = io::to_json(chi.det(r.value).derivative);
                roots.push_back(e);
            }
            emit({{"manifest", man.to_json()}, {"roots", roots}}, out);
        } else if (*ssm) {
            const auto s = roots_right_of(sys.system.kernel(), gamma, ro, depth);
            man.flags.update({{"gamma", gamma}, {"order", order}, {"style", style}});
            SsmOptions so;
            so.order = order;
            const auto m = expansion_coeffs(sys.system, s, smoothness_degree(s, 10), so);
            ordered_json doc{{"manifest", man.to_json()}, {"spectrum", io::to_json(s)}, {"ssm", io::to_json(m)}};
            if (style == "nf") {
                const auto nf = normal_form(m);
                auto j = io::to_json(nf);
                const auto lc = predict_limit_cycle(nf);
                j["limit_cycle"] = io::to_json(lc);
                if (lc.exists) j["limit_cycle"]["amplitude"] = predicted_amplitude(nf, lc.radius);
                doc["normal_form"] = j;
            }
            emit(doc, out);
        } else if (*im) {
            man.flags.update({{"route", route}, {"gamma", gamma}});
            const auto& S = sys.system;
            ordered_json cert;
            if (route == "small-delay") {
                cert = io::to_json(certify_small_delay(S));
            } else if (route == "f-form") {
                require(beta2.has_value(), ErrorCode::InvalidArgument, "--beta2 is required for the f-form route");
                man.flags["beta2"] = *beta2;
                cert = io::to_json(certify_f_form(S, *beta2));
            } else {
                const auto s = roots_right_of(S.kernel(), gamma, ro, depth);
                const auto dc = dichotomy_series(s);
                if (route == "gap") {
                    cert = io::to_json(certify_gap(S, s, dc));
                } else {
                    require(rho.has_value(), ErrorCode::InvalidArgument, "--rho is required for the cutoff route");
                    man.flags.update({{"rho", *rho}, {"mode", mode}});
                    const auto r = certify_with_cutoff(S, *rho, s, dc,
                                                       mode == "literal" ? CutoffMode::literal : CutoffMode::weighted);
                    cert = io::to_json(r.certificate);
                    cert["rho_crit"] = r.rho_crit;
                }
            }
            emit({{"manifest", man.to_json()}, {"certificate", cert}}, out);
        } else if (*sim) {
            man.flags.update({{"history", history}, {"t_end", t_end}, {"dt", dt}});
            SimOptions so;
            so.dt = dt;
            const auto tr = integrate(sys.system, make_history(sys.system, history, g.seed), t_end, so);
            std::vector<std::string> header{"t"};
            for (int i = 0; i < sys.system.n(); ++i) header.push_back("x_" + std::to_string(i + 1));
            io::CsvWriter w(csv, header);
            for (std::size_t k = 0; k <= tr.steps(); ++k) {
                std::vector<double> row{tr.time(k)};
                for (int i = 0; i < sys.system.n(); ++i) row.push_back(tr.state(k)[i]);
                w.row(row);
            }
            man.outputs.push_back(csv);
            std::cerr << "wrote " << tr.steps() + 1 << " rows (dt = " << tr.dt() << ") to " << csv << '\n';
        } else if (*rep) {
            std::filesystem::create_directories(out_dir);
            man.flags["example"] = example;
            ordered_json report;
            if (example == "cushing" || example == "all") reproduce_cushing(out_dir, g, man, report);
            if (example == "small-delay" || example == "all") reproduce_small_delay(out_dir, g, man, report);
            if (example == "hopf" || example == "all") reproduce_hopf(out_dir, g, man, report);
            man.outputs.push_back("report.json");
            io::write_json(path_in(out_dir, "report.json"), report);
            io::write_json(path_in(out_dir, "manifest.json"), man.to_json());
            std::cerr << "wrote " << man.outputs.size() << " artifacts to " << out_dir << '\n';
        } else if (*pipe) {
            man.flags.update({{"gamma", popt.gamma}, {"simulate", popt.simulate_t}, {"history", popt.history}});
            if (popt.depth) man.flags["depth"] = *popt.depth;
            if (popt.rho) man.flags["rho"] = *popt.rho;
            if (popt.beta2) man.flags["beta2"] = *popt.beta2;
            auto doc = pipeline(sys.system, popt, g);
            ordered_json full{{"manifest", man.to_json()}};
            full.update(doc);
            emit(full, out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
