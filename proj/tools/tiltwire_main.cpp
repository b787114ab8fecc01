// tiltwire — batch front-end for the tilted-wire resonance computations.
//
// Subcommands:
//   eigen    spectrum table of the straight-wire system
//   perturb  second-order tilt coefficients (JSON) + element discrepancy report
//   pole     one nonperturbative pole search
//   sweep    pole sweep over a tilt grid + coefficient fit
//   oracle   quadrature ground-truth table for the M/N elements
//
// Exit codes: 0 ok, 2 invalid arguments, 3 inadmissible (alpha, n),
//             4 pole search did not converge, 5 quadrature failure.
//
// Outputs are plain CSV/JSON files with every float printed to 15 significant
// digits; identical invocations produce byte-identical files.  The default
// output directory is $TILTWIRE_OUTDIR (falling back to the working
// directory).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "tiltwire/bs_solver.hpp"
#include "tiltwire/io.hpp"
#include "tiltwire/matrix_elements.hpp"
#include "tiltwire/perturbation.hpp"
#include "tiltwire/quadrature.hpp"
#include "tiltwire/spectral.hpp"

namespace tw = tiltwire;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitBadArgs = 2;
constexpr int kExitInadmissible = 3;
constexpr int kExitNoConvergence = 4;
constexpr int kExitQuadrature = 5;

struct Options {
    double alpha = 1.0;
    int n = 2;
    int kmax = 4;
    double eps = 0.0;
    std::string eps_grid;
    int J = 30;
    int K = 120;
    double tol_root = 1e-10;
    int quad_order = tw::kQuadDefaultOrder;
    std::string kind = "N";
    std::string seed_from_paper = "on";
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    std::string out;
    bool to_stdout = false;  // --json: echo machine-readable record
};

std::filesystem::path out_path(const Options& o, const std::string& fallback) {
    if (!o.out.empty()) return o.out;
    const char* dir = std::getenv("TILTWIRE_OUTDIR");
    return std::filesystem::path(dir ? dir : ".") / fallback;
}

void write_header(std::ostream& os, const std::string& command, const Options& o,
                  const std::string& params) {
    os << "# tiltwire " << command << "\n";
    os << "# defaults: J=" << o.J << " K=" << o.K << " tol_root=" << tw::fmt15(o.tol_root)
       << " quad_order=" << o.quad_order << "\n";
    os << "# " << params << "\n";
}

json defaults_json(const Options& o) {
    return json{{"J", o.J}, {"K", o.K}, {"tol_root", o.tol_root}, {"quad_order", o.quad_order}};
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);  // binary: byte-identical across runs
    if (!f) throw std::runtime_error("cannot open output file " + p.string());
    return f;
}

int cmd_eigen(const Options& o) {
    if (o.alpha <= 0.0) {
        std::cerr << "eigen: alpha must be > 0 (attractive coupling)\n";
        return kExitBadArgs;
    }
    if (o.kmax < 1) {
        std::cerr << "eigen: kmax must be >= 1\n";
        return kExitBadArgs;
    }
    const tw::SpectrumSummary s = tw::spectrum_summary(o.alpha, o.kmax);
    const auto path = out_path(o, "eigen.csv");
    auto f = open_out(path);
    write_header(f, "eigen", o,
                 "alpha=" + tw::fmt15(o.alpha) + " kmax=" + std::to_string(o.kmax) +
                     " ess_threshold=" + tw::fmt15(s.ess_threshold));
    f << "k,E_k,class\n";
    for (int k = 1; k <= o.kmax; ++k) {
        const double e = tw::embedded_eigenvalue(o.alpha, k);
        f << k << "," << tw::fmt15(e) << ","
          << (e < tw::kEssentialThreshold ? "discrete" : "embedded") << "\n";
    }
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

void write_discrepancy_report(std::ostream& os, int kmax) {
    os << "kind,k,n,closed,oracle,abs_diff\n";
    for (char kind : {'M', 'N'}) {
        const tw::ElementTable t = tw::build_element_table(kind, kmax);
        for (const auto& e : tw::discrepancies(t))
            os << e.kind << "," << e.k << "," << e.n << "," << tw::fmt15(e.closed) << ","
               << tw::fmt15(e.oracle) << "," << tw::fmt15(e.abs_diff) << "\n";
    }
}

int cmd_perturb(const Options& o) {
    const tw::Admissibility adm = tw::check_admissible(o.alpha, o.n);
    if (!adm.ok) {
        std::cerr << "perturb: inadmissible (alpha, n): " << adm.diagnostic << "\n";
        return kExitInadmissible;
    }
    tw::PerturbOptions popt;
    popt.K = std::max(o.K, tw::kElementK);
    const tw::PerturbativeCoefficients c = tw::perturbative_coefficients(o.alpha, o.n, popt);
    json out;
    out["alpha"] = c.alpha;
    out["n"] = c.n;
    out["E_n"] = c.energy;
    out["V_n"] = c.v;
    out["Re W_n"] = c.w.real();
    out["Im W_n"] = c.w.imag();
    out["S_n"] = c.s;
    out["gamma_rate"] = c.gamma_rate;
    // both second-order width constants: the coefficient chain the expansion
    // uses, and the printed display variant it disagrees with
    out["im_z_coeff_chain"] = c.im_z_coeff_chain;
    out["im_z_coeff_display"] = c.im_z_coeff_display;
    out["defaults"] = defaults_json(o);

    const auto path = out_path(o, "perturb.json");
    {
        auto f = open_out(path);
        f << out.dump(2) << "\n";
    }
    // the report goes next to the coefficient record, never on top of it
    const auto report_path = o.out.empty()
                                 ? out_path(o, "discrepancy.csv")
                                 : std::filesystem::path(o.out).parent_path() / "discrepancy.csv";
    {
        auto f = open_out(report_path);
        write_header(f, "perturb/discrepancy", o, "kmax=8 tol=1e-06");
        write_discrepancy_report(f, 8);
    }
    if (o.to_stdout) std::cout << out.dump(2) << "\n";
    std::cout << "wrote " << path.string() << " and " << report_path.string() << "\n";
    return 0;
}

json pole_json(const tw::PoleResult& r, double alpha, int n, double eps) {
    json j;
    j["alpha"] = alpha;
    j["n"] = n;
    j["eps"] = eps;
    j["Re_z"] = r.z.real();
    j["Im_z"] = r.z.imag();
    j["residual"] = r.residual;
    j["iterations"] = r.iterations;
    j["J"] = r.J;
    j["K"] = r.K;
    j["channels_used"] = r.k_used;
    j["seed_Re"] = r.seed.real();
    j["seed_Im"] = r.seed.imag();
    j["converged"] = r.converged;
    j["sheet"] = alpha > 0 ? "II (open channels through the window)"
                           : "II (resonant channel)";
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

int cmd_pole(const Options& o) {
    const tw::Admissibility adm = tw::check_admissible(o.alpha, o.n);
    if (!adm.ok) {
        std::cerr << "pole: inadmissible (alpha, n): " << adm.diagnostic << "\n";
        return kExitInadmissible;
    }
    tw::SolverOptions sopt;
    sopt.J = o.J;
    sopt.K = o.K;
    sopt.tol_root = o.tol_root;
    sopt.assembly_threads = o.threads;
    std::optional<tw::Complex> seed;
    if (o.seed_from_paper == "off")
        seed = tw::Complex(tw::embedded_eigenvalue(std::abs(o.alpha), o.n));
    tw::PoleResult r;
    try {
        r = tw::find_pole(o.alpha, o.eps, o.n, sopt, seed);
    } catch (const std::exception& ex) {
        std::cerr << "pole: " << ex.what() << "\n";
        return kExitNoConvergence;
    }
    json out = pole_json(r, o.alpha, o.n, o.eps);
    out["defaults"] = defaults_json(o);
    const auto path = out_path(o, "pole.json");
    {
        auto f = open_out(path);
        f << out.dump(2) << "\n";
    }
    if (o.to_stdout) std::cout << out.dump(2) << "\n";
    if (!r.converged) {
        std::cerr << "pole: no convergence after " << r.iterations
                  << " iterations, residual " << tw::fmt15(r.residual) << "\n";
        return kExitNoConvergence;
    }
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_sweep(const Options& o) {
    const tw::Admissibility adm = tw::check_admissible(o.alpha, o.n);
    if (!adm.ok) {
        std::cerr << "sweep: inadmissible (alpha, n): " << adm.diagnostic << "\n";
        return kExitInadmissible;
    }
    std::vector<double> grid;
    try {
        grid = tw::parse_grid(o.eps_grid);
    } catch (const std::exception& ex) {
        std::cerr << "sweep: " << ex.what() << "\n";
        return kExitBadArgs;
    }
    tw::SolverOptions sopt;
    sopt.J = o.J;
    sopt.K = o.K;
    sopt.tol_root = o.tol_root;
    tw::SweepResult res;
    try {
        res = tw::sweep_and_fit(o.alpha, o.n, grid, sopt, o.threads,
                                o.seed_from_paper != "off");
    } catch (const std::exception& ex) {
        std::cerr << "sweep: " << ex.what() << "\n";
        return kExitBadArgs;
    }

    const auto csv_path = out_path(o, "sweep.csv");
    {
        auto f = open_out(csv_path);
        write_header(f, "sweep", o,
                     "alpha=" + tw::fmt15(o.alpha) + " n=" + std::to_string(o.n) +
                         " grid=" + o.eps_grid + " seed-from-paper=" + o.seed_from_paper);
        f << "eps,Re_z,Im_z,residual,iters,J,K\n";
        for (const auto& p : res.points)
            f << tw::fmt15(p.eps) << "," << tw::fmt15(p.pole.z.real()) << ","
              << tw::fmt15(p.pole.z.imag()) << "," << tw::fmt15(p.pole.residual) << ","
              << p.pole.iterations << "," << p.pole.J << "," << p.pole.K << "\n";
    }
    json fit;
    fit["alpha"] = o.alpha;
    fit["n"] = o.n;
    fit["V_hat_Re"] = res.v_hat.real();
    fit["V_hat_Im"] = res.v_hat.imag();
    fit["W_hat_Re"] = res.w_hat.real();
    fit["W_hat_Im"] = res.w_hat.imag();
    fit["cubic_residual_slope"] = res.cubic_residual_slope;
    fit["V_n_module"] = res.coeffs.v;
    fit["W_n_module_Re"] = res.coeffs.w.real();
    fit["W_n_module_Im"] = res.coeffs.w.imag();
    fit["all_converged"] = res.all_converged;
    fit["defaults"] = defaults_json(o);
    const auto fit_path = o.out.empty()
                              ? out_path(o, "sweep_fit.json")
                              : std::filesystem::path(o.out).replace_extension(".fit.json");
    {
        auto f = open_out(fit_path);
        f << fit.dump(2) << "\n";
    }
    if (o.to_stdout) std::cout << fit.dump(2) << "\n";
    if (!res.all_converged) {
        for (const auto& p : res.points)
            if (!p.pole.converged)
                std::cerr << "sweep: eps=" << tw::fmt15(p.eps) << " failed: residual "
                          << tw::fmt15(p.pole.residual)
                          << (p.pole.note.empty() ? "" : " (" + p.pole.note + ")") << "\n";
        return kExitNoConvergence;
    }
    std::cout << "wrote " << csv_path.string() << " and " << fit_path.string() << "\n";
    return 0;
}

int cmd_oracle(const Options& o) {
    if (o.kind != "M" && o.kind != "N") {
        std::cerr << "oracle: --kind must be M or N\n";
        return kExitBadArgs;
    }
    if (o.kmax < 1 || o.kmax > 16) {
        std::cerr << "oracle: kmax must be in 1..16\n";
        return kExitBadArgs;
    }
    tw::ElementTable t;
    try {
        t = tw::build_element_table(o.kind[0], o.kmax);
    } catch (const tw::QuadratureError& ex) {
        std::cerr << "oracle: quadrature failure: " << ex.what() << "\n";
        return kExitQuadrature;
    }
    const auto path = out_path(o, "oracle_" + o.kind + ".csv");
    auto f = open_out(path);
    write_header(f, "oracle", o, "kind=" + o.kind + " kmax=" + std::to_string(o.kmax));
    f << "kind,k,n,closed,oracle,abs_diff\n";
    for (const auto& e : t.entries)
        f << e.kind << "," << e.k << "," << e.n << "," << tw::fmt15(e.closed) << ","
          << tw::fmt15(e.oracle) << "," << tw::fmt15(e.abs_diff) << "\n";
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tilted-wire waveguide resonance tables"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&o](CLI::App* c) {
        c->add_option("--J", o.J, "Galerkin modes");
        c->add_option("--K", o.K, "channel-sum floor");
        c->add_option("--tol-root", o.tol_root, "root residual tolerance");
        c->add_option("--quad-order", o.quad_order, "quadrature order");
        c->add_option("--seed-from-paper", o.seed_from_paper,
                      "on: seed pole searches at the perturbative expansion; off: at E_n")
            ->check(CLI::IsMember({"on", "off"}));
        c->add_option("--threads", o.threads, "worker threads");
        c->add_option("--out", o.out, "output file path");
        c->add_flag("--json", o.to_stdout, "echo the machine-readable record to stdout");
    };

    auto* eigen = app.add_subcommand("eigen", "spectrum of the straight-wire system");
    eigen->add_option("--alpha", o.alpha, "coupling (> 0)")->required();
    eigen->add_option("--kmax", o.kmax, "levels to list");
    add_common(eigen);

    auto* perturb = app.add_subcommand("perturb", "second-order tilt coefficients");
    perturb->add_option("--alpha", o.alpha, "coupling")->required();
    perturb->add_option("--n", o.n, "resonant index")->required();
    add_common(perturb);

    auto* pole = app.add_subcommand("pole", "nonperturbative pole search");
    pole->add_option("--alpha", o.alpha, "coupling")->required();
    pole->add_option("--n", o.n, "resonant index")->required();
    pole->add_option("--eps", o.eps, "tilt")->required();
    add_common(pole);

    auto* sweep = app.add_subcommand("sweep", "pole sweep over a tilt grid");
    sweep->add_option("--alpha", o.alpha, "coupling")->required();
    sweep->add_option("--n", o.n, "resonant index")->required();
    sweep->add_option("--eps", o.eps_grid, "tilt grid start:stop:count")->required();
    add_common(sweep);

    auto* oracle = app.add_subcommand("oracle", "quadrature ground-truth element table");
    oracle->add_option("--kind", o.kind, "M or N")->required();
    oracle->add_option("--kmax", o.kmax, "table size");
    add_common(oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadArgs;
    }

    try {
        if (app.got_subcommand(eigen)) return cmd_eigen(o);
        if (app.got_subcommand(perturb)) return cmd_perturb(o);
        if (app.got_subcommand(pole)) return cmd_pole(o);
        if (app.got_subcommand(sweep)) return cmd_sweep(o);
        if (app.got_subcommand(oracle)) return cmd_oracle(o);
    } catch (const tw::QuadratureError& ex) {
        std::cerr << "quadrature failure: " << ex.what() << "\n";
        return kExitQuadrature;
    } catch (const std::domain_error& ex) {
        std::cerr << "invalid input: " << ex.what() << "\n";
        return kExitBadArgs;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return kExitBadArgs;
}
