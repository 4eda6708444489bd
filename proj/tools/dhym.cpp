// Command-line front end: solve, check, surface, region, angle.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dhym/commands.hpp"
#include "dhym/error.hpp"

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("DHYM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

dhym::RunConfig read_config(const std::string& path, const std::vector<std::string>& overrides) {
    if (path.empty()) {
        std::istringstream none;
        return dhym::parse_config(none, overrides);
    }
    return dhym::load_config(path, overrides);
}

} // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"Deformed Hermitian-Yang-Mills laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;

    auto* solve = app.add_subcommand("solve", "Solve the equation described by a config file");
    solve->add_option("-c,--config", config_path, "INI config file")->required();
    solve->add_option("--set", overrides, "Override as section.key=value");

    std::string suite;
    int samples = 0;
    long seed = -1;
    auto* check = app.add_subcommand("check", "Run a verification suite");
    check->add_option("-c,--config", config_path, "INI config file");
    check->add_option("--suite", suite, "subsolution | lemma23 | invariance | derivatives | prop21");
    check->add_option("--samples", samples, "Sample count");
    check->add_option("--seed", seed, "Random seed");
    check->add_option("--set", overrides, "Override as section.key=value");

    dhym::SurfaceArgs sargs;
    double w12_re = 0.0, w12_im = 0.0;
    auto* surface = app.add_subcommand("surface", "Print a catalog surface and its subsolution verdict");
    surface->add_option("name", sargs.name, "inoue-sm | inoue-pm | kodaira")->required();
    surface->add_option("--alpha", sargs.alpha);
    surface->add_option("--beta", sargs.beta);
    surface->add_option("--q", sargs.q);
    surface->add_option("--c", sargs.c, "Multiple of the Bott-Chern generator");
    surface->add_option("--w11", sargs.w11);
    surface->add_option("--w22", sargs.w22);
    surface->add_option("--w12-re", w12_re);
    surface->add_option("--w12-im", w12_im);
    surface->add_option("--m", sargs.m, "inf of the conformal factor");
    surface->add_option("--M", sargs.M, "sup of the conformal factor");

    dhym::RegionArgs rargs;
    std::string region_out;
    auto* region = app.add_subcommand("region", "Classify the (lambda1, lambda2) plane as CSV");
    region->add_option("--sigma", rargs.sigma);
    region->add_option("--resolution", rargs.resolution);
    region->add_option("--scale", rargs.scale);
    region->add_option("--offset", rargs.offset);
    region->add_option("-o,--out", region_out, "CSV path (stdout when omitted)");

    std::string omega_path, chi_path;
    auto* angle = app.add_subcommand("angle", "Print hat_theta of a pair of form fields");
    angle->add_option("omega", omega_path)->required();
    angle->add_option("chi", chi_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return dhym::kExitConfig;
    }

    try {
        if (*solve) {
            return dhym::cmd_solve(read_config(config_path, overrides), std::cout, std::cerr);
        }
        if (*check) {
            if (!suite.empty()) overrides.push_back("check.suite=" + suite);
            if (samples > 0) overrides.push_back("check.samples=" + std::to_string(samples));
            if (seed >= 0) overrides.push_back("run.seed=" + std::to_string(seed));
            return dhym::cmd_check(read_config(config_path, overrides), std::cout, std::cerr);
        }
        if (*surface) {
            sargs.w12 = {w12_re, w12_im};
            return dhym::cmd_surface(sargs, std::cout, std::cerr);
        }
        if (*region) {
            if (region_out.empty()) return dhym::cmd_region(rargs, std::cout, std::cerr);
            std::ofstream os(region_out);
            if (!os) {
                std::cerr << "cannot write '" << region_out << "'\n";
                return dhym::kExitConfig;
            }
            return dhym::cmd_region(rargs, os, std::cerr);
        }
        if (*angle) return dhym::cmd_angle(omega_path, chi_path, std::cout, std::cerr);
    } catch (const dhym::Error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return dhym::kExitConfig;
    }
    return dhym::kExitConfig;
}
