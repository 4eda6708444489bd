#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "dhym/solver.hpp"
#include "dhym/torus.hpp"

namespace dhym {

/// One real Fourier term amp * cos(k . x) or amp * sin(k . x), with k listed
/// in axis order (x1, y1, x2, y2). Text form: "amp cos k1 k2 ..." with terms
/// separated by ';'.
struct FourierMode {
    double amplitude = 0.0;
    bool cosine = true;
    std::vector<int> k;
};

std::vector<FourierMode> parse_modes(const std::string& text);
ScalarField sample_modes(const std::vector<FourierMode>& modes, const TorusGrid& grid);

/// Form field: `matrix` + profile(x) * `profile_matrix` + i ddbar potential(x),
/// or the contents of `file`. Only the potential term keeps a form d-closed
/// when n = 2.
/// Matrices are written "d" (n = 1), "d1 d2" or "d1 d2 re12 im12" (n = 2).
struct FormSpec {
    std::vector<double> matrix;
    std::vector<FourierMode> profile;
    std::vector<double> profile_matrix; ///< identity when empty
    std::vector<FourierMode> potential;
    std::string file;
};

HermitianFormField build_form(const FormSpec& spec, const TorusGrid& grid);

enum class TargetKind { Constant, HatTheta, File, Manufactured };
enum class SolveMethod { Newton, Continuity };

struct RunConfig {
    int n = 1;
    int N = 32;
    FormSpec omega;
    FormSpec chi0;

    TargetKind target = TargetKind::HatTheta;
    double target_value = 0.0;
    std::string target_file;
    std::vector<FourierMode> solution; ///< manufactured exact potential
    double eps0 = 0.1;

    SolveMethod method = SolveMethod::Continuity;
    SolverConfig solver;

    std::uint64_t seed = 1;
    std::string output = ".";

    std::string suite;
    int samples = 100;
    int check_n = 0;      ///< 0 means the suite default
    double sigma = 0.0;   ///< 0 means the suite default
    double check_eps0 = 0.0; ///< 0 means derived from sigma
    bool check_eps0_set = false;
};

/// Parses INI-style text ([section] headers, key = value). Unknown sections or
/// keys and malformed values throw InvalidConfig. `overrides` are
/// "section.key=value" strings applied on top of the text.
RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Assembles the problem described by a solve config. A hat-theta target is
/// evaluated here; a manufactured target is built from `solution`.
DhymProblem build_problem(const RunConfig& cfg);

} // namespace dhym
