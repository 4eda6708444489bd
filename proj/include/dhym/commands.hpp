#pragma once

#include <complex>
#include <ostream>
#include <string>

#include "dhym/config.hpp"

namespace dhym {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< ran, but the verdict is negative
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Writes <output>/solution.dhym, <output>/report.txt and <output>/trace.csv.
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Writes <output>/check_<suite>.csv and echoes it to `out`.
int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct SurfaceArgs {
    std::string name;
    double alpha = 1.0;
    double beta = 0.0;
    double q = 0.0;
    double c = 1.0;
    double w11 = 1.0;
    double w22 = 1.0;
    std::complex<double> w12 = 0.0;
    double m = 1.0;
    double M = 1.0;
};

int cmd_surface(const SurfaceArgs& args, std::ostream& out, std::ostream& err);

struct RegionArgs {
    double sigma = 1.5707963267948966;
    int resolution = 256;
    double scale = 1.0;
    double offset = 0.0;
};

/// CSV rows i,j,lambda1,lambda2,class (0 neither, 1 subsolution, 2 level set).
int cmd_region(const RegionArgs& args, std::ostream& out, std::ostream& err);

/// Prints hat_theta of the form fields stored at the two paths.
int cmd_angle(const std::string& omega_path, const std::string& chi_path, std::ostream& out, std::ostream& err);

} // namespace dhym
