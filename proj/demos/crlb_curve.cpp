// Bayesian Cramér-Rao bound versus correlation time on a log grid; the
// dashed reference curve for variance plots. Optional argument: output
// directory (default ".").

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "cptmag/cptmag.hpp"

int main(int argc, char** argv) {
    using namespace cptmag;
    const std::string dir = argc > 1 ? argv[1] : ".";

    ExperimentConfig cfg;  // canonical defaults
    const RateCalibration cal = make_calibration(cfg);

    std::vector<std::pair<double, double>> rows;
    const double lo = std::log(0.5e-3), hi = std::log(20e-3);
    const int n = 17;
    for (int i = 0; i < n; ++i) {
        OuParams ou = cfg.ou;
        ou.tau_c = std::exp(lo + (hi - lo) * i / (n - 1));
        const auto res = bayesian_crlb(ou, cfg.timing.update_interval, cal, cfg.shape);
        rows.emplace_back(ou.tau_c, res.bound_over_sigma2);
    }

    auto os = open_output_file(dir + "/crlb_curve.csv");
    write_crlb_csv(os, rows);
    std::cerr << "wrote crlb_curve.csv to " << dir << " (" << rows.size() << " points)\n";
    return 0;
}
