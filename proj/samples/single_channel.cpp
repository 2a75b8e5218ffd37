// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Rates of the three schemes on one Rayleigh channel draw.
//
//   sample_single_channel [seed] [P_dB]

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "ris/ris.hpp"

int main(int argc, char **argv)
{
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
    const double P_dB = argc > 2 ? std::atof(argv[2]) : 10.0;

    ris::SchemeParams params; // N=2, K=3, A=2, m=2, tau=1, 4-ASK
    params.P = std::pow(10.0, P_dB / 10.0);

    const ris::Csi csi = ris::sample_csi(ris::channel_csi_seed(seed, 0), params.N, params.K);
    const ris::RisConfig best = ris::max_snr_config(csi, params.phase_set(), params.K);

    std::cout << std::fixed << std::setprecision(4);
    std::cout << "P = " << P_dB << " dB, max-SNR configuration:";
    for (int t : best.theta) {
        std::cout << ' ' << t;
    }
    std::cout << "  (gamma = " << ris::snr_gamma(csi, best, params.phase_set(), params.P) << ")\n";

    const std::uint64_t noise = ris::channel_noise_seed(seed, 0);
    for (auto scheme : {ris::Scheme::Joint, ris::Scheme::MaxSnr, ris::Scheme::Layered}) {
        const ris::RateEstimate r = ris::scheme_rate(scheme, csi, params, noise);
        std::cout << std::setw(8) << ris::to_string(scheme) << "  " << r.mean << " +- " << r.std_err
                  << " bits/symbol\n";
    }
    std::cout << "high-SNR limit  " << ris::high_snr_limit(params.kind, params.B, params.A, params.K, params.m).bits_per_symbol
              << " bits/symbol\n";
}
