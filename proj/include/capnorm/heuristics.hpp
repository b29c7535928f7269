#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace capnorm {

// Monte Carlo model CP-1 of the filtration algorithm under the per-event
// probabilities of the heuristic: each round draws one uniform element of
// H_K (a given target class is matched with probability 1/#H_K) and one
// uniform element of G^{r-1} (a given Hasse-symbol pattern is matched with
// probability 1/p^{N(r-1)}).  Draws are independent across rounds; that
// independence is a model choice and is stated in every report.  m is the
// first round with every target hit; e = clamp(max hit multiplicity, 1, hK);
// the trial capitulates when (m, e) passes the smooth test.  hK = 0 is the
// trivial module: m = 0 and capitulation, no draws.
struct SimulationConfig {
    unsigned long p = 2;
    unsigned long N = 1;
    unsigned long r = 1;
    unsigned long hK = 0;        // v_p(#H_K)
    unsigned long trials = 1;
    std::uint64_t seed = 0;
    std::string model_version = "CP-1";
};

struct StepStats {
    unsigned long trials_reaching = 0;
    unsigned long long class_v_sum = 0; // sum of c_i
    unsigned long long norm_v_sum = 0;  // sum of rho_i
};

struct SimulationReport {
    SimulationConfig config;
    unsigned long trials = 0;
    unsigned long capitulated = 0;
    std::map<unsigned long, unsigned long> m_distribution;
    std::vector<StepStats> steps; // index i = filtration step

    double capitulation_frequency() const;
    double frequency_sigma3() const; // 3 * sqrt(f(1-f)/trials)
};

// Trials are seeded by absolute index, so partitioned runs merge exactly.
SimulationReport simulate(const SimulationConfig& config);
SimulationReport simulate_range(const SimulationConfig& config, unsigned long lo, unsigned long hi);
SimulationReport merge(const SimulationReport& a, const SimulationReport& b);

std::string render_report(const SimulationReport& report);

// SplitMix64 (Steele-Lea-Flood), the documented generator behind CP-1.
struct SplitMix64 {
    std::uint64_t state = 0;
    std::uint64_t next();
    // exact uniform in [0, n), Lemire multiply-shift with rejection
    std::uint64_t below(std::uint64_t n);
};

} // namespace capnorm
