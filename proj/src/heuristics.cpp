#include "capnorm/heuristics.hpp"

#include "capnorm/normpoly.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace capnorm {

std::uint64_t SplitMix64::next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(next()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double SimulationReport::capitulation_frequency() const {
    return trials == 0 ? 0.0 : static_cast<double>(capitulated) / static_cast<double>(trials);
}

double SimulationReport::frequency_sigma3() const {
    if (trials == 0) return 0.0;
    const double f = capitulation_frequency();
    return 3.0 * std::sqrt(f * (1.0 - f) / static_cast<double>(trials));
}

namespace {

void validate(const SimulationConfig& config) {
    require_prime(config.p);
    if (config.N < 1) throw std::invalid_argument("simulate: N must be >= 1");
    if (config.r < 1) throw std::invalid_argument("simulate: r must be >= 1");
    if (config.trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
    if (config.model_version != "CP-1")
        throw std::invalid_argument("simulate: unknown model_version '" + config.model_version + "'");
    // group sizes drawn from must stay in 32 bits
    double bits = static_cast<double>(config.hK) * std::log2(static_cast<double>(config.p));
    double nbits = static_cast<double>(config.N) * static_cast<double>(config.r - 1) *
                   std::log2(static_cast<double>(config.p));
    if (bits > 32 || nbits > 32)
        throw std::invalid_argument("simulate: p^hK and p^{N(r-1)} must fit in 32 bits");
}

void record_step(SimulationReport& report, unsigned long i, unsigned long c, unsigned long rho) {
    if (report.steps.size() <= i) report.steps.resize(i + 1);
    StepStats& s = report.steps[i];
    s.trials_reaching += 1;
    s.class_v_sum += c;
    s.norm_v_sum += rho;
}

} // namespace

SimulationReport simulate_range(const SimulationConfig& config, unsigned long lo, unsigned long hi) {
    validate(config);
    if (hi > config.trials || lo > hi)
        throw std::invalid_argument("simulate_range: bad trial range");

    SimulationReport report;
    report.config = config;
    report.trials = hi - lo;

    const std::uint64_t class_space = [&] {
        std::uint64_t s = 1;
        for (unsigned long i = 0; i < config.hK; ++i) s *= config.p;
        return s;
    }();
    const std::uint64_t norm_space = [&] {
        std::uint64_t s = 1;
        for (unsigned long i = 0; i < config.N * (config.r - 1); ++i) s *= config.p;
        return s;
    }();
    const unsigned long class_targets = config.hK;
    const unsigned long norm_targets = config.N * (config.r - 1);

    std::vector<unsigned long> hits(class_targets);
    std::vector<bool> norm_hit(norm_targets);

    for (unsigned long t = lo; t < hi; ++t) {
        if (config.hK == 0) {
            // trivial class group: trivial module, m = 0, capitulation
            report.m_distribution[0] += 1;
            report.capitulated += 1;
            record_step(report, 0, 0, 0);
            continue;
        }
        // one independent stream per absolute trial index
        SplitMix64 rng{config.seed ^ (0x9E3779B97F4A7C15ULL * (t + 1))};

        std::fill(hits.begin(), hits.end(), 0UL);
        std::fill(norm_hit.begin(), norm_hit.end(), false);
        unsigned long c = class_targets;
        unsigned long rho = norm_targets;
        unsigned long m = 0;
        record_step(report, 0, c, rho);
        while (c + rho > 0) {
            const std::uint64_t class_draw = rng.below(class_space);
            if (class_draw < class_targets) {
                if (hits[class_draw] == 0) --c;
                hits[class_draw] += 1;
            }
            if (norm_targets > 0) {
                const std::uint64_t norm_draw = rng.below(norm_space);
                if (norm_draw < norm_targets && !norm_hit[norm_draw]) {
                    norm_hit[norm_draw] = true;
                    --rho;
                }
            }
            ++m;
            record_step(report, m, c, rho);
        }
        report.m_distribution[m] += 1;

        unsigned long max_hits = 0;
        for (unsigned long h : hits) max_hits = std::max(max_hits, h);
        const unsigned long e = std::min(std::max(max_hits, 1UL), config.hK);
        if (is_smooth(m, e, config.N, config.p)) report.capitulated += 1;
    }
    return report;
}

SimulationReport simulate(const SimulationConfig& config) {
    return simulate_range(config, 0, config.trials);
}

SimulationReport merge(const SimulationReport& a, const SimulationReport& b) {
    if (!(a.config.p == b.config.p && a.config.N == b.config.N && a.config.r == b.config.r &&
          a.config.hK == b.config.hK && a.config.seed == b.config.seed &&
          a.config.trials == b.config.trials && a.config.model_version == b.config.model_version))
        throw std::invalid_argument("merge: reports come from different configurations");
    SimulationReport out;
    out.config = a.config;
    out.trials = a.trials + b.trials;
    out.capitulated = a.capitulated + b.capitulated;
    out.m_distribution = a.m_distribution;
    for (const auto& [m, count] : b.m_distribution) out.m_distribution[m] += count;
    out.steps = a.steps;
    if (out.steps.size() < b.steps.size()) out.steps.resize(b.steps.size());
    for (std::size_t i = 0; i < b.steps.size(); ++i) {
        out.steps[i].trials_reaching += b.steps[i].trials_reaching;
        out.steps[i].class_v_sum += b.steps[i].class_v_sum;
        out.steps[i].norm_v_sum += b.steps[i].norm_v_sum;
    }
    return out;
}

std::string render_report(const SimulationReport& report) {
    std::ostringstream os;
    char buf[64];
    auto f6 = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.6f", x);
        return std::string(buf);
    };
    const SimulationConfig& c = report.config;
    os << "capnorm-sim v1 model=" << c.model_version << "\n";
    os << "p=" << c.p << " N=" << c.N << " r=" << c.r << " hK=" << c.hK << " trials=" << c.trials
       << " seed=" << c.seed << "\n";
    os << "note: rounds drawn independently across filtration steps (model assumption)\n";
    os << "trials_run=" << report.trials << "\n";
    os << "capitulation count=" << report.capitulated << " freq=" << f6(report.capitulation_frequency())
       << " sigma3=" << f6(report.frequency_sigma3()) << "\n";
    os << "m distribution:\n";
    for (const auto& [m, count] : report.m_distribution)
        os << "m=" << m << " count=" << count << " freq="
           << f6(static_cast<double>(count) / static_cast<double>(report.trials)) << "\n";
    os << "steps:\n";
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
        const StepStats& s = report.steps[i];
        if (s.trials_reaching == 0) continue;
        os << "i=" << i << " trials=" << s.trials_reaching << " mean_class_v="
           << f6(static_cast<double>(s.class_v_sum) / static_cast<double>(s.trials_reaching))
           << " mean_norm_v="
           << f6(static_cast<double>(s.norm_v_sum) / static_cast<double>(s.trials_reaching)) << "\n";
    }
    return os.str();
}

} // namespace capnorm
