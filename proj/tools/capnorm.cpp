#include "capnorm/heuristics.hpp"
#include "capnorm/ingest.hpp"
#include "capnorm/normpoly.hpp"
#include "capnorm/tower.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <unistd.h>

namespace {

using namespace capnorm;

bool color_enabled() {
    const char* mode = std::getenv("CAPNORM_COLOR");
    const std::string m = mode ? mode : "auto";
    if (m == "always") return true;
    if (m == "never") return false;
    return isatty(1);
}

std::string colorize_verdicts(const std::string& text) {
    if (!color_enabled()) return text;
    std::string out;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!first) out += "\n";
        first = false;
        if (line.find("Complete capitulation") != std::string::npos)
            out += "\033[32m" + line + "\033[0m";
        else if (line.find("Incomplete capitulation") != std::string::npos)
            out += "\033[33m" + line + "\033[0m";
        else if (line.find("No capitulation") != std::string::npos)
            out += "\033[31m" + line + "\033[0m";
        else
            out += line;
    }
    out += "\n";
    return out;
}

std::vector<std::pair<unsigned long, GenusLedger>> parse_ledger_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open ledger file '" + path + "'");
    std::vector<std::pair<unsigned long, GenusLedger>> out;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        std::istringstream is(line);
        std::string key;
        if (!(is >> key) || key[0] == '#') continue;
        if (key != "layer")
            throw ParseError("ledger line " + std::to_string(ln) + ": expected 'layer <n> ...'");
        GenusLedger ledger;
        unsigned long n = 0;
        if (!(is >> n)) throw ParseError("ledger line " + std::to_string(ln) + ": missing layer index");
        ledger.n = n;
        std::string field;
        unsigned long value;
        while (is >> field >> value) {
            if (field == "hK") ledger.hK = value;
            else if (field == "j") ledger.j_image = value;
            else if (field == "ram") ledger.ram_order = value;
            else if (field == "unit") ledger.unit_quotient = value;
            else if (field == "normidx") ledger.norm_index = value;
            else if (field == "r") ledger.r = value;
            else throw ParseError("ledger line " + std::to_string(ln) + ": unknown field '" + field + "'");
        }
        out.emplace_back(n, ledger);
    }
    return out;
}

void print_warnings(const ParseResult& parsed) {
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_nu(unsigned long p, unsigned long N, long k) {
    const NormPolynomial nu = build_nu(p, N);
    if (k >= 0)
        std::cout << format_decomposition(decompose(nu, static_cast<unsigned long>(k)));
    else
        std::cout << format_nu_with_decompositions(nu);
    return 0;
}

int cmd_analyze(const std::string& file, unsigned long layer, bool machine) {
    const ParseResult parsed = parse_tower_file(file);
    print_warnings(parsed);
    const TowerData& tower = parsed.tower;
    const LayerRecord& rec = tower.layer(layer);

    std::ostringstream os;
    const char* sep = machine ? " " : ": ";
    if (!rec.module && !rec.printed_norms)
        throw std::domain_error("layer " + std::to_string(layer) +
                                " carries structure only (no sigma rows, no norms)");
    if (rec.module && !rec.module->trivial()) {
        const ModuleInvariants inv = invariants(*rec.module);
        const Filtration filt = filtration(*rec.module);
        os << "orders_v" << sep;
        for (std::size_t i = 0; i < rec.orders.size(); ++i) os << (i ? " " : "") << rec.orders[i];
        os << "\n";
        os << "order_v" << sep << inv.order_v << "\n";
        os << "p_rank" << sep << inv.p_rank << "\n";
        os << "e" << sep << inv.e << "\n";
        os << "m" << sep << inv.m << "\n";
        if (inv.s) os << "s" << sep << *inv.s << "\n";
        os << "filtration_subgroups_v" << sep;
        for (std::size_t i = 0; i < filt.subgroup_orders.size(); ++i)
            os << (i ? " " : "") << filt.subgroup_orders[i];
        os << "\n";
        os << "filtration_quotients_v" << sep;
        for (std::size_t i = 0; i < filt.quotient_orders.size(); ++i)
            os << (i ? " " : "") << filt.quotient_orders[i];
        os << "\n";
    }
    const CapitulationVerdict verdict = layer_verdict(tower, layer);
    os << verdict_line(tower, layer) << "\n";
    os << "rule" << sep << rule_name(verdict.rule) << "\n";
    os << "kernel_v" << sep << verdict.kernel_order_v << "\n";
    if (rec.module) {
        const auto crit = check_sufficient_criterion(*rec.module);
        os << (machine ? "smooth_criterion" : "smooth criterion") << sep
           << (crit ? "fires" : "silent") << "\n";
    }
    std::cout << (machine ? os.str() : colorize_verdicts(os.str()));
    return 0;
}

int cmd_tower(const std::string& file, const std::string& ledger_path, bool machine) {
    const ParseResult parsed = parse_tower_file(file);
    print_warnings(parsed);
    ReportOptions opts;
    opts.machine = machine;
    if (!ledger_path.empty()) opts.ledgers = parse_ledger_file(ledger_path);
    const std::string report = render_tower_report(parsed.tower, opts);
    std::cout << (machine ? report : colorize_verdicts(report));
    return 0;
}

int cmd_simulate(const SimulationConfig& config) {
    std::cout << render_report(simulate(config));
    return 0;
}

int cmd_convert(const std::string& in, const std::string& out, const std::string& from) {
    std::ifstream is(in, std::ios::binary);
    if (!is) throw ParseError("cannot open '" + in + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    ParseResult parsed;
    if (from == "transcript") parsed = parse_transcript(buf.str());
    else if (from == "canonical") parsed = parse_canonical(buf.str());
    else parsed = parse_tower_auto(buf.str());
    print_warnings(parsed);
    const std::string text = to_canonical(parsed.tower);
    if (out == "-") {
        std::cout << text;
    } else {
        std::ofstream os(out, std::ios::binary);
        if (!os) throw ParseError("cannot write '" + out + "'");
        os << text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"capitulation toolkit: algebraic-norm decompositions, Galois filtrations,"
                 " tower audits, heuristics"};
    app.require_subcommand(1);

    unsigned long arg_p = 2, arg_N = 1;
    long arg_k = -1;
    std::string nu_format = "text";
    auto* nu = app.add_subcommand("nu", "print the norm polynomial and its decompositions");
    nu->add_option("--p", arg_p, "prime")->required();
    nu->add_option("--N", arg_N, "tower exponent")->required();
    nu->add_option("--k", arg_k, "single decomposition index");
    nu->add_option("--format", nu_format, "text|canonical (the output is the same token format)")
        ->check(CLI::IsMember({"text", "canonical"}));

    std::string arg_file, arg_format = "text";
    unsigned long arg_layer = 1;
    auto* analyze = app.add_subcommand("analyze", "analyze one layer of a tower file");
    analyze->add_option("--file", arg_file, "tower file (transcript or canonical)")->required();
    analyze->add_option("--layer", arg_layer, "layer index")->required();
    analyze->add_option("--format", arg_format, "text|canonical")
        ->check(CLI::IsMember({"text", "canonical"}));

    std::string tower_file, tower_ledger, tower_format = "text";
    auto* tower = app.add_subcommand("tower", "audit a full tower file");
    tower->add_option("--file", tower_file, "tower file (transcript or canonical)")->required();
    tower->add_option("--ledger", tower_ledger, "genus ledger file");
    tower->add_option("--format", tower_format, "text|canonical")
        ->check(CLI::IsMember({"text", "canonical"}));

    capnorm::SimulationConfig sim;
    std::string sim_format = "text";
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo filtration model CP-1");
    simulate->add_option("--p", sim.p, "prime")->required();
    simulate->add_option("--N", sim.N, "tower exponent")->required();
    simulate->add_option("--r", sim.r, "ramified places")->required();
    simulate->add_option("--hk", sim.hK, "v_p of the base class number")->required();
    simulate->add_option("--trials", sim.trials, "trial count")->required();
    simulate->add_option("--seed", sim.seed, "rng seed")->required();
    simulate->add_option("--model", sim.model_version, "model tag (CP-1)");
    simulate->add_option("--format", sim_format, "text|canonical")
        ->check(CLI::IsMember({"text", "canonical"}));

    std::string conv_in, conv_out, conv_from = "auto", conv_to = "canonical",
                conv_format = "canonical";
    auto* convert = app.add_subcommand("convert", "convert tower files to the canonical format");
    convert->add_option("--in", conv_in, "input file")->required();
    convert->add_option("--out", conv_out, "output file ('-' for stdout)")->required();
    convert->add_option("--from", conv_from, "transcript|canonical (default: sniff)")
        ->check(CLI::IsMember({"transcript", "canonical", "auto"}));
    convert->add_option("--to", conv_to, "canonical")->check(CLI::IsMember({"canonical"}));
    convert->add_option("--format", conv_format, "canonical (output is always canonical)")
        ->check(CLI::IsMember({"canonical"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (nu->parsed()) return cmd_nu(arg_p, arg_N, arg_k);
        if (analyze->parsed()) return cmd_analyze(arg_file, arg_layer, arg_format == "canonical");
        if (tower->parsed()) return cmd_tower(tower_file, tower_ledger, tower_format == "canonical");
        if (simulate->parsed()) return cmd_simulate(sim);
        if (convert->parsed()) return cmd_convert(conv_in, conv_out, conv_from);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
