// ghzkit command-line tool: four-qubit GHZ basis tables, k-separability
// witness reports, twin/un-twin phase diagrams, and a photonic-pipeline
// simulator (counting, dark correction, raw-data mixing, tomography).
//
// Exit codes: 0 success, 2 usage or parse failure, 3 numeric-domain failure.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ghzkit/json_io.hpp"
#include "ghzkit/plot.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string out;
    bool quiet = false;
};

void log_line(const GlobalOpts& g, const std::string& msg) {
    if (!g.quiet) std::cerr << "[ghzkit] " << msg << "\n";
}

// Collects file outputs and finishes with a digest manifest beside them; a
// run that writes no files writes no manifest.
class Sink {
  public:
    Sink(std::string prefix, std::string command, const std::vector<std::string>& args,
         std::uint64_t seed)
        : prefix_(std::move(prefix)) {
        manifest_.command = std::move(command);
        manifest_.args = args;
        manifest_.seed = seed;
        manifest_.version = kVersion;
    }

    void write(const std::string& suffix, const std::string& content) {
        const std::string path = prefix_ + suffix;
        ghzkit::write_text_file(path, content);
        manifest_.outputs.emplace_back(path, ghzkit::content_digest(content));
        written_.push_back(path);
    }

    // Writes <prefix>.manifest.json when anything was produced.
    std::vector<std::string> finish() {
        if (!manifest_.outputs.empty())
            ghzkit::write_text_file(prefix_ + ".manifest.json",
                                    ghzkit::manifest_to_json(manifest_).dump(2) + "\n");
        return written_;
    }

  private:
    std::string prefix_;
    ghzkit::RunManifest manifest_;
    std::vector<std::string> written_;
};

std::vector<std::string> collect_args(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return args;
}

ghzkit::ojson basis_entry_json(const ghzkit::GhzLabel& label) {
    ghzkit::ojson j;
    j["label"] = label.str();
    j["twin"] = ghzkit::twin_of(label).str();
    j["ket"] = ghzkit::ket_notation(label);
    ghzkit::ojson state = ghzkit::state_to_json(ghzkit::basis_state(label));
    for (auto& [key, value] : state.items()) j[key] = value;
    return j;
}

std::string twin_table() {
    std::string out = "twin pairs:\n";
    for (unsigned c = 0; c < 16; ++c) {
        ghzkit::GhzLabel label(c);
        ghzkit::GhzLabel twin = ghzkit::twin_of(label);
        if (label.code < twin.code) out += label.str() + " <-> " + twin.str() + "\n";
    }
    return out;
}

// Classification from witness values alone (the count route has no direct
// partial-transpose test); same thresholds and precedence as classify().
std::string witness_only_classification(const ghzkit::CountWitnessReport& rep) {
    constexpr double tol = 1e-10;
    if (rep.i2 > tol) return "GME";
    if (rep.i3 > tol) return "NOT3SEP";
    if (rep.i4 > tol) return "NOT4SEP";
    return "UNDETECTED";
}

long parse_shots(const std::string& s) {
    if (s == "inf") return 0;  // analytic mode
    std::size_t used = 0;
    long n = 0;
    try {
        n = std::stol(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("--shots expects a nonnegative integer or \"inf\"");
    }
    if (used != s.size())
        throw std::invalid_argument("--shots expects a nonnegative integer or \"inf\"");
    return n;
}

// ---------------------------------------------------------------------------
// basis
// ---------------------------------------------------------------------------

struct BasisArgs {
    std::string label;
    bool all = false;
    std::string format = "ket";
};

void run_basis(const BasisArgs& a, const GlobalOpts& g, const std::vector<std::string>& argv) {
    if (a.all == !a.label.empty())
        throw std::invalid_argument("basis: give exactly one of LABEL or --all");
    std::string payload;
    std::string suffix;
    if (a.all) {
        if (a.format == "json") {
            ghzkit::ojson arr = ghzkit::ojson::array();
            for (unsigned c = 0; c < 16; ++c) arr.push_back(basis_entry_json(ghzkit::GhzLabel(c)));
            payload = arr.dump(2) + "\n";
            suffix = ".basis.json";
        } else {
            for (unsigned c = 0; c < 16; ++c) {
                ghzkit::GhzLabel label(c);
                payload += label.str() + "  " + ghzkit::ket_notation(label) + "\n";
            }
            payload += "\n" + twin_table();
            suffix = ".basis.txt";
        }
    } else {
        ghzkit::GhzLabel label = ghzkit::GhzLabel::parse(a.label);
        if (a.format == "json") {
            payload = basis_entry_json(label).dump(2) + "\n";
            suffix = ".basis.json";
        } else {
            payload = ghzkit::ket_notation(label) + "\n";
            suffix = ".basis.txt";
        }
    }
    std::cout << payload;
    if (!g.out.empty()) {
        Sink sink(g.out, "basis", argv, g.seed);
        sink.write(suffix, payload);
        for (const std::string& f : sink.finish()) log_line(g, "wrote " + f);
    }
}

// ---------------------------------------------------------------------------
// witness
// ---------------------------------------------------------------------------

struct WitnessArgs {
    std::string label;
    std::string state_file;
    std::string adapt = "auto";
    std::string variant = "normalized";
};

void run_witness(const WitnessArgs& a, const GlobalOpts& g,
                 const std::vector<std::string>& argv) {
    if (a.label.empty() == a.state_file.empty())
        throw std::invalid_argument("witness: give exactly one of --label or --state-file");
    ghzkit::I2Variant variant = ghzkit::parse_variant(a.variant);
    ghzkit::DensityMatrix rho =
        a.label.empty()
            ? ghzkit::density_from_state_json(ghzkit::parse_json_file(a.state_file))
            : ghzkit::DensityMatrix(
                  ghzkit::basis_state(ghzkit::GhzLabel::parse(a.label)).projector());

    ghzkit::WitnessReport rep;
    if (a.adapt == "auto") {
        rep = ghzkit::best_k_report(rho, variant);
    } else {
        ghzkit::GhzLabel target = ghzkit::GhzLabel::parse(a.adapt);
        rep.i2 = ghzkit::eval_i2_adapted(rho, target, variant);
        rep.i3 = ghzkit::eval_i3_adapted(rho, target);
        rep.i4 = ghzkit::eval_i4_adapted(rho, target);
        rep.lin_i2 =
            ghzkit::eval_observable(ghzkit::adapt(ghzkit::lin_i2_observable(), target), rho);
        rep.adapted_to = target;
        rep.variant = variant;
    }
    const std::string payload = ghzkit::witness_report_to_json(rep).dump(2) + "\n";
    std::cout << payload;
    if (!g.out.empty()) {
        Sink sink(g.out, "witness", argv, g.seed);
        sink.write(".witness.json", payload);
        for (const std::string& f : sink.finish()) log_line(g, "wrote " + f);
    }
}

// ---------------------------------------------------------------------------
// phase-diagram
// ---------------------------------------------------------------------------

struct PhaseArgs {
    std::vector<std::string> pair;
    std::vector<std::string> triple;
    int resolution = 60;
    std::string variant = "normalized";
};

void run_phase_diagram(const PhaseArgs& a, const GlobalOpts& g,
                       const std::vector<std::string>& argv) {
    if (a.pair.empty() == a.triple.empty())
        throw std::invalid_argument("phase-diagram: give exactly one of --pair or --triple");
    ghzkit::I2Variant variant = ghzkit::parse_variant(a.variant);

    std::vector<ghzkit::ScanCell> cells;
    std::string title, prefix;
    std::string svg;
    if (!a.pair.empty()) {
        ghzkit::GhzLabel la = ghzkit::GhzLabel::parse(a.pair[0]);
        ghzkit::GhzLabel lb = ghzkit::GhzLabel::parse(a.pair[1]);
        cells = ghzkit::scan_binary(la, lb, a.resolution, variant);
        title = "GHZ mixture " + la.str() + " + " + lb.str();
        prefix = g.out.empty() ? "phase_" + la.str() + "_" + lb.str() : g.out;
        svg = ghzkit::phase_diagram_svg_binary(cells, a.resolution, title);
    } else {
        ghzkit::GhzLabel la = ghzkit::GhzLabel::parse(a.triple[0]);
        ghzkit::GhzLabel lb = ghzkit::GhzLabel::parse(a.triple[1]);
        ghzkit::GhzLabel lc = ghzkit::GhzLabel::parse(a.triple[2]);
        cells = ghzkit::scan_ternary(la, lb, lc, a.resolution, variant);
        title = "GHZ mixture " + la.str() + " + " + lb.str() + " + " + lc.str();
        prefix = g.out.empty() ? "phase_" + la.str() + "_" + lb.str() + "_" + lc.str() : g.out;
        svg = ghzkit::phase_diagram_svg_ternary(cells, a.resolution, title);
    }

    Sink sink(prefix, "phase-diagram", argv, g.seed);
    sink.write(".csv", ghzkit::scan_csv(cells));
    sink.write(".svg", svg);
    for (const std::string& f : sink.finish()) log_line(g, "wrote " + f);
    log_line(g, "scanned " + std::to_string(cells.size()) + " nodes");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string label;
    double noise = 0.0;
    std::string shots = "inf";
    double dark = 0.0;
    std::string task = "witness";
    std::string variant = "normalized";
};

void run_simulate(const SimulateArgs& a, const GlobalOpts& g,
                  const std::vector<std::string>& argv) {
    ghzkit::GhzLabel label = ghzkit::GhzLabel::parse(a.label);
    ghzkit::I2Variant variant = ghzkit::parse_variant(a.variant);
    ghzkit::NoiseModel nm;
    nm.white_noise_weight = a.noise;
    nm.dark_rate = a.dark;
    nm.shots_per_setting = parse_shots(a.shots);
    nm.rng_seed = g.seed;
    nm.validate();

    const bool tomography = a.task == "fqst";
    ghzkit::DensityMatrix rho = ghzkit::prep(label, nm);
    std::vector<std::string> settings =
        tomography ? ghzkit::fqst_settings() : ghzkit::witness_settings();
    const int budget = ghzkit::measurement_budget(tomography ? ghzkit::MeasurementTask::fqst
                                                             : ghzkit::MeasurementTask::witness);
    log_line(g, "measurement budget: " + std::to_string(budget) + " (" + a.task + ", " +
                    std::to_string(settings.size()) + " settings x 16 outcomes)");

    std::vector<ghzkit::CountRecord> records = ghzkit::sample_counts(rho, settings, nm);
    // Raw records go to disk; analysis uses dark-corrected copies.
    std::vector<ghzkit::CountRecord> analysis = records;
    if (!nm.analytic() && nm.dark_rate > 0.0) {
        for (auto& r : analysis) r = ghzkit::dark_correct(r);
        log_line(g, "dark correction applied before analysis (rate " +
                        std::to_string(nm.dark_rate) + " per bin)");
    }

    std::string payload;
    std::string suffix;
    if (tomography) {
        ghzkit::FqstResult res = ghzkit::fqst(analysis);
        ghzkit::ojson j = ghzkit::density_to_json(res.projected);
        j["label"] = label.str();
        j["purity"] = ghzkit::purity(res.projected);
        j["fidelity_with_target"] =
            ghzkit::fidelity_with_pure(res.projected, ghzkit::basis_state(label));
        payload = j.dump(2) + "\n";
        suffix = ".fqst.json";
    } else {
        ghzkit::CountWitnessReport rep = ghzkit::witness_from_counts(analysis, label, variant);
        payload = ghzkit::witness_report_to_json(rep).dump(2) + "\n";
        suffix = ".witness.json";
    }

    std::cout << payload;
    const std::string prefix = g.out.empty() ? "ghzkit-run" : g.out;
    Sink sink(prefix, "simulate", argv, g.seed);
    sink.write(".counts.jsonl", ghzkit::count_records_to_jsonl(records));
    sink.write(suffix, payload);
    for (const std::string& f : sink.finish()) log_line(g, "wrote " + f);
}

// ---------------------------------------------------------------------------
// mix-counts
// ---------------------------------------------------------------------------

struct MixCountsArgs {
    std::string weights_file;
    std::string inputs_dir = ".";
    std::string task = "witness";
    std::string variant = "normalized";
};

void run_mix_counts(const MixCountsArgs& a, const GlobalOpts& g,
                    const std::vector<std::string>& argv) {
    ghzkit::MixtureSpec spec =
        ghzkit::mixture_spec_from_json(ghzkit::parse_json_file(a.weights_file));
    try {
        spec.validate();
    } catch (const std::domain_error& e) {
        // A bad weights file is an input problem, not a numeric-domain failure.
        throw ghzkit::io_error(std::string("weights file: ") + e.what());
    }
    ghzkit::I2Variant variant = ghzkit::parse_variant(a.variant);

    std::vector<std::vector<ghzkit::CountRecord>> sets;
    std::vector<double> weights;
    for (const ghzkit::MixtureComponent& c : spec.components) {
        const std::string path = a.inputs_dir + "/" + c.label.str() + ".counts.jsonl";
        sets.push_back(ghzkit::count_records_from_jsonl(ghzkit::read_text_file(path)));
        weights.push_back(c.weight);
        log_line(g, "component " + c.label.str() + " weight " + std::to_string(c.weight) +
                        " from " + path);
    }
    if (spec.noise_weight > 0.0) {
        // White noise contributes a uniform outcome histogram under every
        // setting; synthesize it to match the first component's profile.
        std::vector<ghzkit::CountRecord> synth = sets.front();
        for (ghzkit::CountRecord& r : synth) {
            const double total = r.shots > 0.0 ? r.shots : 1.0;
            r.counts.fill(total / 16.0);
            r.dark_rate = 0.0;
            r.corrected = true;
        }
        sets.push_back(std::move(synth));
        weights.push_back(spec.noise_weight);
    }

    std::vector<ghzkit::CountRecord> mixed = ghzkit::weighted_mix_counts(sets, weights);

    ghzkit::ojson j;
    std::string extra_payload, extra_suffix;
    if (a.task == "fqst") {
        ghzkit::FqstResult res = ghzkit::fqst(mixed);
        ghzkit::Classification cls = ghzkit::classify(res.projected, variant);
        j["classification"] = ghzkit::region_name(cls.region);
        j["i2"] = cls.witness.i2;
        j["i3"] = cls.witness.i3;
        j["i4"] = cls.witness.i4;
        j["lin_i2"] = cls.witness.lin_i2;
        j["adapted_to"] = cls.witness.adapted_to.str();
        j["variant"] = ghzkit::variant_name(variant);
        j["min_pt_eig"] =
            *std::min_element(cls.ppt.min_eigs.begin(), cls.ppt.min_eigs.end());
        j["ppt_all"] = cls.ppt.ppt_all;
        j["pt_invariant"] = cls.ppt.pt_invariant;
        extra_payload = ghzkit::density_to_json(res.projected).dump(2) + "\n";
        extra_suffix = ".fqst.json";
    } else {
        ghzkit::CountWitnessReport rep = ghzkit::best_count_witness(mixed, variant);
        j = ghzkit::witness_report_to_json(rep);
        j["classification"] = witness_only_classification(rep);
    }
    const std::string payload = j.dump(2) + "\n";
    std::cout << payload;

    if (!g.out.empty()) {
        Sink sink(g.out, "mix-counts", argv, g.seed);
        sink.write(".mixed.counts.jsonl", ghzkit::count_records_to_jsonl(mixed));
        sink.write(".report.json", payload);
        if (!extra_payload.empty()) sink.write(extra_suffix, extra_payload);
        for (const std::string& f : sink.finish()) log_line(g, "wrote " + f);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"four-qubit GHZ basis, k-separability witnesses, separability phase "
                 "diagrams, and a photonic-pipeline simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "RNG seed for sampling commands")->capture_default_str();
    app.add_option("--out", g.out, "output file prefix (enables file outputs + manifest)");
    app.add_flag("--quiet", g.quiet, "suppress progress logging on stderr");

    const std::vector<std::string> args = collect_args(argc, argv);

    BasisArgs basis_args;
    CLI::App* basis = app.add_subcommand("basis", "print basis states and the twin map");
    basis->fallthrough();
    basis->add_option("label", basis_args.label, "4-bit label, e.g. 0101");
    basis->add_flag("--all", basis_args.all, "all 16 states plus the twin-pair table");
    basis->add_option("--format", basis_args.format, "ket|json")
        ->check(CLI::IsMember({"ket", "json"}));

    WitnessArgs witness_args;
    CLI::App* witness = app.add_subcommand("witness", "evaluate the k-separability witnesses");
    witness->fallthrough();
    witness->add_option("--label", witness_args.label, "evaluate on a basis state");
    witness->add_option("--state-file", witness_args.state_file,
                        "evaluate on a JSON state or density matrix");
    witness->add_option("--adapt", witness_args.adapt, "witness frame: a label, or auto");
    witness->add_option("--variant", witness_args.variant, "normalized|as-printed");

    PhaseArgs phase_args;
    CLI::App* phase = app.add_subcommand("phase-diagram", "separability scan of a GHZ mixture");
    phase->fallthrough();
    phase->add_option("--pair", phase_args.pair, "two labels: alpha A + beta B + noise")
        ->expected(2);
    phase->add_option("--triple", phase_args.triple,
                      "three labels: twin pair A,B plus un-twin C")
        ->expected(3);
    phase->add_option("--resolution", phase_args.resolution, "grid subdivisions per axis")
        ->capture_default_str();
    phase->add_option("--variant", phase_args.variant, "normalized|as-printed");

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "run the photonic pipeline");
    simulate->fallthrough();
    simulate->add_option("--label", sim_args.label, "basis state to prepare")->required();
    simulate->add_option("--noise", sim_args.noise, "white-noise weight p in [0,1)")
        ->capture_default_str();
    simulate->add_option("--shots", sim_args.shots, "shots per setting, or inf for analytic")
        ->capture_default_str();
    simulate->add_option("--dark", sim_args.dark, "dark counts per outcome bin per setting")
        ->capture_default_str();
    simulate->add_option("--task", sim_args.task, "witness|fqst")
        ->check(CLI::IsMember({"witness", "fqst"}));
    simulate->add_option("--variant", sim_args.variant, "normalized|as-printed");

    MixCountsArgs mix_args;
    CLI::App* mix = app.add_subcommand("mix-counts", "weighted mixing of raw count data");
    mix->fallthrough();
    mix->add_option("--weights", mix_args.weights_file, "JSON weights file")->required();
    mix->add_option("--inputs", mix_args.inputs_dir, "directory of <label>.counts.jsonl")
        ->capture_default_str();
    mix->add_option("--task", mix_args.task, "witness|fqst")
        ->check(CLI::IsMember({"witness", "fqst"}));
    mix->add_option("--variant", mix_args.variant, "normalized|as-printed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (basis->parsed()) run_basis(basis_args, g, args);
        if (witness->parsed()) run_witness(witness_args, g, args);
        if (phase->parsed()) run_phase_diagram(phase_args, g, args);
        if (simulate->parsed()) run_simulate(sim_args, g, args);
        if (mix->parsed()) run_mix_counts(mix_args, g, args);
    } catch (const ghzkit::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
