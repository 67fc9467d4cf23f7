#pragma once
// File formats: JSON for states, density matrices, witness reports, mixture
// weight files and run manifests; JSON-lines for measurement count records.
// All writers are deterministic (fixed key order, shortest-round-trip floats,
// LF line endings) so reruns produce byte-identical artifacts.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ghzkit/experiment.hpp"
#include "ghzkit/mixtures.hpp"
#include "ghzkit/witness.hpp"
#include "nlohmann/json.hpp"

namespace ghzkit {

// Insertion-ordered JSON keeps serialized key order stable across runs.
using ojson = nlohmann::ordered_json;

// Raised for malformed input files; callers map it to a usage/parse failure
// (distinct from numeric-domain errors raised by the math layer).
struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline ojson complex_to_json(cxd z) { return ojson::array({z.real(), z.imag()}); }

inline cxd complex_from_json(const ojson& j, const char* where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw io_error(std::string(where) + ": complex values must be [re, im] arrays");
    return cxd(j[0].get<double>(), j[1].get<double>());
}

// Counts are doubles to admit analytic probabilities and weighted mixes, but
// sampled data is integral; render whole numbers without a fractional part.
inline ojson number_to_json(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.007199254740992e15)
        return ojson(static_cast<std::int64_t>(v));
    return ojson(v);
}

inline const ojson& require_field(const ojson& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end())
        throw io_error(std::string(where) + ": missing field \"" + key + "\"");
    return *it;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// StateVector / DensityMatrix
// ---------------------------------------------------------------------------

inline ojson state_to_json(const StateVector& psi) {
    ojson j;
    j["convention"] = "msb-first-1-based";
    j["dim"] = psi.dim();
    ojson amps = ojson::array();
    for (std::size_t i = 0; i < psi.dim(); ++i)
        amps.push_back(detail::complex_to_json(psi.amp(i)));
    j["amplitudes"] = std::move(amps);
    return j;
}

inline StateVector state_from_json(const ojson& j) {
    const char* where = "state";
    const ojson& dim = detail::require_field(j, "dim", where);
    const ojson& amps = detail::require_field(j, "amplitudes", where);
    if (!dim.is_number_unsigned() || !amps.is_array() || amps.size() != dim.get<std::size_t>())
        throw io_error("state: \"amplitudes\" length must equal \"dim\"");
    std::vector<cxd> v;
    v.reserve(amps.size());
    for (const ojson& a : amps) v.push_back(detail::complex_from_json(a, where));
    return StateVector(std::move(v));
}

inline ojson density_to_json(const DensityMatrix& rho) {
    ojson j;
    j["convention"] = "msb-first-1-based";
    j["dim"] = rho.dim();
    ojson rows = ojson::array();
    for (std::size_t r = 0; r < rho.dim(); ++r) {
        ojson row = ojson::array();
        for (std::size_t c = 0; c < rho.dim(); ++c)
            row.push_back(detail::complex_to_json(rho(r, c)));
        rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
    return j;
}

inline DensityMatrix density_from_json(const ojson& j) {
    const char* where = "density matrix";
    const ojson& dim = detail::require_field(j, "dim", where);
    const ojson& rows = detail::require_field(j, "matrix", where);
    if (!dim.is_number_unsigned() || !rows.is_array() || rows.size() != dim.get<std::size_t>())
        throw io_error("density matrix: \"matrix\" must be dim x dim");
    const std::size_t n = rows.size();
    Mat m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!rows[r].is_array() || rows[r].size() != n)
            throw io_error("density matrix: \"matrix\" must be dim x dim");
        for (std::size_t c = 0; c < n; ++c)
            m(r, c) = detail::complex_from_json(rows[r][c], where);
    }
    return DensityMatrix(std::move(m));
}

// A state file may hold either a ket or a density matrix; dispatch on keys.
inline DensityMatrix density_from_state_json(const ojson& j) {
    if (j.contains("matrix")) return density_from_json(j);
    if (j.contains("amplitudes"))
        return DensityMatrix(state_from_json(j).normalized().projector());
    throw io_error("state file: expected an \"amplitudes\" or \"matrix\" field");
}

// ---------------------------------------------------------------------------
// Witness reports
// ---------------------------------------------------------------------------

inline ojson witness_report_to_json(const WitnessReport& rep) {
    ojson j;
    j["i2"] = rep.i2;
    j["i3"] = rep.i3;
    j["i4"] = rep.i4;
    j["lin_i2"] = rep.lin_i2;
    j["adapted_to"] = rep.adapted_to.str();
    j["variant"] = variant_name(rep.variant);
    return j;
}

// Count-derived reports carry the propagated standard error as an extra field.
inline ojson witness_report_to_json(const CountWitnessReport& rep) {
    ojson j;
    j["i2"] = rep.i2;
    j["i3"] = rep.i3;
    j["i4"] = rep.i4;
    j["lin_i2"] = rep.lin_i2;
    j["lin_i2_se"] = rep.lin_i2_se;
    j["adapted_to"] = rep.adapted_to.str();
    j["variant"] = variant_name(rep.variant);
    return j;
}

// ---------------------------------------------------------------------------
// Count records (JSON lines)
// ---------------------------------------------------------------------------

inline std::string count_record_to_json_line(const CountRecord& rec) {
    ojson j;
    j["setting"] = rec.setting;
    ojson counts = ojson::array();
    for (double c : rec.counts) counts.push_back(detail::number_to_json(c));
    j["counts"] = std::move(counts);
    j["shots"] = detail::number_to_json(rec.shots);
    j["dark_rate"] = detail::number_to_json(rec.dark_rate);
    j["corrected"] = rec.corrected;
    return j.dump();
}

inline std::string count_records_to_jsonl(const std::vector<CountRecord>& recs) {
    std::string out;
    for (const CountRecord& r : recs) {
        out += count_record_to_json_line(r);
        out += '\n';
    }
    return out;
}

inline CountRecord count_record_from_json(const ojson& j) {
    const char* where = "count record";
    CountRecord rec;
    const ojson& setting = detail::require_field(j, "setting", where);
    if (!setting.is_string())
        throw io_error("count record: \"setting\" must be a string");
    rec.setting = setting.get<std::string>();
    validate_setting(rec.setting);
    const ojson& counts = detail::require_field(j, "counts", where);
    if (!counts.is_array() || counts.size() != 16)
        throw io_error("count record: \"counts\" must hold 16 numbers");
    for (std::size_t o = 0; o < 16; ++o) {
        if (!counts[o].is_number())
            throw io_error("count record: \"counts\" must hold 16 numbers");
        rec.counts[o] = counts[o].get<double>();
        if (rec.counts[o] < 0.0)
            throw io_error("count record: counts must be nonnegative");
    }
    rec.shots = detail::require_field(j, "shots", where).get<double>();
    rec.dark_rate = detail::require_field(j, "dark_rate", where).get<double>();
    rec.corrected = detail::require_field(j, "corrected", where).get<bool>();
    return rec;
}

inline std::vector<CountRecord> count_records_from_jsonl(const std::string& text) {
    std::vector<CountRecord> recs;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            recs.push_back(count_record_from_json(ojson::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw io_error("count records line " + std::to_string(lineno) + ": " + e.what());
        } catch (const io_error& e) {
            throw io_error("count records line " + std::to_string(lineno) + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw io_error("count records line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return recs;
}

// ---------------------------------------------------------------------------
// Mixture weight files
// ---------------------------------------------------------------------------
// {"components": [{"label": "0000", "weight": 0.5}, ...], "noise_weight": 0.0}
// The same document drives both density-level mixing (mix()) and count-level
// mixing (weighted_mix_counts); noise_weight defaults to 0 when absent.

inline ojson mixture_spec_to_json(const MixtureSpec& spec) {
    ojson j;
    ojson comps = ojson::array();
    for (const MixtureComponent& c : spec.components) {
        ojson e;
        e["label"] = c.label.str();
        e["weight"] = c.weight;
        comps.push_back(std::move(e));
    }
    j["components"] = std::move(comps);
    j["noise_weight"] = spec.noise_weight;
    return j;
}

inline MixtureSpec mixture_spec_from_json(const ojson& j) {
    const char* where = "weights file";
    MixtureSpec spec;
    const ojson& comps = detail::require_field(j, "components", where);
    if (!comps.is_array() || comps.empty())
        throw io_error("weights file: \"components\" must be a non-empty array");
    for (const ojson& e : comps) {
        const ojson& label = detail::require_field(e, "label", where);
        const ojson& weight = detail::require_field(e, "weight", where);
        if (!label.is_string() || !weight.is_number())
            throw io_error("weights file: each component needs a string \"label\" "
                           "and numeric \"weight\"");
        try {
            spec.components.push_back(
                {GhzLabel::parse(label.get<std::string>()), weight.get<double>()});
        } catch (const std::invalid_argument& e2) {
            throw io_error(std::string("weights file: ") + e2.what());
        }
    }
    if (j.contains("noise_weight")) {
        if (!j["noise_weight"].is_number())
            throw io_error("weights file: \"noise_weight\" must be a number");
        spec.noise_weight = j["noise_weight"].get<double>();
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string content_digest(std::string_view bytes) {
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out = "fnv1a64:";
    for (int shift = 60; shift >= 0; shift -= 4)
        out += hex[(h >> shift) & 0xF];
    return out;
}

struct RunManifest {
    std::string command;
    std::vector<std::string> args;
    std::uint64_t seed = 0;
    std::string version;
    std::vector<std::pair<std::string, std::string>> outputs;  // filename -> digest
};

inline ojson manifest_to_json(const RunManifest& m) {
    ojson j;
    j["command"] = m.command;
    j["args"] = m.args;
    j["seed"] = m.seed;
    j["version"] = m.version;
    ojson outs = ojson::object();
    for (const auto& [file, digest] : m.outputs) outs[file] = digest;
    j["outputs"] = std::move(outs);
    return j;
}

// ---------------------------------------------------------------------------
// Plain file helpers
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw io_error("failed to write file: " + path);
}

inline ojson parse_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path + ": " + e.what());
    }
}

}  // namespace ghzkit
