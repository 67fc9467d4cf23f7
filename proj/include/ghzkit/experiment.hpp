#pragma once

// Photonic pipeline simulation: SPDC source, q-plates, waveplate state
// preparation, projective counting with shot noise and dark counts,
// dark-count correction, weighted raw-data mixing, and full state tomography
// by linear inversion with positivity projection.
//
// Qubit roles: 1 = photon-a polarization, 2 = photon-a OAM, 3 = photon-b
// polarization, 4 = photon-b OAM; R/r encode 0, L/l encode 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghzkit/basis.hpp"
#include "ghzkit/qmath.hpp"
#include "ghzkit/sampling.hpp"
#include "ghzkit/witness.hpp"

namespace ghzkit {

// --- source and q-plates ----------------------------------------------------

// (|R,0>_a |L,0>_b - |L,0>_a |R,0>_b)/sqrt(2): polarization singlet with both
// OAM factors in the m=0 reference state.
inline StateVector spdc_state() {
    std::vector<cxd> amps(16, cxd(0.0, 0.0));
    const double s = 1.0 / std::sqrt(2.0);
    amps[0b0010] = cxd(s, 0.0);
    amps[0b1000] = cxd(-s, 0.0);
    return StateVector(std::move(amps));
}

// Single-photon q-plate on the (polarization, OAM) pair: transfers the
// polarization qubit onto OAM, |R,0> -> |L,r>, |L,0> -> |R,l>. The action
// away from the zero-OAM subspace is a formal unitary completion; inputs
// never occupy it (enforced by the precondition below).
inline Mat qplate_single() {
    Mat q(4, 4);
    q(2, 0) = 1.0;  // |0,0> -> |1,0>
    q(1, 2) = 1.0;  // |1,0> -> |0,1>
    q(3, 1) = 1.0;
    q(0, 3) = 1.0;
    return q;
}

inline StateVector qplate(const StateVector& state, char photon) {
    if (state.dim() != 16) throw std::invalid_argument("qplate: requires a 4-qubit state");
    if (photon != 'a' && photon != 'b') throw std::invalid_argument("qplate: photon must be a|b");
    const unsigned oam_bit = photon == 'a' ? 2u : 0u;  // qubit 2 resp. 4
    for (unsigned i = 0; i < 16; ++i)
        if (((i >> oam_bit) & 1u) && std::abs(state.amp(i)) > 1e-12)
            throw std::domain_error("qplate: addressed photon's OAM is not in the m=0 state");
    Mat full = photon == 'a' ? kron(qplate_single(), Mat::identity(4))
                             : kron(Mat::identity(4), qplate_single());
    return state.applied(full);
}

// SPDC photons through both q-plates; lands on basis_state(1111) after
// stripping the global phase.
inline StateVector ghz_from_source() {
    return qplate(qplate(spdc_state(), 'a'), 'b').canonical();
}

// --- waveplates ---------------------------------------------------------------

enum class WaveplateKind { half, quarter };

struct Waveplate {
    WaveplateKind kind;
    double angle;  // fast-axis angle in radians
};

// Jones matrix in the circular (R/L) basis, global phase dropped:
// HWP(t) = cos(2t) X - sin(2t) Y; QWP(t) = (I - i (cos(2t) X - sin(2t) Y))/sqrt(2).
inline Mat waveplate_matrix(const Waveplate& w) {
    const double c = std::cos(2.0 * w.angle), s = std::sin(2.0 * w.angle);
    Mat axis = pauli_matrix('X') * cxd(c, 0.0) + pauli_matrix('Y') * cxd(-s, 0.0);
    if (w.kind == WaveplateKind::half) return axis;
    return (Mat::identity(2) + axis * cxd(0.0, -1.0)) * cxd(1.0 / std::sqrt(2.0), 0.0);
}

// Product in application order: seq[0] acts first.
inline Mat waveplate_sequence_matrix(const std::vector<Waveplate>& seq) {
    Mat m = Mat::identity(2);
    for (const Waveplate& w : seq) m = waveplate_matrix(w) * m;
    return m;
}

inline bool equal_up_to_phase(const Mat& a, const Mat& b, double tol = 1e-9) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    std::size_t br = 0, bc = 0;
    double best = 0.0;
    for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c)
            if (std::abs(b(r, c)) > best) {
                best = std::abs(b(r, c));
                br = r;
                bc = c;
            }
    if (best < tol) return a.max_abs() < tol;
    cxd phase = a(br, bc) / b(br, bc);
    if (std::abs(std::abs(phase) - 1.0) > tol) return false;
    return (a + b * (-phase)).max_abs() < tol;
}

// Smallest waveplate sequence (at most QWP-HWP-QWP) on the pi/8 angle grid
// realizing the target single-qubit unitary up to global phase.
inline std::vector<Waveplate> solve_waveplates(const Mat& target) {
    if (target.rows() != 2 || target.cols() != 2)
        throw std::invalid_argument("solve_waveplates: target must be 2x2");
    using K = WaveplateKind;
    static const std::vector<std::vector<K>> shapes = {
        {}, {K::half}, {K::quarter}, {K::half, K::quarter},
        {K::quarter, K::half}, {K::quarter, K::half, K::quarter}};
    constexpr double step = 3.141592653589793 / 8.0;
    for (const auto& shape : shapes) {
        std::vector<Waveplate> seq(shape.size());
        for (std::size_t i = 0; i < shape.size(); ++i) seq[i].kind = shape[i];
        const std::size_t combos = [&] {
            std::size_t c = 1;
            for (std::size_t i = 0; i < shape.size(); ++i) c *= 8;
            return c;
        }();
        for (std::size_t code = 0; code < combos; ++code) {
            std::size_t rest = code;
            for (std::size_t i = 0; i < shape.size(); ++i) {
                seq[i].angle = static_cast<double>(rest % 8) * step;
                rest /= 8;
            }
            if (equal_up_to_phase(waveplate_sequence_matrix(seq), target)) return seq;
        }
    }
    throw std::domain_error("solve_waveplates: no realization on the pi/8 angle grid");
}

// --- preparation --------------------------------------------------------------

// Per-qubit local operations turning the post-q-plate state (basis 1111) into
// the target. Polarization qubits (1 and 3) carry physical waveplate
// sequences; OAM qubits (2 and 4) are abstract unitaries (the Pauli letter).
struct PrepRecipe {
    GhzLabel target;
    std::array<char, 4> paulis{};   // per-qubit operation, qubit 1 first
    std::vector<Waveplate> pol_a;   // realizes paulis[0] on qubit 1
    std::vector<Waveplate> pol_b;   // realizes paulis[2] on qubit 3
};

inline PrepRecipe prep_recipe(const GhzLabel& target) {
    PrepRecipe r;
    r.target = target;
    r.paulis[0] = 'I';
    r.paulis[1] = target.bit(1) ? 'I' : 'X';
    r.paulis[2] = target.bit(2) ? 'I' : 'X';
    // omega(t3,t4) * Z, reduced to a single Pauli letter (phases are global)
    static constexpr char tail[4] = {'Z', 'X', 'Y', 'I'};
    r.paulis[3] = tail[(target.bit(3) << 1) | target.bit(4)];
    r.pol_a = solve_waveplates(pauli_matrix(r.paulis[0]));
    r.pol_b = solve_waveplates(pauli_matrix(r.paulis[2]));
    return r;
}

// Target state produced through the physical chain: SPDC, q-plates, then the
// recipe's local operations.
inline StateVector prep_pure(const GhzLabel& target) {
    PrepRecipe r = prep_recipe(target);
    Mat full = kron(kron(waveplate_sequence_matrix(r.pol_a), pauli_matrix(r.paulis[1])),
                    kron(waveplate_sequence_matrix(r.pol_b), pauli_matrix(r.paulis[3])));
    return ghz_from_source().applied(full).canonical();
}

struct NoiseModel {
    double white_noise_weight = 0.0;  // white-noise admixture p of prep
    double dark_rate = 0.0;           // expected accidental counts per outcome bin
    long shots_per_setting = 0;       // 0 = analytic mode (infinite shots)
    std::uint64_t rng_seed = 0;

    bool analytic() const { return shots_per_setting == 0; }

    void validate() const {
        if (!(white_noise_weight >= 0.0 && white_noise_weight < 1.0))
            throw std::domain_error("NoiseModel: white_noise_weight outside [0,1)");
        if (!(dark_rate >= 0.0)) throw std::domain_error("NoiseModel: negative dark_rate");
        if (shots_per_setting < 0) throw std::domain_error("NoiseModel: negative shots");
    }
};

inline DensityMatrix prep(const GhzLabel& target, const NoiseModel& noise) {
    noise.validate();
    const double p = noise.white_noise_weight;
    Mat m = prep_pure(target).projector() * cxd(1.0 - p, 0.0) +
            Mat::identity(16) * cxd(p / 16.0, 0.0);
    return DensityMatrix(std::move(m));
}

// purity of (1-p) |psi><psi| + p I/16
inline double purity_of_noisy_prep(double p) {
    const double q = (1.0 - p) * (1.0 - p);
    return (15.0 * q + 1.0) / 16.0;
}

// white-noise weight reproducing a given purity (e.g. the 0.905 of the
// reference data set)
inline double noise_for_purity(double target_purity) {
    if (!(target_purity > 1.0 / 16.0 && target_purity <= 1.0))
        throw std::domain_error("noise_for_purity: purity must lie in (1/16, 1]");
    const double arg = std::clamp((16.0 * target_purity - 1.0) / 15.0, 0.0, 1.0);
    return 1.0 - std::sqrt(arg);
}

// --- projective counting ------------------------------------------------------

struct CountRecord {
    std::string setting;              // 4 letters of X/Y/Z
    std::array<double, 16> counts{};  // per outcome bitstring; real-valued after mixing
    double shots = 0.0;               // 0 marks an analytic record (counts = probabilities)
    double dark_rate = 0.0;
    bool corrected = false;
};

inline void validate_setting(const std::string& setting) {
    if (setting.size() != 4) throw std::invalid_argument("setting: need 4 letters");
    for (char c : setting)
        if (c != 'X' && c != 'Y' && c != 'Z')
            throw std::invalid_argument(std::string("setting: bad letter ") + c);
}

// base-3 code over X=0, Y=1, Z=2, most significant qubit first; also the
// substream index for reproducible parallel sampling
inline int setting_index(const std::string& setting) {
    validate_setting(setting);
    int idx = 0;
    for (char c : setting) idx = idx * 3 + (c == 'X' ? 0 : c == 'Y' ? 1 : 2);
    return idx;
}

// all 81 settings in setting_index order
inline std::vector<std::string> fqst_settings() {
    std::vector<std::string> out;
    out.reserve(81);
    for (int i = 0; i < 81; ++i) {
        std::string s(4, 'X');
        int rest = i;
        for (int pos = 3; pos >= 0; --pos) {
            s[static_cast<std::size_t>(pos)] = "XYZ"[rest % 3];
            rest /= 3;
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace detail {

// rows are the eigenbras of the letter; outcome bit 0 <-> eigenvalue +1
inline Mat measurement_rotation(char letter) {
    const double s = 1.0 / std::sqrt(2.0);
    Mat m(2, 2);
    switch (letter) {
        case 'Z': return Mat::identity(2);
        case 'X':
            m(0, 0) = s; m(0, 1) = s;
            m(1, 0) = s; m(1, 1) = -s;
            return m;
        case 'Y':
            m(0, 0) = s; m(0, 1) = cxd(0.0, -s);
            m(1, 0) = s; m(1, 1) = cxd(0.0, s);
            return m;
        default: throw std::invalid_argument(std::string("measurement: bad letter ") + letter);
    }
}

inline double outcome_sign(unsigned outcome, const std::string& pauli) {
    double sign = 1.0;
    for (int pos = 0; pos < 4; ++pos)
        if (pauli[static_cast<std::size_t>(pos)] != 'I' && ((outcome >> (3 - pos)) & 1u))
            sign = -sign;
    return sign;
}

}  // namespace detail

// Born-rule outcome distribution of a local product measurement.
inline std::array<double, 16> outcome_probabilities(const DensityMatrix& rho,
                                                    const std::string& setting) {
    validate_setting(setting);
    if (rho.dim() != 16)
        throw std::invalid_argument("outcome_probabilities: requires a 16x16 density matrix");
    Mat u = detail::measurement_rotation(setting[0]);
    for (int pos = 1; pos < 4; ++pos)
        u = kron(u, detail::measurement_rotation(setting[static_cast<std::size_t>(pos)]));
    Mat rotated = u * rho.mat() * u.dagger();
    std::array<double, 16> probs{};
    for (std::size_t o = 0; o < 16; ++o) probs[o] = std::max(0.0, rotated(o, o).real());
    double sum = 0.0;
    for (double p : probs) sum += p;
    for (double& p : probs) p /= sum;  // round-off guard; sum is 1 within fp
    return probs;
}

// One measurement run. Analytic mode (shots_per_setting = 0) stores the exact
// probabilities with shots = 0 and no accidentals (the infinite-shot,
// background-free limit). Sampled mode draws a multinomial over outcomes plus
// independent Poisson(dark_rate) accidentals per bin from a per-setting
// substream, so results do not depend on the order settings are sampled in.
inline CountRecord sample_counts(const DensityMatrix& rho, const std::string& setting,
                                 const NoiseModel& noise) {
    noise.validate();
    std::array<double, 16> probs = outcome_probabilities(rho, setting);
    CountRecord rec;
    rec.setting = setting;
    if (noise.analytic()) {
        for (std::size_t o = 0; o < 16; ++o) rec.counts[o] = probs[o];
        return rec;
    }
    Rng rng(substream_seed(noise.rng_seed, static_cast<std::uint64_t>(setting_index(setting))));
    std::array<long, 16> draws = rng.multinomial16(noise.shots_per_setting, probs);
    for (std::size_t o = 0; o < 16; ++o) {
        double dark = noise.dark_rate > 0.0 ? static_cast<double>(rng.poisson(noise.dark_rate))
                                            : 0.0;
        rec.counts[o] = static_cast<double>(draws[o]) + dark;
    }
    rec.shots = static_cast<double>(noise.shots_per_setting);
    rec.dark_rate = noise.dark_rate;
    return rec;
}

inline std::vector<CountRecord> sample_counts(const DensityMatrix& rho,
                                              const std::vector<std::string>& settings,
                                              const NoiseModel& noise) {
    std::vector<CountRecord> out;
    out.reserve(settings.size());
    for (const std::string& s : settings) out.push_back(sample_counts(rho, s, noise));
    return out;
}

// Subtract the known accidental rate from every bin, floored at zero.
// Idempotent: an already-corrected record passes through unchanged.
inline CountRecord dark_correct(const CountRecord& rec) {
    CountRecord out = rec;
    if (!rec.corrected)
        for (double& c : out.counts) c = std::max(0.0, c - rec.dark_rate);
    out.corrected = true;
    return out;
}

// A setting covers a Pauli string when it matches at every non-I position and
// measures Z at the string's I positions (unit and Z share eigenvectors).
inline bool setting_covers(const std::string& setting, const std::string& pauli) {
    for (std::size_t pos = 0; pos < 4; ++pos) {
        char want = pauli[pos];
        if (want == 'I' ? setting[pos] != 'Z' : setting[pos] != want) return false;
    }
    return true;
}

inline std::string canonical_setting(const std::string& pauli) {
    std::string s = pauli;
    for (char& c : s)
        if (c == 'I') c = 'Z';
    return s;
}

inline void validate_pauli_string(const std::string& pauli) {
    if (pauli.size() != 4) throw std::invalid_argument("pauli string: need 4 letters");
    for (char c : pauli)
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
            throw std::invalid_argument(std::string("pauli string: bad letter ") + c);
}

// The record whose setting covers the string, preferring the canonical I->Z
// setting, otherwise the first covering record in list order.
inline const CountRecord& find_covering(const std::vector<CountRecord>& records,
                                        const std::string& pauli) {
    validate_pauli_string(pauli);
    const std::string canonical = canonical_setting(pauli);
    const CountRecord* fallback = nullptr;
    for (const CountRecord& r : records) {
        if (r.setting == canonical) return r;
        if (!fallback && setting_covers(r.setting, pauli)) fallback = &r;
    }
    if (fallback) return *fallback;
    throw std::out_of_range("no covering record for " + pauli);
}

// Empirical outcome distribution; an all-zero record yields all zeros.
inline std::array<double, 16> record_probabilities(const CountRecord& rec) {
    double total = 0.0;
    for (double c : rec.counts) total += c;
    std::array<double, 16> p{};
    if (total > 0.0)
        for (std::size_t o = 0; o < 16; ++o) p[o] = rec.counts[o] / total;
    return p;
}

inline double record_expectation(const CountRecord& rec, const std::string& pauli) {
    std::array<double, 16> p = record_probabilities(rec);
    double e = 0.0;
    for (unsigned o = 0; o < 16; ++o) e += detail::outcome_sign(o, pauli) * p[o];
    return e;
}

// <pauli> from the covering record (parity over non-I positions).
inline double expectation(const std::vector<CountRecord>& records, const std::string& pauli) {
    return record_expectation(find_covering(records, pauli), pauli);
}

// Per-setting, per-outcome weighted sums: emulates preparing a mixed state by
// pooling the raw data of its components. Counts become real-valued.
inline std::vector<CountRecord> weighted_mix_counts(
    const std::vector<std::vector<CountRecord>>& sets, const std::vector<double>& weights) {
    if (sets.empty() || sets.size() != weights.size())
        throw std::invalid_argument("weighted_mix_counts: need one weight per record set");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("weighted_mix_counts: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("weighted_mix_counts: weights must sum to 1");
    const std::size_t n = sets.front().size();
    for (const auto& set : sets) {
        if (set.size() != n) throw std::invalid_argument("weighted_mix_counts: mismatched setting lists");
        for (std::size_t k = 0; k < n; ++k)
            if (set[k].setting != sets.front()[k].setting)
                throw std::invalid_argument("weighted_mix_counts: mismatched setting lists");
    }
    std::vector<CountRecord> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        CountRecord rec;
        rec.setting = sets.front()[k].setting;
        rec.corrected = true;
        for (std::size_t s = 0; s < sets.size(); ++s) {
            for (std::size_t o = 0; o < 16; ++o) rec.counts[o] += weights[s] * sets[s][k].counts[o];
            rec.shots += weights[s] * sets[s][k].shots;
            rec.dark_rate += weights[s] * sets[s][k].dark_rate;
            rec.corrected = rec.corrected && sets[s][k].corrected;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// --- witness from counts --------------------------------------------------------

struct CountWitnessReport {
    GhzLabel adapted_to;
    I2Variant variant = I2Variant::normalized;
    double lin_i2 = 0.0;
    double lin_i2_se = 0.0;  // propagated multinomial standard error (0 if analytic)
    double i2 = 0.0;
    double i3 = 0.0;
    double i4 = 0.0;
};

namespace detail {

// multinomial variance of sum_t coef_t <g_t> for the terms sharing one record
inline double grouped_variance(const CountRecord& rec,
                               const std::vector<const PauliTerm*>& terms) {
    double total = 0.0;
    for (double c : rec.counts) total += c;
    if (!(total > 0.0) || rec.shots <= 0.0) return 0.0;  // analytic or empty record
    std::array<double, 16> p = record_probabilities(rec);
    double mean = 0.0, square = 0.0;
    for (unsigned o = 0; o < 16; ++o) {
        double g = 0.0;
        for (const PauliTerm* t : terms) g += t->coeff * outcome_sign(o, t->str());
        mean += g * p[o];
        square += g * g * p[o];
    }
    return (square - mean * mean) / total;
}

}  // namespace detail

// Linearized witness adapted to `target`, evaluated from measured counts,
// plus the nonlinear criteria from the same data: the diagonal comes from the
// ZZZZ-covering record and the coherence is the real part of the adapted-frame
// antipodal element, i.e. (1/2) sum of the eight signed X/Y expectations —
// exact for states whose coherence is real in that frame (all basis-state
// mixtures), a lower bound otherwise.
inline CountWitnessReport witness_from_counts(const std::vector<CountRecord>& records,
                                              const GhzLabel& target,
                                              I2Variant variant = I2Variant::normalized) {
    PauliObservable adapted = adapt(lin_i2_observable(), target);
    CountWitnessReport out;
    out.adapted_to = target;
    out.variant = variant;

    double lin = adapted.constant;
    double octet = 0.0;
    std::map<const CountRecord*, std::vector<const PauliTerm*>> groups;
    for (const PauliTerm& t : adapted.terms) {
        const CountRecord& rec = find_covering(records, t.str());
        double e = record_expectation(rec, t.str());
        lin += t.coeff * e;
        const std::string s = t.str();
        if (s.find('X') != std::string::npos || s.find('Y') != std::string::npos)
            octet += t.coeff * e;
        groups[&rec].push_back(&t);
    }
    out.lin_i2 = lin;
    double var = 0.0;
    for (const auto& [rec, terms] : groups) var += detail::grouped_variance(*rec, terms);
    out.lin_i2_se = std::sqrt(var);

    std::array<double, 16> diag = record_probabilities(find_covering(records, "IIII"));
    const double coh = std::abs(0.5 * octet);
    const unsigned mask = detail::support_mask(target);
    out.i2 = detail::i2_from_parts(coh, diag, mask, variant);
    out.i3 = detail::i3_from_parts(coh, diag, mask);
    out.i4 = detail::i4_from_parts(coh, diag, mask);
    return out;
}

// Count-level analogue of best_k_report: every criterion maximized over the
// 16 adaptations, with the same (i2, then lin, then lowest code) tie-break.
inline CountWitnessReport best_count_witness(const std::vector<CountRecord>& records,
                                             I2Variant variant = I2Variant::normalized) {
    CountWitnessReport best;
    double key_i2 = 0.0, key_lin = 0.0;
    bool first = true;
    for (unsigned c = 0; c < 16; ++c) {
        CountWitnessReport r = witness_from_counts(records, GhzLabel(c), variant);
        if (first || r.i2 > key_i2 || (r.i2 == key_i2 && r.lin_i2 > key_lin)) {
            key_i2 = r.i2;
            key_lin = r.lin_i2;
            best.adapted_to = r.adapted_to;
            best.lin_i2_se = r.lin_i2_se;
        }
        best.i2 = first ? r.i2 : std::max(best.i2, r.i2);
        best.i3 = first ? r.i3 : std::max(best.i3, r.i3);
        best.i4 = first ? r.i4 : std::max(best.i4, r.i4);
        best.lin_i2 = first ? r.lin_i2 : std::max(best.lin_i2, r.lin_i2);
        first = false;
    }
    best.variant = variant;
    return best;
}

// --- tomography -------------------------------------------------------------------

inline Mat pauli_string_matrix(const std::string& letters) {
    validate_pauli_string(letters);
    Mat m = pauli_matrix(letters[0]);
    for (std::size_t pos = 1; pos < 4; ++pos) m = kron(m, pauli_matrix(letters[pos]));
    return m;
}

struct FqstResult {
    Mat linear;              // raw linear inversion (may be slightly non-PSD)
    DensityMatrix projected; // eigenvalue-clipped, trace-renormalized estimate
};

// Full quantum state tomography: rho_hat = (1/16) sum_mu <sigma_mu> sigma_mu
// over all 256 Pauli strings, followed by projection onto the PSD unit-trace
// cone. Each expectation pools every setting that matches the string at its
// non-I positions: ignoring a qubit's outcome marginalizes it no matter which
// basis it was measured in, so all 3^(#I) such settings estimate the same
// quantity and pooling their counts tightens the estimate (a weight-1 string
// would waste 26/27 of the data if read from the canonical setting alone).
inline FqstResult fqst(const std::vector<CountRecord>& records) {
    std::map<std::string, const CountRecord*> by_setting;
    for (const CountRecord& r : records) by_setting.emplace(r.setting, &r);
    std::string missing;
    for (const std::string& s : fqst_settings())
        if (!by_setting.count(s)) missing += missing.empty() ? s : ", " + s;
    if (!missing.empty()) throw std::invalid_argument("fqst: missing settings: " + missing);

    Mat linear(16, 16);
    std::string mu(4, 'I');
    for (int code = 0; code < 256; ++code) {
        int rest = code;
        for (int pos = 3; pos >= 0; --pos) {
            mu[static_cast<std::size_t>(pos)] = "IXYZ"[rest & 3];
            rest >>= 2;
        }
        double num = 0.0, den = 0.0;
        for (const auto& [setting, rec] : by_setting) {
            bool matches = true;
            for (std::size_t pos = 0; pos < 4 && matches; ++pos)
                if (mu[pos] != 'I' && setting[pos] != mu[pos]) matches = false;
            if (!matches) continue;
            for (unsigned o = 0; o < 16; ++o) {
                num += detail::outcome_sign(o, mu) * rec->counts[o];
                den += rec->counts[o];
            }
        }
        double e = den > 0.0 ? num / den : 0.0;
        linear = linear + pauli_string_matrix(mu) * cxd(e / 16.0, 0.0);
    }

    EigenSystem es = herm_eigensystem(linear);
    double total = 0.0;
    for (double v : es.values) total += std::max(0.0, v);
    if (!(total > 0.0)) throw std::domain_error("fqst: projection collapsed to zero trace");
    Mat projected(16, 16);
    for (std::size_t k = 0; k < es.values.size(); ++k) {
        double lambda = std::max(0.0, es.values[k]) / total;
        if (lambda == 0.0) continue;
        for (std::size_t r = 0; r < 16; ++r)
            for (std::size_t c = 0; c < 16; ++c)
                projected(r, c) += cxd(lambda, 0.0) * es.vectors(r, k) * std::conj(es.vectors(c, k));
    }
    return {std::move(linear), DensityMatrix(std::move(projected))};
}

}  // namespace ghzkit
