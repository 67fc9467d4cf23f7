#pragma once

// k-separability criteria on 16x16 density matrices: the nonlinear
// diagonal/coherence criteria (pair, sextuple, octuple variants), the
// linearized 15-term Pauli witness, local-unitary adaptation to any basis
// label, evaluation from expectation records, and measurement budgets.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ghzkit/basis.hpp"
#include "ghzkit/qmath.hpp"

namespace ghzkit {

struct PauliTerm {
    double coeff;
    std::array<char, 4> letters;

    std::string str() const { return std::string(letters.begin(), letters.end()); }
};

// Weighted Pauli strings plus an identity offset; Hermitian by construction.
struct PauliObservable {
    std::vector<PauliTerm> terms;
    double constant = 0.0;
};

enum class I2Variant { normalized, as_printed };

enum class MeasurementTask { witness, fqst, single_setting };

inline int measurement_budget(MeasurementTask task) {
    switch (task) {
        case MeasurementTask::witness: return 144;          // 9 settings x 16 outcomes
        case MeasurementTask::fqst: return 1296;            // 81 settings x 16 outcomes
        case MeasurementTask::single_setting: return 16;    // one setting's outcomes
    }
    throw std::invalid_argument("measurement_budget: unknown task");
}

// One bipartition of {1,2,3,4} (the side containing subsystem 1 is listed)
// together with the 1-based diagonal index pair entering the pair criterion.
struct Bipartition {
    std::string name;            // e.g. "1|234"
    std::vector<int> subset;     // subsystems on the first side
    std::pair<int, int> pair_1b; // (a, b) with a + b = 17
};

// The 7 bipartitions and their diagonal pairs, read off the flipped-index
// construction: the pair for cut S is (index of e_S, index of its complement)
// where e_S has ones exactly on S.
inline const std::vector<Bipartition>& bipartition_pair_table() {
    static const std::vector<Bipartition> table = {
        {"1|234", {1}, {8, 9}},
        {"2|134", {2}, {5, 12}},
        {"3|124", {3}, {3, 14}},
        {"4|123", {4}, {2, 15}},
        {"12|34", {1, 2}, {4, 13}},
        {"13|24", {1, 3}, {6, 11}},
        {"14|23", {1, 4}, {7, 10}},
    };
    return table;
}

namespace detail {

inline double clamped_diag(const DensityMatrix& rho, int idx_1b) {
    double d = rho.at1(static_cast<std::size_t>(idx_1b), static_cast<std::size_t>(idx_1b)).real();
    return d < 0.0 ? 0.0 : d;  // guard eighth/sixth roots against -1e-17 round-off
}

inline void require_dim16(const DensityMatrix& rho, const char* who) {
    if (rho.dim() != 16)
        throw std::invalid_argument(std::string(who) + ": requires a 16x16 density matrix");
}

// Adapted-evaluation helpers working directly on (permuted diagonal,
// antipodal coherence): valid for arbitrary rho because conjugation by the
// label operator is a signed XOR-permutation of the computational basis.

// support mask of a label: bits (0, b1, b2, b3^b4)
inline unsigned support_mask(const GhzLabel& b) {
    return (b.bit(1) << 2) | (b.bit(2) << 1) | (b.bit(3) ^ b.bit(4));
}

inline double i2_from_parts(double coh, const std::array<double, 16>& diag, unsigned mask,
                            I2Variant variant) {
    double pair_sum = 0.0;
    for (const Bipartition& bp : bipartition_pair_table()) {
        unsigned a = static_cast<unsigned>(bp.pair_1b.first - 1) ^ mask;
        unsigned b = static_cast<unsigned>(bp.pair_1b.second - 1) ^ mask;
        pair_sum += std::sqrt(diag[a] * diag[b]);
    }
    return variant == I2Variant::normalized ? 2.0 * (coh - pair_sum) : 2.0 * coh - pair_sum;
}

inline const std::array<std::array<int, 6>, 6>& i3_sextuples() {
    static const std::array<std::array<int, 6>, 6> sets = {{
        {2, 3, 4, 13, 14, 15},
        {2, 5, 6, 11, 12, 15},
        {2, 7, 8, 9, 10, 15},
        {3, 5, 7, 10, 12, 14},
        {3, 6, 8, 9, 11, 14},
        {4, 5, 8, 9, 12, 13},
    }};
    return sets;
}

inline double i3_from_parts(double coh, const std::array<double, 16>& diag, unsigned mask) {
    double sum = 0.0;
    for (const auto& set : i3_sextuples()) {
        double prod = 1.0;
        for (int idx : set) prod *= diag[static_cast<unsigned>(idx - 1) ^ mask];
        sum += std::pow(prod, 1.0 / 6.0);
    }
    return 2.0 * coh - sum;
}

inline double i4_from_parts(double coh, const std::array<double, 16>& diag, unsigned mask) {
    static constexpr int idx[8] = {2, 3, 5, 8, 9, 12, 14, 15};
    double prod = 1.0;
    for (int i : idx) prod *= diag[static_cast<unsigned>(i - 1) ^ mask];
    return 2.0 * coh - 2.0 * std::pow(prod, 1.0 / 8.0);
}

inline std::array<double, 16> clamped_diagonal(const DensityMatrix& rho) {
    std::array<double, 16> d{};
    for (std::size_t i = 0; i < 16; ++i) {
        double v = rho(i, i).real();
        d[i] = v < 0.0 ? 0.0 : v;
    }
    return d;
}

// |rho(m, ~m)| for the 8 antipodal slots m = 0..7
inline std::array<double, 8> antipodal_coherences(const DensityMatrix& rho) {
    std::array<double, 8> c{};
    for (std::size_t m = 0; m < 8; ++m) c[m] = std::abs(rho(m, 15 - m));
    return c;
}

}  // namespace detail

// Pair criterion: normalized variant 2(|rho_{1,16}| - sum of the 7 pair
// roots); as-printed variant 2|rho_{1,16}| - sum. Positive normalized value
// certifies genuine multipartite entanglement.
inline double eval_i2(const DensityMatrix& rho, I2Variant variant = I2Variant::normalized) {
    detail::require_dim16(rho, "eval_i2");
    double coh = std::abs(rho.at1(1, 16));
    return detail::i2_from_parts(coh, detail::clamped_diagonal(rho), 0, variant);
}

// Sextuple criterion: positive value certifies 3-inseparability.
inline double eval_i3(const DensityMatrix& rho) {
    detail::require_dim16(rho, "eval_i3");
    double coh = std::abs(rho.at1(1, 16));
    return detail::i3_from_parts(coh, detail::clamped_diagonal(rho), 0);
}

// Octuple criterion: positive value certifies 4-inseparability.
inline double eval_i4(const DensityMatrix& rho) {
    detail::require_dim16(rho, "eval_i4");
    double coh = std::abs(rho.at1(1, 16));
    return detail::i4_from_parts(coh, detail::clamped_diagonal(rho), 0);
}

// The 15-term linearized witness: value 1 on the matching basis state,
// -7/8 on white noise, and a lower bound on the normalized pair criterion.
inline PauliObservable lin_i2_observable() {
    PauliObservable obs;
    obs.constant = -7.0 / 8.0;
    auto add = [&obs](double c, const char* s) {
        obs.terms.push_back({c, {s[0], s[1], s[2], s[3]}});
    };
    const double w = 1.0 / 8.0;
    add(+w, "XXXX");
    add(-w, "YYXX");
    add(-w, "YXYX");
    add(-w, "XYYX");
    add(-w, "XXYY");
    add(-w, "XYXY");
    add(-w, "YXXY");
    add(+w, "YYYY");
    add(+w, "ZZII");
    add(+w, "ZIIZ");
    add(+w, "ZIZI");
    add(+w, "IIZZ");
    add(+w, "IZIZ");
    add(+w, "IZZI");
    add(+w, "ZZZZ");
    return obs;
}

// The 9 measurement settings that cover every string of the linearized
// witness (identity positions measured as Z and marginalized downstream).
inline std::vector<std::string> witness_settings() {
    return {"XXXX", "YYXX", "YXYX", "XYYX", "XXYY", "XYXY", "YXXY", "YYYY", "ZZZZ"};
}

// tr(rho sigma) for a single 4-letter Pauli string.
inline double pauli_expectation(const DensityMatrix& rho, const std::string& letters) {
    detail::require_dim16(rho, "pauli_expectation");
    if (letters.size() != 4) throw std::invalid_argument("pauli_expectation: need 4 letters");
    unsigned flip = 0;
    for (int pos = 0; pos < 4; ++pos) {
        char c = letters[static_cast<std::size_t>(pos)];
        if (c == 'X' || c == 'Y') flip |= 1u << (3 - pos);
        else if (c != 'Z' && c != 'I')
            throw std::invalid_argument(std::string("pauli_expectation: bad letter ") + c);
    }
    cxd acc = 0.0;
    for (unsigned j = 0; j < 16; ++j) {
        cxd phase = 1.0;
        for (int pos = 0; pos < 4; ++pos) {
            char c = letters[static_cast<std::size_t>(pos)];
            unsigned b = (j >> (3 - pos)) & 1u;
            if (c == 'Z' && b) phase = -phase;
            if (c == 'Y') phase *= b ? cxd(0.0, -1.0) : cxd(0.0, 1.0);
        }
        acc += rho(j, j ^ flip) * phase;
    }
    return acc.real();
}

inline double eval_observable(const PauliObservable& obs, const DensityMatrix& rho) {
    double v = obs.constant;
    for (const PauliTerm& t : obs.terms) v += t.coeff * pauli_expectation(rho, t.str());
    return v;
}

// Conjugate the observable by the label operator of `target`: evaluating the
// adapted observable on rho equals evaluating the original on P rho P. Pauli
// conjugation maps each string to plus-or-minus itself, so only coefficient
// signs change (settings stay identical).
inline PauliObservable adapt(const PauliObservable& obs, const GhzLabel& target) {
    std::array<char, 4> p = label_paulis(target);
    PauliObservable out;
    out.constant = obs.constant;
    out.terms.reserve(obs.terms.size());
    for (const PauliTerm& t : obs.terms) {
        double sign = 1.0;
        for (int pos = 0; pos < 4; ++pos) {
            char a = p[static_cast<std::size_t>(pos)];
            char b = t.letters[static_cast<std::size_t>(pos)];
            if (a != 'I' && b != 'I' && a != b) sign = -sign;
        }
        out.terms.push_back({sign * t.coeff, t.letters});
    }
    return out;
}

// P rho P with P the (Hermitian) label operator: a signed XOR-permutation.
inline DensityMatrix conjugate_by_label(const DensityMatrix& rho, const GhzLabel& target) {
    detail::require_dim16(rho, "conjugate_by_label");
    std::array<char, 4> p = label_paulis(target);
    unsigned mask = 0;
    std::array<cxd, 16> ph;
    for (unsigned x = 0; x < 16; ++x) ph[x] = 1.0;
    for (int pos = 0; pos < 4; ++pos) {
        char c = p[static_cast<std::size_t>(pos)];
        if (c == 'X' || c == 'Y') mask |= 1u << (3 - pos);
    }
    for (unsigned x = 0; x < 16; ++x) {
        for (int pos = 0; pos < 4; ++pos) {
            char c = p[static_cast<std::size_t>(pos)];
            unsigned b = (x >> (3 - pos)) & 1u;
            if (c == 'Z' && b) ph[x] = -ph[x];
            if (c == 'Y') ph[x] *= b ? cxd(0.0, -1.0) : cxd(0.0, 1.0);
        }
    }
    Mat out(16, 16);
    for (unsigned a = 0; a < 16; ++a)
        for (unsigned b = 0; b < 16; ++b)
            out(a, b) = ph[a ^ mask] * rho(a ^ mask, b ^ mask) * ph[b];
    return DensityMatrix(std::move(out));
}

// Adapted nonlinear criteria: criterion of (P rho P) computed via the
// diagonal XOR-permutation and the shifted antipodal coherence.
inline double eval_i2_adapted(const DensityMatrix& rho, const GhzLabel& target,
                              I2Variant variant = I2Variant::normalized) {
    detail::require_dim16(rho, "eval_i2_adapted");
    unsigned m = detail::support_mask(target);
    return detail::i2_from_parts(std::abs(rho(m, 15 - m)), detail::clamped_diagonal(rho), m,
                                 variant);
}

inline double eval_i3_adapted(const DensityMatrix& rho, const GhzLabel& target) {
    detail::require_dim16(rho, "eval_i3_adapted");
    unsigned m = detail::support_mask(target);
    return detail::i3_from_parts(std::abs(rho(m, 15 - m)), detail::clamped_diagonal(rho), m);
}

inline double eval_i4_adapted(const DensityMatrix& rho, const GhzLabel& target) {
    detail::require_dim16(rho, "eval_i4_adapted");
    unsigned m = detail::support_mask(target);
    return detail::i4_from_parts(std::abs(rho(m, 15 - m)), detail::clamped_diagonal(rho), m);
}

// Evaluate from measured expectation values; every non-identity string of the
// observable must be present.
inline double eval_from_expectations(const PauliObservable& obs,
                                     const std::map<std::string, double>& record) {
    double v = obs.constant;
    for (const PauliTerm& t : obs.terms) {
        auto it = record.find(t.str());
        if (it == record.end())
            throw std::out_of_range("eval_from_expectations: missing expectation for " + t.str());
        v += t.coeff * it->second;
    }
    return v;
}

struct WitnessReport {
    double i2 = 0.0;
    double i3 = 0.0;
    double i4 = 0.0;
    double lin_i2 = 0.0;
    GhzLabel adapted_to;
    I2Variant variant = I2Variant::normalized;
};

// Each criterion maximized over adaptation to all 16 labels. adapted_to
// records the label maximizing the pair criterion; because that criterion
// takes an absolute coherence, a label and its twin always tie on it, so the
// (sign-sensitive) linearized witness breaks the tie, then the lowest
// bitstring.
inline WitnessReport best_k_report(const DensityMatrix& rho,
                                   I2Variant variant = I2Variant::normalized) {
    detail::require_dim16(rho, "best_k_report");
    std::array<double, 16> diag = detail::clamped_diagonal(rho);
    std::array<double, 8> coh = detail::antipodal_coherences(rho);

    // expectations of the 15 witness strings, shared by all adaptations
    PauliObservable base = lin_i2_observable();
    std::vector<double> expect;
    expect.reserve(base.terms.size());
    for (const PauliTerm& t : base.terms) expect.push_back(pauli_expectation(rho, t.str()));

    WitnessReport best;
    best.variant = variant;
    double key_i2 = 0.0, key_lin = 0.0;
    bool first = true;
    for (unsigned c = 0; c < 16; ++c) {
        GhzLabel b(c);
        unsigned m = detail::support_mask(b);
        double coh_b = coh[m & 7u];
        double i2 = detail::i2_from_parts(coh_b, diag, m, variant);
        double i3 = detail::i3_from_parts(coh_b, diag, m);
        double i4 = detail::i4_from_parts(coh_b, diag, m);
        PauliObservable adapted = adapt(base, b);
        double lin = adapted.constant;
        for (std::size_t t = 0; t < adapted.terms.size(); ++t)
            lin += adapted.terms[t].coeff * expect[t];
        if (first || i2 > key_i2 || (i2 == key_i2 && lin > key_lin)) {
            key_i2 = i2;
            key_lin = lin;
            best.adapted_to = b;
        }
        best.i2 = first ? i2 : std::max(best.i2, i2);
        best.i3 = first ? i3 : std::max(best.i3, i3);
        best.i4 = first ? i4 : std::max(best.i4, i4);
        best.lin_i2 = first ? lin : std::max(best.lin_i2, lin);
        first = false;
    }
    return best;
}

inline std::string variant_name(I2Variant v) {
    return v == I2Variant::normalized ? "normalized" : "as-printed";
}

inline I2Variant parse_variant(const std::string& s) {
    if (s == "normalized") return I2Variant::normalized;
    if (s == "as-printed") return I2Variant::as_printed;
    throw std::invalid_argument("unknown variant: " + s + " (use normalized | as-printed)");
}

}  // namespace ghzkit
