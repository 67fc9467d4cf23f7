#pragma once

// Weyl operators, the recursive seed GHZ state, and the canonical 16-element
// four-qubit GHZ basis: labels, twin map, lattice moves, ket pretty-printer.
//
// Conventions (used everywhere downstream):
//   - qubit 1 is the most significant bit; basis index i (1-based) equals
//     binary(b1 b2 b3 b4) + 1, so |0000> is index 1 and |1111> index 16;
//   - subsystem 1 = photon-a polarisation, 2 = photon-a OAM,
//     3 = photon-b polarisation, 4 = photon-b OAM;
//   - encoding R -> 0, r -> 0, L -> 1, l -> 1;
//   - Weyl operators follow W_{k,l}|j> = exp(2 pi i j k / d)|j+l mod d>,
//     so for d = 2: W_{0,1} = X, W_{1,0} = Z, and W_{1,1} = XZ.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ghzkit/qmath.hpp"

namespace ghzkit {

inline Mat pauli_matrix(char p) {
    Mat m(2, 2);
    const cxd i(0.0, 1.0);
    switch (p) {
        case 'I': m(0, 0) = 1.0; m(1, 1) = 1.0; break;
        case 'X': m(0, 1) = 1.0; m(1, 0) = 1.0; break;
        case 'Y': m(0, 1) = -i; m(1, 0) = i; break;
        case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
        default: throw std::invalid_argument(std::string("unknown Pauli letter: ") + p);
    }
    return m;
}

// W_{k,l}|j> = exp(2 pi i j k / d) |j+l mod d>
inline Mat weyl_matrix(int k, int l, int d) {
    if (d < 2) throw std::invalid_argument("weyl_matrix: d must be >= 2");
    if (k < 0 || k >= d || l < 0 || l >= d)
        throw std::invalid_argument("weyl_matrix: indices must satisfy 0 <= k,l < d");
    Mat w(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        double angle = 2.0 * std::numbers::pi * static_cast<double>(j) *
                       static_cast<double>(k) / static_cast<double>(d);
        w(static_cast<std::size_t>((j + l) % d), static_cast<std::size_t>(j)) =
            std::polar(1.0, angle);
    }
    return w;
}

// |phi_1> = |0>; |phi_m> = (1/sqrt(d)) sum_i |i> (x) (W_{i,i} on last qudit)|phi_{m-1}>
inline StateVector seed_state(int n, int d) {
    if (n < 1) throw std::invalid_argument("seed_state: n must be >= 1");
    if (d < 2) throw std::invalid_argument("seed_state: d must be >= 2");
    const std::size_t ud = static_cast<std::size_t>(d);
    std::vector<cxd> phi(ud, cxd(0.0, 0.0));
    phi[0] = 1.0;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int m = 2; m <= n; ++m) {
        const std::size_t dim_prev = phi.size();
        std::vector<cxd> next(ud * dim_prev, cxd(0.0, 0.0));
        for (int i = 0; i < d; ++i) {
            // omega^{j i} phase and j -> j+i shift on the last qudit
            for (std::size_t x = 0; x < dim_prev; ++x) {
                if (phi[x] == cxd(0.0, 0.0)) continue;
                const std::size_t j = x % ud;
                double angle = 2.0 * std::numbers::pi * static_cast<double>(j) *
                               static_cast<double>(i) / static_cast<double>(d);
                std::size_t shifted = x - j + (j + static_cast<std::size_t>(i)) % ud;
                next[static_cast<std::size_t>(i) * dim_prev + shifted] +=
                    std::polar(1.0, angle) * phi[x] * inv_sqrt_d;
            }
        }
        phi = std::move(next);
    }
    return StateVector(std::move(phi));
}

// ((1 + iX)/sqrt(2))^{(x) n}: the (unitary) basis-change taking the seed
// family to two-amplitude GHZ form.
inline Mat basis_change_unitary(int n) {
    if (n < 1) throw std::invalid_argument("basis_change_unitary: n must be >= 1");
    Mat m(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    m(0, 0) = s;
    m(1, 1) = s;
    m(0, 1) = cxd(0.0, s);
    m(1, 0) = cxd(0.0, s);
    Mat u = m;
    for (int i = 1; i < n; ++i) u = kron(u, m);
    return u;
}

// Four-bit basis label b1 b2 b3 b4.
struct GhzLabel {
    unsigned code = 0;  // 0..15, b1 is the most significant bit

    GhzLabel() = default;
    explicit GhzLabel(unsigned c) : code(c) {
        if (c > 15) throw std::invalid_argument("GhzLabel: code out of range");
    }

    static GhzLabel parse(const std::string& s) {
        if (s.size() != 4) throw std::invalid_argument("GhzLabel: expected 4 bits, got \"" + s + "\"");
        unsigned c = 0;
        for (char ch : s) {
            if (ch != '0' && ch != '1')
                throw std::invalid_argument("GhzLabel: expected 4 bits, got \"" + s + "\"");
            c = (c << 1) | static_cast<unsigned>(ch - '0');
        }
        return GhzLabel(c);
    }

    std::string str() const {
        std::string s(4, '0');
        for (int i = 0; i < 4; ++i)
            if (code & (1u << (3 - i))) s[static_cast<std::size_t>(i)] = '1';
        return s;
    }

    // bit(1) = b1 ... bit(4) = b4
    unsigned bit(int k) const {
        if (k < 1 || k > 4) throw std::out_of_range("GhzLabel: bit index");
        return (code >> (4 - k)) & 1u;
    }

    // General Weyl-index form (k,l) per subsystem: identity on subsystem 1,
    // shifts W_{0,b1}, W_{0,b2} on subsystems 2, 3, and on subsystem 4 the
    // operator Omega(b3,b4) in {I, Y ~ W_{1,1}, X = W_{0,1}, Z = W_{1,0}}.
    std::array<std::pair<int, int>, 4> weyl_form() const {
        static constexpr std::pair<int, int> omega_form[4] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
        return {std::pair<int, int>{0, 0},
                {0, static_cast<int>(bit(1))},
                {0, static_cast<int>(bit(2))},
                omega_form[(bit(3) << 1) | bit(4)]};
    }

    friend bool operator==(const GhzLabel& a, const GhzLabel& b) { return a.code == b.code; }
    friend bool operator!=(const GhzLabel& a, const GhzLabel& b) { return a.code != b.code; }
    friend bool operator<(const GhzLabel& a, const GhzLabel& b) { return a.code < b.code; }
};

// Per-subsystem Pauli letters of the label unitary:
// (I, X^{b1}, X^{b2}, Omega(b3,b4)) with Omega in {I, Y, X, Z}.
inline std::array<char, 4> label_paulis(const GhzLabel& b) {
    static constexpr char omega[4] = {'I', 'Y', 'X', 'Z'};
    return {'I', b.bit(1) ? 'X' : 'I', b.bit(2) ? 'X' : 'I', omega[(b.bit(3) << 1) | b.bit(4)]};
}

inline Mat label_unitary(const GhzLabel& b) {
    std::array<char, 4> p = label_paulis(b);
    return kron(kron(pauli_matrix(p[0]), pauli_matrix(p[1])),
                kron(pauli_matrix(p[2]), pauli_matrix(p[3])));
}

inline StateVector basis_state(const GhzLabel& b) {
    std::vector<cxd> g(16, cxd(0.0, 0.0));
    g[0] = 1.0 / std::sqrt(2.0);
    g[15] = 1.0 / std::sqrt(2.0);
    return StateVector(std::move(g)).applied(label_unitary(b)).canonical();
}

inline std::vector<StateVector> full_basis() {
    std::vector<StateVector> out;
    out.reserve(16);
    for (unsigned c = 0; c < 16; ++c) out.push_back(basis_state(GhzLabel(c)));
    return out;
}

// The unique partner whose equal mixture with the input is diagonal:
// same two-ket support, opposite relative sign.
inline GhzLabel twin_of(const GhzLabel& b) { return GhzLabel(b.code ^ 0b0011u); }

struct LatticeMove {
    int subsystem;  // 2, 3 or 4
    int k = 0;      // Weyl phase index (d = 2)
    int l = 0;      // Weyl shift index (d = 2)
};

// The 12 canonical moves: subsystems {2,3,4} x the four Weyl operators.
inline std::vector<LatticeMove> canonical_moves() {
    std::vector<LatticeMove> moves;
    for (int s : {2, 3, 4})
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) moves.push_back({s, k, l});
    return moves;
}

// Apply the move's Weyl operator on its subsystem and return the label whose
// basis_state matches the image up to a global phase.
inline GhzLabel lattice_move(const GhzLabel& b, const LatticeMove& move) {
    if (move.subsystem < 2 || move.subsystem > 4)
        throw std::invalid_argument("lattice_move: subsystem must be 2, 3 or 4");
    Mat op = weyl_matrix(move.k, move.l, 2);
    Mat full = Mat::identity(1);
    for (int pos = 1; pos <= 4; ++pos)
        full = kron(full, pos == move.subsystem ? op : Mat::identity(2));
    StateVector image = basis_state(b).applied(full);
    for (unsigned c = 0; c < 16; ++c) {
        GhzLabel cand(c);
        if (std::abs(basis_state(cand).inner(image)) > 1.0 - 1e-10) return cand;
    }
    throw std::domain_error("lattice_move: operator leaves the GHZ basis");
}

// Table-I style rendering, e.g. "(|RrRr>+|LlLl>)/sqrt(2)" with the actual
// unicode ket/root glyphs. Positions 1,3 are polarisation (R/L), 2,4 OAM (r/l).
inline std::string ket_notation(const GhzLabel& b) {
    StateVector s = basis_state(b);
    int first = -1, second = -1;
    for (int i = 0; i < 16; ++i) {
        if (std::abs(s.amp(static_cast<std::size_t>(i))) > 1e-12) {
            if (first < 0)
                first = i;
            else
                second = i;
        }
    }
    auto letters = [](int idx) {
        std::string out;
        for (int pos = 0; pos < 4; ++pos) {
            bool one = (idx >> (3 - pos)) & 1;
            bool pol = (pos % 2) == 0;
            out += pol ? (one ? 'L' : 'R') : (one ? 'l' : 'r');
        }
        return out;
    };
    bool plus = s.amp(static_cast<std::size_t>(second)).real() > 0.0;
    return "(|" + letters(first) + "⟩" + (plus ? '+' : '-') + "|" + letters(second) +
           "⟩)/√2";
}

}  // namespace ghzkit
