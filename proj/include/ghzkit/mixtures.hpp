#pragma once

// Noisy basis-state mixtures: construction, separability-region
// classification with PPT evidence, simplex scans for the twin/un-twin
// phase diagrams, and noise thresholds along the white-noise ray.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghzkit/basis.hpp"
#include "ghzkit/qmath.hpp"
#include "ghzkit/witness.hpp"

namespace ghzkit {

struct MixtureComponent {
    GhzLabel label;
    double weight = 0.0;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    double noise_weight = 0.0;

    void validate() const {
        double total = noise_weight;
        if (noise_weight < 0.0) throw std::domain_error("MixtureSpec: negative noise weight");
        for (const MixtureComponent& c : components) {
            if (c.weight < 0.0) throw std::domain_error("MixtureSpec: negative component weight");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::domain_error("MixtureSpec: weights must sum to 1 within 1e-12");
    }
};

// Convex combination of basis-state projectors plus white noise.
inline DensityMatrix mix(const MixtureSpec& spec) {
    spec.validate();
    Mat m = Mat::identity(16) * cxd(spec.noise_weight / 16.0, 0.0);
    for (const MixtureComponent& c : spec.components)
        if (c.weight != 0.0)
            m = m + basis_state(c.label).projector() * cxd(c.weight, 0.0);
    return DensityMatrix(std::move(m));
}

enum class RegionClass { GME, NOT3SEP, NOT4SEP, UNDETECTED };

inline std::string region_name(RegionClass r) {
    switch (r) {
        case RegionClass::GME: return "GME";
        case RegionClass::NOT3SEP: return "NOT3SEP";
        case RegionClass::NOT4SEP: return "NOT4SEP";
        case RegionClass::UNDETECTED: return "UNDETECTED";
    }
    throw std::invalid_argument("region_name: unknown class");
}

// Fixed figure color map.
inline std::string region_color(RegionClass r) {
    switch (r) {
        case RegionClass::GME: return "red";
        case RegionClass::NOT3SEP: return "orange";
        case RegionClass::NOT4SEP: return "yellow";
        case RegionClass::UNDETECTED: return "black";
    }
    throw std::invalid_argument("region_color: unknown class");
}

struct PptReport {
    // minimum partial-transpose eigenvalue per bipartition, in
    // bipartition_pair_table() order
    std::array<double, 7> min_eigs{};
    bool ppt_all = false;       // all min_eigs >= -1e-10
    bool pt_invariant = false;  // max |rho^{T_S} - rho| < 1e-10 for all 7
};

namespace detail {

// True when every off-diagonal entry outside the antipodal slots (i, 15-i)
// is below 1e-14; such matrices keep that form under any partial transpose,
// whose spectrum then splits into eight 2x2 blocks.
inline bool antipodal_structured(const DensityMatrix& rho) {
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j)
            if (i != j && j != 15 - i && std::abs(rho(i, j)) > 1e-14) return false;
    return true;
}

inline double antipodal_pt_min_eig(const DensityMatrix& rho, unsigned sigma) {
    double min_eig = std::numeric_limits<double>::infinity();
    for (unsigned r = 0; r < 8; ++r) {
        double da = rho(r, r).real();
        double db = rho(15 - r, 15 - r).real();
        unsigned moved = r ^ sigma;
        double cc = std::abs(rho(moved, 15 - moved));
        double mid = 0.5 * (da + db);
        double half = 0.5 * (da - db);
        min_eig = std::min(min_eig, mid - std::sqrt(half * half + cc * cc));
    }
    return min_eig;
}

inline unsigned subset_mask(const std::vector<int>& subset) {
    unsigned m = 0;
    for (int s : subset) m |= 1u << (4 - s);
    return m;
}

}  // namespace detail

// Minimum eigenvalue of the partial transpose for each of the 7 bipartitions
// plus the two PPT flags.
inline PptReport ppt_report(const DensityMatrix& rho) {
    detail::require_dim16(rho, "ppt_report");
    PptReport out;
    const bool fast = detail::antipodal_structured(rho);
    const auto& table = bipartition_pair_table();
    double max_dev = 0.0;
    bool all_nonneg = true;
    for (std::size_t k = 0; k < table.size(); ++k) {
        Mat pt = partial_transpose(rho, table[k].subset);
        max_dev = std::max(max_dev, (pt - rho.mat()).max_abs());
        double min_eig = fast
            ? detail::antipodal_pt_min_eig(rho, detail::subset_mask(table[k].subset))
            : detail::jacobi_hermitian(pt, false).values.front();
        out.min_eigs[k] = min_eig;
        if (min_eig < -1e-10) all_nonneg = false;
    }
    out.ppt_all = all_nonneg;
    out.pt_invariant = max_dev < 1e-10;
    return out;
}

struct Classification {
    RegionClass region = RegionClass::UNDETECTED;
    PptReport ppt;
    WitnessReport witness;
};

// Precedence GME > NOT3SEP > NOT4SEP > UNDETECTED at tolerance 1e-10, using
// the adaptation-maximized criteria.
inline Classification classify(const DensityMatrix& rho,
                               I2Variant variant = I2Variant::normalized) {
    constexpr double tol = 1e-10;
    Classification out;
    out.witness = best_k_report(rho, variant);
    out.ppt = ppt_report(rho);
    if (out.witness.i2 > tol)
        out.region = RegionClass::GME;
    else if (out.witness.i3 > tol)
        out.region = RegionClass::NOT3SEP;
    else if (out.witness.i4 > tol)
        out.region = RegionClass::NOT4SEP;
    else
        out.region = RegionClass::UNDETECTED;
    return out;
}

struct ScanCell {
    double alpha = 0.0, beta = 0.0, gamma = 0.0, noise = 0.0;
    RegionClass region = RegionClass::UNDETECTED;
    double i2 = 0.0, i3 = 0.0, i4 = 0.0;
    double min_pt_eig = 0.0;
};

namespace detail {

inline ScanCell scan_node(const std::vector<MixtureComponent>& comps, double noise,
                          I2Variant variant) {
    MixtureSpec spec{comps, noise};
    DensityMatrix rho = mix(spec);
    Classification cls = classify(rho, variant);
    ScanCell cell;
    cell.noise = noise;
    cell.region = cls.region;
    cell.i2 = cls.witness.i2;
    cell.i3 = cls.witness.i3;
    cell.i4 = cls.witness.i4;
    cell.min_pt_eig = *std::min_element(cls.ppt.min_eigs.begin(), cls.ppt.min_eigs.end());
    return cell;
}

}  // namespace detail

// Uniform barycentric grid over alpha + beta <= 1 (noise = 1 - alpha - beta),
// boundary included; row-major in (i, j) with alpha = i/R, beta = j/R.
inline std::vector<ScanCell> scan_binary(const GhzLabel& a, const GhzLabel& b, int resolution,
                                         I2Variant variant = I2Variant::normalized) {
    if (resolution < 2) throw std::invalid_argument("scan_binary: resolution must be >= 2");
    if (a == b) throw std::invalid_argument("scan_binary: labels must differ");
    const double r = resolution;
    std::vector<ScanCell> cells;
    cells.reserve(static_cast<std::size_t>((resolution + 1) * (resolution + 2) / 2));
    for (int i = 0; i <= resolution; ++i)
        for (int j = 0; i + j <= resolution; ++j) {
            double alpha = i / r, beta = j / r;
            double noise = (resolution - i - j) / r;
            ScanCell cell = detail::scan_node({{a, alpha}, {b, beta}}, noise, variant);
            cell.alpha = alpha;
            cell.beta = beta;
            cell.gamma = 0.0;
            cells.push_back(cell);
        }
    return cells;
}

// Grid over the (alpha, beta, gamma) 3-simplex; components a, b must be a
// twin pair and c an un-twin of both (checked).
inline std::vector<ScanCell> scan_ternary(const GhzLabel& a, const GhzLabel& b, const GhzLabel& c,
                                          int resolution,
                                          I2Variant variant = I2Variant::normalized) {
    if (resolution < 2) throw std::invalid_argument("scan_ternary: resolution must be >= 2");
    if (twin_of(a) != b)
        throw std::invalid_argument("scan_ternary: first two labels must be a twin pair");
    if (c == a || c == b)
        throw std::invalid_argument("scan_ternary: third label must be an un-twin of the pair");
    const double r = resolution;
    std::vector<ScanCell> cells;
    for (int i = 0; i <= resolution; ++i)
        for (int j = 0; i + j <= resolution; ++j)
            for (int k = 0; i + j + k <= resolution; ++k) {
                double alpha = i / r, beta = j / r, gamma = k / r;
                double noise = (resolution - i - j - k) / r;
                ScanCell cell =
                    detail::scan_node({{a, alpha}, {b, beta}, {c, gamma}}, noise, variant);
                cell.alpha = alpha;
                cell.beta = beta;
                cell.gamma = gamma;
                cells.push_back(cell);
            }
    return cells;
}

enum class Criterion { i2_normalized, i3, i4, lin_i2 };

inline Criterion parse_criterion(const std::string& s) {
    if (s == "i2" || s == "i2-normalized") return Criterion::i2_normalized;
    if (s == "i3") return Criterion::i3;
    if (s == "i4") return Criterion::i4;
    if (s == "lin-i2" || s == "lin_i2") return Criterion::lin_i2;
    throw std::invalid_argument("unknown criterion: " + s);
}

// The admixture alpha where the criterion crosses zero on
// alpha * |GHZ_label><GHZ_label| + (1 - alpha) I/16, bisected to 1e-9.
inline double noise_threshold(Criterion criterion, const GhzLabel& label) {
    Mat proj = basis_state(label).projector();
    PauliObservable adapted = adapt(lin_i2_observable(), label);
    auto value = [&](double alpha) {
        Mat m = proj * cxd(alpha, 0.0) + Mat::identity(16) * cxd((1.0 - alpha) / 16.0, 0.0);
        DensityMatrix rho(std::move(m));
        switch (criterion) {
            case Criterion::i2_normalized: return eval_i2_adapted(rho, label);
            case Criterion::i3: return eval_i3_adapted(rho, label);
            case Criterion::i4: return eval_i4_adapted(rho, label);
            case Criterion::lin_i2: return eval_observable(adapted, rho);
        }
        throw std::invalid_argument("noise_threshold: unknown criterion");
    };
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        (value(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// --- CSV emission -----------------------------------------------------------

// shortest-ish stable float rendering: 12 significant digits
inline std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string scan_csv(const std::vector<ScanCell>& cells) {
    std::string out = "alpha,beta,gamma,noise,class,i2,i3,i4,min_pt_eig\n";
    for (const ScanCell& c : cells) {
        out += format_g12(c.alpha);
        out += ',';
        out += format_g12(c.beta);
        out += ',';
        out += format_g12(c.gamma);
        out += ',';
        out += format_g12(c.noise);
        out += ',';
        out += region_name(c.region);
        out += ',';
        out += format_g12(c.i2);
        out += ',';
        out += format_g12(c.i3);
        out += ',';
        out += format_g12(c.i4);
        out += ',';
        out += format_g12(c.min_pt_eig);
        out += '\n';
    }
    return out;
}

}  // namespace ghzkit
