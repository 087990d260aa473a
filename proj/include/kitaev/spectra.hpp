#pragma once

#include "kitaev/model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kitaev {

// extended runs the QR iteration in 113-bit floating point. Needed where
// eigenvalues sit on exceptional points and double rounding splits them.
enum class Precision { standard, extended };

inline constexpr Eigen::Index max_eigen_dim = 4096;

struct SpectrumResult {
    CVector eigenvalues;     // ascending by real part, then imaginary part
    CMatrix vectors;         // unit-norm right eigenvectors, column i <-> eigenvalue i
    Eigen::VectorXd residuals;
    double norm_inf = 0.0;   // max row sum of |H|

    Eigen::Index size() const { return eigenvalues.size(); }
};

SpectrumResult eigendecompose(const CMatrix& H, Precision precision = Precision::standard);

struct EdgeCriteria {
    double re_tol = 0.05;     // in units of t
    double weight_min = 0.5;
};

struct ModeInfo {
    Eigen::Index index = 0;
    cplx energy;
    bool edge_flag = false;
    double edge_weight = 0.0;
    double ipr = 0.0;
};

// Site probabilities |u_n|^2 + |v_n|^2 for a BdG-layout vector of length 2N.
Eigen::VectorXd site_weights(const CVector& v, int N);

// Diagnostics for every mode; t sets the energy unit of re_tol.
std::vector<ModeInfo> mode_diagnostics(const SpectrumResult& r, int N, const EdgeCriteria& c = {}, double t = 1.0);
std::vector<ModeInfo> detect_edge_states(const SpectrumResult& r, int N, const EdgeCriteria& c = {}, double t = 1.0);

// The flagged mode closest to zero energy, or the closest mode overall when nothing is flagged.
Eigen::Index smallest_edge_mode(const std::vector<ModeInfo>& modes);

struct PopulationDistribution {
    Eigen::VectorXd particle;  // |u_n|^2
    Eigen::VectorXd hole;      // |v_n|^2
};

PopulationDistribution population_distribution(const CVector& v, int N);
PopulationDistribution population_distribution(const SpectrumResult& r, Eigen::Index mode, int N);

// Lowest non-edge state with Re E above re_tol. Among modes tied at that Re E
// the one with largest |Im E| is taken; inside its degenerate cluster the state
// is resolved into the leftmost position eigenstate.
struct BulkState {
    cplx energy;
    CVector vector;
    std::vector<Eigen::Index> cluster;  // mode indices spanning the degenerate space
};

BulkState lowest_upper_band_state(const SpectrumResult& r, int N, const EdgeCriteria& c = {}, double t = 1.0);

enum class SweepAxis { mu, gamma, theta, onsite_delta };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);
ModelSpec with_axis_value(ModelSpec spec, SweepAxis axis, double value);

struct SweepOptions {
    int workers = 1;
    EdgeCriteria edge;
    Precision precision = Precision::standard;
};

struct SweepRow {
    double value = 0.0;
    bool failed = false;
    std::string error;
    CVector energies;                // sorted as in SpectrumResult
    std::vector<bool> edge_flags;
    std::vector<cplx> edge_energies;
    double min_abs = 0.0;
    double edge_splitting = 0.0;     // |Re E| of the smallest edge mode
};

// Open chain spectra, one row per value, in input order.
std::vector<SweepRow> spectral_sweep(const ModelSpec& base, SweepAxis axis, std::span<const double> values,
                                     const SweepOptions& options = {});

// Values below this count as zero splitting.
inline constexpr double splitting_floor = 1e-9;

std::size_t count_strict_extrema(std::span<const double> series, double floor = splitting_floor);
std::size_t splitting_oscillation_metric(std::span<const SweepRow> rows);

}  // namespace kitaev
