#pragma once

#include "kitaev/model.hpp"

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kitaev {

enum class CriticalFamily { theta, gamma, onsite, combined };

std::string to_string(CriticalFamily f);

struct PhaseBoundary {
    CriticalFamily family = CriticalFamily::theta;
    double critical_mu = 0.0;
    std::string formula;  // human-readable closed form that was applied
    ModelSpec inputs;
};

// Closed forms. Throws DomainError when more than one of theta/gamma/onsite
// is active, or when the family needs delta == t and it is not.
PhaseBoundary critical_mu(const ModelSpec& spec);

// E+ and E- of the 2x2 Bloch matrix.
std::pair<cplx, cplx> bulk_dispersion(const ModelSpec& spec, double k);

// Half band separation at k: |sqrt(h_y^2 + h_z^2)|.
double band_half_gap(const ModelSpec& spec, double k);

inline constexpr int gap_grid_points = 2048;
inline constexpr double gap_threshold = 1e-6;

// min over k of band_half_gap, 2048-point grid plus golden-section refinement.
double pbc_gap(const ModelSpec& spec);

struct CriticalSearch {
    bool found = false;
    double mu = 0.0;        // location of the smallest gap in the window
    double min_gap = 0.0;
};

// Gap closing in |mu| on [mu_lo, mu_hi]; found iff the gap dips below
// gap_threshold * t. Not finding one is a result, not an error.
CriticalSearch numeric_critical_mu(const ModelSpec& spec, double mu_lo, double mu_hi);

enum class Parameter { mu, t, delta, theta, gamma, onsite_delta };

Parameter parse_parameter(const std::string& name);
std::string to_string(Parameter p);

struct GridAxis {
    Parameter parameter = Parameter::mu;
    std::vector<double> values;
};

// t on an axis rescales delta, gamma and onsite_delta with it.
ModelSpec with_parameter(ModelSpec spec, Parameter p, double value);

struct PhaseDiagram {
    GridAxis x, y;
    std::vector<double> gap;        // x-major: cell (i, j) at i * ny + j
    std::vector<bool> nontrivial;
    std::vector<std::array<double, 2>> boundary;  // (x, y) points
    double threshold = gap_threshold;

    std::size_t cell(std::size_t i, std::size_t j) const { return i * y.values.size() + j; }
};

// Gap and phase label per cell; the label is |mu| < critical mu, using the
// closed form where one exists and numeric_critical_mu elsewhere.
PhaseDiagram phase_diagram(const ModelSpec& base, const GridAxis& x, const GridAxis& y, int workers = 1);

// GBZ tracing.

// Coefficients c0..c4 of det(H(beta) - E) * beta^2.
std::array<cplx, 5> characteristic_quartic(const ModelSpec& spec, cplx E);

// Roots ordered by modulus; ties broken by larger imaginary part first.
// Vanishing end coefficients give roots at 0 or infinity.
std::array<cplx, 4> characteristic_roots(const ModelSpec& spec, cplx E);

struct GbzPoint {
    cplx beta;
    cplx energy;  // generating energy
    int branch;   // 2 or 3: position in the modulus-ordered roots
};

struct GbzOptions {
    int sample_sites = 60;
    double tolerance = 1e-3;   // relative | |b2| - |b3| |
    bool project = true;       // move samples onto |b2| = |b3| before accepting
    int workers = 1;
};

struct GbzCurve {
    std::vector<GbzPoint> particle_loop;
    std::vector<GbzPoint> hole_loop;
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::size_t skipped = 0;

    // accepted generating energies; each contributes two points to one loop
    std::size_t accepted() const { return (particle_loop.size() + hole_loop.size()) / 2; }
};

// Bulk OBC eigenvalues of an open chain with opts.sample_sites sites.
std::vector<cplx> default_gbz_samples(const ModelSpec& spec, const GbzOptions& opts = {});

GbzCurve gbz_trace(const ModelSpec& spec, std::span<const cplx> energies, const GbzOptions& opts = {});
GbzCurve gbz_trace(const ModelSpec& spec, const GbzOptions& opts = {});

}  // namespace kitaev
