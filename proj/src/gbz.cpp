#include "kitaev/error.hpp"
#include "kitaev/parallel.hpp"
#include "kitaev/spectra.hpp"
#include "kitaev/topology.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace kitaev {

namespace {

// Laurent polynomial in beta with powers -1, 0, 1.
using Laurent = std::array<cplx, 3>;

struct Symbol {
    Laurent identity, y, z;
};

Symbol bloch_symbol(const ModelSpec& s) {
    const cplx i(0.0, 1.0);
    const double g = s.dissipation.kind == DissipationKind::all_bonds ? s.gamma : 0.0;
    const cplx hop = -cplx(s.t * std::cos(s.theta), g);
    const cplx twist = i * s.t * std::sin(s.theta);
    return {
        {-twist, 0.0, twist},
        {i * s.delta, 0.0, -i * s.delta},
        {hop, cplx(-s.mu, -s.onsite_delta), hop},
    };
}

// Product of two Laurent polynomials, powers -2..2 stored as 0..4.
std::array<cplx, 5> square(const Laurent& a) {
    std::array<cplx, 5> out{};
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) out[static_cast<std::size_t>(p + q)] += a[p] * a[q];
    return out;
}

ModelSpec gbz_ready(const ModelSpec& spec) {
    ModelSpec s = validated(spec);
    if (s.dissipation.kind == DissipationKind::positional)
        throw DomainError("positional dissipation is not translation invariant");
    if (s.delta == 0.0) throw DomainError("pairing delta = 0 makes the characteristic quartic degenerate");
    return s;
}

std::array<cplx, 5> quartic(const Symbol& h, cplx E) {
    Laurent shifted = h.identity;
    shifted[1] -= E;
    const auto a = square(shifted), b = square(h.y), c = square(h.z);
    std::array<cplx, 5> p;
    for (std::size_t k = 0; k < 5; ++k) p[k] = a[k] - b[k] - c[k];
    return p;
}

bool is_infinite(cplx z) { return !std::isfinite(z.real()) || !std::isfinite(z.imag()); }

std::array<cplx, 4> roots_of(const std::array<cplx, 5>& p) {
    double scale = 0.0;
    for (const auto& c : p) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) throw NumericError("characteristic quartic vanishes identically");
    const double eps = 1e-14 * scale;

    int lo = 0, hi = 4;
    while (lo < hi && std::abs(p[static_cast<std::size_t>(lo)]) < eps) ++lo;
    while (hi > lo && std::abs(p[static_cast<std::size_t>(hi)]) < eps) --hi;

    std::vector<cplx> r;
    for (int k = 0; k < lo; ++k) r.emplace_back(0.0, 0.0);
    const int degree = hi - lo;
    if (degree > 0) {
        Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
        const cplx lead = p[static_cast<std::size_t>(hi)];
        for (int k = 0; k < degree; ++k) companion(0, k) = -p[static_cast<std::size_t>(hi - 1 - k)] / lead;
        for (int k = 1; k < degree; ++k) companion(k, k - 1) = 1.0;
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
        for (int k = 0; k < degree; ++k) r.push_back(es.eigenvalues()(k));
    }
    const double inf = std::numeric_limits<double>::infinity();
    while (r.size() < 4) r.emplace_back(inf, 0.0);

    std::ranges::stable_sort(r, [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    for (int pass = 0; pass < 3; ++pass)
        for (std::size_t k = 0; k + 1 < r.size(); ++k) {
            const double ma = std::abs(r[k]), mb = std::abs(r[k + 1]);
            if (is_infinite(r[k]) || is_infinite(r[k + 1])) continue;
            if (std::abs(ma - mb) <= 1e-9 * std::max(ma, mb) && r[k + 1].imag() > r[k].imag()) std::swap(r[k], r[k + 1]);
        }
    return {r[0], r[1], r[2], r[3]};
}

cplx poly(const std::array<cplx, 5>& p, cplx x) {
    cplx v = p[4];
    for (int k = 3; k >= 0; --k) v = v * x + p[static_cast<std::size_t>(k)];
    return v;
}

cplx dpoly(const std::array<cplx, 5>& p, cplx x) {
    cplx v = 4.0 * p[4];
    for (int k = 3; k >= 1; --k) v = v * x + double(k) * p[static_cast<std::size_t>(k)];
    return v;
}

// Moves E until the two middle roots have equal modulus. Newton on
// G(E) = ln|b3| - ln|b2| with the minimum-norm complex step.
std::optional<cplx> project_onto_gbz(const Symbol& h, cplx E) {
    auto r = roots_of(quartic(h, E));
    cplx b2 = r[1], b3 = r[2];
    if (is_infinite(b2) || is_infinite(b3)) return std::nullopt;
    for (int it = 0; it < 60; ++it) {
        const auto p = quartic(h, E);
        for (int k = 0; k < 3; ++k) {
            b2 -= poly(p, b2) / dpoly(p, b2);
            b3 -= poly(p, b3) / dpoly(p, b3);
        }
        const double G = std::log(std::abs(b3)) - std::log(std::abs(b2));
        if (!std::isfinite(G)) return std::nullopt;
        if (std::abs(G) < 1e-14) return E;
        // dP/dE = -2 (h_I(beta) - E) beta^2
        auto slope = [&](cplx b) {
            const cplx hI = h.identity[0] / b + h.identity[1] + h.identity[2] * b;
            return 2.0 * (hI - E) * b * b / dpoly(p, b);
        };
        const cplx d = slope(b3) / b3 - slope(b2) / b2;
        if (!(std::norm(d) > 0.0) || !std::isfinite(std::norm(d))) return std::nullopt;
        E -= G * std::conj(d) / std::norm(d);
        if (!std::isfinite(E.real()) || !std::isfinite(E.imag())) return std::nullopt;
    }
    return E;
}

struct Accepted {
    bool ok = false;
    cplx energy;
    cplx b2, b3;
};

Accepted accept(const Symbol& h, cplx E, double tol) {
    const auto r = roots_of(quartic(h, E));
    Accepted a{false, E, r[1], r[2]};
    if (is_infinite(r[1]) || is_infinite(r[2])) return a;
    const double m2 = std::abs(r[1]), m3 = std::abs(r[2]);
    a.ok = m2 > 0.0 && std::abs(m2 - m3) / m2 < tol;
    return a;
}

}  // namespace

std::array<cplx, 5> characteristic_quartic(const ModelSpec& spec, cplx E) {
    return quartic(bloch_symbol(gbz_ready(spec)), E);
}

std::array<cplx, 4> characteristic_roots(const ModelSpec& spec, cplx E) {
    return roots_of(characteristic_quartic(spec, E));
}

std::vector<cplx> default_gbz_samples(const ModelSpec& spec, const GbzOptions& opts) {
    ModelSpec chain = gbz_ready(spec);
    chain.N = opts.sample_sites;
    chain.boundary = Boundary::open;
    const SpectrumResult r = eigendecompose(build_bdg_obc(chain).H);
    std::vector<cplx> out;
    for (const auto& m : mode_diagnostics(r, chain.N, {}, chain.t))
        if (!m.edge_flag) out.push_back(m.energy);
    return out;
}

GbzCurve gbz_trace(const ModelSpec& spec, std::span<const cplx> energies, const GbzOptions& opts) {
    const ModelSpec s = gbz_ready(spec);
    const Symbol h = bloch_symbol(s);

    // The spectrum is symmetric under E -> -E; trace one half and mirror it.
    std::vector<cplx> canonical;
    for (cplx E : energies)
        if (E.real() > 0.0) canonical.push_back(E);

    std::vector<std::array<Accepted, 2>> results(canonical.size());
    parallel_for(canonical.size(), opts.workers, [&](std::size_t i) {
        cplx E = canonical[i];
        if (opts.project) {
            const auto moved = project_onto_gbz(h, E);
            if (!moved) return;
            E = *moved;
        }
        results[i] = {accept(h, E, opts.tolerance), accept(h, -E, opts.tolerance)};
    });

    GbzCurve curve;
    curve.tolerance = opts.tolerance;
    curve.samples = 2 * canonical.size();
    auto append = [](std::vector<GbzPoint>& loop, const Accepted& a) {
        loop.push_back({a.b2, a.energy, 2});
        loop.push_back({a.b3, a.energy, 3});
    };
    // Both middle roots share one modulus; a pair outside the unit circle
    // is a particle pair and its mirror at -E holds the reciprocal roots.
    for (const auto& [plus, minus] : results) {
        if (!plus.ok || !minus.ok) {
            curve.skipped += 2;
            continue;
        }
        const bool outside = std::abs(plus.b2) >= 1.0;
        append(outside ? curve.particle_loop : curve.hole_loop, plus);
        append(outside ? curve.hole_loop : curve.particle_loop, minus);
    }
    if (curve.accepted() < 10)
        throw NumericError("insufficient GBZ sampling: " + std::to_string(curve.accepted()) +
                           " accepted points");
    return curve;
}

GbzCurve gbz_trace(const ModelSpec& spec, const GbzOptions& opts) {
    const auto samples = default_gbz_samples(spec, opts);
    return gbz_trace(spec, samples, opts);
}

}  // namespace kitaev
