#include "kitaev/topology.hpp"

#include "kitaev/error.hpp"
#include "kitaev/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace kitaev {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Bloch coefficients without re-validating the spec on every k.
struct Band {
    double t, sin_theta, cos_theta, pairing, gamma;
    cplx onsite;

    explicit Band(const ModelSpec& s)
        : t(s.t), sin_theta(std::sin(s.theta)), cos_theta(std::cos(s.theta)), pairing(s.delta),
          gamma(s.dissipation.kind == DissipationKind::all_bonds ? s.gamma : 0.0), onsite(-s.mu, -s.onsite_delta) {}

    double half_gap_sq(double k) const {
        const cplx hy = 2.0 * pairing * std::sin(k);
        const cplx hz = onsite - 2.0 * cplx(t * cos_theta, gamma) * std::cos(k);
        return std::abs(hy * hy + hz * hz);
    }
};

ModelSpec translation_invariant(const ModelSpec& spec) {
    ModelSpec s = validated(spec);
    if (s.dissipation.kind == DissipationKind::positional)
        throw DomainError("positional dissipation is not translation invariant");
    return s;
}

// Golden-section minimum of f on [a, b].
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, double tol) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - r * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + r * (b - a); fd = f(d);
        }
    }
    return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

double min_half_gap(const Band& band) {
    constexpr int n = gap_grid_points;
    constexpr double h = two_pi / n;
    std::vector<double> f(n);
    for (int j = 0; j < n; ++j) f[j] = band.half_gap_sq(j * h);
    std::vector<int> minima;
    for (int j = 0; j < n; ++j)
        if (f[j] <= f[(j + n - 1) % n] && f[j] <= f[(j + 1) % n]) minima.push_back(j);
    std::ranges::sort(minima, [&](int a, int b) { return f[a] < f[b]; });
    if (minima.size() > 4) minima.resize(4);
    double best = *std::ranges::min_element(f);
    for (int j : minima) {
        const double k0 = j * h;
        auto [k, v] = golden_min([&](double k) { return band.half_gap_sq(k); }, k0 - h, k0 + h, 1e-15);
        best = std::min(best, v);
    }
    return std::sqrt(best);
}

}  // namespace

std::string to_string(CriticalFamily f) {
    switch (f) {
    case CriticalFamily::theta: return "theta";
    case CriticalFamily::gamma: return "gamma";
    case CriticalFamily::onsite: return "onsite";
    case CriticalFamily::combined: return "combined";
    }
    return "?";
}

PhaseBoundary critical_mu(const ModelSpec& spec) {
    const ModelSpec s = translation_invariant(spec);
    if (!(s.t > 0.0)) throw DomainError("closed-form critical mu needs t > 0");
    const bool twisted = std::abs(std::sin(s.theta)) > 1e-15;
    const bool lossy_bonds = s.gamma > 0.0 && s.dissipation.kind == DissipationKind::all_bonds;
    const bool lossy_sites = s.onsite_delta > 0.0;
    const int active = int(twisted) + int(lossy_bonds) + int(lossy_sites);
    const bool balanced = std::abs(s.delta - s.t) <= 1e-12 * s.t;

    if (active > 1) {
        if (lossy_bonds && lossy_sites)
            throw DomainError("no closed form for combined bond and onsite dissipation; use numeric_critical_mu");
        throw DomainError("closed forms cover one active family at a time; use numeric_critical_mu");
    }

    PhaseBoundary b;
    b.inputs = s;
    if (lossy_bonds) {
        if (!balanced) throw DomainError("closed form for bond dissipation needs delta == t; use numeric_critical_mu");
        b.family = CriticalFamily::gamma;
        b.critical_mu = 2.0 * s.t / std::sqrt(1.0 + (s.gamma / s.t) * (s.gamma / s.t));
        b.formula = "2t/sqrt(1+gamma^2/t^2)";
    } else if (lossy_sites) {
        b.family = CriticalFamily::onsite;
        const double ratio = s.onsite_delta / (2.0 * s.delta);
        b.critical_mu = (s.delta > 0.0 && ratio < 1.0) ? 2.0 * s.t * std::sqrt(1.0 - ratio * ratio) : 0.0;
        b.formula = "2t*sqrt(1-onsite_delta^2/(4 delta^2))";
    } else {
        if (twisted && !balanced) throw DomainError("closed form for a hopping phase needs delta == t; use numeric_critical_mu");
        b.family = CriticalFamily::theta;
        b.critical_mu = 2.0 * s.t * std::abs(std::cos(s.theta));
        b.formula = "2t|cos theta|";
    }
    return b;
}

std::pair<cplx, cplx> bulk_dispersion(const ModelSpec& spec, double k) {
    const BlochMatrix b = build_bloch(spec, k);
    const cplx root = std::sqrt(b.h_y * b.h_y + b.h_z * b.h_z);
    return {b.h_I + root, b.h_I - root};
}

double band_half_gap(const ModelSpec& spec, double k) {
    return std::sqrt(Band(translation_invariant(spec)).half_gap_sq(k));
}

double pbc_gap(const ModelSpec& spec) { return min_half_gap(Band(translation_invariant(spec))); }

CriticalSearch numeric_critical_mu(const ModelSpec& spec, double mu_lo, double mu_hi) {
    ModelSpec s = translation_invariant(spec);
    if (!(mu_hi > mu_lo)) throw DomainError("mu window must have mu_hi > mu_lo");
    auto gap_at = [&s](double mu) {
        ModelSpec x = s;
        x.mu = mu;
        return min_half_gap(Band(x));
    };

    constexpr int coarse = 400;
    const double step = (mu_hi - mu_lo) / coarse;
    int best = 0;
    double best_gap = gap_at(mu_lo);
    for (int i = 1; i <= coarse; ++i) {
        const double g = gap_at(mu_lo + i * step);
        if (g < best_gap) {
            best_gap = g;
            best = i;
        }
    }
    const double a = mu_lo + std::max(best - 1, 0) * step;
    const double b = mu_lo + std::min(best + 1, coarse) * step;
    auto [mu, g] = golden_min(gap_at, a, b, 1e-14 * std::max(1.0, std::abs(b)));
    if (best_gap < g) {
        mu = mu_lo + best * step;
        g = best_gap;
    }
    return {g < gap_threshold * s.t, mu, g};
}

Parameter parse_parameter(const std::string& name) {
    if (name == "mu") return Parameter::mu;
    if (name == "t") return Parameter::t;
    if (name == "delta") return Parameter::delta;
    if (name == "theta") return Parameter::theta;
    if (name == "gamma") return Parameter::gamma;
    if (name == "onsite_delta") return Parameter::onsite_delta;
    throw ConfigError("unknown parameter '" + name + "'");
}

std::string to_string(Parameter p) {
    switch (p) {
    case Parameter::mu: return "mu";
    case Parameter::t: return "t";
    case Parameter::delta: return "delta";
    case Parameter::theta: return "theta";
    case Parameter::gamma: return "gamma";
    case Parameter::onsite_delta: return "onsite_delta";
    }
    return "?";
}

ModelSpec with_parameter(ModelSpec s, Parameter p, double value) {
    switch (p) {
    case Parameter::mu: s.mu = value; break;
    case Parameter::t: {
        if (!(value > 0.0) || !(s.t > 0.0)) throw DomainError("t axis values must be positive");
        const double scale = value / s.t;
        s.t = value;
        s.delta *= scale;
        s.gamma *= scale;
        s.onsite_delta *= scale;
        break;
    }
    case Parameter::delta: s.delta = value; break;
    case Parameter::theta: s.theta = value; break;
    case Parameter::gamma: s.gamma = value; break;
    case Parameter::onsite_delta: s.onsite_delta = value; break;
    }
    return s;
}

PhaseDiagram phase_diagram(const ModelSpec& base, const GridAxis& x, const GridAxis& y, int workers) {
    if (x.values.empty() || y.values.empty()) throw DomainError("phase diagram axes must be non-empty");
    if (x.parameter == y.parameter) throw DomainError("phase diagram axes must differ");
    const std::size_t nx = x.values.size(), ny = y.values.size();
    if (nx * ny > 1'000'000) throw DomainError("phase diagram grid exceeds 1e6 cells");

    ModelSpec ring = translation_invariant(base);
    ring.boundary = Boundary::periodic;

    PhaseDiagram pd;
    pd.x = x;
    pd.y = y;
    pd.gap.assign(nx * ny, 0.0);
    pd.nontrivial.assign(nx * ny, false);
    std::vector<double> critical(nx * ny, 0.0);

    auto cell_spec = [&](std::size_t i, std::size_t j) {
        return validated(with_parameter(with_parameter(ring, x.parameter, x.values[i]), y.parameter, y.values[j]));
    };

    // Critical mu does not depend on mu; cache it per remaining parameters.
    std::mutex cache_lock;
    std::map<std::array<double, 6>, double> cache;
    auto critical_for = [&](ModelSpec s) {
        s.mu = 0.0;
        const std::array<double, 6> key{s.t, s.delta, s.theta, s.gamma, s.onsite_delta, double(s.dissipation.kind)};
        {
            std::scoped_lock lock(cache_lock);
            if (auto it = cache.find(key); it != cache.end()) return it->second;
        }
        double value;
        try {
            value = critical_mu(s).critical_mu;
        } catch (const DomainError&) {
            const auto search = numeric_critical_mu(s, 0.0, 4.0 * s.t);
            value = search.found ? search.mu : 0.0;
        }
        std::scoped_lock lock(cache_lock);
        cache.emplace(key, value);
        return value;
    };

    parallel_for(nx * ny, workers, [&](std::size_t c) {
        const std::size_t i = c / ny, j = c % ny;
        const ModelSpec s = cell_spec(i, j);
        pd.gap[c] = pbc_gap(s);
        critical[c] = critical_for(s);
    });
    for (std::size_t c = 0; c < nx * ny; ++c) {
        const ModelSpec s = cell_spec(c / ny, c % ny);
        pd.nontrivial[c] = std::abs(s.mu) < critical[c];
    }

    // Midpoints between neighbouring cells whose labels differ, walking along mu when it is an axis.
    const bool along_x = x.parameter == Parameter::mu;
    if (along_x) {
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i + 1 < nx; ++i)
                if (pd.nontrivial[pd.cell(i, j)] != pd.nontrivial[pd.cell(i + 1, j)])
                    pd.boundary.push_back({0.5 * (x.values[i] + x.values[i + 1]), y.values[j]});
    } else {
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j + 1 < ny; ++j)
                if (pd.nontrivial[pd.cell(i, j)] != pd.nontrivial[pd.cell(i, j + 1)])
                    pd.boundary.push_back({x.values[i], 0.5 * (y.values[j] + y.values[j + 1])});
    }
    return pd;
}

}  // namespace kitaev
