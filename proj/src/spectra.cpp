#include "kitaev/spectra.hpp"

#include "detail.hpp"
#include "kitaev/error.hpp"
#include "kitaev/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace kitaev {

namespace detail {

std::uint64_t matrix_hash(const CMatrix& H) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 1099511628211ull;
    };
    const Eigen::Index r = H.rows(), c = H.cols();
    mix(&r, sizeof r);
    mix(&c, sizeof c);
    mix(H.data(), static_cast<std::size_t>(H.size()) * sizeof(cplx));
    return h;
}

std::string hex(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

RawEigen solve_standard(const CMatrix& H) {
    Eigen::ComplexEigenSolver<CMatrix> es(H, true);
    RawEigen out;
    out.converged = es.info() == Eigen::Success;
    if (!out.converged) return out;
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
    for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
        const double len = out.vectors.col(j).norm();
        if (len > 0.0) out.vectors.col(j) /= len;
    }
    return out;
}

}  // namespace detail

namespace {

bool energy_less(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

}  // namespace

SpectrumResult eigendecompose(const CMatrix& H, Precision precision) {
    if (H.rows() != H.cols()) throw DomainError("eigendecompose needs a square matrix");
    if (H.rows() > max_eigen_dim) throw DomainError("matrix dimension exceeds " + std::to_string(max_eigen_dim));
    if (!H.allFinite()) throw DomainError("matrix has non-finite entries");

    const auto tag = [&] { return " (matrix hash " + detail::hex(detail::matrix_hash(H)) + ")"; };
    detail::RawEigen raw = precision == Precision::extended ? detail::solve_extended(H) : detail::solve_standard(H);
    if (!raw.converged) throw NumericError("eigensolver did not converge" + tag());

    const Eigen::Index n = H.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::ranges::stable_sort(order, [&](Eigen::Index a, Eigen::Index b) {
        return energy_less(raw.values(a), raw.values(b));
    });

    SpectrumResult r;
    r.eigenvalues.resize(n);
    r.vectors.resize(n, n);
    r.residuals.resize(n);
    r.norm_inf = n ? H.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(i)];
        r.eigenvalues(i) = raw.values(src);
        r.vectors.col(i) = raw.vectors.col(src);
    }
    for (Eigen::Index i = 0; i < n; ++i)
        r.residuals(i) = (H * r.vectors.col(i) - r.eigenvalues(i) * r.vectors.col(i)).norm();

    const double bound = 1e-8 * r.norm_inf;
    if (n && r.residuals.maxCoeff() > bound)
        throw NumericError("eigenpair residual " + std::to_string(r.residuals.maxCoeff()) + " above contract" + tag());
    return r;
}

Eigen::VectorXd site_weights(const CVector& v, int N) {
    Eigen::VectorXd p(N);
    for (int n = 0; n < N; ++n) p(n) = std::norm(v(n)) + std::norm(v(N + n));
    const double total = p.sum();
    if (total > 0.0) p /= total;
    return p;
}

std::vector<ModeInfo> mode_diagnostics(const SpectrumResult& r, int N, const EdgeCriteria& c, double t) {
    if (r.vectors.rows() != 2 * N) throw DomainError("mode diagnostics need a BdG-layout spectrum of size 2N");
    const int width = (N + 9) / 10;
    std::vector<ModeInfo> modes;
    modes.reserve(static_cast<std::size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const Eigen::VectorXd p = site_weights(r.vectors.col(i), N);
        ModeInfo m;
        m.index = i;
        m.energy = r.eigenvalues(i);
        m.edge_weight = std::min(1.0, p.head(width).sum() + p.tail(width).sum());
        if (2 * width > N) m.edge_weight = std::min(1.0, p.sum());
        m.ipr = p.squaredNorm();
        m.edge_flag = std::abs(m.energy.real()) < c.re_tol * t && m.edge_weight > c.weight_min;
        modes.push_back(m);
    }
    return modes;
}

std::vector<ModeInfo> detect_edge_states(const SpectrumResult& r, int N, const EdgeCriteria& c, double t) {
    auto modes = mode_diagnostics(r, N, c, t);
    std::erase_if(modes, [](const ModeInfo& m) { return !m.edge_flag; });
    return modes;
}

Eigen::Index smallest_edge_mode(const std::vector<ModeInfo>& modes) {
    if (modes.empty()) throw DomainError("empty spectrum");
    auto closer = [](const ModeInfo& a, const ModeInfo& b) { return std::abs(a.energy) < std::abs(b.energy); };
    const ModeInfo* best = nullptr;
    for (const auto& m : modes)
        if (m.edge_flag && (!best || closer(m, *best))) best = &m;
    if (!best) best = &*std::ranges::min_element(modes, closer);
    return best->index;
}

PopulationDistribution population_distribution(const CVector& v, int N) {
    if (v.size() != 2 * N) throw DomainError("population needs a vector of length 2N");
    PopulationDistribution d;
    d.particle = v.head(N).cwiseAbs2();
    d.hole = v.tail(N).cwiseAbs2();
    const double total = d.particle.sum() + d.hole.sum();
    if (total > 0.0) {
        d.particle /= total;
        d.hole /= total;
    }
    return d;
}

PopulationDistribution population_distribution(const SpectrumResult& r, Eigen::Index mode, int N) {
    if (mode < 0 || mode >= r.size()) throw DomainError("mode index " + std::to_string(mode) + " out of range");
    return population_distribution(CVector(r.vectors.col(mode)), N);
}

BulkState lowest_upper_band_state(const SpectrumResult& r, int N, const EdgeCriteria& c, double t) {
    const auto modes = mode_diagnostics(r, N, c, t);
    std::vector<const ModeInfo*> upper;
    for (const auto& m : modes)
        if (!m.edge_flag && m.energy.real() > c.re_tol * t) upper.push_back(&m);
    if (upper.empty()) throw DomainError("no upper-band bulk state");

    double lowest = upper.front()->energy.real();
    for (const auto* m : upper) lowest = std::min(lowest, m->energy.real());
    const double scale = std::max(1.0, r.norm_inf);
    const ModeInfo* pick = nullptr;
    for (const auto* m : upper)
        if (m->energy.real() <= lowest + 1e-8 * scale &&
            (!pick || std::abs(m->energy.imag()) > std::abs(pick->energy.imag())))
            pick = m;

    // Near-degenerate partners, split by rounding at defective points.
    BulkState out;
    out.energy = pick->energy;
    for (const auto* m : upper)
        if (std::abs(m->energy - pick->energy) < 1e-6 * scale) out.cluster.push_back(m->index);

    CMatrix span(r.vectors.rows(), static_cast<Eigen::Index>(out.cluster.size()));
    for (std::size_t j = 0; j < out.cluster.size(); ++j)
        span.col(static_cast<Eigen::Index>(j)) = r.vectors.col(out.cluster[j]);
    Eigen::JacobiSVD<CMatrix> svd(span, Eigen::ComputeThinU);
    Eigen::Index rank = 0;
    const auto& sv = svd.singularValues();
    for (Eigen::Index j = 0; j < sv.size(); ++j)
        if (sv(j) > 1e-6 * sv(0)) ++rank;
    const CMatrix basis = svd.matrixU().leftCols(rank);

    Eigen::VectorXd position(2 * N);
    for (int n = 0; n < N; ++n) position(n) = position(N + n) = n;
    const CMatrix projected = basis.adjoint() * position.asDiagonal() * basis;
    Eigen::SelfAdjointEigenSolver<CMatrix> pos(projected);
    out.vector = basis * pos.eigenvectors().col(0);
    out.vector.normalize();
    return out;
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "mu") return SweepAxis::mu;
    if (name == "gamma") return SweepAxis::gamma;
    if (name == "theta") return SweepAxis::theta;
    if (name == "onsite_delta") return SweepAxis::onsite_delta;
    throw ConfigError("unknown sweep axis '" + name + "'");
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::mu: return "mu";
    case SweepAxis::gamma: return "gamma";
    case SweepAxis::theta: return "theta";
    case SweepAxis::onsite_delta: return "onsite_delta";
    }
    return "?";
}

ModelSpec with_axis_value(ModelSpec spec, SweepAxis axis, double value) {
    switch (axis) {
    case SweepAxis::mu: spec.mu = value; break;
    case SweepAxis::gamma: spec.gamma = value; break;
    case SweepAxis::theta: spec.theta = value; break;
    case SweepAxis::onsite_delta: spec.onsite_delta = value; break;
    }
    return spec;
}

std::vector<SweepRow> spectral_sweep(const ModelSpec& base, SweepAxis axis, std::span<const double> values,
                                     const SweepOptions& options) {
    std::vector<SweepRow> rows(values.size());
    parallel_for(values.size(), options.workers, [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = values[i];
        try {
            if (!std::isfinite(values[i])) throw DomainError("non-finite sweep value");
            const ModelSpec spec = validated(with_axis_value(base, axis, values[i]));
            const BdgMatrix bdg = spec.boundary == Boundary::open ? build_bdg_obc(spec) : build_bdg_pbc(spec);
            const SpectrumResult r = eigendecompose(bdg.H, options.precision);
            const auto modes = mode_diagnostics(r, spec.N, options.edge, spec.t);
            row.energies = r.eigenvalues;
            row.edge_flags.reserve(modes.size());
            row.min_abs = r.eigenvalues.cwiseAbs().minCoeff();
            for (const auto& m : modes) {
                row.edge_flags.push_back(m.edge_flag);
                if (m.edge_flag) row.edge_energies.push_back(m.energy);
            }
            row.edge_splitting = std::abs(r.eigenvalues(smallest_edge_mode(modes)).real());
        } catch (const Error& e) {
            row.failed = true;
            row.error = e.what();
        }
    });
    return rows;
}

std::size_t count_strict_extrema(std::span<const double> series, double floor) {
    if (series.size() < 3) throw DomainError("extremum count needs at least 3 points");
    std::vector<double> s(series.begin(), series.end());
    for (double& x : s) x = std::max(x, floor);
    std::size_t count = 0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const bool peak = s[i] > s[i - 1] && s[i] > s[i + 1];
        const bool dip = s[i] < s[i - 1] && s[i] < s[i + 1];
        if (peak || dip) ++count;
    }
    return count;
}

std::size_t splitting_oscillation_metric(std::span<const SweepRow> rows) {
    std::vector<double> split;
    for (const auto& row : rows)
        if (!row.failed) split.push_back(row.edge_splitting);
    return count_strict_extrema(split);
}

}  // namespace kitaev
