#include "kitaev/model.hpp"

#include "kitaev/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kitaev {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

cplx forward_hop(const ModelSpec& s, double g) { return -(s.t * std::polar(1.0, s.theta) + cplx(0.0, g)); }
cplx backward_hop(const ModelSpec& s, double g) { return -(s.t * std::polar(1.0, -s.theta) + cplx(0.0, g)); }

// Adds one bond (i -> j) to C and S with a multiplier for ring wrap signs.
void add_bond(CMatrix& H, int N, int i, int j, cplx fwd, cplx bwd, double pair, double sign) {
    H(j, i) += sign * fwd;
    H(i, j) += sign * bwd;
    H(i, N + j) += sign * pair;
    H(j, N + i) -= sign * pair;
}

// Fills hole blocks from the particle ones: [[C, S], [-S*, -C^T]].
void complete_nambu(CMatrix& H, int N) {
    H.bottomLeftCorner(N, N) = -H.topRightCorner(N, N).conjugate();
    H.bottomRightCorner(N, N) = -H.topLeftCorner(N, N).transpose();
}

}  // namespace

ModelSpec validated(ModelSpec s) {
    require(s.N >= 1, "N must be >= 1");
    for (double v : {s.mu, s.t, s.delta, s.theta, s.gamma, s.onsite_delta})
        require(std::isfinite(v), "model parameters must be finite");
    require(s.t >= 0.0, "t must be >= 0");
    require(s.gamma >= 0.0, "gamma must be >= 0");
    require(s.onsite_delta >= 0.0, "onsite_delta must be >= 0");
    s.theta = std::fmod(s.theta, two_pi);
    if (s.theta < 0.0) s.theta += two_pi;
    if (s.theta >= two_pi) s.theta = 0.0;

    auto& d = s.dissipation;
    if (d.kind != DissipationKind::positional) {
        require(d.positions.empty(), "dissipation positions are only allowed for kind=positional");
    } else {
        require(!d.positions.empty(), "positional dissipation needs at least one position");
        for (int m : d.positions)
            require(m >= 1 && m <= s.N - 1 && s.N - m >= 1,
                    "dissipation position " + std::to_string(m) + " outside [1, N-1]");
    }
    return s;
}

std::vector<int> dissipative_bonds(const ModelSpec& spec) {
    const ModelSpec s = validated(spec);
    std::vector<int> bonds;
    switch (s.dissipation.kind) {
    case DissipationKind::none:
        break;
    case DissipationKind::all_bonds:
        for (int n = 1; n < s.N; ++n) bonds.push_back(n);
        break;
    case DissipationKind::positional:
        for (int m : s.dissipation.positions) {
            bonds.push_back(m);
            bonds.push_back(s.N - m);
        }
        std::ranges::sort(bonds);
        bonds.erase(std::unique(bonds.begin(), bonds.end()), bonds.end());
        break;
    }
    return bonds;
}

std::vector<double> bond_gammas(const ModelSpec& s) {
    std::vector<double> g(static_cast<std::size_t>(std::max(s.N - 1, 0)), 0.0);
    for (int n : dissipative_bonds(s)) g[static_cast<std::size_t>(n - 1)] = s.gamma;
    return g;
}

BdgMatrix build_bdg_obc(const ModelSpec& spec) {
    const ModelSpec s = validated(spec);
    require(s.boundary == Boundary::open, "build_bdg_obc needs an open chain");
    require(s.N >= 2, "BdG chain needs N >= 2");
    const int N = s.N;
    CMatrix H = CMatrix::Zero(2 * N, 2 * N);
    const cplx onsite(-s.mu, -s.onsite_delta);
    for (int n = 0; n < N; ++n) H(n, n) = onsite;
    const auto g = bond_gammas(s);
    for (int n = 0; n + 1 < N; ++n)
        add_bond(H, N, n, n + 1, forward_hop(s, g[n]), backward_hop(s, g[n]), s.delta, 1.0);
    complete_nambu(H, N);
    return {N, std::move(H)};
}

BdgMatrix build_bdg_pbc(const ModelSpec& spec) {
    const ModelSpec s = validated(spec);
    require(s.boundary == Boundary::periodic, "build_bdg_pbc needs a periodic chain");
    require(s.N >= 2, "BdG chain needs N >= 2");
    require(s.dissipation.kind != DissipationKind::positional,
            "positional dissipation is not translation invariant");
    const int N = s.N;
    CMatrix H = CMatrix::Zero(2 * N, 2 * N);
    const cplx onsite(-s.mu, -s.onsite_delta);
    for (int n = 0; n < N; ++n) H(n, n) = onsite;
    const double g = s.dissipation.kind == DissipationKind::all_bonds ? s.gamma : 0.0;
    const cplx fwd = forward_hop(s, g), bwd = backward_hop(s, g);
    for (int n = 0; n + 1 < N; ++n) add_bond(H, N, n, n + 1, fwd, bwd, s.delta, 1.0);
    // += keeps N=2 right, where the wrap bond lands on bond 1
    const double wrap = s.parity == ParitySector::antiperiodic ? -1.0 : 1.0;
    add_bond(H, N, N - 1, 0, fwd, bwd, s.delta, wrap);
    complete_nambu(H, N);
    return {N, std::move(H)};
}

std::vector<double> ring_momenta(int N, ParitySector sector) {
    const double shift = sector == ParitySector::antiperiodic ? 0.5 : 0.0;
    std::vector<double> k(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) k[static_cast<std::size_t>(j)] = two_pi * (j + shift) / N;
    return k;
}

Eigen::Matrix2cd BlochMatrix::matrix() const {
    const cplx i(0.0, 1.0);
    Eigen::Matrix2cd m;
    m << h_I + h_z, -i * h_y,
         i * h_y,   h_I - h_z;
    return m;
}

BlochMatrix build_bloch(const ModelSpec& spec, double k) {
    const ModelSpec s = validated(spec);
    require(s.dissipation.kind != DissipationKind::positional,
            "positional dissipation is not translation invariant");
    const double g = s.dissipation.kind == DissipationKind::all_bonds ? s.gamma : 0.0;
    BlochMatrix b;
    b.k = k;
    b.h_I = -2.0 * s.t * std::sin(k) * std::sin(s.theta);
    b.h_y = 2.0 * s.delta * std::sin(k);
    b.h_z = cplx(-s.mu, -s.onsite_delta) - 2.0 * cplx(s.t * std::cos(s.theta), g) * std::cos(k);
    return b;
}

}  // namespace kitaev
