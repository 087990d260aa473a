#include "kitaev/model.hpp"

#include "kitaev/error.hpp"

#include <bit>
#include <cstdint>
#include <optional>
#include <string>

namespace kitaev {

namespace {

using State = std::uint32_t;

struct Amplitude {
    State state;
    double sign;
};

ModelSpec checked_many_body(const ModelSpec& spec, int max_sites) {
    ModelSpec s = validated(spec);
    if (s.N > max_sites)
        throw DomainError("many-body size guard: N=" + std::to_string(s.N) + " exceeds " + std::to_string(max_sites));
    if (s.boundary != Boundary::open) throw DomainError("many-body builders support open chains only");
    return s;
}

bool occupied(State s, int site) { return (s >> site) & 1u; }

// Jordan-Wigner string: parity of occupied sites below `site`.
double jw_sign(State s, int site) {
    const State below = s & ((State{1} << site) - 1u);
    return (std::popcount(below) & 1) ? -1.0 : 1.0;
}

std::optional<Amplitude> annihilate(Amplitude a, int site) {
    if (!occupied(a.state, site)) return std::nullopt;
    return Amplitude{a.state ^ (State{1} << site), a.sign * jw_sign(a.state, site)};
}

std::optional<Amplitude> create(Amplitude a, int site) {
    if (occupied(a.state, site)) return std::nullopt;
    return Amplitude{a.state ^ (State{1} << site), a.sign * jw_sign(a.state, site)};
}

// Spin ladder operators carry no string.
std::optional<State> lower(State s, int site) {
    if (!occupied(s, site)) return std::nullopt;
    return s ^ (State{1} << site);
}

std::optional<State> raise(State s, int site) {
    if (occupied(s, site)) return std::nullopt;
    return s ^ (State{1} << site);
}

double onsite_sum(State s, int N) { return static_cast<double>(std::popcount(s & ((State{1} << N) - 1u))); }

}  // namespace

ManyBodyMatrix build_spin_hamiltonian(const ModelSpec& spec, UniformLoss loss) {
    const ModelSpec s = checked_many_body(spec, max_many_body_sites);
    const int N = s.N;
    const Eigen::Index dim = Eigen::Index{1} << N;
    CMatrix H = CMatrix::Zero(dim, dim);
    const auto g = bond_gammas(s);

    cplx onsite(-s.mu, -s.onsite_delta);
    if (loss == UniformLoss::include) onsite += cplx(0.0, -2.0 * s.gamma);

    for (State b = 0; b < static_cast<State>(dim); ++b) {
        H(b, b) += onsite * onsite_sum(b, N);
        for (int n = 0; n + 1 < N; ++n) {
            const int m = n + 1;
            const cplx fwd = -(s.t * std::polar(1.0, s.theta) + cplx(0.0, g[n]));
            const cplx bwd = -(s.t * std::polar(1.0, -s.theta) + cplx(0.0, g[n]));
            if (auto l = lower(b, n))
                if (auto r = raise(*l, m)) H(*r, b) += fwd;
            if (auto l = lower(b, m))
                if (auto r = raise(*l, n)) H(*r, b) += bwd;
            if (auto l = lower(b, n))
                if (auto r = lower(*l, m)) H(*r, b) += s.delta;
            if (auto l = raise(b, n))
                if (auto r = raise(*l, m)) H(*r, b) += s.delta;
        }
    }
    return {N, Representation::spin, std::move(H)};
}

ManyBodyMatrix build_fock_hamiltonian(const ModelSpec& spec) {
    const ModelSpec s = checked_many_body(spec, max_many_body_sites);
    const int N = s.N;
    const Eigen::Index dim = Eigen::Index{1} << N;
    CMatrix H = CMatrix::Zero(dim, dim);
    const auto g = bond_gammas(s);
    const cplx onsite(-s.mu, -s.onsite_delta);

    auto add = [&](std::optional<Amplitude> out, State from, cplx coeff) {
        if (out) H(out->state, from) += coeff * out->sign;
    };

    for (State b = 0; b < static_cast<State>(dim); ++b) {
        const Amplitude ket{b, 1.0};
        H(b, b) += onsite * onsite_sum(b, N);
        for (int n = 0; n + 1 < N; ++n) {
            const int m = n + 1;
            const cplx fwd = -(s.t * std::polar(1.0, s.theta) + cplx(0.0, g[n]));
            const cplx bwd = -(s.t * std::polar(1.0, -s.theta) + cplx(0.0, g[n]));
            // c_m^dag c_n and c_n^dag c_m
            if (auto a = annihilate(ket, n)) add(create(*a, m), b, fwd);
            if (auto a = annihilate(ket, m)) add(create(*a, n), b, bwd);
            // pairing ordered as c_m c_n + c_n^dag c_m^dag
            if (auto a = annihilate(ket, n)) add(annihilate(*a, m), b, s.delta);
            if (auto a = create(ket, m)) add(create(*a, n), b, s.delta);
        }
    }
    return {N, Representation::fermion, std::move(H)};
}

double jw_equivalence_residual(const ModelSpec& spec) {
    checked_many_body(spec, 8);
    const auto spin = build_spin_hamiltonian(spec, UniformLoss::omit);
    const auto fock = build_fock_hamiltonian(spec);
    return (spin.H - fock.H).cwiseAbs().maxCoeff();
}

}  // namespace kitaev
