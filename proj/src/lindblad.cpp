#include "kitaev/lindblad.hpp"

#include "kitaev/error.hpp"

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <string>

namespace kitaev::lindblad {

namespace {

using Kron = Eigen::KroneckerProduct<CMatrix, CMatrix>;

ModelSpec checked(const ModelSpec& spec, int limit) {
    ModelSpec s = validated(spec);
    if (s.N > limit)
        throw DomainError("size guard: N=" + std::to_string(s.N) + " exceeds " + std::to_string(limit));
    if (s.onsite_delta != 0.0)
        throw DomainError("independent onsite baths are not modelled; onsite_delta must be 0");
    return s;
}

CMatrix lowering(int site, int sites) {
    const Eigen::Index dim = Eigen::Index{1} << sites;
    CMatrix op = CMatrix::Zero(dim, dim);
    for (Eigen::Index b = 0; b < dim; ++b)
        if ((b >> site) & 1) op(b ^ (Eigen::Index{1} << site), b) = 1.0;
    return op;
}

}  // namespace

CMatrix hermitian_hamiltonian(const ModelSpec& spec) {
    ModelSpec s = validated(spec);
    s.gamma = 0.0;
    s.onsite_delta = 0.0;
    return build_spin_hamiltonian(s, UniformLoss::omit).H;
}

Liouvillian build_liouvillian(const CMatrix& H, std::vector<JumpOperator> jumps) {
    const Eigen::Index dim = H.rows();
    if (H.cols() != dim || dim == 0) throw DomainError("Hamiltonian must be square and non-empty");
    int sites = 0;
    while ((Eigen::Index{1} << sites) < dim) ++sites;
    if ((Eigen::Index{1} << sites) != dim || sites > max_sites)
        throw DomainError("Liouvillian needs dimension 2^N with N <= " + std::to_string(max_sites));

    const CMatrix I = CMatrix::Identity(dim, dim);
    const cplx i(0.0, 1.0);
    CMatrix G = -i * (CMatrix(Kron(I, H)) - CMatrix(Kron(H.transpose(), I)));
    for (const auto& j : jumps) {
        if (j.op.rows() != dim || j.op.cols() != dim) throw DomainError("jump operator dimension mismatch");
        if (!(j.rate >= 0.0)) throw DomainError("jump rates must be non-negative");
        const CMatrix LdL = j.op.adjoint() * j.op;
        G += j.rate * (CMatrix(Kron(j.op.conjugate(), j.op)) - 0.5 * CMatrix(Kron(I, LdL)) -
                       0.5 * CMatrix(Kron(LdL.transpose(), I)));
    }
    return {sites, H, std::move(jumps), std::move(G)};
}

Liouvillian build_liouvillian(const ModelSpec& spec) {
    const ModelSpec s = checked(spec, max_sites);
    std::vector<JumpOperator> jumps;
    if (s.gamma > 0.0)
        for (int n : dissipative_bonds(s))
            jumps.push_back({lowering(n - 1, s.N) + lowering(n, s.N), 2.0 * s.gamma});
    return build_liouvillian(hermitian_hamiltonian(s), std::move(jumps));
}

double trace_defect(const Liouvillian& L) {
    const Eigen::Index dim = L.hamiltonian.rows();
    const CVector id = vectorize(CMatrix::Identity(dim, dim));
    return (id.adjoint() * L.generator).cwiseAbs().maxCoeff();
}

CVector vectorize(const CMatrix& rho) { return Eigen::Map<const CVector>(rho.data(), rho.size()); }

CMatrix unvectorize(const CVector& v, Eigen::Index dim) { return Eigen::Map<const CMatrix>(v.data(), dim, dim); }

std::vector<double> site_populations(const CMatrix& rho, int sites) {
    std::vector<double> pop(static_cast<std::size_t>(sites), 0.0);
    for (Eigen::Index b = 0; b < rho.rows(); ++b)
        for (int k = 0; k < sites; ++k)
            if ((b >> k) & 1) pop[static_cast<std::size_t>(k)] += rho(b, b).real();
    return pop;
}

std::vector<Snapshot> evolve(const Liouvillian& L, const CMatrix& rho0, std::span<const double> times,
                             const EvolveOptions& opts) {
    namespace ode = boost::numeric::odeint;
    const Eigen::Index dim = L.hamiltonian.rows();
    if (rho0.rows() != dim || rho0.cols() != dim) throw DomainError("initial state dimension mismatch");
    if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw DomainError("initial state is not Hermitian");
    if (std::abs(rho0.trace() - 1.0) > 1e-8) throw DomainError("initial state trace is not 1");
    if (Eigen::SelfAdjointEigenSolver<CMatrix>(rho0, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -1e-8)
        throw DomainError("initial state is not positive");
    if (times.empty()) return {};
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!std::isfinite(times[i]) || (i > 0 && !(times[i] > times[i - 1])))
            throw DomainError("time grid must be finite and strictly increasing");

    using State = std::vector<cplx>;
    const CVector v0 = vectorize(rho0);
    State x(v0.data(), v0.data() + v0.size());
    const auto& G = L.generator;
    auto rhs = [&G](const State& in, State& out, double) {
        out.resize(in.size());
        Eigen::Map<CVector>(out.data(), static_cast<Eigen::Index>(out.size())) =
            G * Eigen::Map<const CVector>(in.data(), static_cast<Eigen::Index>(in.size()));
    };

    std::vector<Snapshot> out;
    out.reserve(times.size());
    auto observe = [&](const State& s, double t) {
        Snapshot snap;
        snap.time = t;
        snap.rho = unvectorize(Eigen::Map<const CVector>(s.data(), static_cast<Eigen::Index>(s.size())), dim);
        snap.trace = snap.rho.trace().real();
        snap.populations = site_populations(snap.rho, L.sites);
        out.push_back(std::move(snap));
    };

    if (times.size() == 1) {
        observe(x, times[0]);
        return out;
    }
    const double span = times.back() - times.front();
    try {
        auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<State>());
        ode::integrate_times(stepper, rhs, x, times.begin(), times.end(), span * 1e-3, observe,
                             ode::max_step_checker(1'000'000));
    } catch (const std::exception& e) {
        throw NumericError(std::string("Lindblad integration failed: ") + e.what());
    }
    return out;
}

ManyBodyMatrix conditional_hamiltonian(const ModelSpec& spec) {
    const ModelSpec s = checked(spec, max_many_body_sites);
    ManyBodyMatrix m{s.N, Representation::spin, hermitian_hamiltonian(s)};
    if (s.gamma == 0.0) return m;
    const cplx loss(0.0, -s.gamma);
    const Eigen::Index dim = m.H.rows();
    for (int n : dissipative_bonds(s)) {
        const int a = n - 1, b = n;
        for (Eigen::Index st = 0; st < dim; ++st) {
            const bool ua = (st >> a) & 1, ub = (st >> b) & 1;
            // L^dag L = n_a + n_b + sigma_a^dag sigma_b^- + sigma_b^dag sigma_a^-
            m.H(st, st) += loss * double(int(ua) + int(ub));
            if (ub && !ua) m.H(st ^ (Eigen::Index{1} << a) ^ (Eigen::Index{1} << b), st) += loss;
            if (ua && !ub) m.H(st ^ (Eigen::Index{1} << a) ^ (Eigen::Index{1} << b), st) += loss;
        }
    }
    return m;
}

EffectiveModelReport effective_model_residual(const ModelSpec& spec) {
    const ModelSpec s = checked(spec, 6);
    if (s.N < 2) throw DomainError("effective model check needs N >= 2");
    CMatrix cond = conditional_hamiltonian(s).H;
    for (Eigen::Index i = 0; i < cond.rows(); ++i) cond(i, i) = cond(i, i).real();
    const CMatrix spin = build_spin_hamiltonian(s, UniformLoss::omit).H;

    EffectiveModelReport r;
    r.many_body = (cond - spin).cwiseAbs().maxCoeff();

    const CMatrix hopping = build_bdg_obc(s).hopping_block();
    auto project = [&](const CMatrix& H) {
        CMatrix p(s.N, s.N);
        for (int i = 0; i < s.N; ++i)
            for (int j = 0; j < s.N; ++j) p(i, j) = H(Eigen::Index{1} << i, Eigen::Index{1} << j);
        return p;
    };
    r.single_excitation = std::max((project(cond) - hopping).cwiseAbs().maxCoeff(),
                                   (project(spin) - hopping).cwiseAbs().maxCoeff());
    return r;
}

}  // namespace kitaev::lindblad
