#pragma once

#include "kitaev/model.hpp"

#include <span>
#include <vector>

// hbar = 1: energies in units of t, time in 1/t.
namespace kitaev::lindblad {

inline constexpr int max_sites = 5;

struct JumpOperator {
    CMatrix op;
    double rate = 0.0;
};

// Column-stacked vec(rho): vec(A X B) = (B^T kron A) vec(X).
struct Liouvillian {
    int sites = 0;
    CMatrix hamiltonian;
    std::vector<JumpOperator> jumps;
    CMatrix generator;
};

Liouvillian build_liouvillian(const CMatrix& hamiltonian, std::vector<JumpOperator> jumps);

// Hermitian chain Hamiltonian plus jumps sigma_n^- + sigma_{n+1}^- at rate 2 gamma on each dissipative bond.
Liouvillian build_liouvillian(const ModelSpec& spec);

// Hermitian part of the rotating-frame spin Hamiltonian (mu, t e^{i theta}, delta terms).
CMatrix hermitian_hamiltonian(const ModelSpec& spec);

// max |vec(I)^dag L|: the generator's effect on the trace.
double trace_defect(const Liouvillian& L);

CVector vectorize(const CMatrix& rho);
CMatrix unvectorize(const CVector& v, Eigen::Index dim);

struct Snapshot {
    double time = 0.0;
    CMatrix rho;
    double trace = 0.0;                // real part of tr rho
    std::vector<double> populations;   // <n_k> per site
};

struct EvolveOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
};

std::vector<Snapshot> evolve(const Liouvillian& L, const CMatrix& rho0, std::span<const double> times,
                             const EvolveOptions& opts = {});

std::vector<double> site_populations(const CMatrix& rho, int sites);

// H_rot - i gamma sum_n L_n^dag L_n over dissipative bonds.
ManyBodyMatrix conditional_hamiltonian(const ModelSpec& spec);

struct EffectiveModelReport {
    double many_body = 0.0;           // conditional minus onsite loss vs spin Hamiltonian
    double single_excitation = 0.0;   // both projections vs the hopping block
};

EffectiveModelReport effective_model_residual(const ModelSpec& spec);

}  // namespace kitaev::lindblad
