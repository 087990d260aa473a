#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace kitaev {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Boundary { open, periodic };

// Sign carried by the wrap-around bond of a ring.
// antiperiodic: k = 2pi(j+1/2)/N, periodic: k = 2pi j/N.
enum class ParitySector { antiperiodic, periodic };

enum class DissipationKind { none, all_bonds, positional };

struct DissipationPattern {
    DissipationKind kind = DissipationKind::all_bonds;
    std::vector<int> positions;  // m values; bond m and bond N-m are dissipative

    static DissipationPattern none() { return {DissipationKind::none, {}}; }
    static DissipationPattern all_bonds() { return {DissipationKind::all_bonds, {}}; }
    static DissipationPattern positional(std::vector<int> m) { return {DissipationKind::positional, std::move(m)}; }

    bool operator==(const DissipationPattern&) const = default;
};

// Energies in units of the hopping scale unless stated otherwise.
struct ModelSpec {
    int N = 40;
    double mu = 0.0;
    double t = 1.0;
    double delta = 1.0;         // pairing
    double theta = 0.0;         // hopping phase
    double gamma = 0.0;         // dissipative bond coupling
    double onsite_delta = 0.0;  // onsite loss
    DissipationPattern dissipation;
    Boundary boundary = Boundary::open;
    ParitySector parity = ParitySector::antiperiodic;

    bool operator==(const ModelSpec&) const = default;
};

// Checks invariants, reduces theta into [0, 2pi). Throws DomainError.
ModelSpec validated(ModelSpec spec);

// Sorted 1-based bond indices n (coupling sites n, n+1) that carry gamma.
std::vector<int> dissipative_bonds(const ModelSpec& spec);

// Per-bond gamma, index 0 is bond 1. Size N-1.
std::vector<double> bond_gammas(const ModelSpec& spec);

struct BdgMatrix {
    int N = 0;
    CMatrix H;  // particle indices [0, N), hole indices [N, 2N)

    auto hopping_block() const { return H.topLeftCorner(N, N); }
    auto pairing_block() const { return H.topRightCorner(N, N); }
};

BdgMatrix build_bdg_obc(const ModelSpec& spec);
BdgMatrix build_bdg_pbc(const ModelSpec& spec);

// Discrete momenta whose Bloch bands reproduce build_bdg_pbc.
std::vector<double> ring_momenta(int N, ParitySector sector);

struct BlochMatrix {
    double k = 0.0;
    cplx h_I, h_y, h_z;

    Eigen::Matrix2cd matrix() const;
};

BlochMatrix build_bloch(const ModelSpec& spec, double k);

enum class Representation { spin, fermion };

struct ManyBodyMatrix {
    int sites = 0;
    Representation representation = Representation::spin;
    CMatrix H;  // basis index bit n-1 = occupation of site n
};

enum class UniformLoss { omit, include };

inline constexpr int max_many_body_sites = 12;

ManyBodyMatrix build_spin_hamiltonian(const ModelSpec& spec, UniformLoss loss = UniformLoss::omit);
ManyBodyMatrix build_fock_hamiltonian(const ModelSpec& spec);
double jw_equivalence_residual(const ModelSpec& spec);

}  // namespace kitaev
