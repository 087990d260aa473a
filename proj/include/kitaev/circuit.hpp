#pragma once

#include "kitaev/model.hpp"

#include <optional>
#include <string>
#include <vector>

// SI units throughout: H, F, J, Wb, A, rad/s.
namespace kitaev::circuit {

struct PhysicalConstants {
    double hbar = 1.054571817e-34;
    double e_charge = 1.602176634e-19;

    double flux_quantum() const;  // h / 2e
};

struct QubitSpec {
    double C = 0.0;
    double L = 0.0;
    double E_q = 0.0;  // Josephson energy
};

enum class CouplerLabel { a, b };

struct CouplerSpec {
    double L = 0.0;   // loop inductance
    double I0 = 0.0;  // junction critical current
    double M = 0.0;   // mutual inductance to each qubit
    CouplerLabel label = CouplerLabel::a;

    double screening(const PhysicalConstants& k = {}) const;  // 2 pi I0 L / Phi0
};

// Junction phase phi solving phi + alpha sin(phi) = 2 pi flux / Phi0.
double coupler_phase(const CouplerSpec& c, double flux, const PhysicalConstants& k = {});

// Loop current I = I0 sin(2 pi (flux - L I) / Phi0).
double coupler_current(const CouplerSpec& c, double flux, const PhysicalConstants& k = {});

// Coupler contribution M^2/L * alpha cos(phi) / (1 + alpha cos(phi)).
double coupler_mutual(const CouplerSpec& c, double flux, const PhysicalConstants& k = {});

double effective_mutual_inductance(const std::vector<CouplerSpec>& couplers, const std::vector<double>& fluxes,
                                   const PhysicalConstants& k = {});

struct LinearizedMutual {
    double M0 = 0.0;
    double dM = 0.0;
    double beta = 0.0;  // junction phase at the dc working point
};

LinearizedMutual linearize_mutual(const CouplerSpec& c, double dc, double ac, const PhysicalConstants& k = {});

// dc bias of coupler a so that M_G + M0_a(dc_a) + M0_b(dc_b) = 0, dc_a in [0, Phi0/2].
double cancellation_bias(const CouplerSpec& a, const CouplerSpec& b, double M_G, double dc_b,
                         const PhysicalConstants& k = {});

struct QubitParams {
    double omega = 0.0;  // bare frequency
    double l = 0.0;      // effective inductance
    double g = 0.0;      // anharmonic small parameter
    double Omega = 0.0;  // corrected frequency
};

QubitParams qubit_spectrum_params(const QubitSpec& q, const PhysicalConstants& k = {});

// Uses |dM|; the sign is reported separately by callers.
double coupling_rate(const QubitSpec& q1, const QubitSpec& q2, double dM, const PhysicalConstants& k = {});

struct DriveSpec {
    double dc = 0.0;
    double ac = 0.0;
    double omega = 0.0;
    std::vector<double> phases;  // per bond n = 1..N-1
};

struct DrivePair {
    DriveSpec a, b;
};

// Frequencies and phase profiles; mu in J.
DrivePair drive_conditions(double Omega1, double Omega2, double mu, double theta, int N,
                           const PhysicalConstants& k = {});

struct CircuitDescription {
    QubitSpec q1, q2;  // odd and even sites
    CouplerSpec a, b;
    double M_G = 0.0;
    double dc_b = 0.0;
    std::optional<double> dc_a;  // solved from the cancellation condition when absent
    double ac_a = 0.0;
    double ac_b = 0.0;
    double mu = 0.0;  // J
    double theta = 0.0;
    int N = 2;
};

// Documented default device: C = 80 fF, L = 2 nH, couplers 300 pH with alpha 0.7 and M = 60 pH.
CircuitDescription representative_circuit(const PhysicalConstants& k = {});

struct CircuitReport {
    ModelSpec model;  // t, delta, mu in J
    QubitParams q1, q2;
    double dc_a = 0.0;
    LinearizedMutual mutual_a, mutual_b;
    double J_a = 0.0, J_b = 0.0;
    int sign_a = 1, sign_b = 1;      // signs of dM
    double cancellation_residual = 0.0;  // M_G + M0_a + M0_b
    double flux_ratio_a = 0.0, flux_ratio_b = 0.0;  // ac / Phi0
    DrivePair drives;
    std::vector<std::string> warnings;
};

CircuitReport model_from_circuit(const CircuitDescription& d, const PhysicalConstants& k = {});

}  // namespace kitaev::circuit
