#include "kitaev/circuit.hpp"

#include "kitaev/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>

namespace kitaev::circuit {

namespace {

constexpr double pi = std::numbers::pi;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

void check_coupler(const CouplerSpec& c, const PhysicalConstants& k) {
    require_positive(c.L, "coupler inductance");
    require_positive(c.I0, "coupler critical current");
    require_positive(c.M, "coupler mutual inductance");
    if (c.screening(k) >= 1.0)
        throw DomainError("coupler screening parameter alpha = " + std::to_string(c.screening(k)) +
                          " >= 1: multivalued flux response");
}

double qubit_factor(const QubitSpec& q, double dM, const PhysicalConstants& k) {
    const QubitParams p = qubit_spectrum_params(q, k);
    const double g = p.g;
    const double num = std::abs(dM) * p.omega * p.l * std::pow(1.0 + 12.0 * g + 510.0 * g * g, 2);
    const double den = 2.0 * q.L * q.L * (1.0 + 78.0 * g * g) * (1.0 + 630.0 * g * g);
    return std::sqrt(num / den);
}

}  // namespace

double PhysicalConstants::flux_quantum() const { return pi * hbar / e_charge; }

double CouplerSpec::screening(const PhysicalConstants& k) const { return 2.0 * pi * I0 * L / k.flux_quantum(); }

double coupler_current(const CouplerSpec& c, double flux, const PhysicalConstants& k) {
    check_coupler(c, k);
    if (!std::isfinite(flux)) throw DomainError("flux must be finite");
    const double phi0 = k.flux_quantum();
    const double reduced = flux - phi0 * std::round(flux / phi0);  // response is Phi0-periodic
    auto drive = [&](double I) { return c.I0 * std::sin(2.0 * pi * (reduced - c.L * I) / phi0); };

    double I = 0.0;
    int it = 0;
    for (; it < 10000; ++it) {
        const double next = 0.5 * I + 0.5 * drive(I);
        const double step = std::abs(next - I);
        I = next;
        if (step < 1e-10 * c.I0) break;
    }
    if (it == 10000) throw NumericError("coupler current fixed point did not converge");

    const double alpha = c.screening(k);
    for (int n = 0; n < 8; ++n) {
        const double phase = 2.0 * pi * (reduced - c.L * I) / phi0;
        const double f = I - c.I0 * std::sin(phase);
        if (std::abs(f) < 1e-16 * c.I0) break;
        I -= f / (1.0 + alpha * std::cos(phase));
    }
    if (std::abs(I - drive(I)) >= 1e-14 * c.I0) throw NumericError("coupler current residual above 1e-14 I0");
    return I;
}

double coupler_phase(const CouplerSpec& c, double flux, const PhysicalConstants& k) {
    return 2.0 * pi * (flux - c.L * coupler_current(c, flux, k)) / k.flux_quantum();
}

double coupler_mutual(const CouplerSpec& c, double flux, const PhysicalConstants& k) {
    const double alpha = c.screening(k);
    const double cphi = std::cos(coupler_phase(c, flux, k));
    const double denom = 1.0 + alpha * cphi;
    if (denom <= 0.0) throw DomainError("singular coupler response (1 + alpha cos phi <= 0)");
    return c.M * c.M / c.L * alpha * cphi / denom;
}

double effective_mutual_inductance(const std::vector<CouplerSpec>& couplers, const std::vector<double>& fluxes,
                                   const PhysicalConstants& k) {
    if (couplers.size() != fluxes.size()) throw DomainError("one flux per coupler required");
    double M = 0.0;
    for (std::size_t i = 0; i < couplers.size(); ++i) M += coupler_mutual(couplers[i], fluxes[i], k);
    return M;
}

LinearizedMutual linearize_mutual(const CouplerSpec& c, double dc, double ac, const PhysicalConstants& k) {
    const double phi0 = k.flux_quantum();
    if (!(std::abs(ac) / phi0 < 0.05)) throw DomainError("ac flux amplitude must stay below 0.05 Phi0");
    const double alpha = c.screening(k);
    LinearizedMutual out;
    out.beta = coupler_phase(c, dc, k);
    const double denom = 1.0 + alpha * std::cos(out.beta);
    out.M0 = c.M * c.M / c.L * alpha * std::cos(out.beta) / denom;
    out.dM = -(c.M * c.M / c.L) * 2.0 * pi * alpha * std::sin(out.beta) / (denom * denom * denom) * (ac / phi0);
    return out;
}

double cancellation_bias(const CouplerSpec& a, const CouplerSpec& b, double M_G, double dc_b,
                         const PhysicalConstants& k) {
    const double phi0 = k.flux_quantum();
    const double fixed = M_G + coupler_mutual(b, dc_b, k);
    auto f = [&](double dc) { return fixed + coupler_mutual(a, dc, k); };

    // M0_a falls monotonically from alpha/(1+alpha) to -alpha/(1-alpha) on [0, Phi0/2].
    double lo = 0.0, hi = 0.5 * phi0;
    const double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw DomainError("no cancelling dc bias for coupler a in [0, Phi0/2]");

    boost::uintmax_t iters = 200;
    const auto [x0, x1] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                             boost::math::tools::eps_tolerance<double>(), iters);
    const double root = std::abs(f(x0)) < std::abs(f(x1)) ? x0 : x1;
    const double scale = M_G != 0.0 ? std::abs(M_G) : a.M * a.M / a.L;
    if (std::abs(f(root)) >= 1e-12 * scale) throw NumericError("cancellation residual above 1e-12 |M_G|");
    return root;
}

QubitParams qubit_spectrum_params(const QubitSpec& q, const PhysicalConstants& k) {
    require_positive(q.C, "qubit capacitance");
    require_positive(q.L, "qubit inductance");
    if (!(q.E_q >= 0.0) || !std::isfinite(q.E_q)) throw DomainError("Josephson energy must be >= 0");
    const double phi0 = k.flux_quantum();
    QubitParams p;
    p.l = phi0 * phi0 * q.L / (phi0 * phi0 + 4.0 * pi * pi * q.E_q * q.L);
    p.omega = 1.0 / std::sqrt(p.l * q.C);
    const double e2 = k.e_charge * k.e_charge;
    p.g = e2 * e2 * p.l * q.E_q / (12.0 * std::pow(k.hbar, 3) * p.omega * q.C);
    p.Omega = p.omega * (1.0 - 24.0 * p.g);
    return p;
}

double coupling_rate(const QubitSpec& q1, const QubitSpec& q2, double dM, const PhysicalConstants& k) {
    return qubit_factor(q1, dM, k) * qubit_factor(q2, dM, k);
}

DrivePair drive_conditions(double Omega1, double Omega2, double mu, double theta, int N,
                           const PhysicalConstants& k) {
    if (Omega2 < Omega1) throw DomainError("drive convention needs Omega2 >= Omega1");
    if (N < 2) throw DomainError("drive profile needs N >= 2");
    DrivePair d;
    d.a.omega = Omega2 - Omega1;
    d.b.omega = Omega1 + Omega2 + 2.0 * mu / k.hbar;
    if (d.b.omega < 0.0) throw DomainError("negative drive frequency for coupler b");
    for (int n = 1; n < N; ++n) {
        d.a.phases.push_back(n % 2 == 0 ? theta : -theta);
        d.b.phases.push_back(0.0);
    }
    return d;
}

CircuitDescription representative_circuit(const PhysicalConstants& k) {
    const double h = 2.0 * pi * k.hbar;
    const double phi0 = k.flux_quantum();
    CircuitDescription d;
    d.q1 = {80e-15, 2e-9, h * 50e9};
    d.q2 = {80e-15, 2e-9, h * 55e9};
    const double Lc = 300e-12;
    const double I0 = 0.7 * phi0 / (2.0 * pi * Lc);
    d.a = {Lc, I0, 60e-12, CouplerLabel::a};
    d.b = {Lc, I0, 60e-12, CouplerLabel::b};
    d.M_G = 2e-12;
    d.dc_b = 0.25 * phi0;
    d.ac_a = 0.02 * phi0;
    d.ac_b = 0.02 * phi0;
    d.mu = h * 10e6;
    d.theta = 0.0;
    d.N = 4;
    return d;
}

CircuitReport model_from_circuit(const CircuitDescription& d, const PhysicalConstants& k) {
    CircuitReport r;
    r.q1 = qubit_spectrum_params(d.q1, k);
    r.q2 = qubit_spectrum_params(d.q2, k);
    r.dc_a = d.dc_a ? *d.dc_a : cancellation_bias(d.a, d.b, d.M_G, d.dc_b, k);
    r.mutual_a = linearize_mutual(d.a, r.dc_a, d.ac_a, k);
    r.mutual_b = linearize_mutual(d.b, d.dc_b, d.ac_b, k);
    r.cancellation_residual = d.M_G + r.mutual_a.M0 + r.mutual_b.M0;
    r.J_a = coupling_rate(d.q1, d.q2, r.mutual_a.dM, k);
    r.J_b = coupling_rate(d.q1, d.q2, r.mutual_b.dM, k);
    r.sign_a = r.mutual_a.dM < 0.0 ? -1 : 1;
    r.sign_b = r.mutual_b.dM < 0.0 ? -1 : 1;
    r.flux_ratio_a = std::abs(d.ac_a) / k.flux_quantum();
    r.flux_ratio_b = std::abs(d.ac_b) / k.flux_quantum();
    r.drives = drive_conditions(r.q1.Omega, r.q2.Omega, d.mu, d.theta, d.N, k);
    r.drives.a.dc = r.dc_a;
    r.drives.a.ac = d.ac_a;
    r.drives.b.dc = d.dc_b;
    r.drives.b.ac = d.ac_b;

    ModelSpec m;
    m.N = d.N;
    m.t = k.hbar * r.J_a / 2.0;
    m.delta = k.hbar * r.J_b / 2.0;
    m.mu = d.mu;
    m.theta = d.theta;
    m.dissipation = DissipationPattern::none();
    r.model = validated(m);

    for (double g : {r.q1.g, r.q2.g})
        if (g > 1e-2) r.warnings.push_back("anharmonic parameter g = " + std::to_string(g) + " is not small");
    if (std::abs(r.cancellation_residual) > 1e-12 * std::max(std::abs(d.M_G), d.a.M * d.a.M / d.a.L))
        r.warnings.push_back("geometric mutual inductance is not cancelled by the dc biases");
    return r;
}

}  // namespace kitaev::circuit
