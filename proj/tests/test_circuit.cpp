#include "kitaev/circuit.hpp"
#include "kitaev/error.hpp"

#include <doctest.h>

#include <numbers>

using namespace kitaev;
using namespace kitaev::circuit;

namespace {

constexpr double pi = std::numbers::pi;
const PhysicalConstants K;
const double phi0 = K.flux_quantum();

CouplerSpec coupler(double alpha) {
    const double L = 300e-12;
    return {L, alpha * phi0 / (2.0 * pi * L), 60e-12, CouplerLabel::a};
}

}  // namespace

TEST_CASE("flux quantum") { CHECK(phi0 == doctest::Approx(2.067833848e-15).epsilon(1e-9)); }

TEST_CASE("loop current solves its self-consistency equation") {
    for (double alpha : {0.1, 0.5, 0.95}) {
        const auto c = coupler(alpha);
        CHECK(c.screening() == doctest::Approx(alpha));
        for (int i = 0; i < 25; ++i) {
            const double flux = (i / 24.0 - 0.5) * 1.7 * phi0;
            const double I = coupler_current(c, flux);
            CHECK(std::abs(I - c.I0 * std::sin(2.0 * pi * (flux - c.L * I) / phi0)) < 1e-14 * c.I0);
            const double phase = coupler_phase(c, flux);
            CHECK(phase + alpha * std::sin(phase) == doctest::Approx(2.0 * pi * flux / phi0).epsilon(1e-12));
            CHECK(coupler_current(c, flux + phi0) == doctest::Approx(I).epsilon(1e-12));
        }
    }
}

TEST_CASE("coupler mutual is M^2 times the flux derivative of the loop current") {
    const auto c = coupler(0.7);
    for (int i = 0; i < 20; ++i) {
        const double flux = (0.013 + 0.9 * i / 19.0 - 0.45) * phi0;
        const double h = 1e-5 * phi0;
        const double dI = (coupler_current(c, flux + h) - coupler_current(c, flux - h)) / (2.0 * h);
        const double M = coupler_mutual(c, flux);
        CAPTURE(flux / phi0);
        CHECK(std::abs(M - c.M * c.M * dI) < 1e-6 * std::abs(M));
    }
}

TEST_CASE("linearized modulation matches a finite difference") {
    const auto c = coupler(0.7);
    const double ac = 0.02 * phi0;
    for (double dc : {0.05, 0.15, 0.25, 0.33, 0.41}) {
        const double h = 1e-5 * phi0;
        const auto lin = linearize_mutual(c, dc * phi0, ac);
        const double slope = (coupler_mutual(c, dc * phi0 + h) - coupler_mutual(c, dc * phi0 - h)) / (2.0 * h);
        CHECK(lin.M0 == doctest::Approx(coupler_mutual(c, dc * phi0)).epsilon(1e-12));
        CHECK(std::abs(lin.dM - slope * ac) < 1e-6 * std::abs(lin.dM));
    }
}

TEST_CASE("Taylor remainder shrinks quadratically") {
    const auto c = coupler(0.7);
    const double dc = 0.2 * phi0;
    auto remainder = [&](double ac) {
        const auto lin = linearize_mutual(c, dc, ac);
        return coupler_mutual(c, dc + ac) - lin.M0 - lin.dM;
    };
    for (double r : {0.02, 0.01, 0.005}) {
        const double ratio = remainder(r * phi0) / remainder(0.5 * r * phi0);
        CAPTURE(r);
        CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
    }
    CHECK_THROWS_AS(linearize_mutual(c, dc, 0.06 * phi0), DomainError);
}

TEST_CASE("cancellation bias nulls the net static coupling") {
    const auto d = representative_circuit();
    const double dc_a = cancellation_bias(d.a, d.b, d.M_G, d.dc_b);
    CHECK(dc_a >= 0.0);
    CHECK(dc_a <= 0.5 * phi0);
    const double net = d.M_G + coupler_mutual(d.a, dc_a) + coupler_mutual(d.b, d.dc_b);
    CHECK(std::abs(net) < 1e-12 * d.M_G);
    CHECK(effective_mutual_inductance({d.a, d.b}, {dc_a, d.dc_b}) + d.M_G == doctest::Approx(net).epsilon(1e-9));
    CHECK_THROWS_AS(cancellation_bias(d.a, d.b, 1e-6, d.dc_b), DomainError);
}

TEST_CASE("qubit parameters") {
    const QubitSpec linear{80e-15, 2e-9, 0.0};
    const auto p = qubit_spectrum_params(linear);
    CHECK(p.l == doctest::Approx(2e-9));
    CHECK(p.omega == doctest::Approx(1.0 / std::sqrt(2e-9 * 80e-15)));
    CHECK(p.g == 0.0);
    CHECK(p.Omega == p.omega);

    const auto d = representative_circuit();
    for (const auto& q : {d.q1, d.q2}) {
        const auto r = qubit_spectrum_params(q);
        CHECK(r.g >= 1e-4);
        CHECK(r.g <= 1e-2);
        CHECK(r.l < q.L);
        CHECK(r.Omega < r.omega);
    }
    CHECK_THROWS_AS(qubit_spectrum_params({0.0, 1e-9, 0.0}), DomainError);
}

TEST_CASE("coupling rate is symmetric and linear in the modulation") {
    const auto d = representative_circuit();
    const double J = coupling_rate(d.q1, d.q2, 1e-13);
    CHECK(J > 0.0);
    CHECK(coupling_rate(d.q2, d.q1, 1e-13) == doctest::Approx(J));
    CHECK(coupling_rate(d.q1, d.q2, 2e-13) == doctest::Approx(2.0 * J));
    CHECK(coupling_rate(d.q1, d.q2, -1e-13) == doctest::Approx(J));
}

TEST_CASE("drive conditions") {
    const auto d = drive_conditions(1.0e10, 1.2e10, 1e-25, 0.3, 5);
    CHECK(d.a.omega == doctest::Approx(0.2e10));
    CHECK(d.b.omega == doctest::Approx(2.2e10 + 2e-25 / K.hbar));
    REQUIRE(d.a.phases.size() == 4);
    CHECK(d.a.phases == std::vector<double>{-0.3, 0.3, -0.3, 0.3});
    CHECK(d.b.phases == std::vector<double>(4, 0.0));
    CHECK_THROWS_AS(drive_conditions(2.0, 1.0, 0.0, 0.0, 4), DomainError);
}

TEST_CASE("guards on the coupler loop") {
    CHECK_THROWS_AS(coupler_current(coupler(1.2), 0.1 * phi0), DomainError);
    CHECK_THROWS_AS(coupler_current(coupler(0.5), std::nan("")), DomainError);
}

TEST_CASE("circuit to chain parameters") {
    const auto d = representative_circuit();
    const auto r = model_from_circuit(d);
    CHECK(r.warnings.empty());
    CHECK(std::abs(r.cancellation_residual) < 1e-12 * d.M_G);
    CHECK(r.model.t == doctest::Approx(K.hbar * r.J_a / 2.0));
    CHECK(r.model.delta == doctest::Approx(K.hbar * r.J_b / 2.0));
    CHECK(r.model.mu == d.mu);
    CHECK(r.model.N == d.N);
    CHECK(r.model.dissipation.kind == DissipationKind::none);
    CHECK(r.flux_ratio_a == doctest::Approx(0.02));
    // t/h in the MHz range for the documented device.
    const double t_hz = r.model.t / (2.0 * pi * K.hbar);
    CHECK(t_hz > 1e5);
    CHECK(t_hz < 1e8);

    auto fixed = d;
    fixed.dc_a = r.dc_a;
    CHECK(model_from_circuit(fixed).J_a == doctest::Approx(r.J_a));
    fixed.dc_a = 0.0;
    CHECK(!model_from_circuit(fixed).warnings.empty());
}
