#include "kitaev/io.hpp"

#include "kitaev/error.hpp"
#include "kitaev/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>
#include <string_view>
#include <system_error>
#include <utility>

#ifndef KITAEV_LAB_VERSION
#define KITAEV_LAB_VERSION "0.0.0"
#endif

namespace kitaev::io {

using json = nlohmann::json;

namespace {

constexpr std::pair<Task, std::string_view> task_names[] = {
    {Task::spectrum, "spectrum"},       {Task::sweep, "sweep"},
    {Task::gap, "gap"},                 {Task::phase_diagram, "phase-diagram"},
    {Task::gbz, "gbz"},                 {Task::populations, "populations"},
    {Task::lindblad_check, "lindblad-check"}, {Task::circuit_map, "circuit-map"},
};

std::string escape_pointer_token(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// A view into the config document that knows its own JSON pointer.
class Node {
public:
    Node(const json* value, std::string pointer) : value_(value), pointer_(std::move(pointer)) {}

    const std::string& pointer() const { return pointer_; }
    bool present() const { return value_ != nullptr; }

    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError((pointer_.empty() ? std::string("/") : pointer_) + ": " + message);
    }

    void expect_object(std::initializer_list<std::string_view> allowed) const {
        if (!value_) return;
        if (!value_->is_object()) fail("expected an object");
        for (const auto& [key, _] : value_->items()) {
            bool ok = false;
            for (auto a : allowed) ok = ok || key == a;
            if (!ok) child(key).fail("unknown key");
        }
    }

    Node child(std::string_view key) const {
        const std::string ptr = pointer_ + "/" + escape_pointer_token(key);
        if (!value_ || !value_->is_object()) return {nullptr, ptr};
        const auto it = value_->find(std::string(key));
        return {it == value_->end() ? nullptr : &*it, ptr};
    }

    double number(double fallback) const {
        if (!value_) return fallback;
        if (!value_->is_number()) fail("expected a number");
        const double v = value_->get<double>();
        if (!std::isfinite(v)) fail("must be finite");
        return v;
    }

    int integer(int fallback) const {
        if (!value_) return fallback;
        if (!value_->is_number_integer()) fail("expected an integer");
        const auto v = value_->get<long long>();
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail("out of range");
        return static_cast<int>(v);
    }

    bool boolean(bool fallback) const {
        if (!value_) return fallback;
        if (!value_->is_boolean()) fail("expected true or false");
        return value_->get<bool>();
    }

    std::string string(std::string fallback) const {
        if (!value_) return fallback;
        if (!value_->is_string()) fail("expected a string");
        return value_->get<std::string>();
    }

    std::vector<double> numbers() const {
        if (!value_->is_array()) fail("expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < value_->size(); ++i)
            out.push_back(Node(&(*value_)[i], pointer_ + "/" + std::to_string(i)).number(0.0));
        return out;
    }

    std::vector<int> integers() const {
        if (!value_->is_array()) fail("expected an array of integers");
        std::vector<int> out;
        for (std::size_t i = 0; i < value_->size(); ++i)
            out.push_back(Node(&(*value_)[i], pointer_ + "/" + std::to_string(i)).integer(0));
        return out;
    }

    bool is_null() const { return value_ && value_->is_null(); }

private:
    const json* value_;
    std::string pointer_;
};

template <class Parse>
auto parse_name(const Node& node, const std::string& fallback, Parse parse) {
    const std::string name = node.string(fallback);
    try {
        return parse(name);
    } catch (const Error& e) {
        node.fail(e.what());
    }
}

// "values": [...] or "range": {"start", "stop", "count"}; exactly one.
std::vector<double> parse_values(const Node& parent, const std::vector<double>& fallback) {
    const Node values = parent.child("values");
    const Node range = parent.child("range");
    if (values.present() && range.present()) range.fail("give either values or range, not both");
    if (values.present()) {
        auto v = values.numbers();
        if (v.empty()) values.fail("must not be empty");
        return v;
    }
    if (!range.present()) return fallback;
    range.expect_object({"start", "stop", "count"});
    const double start = range.child("start").number(0.0);
    const double stop = range.child("stop").number(start);
    const int count = range.child("count").integer(1);
    if (count < 1) range.child("count").fail("must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] = count == 1 ? start : start + (stop - start) * i / (count - 1);
    if (count > 1) v.back() = stop;
    return v;
}

DissipationKind parse_dissipation_kind(const std::string& s) {
    if (s == "none") return DissipationKind::none;
    if (s == "all_bonds") return DissipationKind::all_bonds;
    if (s == "positional") return DissipationKind::positional;
    throw ConfigError("unknown dissipation kind '" + s + "' (none, all_bonds, positional)");
}

std::string to_string(DissipationKind k) {
    switch (k) {
    case DissipationKind::none: return "none";
    case DissipationKind::all_bonds: return "all_bonds";
    case DissipationKind::positional: return "positional";
    }
    return "?";
}

ModelSpec parse_model(const Node& node) {
    node.expect_object({"N", "mu", "t", "delta", "theta", "gamma", "onsite_delta", "dissipation", "boundary", "parity"});
    ModelSpec m;
    m.N = node.child("N").integer(40);
    if (m.N < 1) node.child("N").fail("must be >= 1");
    m.mu = node.child("mu").number(0.0);
    m.t = node.child("t").number(1.0);
    if (m.t < 0.0) node.child("t").fail("must be >= 0");
    m.delta = node.child("delta").number(m.t);
    m.theta = node.child("theta").number(0.0);
    m.gamma = node.child("gamma").number(0.0);
    if (m.gamma < 0.0) node.child("gamma").fail("must be >= 0");
    m.onsite_delta = node.child("onsite_delta").number(0.0);
    if (m.onsite_delta < 0.0) node.child("onsite_delta").fail("must be >= 0");

    const Node diss = node.child("dissipation");
    diss.expect_object({"kind", "positions"});
    m.dissipation.kind = parse_name(diss.child("kind"), "all_bonds", parse_dissipation_kind);
    const Node pos = diss.child("positions");
    if (pos.present()) m.dissipation.positions = pos.integers();
    if (m.dissipation.kind == DissipationKind::positional) {
        if (m.dissipation.positions.empty()) pos.fail("positional dissipation needs at least one position");
        for (std::size_t i = 0; i < m.dissipation.positions.size(); ++i) {
            const int p = m.dissipation.positions[i];
            if (p < 1 || p > m.N - 1) pos.child(std::to_string(i)).fail("bond position must lie in [1, N-1]");
        }
    } else if (!m.dissipation.positions.empty()) {
        pos.fail("positions only apply to positional dissipation");
    }

    m.boundary = parse_name(node.child("boundary"), "open", [](const std::string& s) {
        if (s == "open") return Boundary::open;
        if (s == "periodic") return Boundary::periodic;
        throw ConfigError("unknown boundary '" + s + "' (open, periodic)");
    });
    m.parity = parse_name(node.child("parity"), "antiperiodic", [](const std::string& s) {
        if (s == "antiperiodic") return ParitySector::antiperiodic;
        if (s == "periodic") return ParitySector::periodic;
        throw ConfigError("unknown parity sector '" + s + "' (antiperiodic, periodic)");
    });
    try {
        return validated(m);
    } catch (const Error& e) {
        node.fail(e.what());
    }
}

circuit::QubitSpec parse_qubit(const Node& node, const circuit::QubitSpec& d) {
    node.expect_object({"C", "L", "E_q"});
    return {node.child("C").number(d.C), node.child("L").number(d.L), node.child("E_q").number(d.E_q)};
}

circuit::CouplerSpec parse_coupler(const Node& node, const circuit::CouplerSpec& d) {
    node.expect_object({"L", "I0", "M"});
    return {node.child("L").number(d.L), node.child("I0").number(d.I0), node.child("M").number(d.M), d.label};
}

circuit::CircuitDescription parse_circuit(const Node& node) {
    node.expect_object({"q1", "q2", "a", "b", "M_G", "dc_a", "dc_b", "ac_a", "ac_b", "mu", "theta", "N"});
    const auto d = circuit::representative_circuit();
    circuit::CircuitDescription c = d;
    c.q1 = parse_qubit(node.child("q1"), d.q1);
    c.q2 = parse_qubit(node.child("q2"), d.q2);
    c.a = parse_coupler(node.child("a"), d.a);
    c.b = parse_coupler(node.child("b"), d.b);
    c.M_G = node.child("M_G").number(d.M_G);
    c.dc_b = node.child("dc_b").number(d.dc_b);
    const Node dc_a = node.child("dc_a");
    if (dc_a.present() && !dc_a.is_null()) c.dc_a = dc_a.number(0.0);
    c.ac_a = node.child("ac_a").number(d.ac_a);
    c.ac_b = node.child("ac_b").number(d.ac_b);
    c.mu = node.child("mu").number(d.mu);
    c.theta = node.child("theta").number(d.theta);
    c.N = node.child("N").integer(d.N);
    if (c.N < 2) node.child("N").fail("must be >= 2");
    return c;
}

GridAxis parse_axis(const Node& node, const GridAxis& fallback) {
    node.expect_object({"parameter", "values", "range"});
    GridAxis a;
    a.parameter = parse_name(node.child("parameter"), to_string(fallback.parameter), parse_parameter);
    a.values = parse_values(node, fallback.values);
    return a;
}

json qubit_json(const circuit::QubitSpec& q) { return {{"C", q.C}, {"L", q.L}, {"E_q", q.E_q}}; }
json coupler_json(const circuit::CouplerSpec& c) { return {{"L", c.L}, {"I0", c.I0}, {"M", c.M}}; }
json axis_json(const GridAxis& a) { return {{"parameter", to_string(a.parameter)}, {"values", a.values}}; }

std::string selector_name(ModeSelector s) {
    switch (s) {
    case ModeSelector::index: return "index";
    case ModeSelector::smallest_abs: return "smallest_abs";
    case ModeSelector::lowest_upper_bulk: return "lowest_upper_bulk";
    }
    return "?";
}

std::string initial_name(InitialState s) {
    switch (s) {
    case InitialState::all_excited: return "all_excited";
    case InitialState::singlet: return "singlet";
    case InitialState::single_excitation: return "single_excitation";
    }
    return "?";
}

template <class T, std::size_t K>
T lookup(const std::string& s, const std::pair<T, std::string_view> (&names)[K], const char* what) {
    for (const auto& [v, n] : names)
        if (n == s) return v;
    std::string list;
    for (const auto& [v, n] : names) list += (list.empty() ? "" : ", ") + std::string(n);
    throw ConfigError(std::string("unknown ") + what + " '" + s + "' (" + list + ")");
}

constexpr std::pair<ModeSelector, std::string_view> selector_names[] = {
    {ModeSelector::index, "index"},
    {ModeSelector::smallest_abs, "smallest_abs"},
    {ModeSelector::lowest_upper_bulk, "lowest_upper_bulk"},
};

constexpr std::pair<InitialState, std::string_view> initial_names[] = {
    {InitialState::all_excited, "all_excited"},
    {InitialState::singlet, "singlet"},
    {InitialState::single_excitation, "single_excitation"},
};

// CSV building.

class Table {
public:
    explicit Table(std::string_view header) { out_ << header << '\n'; }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const char* v) { return v; }
    static std::string cell(const std::string& v) { return v; }

    std::ostringstream out_;
};

struct Output {
    std::string name;
    std::string contents;
};

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

SpectrumResult model_spectrum(const ModelSpec& m, Precision p) {
    const BdgMatrix H = m.boundary == Boundary::open ? build_bdg_obc(m) : build_bdg_pbc(m);
    return eigendecompose(H.H, p);
}

std::vector<Output> run_spectrum(const RunConfig& c, json& summary) {
    const SpectrumResult r = model_spectrum(c.model, c.precision);
    const auto modes = mode_diagnostics(r, c.model.N, c.edge, c.model.t);
    std::size_t edges = 0;
    for (const auto& m : modes) edges += m.edge_flag;
    summary["modes"] = r.size();
    summary["edge_modes"] = edges;
    summary["max_residual"] = r.residuals.size() ? r.residuals.maxCoeff() : 0.0;
    return {{"spectrum.csv", spectrum_table(r, modes)}};
}

std::vector<Output> run_sweep(const RunConfig& c, json& summary, const Diagnostics& diag) {
    SweepOptions opts;
    opts.workers = resolved_workers(c);
    opts.edge = c.edge;
    opts.precision = c.precision;
    const auto rows = spectral_sweep(c.model, c.sweep.axis, c.sweep.values, opts);
    std::size_t failed = 0;
    for (const auto& row : rows) {
        if (!row.failed) continue;
        ++failed;
        if (diag) diag("warning: sweep row " + to_string(c.sweep.axis) + "=" + format_double(row.value) + " failed: " + row.error);
    }
    summary["rows"] = rows.size();
    summary["failed_rows"] = failed;
    try {
        summary["splitting_extrema"] = splitting_oscillation_metric(rows);
    } catch (const DomainError&) {
        summary["splitting_extrema"] = nullptr;  // too few usable rows
    }
    return {{"sweep.csv", sweep_table(rows)}};
}

std::vector<Output> run_gap(const RunConfig& c, json& summary) {
    summary["pbc_gap"] = pbc_gap(c.model);
    try {
        const PhaseBoundary b = critical_mu(c.model);
        summary["critical_mu"] = {{"family", to_string(b.family)}, {"value", b.critical_mu}, {"formula", b.formula}};
    } catch (const DomainError& e) {
        summary["critical_mu"] = {{"unavailable", e.what()}};
    }
    if (!(c.gap.mu_max > c.gap.mu_min)) throw ConfigError("/gap: mu_max must exceed mu_min");
    const CriticalSearch s = numeric_critical_mu(c.model, c.gap.mu_min, c.gap.mu_max);
    summary["numeric"] = {{"found", s.found}, {"mu", s.mu}, {"min_gap", s.min_gap},
                          {"window", {c.gap.mu_min, c.gap.mu_max}}};
    return {};
}

std::vector<Output> run_phase_diagram(const RunConfig& c, json& summary) {
    const PhaseDiagram pd = phase_diagram(c.model, c.phase_diagram.x, c.phase_diagram.y, resolved_workers(c));
    Table boundary("x,y");
    for (const auto& p : pd.boundary) boundary.row(p[0], p[1]);
    std::size_t nontrivial = 0;
    for (bool b : pd.nontrivial) nontrivial += b;
    summary["cells"] = pd.gap.size();
    summary["nontrivial_cells"] = nontrivial;
    summary["boundary_points"] = pd.boundary.size();
    return {{"phase_diagram.csv", phase_diagram_table(pd)}, {"phase_boundary.csv", boundary.str()}};
}

std::vector<Output> run_gbz(const RunConfig& c, json& summary) {
    GbzOptions opts;
    opts.sample_sites = c.gbz.sample_sites;
    opts.tolerance = c.gbz.tolerance;
    opts.project = c.gbz.project;
    opts.workers = resolved_workers(c);
    const GbzCurve curve = gbz_trace(c.model, opts);
    double max_dev = 0.0;
    for (const auto* loop : {&curve.particle_loop, &curve.hole_loop})
        for (const auto& p : *loop) max_dev = std::max(max_dev, std::abs(std::abs(p.beta) - 1.0));
    summary["samples"] = curve.samples;
    summary["accepted"] = curve.accepted();
    summary["skipped"] = curve.skipped;
    summary["max_unit_circle_deviation"] = max_dev;
    return {{"gbz.csv", gbz_table(curve)}};
}

std::vector<Output> run_populations(const RunConfig& c, json& summary) {
    const SpectrumResult r = model_spectrum(c.model, c.precision);
    PopulationDistribution p;
    cplx energy;
    switch (c.populations.selector) {
    case ModeSelector::index: {
        if (c.populations.index < 0 || c.populations.index >= r.size())
            throw ConfigError("/populations/index: must lie in [0, 2N)");
        p = population_distribution(r, c.populations.index, c.model.N);
        energy = r.eigenvalues(c.populations.index);
        break;
    }
    case ModeSelector::smallest_abs: {
        const auto modes = mode_diagnostics(r, c.model.N, c.edge, c.model.t);
        const Eigen::Index i = smallest_edge_mode(modes);
        p = population_distribution(r, i, c.model.N);
        energy = r.eigenvalues(i);
        break;
    }
    case ModeSelector::lowest_upper_bulk: {
        const BulkState b = lowest_upper_band_state(r, c.model.N, c.edge, c.model.t);
        p = population_distribution(b.vector, c.model.N);
        energy = b.energy;
        summary["cluster_size"] = b.cluster.size();
        break;
    }
    }
    summary["selector"] = selector_name(c.populations.selector);
    summary["energy"] = complex_json(energy);
    return {{"populations.csv", populations_table(p)}};
}

CMatrix initial_density(const LindbladConfig& lc, int N) {
    const Eigen::Index dim = Eigen::Index{1} << N;
    CVector psi = CVector::Zero(dim);
    switch (lc.initial) {
    case InitialState::all_excited: psi(dim - 1) = 1.0; break;
    case InitialState::singlet:
        if (N != 2) throw ConfigError("/lindblad/initial: singlet needs N = 2");
        psi(1) = std::sqrt(0.5);
        psi(2) = -std::sqrt(0.5);
        break;
    case InitialState::single_excitation:
        if (lc.site < 1 || lc.site > N) throw ConfigError("/lindblad/site: must lie in [1, N]");
        psi(Eigen::Index{1} << (lc.site - 1)) = 1.0;
        break;
    }
    return psi * psi.adjoint();
}

std::vector<Output> run_lindblad(const RunConfig& c, json& summary) {
    const auto& lc = c.lindblad;
    const lindblad::Liouvillian L = lindblad::build_liouvillian(c.model);
    const CMatrix rho0 = initial_density(lc, c.model.N);
    std::vector<double> times(static_cast<std::size_t>(lc.steps));
    for (int i = 0; i < lc.steps; ++i) times[static_cast<std::size_t>(i)] = lc.t_end * i / (lc.steps - 1);
    times.back() = lc.t_end;
    const auto snaps = lindblad::evolve(L, rho0, times, lc.tolerances);

    double drift = 0.0, min_eig = 0.0, hermiticity = 0.0;
    for (const auto& s : snaps) {
        drift = std::max(drift, std::abs(s.rho.trace() - 1.0));
        hermiticity = std::max(hermiticity, (s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff());
        const CMatrix herm = 0.5 * (s.rho + s.rho.adjoint());
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<CMatrix>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff());
    }
    summary["trace_defect"] = lindblad::trace_defect(L);
    summary["max_trace_drift"] = drift;
    summary["max_hermiticity_defect"] = hermiticity;
    summary["min_density_eigenvalue"] = min_eig;
    summary["max_stationarity_defect"] = [&] {
        double d = 0.0;
        for (const auto& s : snaps) d = std::max(d, (s.rho - rho0).cwiseAbs().maxCoeff());
        return d;
    }();

    // Direct exponential of the generator at the final time for small chains.
    if (c.model.N <= 3) {
        const CMatrix E = (L.generator * lc.t_end).exp();
        const CVector ref = E * lindblad::vectorize(rho0);
        summary["exponential_oracle_difference"] =
            (lindblad::vectorize(snaps.back().rho) - ref).cwiseAbs().maxCoeff();
    }
    if (c.model.N >= 2 && c.model.N <= 6) {
        const auto eff = lindblad::effective_model_residual(c.model);
        summary["effective_model"] = {{"many_body", eff.many_body}, {"single_excitation", eff.single_excitation}};
    }
    return {{"trajectory.csv", trajectory_table(snaps)}};
}

std::vector<Output> run_circuit(const RunConfig& c, json& summary) {
    const circuit::PhysicalConstants k;
    const auto r = circuit::model_from_circuit(c.circuit, k);
    Table t("quantity,value,unit");
    auto qubit = [&](const char* name, const circuit::QubitParams& q) {
        const std::string p(name);
        t.row(p + "_omega", q.omega, "rad/s");
        t.row(p + "_Omega", q.Omega, "rad/s");
        t.row(p + "_l", q.l, "H");
        t.row(p + "_g", q.g, "1");
    };
    qubit("q1", r.q1);
    qubit("q2", r.q2);
    t.row("dc_a", r.dc_a, "Wb");
    t.row("dc_b", c.circuit.dc_b, "Wb");
    t.row("M0_a", r.mutual_a.M0, "H");
    t.row("M0_b", r.mutual_b.M0, "H");
    t.row("dM_a", r.mutual_a.dM, "H");
    t.row("dM_b", r.mutual_b.dM, "H");
    t.row("cancellation_residual", r.cancellation_residual, "H");
    t.row("J_a", r.J_a, "rad/s");
    t.row("J_b", r.J_b, "rad/s");
    t.row("sign_a", r.sign_a, "1");
    t.row("sign_b", r.sign_b, "1");
    t.row("flux_ratio_a", r.flux_ratio_a, "1");
    t.row("flux_ratio_b", r.flux_ratio_b, "1");
    t.row("drive_a_omega", r.drives.a.omega, "rad/s");
    t.row("drive_b_omega", r.drives.b.omega, "rad/s");
    t.row("t", r.model.t, "J");
    t.row("delta", r.model.delta, "J");
    t.row("mu", r.model.mu, "J");
    t.row("theta", r.model.theta, "rad");

    summary["model"] = {{"N", r.model.N},
                        {"t_J", r.model.t},
                        {"delta_over_t", r.model.t > 0 ? r.model.delta / r.model.t : 0.0},
                        {"mu_over_t", r.model.t > 0 ? r.model.mu / r.model.t : 0.0},
                        {"theta", r.model.theta}};
    summary["drive_phases_a"] = r.drives.a.phases;
    summary["drive_phases_b"] = r.drives.b.phases;
    summary["warnings"] = r.warnings;
    return {{"circuit_map.csv", t.str()}};
}

}  // namespace

std::string library_version() { return KITAEV_LAB_VERSION; }

Task parse_task(const std::string& name) { return lookup(name, task_names, "task"); }

std::string to_string(Task task) {
    for (const auto& [t, n] : task_names)
        if (t == task) return std::string(n);
    return "?";
}

RunConfig parse_config(const json& document) {
    const Node root(&document, "");
    root.expect_object({"task", "workers", "model", "edge", "solver", "sweep", "gap", "phase_diagram", "gbz",
                        "populations", "lindblad", "circuit"});
    RunConfig c;
    c.task = parse_name(root.child("task"), "spectrum", parse_task);
    c.workers = root.child("workers").integer(0);
    if (c.workers < 0) root.child("workers").fail("must be >= 0");
    c.model = parse_model(root.child("model"));

    const Node edge = root.child("edge");
    edge.expect_object({"re_tol", "weight_min"});
    c.edge.re_tol = edge.child("re_tol").number(c.edge.re_tol);
    c.edge.weight_min = edge.child("weight_min").number(c.edge.weight_min);
    if (c.edge.re_tol < 0.0) edge.child("re_tol").fail("must be >= 0");

    const Node solver = root.child("solver");
    solver.expect_object({"precision"});
    c.precision = parse_name(solver.child("precision"), "standard", [](const std::string& s) {
        if (s == "standard") return Precision::standard;
        if (s == "extended") return Precision::extended;
        throw ConfigError("unknown precision '" + s + "' (standard, extended)");
    });

    const Node sweep = root.child("sweep");
    sweep.expect_object({"axis", "values", "range"});
    c.sweep.axis = parse_name(sweep.child("axis"), "mu", parse_sweep_axis);
    c.sweep.values = parse_values(sweep, c.sweep.values);

    const Node gap = root.child("gap");
    gap.expect_object({"mu_min", "mu_max"});
    c.gap.mu_min = gap.child("mu_min").number(c.gap.mu_min);
    c.gap.mu_max = gap.child("mu_max").number(c.gap.mu_max);
    if (c.gap.mu_min < 0.0) gap.child("mu_min").fail("must be >= 0");
    if (!(c.gap.mu_max > c.gap.mu_min)) gap.child("mu_max").fail("must exceed mu_min");

    const Node pd = root.child("phase_diagram");
    pd.expect_object({"x", "y"});
    c.phase_diagram.x = parse_axis(pd.child("x"), c.phase_diagram.x);
    c.phase_diagram.y = parse_axis(pd.child("y"), c.phase_diagram.y);
    if (c.phase_diagram.x.parameter == c.phase_diagram.y.parameter) pd.child("y").fail("axes must differ");

    const Node gbz = root.child("gbz");
    gbz.expect_object({"sample_sites", "tolerance", "project"});
    c.gbz.sample_sites = gbz.child("sample_sites").integer(c.gbz.sample_sites);
    if (c.gbz.sample_sites < 2) gbz.child("sample_sites").fail("must be >= 2");
    c.gbz.tolerance = gbz.child("tolerance").number(c.gbz.tolerance);
    if (!(c.gbz.tolerance > 0.0)) gbz.child("tolerance").fail("must be > 0");
    c.gbz.project = gbz.child("project").boolean(c.gbz.project);

    const Node pop = root.child("populations");
    pop.expect_object({"mode", "index"});
    c.populations.selector = parse_name(pop.child("mode"), "lowest_upper_bulk", [](const std::string& s) {
        return lookup(s, selector_names, "mode selector");
    });
    c.populations.index = pop.child("index").integer(0);
    if (c.populations.index < 0) pop.child("index").fail("must be >= 0");

    const Node lb = root.child("lindblad");
    lb.expect_object({"t_end", "steps", "initial", "site", "abs_tol", "rel_tol"});
    c.lindblad.t_end = lb.child("t_end").number(c.lindblad.t_end);
    if (!(c.lindblad.t_end > 0.0)) lb.child("t_end").fail("must be > 0");
    c.lindblad.steps = lb.child("steps").integer(c.lindblad.steps);
    if (c.lindblad.steps < 2) lb.child("steps").fail("must be >= 2");
    c.lindblad.initial = parse_name(lb.child("initial"), "all_excited", [](const std::string& s) {
        return lookup(s, initial_names, "initial state");
    });
    c.lindblad.site = lb.child("site").integer(c.lindblad.site);
    if (c.lindblad.site < 1 || c.lindblad.site > c.model.N) lb.child("site").fail("must lie in [1, N]");
    c.lindblad.tolerances.abs_tol = lb.child("abs_tol").number(c.lindblad.tolerances.abs_tol);
    c.lindblad.tolerances.rel_tol = lb.child("rel_tol").number(c.lindblad.tolerances.rel_tol);
    if (!(c.lindblad.tolerances.abs_tol > 0.0)) lb.child("abs_tol").fail("must be > 0");
    if (!(c.lindblad.tolerances.rel_tol > 0.0)) lb.child("rel_tol").fail("must be > 0");

    c.circuit = parse_circuit(root.child("circuit"));
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("/: invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json serialize_config(const RunConfig& c) {
    json j;
    j["task"] = to_string(c.task);
    j["workers"] = c.workers;
    const ModelSpec& m = c.model;
    j["model"] = {{"N", m.N},
                  {"mu", m.mu},
                  {"t", m.t},
                  {"delta", m.delta},
                  {"theta", m.theta},
                  {"gamma", m.gamma},
                  {"onsite_delta", m.onsite_delta},
                  {"dissipation", {{"kind", to_string(m.dissipation.kind)}, {"positions", m.dissipation.positions}}},
                  {"boundary", m.boundary == Boundary::open ? "open" : "periodic"},
                  {"parity", m.parity == ParitySector::antiperiodic ? "antiperiodic" : "periodic"}};
    j["edge"] = {{"re_tol", c.edge.re_tol}, {"weight_min", c.edge.weight_min}};
    j["solver"] = {{"precision", c.precision == Precision::standard ? "standard" : "extended"}};
    j["sweep"] = {{"axis", to_string(c.sweep.axis)}, {"values", c.sweep.values}};
    j["gap"] = {{"mu_min", c.gap.mu_min}, {"mu_max", c.gap.mu_max}};
    j["phase_diagram"] = {{"x", axis_json(c.phase_diagram.x)}, {"y", axis_json(c.phase_diagram.y)}};
    j["gbz"] = {{"sample_sites", c.gbz.sample_sites}, {"tolerance", c.gbz.tolerance}, {"project", c.gbz.project}};
    j["populations"] = {{"mode", selector_name(c.populations.selector)}, {"index", c.populations.index}};
    j["lindblad"] = {{"t_end", c.lindblad.t_end},
                     {"steps", c.lindblad.steps},
                     {"initial", initial_name(c.lindblad.initial)},
                     {"site", c.lindblad.site},
                     {"abs_tol", c.lindblad.tolerances.abs_tol},
                     {"rel_tol", c.lindblad.tolerances.rel_tol}};
    const auto& cc = c.circuit;
    j["circuit"] = {{"q1", qubit_json(cc.q1)}, {"q2", qubit_json(cc.q2)}, {"a", coupler_json(cc.a)},
                    {"b", coupler_json(cc.b)}, {"M_G", cc.M_G},          {"dc_b", cc.dc_b},
                    {"ac_a", cc.ac_a},         {"ac_b", cc.ac_b},         {"mu", cc.mu},
                    {"theta", cc.theta},       {"N", cc.N}};
    j["circuit"]["dc_a"] = cc.dc_a ? json(*cc.dc_a) : json(nullptr);
    return j;
}

void apply_override(json& document, const std::string& key, const std::string& value) {
    if (key.empty()) throw ConfigError("--set needs a key");
    std::string pointer;
    if (key.front() == '/') {
        pointer = key;
    } else {
        std::string_view rest = key;
        while (!rest.empty()) {
            const auto dot = rest.find('.');
            const auto token = rest.substr(0, dot);
            if (token.empty()) throw ConfigError("malformed --set key '" + key + "'");
            pointer += "/" + escape_pointer_token(token);
            rest = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);
        }
    }
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    try {
        document[json::json_pointer(pointer)] = std::move(parsed);
    } catch (const json::exception& e) {
        throw ConfigError(pointer + ": cannot override: " + e.what());
    }
}

int resolved_workers(const RunConfig& c) { return c.workers > 0 ? c.workers : default_workers(); }

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + path.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.close();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ConfigError("cannot write " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot write " + path.string());
    }
}

std::string spectrum_table(const SpectrumResult& r, const std::vector<ModeInfo>& modes) {
    Table t("index,re_E,im_E,residual,edge_flag,edge_weight,ipr");
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const auto& m = modes[static_cast<std::size_t>(i)];
        t.row(static_cast<long long>(i), r.eigenvalues(i).real(), r.eigenvalues(i).imag(), r.residuals(i), m.edge_flag,
              m.edge_weight, m.ipr);
    }
    return t.str();
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
    Table t("axis_value,mode_index,re_E,im_E,edge_flag");
    for (const auto& row : rows) {
        if (row.failed) {
            t.row(row.value, -1, "nan", "nan", "failed");
            continue;
        }
        for (Eigen::Index i = 0; i < row.energies.size(); ++i)
            t.row(row.value, static_cast<long long>(i), row.energies(i).real(), row.energies(i).imag(),
                  static_cast<bool>(row.edge_flags[static_cast<std::size_t>(i)]));
    }
    return t.str();
}

std::string gbz_table(const GbzCurve& curve) {
    Table t("loop,re_beta,im_beta,re_E,im_E");
    for (const auto& p : curve.particle_loop)
        t.row("particle", p.beta.real(), p.beta.imag(), p.energy.real(), p.energy.imag());
    for (const auto& p : curve.hole_loop) t.row("hole", p.beta.real(), p.beta.imag(), p.energy.real(), p.energy.imag());
    return t.str();
}

std::string phase_diagram_table(const PhaseDiagram& pd) {
    Table t("x,y,gap,phase");
    for (std::size_t i = 0; i < pd.x.values.size(); ++i)
        for (std::size_t j = 0; j < pd.y.values.size(); ++j) {
            const std::size_t k = pd.cell(i, j);
            t.row(pd.x.values[i], pd.y.values[j], pd.gap[k], static_cast<bool>(pd.nontrivial[k]));
        }
    return t.str();
}

std::string populations_table(const PopulationDistribution& p) {
    Table t("site,particle_w,hole_w");
    for (Eigen::Index n = 0; n < p.particle.size(); ++n) t.row(static_cast<long long>(n + 1), p.particle(n), p.hole(n));
    return t.str();
}

std::string trajectory_table(const std::vector<lindblad::Snapshot>& snapshots) {
    Table t("time,trace,site,population");
    for (const auto& s : snapshots)
        for (std::size_t k = 0; k < s.populations.size(); ++k) t.row(s.time, s.trace, k + 1, s.populations[k]);
    return t.str();
}

void run_task(const RunConfig& config, const std::filesystem::path& out_dir, const Diagnostics& diag) {
    json summary = json::object();
    std::vector<Output> outputs;
    switch (config.task) {
    case Task::spectrum: outputs = run_spectrum(config, summary); break;
    case Task::sweep: outputs = run_sweep(config, summary, diag); break;
    case Task::gap: outputs = run_gap(config, summary); break;
    case Task::phase_diagram: outputs = run_phase_diagram(config, summary); break;
    case Task::gbz: outputs = run_gbz(config, summary); break;
    case Task::populations: outputs = run_populations(config, summary); break;
    case Task::lindblad_check: outputs = run_lindblad(config, summary); break;
    case Task::circuit_map: outputs = run_circuit(config, summary); break;
    }

    json meta;
    meta["library_version"] = library_version();
    meta["task"] = to_string(config.task);
    meta["config"] = serialize_config(config);
    meta["outputs"] = json::array();
    for (const auto& o : outputs) meta["outputs"].push_back(o.name);
    meta["summary"] = std::move(summary);
    outputs.push_back({to_string(config.task) + ".meta.json", meta.dump(2) + "\n"});

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        throw ConfigError("cannot create output directory " + out_dir.string());
    for (const auto& o : outputs) write_atomically(out_dir / o.name, o.contents);
}

}  // namespace kitaev::io
