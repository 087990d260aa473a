#pragma once

#include "kitaev/circuit.hpp"
#include "kitaev/lindblad.hpp"
#include "kitaev/spectra.hpp"
#include "kitaev/topology.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace kitaev::io {

std::string library_version();

enum class Task { spectrum, sweep, gap, phase_diagram, gbz, populations, lindblad_check, circuit_map };

Task parse_task(const std::string& name);
std::string to_string(Task task);

struct SweepConfig {
    SweepAxis axis = SweepAxis::mu;
    std::vector<double> values{0.0};
};

struct GapConfig {
    double mu_min = 0.0;
    double mu_max = 4.0;
};

struct PhaseDiagramConfig {
    GridAxis x{Parameter::t, {1.0}};
    GridAxis y{Parameter::mu, {0.0}};
};

struct GbzConfig {
    int sample_sites = 60;
    double tolerance = 1e-3;
    bool project = true;
};

enum class ModeSelector { index, smallest_abs, lowest_upper_bulk };

struct PopulationsConfig {
    ModeSelector selector = ModeSelector::lowest_upper_bulk;
    int index = 0;
};

enum class InitialState { all_excited, singlet, single_excitation };

struct LindbladConfig {
    double t_end = 5.0;
    int steps = 51;
    InitialState initial = InitialState::all_excited;
    int site = 1;  // for single_excitation
    lindblad::EvolveOptions tolerances;
};

struct RunConfig {
    Task task = Task::spectrum;
    int workers = 0;  // 0: environment or hardware default
    ModelSpec model;
    EdgeCriteria edge;
    Precision precision = Precision::standard;
    SweepConfig sweep;
    GapConfig gap;
    PhaseDiagramConfig phase_diagram;
    GbzConfig gbz;
    PopulationsConfig populations;
    LindbladConfig lindblad;
    circuit::CircuitDescription circuit = circuit::representative_circuit();
};

// Throws ConfigError naming the JSON pointer of the offending key.
RunConfig parse_config(const nlohmann::json& document);
RunConfig parse_config_text(const std::string& text);
nlohmann::json serialize_config(const RunConfig& config);

// key is dotted ("model.mu") or a JSON pointer ("/model/mu"); value is JSON,
// falling back to a plain string.
void apply_override(nlohmann::json& document, const std::string& key, const std::string& value);

int resolved_workers(const RunConfig& config);

using Diagnostics = std::function<void(const std::string&)>;

// Runs one task and writes its tables into out_dir.
void run_task(const RunConfig& config, const std::filesystem::path& out_dir, const Diagnostics& diag = {});

// Table writers; each writes atomically (temp file, then rename).
std::string format_double(double v);
void write_atomically(const std::filesystem::path& path, const std::string& contents);

std::string spectrum_table(const SpectrumResult& r, const std::vector<ModeInfo>& modes);
std::string sweep_table(const std::vector<SweepRow>& rows);
std::string gbz_table(const GbzCurve& curve);
std::string phase_diagram_table(const PhaseDiagram& pd);
std::string populations_table(const PopulationDistribution& p);
std::string trajectory_table(const std::vector<lindblad::Snapshot>& snapshots);

}  // namespace kitaev::io
