#pragma once

// Reproducible experiment sweeps producing the CSV data behind the figures,
// and a generic grid runner over the solver, simulator and game.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecudn/game.hpp"
#include "ecudn/serialize.hpp"
#include "ecudn/sim.hpp"
#include "ecudn/solver.hpp"

namespace ecudn {

struct ExperimentConfig {
    std::string experiment = "fig2";  ///< fig2 | fig3 | fig4 | fig5 | fig6 | custom
    std::uint64_t seed = 1;

    // Network: explicit mean-SNR matrix (dB) or random layouts.
    std::vector<std::vector<double>> gains_db;
    RadioParams radio;
    double area_side = 500.0;
    std::size_t candidate_ues = 1000;
    std::size_t layouts = 1;            ///< layout draws per density
    std::vector<std::size_t> densities; ///< N values

    TrafficModel traffic;
    double q_threshold = 10.0;
    double delay_bound = 0.01;

    std::string sweep = "mean_size";    ///< fig2 knob: mean_size | p
    std::vector<double> sweep_values;
    std::vector<double> d_values;
    double theta = 1e-3;                ///< game exponent
    std::vector<double> p_init{0.2};    ///< game start (uniform value if one entry)
    std::vector<double> baselines;      ///< uniform-p comparison strategies

    SolverConfig solver;
    SimConfig sim;
    GameOptions game;

    // custom grid
    std::string entry = "solve";        ///< solve | max_rate | simulate | game
    std::string model = "unsaturated";
    double d = 0.5;
    std::size_t n_sbs = 2;
    json grid = json::object();

    std::size_t jobs = 1;               ///< threads; never affects output

    void validate() const;
};

/// Defaults for one experiment id; throws DomainError on an unknown id.
ExperimentConfig default_config(const std::string& experiment);

/// Overlays a JSON document on the defaults of its "experiment" entry.
ExperimentConfig config_from_json(const json& j);

/// Resolved configuration, excluding the thread count.
json to_json(const ExperimentConfig& config);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t cells = 0;
    std::size_t failed_cells = 0;

    /// Index of a header column; throws std::out_of_range if absent.
    std::size_t column(const std::string& name) const;
};

CsvTable run_fig2(const ExperimentConfig& config);
CsvTable run_fig3(const ExperimentConfig& config);
CsvTable run_fig4(const ExperimentConfig& config);
CsvTable run_fig5(const ExperimentConfig& config);
CsvTable run_fig6(const ExperimentConfig& config);
CsvTable run_custom(const ExperimentConfig& config);
CsvTable run_experiment(const ExperimentConfig& config);

/// `#` header lines echoing the configuration, the table, and a trailing
/// `#` summary line with cell and failure counts.
void write_csv(std::ostream& out, const ExperimentConfig& config, const CsvTable& table);

/// Random layout; on LayoutError retries with seeds derived from `seed`.
NetworkLayout build_layout_with_retry(std::size_t n_sbs, double area_side, std::size_t candidate_ues,
                                      const RadioParams& radio, std::uint64_t seed, std::size_t attempts = 100);

/// Network of the single-shot commands: the explicit gain matrix if given,
/// otherwise layout draw 0 with config.n_sbs SBSs.
LinkGainMatrix network_gains(const ExperimentConfig& config);

/// Seed of layout draw `index` at density `n_sbs`.
std::uint64_t layout_seed(std::uint64_t master, std::size_t n_sbs, std::size_t index);

InterferenceModel interference_model_from_string(const std::string& s);

}  // namespace ecudn
