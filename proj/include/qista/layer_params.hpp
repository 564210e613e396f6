#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qista/solvers.hpp"

namespace qista {

/// Lower bound applied to every eps_t entry on load.
inline constexpr double kEpsFloor = 0.1;

struct ClampEvent {
    int layer;
    Eigen::Index index;
    double original;
};

struct LoadSummary {
    int layers = 0;
    std::vector<ClampEvent> clamped;

    /// One-line human-readable description.
    std::string describe() const;
};

struct LoadedModel {
    UnfoldedModel<double> model;
    LoadSummary summary;
};

/// Layer-parameter document (JSON):
///
///   {
///     "T": <int >= 1>,
///     "gamma": <real >= 0>,
///     "q": <real in (0, 1]>,
///     "layers": [                      // exactly T records
///       { "A_t": [[...m reals...], ...n rows...],   // or a flat row-major list of n*m reals
///         "lambda_t": <real >= 0>,
///         "eps_t": [...n reals...] },
///       ...
///     ]
///   }
///
/// Unknown keys are rejected. eps_t entries below kEpsFloor are raised to it
/// and reported in the summary.
///
/// Errors: syntax or schema problems throw FormatError (line for syntax
/// errors, field path such as "layers[2].eps_t" for schema errors);
/// dimension mismatches and non-finite values throw InvalidInput.
LoadedModel read_layer_params(std::istream& is, Eigen::Index m, Eigen::Index n);
LoadedModel load_layer_params(const std::filesystem::path& path, Eigen::Index m, Eigen::Index n);

/// Canonical serialisation; reloading reproduces every value bit for bit.
void write_layer_params(std::ostream& os, const UnfoldedModel<double>& model);
void save_layer_params(const std::filesystem::path& path, const UnfoldedModel<double>& model);

}  // namespace qista
