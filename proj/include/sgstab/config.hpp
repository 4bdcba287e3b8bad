/*
 * Copyright 2026 The sgstab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>

#include "sgstab/gpc.hpp"
#include "sgstab/material.hpp"
#include "sgstab/randfield.hpp"

namespace sgstab {

// Experiment description, parsed from a sectioned key-value text file.
// Unknown sections or keys are rejected; numeric fields are validated
// against the preconditions of the module that consumes them before any
// computation starts.

struct BasisConfig {
    PolyFamily family = PolyFamily::Hermite;
    int dims = 4;      // M
    int order = 4;     // K
    IndexSetKind kind = IndexSetKind::Sparse;
    int quad_size = 0; // 0 = ceil(1.5 (K+1))
};

struct FieldConfig {
    CovarianceKernel::Kind kernel = CovarianceKernel::Kind::SquaredExponential;
    double sigma2 = 0.0;  // 0 disables the random field (deterministic source)
    double corr_len = 0.2;
    double nu = 1.5;
    int n_quad = 0;  // Nystrom points, 0 = 8x the solver grid
    Eigen::VectorXd measure_x;  // optional conditioning data
    Eigen::VectorXd measure_z;
};

struct MaterialConfig {
    double elastic_modulus = 100.0;
    double sigma_star = 70.0;
    double v_star = 0.0;
    std::string sensitivity = "relation";  // "relation" | "bergstrom" | "drx"
    double relation_coeff = 0.02;          // slope = coeff * sigma_star
    double eps_end = 1.0;                  // strain grid for curve-based slopes
    int eps_steps = 2000;
    std::optional<BergstromParams> bergstrom;
    std::optional<DrxParams> drx;
    double kappa0 = 0.9;
    double kappa1 = 0.9;
};

struct StabilityConfig {
    double mu_hat = 0.25;
    double h_plus = 1.0;
    double h_minus = 1.0;
    bool optimize_scaling = false;
};

struct GridConfig {
    int cells = 256;  // N; dx = L / N
    double length = 1.0;
    double cfl = 0.99;
    double t_end = 5.0;
};

struct InitialConfig {
    std::string coordinates = "riemann";  // "riemann" | "physical"
    double amp_plus = 1.0;   // riemann: R+ amplitude; physical: velocity amplitude
    double amp_minus = -1.0; // riemann: R- amplitude; physical: stress amplitude
    double frequency = 1.0;  // cosine profile cos(2 pi f x / L)
};

struct OutputConfig {
    std::string directory = "out";
    int sample_every = 0;  // steps between samples, 0 = ceil(1/(50 dt))
};

struct ExperimentConfig {
    BasisConfig basis;
    FieldConfig field;
    MaterialConfig material;
    StabilityConfig stability;
    GridConfig grid;
    InitialConfig initial;
    OutputConfig output;
};

/// Parses and validates; throws std::invalid_argument with field-level
/// messages. The exact grammar is documented in the README.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Re-parseable echo of a config, sections and keys in fixed order.
std::string echo_config(const ExperimentConfig& config);

/// The plastic sensitivity at the desired stress, from the configured
/// relation or from the configured constitutive curve.
double plastic_slope(const MaterialConfig& material);

}  // namespace sgstab
