#pragma once

#include "config.hpp"

namespace rntk::cli {

void run_gram(const RunConfig& config);
void run_regress(const RunConfig& config);
void run_sensitivity(const RunConfig& config);
void run_converge(const RunConfig& config);
void run_drift(const RunConfig& config);
void run_curve(const RunConfig& config);

}  // namespace rntk::cli
