#pragma once

#include "cemreg/run_config.hpp"

namespace cemreg::cli {

int cmd_synth(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_register(const RunConfig& config);
int cmd_bench(const RunConfig& config);

}  // namespace cemreg::cli
