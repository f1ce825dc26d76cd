#pragma once

#include "sketchpinv/solvers.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pinvbench {

/// Entry point of the benchmark CLI. `args` excludes the program name.
/// Returns the process exit code: 0 tolerance reached (or report printed),
/// 2 iteration budget exhausted, 1 on any error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes `iter,phase,time_s,flops,residual[,err_oracle]` rows, optionally
/// prefixed by a `method` column. Numbers use the shortest round-trip form.
void write_trace_csv(std::ostream& out, const std::vector<sketchpinv::IterTrace>& trace, bool with_oracle,
                     const std::string& method = {}, bool header = true);

}  // namespace pinvbench
