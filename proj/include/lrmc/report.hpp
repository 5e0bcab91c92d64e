#pragma once

#include <string>
#include <string_view>

#include "lrmc/delivery.hpp"
#include "lrmc/instance.hpp"
#include "lrmc/rank_pursuit.hpp"

namespace lrmc {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// JSON document for a pursuit. Per-stage traces are included on request.
std::string write_solve_report(const SolveReport& report, bool include_traces = false);

/// Design dump read back by `lrmc verify`. Destination and message indices are
/// written 1-based like instance files.
std::string write_design(const DeliveryDesign& design);
/// Throws ParseError on malformed text.
DeliveryDesign read_design(std::string_view text);

/// CSV with columns algorithm,rank,iter,cost,grad_norm,delta,accepted,tcg_stop,inner_iters,elapsed_ms.
std::string trace_csv(const SolveReport& report);

std::string read_file(const std::string& path);
/// Throws IoError when the file cannot be written.
void write_file(const std::string& path, std::string_view content);

}  // namespace lrmc
