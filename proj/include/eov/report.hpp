#pragma once

#include <string>

#include "eov/pipeline.hpp"

namespace eov::report {

/// Full metrics breakdown with stable field order.
std::string metrics_json(const RunResult& result);

std::string csv_header();
std::string csv_row(const RunResult& result);

void save_ledger(const RunResult& result, const std::string& path);

struct LoadedLedger {
  SimConfig cfg;
  Ledger ledger;
};

LoadedLedger load_ledger(const std::string& path);

/// Applies JSON config file fields over `base`; unknown fields are rejected.
SimConfig config_from_json_file(const std::string& path, SimConfig base);

}  // namespace eov::report
