#pragma once

#include <string>

#include "floodmit/model_ir.hpp"

namespace floodmit::model {

/// Canonical LP-format rendering: minimize objective, `Subject To` rows in
/// declaration order, quadratic rows in bracket syntax, explicit Bounds and
/// Binaries sections. Numbers use shortest round-trip formatting so equal
/// models export byte-identically.
std::string to_lp_format(const ModelIR& m);

void export_lp(const ModelIR& m, const std::string& path);

}  // namespace floodmit::model
