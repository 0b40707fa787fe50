#pragma once

#include <string>
#include <vector>

#include "nomad/config.hpp"

namespace nomad {

// 12 significant digits, '.' decimal separator; used for all CSV payloads.
std::string format_number(Real value);

std::string sweep_csv(const std::vector<SweepRow>& rows, int num_states);
std::string casestudy_csv(const std::vector<CaseStudyRow>& rows);

Json equilibrium_to_json(const EquilibriumResult& result, bool include_distribution = true);
Json sweep_to_json(const std::vector<SweepRow>& rows);
Json casestudy_to_json(const std::vector<CaseStudyRow>& rows);
Json validation_to_json(const ValidationReport& report);

}  // namespace nomad
