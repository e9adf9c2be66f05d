#pragma once

#include <string>

#include "ddsim/scenario.hpp"
#include "ddsim/sentinel.hpp"

namespace ddsim::testing {

// One of the shipped scenario files, by stem ("syn_flood", "benign", ...).
ScenarioConfig shipped(const std::string& stem);

// Ten-second mix of every traffic type, small enough to recount by hand.
ScenarioConfig micro_scenario();

// Empty string when equal, else the first differing field.
std::string compare_stats(const SourceStats& got, const SourceStats& want);

}  // namespace ddsim::testing
