#pragma once

// Scenario config -> unassembled block graph.

#include "blockdyn/block.hpp"
#include "blockdyn/scenario.hpp"

namespace blockdyn {

RigidBodyParams rigid_body_params(const BodySpec& body);
DriveLaw drive_law(const DriveSpec& drive);

/// One block per body (base or joint) and per anchor and closure; buoyancy
/// becomes a constant inertial force -m_total g. Throws AssemblyError on
/// configs that fail validate_scenario().
SystemGraph build_system(const ScenarioConfig& config);

}  // namespace blockdyn
