#pragma once

#include <string>

namespace coldstart::policy {

/// Actions a cold-start policy may hand to the simulator at a tick.
/// Actions referencing unknown functions or ineligible nodes are rejected
/// and logged, never fatal.
struct PolicyAction {
  enum class Kind {
    ProvisionShell,        // count, optional keepalive_until
    BindShellToFunction,   // func_id, optional node_id, optional keepalive_until
    ExtendKeepAlive,       // node_id, minutes
    Decommission,          // node_id
    RankResources,         // bookkeeping only
  };

  Kind kind = Kind::RankResources;
  double issue_time = 0.0;
  long count = 0;
  long func_id = -1;
  long node_id = -1;          // -1 means "any eligible shell"
  double minutes = 0.0;       // ExtendKeepAlive
  double keepalive_until = 0.0;  // absolute minute; 0 means "config default"
};

std::string action_kind_name(PolicyAction::Kind kind);

}  // namespace coldstart::policy
