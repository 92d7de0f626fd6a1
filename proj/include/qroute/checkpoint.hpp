#pragma once

#include <string>

#include "qroute/agent.hpp"
#include "qroute/topology.hpp"

namespace qroute {

// Binary checkpoint: a self-describing header (format version, device
// shape, topology fingerprint, optimizer scalars, tensor manifest with
// name/shape/offset) followed by a flat little-endian float32 payload.
// Model and optimizer moments are stored as float, so a round-trip is
// bit-exact by construction.
struct CheckpointData {
    AgentModel<float> model;
    OptimizerState<float> opt;
};

void save_checkpoint(const AgentModel<float>& model, const OptimizerState<float>& opt,
                     const std::string& path);

CheckpointData load_checkpoint(const std::string& path);

// Refuses a checkpoint trained against a different device.
void require_topology(const AgentConfig& cfg, const Topology& t);

}  // namespace qroute
