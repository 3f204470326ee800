#pragma once

#include <string>
#include <vector>

#include "impplan/autodiff.hpp"
#include "impplan/envworld.hpp"
#include "impplan/trajectory.hpp"

namespace impplan {

struct PlannerConfig {
  int n_rays = 64;
  int c_i = 16;  // perception embedding channels
  int c_g = 4;   // goal embedding channels, >= 3
  int m = 8;     // embedding width
  int n_k = 5;   // predicted keypoints
  int enc_hidden = 128;
  int trunk_hidden = 128;
  int trunk_out = 64;
  double max_range = 10.0;   // depth normalization
  double forward_bias = 0.5; // initial per-keypoint forward progress, meters
  double z_bias = 0.5;       // initial first-keypoint elevation (h_R)

  int fused_channels() const { return 2 * c_i + c_g; }
  int fused_dim() const { return fused_channels() * m; }
};

// All learnable weights of the two perception encoders, the goal embedding
// and the two-headed planning network, as ordered named tensors.
struct PlannerParams {
  PlannerConfig cfg;
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  static PlannerParams init(const PlannerConfig& cfg, uint64_t seed);

  Tensor& find(const std::string& name);
  const Tensor& find(const std::string& name) const;
};

struct PlannerOutput {
  KeyPointSet keypoints;  // robot frame
  double mu = 0.0;        // collision probability in (0,1)
};

// Handles into the recorded graph for gradient injection during training.
struct PlanRecord {
  PlannerOutput output;
  NodeId keypoint_node = -1;  // shape (n_k, 3)
  NodeId logit_node = -1;     // shape (1, 1)
  std::vector<NodeId> param_nodes;
};

class Planner {
 public:
  explicit Planner(PlannerParams params) : params_(std::move(params)) {}

  const PlannerParams& params() const { return params_; }
  PlannerParams& params() { return params_; }
  const PlannerConfig& cfg() const { return params_.cfg; }

  // Encoder features as (C_I, M) / (C_G, M) tensors.
  Tensor encode_depth(const DepthScan& scan) const;
  Tensor encode_semantic(const SemanticScan& scan) const;
  Tensor embed_goal(const Vec3& goal) const;

  // Full forward pass; the recorded variant keeps the graph alive for
  // backprop through injected task-loss gradients.
  PlannerOutput plan(const DepthScan& depth, const SemanticScan& semantic,
                     const Vec3& goal) const;
  PlanRecord plan_recorded(const DepthScan& depth, const SemanticScan& semantic,
                           const Vec3& goal, Graph& graph) const;

 private:
  PlannerParams params_;
};

// Execute iff mu < delta_mu (strict).
inline bool gate(const PlannerOutput& out, double delta_mu) { return out.mu < delta_mu; }

// "IPNN1" checkpoint: magic, u32 hyperparameters (C_I, C_G, M, n_k, n_rays),
// then named f64 weight blocks, little-endian.
void save_checkpoint(const PlannerParams& params, const std::string& path);
PlannerParams load_checkpoint(const std::string& path);

}  // namespace impplan
