#include "impplan/planner.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "impplan/rng.hpp"

namespace impplan {

namespace {

Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& x : t.data) x = rng.uniform(-bound, bound);
  return t;
}

std::vector<double> normalize_depth(const DepthScan& scan, const PlannerConfig& cfg) {
  if (static_cast<int>(scan.ranges.size()) != cfg.n_rays) {
    std::ostringstream msg;
    msg << "depth scan has " << scan.ranges.size() << " rays, planner expects " << cfg.n_rays;
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> out(scan.ranges.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scan.ranges[i] / cfg.max_range;
  return out;
}

std::vector<double> normalize_semantic(const SemanticScan& scan, const PlannerConfig& cfg) {
  if (static_cast<int>(scan.colors.size()) != cfg.n_rays) {
    std::ostringstream msg;
    msg << "semantic scan has " << scan.colors.size() << " rays, planner expects " << cfg.n_rays;
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> out(scan.colors.size() * 3);
  for (std::size_t i = 0; i < scan.colors.size(); ++i)
    for (int k = 0; k < 3; ++k) out[i * 3 + k] = scan.colors[i][k] / 255.0;
  return out;
}

// Lower-triangular ones matrix turning per-step deltas into cumulative
// keypoints inside the graph.
Tensor cumsum_matrix(int n_k) {
  Tensor t({static_cast<std::size_t>(n_k), static_cast<std::size_t>(n_k)});
  for (int i = 0; i < n_k; ++i)
    for (int j = 0; j <= i; ++j) t.data[i * n_k + j] = 1.0;
  return t;
}

struct ForwardNodes {
  NodeId depth_feat = -1;
  NodeId sem_feat = -1;
  NodeId goal_feat = -1;
  NodeId keypoints = -1;
  NodeId logit = -1;
  std::vector<NodeId> params;
};

// The whole two-stream forward pass lives here so the convenience scan/goal
// encoders and the trainable path share one implementation.
ForwardNodes forward(const PlannerParams& p, Graph& g, const std::vector<double>& depth_in,
                     const std::vector<double>& sem_in, const Vec3& goal) {
  const PlannerConfig& cfg = p.cfg;
  auto param = [&](const std::string& name) {
    return g.leaf(p.find(name), /*requires_grad=*/true);
  };

  ForwardNodes out;
  const NodeId dw1 = param("depth_w1"), db1 = param("depth_b1");
  const NodeId dw2 = param("depth_w2"), db2 = param("depth_b2");
  const NodeId sw1 = param("sem_w1"), sb1 = param("sem_b1");
  const NodeId sw2 = param("sem_w2"), sb2 = param("sem_b2");
  const NodeId gw = param("goal_w"), gb = param("goal_b");
  const NodeId tw1 = param("trunk_w1"), tb1 = param("trunk_b1");
  const NodeId tw2 = param("trunk_w2"), tb2 = param("trunk_b2");
  const NodeId kw = param("kp_w"), kb = param("kp_b");
  const NodeId cw = param("col_w"), cb = param("col_b");
  out.params = {dw1, db1, dw2, db2, sw1, sb1, sw2, sb2, gw,
                gb,  tw1, tb1, tw2, tb2, kw,  kb,  cw,  cb};

  const NodeId din = g.leaf(Tensor::row(depth_in), /*requires_grad=*/false);
  const NodeId sin = g.leaf(Tensor::row(sem_in), /*requires_grad=*/false);
  const NodeId gin = g.leaf(Tensor::row({goal.x, goal.y, goal.z}), /*requires_grad=*/false);

  const std::size_t ci = static_cast<std::size_t>(cfg.c_i);
  const std::size_t cgn = static_cast<std::size_t>(cfg.c_g);
  const std::size_t m = static_cast<std::size_t>(cfg.m);

  const NodeId dh = g.relu(g.add(g.matmul(din, dw1), db1));
  out.depth_feat = g.reshape(g.add(g.matmul(dh, dw2), db2), {ci, m});
  const NodeId sh = g.relu(g.add(g.matmul(sin, sw1), sb1));
  out.sem_feat = g.reshape(g.add(g.matmul(sh, sw2), sb2), {ci, m});
  out.goal_feat = g.reshape(g.add(g.matmul(gin, gw), gb), {cgn, m});

  const NodeId fused = g.concat(g.concat(out.depth_feat, out.sem_feat, 0), out.goal_feat, 0);
  const NodeId flat = g.reshape(fused, {1, static_cast<std::size_t>(cfg.fused_dim())});
  const NodeId t1 = g.relu(g.add(g.matmul(flat, tw1), tb1));
  const NodeId t2 = g.relu(g.add(g.matmul(t1, tw2), tb2));

  const NodeId deltas =
      g.reshape(g.add(g.matmul(t2, kw), kb),
                {static_cast<std::size_t>(cfg.n_k), 3});
  const NodeId cumsum = g.leaf(cumsum_matrix(cfg.n_k), /*requires_grad=*/false);
  out.keypoints = g.matmul(cumsum, deltas);
  out.logit = g.add(g.matmul(t2, cw), cb);
  return out;
}

}  // namespace

PlannerParams PlannerParams::init(const PlannerConfig& cfg, uint64_t seed) {
  if (cfg.c_g < 3) throw std::invalid_argument("goal embedding needs C_G >= 3");
  if (cfg.n_rays < 2 || cfg.c_i < 1 || cfg.m < 1 || cfg.n_k < 1)
    throw std::invalid_argument("invalid planner hyperparameters");
  PlannerParams p;
  p.cfg = cfg;
  Rng rng(seed);
  const std::size_t nr = static_cast<std::size_t>(cfg.n_rays);
  const std::size_t eh = static_cast<std::size_t>(cfg.enc_hidden);
  const std::size_t cim = static_cast<std::size_t>(cfg.c_i * cfg.m);
  const std::size_t cgm = static_cast<std::size_t>(cfg.c_g * cfg.m);
  const std::size_t fd = static_cast<std::size_t>(cfg.fused_dim());
  const std::size_t th = static_cast<std::size_t>(cfg.trunk_hidden);
  const std::size_t to = static_cast<std::size_t>(cfg.trunk_out);
  const std::size_t nk3 = static_cast<std::size_t>(cfg.n_k) * 3;

  auto push = [&](const std::string& name, Tensor t) {
    p.names.push_back(name);
    p.tensors.push_back(std::move(t));
  };
  push("depth_w1", init_uniform({nr, eh}, nr, rng));
  push("depth_b1", init_uniform({eh}, nr, rng));
  push("depth_w2", init_uniform({eh, cim}, eh, rng));
  push("depth_b2", init_uniform({cim}, eh, rng));
  push("sem_w1", init_uniform({nr * 3, eh}, nr * 3, rng));
  push("sem_b1", init_uniform({eh}, nr * 3, rng));
  push("sem_w2", init_uniform({eh, cim}, eh, rng));
  push("sem_b2", init_uniform({cim}, eh, rng));
  push("goal_w", init_uniform({3, cgm}, 3, rng));
  push("goal_b", init_uniform({cgm}, 3, rng));
  push("trunk_w1", init_uniform({fd, th}, fd, rng));
  push("trunk_b1", init_uniform({th}, fd, rng));
  push("trunk_w2", init_uniform({th, to}, th, rng));
  push("trunk_b2", init_uniform({to}, th, rng));
  push("kp_w", init_uniform({to, nk3}, to, rng));
  Tensor kp_b = init_uniform({nk3}, to, rng);
  // bias the untrained network toward forward-progressing keypoints at the
  // robot base height
  for (int i = 0; i < cfg.n_k; ++i) kp_b.data[i * 3 + 0] += cfg.forward_bias;
  kp_b.data[2] += cfg.z_bias;
  push("kp_b", std::move(kp_b));
  push("col_w", init_uniform({to, 1}, to, rng));
  push("col_b", init_uniform({1}, to, rng));
  return p;
}

Tensor& PlannerParams::find(const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return tensors[i];
  throw std::out_of_range("unknown parameter tensor: " + name);
}

const Tensor& PlannerParams::find(const std::string& name) const {
  return const_cast<PlannerParams*>(this)->find(name);
}

Tensor Planner::encode_depth(const DepthScan& scan) const {
  Graph g;
  auto nodes = forward(params_, g, normalize_depth(scan, cfg()),
                       std::vector<double>(cfg().n_rays * 3, 0.0), {0, 0, 0});
  return g.value(nodes.depth_feat);
}

Tensor Planner::encode_semantic(const SemanticScan& scan) const {
  Graph g;
  auto nodes = forward(params_, g, std::vector<double>(cfg().n_rays, 0.0),
                       normalize_semantic(scan, cfg()), {0, 0, 0});
  return g.value(nodes.sem_feat);
}

Tensor Planner::embed_goal(const Vec3& goal) const {
  Graph g;
  auto nodes = forward(params_, g, std::vector<double>(cfg().n_rays, 0.0),
                       std::vector<double>(cfg().n_rays * 3, 0.0), goal);
  return g.value(nodes.goal_feat);
}

PlannerOutput Planner::plan(const DepthScan& depth, const SemanticScan& semantic,
                            const Vec3& goal) const {
  Graph g;
  return plan_recorded(depth, semantic, goal, g).output;
}

PlanRecord Planner::plan_recorded(const DepthScan& depth, const SemanticScan& semantic,
                                  const Vec3& goal, Graph& graph) const {
  auto nodes = forward(params_, graph, normalize_depth(depth, cfg()),
                       normalize_semantic(semantic, cfg()), goal);
  PlanRecord rec;
  rec.keypoint_node = nodes.keypoints;
  rec.logit_node = nodes.logit;
  rec.param_nodes = nodes.params;
  const Tensor& kp = graph.value(nodes.keypoints);
  rec.output.keypoints.points.resize(cfg().n_k);
  for (int i = 0; i < cfg().n_k; ++i)
    rec.output.keypoints.points[i] = {kp.data[i * 3 + 0], kp.data[i * 3 + 1],
                                      kp.data[i * 3 + 2]};
  const double logit = graph.value(nodes.logit).data[0];
  rec.output.mu = 1.0 / (1.0 + std::exp(-logit));
  return rec;
}

namespace {

template <typename T>
void write_le(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw std::runtime_error("truncated checkpoint while reading " + what);
  return v;
}

}  // namespace

void save_checkpoint(const PlannerParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write("IPNN1", 5);
  const PlannerConfig& c = params.cfg;
  for (int v : {c.c_i, c.c_g, c.m, c.n_k, c.n_rays, c.enc_hidden, c.trunk_hidden, c.trunk_out})
    write_le(out, static_cast<uint32_t>(v));
  write_le(out, c.max_range);
  write_le(out, c.forward_bias);
  write_le(out, c.z_bias);
  write_le(out, static_cast<uint32_t>(params.tensors.size()));
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const std::string& name = params.names[i];
    const Tensor& t = params.tensors[i];
    write_le(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le(out, static_cast<uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) write_le(out, static_cast<uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
}

PlannerParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[5];
  if (!in.read(magic, 5) || std::memcmp(magic, "IPNN1", 5) != 0)
    throw std::runtime_error("bad IPNN magic in " + path);
  PlannerParams p;
  PlannerConfig& c = p.cfg;
  c.c_i = static_cast<int>(read_le<uint32_t>(in, "c_i"));
  c.c_g = static_cast<int>(read_le<uint32_t>(in, "c_g"));
  c.m = static_cast<int>(read_le<uint32_t>(in, "m"));
  c.n_k = static_cast<int>(read_le<uint32_t>(in, "n_k"));
  c.n_rays = static_cast<int>(read_le<uint32_t>(in, "n_rays"));
  c.enc_hidden = static_cast<int>(read_le<uint32_t>(in, "enc_hidden"));
  c.trunk_hidden = static_cast<int>(read_le<uint32_t>(in, "trunk_hidden"));
  c.trunk_out = static_cast<int>(read_le<uint32_t>(in, "trunk_out"));
  c.max_range = read_le<double>(in, "max_range");
  c.forward_bias = read_le<double>(in, "forward_bias");
  c.z_bias = read_le<double>(in, "z_bias");
  const uint32_t blocks = read_le<uint32_t>(in, "block count");
  for (uint32_t b = 0; b < blocks; ++b) {
    const uint32_t name_len = read_le<uint32_t>(in, "name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len))
      throw std::runtime_error("truncated checkpoint while reading a block name");
    const uint32_t ndim = read_le<uint32_t>(in, "ndim of " + name);
    std::vector<std::size_t> shape(ndim);
    std::size_t total = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      shape[d] = read_le<uint32_t>(in, "shape of " + name);
      total *= shape[d];
    }
    Tensor t(shape);
    if (!in.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(total * sizeof(double))))
      throw std::runtime_error("truncated checkpoint while reading values of " + name);
    p.names.push_back(std::move(name));
    p.tensors.push_back(std::move(t));
  }
  // shape sanity for the tensors the forward pass will request
  PlannerParams ref = PlannerParams::init(c, 0);
  for (std::size_t i = 0; i < ref.names.size(); ++i) {
    const Tensor& have = p.find(ref.names[i]);
    if (have.shape != ref.tensors[i].shape)
      throw std::runtime_error("checkpoint tensor " + ref.names[i] + " has shape " +
                               have.shape_str() + ", expected " + ref.tensors[i].shape_str());
  }
  return p;
}

}  // namespace impplan
