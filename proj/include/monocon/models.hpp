#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monocon/matrix.hpp"
#include "monocon/tape.hpp"

namespace monocon {

inline constexpr double kDefaultLeakyAlpha = 0.01;

enum class Activation { LeakyRelu, Identity };
enum class HeadKind { Monotonic, Standard, None };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& s);

// One dense layer. When `monotone` is set the forward pass uses the
// entrywise square of `weight`, which keeps the effective weights
// non-negative for any parameter values; the bias stays unconstrained
// (a constant shift never breaks monotonicity).
struct LayerParams {
  Matrix weight;  // in_dim x out_dim
  Matrix bias;    // 1 x out_dim
  bool monotone = false;
  Activation activation = Activation::Identity;
  double leaky_alpha = kDefaultLeakyAlpha;

  Index in_dim() const { return weight.rows(); }
  Index out_dim() const { return weight.cols(); }
};

struct HeadConfig {
  Index d_enc = 0;
  Index d_hidden = 0;  // 0 -> 2 * d_enc
  int n_hidden_layers = 1;
  HeadKind kind = HeadKind::Monotonic;

  Index resolved_hidden() const { return d_hidden > 0 ? d_hidden : 2 * d_enc; }
};

struct ModelConfig {
  Index d_in = 0;
  Index d_enc = 0;
  HeadConfig head;
  double leaky_alpha = kDefaultLeakyAlpha;
  // Multiplies the fan-in initialization bound. The paper is silent on how
  // large the head's squared weights start out; this knob exposes the choice.
  double init_scale = 1.0;
};

// Encoder-adapter layers (the stand-in for a fine-tuned deep encoder)
// followed by the head. With HeadKind::None the model is the plain baseline:
// both head outputs alias the normalized encoder output.
struct ModelParams {
  std::vector<LayerParams> encoder_layers;
  std::vector<LayerParams> head_layers;
  HeadKind head_kind = HeadKind::None;

  Index d_in() const { return encoder_layers.front().in_dim(); }
  Index d_enc() const { return encoder_layers.back().out_dim(); }
};

// Fan-in scaled uniform init: |w| <= init_scale * sqrt(6 / fan_in), biases
// zero. Bit-deterministic under the seed (entries drawn in layer order,
// row-major).
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Parameters registered as leaves on a tape, one registration per recording.
struct LayerVars {
  ad::Var weight;
  ad::Var bias;
  const LayerParams* spec = nullptr;
};

struct ModelVars {
  std::vector<LayerVars> encoder;
  std::vector<LayerVars> head;
  HeadKind head_kind = HeadKind::None;
};

ModelVars bind(ad::Tape& tape, const ModelParams& params);

struct HeadOut {
  ad::Var raw;         // batch x d_enc, pre-normalization
  ad::Var normalized;  // batch x d_enc, unit rows
};

// Head forward: hidden = leaky_relu(x * W_eff + b) for each hidden layer,
// raw = linear output layer, normalized = row_l2_normalize(raw). W_eff is
// W .* W on monotone layers. With HeadKind::None both outputs alias
// row_l2_normalize(x).
HeadOut forward_head(const ad::Var& x, const ModelVars& vars);

struct ModelOut {
  ad::Var encoder_out;
  ad::Var head_raw;
  ad::Var head_normalized;
};

ModelOut forward_model(const ad::Var& x, const ModelVars& vars);

// Convenience for evaluation: runs forward_model on a throwaway tape.
struct ModelOutValues {
  Matrix encoder_out;
  Matrix head_raw;
  Matrix head_normalized;
};

ModelOutValues forward_eval(const Matrix& x, const ModelParams& params);

// Samples `trials` pairs x <= x' (componentwise, nonnegative perturbations)
// and checks that the head's raw outputs are componentwise ordered. Monotone
// heads satisfy this exactly, for any parameter values; no tolerance is
// applied.
struct MonotoneCheck {
  bool ok = true;
  int failed_trial = -1;
  Index failed_col = -1;
  double violation = 0.0;  // raw(x) - raw(x') at the failure, > 0
  std::string report;      // empty when ok
};

MonotoneCheck check_monotone(const ModelParams& params, int trials,
                             std::uint64_t seed);

}  // namespace monocon
