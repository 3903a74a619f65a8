#include "monocon/models.hpp"

#include <cmath>
#include <sstream>

#include "monocon/rng.hpp"

namespace monocon {

std::string to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::Monotonic: return "monotonic";
    case HeadKind::Standard: return "standard";
    case HeadKind::None: return "none";
  }
  return "unknown";
}

HeadKind head_kind_from_string(const std::string& s) {
  if (s == "monotonic") return HeadKind::Monotonic;
  if (s == "standard") return HeadKind::Standard;
  if (s == "none") return HeadKind::None;
  throw ConfigError("unknown head kind '" + s + "' (monotonic|standard|none)");
}

namespace {

LayerParams init_layer(Index in_dim, Index out_dim, bool monotone,
                       Activation activation, double alpha, double init_scale,
                       Rng& rng) {
  if (in_dim <= 0 || out_dim <= 0) {
    throw ConfigError("init_params: layer dimensions must be positive, got " +
                      shape_str(in_dim, out_dim));
  }
  LayerParams layer;
  layer.weight = Matrix(in_dim, out_dim);
  const double bound = init_scale * std::sqrt(6.0 / static_cast<double>(in_dim));
  for (Index r = 0; r < in_dim; ++r) {
    for (Index c = 0; c < out_dim; ++c) {
      layer.weight(r, c) = rng.uniform(-bound, bound);
    }
  }
  layer.bias = Matrix::Zero(1, out_dim);
  layer.monotone = monotone;
  layer.activation = activation;
  layer.leaky_alpha = alpha;
  return layer;
}

ad::Var forward_layer(const ad::Var& x, const LayerVars& layer) {
  ad::Var w_eff = layer.spec->monotone ? ad::square(layer.weight) : layer.weight;
  ad::Var z = ad::add(ad::matmul(x, w_eff), layer.bias);
  if (layer.spec->activation == Activation::LeakyRelu) {
    return ad::leaky_relu(z, layer.spec->leaky_alpha);
  }
  return z;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  if (config.d_in <= 0 || config.d_enc <= 0) {
    throw ConfigError("init_params: d_in and d_enc must be positive");
  }
  if (config.head.d_enc != config.d_enc) {
    throw ConfigError("init_params: head d_enc must match model d_enc");
  }
  if (config.head.n_hidden_layers < 1) {
    throw ConfigError("init_params: head needs at least one hidden layer");
  }
  Rng rng(Rng::mix(seed, /*tag=*/0x6d6f6465));  // independent init stream

  ModelParams params;
  params.head_kind = config.head.kind;

  // Encoder-adapter: 2-layer standard MLP d_in -> d_enc -> d_enc, hidden
  // leaky_relu, linear output (the adapter output is the analyzed embedding
  // for the baseline, so its sign range stays unrestricted).
  params.encoder_layers.push_back(init_layer(config.d_in, config.d_enc, false,
                                             Activation::LeakyRelu,
                                             config.leaky_alpha,
                                             config.init_scale, rng));
  params.encoder_layers.push_back(init_layer(config.d_enc, config.d_enc, false,
                                             Activation::Identity,
                                             config.leaky_alpha,
                                             config.init_scale, rng));

  if (config.head.kind != HeadKind::None) {
    const bool monotone = config.head.kind == HeadKind::Monotonic;
    const Index hidden = config.head.resolved_hidden();
    Index in_dim = config.d_enc;
    for (int i = 0; i < config.head.n_hidden_layers; ++i) {
      params.head_layers.push_back(init_layer(in_dim, hidden, monotone,
                                              Activation::LeakyRelu,
                                              config.leaky_alpha,
                                              config.init_scale, rng));
      in_dim = hidden;
    }
    // Output layer is linear; width returns to d_enc.
    params.head_layers.push_back(init_layer(in_dim, config.d_enc, monotone,
                                            Activation::Identity,
                                            config.leaky_alpha,
                                            config.init_scale, rng));
  }
  return params;
}

ModelVars bind(ad::Tape& tape, const ModelParams& params) {
  ModelVars vars;
  vars.head_kind = params.head_kind;
  for (const LayerParams& layer : params.encoder_layers) {
    vars.encoder.push_back({tape.leaf(layer.weight), tape.leaf(layer.bias), &layer});
  }
  for (const LayerParams& layer : params.head_layers) {
    vars.head.push_back({tape.leaf(layer.weight), tape.leaf(layer.bias), &layer});
  }
  return vars;
}

HeadOut forward_head(const ad::Var& x, const ModelVars& vars) {
  if (vars.head_kind == HeadKind::None) {
    ad::Var normalized = ad::row_l2_normalize(x);
    return {normalized, normalized};
  }
  if (x.cols() != vars.head.front().spec->in_dim()) {
    throw DimensionError("forward_head: input width " + std::to_string(x.cols()) +
                         " does not match head input " +
                         std::to_string(vars.head.front().spec->in_dim()));
  }
  ad::Var h = x;
  for (const LayerVars& layer : vars.head) {
    h = forward_layer(h, layer);
  }
  return {h, ad::row_l2_normalize(h)};
}

ModelOut forward_model(const ad::Var& x, const ModelVars& vars) {
  if (x.cols() != vars.encoder.front().spec->in_dim()) {
    throw DimensionError("forward_model: input width " + std::to_string(x.cols()) +
                         " does not match encoder input " +
                         std::to_string(vars.encoder.front().spec->in_dim()));
  }
  ad::Var h = x;
  for (const LayerVars& layer : vars.encoder) {
    h = forward_layer(h, layer);
  }
  HeadOut head = forward_head(h, vars);
  return {h, head.raw, head.normalized};
}

ModelOutValues forward_eval(const Matrix& x, const ModelParams& params) {
  ad::Tape tape;
  ModelVars vars = bind(tape, params);
  ModelOut out = forward_model(tape.constant(x), vars);
  return {out.encoder_out.value(), out.head_raw.value(), out.head_normalized.value()};
}

MonotoneCheck check_monotone(const ModelParams& params, int trials,
                             std::uint64_t seed) {
  const Index dim = params.head_kind == HeadKind::None
                        ? params.d_enc()
                        : params.head_layers.front().in_dim();
  Rng rng(Rng::mix(seed, /*tag=*/0x6d6f6e6f));

  Matrix lo(trials, dim);
  Matrix hi(trials, dim);
  for (Index r = 0; r < trials; ++r) {
    for (Index c = 0; c < dim; ++c) {
      const double x = rng.uniform(-2.0, 2.0);
      const double bump = rng.uniform();  // nonnegative perturbation
      lo(r, c) = x;
      hi(r, c) = x + bump;
    }
  }

  ad::Tape tape;
  ModelVars vars = bind(tape, params);
  // Two same-shape forwards share the summation order per output entry, so
  // the comparison below is exact in floating point, not just in real
  // arithmetic.
  Matrix raw_lo = forward_head(tape.constant(lo), vars).raw.value();
  Matrix raw_hi = forward_head(tape.constant(hi), vars).raw.value();

  MonotoneCheck result;
  for (Index r = 0; r < trials; ++r) {
    for (Index c = 0; c < raw_lo.cols(); ++c) {
      if (raw_lo(r, c) > raw_hi(r, c)) {
        result.ok = false;
        result.failed_trial = static_cast<int>(r);
        result.failed_col = c;
        result.violation = raw_lo(r, c) - raw_hi(r, c);
        std::ostringstream os;
        os << "monotonicity violated at trial " << r << ", output " << c
           << ": raw(x)=" << raw_lo(r, c) << " > raw(x')=" << raw_hi(r, c);
        result.report = os.str();
        return result;
      }
    }
  }
  return result;
}

}  // namespace monocon
