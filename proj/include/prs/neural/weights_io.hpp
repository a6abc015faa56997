// PRSW weight files and quad inference from world-space sample sets.
#pragma once

#include <memory>
#include <string>

#include "prs/geometry.hpp"
#include "prs/neural/model.hpp"

namespace prs::neural {

// PRSW layout (little-endian): magic "PRSW", version u32, config block
// (embed_dim, n_heads, n_layers, ffn_mult, head_hidden, max_points as u32,
// dropout f32), tensor count u32, then per tensor: name length u16, UTF-8
// name, rank u8, dims u32 x rank, f32 row-major data.
void save_weights(const Weights<float>& w, const std::string& path);
Weights<float> load_weights(const std::string& path);

// load_weights plus a ready-to-run model carrying the file's config.
Model<float> load_model(const std::string& path);

// Normalize -> forward (eval mode) -> denormalize -> canonicalize. Throws
// DegenerateQuad when the four predicted vertices have a degenerate hull.
ConvexQuad infer_quad(Model<float>& model, double alpha, const SampleSet& s);

}  // namespace prs::neural
