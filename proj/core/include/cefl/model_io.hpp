#pragma once

// Checkpoint formats for ModelParams.
//
// JSON:
//   {"format": "cefl-model", "version": 1,
//    "layers": [{"input_dim": I, "output_dim": O, "activation": "relu",
//                "weights": [O*I values, row-major], "bias": [O values]}, ...]}
//
// Binary (little-endian):
//   8 bytes  magic "CEFLMDL1"
//   u32      layer count L
//   L times  u32 input_dim, u32 output_dim, u32 activation (0 relu,
//            1 softmax, 2 identity)
//   L times  input_dim*output_dim weights (row-major) then output_dim biases,
//            each an IEEE-754 binary64
//
// Both forms round-trip bit-exactly.

#include <iosfwd>
#include <string>
#include <string_view>

#include "cefl/model.hpp"

namespace cefl {

std::string model_to_json(const ModelParams& m);
/// Throws ParseError on malformed input, ConfigError on an invalid model.
ModelParams model_from_json(std::string_view text);

void write_model_binary(const ModelParams& m, std::ostream& out);
ModelParams read_model_binary(std::istream& in);

}  // namespace cefl
