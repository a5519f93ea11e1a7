#include "dualseq/nn/dims.hpp"

#include <fmt/format.h>

#include "dualseq/errors.hpp"

namespace dualseq::nn {

void ModelDims::validate() const {
  if (hidden_dim == 0 || num_layers == 0 || embed_dim == 0) {
    throw ContractError(fmt::format("model dims must be positive (hidden {}, layers {}, embed {})", hidden_dim,
                                    num_layers, embed_dim));
  }
  if (vocab_size < 4) throw ContractError(fmt::format("vocab_size {} leaves no room for reserved tokens", vocab_size));
}

}  // namespace dualseq::nn
