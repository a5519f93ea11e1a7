#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dualseq/model/dual_model.hpp"
#include "dualseq/model/forward.hpp"

namespace dualseq::eval {

using ad::TokenId;

/// Thread cap for evaluation: DUALSEQ_THREADS when set to a positive
/// integer, else the hardware concurrency (at least 1).
std::size_t eval_threads();

/// Greedy responses for many inputs, decoded in batches spread over
/// `threads` workers. Output i belongs to input i and does not depend on the
/// batching or the thread count. Empty inputs get empty responses.
std::vector<std::vector<TokenId>> predict(const model::DualModel& model, model::Origin encoder,
                                          std::span<const std::vector<TokenId>> inputs, std::size_t max_len,
                                          std::size_t threads = eval_threads(), std::size_t batch_size = 64);

/// test.pred: the text encoder's greedy responses to clean test inputs.
std::vector<std::vector<TokenId>> make_reference_predictions(const model::DualModel& text_model,
                                                             std::span<const std::vector<TokenId>> test_enc,
                                                             std::size_t max_len);

/// True while a model has never been trained.
bool looks_untrained(const model::DualModel& m);

}  // namespace dualseq::eval
