#include "dualseq/eval/predict.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

namespace dualseq::eval {

std::size_t eval_threads() {
  if (const char* env = std::getenv("DUALSEQ_THREADS")) {
    std::size_t n = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, n);
    if (ec == std::errc() && ptr == end && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::vector<TokenId>> predict(const model::DualModel& model, model::Origin encoder,
                                          std::span<const std::vector<TokenId>> inputs, std::size_t max_len,
                                          std::size_t threads, std::size_t batch_size) {
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].empty()) live.push_back(i);
  }
  std::vector<std::vector<TokenId>> out(inputs.size());
  batch_size = std::max<std::size_t>(batch_size, 1);
  const std::size_t batches = (live.size() + batch_size - 1) / batch_size;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    std::vector<std::vector<TokenId>> batch;
    for (std::size_t b; (b = next.fetch_add(1)) < batches;) {
      const std::size_t lo = b * batch_size;
      const std::size_t hi = std::min(live.size(), lo + batch_size);
      batch.clear();
      for (std::size_t k = lo; k < hi; ++k) batch.push_back(inputs[live[k]]);
      try {
        auto decoded = model::respond(model, encoder, batch, max_len);
        for (std::size_t k = lo; k < hi; ++k) out[live[k]] = std::move(decoded[k - lo]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(batches);
      }
    }
  };

  const std::size_t n = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(batches, 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<std::vector<TokenId>> make_reference_predictions(const model::DualModel& text_model,
                                                             std::span<const std::vector<TokenId>> test_enc,
                                                             std::size_t max_len) {
  return predict(text_model, model::Origin::Text, test_enc, max_len);
}

bool looks_untrained(const model::DualModel& m) { return m.stage == model::Stage::Initialized; }

}  // namespace dualseq::eval
